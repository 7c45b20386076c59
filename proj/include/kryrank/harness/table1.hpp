#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "kryrank/harness/config.hpp"
#include "kryrank/observation_matrix.hpp"

namespace kryrank::harness {

struct Table1Row {
  std::string dataset;
  long p = 0;
  std::optional<long> actual_q;
  std::optional<double> lambda_q;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  std::optional<long> q_hat;
  std::optional<double> frob_error;
  double runtime = 0.0;
  std::string status = "ok";
};

/// ||A - Y (Y^T A)||_F, streamed over column blocks of 256.
double projection_error(const ObservationMatrixd& a, const Matrix<double>& y);

/// Runs every entry and seed in order. A failing matrix produces a row with
/// an error status instead of aborting the run.
std::vector<Table1Row> run_table1(const Table1Spec& spec);

/// Header `dataset,p,actual_q,lambda_q,sigma,estimated_q,frob_error,runtime,seed,status`.
void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows, bool timings);

}  // namespace kryrank::harness
