#include "kryrank/harness/table1.hpp"

#include <chrono>
#include <cmath>
#include <ostream>

#include "kryrank/harness/report.hpp"
#include "kryrank/matrix_market.hpp"

namespace kryrank::harness {

namespace {

constexpr Eigen::Index kErrorBlock = 256;
constexpr std::uint64_t kStartStream = stream_id(2, 0);

EstimationResult<double> estimate_with(const ObservationMatrixd& a, const std::string& op, const CriterionConfig& cfg,
                                       Rng& rng) {
  std::string kind = op;
  if (kind == "auto") kind = asymmetry(a) <= 1e-10 ? "direct" : "gram";
  if (kind == "direct") return estimate_dimension(DirectOperator<double>(a), cfg, rng);
  if (kind == "gram") return estimate_dimension(CovarianceOperator<double>(a, 1.0), cfg, rng);
  return estimate_dimension(CovarianceOperator<double>(a), cfg, rng);
}

}  // namespace

double projection_error(const ObservationMatrixd& a, const Matrix<double>& y) {
  if (y.rows() != a.rows()) throw DimensionError("projection_error: basis has the wrong number of rows");
  double total = 0.0;
  auto accumulate = [&](const Matrix<double>& block) {
    if (y.cols() == 0) {
      total += block.squaredNorm();
      return;
    }
    const Matrix<double> coeff = y.transpose() * block;
    total += (block - y * coeff).squaredNorm();
  };
  if (!a.is_sparse()) {
    for (Eigen::Index j = 0; j < a.cols(); j += kErrorBlock) {
      accumulate(a.dense().middleCols(j, std::min(kErrorBlock, a.cols() - j)));
    }
  } else {
    const Eigen::SparseMatrix<double, Eigen::ColMajor> cols = a.sparse();
    for (Eigen::Index j = 0; j < a.cols(); j += kErrorBlock) {
      accumulate(Matrix<double>(cols.middleCols(j, std::min(kErrorBlock, a.cols() - j))));
    }
  }
  return std::sqrt(total);
}

std::vector<Table1Row> run_table1(const Table1Spec& spec) {
  std::vector<Table1Row> rows;
  for (const auto& entry : spec.entries) {
    CriterionConfig cfg = spec.criterion;
    cfg.sigma = entry.sigma;

    std::optional<ObservationMatrixd> loaded;
    if (!entry.synthetic) {
      try {
        loaded.emplace(load_matrix_market(entry.path));
      } catch (const std::exception& e) {
        Table1Row row;
        row.dataset = entry.name;
        row.actual_q = entry.actual_q;
        row.lambda_q = entry.lambda_q;
        row.sigma = entry.sigma;
        row.seed = entry.seeds.empty() ? 0 : entry.seeds.front();
        row.status = std::string("error: ") + e.what();
        rows.push_back(std::move(row));
        continue;
      }
    }

    for (std::uint64_t seed : entry.seeds) {
      Table1Row row;
      row.dataset = entry.name;
      row.actual_q = entry.actual_q;
      row.lambda_q = entry.lambda_q;
      row.sigma = entry.sigma;
      row.seed = seed;
      try {
        std::optional<ObservationMatrixd> generated;
        if (entry.synthetic) {
          SparseModelSpec model = *entry.synthetic;
          model.seed = seed;
          generated.emplace(gen_sparse_lowrank(model));
        }
        const ObservationMatrixd& a = generated ? *generated : *loaded;
        row.p = static_cast<long>(a.rows());
        Rng rng(seed, kStartStream);
        const auto t0 = std::chrono::steady_clock::now();
        const auto res = estimate_with(a, entry.op, cfg, rng);
        row.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        row.q_hat = static_cast<long>(res.q_hat);
        row.frob_error = projection_error(a, res.subspace);
      } catch (const std::exception& e) {
        row.status = std::string("error: ") + e.what();
      }
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_table1_csv(std::ostream& out, const std::vector<Table1Row>& rows, bool timings) {
  auto opt = [](const auto& v) { return v ? csv_number(static_cast<double>(*v)) : std::string("NA"); };
  out << "dataset,p,actual_q,lambda_q,sigma,estimated_q,frob_error,runtime,seed,status\n";
  for (const auto& r : rows) {
    std::string status = r.status;
    for (char& c : status) {
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    }
    out << r.dataset << ',' << r.p << ',' << opt(r.actual_q) << ',' << opt(r.lambda_q) << ',' << csv_number(r.sigma)
        << ',' << opt(r.q_hat) << ',' << (r.frob_error ? format_double(*r.frob_error, 10) : std::string("NA")) << ','
        << (timings ? csv_number(r.runtime) : std::string("NA")) << ',' << r.seed << ',' << status << '\n';
  }
}

}  // namespace kryrank::harness
