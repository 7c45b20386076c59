#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kryrank/harness/config.hpp"

namespace kryrank::harness {

struct Chi2Point {
  long n = 0;
  double mean_ratio = 0.0;
};

/// Mean chi-square ratio of the exact noise tail for every n in the grid.
std::vector<Chi2Point> run_chi2_check(const Chi2Spec& spec, int workers = 0);

/// Header `n,mean_ratio`.
void write_chi2_csv(std::ostream& out, const std::vector<Chi2Point>& points);
std::string chi2_svg(const std::vector<Chi2Point>& points, const std::string& title);

}  // namespace kryrank::harness
