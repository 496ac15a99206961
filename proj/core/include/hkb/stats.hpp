#pragma once

#include <vector>

namespace hkb {

struct LineFit {
  double slope = 0;
  double intercept = 0;
  double max_residual = 0;
};

// Ordinary least squares y ≈ slope·x + intercept.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// log y ≈ intercept + slope·log n + Σ_{j=1..corrections} c_j n^{-j}; the power terms absorb
// the subleading corrections of an asymptotic expansion in 1/n.
LineFit fit_power_law(const std::vector<double>& n, const std::vector<double>& log_y, int corrections);

// Least-squares coefficients of y ≈ Σ_j c_j·rows[i][j]; throws on a rank-deficient design.
std::vector<double> least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y);

}  // namespace hkb
