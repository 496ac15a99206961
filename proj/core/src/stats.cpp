#include "hkb/stats.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "hkb/error.hpp"

namespace hkb {

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(ErrorCode::InvalidParameters, "line fit needs two or more points");
  if (std::all_of(x.begin(), x.end(), [&](double v) { return v == x.front(); }))
    throw Error(ErrorCode::InvalidParameters, "line fit needs distinct abscissae");
  const Eigen::Index m = static_cast<Eigen::Index>(x.size());
  Eigen::MatrixXd a(m, 2);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a(i, 0) = 1;
    a(i, 1) = x[i];
    b(i) = y[i];
  }
  const Eigen::VectorXd c = a.colPivHouseholderQr().solve(b);
  LineFit f{c(1), c(0), (a * c - b).cwiseAbs().maxCoeff()};
  return f;
}

LineFit fit_power_law(const std::vector<double>& n, const std::vector<double>& log_y, int corrections) {
  const Eigen::Index k = 2 + corrections;
  if (corrections < 0) throw Error(ErrorCode::InvalidParameters, "negative number of correction terms");
  if (n.size() != log_y.size() || static_cast<Eigen::Index>(n.size()) <= k)
    throw Error(ErrorCode::InvalidParameters, "too few points for the requested fit");
  const Eigen::Index m = static_cast<Eigen::Index>(n.size());
  Eigen::MatrixXd a(m, k);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (!(n[i] > 0)) throw Error(ErrorCode::InvalidParameters, "power-law fit needs positive abscissae");
    a(i, 0) = 1;
    a(i, 1) = std::log(n[i]);
    for (int j = 1; j <= corrections; ++j) a(i, 1 + j) = std::pow(n[i], -j);
    b(i) = log_y[i];
  }
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < k) throw Error(ErrorCode::InvalidParameters, "power-law fit is degenerate");
  const Eigen::VectorXd c = qr.solve(b);
  return {c(1), c(0), (a * c - b).cwiseAbs().maxCoeff()};
}

std::vector<double> least_squares(const std::vector<std::vector<double>>& rows, const std::vector<double>& y) {
  if (rows.empty() || rows.size() != y.size()) throw Error(ErrorCode::InvalidParameters, "design and data sizes differ");
  const Eigen::Index m = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index k = static_cast<Eigen::Index>(rows.front().size());
  if (m < k) throw Error(ErrorCode::InvalidParameters, "too few points for the requested fit");
  Eigen::MatrixXd a(m, k);
  Eigen::VectorXd b(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    if (static_cast<Eigen::Index>(rows[i].size()) != k) throw Error(ErrorCode::InvalidParameters, "ragged design");
    for (Eigen::Index j = 0; j < k; ++j) a(i, j) = rows[i][j];
    b(i) = y[i];
  }
  const auto qr = a.colPivHouseholderQr();
  if (qr.rank() < k) throw Error(ErrorCode::InvalidParameters, "least-squares design is degenerate");
  const Eigen::VectorXd c = qr.solve(b);
  return {c.data(), c.data() + k};
}

}  // namespace hkb
