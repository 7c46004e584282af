#include "eigenshift/shift_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eigenshift/errors.hpp"

namespace eigenshift {

namespace {

// The 144-coefficient term is written with this exact association so that
// halving it reproduces the published max{6rx, 72rw^2/radius} form bitwise
// (every factor scales by a power of two).
double internal_width(double r, double x, double w, double radius) {
  return std::max(12.0 * r * x, 144.0 * r * w * w / radius);
}

bool all_finite(const std::map<std::string, double>& m) {
  for (const auto& [k, v] : m)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace

nlohmann::json shift_certificate_to_json(const ShiftCertificate& c) {
  nlohmann::json j;
  j["target"] = c.target;
  j["direction"] = c.direction == ShiftDirection::lower ? "lower" : "upper";
  j["delta_internal"] = c.delta_internal;
  j["bound"] = c.bound;
  j["hypotheses"] = c.hypotheses;
  j["valid"] = c.valid;
  return j;
}

ShiftCertificate lower_eigen_shift(const Spectrum& spec,
                                   const SkewnessReport& q, int p,
                                   double lambda_bar) {
  const int n = static_cast<int>(spec.eigenvalues.size());
  if (p < 1 || p > n) throw InvalidSelection("p must be in [1, n]");
  if (!(lambda_bar > 0.0))
    throw InvalidRadius("lambda_bar must be positive");

  std::vector<int> lead(static_cast<size_t>(p));
  for (int i = 0; i < p; ++i) lead[static_cast<size_t>(i)] = i;
  const Selection sel = select_neighborhood(spec, lead, lambda_bar);
  const double r = static_cast<double>(sel.r);
  const double sr = std::sqrt(r);
  const double delta_p = p < n ? spec.eigenvalues(p - 1) - spec.eigenvalues(p)
                               : std::numeric_limits<double>::infinity();

  ShiftCertificate c;
  c.target = p - 1;
  c.direction = ShiftDirection::lower;
  c.delta_internal = internal_width(r, q.x, q.w, lambda_bar);
  c.bound = 0.5 * c.delta_internal;
  c.hypotheses["noise_radius"] = 12.0 * q.E_norm / lambda_bar;
  c.hypotheses["gap_margin"] = c.delta_internal / delta_p;
  c.hypotheses["bound_display"] =
      12.0 * (q.E_norm / lambda_bar + sr * q.x / delta_p + sr * q.y / delta_p);
  c.valid = all_finite(c.hypotheses) && std::isfinite(c.bound) &&
            c.hypotheses["noise_radius"] <= 1.0 &&
            c.hypotheses["gap_margin"] <= 1.0 &&
            c.hypotheses["bound_display"] < 1.0;
  return c;
}

ShiftCertificate upper_eigen_shift(const Spectrum& spec,
                                   const SkewnessReport& q, double lambda_bar,
                                   bool leading_form) {
  const int n = static_cast<int>(spec.eigenvalues.size());
  if (n < 1) throw InvalidSelection("empty spectrum");

  ShiftCertificate c;
  c.target = 0;
  c.direction = ShiftDirection::upper;
  if (leading_form) {
    const double lambda_1 = spec.eigenvalues(0);
    int r = 0;
    for (int i = 0; i < n; ++i)
      if (spec.eigenvalues(i) >= lambda_1 / 2.0) ++r;
    c.delta_internal = std::max(12.0 * r * q.x,
                                144.0 * r * q.E_norm * q.E_norm / lambda_1);
    c.bound = 0.5 * c.delta_internal;
    c.hypotheses["leading_noise"] = 48.0 * q.E_norm / lambda_1;
    c.valid = all_finite(c.hypotheses) && std::isfinite(c.bound) &&
              c.hypotheses["leading_noise"] <= 1.0;
    return c;
  }

  if (!(lambda_bar > 0.0))
    throw InvalidRadius("lambda_bar must be positive");
  const Selection sel = select_neighborhood(spec, {0}, lambda_bar);
  c.delta_internal =
      internal_width(static_cast<double>(sel.r), q.x, q.w, lambda_bar);
  c.bound = 0.5 * c.delta_internal;
  c.hypotheses["noise_radius"] = 24.0 * q.E_norm / lambda_bar;
  c.valid = all_finite(c.hypotheses) && std::isfinite(c.bound) &&
            c.hypotheses["noise_radius"] <= 1.0;
  return c;
}

SingularFloor least_singular_floor(const Spectrum& spec,
                                   const Eigen::MatrixXd& E, double sigma_min,
                                   double T) {
  const int n = static_cast<int>(spec.eigenvalues.size());
  if (E.rows() != n || E.cols() != n)
    throw DimensionError("perturbation shape does not match the spectrum");
  if (!(sigma_min > 0.0))
    throw SingularInput("floor needs a full-rank input, sigma_min > 0");
  if (!(T > 0.0)) throw InvalidRadius("threshold T must be positive");

  SingularFloor f;
  f.T = T;
  for (int i = 0; i < n; ++i)
    if (std::abs(spec.eigenvalues(i)) <= T) f.Lambda_T.push_back(i);
  f.r_T = static_cast<int>(f.Lambda_T.size());

  if (f.r_T > 0) {
    Eigen::MatrixXd U(n, f.r_T);
    for (int k = 0; k < f.r_T; ++k)
      U.col(k) = spec.eigenvectors.col(f.Lambda_T[static_cast<size_t>(k)]);
    f.x_T = (U.transpose() * E * U).cwiseAbs().maxCoeff();
  }

  const double E_norm = operator_norm(E);
  const double r = static_cast<double>(f.r_T);
  f.lhs = 48.0 * (E_norm / T + r * f.x_T / sigma_min +
                  r * E_norm * E_norm / (T * sigma_min));
  f.guaranteed = std::isfinite(f.lhs) && f.lhs < 1.0;
  return f;
}

Eigen::MatrixXd augment_zero_row_col(const Eigen::MatrixXd& M) {
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(M.rows() + 1, M.cols() + 1);
  G.topLeftCorner(M.rows(), M.cols()) = M;
  return G;
}

ConditionGuard condition_guard(const Spectrum& spec, const Eigen::MatrixXd& E,
                               double T) {
  const int n = static_cast<int>(spec.eigenvalues.size());
  if (n < 1) throw InvalidSelection("empty spectrum");
  const double sigma_min = spec.eigenvalues.cwiseAbs().minCoeff();
  const double sigma_max = spec.eigenvalues.cwiseAbs().maxCoeff();

  ConditionGuard g;
  if (!(sigma_min > 0.0)) {
    // Singular input has no condition number to certify; report an
    // unbounded ratio instead of raising.
    g.kappa_ratio_bound = std::numeric_limits<double>::infinity();
    g.slack = std::numeric_limits<double>::infinity();
    return g;
  }
  g.floor = least_singular_floor(spec, E, sigma_min, T);
  const double E_norm = operator_norm(E);
  g.slack = sigma_max > 0.0 ? E_norm / sigma_max
                            : std::numeric_limits<double>::infinity();

  // Numerator inflation is Weyl; the denominator keeps the better of the
  // Weyl decrease and the guaranteed sigma_min/2 floor.
  double denom = 1.0 - E_norm / sigma_min;
  if (g.floor.guaranteed) denom = std::max(denom, 0.5);
  g.kappa_ratio_bound = denom > 0.0
                            ? (1.0 + g.slack) / denom
                            : std::numeric_limits<double>::infinity();
  g.valid = g.floor.guaranteed && g.slack <= 0.1 &&
            std::isfinite(g.kappa_ratio_bound);
  return g;
}

OutlierForecast dw_outlier(double lambda_i, int n, double x,
                           double /*E_norm*/) {
  // Degenerate inputs (lambda_i == 0) surface as non-finite predictions
  // rather than exceptions; the regime flag is false there anyway.
  OutlierForecast f;
  f.prediction = static_cast<double>(n) / lambda_i;
  f.correction_bound = f.prediction + x;
  f.corollary_regime = lambda_i >= 48.0 * std::sqrt(static_cast<double>(n));
  return f;
}

}  // namespace eigenshift
