#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <vector>

#include "eigenshift/selection.hpp"
#include "eigenshift/spectral.hpp"
#include "json.hpp"

namespace eigenshift {

// Certificate that an eigenvalue cannot move past a contour drawn
// delta_internal/2 away. `hypotheses` maps each named check to its ratio;
// a check passes at <= 1 (the bound_display entry of the lower certificate
// must be strictly < 1) and `valid` is the conjunction. Failed hypotheses
// are diagnostics, not errors: the certificate is always returned.
enum class ShiftDirection { lower, upper };

struct ShiftCertificate {
  int target = 0;  // 0-based index of the certified eigenvalue
  ShiftDirection direction = ShiftDirection::lower;
  double delta_internal = 0.0;  // max{12*r*x, 144*r*w^2/lambda_bar}
  double bound = 0.0;           // delta_internal/2, exact
  std::map<std::string, double> hypotheses;
  bool valid = false;
};

nlohmann::json shift_certificate_to_json(const ShiftCertificate& c);

// How far the p-th eigenvalue (1-based count of leading eigenvalues) can
// drop: lambda_p - tl_p <= bound when valid. q carries the measured noise
// quantities (x, y, w, E_norm) over the lambda_bar-neighborhood of the
// leading p indices; r is recomputed here from spec and lambda_bar.
// Hypotheses: noise_radius = 12*E_norm/lambda_bar, gap_margin =
// delta_internal/delta_p, bound_display = 12*(E_norm/lambda_bar
// + sqrt(r)*x/delta_p + sqrt(r)*y/delta_p) (strict). lambda_bar <= 0
// throws InvalidRadius; everything else is reported, never thrown.
ShiftCertificate lower_eigen_shift(const Spectrum& spec,
                                   const SkewnessReport& q, int p,
                                   double lambda_bar);

// How far the top eigenvalue can rise: tl_1 - lambda_1 <= bound when
// valid. Default form has the single hypothesis noise_radius =
// 24*E_norm/lambda_bar, with r the neighborhood count of the top index.
// leading_form = true instead sets lambda_bar = lambda_1/2, counts
// r = #{lambda_i >= lambda_1/2}, replaces the w term by
// 144*r*E_norm^2/lambda_1, and checks leading_noise = 48*E_norm/lambda_1.
ShiftCertificate upper_eigen_shift(const Spectrum& spec,
                                   const SkewnessReport& q, double lambda_bar,
                                   bool leading_form = false);

// Floor certificate for the least singular value under full-rank input:
// guaranteed means every singular value of A + E stays above sigma_min/2.
// Lambda_T collects the indices with |lambda_i| <= T and x_T is the
// largest noise overlap among their eigenvectors.
struct SingularFloor {
  double T = 0.0;
  std::vector<int> Lambda_T;
  int r_T = 0;
  double x_T = 0.0;
  double lhs = 0.0;  // 48*(E/T + r_T*x_T/sigma_min + r_T*E^2/(T*sigma_min))
  bool guaranteed = false;
};

SingularFloor least_singular_floor(const Spectrum& spec,
                                   const Eigen::MatrixXd& E, double sigma_min,
                                   double T);

// Appends one all-zero row and column; the nonzero singular values are
// unchanged, which is how rank-deficient augmentations are checked.
Eigen::MatrixXd augment_zero_row_col(const Eigen::MatrixXd& M);

// Condition-number certificate kappa(A+E) <= kappa_ratio_bound * kappa(A).
// The ratio combines the Weyl numerator inflation 1 + E/sigma_max with the
// better of the Weyl denominator 1 - E/sigma_min and (when the floor is
// guaranteed) the 1/2 floor. valid needs the floor guaranteed and the
// sigma_max >= 10*E_norm slack; slack reports E_norm/sigma_max.
struct ConditionGuard {
  double kappa_ratio_bound = 0.0;
  double slack = 0.0;
  SingularFloor floor;
  bool valid = false;
};

ConditionGuard condition_guard(const Spectrum& spec, const Eigen::MatrixXd& E,
                               double T);

// First-order outlier location for a deterministic spike of size lambda_i
/// inside unnormalized unit-variance noise on n coordinates: the shift
// tl_i - lambda_i concentrates at n/lambda_i, with an additive x
// correction covering the diagonal-entry fluctuation. corollary_regime
// reports whether lambda_i >= 48*sqrt(n), the checked validity zone;
// E_norm is accepted for use with general noise models but does not enter
// the regime check, which is calibrated to unit-variance entries.
struct OutlierForecast {
  double prediction = 0.0;        // n / lambda_i
  double correction_bound = 0.0;  // n / lambda_i + x
  bool corollary_regime = false;
};

OutlierForecast dw_outlier(double lambda_i, int n, double x, double E_norm);

}  // namespace eigenshift
