#pragma once

#include <Eigen/Dense>
#include <vector>

#include "eigenshift/spectral.hpp"
#include "json.hpp"

namespace eigenshift {

// An index selection together with its spectral neighborhood: N holds every
// index whose eigenvalue lies within lambda_bar of some selected one.
// S and N are 0-based and sorted ascending; p = |S|, r = |N|.
struct Selection {
  std::vector<int> S;
  double lambda_bar = 0.0;
  std::vector<int> N;
  int p = 0;
  int r = 0;
};

// Gap geometry around a selection. `delta` is a caller-adjustable contour
// margin initialized to delta_S; evaluators demand 0 < delta <= delta_S.
struct GapReport {
  double delta_S = 0.0;            // min |λ_i - λ_j| over i in S, j outside
  double delta_p = 0.0;            // λ_p - λ_{p+1}
  double delta_p_two_sided = 0.0;  // min(δ_{p-1}, δ_p), δ_0 treated as +inf
  double delta_bar_p = 0.0;        // boundary gap of the top-p magnitude set
  double delta = 0.0;
};

struct SkewnessReport {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double xbar = 0.0;
  double ybar = 0.0;
  double sigma = 0.0;
  double E_norm = 0.0;
};

Selection select_neighborhood(const Spectrum& spec, const std::vector<int>& S,
                              double lambda_bar);

// Same machinery over an arbitrary value vector; used for singular values.
Selection select_neighborhood_values(const Eigen::VectorXd& values,
                                     const std::vector<int>& S,
                                     double lambda_bar);

GapReport spectral_gaps(const Spectrum& spec, const std::vector<int>& S,
                        int p);

// x = max_{i,j in N} |u_i^T E u_j|
// w = max_{i in N} ||E u_i||
// y = max_{i != j in N, k in kset}
//       |u_i^T E (sum_{l not in N} u_l u_l^T / (λ_k - λ_l)) E u_j|
// The middle factor is evaluated through W = U_out^T E U_N, which keeps the
// cost at O(n^2 r + r^2 |kset| (n-r)) and fixes the summation order, so the
// result is bitwise reproducible. kset indexes eigenvalues and must be a
// subset of sel.S; empty means all of S.
SkewnessReport skew_xyw(const Spectrum& spec, const Eigen::MatrixXd& E,
                        const Selection& sel,
                        const std::vector<int>& kset = {});

// xbar over all index pairs, ybar = max_{i != j in N} |u_i^T E^2 u_j|,
// sigma = min over the leading p indices of |λ_i|.
SkewnessReport skew_aux(const Spectrum& spec, const Eigen::MatrixXd& E,
                        const Selection& sel, int p);

// Rectangular variants. U: m x q and V: n x q hold singular vectors for the
// q singular values in `sigma` (descending); E is m x n; sel indexes
// singular triplets. y takes the larger of its two one-sided forms. The
// middle sums run over nonzero singular directions outside N only; a
// direction counts as nonzero when sigma_l > 1e-12 * sigma_max, since the
// null directions of the underlying matrix carry no resolvent weight.
SkewnessReport rect_skew_xyw(const Eigen::MatrixXd& U,
                             const Eigen::MatrixXd& V,
                             const Eigen::VectorXd& sigma,
                             const Eigen::MatrixXd& E, const Selection& sel);

nlohmann::json skew_to_json(const SkewnessReport& sk, const Selection& sel,
                            double delta_S);

}  // namespace eigenshift
