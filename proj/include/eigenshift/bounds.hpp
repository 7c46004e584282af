#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "eigenshift/selection.hpp"
#include "eigenshift/spectral.hpp"
#include "json.hpp"

namespace eigenshift {

// Assumption displays gating the perturbation bounds. Each one is a maximum
// of named nondimensional ratios; the display "holds" when that maximum is
// at most 1/12 (with a 1e-15 slack so boundary cases are not lost to
// rounding). C0/C1 measure against the full selection gap, D0/D1 against a
// caller-chosen contour margin delta <= delta_S. C2 is the abstract form in
// terms of (eps1, eps2, eta, t1). C3 covers spiked spectra using the
// two-sided order gap; C3p is the same display with the one-sided gap.
enum class AssumptionKind { C0, D0, C1, D1, C2, C3, C3p };

std::string assumption_kind_name(AssumptionKind kind);
AssumptionKind assumption_kind_from_name(const std::string& name);

struct AssumptionVerdict {
  AssumptionKind kind = AssumptionKind::C0;
  std::map<std::string, double> terms;
  double max_ratio = 0.0;
  bool holds = false;
};

// Required inputs by kind (missing keys raise IncompleteInput naming them):
//   C0: p, r, E_norm, lambda_bar, delta_S, x, w
//   D0: p, r, E_norm, lambda_bar, delta, x, w
//   C1: p, r, E_norm, sigma_bar, delta_S, x, w
//   D1: p, r, E_norm, sigma_bar, delta, x, w
//   C2: p, r, eps1, eps2, eta, t1
//   C3: p, r, E_norm, lambda_p, lambda_r1, lambda_1, n, delta_p_two_sided
//   C3p: as C3 but with delta_p in place of delta_p_two_sided
AssumptionVerdict check_assumption(AssumptionKind kind,
                                   const std::map<std::string, double>& in);

// One perturbation bound, reported even when its hypotheses fail. `terms`
// is a named breakdown; for additive bounds `value` is the exact floating
// sum of the terms in map iteration order. `valid` means the attached
// assumption (if any) holds and the value is finite; evaluators may clear
// it for extra reasons documented at their declaration.
struct BoundReport {
  std::string method;
  double value = 0.0;
  std::map<std::string, double> terms;
  std::optional<AssumptionVerdict> assumption;
  bool valid = false;
  bool constant_free = false;
};

nlohmann::json assumption_to_json(const AssumptionVerdict& v);
nlohmann::json bound_report_to_json(const BoundReport& b);

struct ClassicalBounds {
  double weyl = 0.0;         // eigenvalue shift: ||E||
  double davis_kahan = 0.0;  // projector distance: 2||E||/delta_S
};

ClassicalBounds classical_bounds(double E_norm, double delta_S);

// Projector-distance bound 12*sqrt(p) * (||E||/lambda_bar + sqrt(r)*x/g
// + sqrt(r)*y/g), where g is the gap matching the mode: delta_p for
// leading_p, delta_bar_p for singular_p, delta_S for general_S. The
// attached assumption is C0 with the same gap for the first two modes and
// D0 at margin gaps.delta for general_S. singular_p additionally clears
// `valid` when the value reaches 1, where the singular-space statement
// carries no information.
enum class EigenspaceMode { leading_p, singular_p, general_S };

BoundReport eigenspace_bound(EigenspaceMode mode, const SkewnessReport& sk,
                             const Selection& sel, const GapReport& gaps);

// Variants replacing the y term of the leading_p bound:
//   trivial:      y -> ||E||^2 / lambda_bar
//   spectral_sum: y term -> sqrt(r) * xbar^2/delta_p * sum_{l>r} 1/(l_p-l_l)
//                 (requires lambda_p above every eigenvalue outside the
//                 leading r, else DegenerateGap)
//   low_rank:     12*sqrt(p) * (||E||/lambda_p + sqrt(r)*x/delta_p
//                 + sqrt(r)*ybar/(delta_p*sigma)
//                 + r^{3/2}*x^2/(delta_p*sigma)); needs lambda_p > 0
//                 (NegativeSpike) and sigma > 0 (DegenerateGap). Intended
//                 for rank-r signals; with full-rank input it still
//                 evaluates but the premise is the caller's burden.
enum class YVariant { trivial, spectral_sum, low_rank };

BoundReport y_variant_bounds(YVariant variant, const SkewnessReport& sk,
                             const Selection& sel, const GapReport& gaps,
                             const Spectrum& spec);

// Singular-subspace bound 12*sqrt(2p) * (||E||/sigma_bar
// + (sqrt(r)*x + sqrt(r)*y)/delta_S) over singular triplets, with
// sigma_bar = sel.lambda_bar. Assumption D1 at margin gaps.delta.
BoundReport rectangular_bound(const SkewnessReport& sk, const Selection& sel,
                              const GapReport& gaps);

// Benchmark bounds from the comparison literature, reported with their
// leading constants set to 1 (constant_free = true). Preconditions raise
// PreconditionFailed naming the violated inequality. p is 1-based and must
// satisfy 1 <= p < n.
//   KL: xbar * sum_{i<=p<j} 1/(l_i-l_j) + (||E||/delta_p)^2,
//       needs 2||E|| <= delta_p.
//   BT: picks its own block size r = smallest r >= p with
//       |l_p|/2 <= |l_p - l_{r+1}| (n if none); value
//       ||E||/|l_p| * log(6*sigma1/delta_p) + r^2*x_r/delta_p with
//       x_r over the leading r eigenvectors; needs 4||E|| <= delta_p and
//       delta_p <= |l_p|/4.
//   JW: needs a strictly positive spectrum; x0 = max |u_i^T E u_j| /
//       sqrt(l_i*l_j); needs r_p <= 1/(8*x0) where r_p sums the
//       eigenvalue-to-boundary-gap ratios on both sides; value
//       x0 * sqrt(sum_{i<=p<j} l_i*l_j/(l_i-l_j)^2).
enum class Comparator { KL, BT, JW };

BoundReport comparator_bounds(Comparator method, const Spectrum& spec,
                              const Eigen::MatrixXd& E, int p);

// Ingredients of the JW comparator, exposed so callers can inspect why its
// precondition held or failed. relative_overlap_max is x0 above;
// gap_ratio_sum is r_p for the split after position p (1-based).
double relative_overlap_max(const Spectrum& spec, const Eigen::MatrixXd& E);
double gap_ratio_sum(const Spectrum& spec, int p);

// Asymptotic sample-eigenvector inaccuracy for spiked covariance models
// with aspect ratio gamma = d/n.
//   johnstone: population spike lambda_p over a unit bulk; requires
//              lambda_p > 1 + sqrt(gamma) (else SubcriticalSpike); value
//              sqrt(lambda_p*gamma / ((lambda_p-1)^2 + (lambda_p-1)*gamma)).
//   byz:       general bulk distribution H (nonempty list of population
//              eigenvalues); phi(l) = l + gamma*mean(t*l/(l-t)); requires
//              lambda_p distinct from every bulk point (DegenerateGap) and
//              phi'(lambda_p) > 0 (SubcriticalSpike); value
//              sqrt(1 - lambda_p*phi'(lambda_p)/phi(lambda_p)).
enum class SpikedModel { johnstone, byz };

double spiked_limit(SpikedModel model, double lambda_p, double gamma,
                    const std::vector<double>& H = {});

// Constant-free comparison of the relative-gap benchmark against the
// skewness-based bound on a decaying spectrum lambda_i = lambda1 * h(i):
//   polynomial  h(i) = i^{-c}
//   exponential h(i) = exp(-c*i)
//   logarithmic h(i) = log(i+1)^{-c}
// jw_value = 1/(lambda1*h(n)) * sqrt(sum_{i<=p<j} h_i*h_j/(h_i-h_j)^2);
// tv_value = sqrt(n)/lambda1 + 1/(lambda1*(h_p-h_{p+1}))
//            * (1 + sum_{l>p} 1/(lambda1*(h_p-h_l))).
// Throws DegenerateGap when the profile underflows to zero or stops
// decreasing at double precision.
enum class DecayFamily { polynomial, exponential, logarithmic };

struct DecayComparison {
  double jw_value = 0.0;
  double tv_value = 0.0;
  double ratio = 0.0;  // jw_value / tv_value
};

DecayComparison decay_comparison_bounds(DecayFamily family, double c, int p,
                                        int n, double lambda1);

}  // namespace eigenshift
