#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "eigenshift/spectral.hpp"

namespace eigenshift {

enum class EnsembleKind { wigner, generalized_wigner, regular, k_bounded };

// gaussian and rademacher are standardized (variance 1 before the profile
// scale). bounded_uniform draws uniformly from [-K, K] as declared, so its
// base variance is K^2/3; spiked-sample generation re-standardizes it.
enum class EntryDist { gaussian, rademacher, bounded_uniform };

struct EnsembleSpec {
  EnsembleKind kind = EnsembleKind::wigner;
  int n = 0;
  EntryDist entry_dist = EntryDist::gaussian;
  double K = 1.0;              // bounded_uniform half-width / k_bounded clip
  double comparability = 8.0;  // declared max/min variance ratio bound
  std::optional<Eigen::MatrixXd> variance_profile;  // entrywise variances
  std::uint64_t seed = 0;
};

// Symmetric noise matrix, deterministic in (spec, seed). wigner/k_bounded
// use the standard profile (off-diagonal variance 1, diagonal 2) and take
// no explicit profile; k_bounded additionally clips the standardized draw
// at +-K. generalized_wigner requires comparable variances and equal row
// sums; regular requires only equal row sums.
SymMatrix gen_symmetric_noise(const EnsembleSpec& spec);

EnsembleSpec ensemble_spec_from_json(const nlohmann::json& j);
nlohmann::json ensemble_spec_to_json(const EnsembleSpec& spec);

// diag(spikes, 0, ..., 0).
SymMatrix gen_signal_diag_spikes(const std::vector<double>& spikes, int n);

// Q diag(spikes) Q^T with Q the seeded orthonormal n x r frame; the nonzero
// spectrum is exactly the spike list.
SymMatrix gen_signal_rotated_low_rank(const std::vector<double>& spikes,
                                      int n, std::uint64_t seed);

// Block-constant expectation matrix of a stochastic block model: entry
// (i, j) is densities(block(i), block(j)), diagonal included, so the rank
// is at most the number of blocks.
SymMatrix gen_signal_sbm(const std::vector<int>& block_sizes,
                         const Eigen::MatrixXd& densities, int n);

struct HiddenCliques {
  SymMatrix A_truth;   // sum of indicator outer products, one per clique
  SymMatrix A_tilde;   // observed +-1 matrix
  std::vector<std::vector<int>> memberships;  // sorted vertex lists
};

// +-1 graph with disjoint planted cliques on seeded vertex sets. Clique
// pairs (diagonal included: clique vertices carry loops) are +1; other
// off-diagonal entries are fair +-1; non-clique diagonal entries are -1.
HiddenCliques gen_hidden_cliques(int n, const std::vector<int>& clique_sizes,
                                 std::uint64_t seed);

struct SpikedModelSpec {
  Eigen::MatrixXd M;  // d x d covariance, PSD within 1e-9 * ||M||
  int d = 0;
  int n_samples = 0;
  EntryDist entry_dist = EntryDist::gaussian;
  double K = 1.0;  // bounded_uniform half-width before standardization
  std::uint64_t seed = 0;
};

struct SpikedSample {
  Eigen::MatrixXd samples;  // d x n_samples, columns X_i = M^{1/2} Y_i
  SymMatrix M_tilde;        // sample covariance (1/n) X X^T
  SymMatrix E;              // M_tilde - M
};

// Entries of Y are iid mean 0 variance 1 of the declared distribution.
// M^{1/2} is the spectral square root; eigenvalues in [-1e-9||M||, 0) are
// clipped to zero with a note on stderr, anything lower throws NotPSD.
SpikedSample gen_spiked_samples(const SpikedModelSpec& spec);

SpikedModelSpec spiked_spec_from_json(const nlohmann::json& j);
nlohmann::json spiked_spec_to_json(const SpikedModelSpec& spec);

enum class TailKind {
  bernstein_uEv,
  chebyshev_G12,
  chebyshev_EuEv,
  matrix_bernstein,
  matrix_bernstein_spiked
};

// Parameter names: bernstein_uEv {t, sigma, K}; chebyshev_G12
// {t, sigma, K, n}; chebyshev_EuEv {t, n, m4}; matrix_bernstein
// {t, n, d, V, L}; matrix_bernstein_spiked
// {lambda1, r_lambda, n, d, L, fourth_excess}. Extra entries are ignored.
struct TailBoundQuery {
  TailKind kind = TailKind::bernstein_uEv;
  std::map<std::string, double> params;
};

// Plug-in evaluation of the declared tail formula. The first four kinds are
// probabilities and come back clamped to [0, 1]; matrix_bernstein_spiked is
// a norm bound and is returned unclamped. A missing or non-finite parameter
// throws IncompleteInput naming it.
double tail_bound(const TailBoundQuery& q);

// Nonnegative symmetric variance profile whose row sums are all the exact
// same double (entries are small dyadic rationals, so the sums are exact in
// floating point no matter the summation order). Entry spread is wide, so
// the profile is deliberately not comparability-bounded.
Eigen::MatrixXd regular_profile(int n, std::uint64_t seed);

// Same exact row-sum device, entries confined to [0.5, 1] (ratio <= 2), fit
// for the generalized_wigner kind.
Eigen::MatrixXd comparable_profile(int n, std::uint64_t seed);

// max over column pairs (k, l) of |sum_i U(i,k) U(i,l) R_i| where R_i is
// the i-th column sum of the profile, evaluated in the centered form
// sum_i U(i,k) U(i,l) (R_i - R_0). For orthonormal columns the two forms
// agree analytically, and the centered one returns exactly zero whenever
// the row sums are bit-identical.
double mu_cancellation(const Eigen::MatrixXd& profile,
                       const Eigen::MatrixXd& U);

// Q factor of a seeded gaussian rows x cols matrix.
Eigen::MatrixXd seeded_orthonormal(int rows, int cols, std::uint64_t seed);

}  // namespace eigenshift
