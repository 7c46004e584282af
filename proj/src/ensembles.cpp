#include "eigenshift/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>

#include "eigenshift/errors.hpp"
#include "eigenshift/matrix_io.hpp"
#include "eigenshift/rng.hpp"

namespace eigenshift {

namespace {

constexpr double kRowSumTol = 1e-9;

// Validated entrywise variance matrix for the profile-carrying kinds.
Eigen::MatrixXd checked_profile(const EnsembleSpec& spec) {
  if (!spec.variance_profile)
    throw ProfileError("this ensemble kind requires a variance profile");
  const Eigen::MatrixXd& P = *spec.variance_profile;
  if (P.rows() != spec.n || P.cols() != spec.n)
    throw ProfileError("variance profile must be n x n");
  double lo = P(0, 0), hi = P(0, 0);
  for (int i = 0; i < spec.n; ++i) {
    for (int j = 0; j < spec.n; ++j) {
      const double v = P(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw ProfileError("variance profile entries must be finite and >= 0");
      const double d = std::abs(v - P(j, i));
      if (d > 1e-12 * std::max(1.0, std::abs(v)))
        throw ProfileError("variance profile must be symmetric");
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  }
  if (spec.kind == EnsembleKind::generalized_wigner) {
    if (!(spec.comparability > 0.0))
      throw ProfileError("declared comparability bound must be positive");
    if (lo <= 0.0 || hi / lo > spec.comparability)
      throw ProfileError("variance profile is not comparability-bounded");
  }
  const double r0 = P.row(0).sum();
  for (int i = 1; i < spec.n; ++i) {
    if (std::abs(P.row(i).sum() - r0) > kRowSumTol * std::max(1.0, std::abs(r0)))
      throw ProfileError("variance profile row sums are not equal");
  }
  return (P + P.transpose()) / 2.0;
}

double standardized_draw(const RngStream& rs, std::uint64_t index,
                         const EnsembleSpec& spec) {
  switch (spec.entry_dist) {
    case EntryDist::gaussian:
      return rs.gauss(index);
    case EntryDist::rademacher:
      return rs.rademacher(index);
    case EntryDist::bounded_uniform:
      if (!(spec.K > 0.0)) throw ProfileError("bounded_uniform needs K > 0");
      return rs.uniform_sym(index, spec.K);
  }
  throw ProfileError("unknown entry distribution");
}

std::string json_string(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || !j[key].is_string())
    throw IncompleteInput(std::string("missing field: ") + key);
  return j[key].get<std::string>();
}

EntryDist dist_from_string(const std::string& s) {
  if (s == "gaussian") return EntryDist::gaussian;
  if (s == "rademacher") return EntryDist::rademacher;
  if (s == "bounded_uniform") return EntryDist::bounded_uniform;
  throw UsageError("unknown entry distribution: " + s);
}

std::string dist_to_string(EntryDist d) {
  switch (d) {
    case EntryDist::gaussian: return "gaussian";
    case EntryDist::rademacher: return "rademacher";
    case EntryDist::bounded_uniform: return "bounded_uniform";
  }
  return "gaussian";
}

}  // namespace

SymMatrix gen_symmetric_noise(const EnsembleSpec& spec) {
  const int n = spec.n;
  if (n <= 0) throw DimensionError("ensemble dimension must be positive");

  Eigen::MatrixXd sig2;
  switch (spec.kind) {
    case EnsembleKind::wigner:
    case EnsembleKind::k_bounded:
      if (spec.variance_profile)
        throw ProfileError("wigner/k_bounded kinds take no variance profile");
      sig2 = Eigen::MatrixXd::Ones(n, n);
      sig2.diagonal().setConstant(2.0);
      break;
    case EnsembleKind::generalized_wigner:
    case EnsembleKind::regular:
      sig2 = checked_profile(spec);
      break;
  }
  if (spec.kind == EnsembleKind::k_bounded && !(spec.K > 0.0))
    throw ProfileError("k_bounded needs a positive clip level K");

  RngStream rs(spec.seed, 0);
  Eigen::MatrixXd E(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const std::uint64_t index =
          static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
          static_cast<std::uint64_t>(j);
      double g = standardized_draw(rs, index, spec);
      if (spec.kind == EnsembleKind::k_bounded)
        g = std::clamp(g, -spec.K, spec.K);
      const double e = std::sqrt(sig2(i, j)) * g;
      E(i, j) = e;
      E(j, i) = e;
    }
  }
  return SymMatrix(E);
}

EnsembleSpec ensemble_spec_from_json(const nlohmann::json& j) {
  EnsembleSpec spec;
  const std::string kind = json_string(j, "kind");
  if (kind == "wigner") spec.kind = EnsembleKind::wigner;
  else if (kind == "generalized_wigner") spec.kind = EnsembleKind::generalized_wigner;
  else if (kind == "regular") spec.kind = EnsembleKind::regular;
  else if (kind == "k_bounded") spec.kind = EnsembleKind::k_bounded;
  else throw UsageError("unknown ensemble kind: " + kind);

  if (!j.contains("n") || !j["n"].is_number())
    throw IncompleteInput("missing field: n");
  spec.n = j["n"].get<int>();
  if (j.contains("entry_dist"))
    spec.entry_dist = dist_from_string(json_string(j, "entry_dist"));
  if (j.contains("K")) spec.K = j["K"].get<double>();
  if (j.contains("comparability"))
    spec.comparability = j["comparability"].get<double>();
  if (j.contains("variance_profile"))
    spec.variance_profile = matrix_from_json(j["variance_profile"]);
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  return spec;
}

nlohmann::json ensemble_spec_to_json(const EnsembleSpec& spec) {
  nlohmann::json j;
  switch (spec.kind) {
    case EnsembleKind::wigner: j["kind"] = "wigner"; break;
    case EnsembleKind::generalized_wigner: j["kind"] = "generalized_wigner"; break;
    case EnsembleKind::regular: j["kind"] = "regular"; break;
    case EnsembleKind::k_bounded: j["kind"] = "k_bounded"; break;
  }
  j["n"] = spec.n;
  j["entry_dist"] = dist_to_string(spec.entry_dist);
  j["K"] = spec.K;
  j["comparability"] = spec.comparability;
  if (spec.variance_profile)
    j["variance_profile"] = matrix_to_json(*spec.variance_profile);
  j["seed"] = spec.seed;
  return j;
}

SymMatrix gen_signal_diag_spikes(const std::vector<double>& spikes, int n) {
  if (n <= 0) throw DimensionError("signal dimension must be positive");
  if (static_cast<int>(spikes.size()) > n)
    throw DimensionError("more spikes than dimensions");
  for (double s : spikes)
    if (!std::isfinite(s)) throw DimensionError("spikes must be finite");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (std::size_t i = 0; i < spikes.size(); ++i)
    A(static_cast<int>(i), static_cast<int>(i)) = spikes[i];
  return SymMatrix(A);
}

SymMatrix gen_signal_rotated_low_rank(const std::vector<double>& spikes,
                                      int n, std::uint64_t seed) {
  if (n <= 0) throw DimensionError("signal dimension must be positive");
  const int r = static_cast<int>(spikes.size());
  if (r > n) throw DimensionError("more spikes than dimensions");
  for (double s : spikes)
    if (!std::isfinite(s)) throw DimensionError("spikes must be finite");
  if (r == 0) return SymMatrix(Eigen::MatrixXd::Zero(n, n));
  const Eigen::MatrixXd Q = seeded_orthonormal(n, r, seed);
  Eigen::VectorXd d(r);
  for (int i = 0; i < r; ++i) d(i) = spikes[static_cast<std::size_t>(i)];
  return SymMatrix(Q * d.asDiagonal() * Q.transpose());
}

SymMatrix gen_signal_sbm(const std::vector<int>& block_sizes,
                         const Eigen::MatrixXd& densities, int n) {
  const int k = static_cast<int>(block_sizes.size());
  if (densities.rows() != k || densities.cols() != k)
    throw DimensionError("densities must be k x k for k blocks");
  int total = 0;
  for (int b : block_sizes) {
    if (b <= 0) throw DimensionError("block sizes must be positive");
    total += b;
  }
  if (total != n) throw DimensionError("block sizes must sum to n");

  std::vector<int> block_of(static_cast<std::size_t>(n));
  int v = 0;
  for (int b = 0; b < k; ++b)
    for (int c = 0; c < block_sizes[static_cast<std::size_t>(b)]; ++c)
      block_of[static_cast<std::size_t>(v++)] = b;

  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      A(i, j) = densities(block_of[static_cast<std::size_t>(i)],
                          block_of[static_cast<std::size_t>(j)]);
  return SymMatrix(A);
}

HiddenCliques gen_hidden_cliques(int n, const std::vector<int>& clique_sizes,
                                 std::uint64_t seed) {
  if (n <= 0) throw DimensionError("graph size must be positive");
  long long total = 0;
  for (int k : clique_sizes) {
    if (k <= 0) throw LayoutError("clique sizes must be positive");
    total += k;
  }
  if (total > n) throw LayoutError("clique sizes exceed the vertex count");

  // Seeded shuffle; consecutive chunks become the (disjoint) cliques.
  std::vector<int> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), 0);
  RngStream shuffle(seed, 0);
  for (std::size_t i = perm.size(); i > 1; --i)
    std::swap(perm[i - 1],
              perm[static_cast<std::size_t>(shuffle.bits(i) % i)]);

  std::vector<int> clique_of(static_cast<std::size_t>(n), -1);
  std::vector<std::vector<int>> memberships;
  std::size_t next = 0;
  for (int k : clique_sizes) {
    std::vector<int> members(perm.begin() + static_cast<std::ptrdiff_t>(next),
                             perm.begin() +
                                 static_cast<std::ptrdiff_t>(next + static_cast<std::size_t>(k)));
    std::sort(members.begin(), members.end());
    for (int m : members) {
      if (clique_of[static_cast<std::size_t>(m)] != -1)
        throw LayoutError("overlapping clique assignment");
      clique_of[static_cast<std::size_t>(m)] =
          static_cast<int>(memberships.size());
    }
    memberships.push_back(std::move(members));
    next += static_cast<std::size_t>(k);
  }

  Eigen::MatrixXd truth = Eigen::MatrixXd::Zero(n, n);
  for (const auto& members : memberships)
    for (int a : members)
      for (int b : members) truth(a, b) = 1.0;

  RngStream edges(seed, 1);
  Eigen::MatrixXd obs(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) {
      const int ci = clique_of[static_cast<std::size_t>(i)];
      const int cj = clique_of[static_cast<std::size_t>(j)];
      double e;
      if (ci != -1 && ci == cj) {
        e = 1.0;  // clique pair; i == j is the loop on a clique vertex
      } else if (i == j) {
        e = -1.0;  // no loops elsewhere
      } else {
        const std::uint64_t index =
            static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
            static_cast<std::uint64_t>(j);
        e = edges.rademacher(index);
      }
      obs(i, j) = e;
      obs(j, i) = e;
    }
  }
  return HiddenCliques{SymMatrix(truth), SymMatrix(obs),
                       std::move(memberships)};
}

SpikedSample gen_spiked_samples(const SpikedModelSpec& spec) {
  const Eigen::MatrixXd& M = spec.M;
  if (M.rows() == 0 || M.rows() != M.cols())
    throw DimensionError("covariance must be square and nonempty");
  const int d = static_cast<int>(M.rows());
  if (spec.d != d)
    throw DimensionError("declared d does not match the covariance size");
  const int n = spec.n_samples;
  if (n <= 0) throw DimensionError("need at least one sample");

  const SymMatrix Msym(M);
  const double scale = M.cwiseAbs().maxCoeff();

  Eigen::MatrixXd half;
  const bool diagonal = (M - Eigen::MatrixXd(M.diagonal().asDiagonal()))
                            .cwiseAbs()
                            .maxCoeff() == 0.0;
  int clipped = 0;
  if (diagonal) {
    Eigen::VectorXd dvals = M.diagonal();
    for (int i = 0; i < d; ++i) {
      if (dvals(i) < -1e-9 * scale)
        throw NotPSD("covariance eigenvalue below -1e-9 * ||M||");
      if (dvals(i) < 0.0) {
        dvals(i) = 0.0;
        ++clipped;
      }
    }
    half = dvals.cwiseSqrt().asDiagonal();
  } else {
    const Spectrum ms = decompose_symmetric(Msym);
    Eigen::VectorXd vals = ms.eigenvalues;
    for (int i = 0; i < d; ++i) {
      if (vals(i) < -1e-9 * scale)
        throw NotPSD("covariance eigenvalue below -1e-9 * ||M||");
      if (vals(i) < 0.0) {
        vals(i) = 0.0;
        ++clipped;
      }
    }
    half = ms.eigenvectors * vals.cwiseSqrt().asDiagonal() *
           ms.eigenvectors.transpose();
  }
  if (clipped > 0)
    std::cerr << "note: clipped " << clipped
              << " slightly negative covariance eigenvalue(s) to zero\n";

  RngStream rs(spec.seed, 0);
  Eigen::MatrixXd Y(d, n);
  for (int i = 0; i < d; ++i) {
    for (int j = 0; j < n; ++j) {
      const std::uint64_t index =
          static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
          static_cast<std::uint64_t>(j);
      switch (spec.entry_dist) {
        case EntryDist::gaussian:
          Y(i, j) = rs.gauss(index);
          break;
        case EntryDist::rademacher:
          Y(i, j) = rs.rademacher(index);
          break;
        case EntryDist::bounded_uniform: {
          if (!(spec.K > 0.0))
            throw ProfileError("bounded_uniform needs K > 0");
          // Standardized to variance 1: uniform on (-sqrt(3), sqrt(3)].
          Y(i, j) = rs.uniform_sym(index, spec.K) * std::sqrt(3.0) / spec.K;
          break;
        }
      }
    }
  }

  Eigen::MatrixXd X = half * Y;
  Eigen::MatrixXd Mt = Eigen::MatrixXd::Zero(d, d);
  Mt.selfadjointView<Eigen::Lower>().rankUpdate(X, 1.0 / n);
  const Eigen::MatrixXd Mtf = Mt.selfadjointView<Eigen::Lower>();
  return SpikedSample{std::move(X), SymMatrix(Mtf),
                      SymMatrix(Mtf - Msym.mat())};
}

SpikedModelSpec spiked_spec_from_json(const nlohmann::json& j) {
  SpikedModelSpec spec;
  if (!j.contains("M")) throw IncompleteInput("missing field: M");
  spec.M = matrix_from_json(j["M"]);
  spec.d = j.contains("d") ? j["d"].get<int>()
                           : static_cast<int>(spec.M.rows());
  if (!j.contains("n_samples") || !j["n_samples"].is_number())
    throw IncompleteInput("missing field: n_samples");
  spec.n_samples = j["n_samples"].get<int>();
  if (j.contains("entry_dist"))
    spec.entry_dist = dist_from_string(json_string(j, "entry_dist"));
  if (j.contains("K")) spec.K = j["K"].get<double>();
  if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
  return spec;
}

nlohmann::json spiked_spec_to_json(const SpikedModelSpec& spec) {
  nlohmann::json j;
  j["M"] = matrix_to_json(spec.M);
  j["d"] = spec.d;
  j["n_samples"] = spec.n_samples;
  j["entry_dist"] = dist_to_string(spec.entry_dist);
  j["K"] = spec.K;
  j["seed"] = spec.seed;
  return j;
}

namespace {

double need(const TailBoundQuery& q, const char* name) {
  const auto it = q.params.find(name);
  if (it == q.params.end() || !std::isfinite(it->second))
    throw IncompleteInput(std::string("missing parameter: ") + name);
  return it->second;
}

double need_pos(const TailBoundQuery& q, const char* name) {
  const double v = need(q, name);
  if (!(v > 0.0))
    throw IncompleteInput(std::string("parameter must be positive: ") + name);
  return v;
}

double clamp01(double p) { return std::clamp(p, 0.0, 1.0); }

}  // namespace

double tail_bound(const TailBoundQuery& q) {
  switch (q.kind) {
    case TailKind::bernstein_uEv: {
      const double t = need_pos(q, "t");
      const double sigma = need_pos(q, "sigma");
      const double K = need_pos(q, "K");
      return clamp01(std::exp(-(t * t / 2.0) / (2.0 * sigma * sigma + K * t)));
    }
    case TailKind::chebyshev_G12: {
      const double t = need_pos(q, "t");
      const double sigma = need_pos(q, "sigma");
      const double K = need_pos(q, "K");
      const double n = need_pos(q, "n");
      const double s2 = sigma * sigma;
      return clamp01(6.0 * n * s2 * (s2 + K * K) / (t * t));
    }
    case TailKind::chebyshev_EuEv: {
      const double t = need_pos(q, "t");
      const double n = need_pos(q, "n");
      const double m4 = need_pos(q, "m4");
      return clamp01(5.0 * n * m4 / (t * t));
    }
    case TailKind::matrix_bernstein: {
      const double t = need_pos(q, "t");
      const double n = need_pos(q, "n");
      const double d = need_pos(q, "d");
      const double V = need_pos(q, "V");
      const double L = need_pos(q, "L");
      return clamp01((d + n) *
                     std::exp(-(t * t * n / 2.0) / (V + 2.0 * L * t / 3.0)));
    }
    case TailKind::matrix_bernstein_spiked: {
      const double lambda1 = need_pos(q, "lambda1");
      const double r_lambda = need_pos(q, "r_lambda");
      const double n = need_pos(q, "n");
      const double d = need_pos(q, "d");
      const double L = need_pos(q, "L");
      const double excess = need(q, "fourth_excess");
      if (excess < 0.0)
        throw IncompleteInput("parameter must be nonnegative: fourth_excess");
      const double logs = std::log(n + d);
      return (2.0 + excess) *
             (lambda1 * std::sqrt(r_lambda * logs / n) + L * logs);
    }
  }
  throw IncompleteInput("unknown tail bound kind");
}

Eigen::MatrixXd regular_profile(int n, std::uint64_t seed) {
  if (n <= 0) throw DimensionError("profile dimension must be positive");
  // Off-diagonal entries are dyadic rationals m/64, m in {1..8}; the
  // diagonal tops every row up to the exact same sum. All quantities are
  // multiples of 1/64 far below 2^53, so every row sum is exact.
  RngStream rs(seed, 0);
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const std::uint64_t index =
          static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) +
          static_cast<std::uint64_t>(j);
      const double v = static_cast<double>(1 + (rs.bits(index) & 7ULL)) / 64.0;
      P(i, j) = v;
      P(j, i) = v;
    }
  }
  const double target = static_cast<double>(n);  // row sum, exact integer
  for (int i = 0; i < n; ++i) {
    double off = 0.0;
    for (int j = 0; j < n; ++j)
      if (j != i) off += P(i, j);
    P(i, i) = target - off;  // >= n - 8(n-1)/64 > 0, exact dyadic
  }
  return P;
}

Eigen::MatrixXd comparable_profile(int n, std::uint64_t seed) {
  if (n <= 0) throw DimensionError("profile dimension must be positive");
  // Circulant in |i-j|: every row holds the same multiset of dyadic values
  // in [0.5, 1], so row sums are exact and identical and max/min <= 2.
  RngStream rs(seed, 0);
  std::vector<double> c(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    c[static_cast<std::size_t>(k)] =
        0.5 + static_cast<double>(rs.bits(static_cast<std::uint64_t>(k)) &
                                  31ULL) /
                  64.0;
  Eigen::MatrixXd P(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      int dd = std::abs(i - j);
      dd = std::min(dd, n - dd);
      P(i, j) = c[static_cast<std::size_t>(dd)];
    }
  }
  return P;
}

double mu_cancellation(const Eigen::MatrixXd& profile,
                       const Eigen::MatrixXd& U) {
  if (profile.rows() != profile.cols())
    throw DimensionError("profile must be square");
  if (U.rows() != profile.rows())
    throw DimensionError("vector length does not match the profile");
  if (U.cols() < 2) throw DimensionError("need at least two vectors");
  const int n = static_cast<int>(U.rows());
  Eigen::VectorXd R(n);
  for (int i = 0; i < n; ++i) R(i) = profile.col(i).sum();
  const double r0 = R(0);
  double mu = 0.0;
  for (int k = 0; k < U.cols(); ++k) {
    for (int l = k + 1; l < U.cols(); ++l) {
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += U(i, k) * U(i, l) * (R(i) - r0);
      mu = std::max(mu, std::abs(acc));
    }
  }
  return mu;
}

Eigen::MatrixXd seeded_orthonormal(int rows, int cols, std::uint64_t seed) {
  if (rows <= 0 || cols <= 0 || cols > rows)
    throw DimensionError("need rows >= cols >= 1");
  RngStream rs(seed, 0);
  Eigen::MatrixXd G(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j)
      G(i, j) = rs.gauss(static_cast<std::uint64_t>(i) *
                             static_cast<std::uint64_t>(cols) +
                         static_cast<std::uint64_t>(j));
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  return qr.householderQ() * Eigen::MatrixXd::Identity(rows, cols);
}

}  // namespace eigenshift
