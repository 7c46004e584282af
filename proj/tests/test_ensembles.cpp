#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "eigenshift/ensembles.hpp"
#include "eigenshift/errors.hpp"
#include "eigenshift/rng.hpp"
#include "eigenshift/spectral.hpp"

using namespace eigenshift;

namespace {

EnsembleSpec wigner_spec(int n, std::uint64_t seed,
                         EntryDist d = EntryDist::gaussian) {
  EnsembleSpec s;
  s.kind = EnsembleKind::wigner;
  s.n = n;
  s.entry_dist = d;
  s.seed = seed;
  return s;
}

struct MomentAcc {
  double sum = 0.0, sq = 0.0;
  long long count = 0;
  void add(double v) {
    sum += v;
    sq += v * v;
    ++count;
  }
  double mean() const { return sum / static_cast<double>(count); }
  double var() const { return sq / static_cast<double>(count) - mean() * mean(); }
};

}  // namespace

TEST_CASE("noise generation is deterministic in the seed") {
  const auto a = gen_symmetric_noise(wigner_spec(50, 7));
  const auto b = gen_symmetric_noise(wigner_spec(50, 7));
  CHECK((a.mat() - b.mat()).cwiseAbs().maxCoeff() == 0.0);
  const auto c = gen_symmetric_noise(wigner_spec(50, 8));
  CHECK((a.mat() - c.mat()).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("wigner entries have the standard profile") {
  const auto E = gen_symmetric_noise(wigner_spec(300, 11)).mat();
  CHECK((E - E.transpose()).cwiseAbs().maxCoeff() == 0.0);

  MomentAcc off, diag;
  for (int i = 0; i < 300; ++i) {
    diag.add(E(i, i));
    for (int j = i + 1; j < 300; ++j) off.add(E(i, j));
  }
  CHECK(std::abs(off.mean()) < 0.02);
  CHECK(off.var() > 0.93);
  CHECK(off.var() < 1.07);
  CHECK(diag.var() > 1.4);
  CHECK(diag.var() < 2.6);
}

TEST_CASE("wigner operator norm sits at the spectral edge") {
  const auto E = gen_symmetric_noise(wigner_spec(800, 2)).mat();
  const double ratio = operator_norm(E) / std::sqrt(800.0);
  CHECK(ratio > 1.85);
  CHECK(ratio < 2.15);
}

TEST_CASE("rademacher and bounded entry distributions") {
  SUBCASE("rademacher values") {
    const auto E = gen_symmetric_noise(wigner_spec(40, 3, EntryDist::rademacher)).mat();
    const double rt2 = std::sqrt(2.0);
    for (int i = 0; i < 40; ++i) {
      CHECK(std::abs(std::abs(E(i, i)) - rt2) < 1e-15);
      for (int j = i + 1; j < 40; ++j)
        CHECK(std::abs(std::abs(E(i, j)) - 1.0) < 1e-15);
    }
  }

  SUBCASE("bounded_uniform keeps the declared range and variance") {
    auto spec = wigner_spec(60, 4, EntryDist::bounded_uniform);
    spec.K = 2.0;
    const auto E = gen_symmetric_noise(spec).mat();
    MomentAcc off;
    for (int i = 0; i < 60; ++i) {
      CHECK(std::abs(E(i, i)) <= 2.0 * std::sqrt(2.0) + 1e-12);
      for (int j = i + 1; j < 60; ++j) {
        CHECK(std::abs(E(i, j)) <= 2.0 + 1e-12);
        off.add(E(i, j));
      }
    }
    // Base variance K^2/3 = 4/3.
    CHECK(off.var() > 1.15);
    CHECK(off.var() < 1.52);
  }

  SUBCASE("k_bounded clips gaussian draws") {
    EnsembleSpec spec = wigner_spec(60, 5);
    spec.kind = EnsembleKind::k_bounded;
    spec.K = 1.0;
    const auto E = gen_symmetric_noise(spec).mat();
    int saturated = 0;
    for (int i = 0; i < 60; ++i) {
      CHECK(std::abs(E(i, i)) <= std::sqrt(2.0) + 1e-12);
      for (int j = i + 1; j < 60; ++j) {
        CHECK(std::abs(E(i, j)) <= 1.0 + 1e-12);
        if (std::abs(std::abs(E(i, j)) - 1.0) < 1e-15) ++saturated;
      }
    }
    // P(|N(0,1)| >= 1) is about 0.32 of 1770 entries.
    CHECK(saturated > 300);
  }
}

TEST_CASE("profile validation") {
  SUBCASE("profile where none belongs") {
    auto spec = wigner_spec(10, 1);
    spec.variance_profile = Eigen::MatrixXd::Ones(10, 10);
    CHECK_THROWS_AS(gen_symmetric_noise(spec), ProfileError);
  }

  SUBCASE("profile required but absent") {
    EnsembleSpec spec;
    spec.kind = EnsembleKind::regular;
    spec.n = 10;
    CHECK_THROWS_AS(gen_symmetric_noise(spec), ProfileError);
  }

  SUBCASE("shape, sign, symmetry") {
    EnsembleSpec spec;
    spec.kind = EnsembleKind::regular;
    spec.n = 10;
    spec.variance_profile = Eigen::MatrixXd::Ones(9, 10);
    CHECK_THROWS_AS(gen_symmetric_noise(spec), ProfileError);

    Eigen::MatrixXd neg = Eigen::MatrixXd::Ones(10, 10);
    neg(2, 2) = -0.5;
    spec.variance_profile = neg;
    CHECK_THROWS_AS(gen_symmetric_noise(spec), ProfileError);

    Eigen::MatrixXd asym = Eigen::MatrixXd::Ones(10, 10);
    asym(1, 2) = 2.0;
    spec.variance_profile = asym;
    CHECK_THROWS_AS(gen_symmetric_noise(spec), ProfileError);
  }

  SUBCASE("row sums must balance") {
    EnsembleSpec spec;
    spec.kind = EnsembleKind::regular;
    spec.n = 16;
    Eigen::MatrixXd P = regular_profile(16, 21);
    P(3, 3) += 1e-6;
    spec.variance_profile = P;
    CHECK_THROWS_AS(gen_symmetric_noise(spec), ProfileError);
  }

  SUBCASE("comparability bound") {
    EnsembleSpec spec;
    spec.kind = EnsembleKind::generalized_wigner;
    spec.n = 32;
    spec.comparability = 8.0;
    spec.variance_profile = regular_profile(32, 9);  // wide spread
    CHECK_THROWS_AS(gen_symmetric_noise(spec), ProfileError);

    spec.comparability = 2.0;
    spec.variance_profile = comparable_profile(32, 9);
    CHECK_NOTHROW(gen_symmetric_noise(spec));

    // regular accepts the wide-spread profile that generalized refuses.
    spec.kind = EnsembleKind::regular;
    spec.variance_profile = regular_profile(32, 9);
    CHECK_NOTHROW(gen_symmetric_noise(spec));
  }
}

TEST_CASE("generated entries respect the variance profile") {
  const int n = 8;
  const Eigen::MatrixXd P = regular_profile(n, 13);
  Eigen::MatrixXd sq = Eigen::MatrixXd::Zero(n, n);
  const int trials = 4000;
  for (int t = 0; t < trials; ++t) {
    EnsembleSpec spec;
    spec.kind = EnsembleKind::regular;
    spec.n = n;
    spec.variance_profile = P;
    spec.seed = 1700 + static_cast<std::uint64_t>(t);
    const auto E = gen_symmetric_noise(spec).mat();
    sq += E.cwiseProduct(E);
  }
  sq /= trials;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      CHECK(std::abs(sq(i, j) - P(i, j)) < 0.15 * std::max(0.05, P(i, j)));
}

TEST_CASE("profile helpers give exact row sums") {
  SUBCASE("wide-spread profile") {
    const Eigen::MatrixXd P = regular_profile(64, 33);
    const double r0 = P.row(0).sum();
    for (int i = 0; i < 64; ++i) CHECK(P.row(i).sum() - r0 == 0.0);
    CHECK(P.minCoeff() > 0.0);
    CHECK(P.maxCoeff() / P.minCoeff() > 16.0);
  }

  SUBCASE("comparable profile") {
    const Eigen::MatrixXd P = comparable_profile(64, 34);
    const double r0 = P.row(0).sum();
    for (int i = 0; i < 64; ++i) CHECK(P.row(i).sum() - r0 == 0.0);
    CHECK(P.minCoeff() >= 0.5);
    CHECK(P.maxCoeff() / P.minCoeff() <= 2.0);
  }
}

TEST_CASE("row-sum cancellation is exact for orthonormal pairs") {
  for (int rep = 0; rep < 100; ++rep) {
    const auto seed = static_cast<std::uint64_t>(rep);
    const Eigen::MatrixXd P = regular_profile(40, 500 + seed);
    const Eigen::MatrixXd U = seeded_orthonormal(40, 5, 900 + seed);
    CHECK(mu_cancellation(P, U) == 0.0);
  }

  // Without balanced row sums the quantity is genuinely nonzero.
  Eigen::MatrixXd P = Eigen::MatrixXd::Identity(40, 40);
  P(0, 0) = 5.0;
  const Eigen::MatrixXd U = seeded_orthonormal(40, 3, 77);
  CHECK(mu_cancellation(P, U) > 1e-6);
}

TEST_CASE("signal constructions") {
  SUBCASE("diagonal spikes") {
    const auto A = gen_signal_diag_spikes({10.0, 5.0}, 100);
    const auto sp = decompose_symmetric(A);
    CHECK(sp.eigenvalues(0) == doctest::Approx(10.0).epsilon(1e-12));
    CHECK(sp.eigenvalues(1) == doctest::Approx(5.0).epsilon(1e-12));
    int rank = 0;
    for (int i = 0; i < 100; ++i)
      if (std::abs(sp.eigenvalues(i)) > 1e-9) ++rank;
    CHECK(rank == 2);
    CHECK(A.mat()(0, 0) == 10.0);
    CHECK(A.mat()(1, 1) == 5.0);
  }

  SUBCASE("rotated low rank keeps the spike spectrum") {
    const auto A = gen_signal_rotated_low_rank({10.0, 5.0}, 40, 17);
    const auto sp = decompose_symmetric(A);
    CHECK(std::abs(sp.eigenvalues(0) - 10.0) < 1e-10);
    CHECK(std::abs(sp.eigenvalues(1) - 5.0) < 1e-10);
    for (int i = 2; i < 40; ++i) CHECK(std::abs(sp.eigenvalues(i)) < 1e-10);
    // Not axis-aligned: mass is spread off the leading coordinates.
    CHECK(std::abs(A.mat()(0, 0) - 10.0) > 1e-3);

    const auto B = gen_signal_rotated_low_rank({8.0, -3.0}, 20, 18);
    const auto sb = decompose_symmetric(B);
    CHECK(std::abs(sb.eigenvalues(0) - 8.0) < 1e-10);
    CHECK(std::abs(sb.eigenvalues(19) + 3.0) < 1e-10);
  }

  SUBCASE("block model expectation matrix") {
    Eigen::MatrixXd dens(2, 2);
    dens << 0.5, 0.0, 0.0, 0.5;
    const auto A = gen_signal_sbm({30, 30}, dens, 60);
    const auto sp = decompose_symmetric(A);
    CHECK(sp.eigenvalues(0) == doctest::Approx(15.0).epsilon(1e-12));
    CHECK(sp.eigenvalues(1) == doctest::Approx(15.0).epsilon(1e-12));
    for (int i = 2; i < 60; ++i) CHECK(std::abs(sp.eigenvalues(i)) < 1e-9);
    CHECK(A.mat()(0, 0) == 0.5);
    CHECK(A.mat()(0, 31) == 0.0);

    Eigen::MatrixXd d3(3, 3);
    d3 << 0.6, 0.2, 0.1, 0.2, 0.5, 0.3, 0.1, 0.3, 0.4;
    const auto B = gen_signal_sbm({10, 15, 5}, d3, 30);
    const auto sb = decompose_symmetric(B);
    const double top = std::abs(sb.eigenvalues(0));
    for (int i = 3; i < 30; ++i)
      CHECK(std::abs(sb.eigenvalues(i)) < 1e-9 * top);
    CHECK(B.mat()(0, 10) == 0.2);
    CHECK(B.mat()(9, 29) == 0.1);

    CHECK_THROWS_AS(gen_signal_sbm({10, 10}, dens, 30), DimensionError);
    CHECK_THROWS_AS(gen_signal_sbm({10, 10, 10}, dens, 30), DimensionError);
  }
}

TEST_CASE("hidden clique construction") {
  const auto hc = gen_hidden_cliques(50, {5, 3}, 3);
  REQUIRE(hc.memberships.size() == 2);
  CHECK(hc.memberships[0].size() == 5);
  CHECK(hc.memberships[1].size() == 3);

  std::set<int> seen;
  for (const auto& c : hc.memberships)
    for (int v : c) {
      CHECK(seen.insert(v).second);
      CHECK(v >= 0);
      CHECK(v < 50);
    }

  Eigen::MatrixXd expect = Eigen::MatrixXd::Zero(50, 50);
  for (const auto& c : hc.memberships)
    for (int a : c)
      for (int b : c) expect(a, b) = 1.0;
  CHECK((hc.A_truth.mat() - expect).cwiseAbs().maxCoeff() == 0.0);

  const auto& At = hc.A_tilde.mat();
  CHECK((At - At.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 50; ++i) {
    const bool in_clique = seen.count(i) > 0;
    CHECK(At(i, i) == (in_clique ? 1.0 : -1.0));
    for (int j = 0; j < 50; ++j) CHECK(std::abs(At(i, j)) == 1.0);
  }
  for (int a : hc.memberships[0])
    for (int b : hc.memberships[0]) CHECK(At(a, b) == 1.0);

  const auto sp = decompose_symmetric(hc.A_truth);
  CHECK(sp.eigenvalues(0) == doctest::Approx(5.0).epsilon(1e-12));
  Eigen::VectorXd ind = Eigen::VectorXd::Zero(50);
  for (int v : hc.memberships[0]) ind(v) = 1.0 / std::sqrt(5.0);
  CHECK(std::abs(std::abs(ind.dot(sp.eigenvectors.col(0))) - 1.0) < 1e-12);

  const auto again = gen_hidden_cliques(50, {5, 3}, 3);
  CHECK((again.A_tilde.mat() - At).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(gen_hidden_cliques(50, {30, 25}, 1), LayoutError);
  CHECK_THROWS_AS(gen_hidden_cliques(50, {0}, 1), LayoutError);

  const auto noise = gen_hidden_cliques(20, {}, 9);
  CHECK(noise.A_truth.mat().cwiseAbs().maxCoeff() == 0.0);
  for (int i = 0; i < 20; ++i) CHECK(noise.A_tilde.mat()(i, i) == -1.0);
}

TEST_CASE("spiked sample generation") {
  SUBCASE("identity covariance concentrates") {
    SpikedModelSpec spec;
    spec.M = Eigen::MatrixXd::Identity(30, 30);
    spec.d = 30;
    spec.n_samples = 3000;
    spec.seed = 5;
    const auto out = gen_spiked_samples(spec);
    const double err = operator_norm(out.E.mat());
    CHECK(err > 0.05);
    CHECK(err < 0.5);
  }

  SUBCASE("spikes show up in the sample spectrum") {
    Eigen::VectorXd diag = Eigen::VectorXd::Ones(50);
    diag(0) = 25.0;
    diag(1) = 9.0;
    SpikedModelSpec spec;
    spec.M = diag.asDiagonal();
    spec.d = 50;
    spec.n_samples = 5000;
    spec.seed = 6;
    const auto out = gen_spiked_samples(spec);
    const auto sp = decompose_symmetric(out.M_tilde);
    CHECK(sp.eigenvalues(0) > 23.0);
    CHECK(sp.eigenvalues(0) < 27.0);
    CHECK(sp.eigenvalues(1) > 8.0);
    CHECK(sp.eigenvalues(1) < 10.0);
    CHECK(sp.eigenvalues(2) < 2.0);
  }

  SUBCASE("deterministic and validated") {
    SpikedModelSpec spec;
    spec.M = Eigen::MatrixXd::Identity(10, 10);
    spec.d = 10;
    spec.n_samples = 40;
    spec.seed = 12;
    const auto a = gen_spiked_samples(spec);
    const auto b = gen_spiked_samples(spec);
    CHECK((a.samples - b.samples).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.E.mat() - b.E.mat()).cwiseAbs().maxCoeff() == 0.0);

    spec.d = 9;
    CHECK_THROWS_AS(gen_spiked_samples(spec), DimensionError);
    spec.d = 10;
    spec.n_samples = 0;
    CHECK_THROWS_AS(gen_spiked_samples(spec), DimensionError);

    SpikedModelSpec bad;
    bad.M = Eigen::MatrixXd::Identity(5, 5);
    bad.M(4, 4) = -0.1;
    bad.d = 5;
    bad.n_samples = 10;
    CHECK_THROWS_AS(gen_spiked_samples(bad), NotPSD);
  }

  SUBCASE("slightly negative directions are clipped to zero") {
    SpikedModelSpec spec;
    spec.M = Eigen::MatrixXd::Identity(4, 4);
    spec.M(3, 3) = -1e-12;
    spec.d = 4;
    spec.n_samples = 25;
    spec.seed = 2;
    const auto out = gen_spiked_samples(spec);
    CHECK(out.samples.row(3).cwiseAbs().maxCoeff() == 0.0);
    CHECK(out.samples.allFinite());
  }

  SUBCASE("entry distributions are standardized") {
    SpikedModelSpec spec;
    spec.M = Eigen::MatrixXd::Identity(10, 10);
    spec.d = 10;
    spec.n_samples = 400;
    spec.entry_dist = EntryDist::rademacher;
    spec.seed = 3;
    const auto out = gen_spiked_samples(spec);
    CHECK((out.samples.cwiseAbs().array() - 1.0).abs().maxCoeff() < 1e-15);

    spec.entry_dist = EntryDist::bounded_uniform;
    spec.K = 5.0;
    const auto ub = gen_spiked_samples(spec);
    CHECK(ub.samples.cwiseAbs().maxCoeff() <= std::sqrt(3.0) + 1e-12);
    MomentAcc acc;
    for (int i = 0; i < 10; ++i)
      for (int j = 0; j < 400; ++j) acc.add(ub.samples(i, j));
    CHECK(acc.var() > 0.9);
    CHECK(acc.var() < 1.1);
  }
}

TEST_CASE("tail bound formulas") {
  SUBCASE("exact plug-ins") {
    TailBoundQuery q;
    q.kind = TailKind::bernstein_uEv;
    q.params = {{"t", 10.0}, {"sigma", 1.0}, {"K", 1.0}};
    CHECK(tail_bound(q) == doctest::Approx(std::exp(-50.0 / 12.0)).epsilon(1e-14));

    q.kind = TailKind::chebyshev_G12;
    q.params = {{"t", 100.0}, {"sigma", 0.5}, {"K", 1.0}, {"n", 100.0}};
    CHECK(tail_bound(q) ==
          doctest::Approx(6.0 * 100.0 * 0.25 * 1.25 / 1e4).epsilon(1e-14));

    q.kind = TailKind::chebyshev_EuEv;
    q.params = {{"t", 100.0}, {"n", 50.0}, {"m4", 3.0}};
    CHECK(tail_bound(q) == doctest::Approx(0.075).epsilon(1e-14));

    q.kind = TailKind::matrix_bernstein;
    q.params = {{"t", 1.0}, {"n", 90.0}, {"d", 10.0}, {"V", 1.0}, {"L", 0.1}};
    const double want =
        100.0 * std::exp(-(1.0 * 90.0 / 2.0) / (1.0 + 2.0 * 0.1 / 3.0));
    CHECK(tail_bound(q) == doctest::Approx(want).epsilon(1e-14));

    q.kind = TailKind::matrix_bernstein_spiked;
    q.params = {{"lambda1", 2.0}, {"r_lambda", 3.0}, {"n", 90.0},
                {"d", 20.0},     {"L", 0.5},        {"fourth_excess", 1.0}};
    const double logs = std::log(110.0);
    const double spiked_want =
        3.0 * (2.0 * std::sqrt(3.0 * logs / 90.0) + 0.5 * logs);
    CHECK(tail_bound(q) == doctest::Approx(spiked_want).epsilon(1e-14));
  }

  SUBCASE("probabilities clamp and decrease in t") {
    TailBoundQuery q;
    q.kind = TailKind::chebyshev_G12;
    q.params = {{"t", 1e-6}, {"sigma", 1.0}, {"K", 1.0}, {"n", 100.0}};
    CHECK(tail_bound(q) == 1.0);

    const std::vector<TailKind> prob_kinds{
        TailKind::bernstein_uEv, TailKind::chebyshev_G12,
        TailKind::chebyshev_EuEv, TailKind::matrix_bernstein};
    for (TailKind kind : prob_kinds) {
      double prev = 2.0;
      for (double t = 0.5; t < 40.0; t *= 2.0) {
        TailBoundQuery g;
        g.kind = kind;
        g.params = {{"t", t},   {"sigma", 1.0}, {"K", 1.0}, {"n", 50.0},
                    {"d", 5.0}, {"m4", 2.0},    {"V", 4.0}, {"L", 0.2}};
        const double p = tail_bound(g);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(p <= prev + 1e-15);
        prev = p;
      }
    }

    // The spiked bound is a norm estimate, not a probability.
    TailBoundQuery big;
    big.kind = TailKind::matrix_bernstein_spiked;
    big.params = {{"lambda1", 100.0}, {"r_lambda", 5.0},
                  {"n", 100.0},       {"d", 100.0},
                  {"L", 2.0},         {"fourth_excess", 0.0}};
    CHECK(tail_bound(big) > 1.0);
  }

  SUBCASE("missing parameters are named") {
    TailBoundQuery q;
    q.kind = TailKind::chebyshev_EuEv;
    q.params = {{"t", 1.0}, {"n", 10.0}};
    try {
      tail_bound(q);
      FAIL("expected IncompleteInput");
    } catch (const IncompleteInput& e) {
      CHECK(std::string(e.what()).find("m4") != std::string::npos);
    }

    q.params = {{"t", -1.0}, {"n", 10.0}, {"m4", 1.0}};
    CHECK_THROWS_AS(tail_bound(q), IncompleteInput);

    TailBoundQuery s;
    s.kind = TailKind::matrix_bernstein_spiked;
    s.params = {{"lambda1", 1.0}, {"r_lambda", 1.0}, {"n", 10.0},
                {"d", 10.0},      {"L", 1.0},        {"fourth_excess", -0.5}};
    CHECK_THROWS_AS(tail_bound(s), IncompleteInput);
  }
}

TEST_CASE("simulated tails sit under the formulas") {
  const int n = 100;
  const int trials = 1500;
  const Eigen::MatrixXd UV = seeded_orthonormal(n, 2, 99);
  const Eigen::VectorXd u = UV.col(0);
  const Eigen::VectorXd v = UV.col(1);

  // Bernstein parameters of u^T E v for the +-1 ensemble: the statistic is
  // a sum over independent upper-triangle entries with coefficient
  // u_i v_j + u_j v_i (off-diagonal) or u_i v_i (diagonal, sd sqrt(2)).
  double sigma2 = 0.0, K = 0.0;
  for (int i = 0; i < n; ++i) {
    const double cd = u(i) * v(i);
    sigma2 += 2.0 * cd * cd;
    K = std::max(K, std::sqrt(2.0) * std::abs(cd));
    for (int j = i + 1; j < n; ++j) {
      const double c = u(i) * v(j) + u(j) * v(i);
      sigma2 += c * c;
      K = std::max(K, std::abs(c));
    }
  }
  const double sigma = std::sqrt(sigma2);

  // Signal frame for the resolvent statistic: diagonal, r = 2, gap 20.
  const double lam_eval = 20.0;
  std::vector<double> uEv(static_cast<std::size_t>(trials));
  std::vector<double> g12(static_cast<std::size_t>(trials));
  std::vector<double> eueu(static_cast<std::size_t>(trials));
  for (int t = 0; t < trials; ++t) {
    const auto E =
        gen_symmetric_noise(wigner_spec(n, 4000 + static_cast<std::uint64_t>(t),
                                        EntryDist::rademacher))
            .mat();
    uEv[static_cast<std::size_t>(t)] = u.dot(E * v);
    double acc = 0.0;
    for (int l = 2; l < n; ++l) acc += E(0, l) * E(1, l) / lam_eval;
    g12[static_cast<std::size_t>(t)] = acc;
    eueu[static_cast<std::size_t>(t)] = E.col(0).dot(E.col(1));
  }

  SUBCASE("bernstein dominance on a t-grid") {
    for (double mult : {1.5, 2.0, 2.5}) {
      const double t = mult * sigma;
      int hits = 0;
      for (double s : uEv)
        if (std::abs(s) >= t) ++hits;
      const double emp = static_cast<double>(hits) / trials;
      TailBoundQuery q;
      q.kind = TailKind::bernstein_uEv;
      q.params = {{"t", t}, {"sigma", sigma}, {"K", K}};
      CHECK(emp <= tail_bound(q));
    }
  }

  SUBCASE("variance dominance for the quadratic statistics") {
    MomentAcc a12, aee;
    for (double s : g12) a12.add(s);
    for (double s : eueu) aee.add(s);
    // 6 n sigma^2 (sigma^2 + K^2) / gap^2 with unit entries and gap 20.
    CHECK(a12.var() <= 6.0 * n * 1.0 * 2.0 / (lam_eval * lam_eval));
    CHECK(aee.var() <= 5.0 * n * 1.0);
  }
}
