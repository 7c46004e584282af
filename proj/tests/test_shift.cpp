#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "doctest.h"
#include "eigenshift/ensembles.hpp"
#include "eigenshift/errors.hpp"
#include "eigenshift/selection.hpp"
#include "eigenshift/shift_bounds.hpp"
#include "eigenshift/spectral.hpp"

using namespace eigenshift;

namespace {

// Same rescaling trick as in the bounds tests: pin the operator norm so the
// hypothesis ratios sit in a known regime.
Eigen::MatrixXd scaled_noise(int n, std::uint64_t seed, double target_norm) {
  EnsembleSpec es;
  es.kind = EnsembleKind::wigner;
  es.n = n;
  es.entry_dist = EntryDist::gaussian;
  es.seed = seed;
  Eigen::MatrixXd E = gen_symmetric_noise(es).mat();
  const double nrm = operator_norm(E);
  REQUIRE(nrm > 0.0);
  return E * (target_norm / nrm);
}

SkewnessReport merged_skew(const Spectrum& spec, const Eigen::MatrixXd& E,
                           const Selection& sel) {
  SkewnessReport sk = skew_xyw(spec, E, sel);
  const SkewnessReport aux = skew_aux(spec, E, sel, sel.p);
  sk.xbar = aux.xbar;
  sk.ybar = aux.ybar;
  sk.sigma = aux.sigma;
  return sk;
}

// Three well-separated spikes on top of a slowly spread bulk in [0, 5).
// Deterministic bulk keeps neighborhood membership unambiguous.
SymMatrix spiked_instance(int n, std::uint64_t qseed,
                          const std::vector<double>& spikes) {
  Eigen::VectorXd d(n);
  const int s = static_cast<int>(spikes.size());
  for (int i = 0; i < s; ++i) d(i) = spikes[static_cast<size_t>(i)];
  for (int i = s; i < n; ++i)
    d(i) = 5.0 * static_cast<double>(i - s) / static_cast<double>(n - s);
  const Eigen::MatrixXd Q = seeded_orthonormal(n, n, qseed);
  return SymMatrix(Q * d.asDiagonal() * Q.transpose());
}

}  // namespace

TEST_CASE("lower shift certificate evaluates the half-width formula") {
  const SymMatrix A = gen_signal_diag_spikes({100.0, 3.0, 2.0, 1.0}, 4);
  const Spectrum spec = decompose_symmetric(A);

  SUBCASE("zero perturbation certifies a zero bound") {
    SkewnessReport q{};
    const ShiftCertificate c = lower_eigen_shift(spec, q, 1, 50.0);
    CHECK(c.valid);
    CHECK(c.bound == 0.0);
    CHECK(c.delta_internal == 0.0);
    CHECK(c.target == 0);
    CHECK(c.direction == ShiftDirection::lower);
    CHECK(c.hypotheses.at("noise_radius") == 0.0);
    CHECK(c.hypotheses.at("gap_margin") == 0.0);
    CHECK(c.hypotheses.at("bound_display") == 0.0);
  }

  SUBCASE("bound is the exact half of the internal width, x branch") {
    // lambda_bar = 50 isolates the top spike, so the block size is 1.
    SkewnessReport q{};
    q.x = 0.2;
    q.y = 0.1;
    q.w = 0.5;
    q.E_norm = 0.5;
    const ShiftCertificate c = lower_eigen_shift(spec, q, 1, 50.0);
    CHECK(c.delta_internal ==
          std::max(12.0 * 1.0 * 0.2, 144.0 * 1.0 * 0.5 * 0.5 / 50.0));
    CHECK(c.delta_internal == 12.0 * 1.0 * 0.2);
    CHECK(c.bound == 0.5 * c.delta_internal);
    CHECK(c.bound == std::max(6.0 * 1.0 * 0.2, 72.0 * 1.0 * 0.5 * 0.5 / 50.0));
    CHECK(c.valid);

    // Half-width stays below the coarse r*(E^2/lambda_1 + x) envelope that
    // the one-spike corollary quotes (radius = lambda_1/2, w = E_norm).
    const double lambda_1 = spec.eigenvalues(0);
    const ShiftCertificate h =
        lower_eigen_shift(spec, q, 1, lambda_1 / 2.0);
    CHECK(h.bound <=
          144.0 * 1.0 * (q.E_norm * q.E_norm / lambda_1 + q.x) + 1e-15);
    CHECK(h.valid);
  }

  SUBCASE("bound is the exact half of the internal width, w branch") {
    SkewnessReport q{};
    q.w = 2.0;
    q.E_norm = 0.5;
    const ShiftCertificate c = lower_eigen_shift(spec, q, 1, 10.0);
    CHECK(c.delta_internal == 144.0 * 1.0 * 2.0 * 2.0 / 10.0);
    CHECK(c.bound == 72.0 * 1.0 * 2.0 * 2.0 / 10.0);
  }

  SUBCASE("p = n is allowed and drops the gap hypotheses to zero") {
    SkewnessReport q{};
    q.x = 0.1;
    q.w = 0.1;
    q.E_norm = 0.2;
    const ShiftCertificate c = lower_eigen_shift(spec, q, 4, 50.0);
    CHECK(c.valid);
    CHECK(c.hypotheses.at("gap_margin") == 0.0);
    CHECK(c.hypotheses.at("bound_display") ==
          doctest::Approx(12.0 * 0.2 / 50.0));
  }

  SUBCASE("tied boundary eigenvalues invalidate without throwing") {
    const SymMatrix tied = gen_signal_diag_spikes({5.0, 5.0, 1.0}, 3);
    const Spectrum tspec = decompose_symmetric(tied);
    REQUIRE(tspec.eigenvalues(0) == doctest::Approx(5.0));
    SkewnessReport q{};
    q.x = 0.3;
    q.w = 0.3;
    q.E_norm = 0.1;
    const ShiftCertificate c = lower_eigen_shift(tspec, q, 1, 1.0);
    CHECK_FALSE(c.valid);
    CHECK(c.bound > 0.0);
  }

  SUBCASE("noise radius above one invalidates without throwing") {
    SkewnessReport q{};
    q.E_norm = 1.0;
    const ShiftCertificate c = lower_eigen_shift(spec, q, 1, 10.0);
    CHECK_FALSE(c.valid);
    CHECK(c.hypotheses.at("noise_radius") == doctest::Approx(1.2));
    CHECK(c.bound == 0.0);
  }

  SUBCASE("rejects out-of-range targets and degenerate radii") {
    SkewnessReport q{};
    CHECK_THROWS_AS(lower_eigen_shift(spec, q, 0, 10.0), InvalidSelection);
    CHECK_THROWS_AS(lower_eigen_shift(spec, q, 5, 10.0), InvalidSelection);
    CHECK_THROWS_AS(lower_eigen_shift(spec, q, 1, 0.0), InvalidRadius);
    CHECK_THROWS_AS(lower_eigen_shift(spec, q, 1, -3.0), InvalidRadius);
  }
}

TEST_CASE("lower shift certificate is respected by exact eigenvalue shifts") {
  const int n = 40;
  const double lambda_bar = 10.0;
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    const SymMatrix A = spiked_instance(n, 9100 + seed, {60.0, 56.0, 52.0});
    const Spectrum spec = decompose_symmetric(A);
    REQUIRE(spec.eigenvalues(0) == doctest::Approx(60.0));
    const Eigen::MatrixXd E = scaled_noise(n, 42000 + seed, 0.1);
    const Spectrum tilted = decompose_symmetric(SymMatrix(A.mat() + E));

    const Selection sel3 = select_neighborhood(spec, {0, 1, 2}, lambda_bar);
    REQUIRE(sel3.r == 3);
    const SkewnessReport q3 = merged_skew(spec, E, sel3);
    const ShiftCertificate c3 = lower_eigen_shift(spec, q3, 3, lambda_bar);
    REQUIRE(c3.valid);
    CHECK(spec.eigenvalues(2) - tilted.eigenvalues(2) <= c3.bound + 1e-12);

    const Selection sel1 = select_neighborhood(spec, {0}, lambda_bar);
    REQUIRE(sel1.r == 3);
    const SkewnessReport q1 = merged_skew(spec, E, sel1);
    const ShiftCertificate c1 = lower_eigen_shift(spec, q1, 1, lambda_bar);
    REQUIRE(c1.valid);
    CHECK(spec.eigenvalues(0) - tilted.eigenvalues(0) <= c1.bound + 1e-12);
  }
}

TEST_CASE("upper shift certificate checks only the noise radius") {
  const SymMatrix A = gen_signal_diag_spikes({60.0, 40.0}, 5);
  const Spectrum spec = decompose_symmetric(A);

  SUBCASE("zero perturbation certifies a zero bound") {
    SkewnessReport q{};
    const ShiftCertificate c = upper_eigen_shift(spec, q, 10.0);
    CHECK(c.valid);
    CHECK(c.bound == 0.0);
    CHECK(c.direction == ShiftDirection::upper);
    CHECK(c.target == 0);
    CHECK(c.hypotheses.size() == 1);
    CHECK(c.hypotheses.at("noise_radius") == 0.0);
  }

  SUBCASE("bound halves the internal width exactly") {
    SkewnessReport q{};
    q.x = 0.3;
    q.w = 1.0;
    q.E_norm = 0.3;
    const ShiftCertificate c = upper_eigen_shift(spec, q, 10.0);
    CHECK(c.delta_internal ==
          std::max(12.0 * 1.0 * 0.3, 144.0 * 1.0 * 1.0 * 1.0 / 10.0));
    CHECK(c.bound == 72.0 * 1.0 * 1.0 * 1.0 / 10.0);
    CHECK(c.hypotheses.at("noise_radius") == doctest::Approx(0.72));
    CHECK(c.valid);
  }

  SUBCASE("validity ignores the skew magnitudes") {
    SkewnessReport q{};
    q.x = 1.0e6;
    q.w = 1.0e6;
    q.E_norm = 0.1;
    const ShiftCertificate c = upper_eigen_shift(spec, q, 10.0);
    CHECK(c.valid);
    CHECK(c.hypotheses.size() == 1);
    CHECK(c.bound >= 6.0e6);
  }

  SUBCASE("noise radius above one invalidates without throwing") {
    SkewnessReport q{};
    q.E_norm = 0.5;
    const ShiftCertificate c = upper_eigen_shift(spec, q, 10.0);
    CHECK_FALSE(c.valid);
    CHECK(c.hypotheses.at("noise_radius") == doctest::Approx(1.2));
  }

  SUBCASE("rejects a degenerate radius") {
    SkewnessReport q{};
    CHECK_THROWS_AS(upper_eigen_shift(spec, q, 0.0), InvalidRadius);
  }
}

TEST_CASE("leading-form upper certificate counts the top half-spectrum block") {
  SUBCASE("block size comes from the lambda_1/2 cut") {
    const SymMatrix A = gen_signal_diag_spikes({100.0, 60.0, 49.0, 10.0}, 4);
    const Spectrum spec = decompose_symmetric(A);
    SkewnessReport q{};
    q.x = 0.5;
    q.w = 1.0e9;  // ignored by the leading form
    q.E_norm = 1.0;
    const ShiftCertificate c = upper_eigen_shift(spec, q, 7.0, true);
    CHECK(c.bound ==
          std::max(6.0 * 2 * 0.5, 72.0 * 2 * 1.0 * 1.0 / spec.eigenvalues(0)));
    CHECK(c.bound == 6.0);
    CHECK(c.hypotheses.size() == 1);
    CHECK(c.hypotheses.at("leading_noise") == doctest::Approx(0.48));
    CHECK(c.valid);
  }

  SUBCASE("diagonal skew dominates wide spectra, radius argument unused") {
    const SymMatrix A = gen_signal_diag_spikes({4000.0, 100.0, 50.0}, 3);
    const Spectrum spec = decompose_symmetric(A);
    SkewnessReport q{};
    q.x = 2.0;
    q.w = 12.6;
    q.E_norm = 12.6;
    const ShiftCertificate c = upper_eigen_shift(spec, q, 0.0, true);
    CHECK(c.bound == 12.0);  // 6*r*x with r = 1 beats the norm term
    CHECK(c.hypotheses.at("leading_noise") == doctest::Approx(0.1512));
    CHECK(c.valid);
  }
}

TEST_CASE("upper certificates bound measured leading-eigenvalue increases") {
  const int n = 40;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const SymMatrix A = spiked_instance(n, 7300 + seed, {60.0, 40.0});
    const Spectrum spec = decompose_symmetric(A);
    const Eigen::MatrixXd E = scaled_noise(n, 51000 + seed, 0.4);
    const Spectrum tilted = decompose_symmetric(SymMatrix(A.mat() + E));
    const double rise = tilted.eigenvalues(0) - spec.eigenvalues(0);

    const Selection sel1 = select_neighborhood(spec, {0}, 10.0);
    REQUIRE(sel1.r == 1);
    const SkewnessReport q1 = merged_skew(spec, E, sel1);
    const ShiftCertificate c = upper_eigen_shift(spec, q1, 10.0);
    REQUIRE(c.valid);  // 24*0.4 = 9.6 <= 10
    CHECK(rise <= c.bound + 1e-12);

    const Selection sel2 = select_neighborhood(spec, {0, 1}, 25.0);
    REQUIRE(sel2.r == 2);
    const SkewnessReport q2 = merged_skew(spec, E, sel2);
    const ShiftCertificate lead = upper_eigen_shift(spec, q2, 25.0, true);
    REQUIRE(lead.valid);  // 48*0.4 = 19.2 <= 60
    CHECK(rise <= lead.bound + 1e-12);
  }
}

TEST_CASE("sign flip maps lower certificates to bottom-eigenvalue guarantees") {
  const int n = 40;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    // Single spike at the bottom of the spectrum, bulk in [0, 5).
    Eigen::VectorXd d(n);
    for (int i = 0; i + 1 < n; ++i)
      d(i) = 5.0 * static_cast<double>(i) / static_cast<double>(n - 1);
    d(n - 1) = -50.0;
    const Eigen::MatrixXd Q = seeded_orthonormal(n, n, 6400 + seed);
    const SymMatrix A(Q * d.asDiagonal() * Q.transpose());
    const Eigen::MatrixXd E = scaled_noise(n, 88000 + seed, 0.4);

    const Spectrum spec = decompose_symmetric(A);
    const Spectrum flipped = decompose_symmetric(SymMatrix(-A.mat()));
    REQUIRE(flipped.eigenvalues(0) == doctest::Approx(50.0));

    // Skew quantities agree between the flipped top block and the original
    // bottom block: eigenvectors match up to sign and the noise negates.
    const Selection sel_neg = select_neighborhood(flipped, {0}, 10.0);
    REQUIRE(sel_neg.r == 1);
    const SkewnessReport q_neg = merged_skew(flipped, -E, sel_neg);
    const Selection sel_bot = select_neighborhood(spec, {n - 1}, 10.0);
    REQUIRE(sel_bot.r == 1);
    const SkewnessReport q_bot = merged_skew(spec, E, sel_bot);
    CHECK(q_neg.x == doctest::Approx(q_bot.x).epsilon(1e-9).scale(1e-3));
    CHECK(q_neg.y == doctest::Approx(q_bot.y).epsilon(1e-9).scale(1e-3));
    CHECK(q_neg.w == doctest::Approx(q_bot.w).epsilon(1e-9).scale(1e-3));

    const ShiftCertificate c = lower_eigen_shift(flipped, q_neg, 1, 10.0);
    REQUIRE(c.valid);
    const Spectrum tilted = decompose_symmetric(SymMatrix(A.mat() + E));
    const double bottom_rise =
        tilted.eigenvalues(n - 1) - spec.eigenvalues(n - 1);
    CHECK(bottom_rise <= c.bound + 1e-12);
  }
}

TEST_CASE("singular floor flags small-eigenvalue blocks") {
  SUBCASE("worked diagonal example") {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(5, 5);
    D.diagonal() << 9.0, 4.0, 0.5, -0.3, -6.0;
    const Spectrum spec = decompose_symmetric(SymMatrix(D));
    const Eigen::MatrixXd E = 1.0e-3 * Eigen::MatrixXd::Identity(5, 5);
    const SingularFloor f = least_singular_floor(spec, E, 0.3, 1.0);
    CHECK(f.T == 1.0);
    REQUIRE(f.r_T == 2);
    CHECK(f.Lambda_T == std::vector<int>{2, 3});
    CHECK(f.x_T == doctest::Approx(1.0e-3));
    CHECK(f.lhs == doctest::Approx(48.0 * (1.0e-3 + 2.0e-3 / 0.3 +
                                           2.0e-6 / 0.3)));
    CHECK(f.guaranteed);
  }

  SUBCASE("zero perturbation is guaranteed with a zero left-hand side") {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
    D.diagonal() << 4.0, 2.0, 1.0;
    const Spectrum spec = decompose_symmetric(SymMatrix(D));
    const SingularFloor f = least_singular_floor(
        spec, Eigen::MatrixXd::Zero(3, 3), 1.0, 1.5);
    CHECK(f.lhs == 0.0);
    CHECK(f.guaranteed);
    CHECK(f.r_T == 1);
  }

  SUBCASE("rejects singular input, bad thresholds, shape mismatch") {
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
    D.diagonal() << 4.0, 2.0, 1.0;
    const Spectrum spec = decompose_symmetric(SymMatrix(D));
    const Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3, 3);
    CHECK_THROWS_AS(least_singular_floor(spec, E, 0.0, 1.0), SingularInput);
    CHECK_THROWS_AS(least_singular_floor(spec, E, 1.0, 0.0), InvalidRadius);
    CHECK_THROWS_AS(least_singular_floor(spec, E, 1.0, -2.0), InvalidRadius);
    CHECK_THROWS_AS(
        least_singular_floor(spec, Eigen::MatrixXd::Zero(4, 4), 1.0, 1.0),
        DimensionError);
  }
}

TEST_CASE("singular floor certificates hold on seeded instances") {
  const int n = 60;
  const double T = 400.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    // Three small signed eigenvalues, the rest pushed past 500 in magnitude.
    Eigen::VectorXd d(n);
    d(0) = 55.0;
    d(1) = -50.0;
    d(2) = 45.0;
    for (int i = 3; i < n; ++i) {
      const double mag =
          500.0 + 1000.0 * static_cast<double>(i - 3) / static_cast<double>(n);
      d(i) = (i % 2 == 0) ? mag : -mag;
    }
    const Eigen::MatrixXd Q = seeded_orthonormal(n, n, 12000 + seed);
    const SymMatrix A(Q * d.asDiagonal() * Q.transpose());
    const Spectrum spec = decompose_symmetric(A);
    const double sigma_min = spec.eigenvalues.cwiseAbs().minCoeff();
    REQUIRE(sigma_min == doctest::Approx(45.0));

    const Eigen::MatrixXd E = scaled_noise(n, 64000 + seed, 0.7);
    const SingularFloor f = least_singular_floor(spec, E, sigma_min, T);
    REQUIRE(f.r_T == 3);
    REQUIRE(f.guaranteed);

    const Spectrum tilted = decompose_symmetric(SymMatrix(A.mat() + E));
    const double tilted_min = tilted.eigenvalues.cwiseAbs().minCoeff();
    CHECK(tilted_min >= sigma_min / 2.0);

    // A noise level past the radius check degrades the certificate.
    const SingularFloor loud =
        least_singular_floor(spec, 12.0 * E, sigma_min, T);
    CHECK_FALSE(loud.guaranteed);
  }
}

TEST_CASE("zero augmentation is exact") {
  Eigen::MatrixXd M(3, 4);
  M << 1.5, -2.0, 0.25, 4.0,
      0.0, 3.5, -1.25, 2.0,
      7.0, -0.5, 0.125, -3.0;
  const Eigen::MatrixXd G = augment_zero_row_col(M);
  REQUIRE(G.rows() == 4);
  REQUIRE(G.cols() == 5);
  CHECK(G.row(3).cwiseAbs().maxCoeff() == 0.0);
  CHECK(G.col(4).cwiseAbs().maxCoeff() == 0.0);
  CHECK((G.topLeftCorner(3, 4) - M).cwiseAbs().maxCoeff() == 0.0);

  Eigen::MatrixXd F(3, 4);
  F << 0.1, 0.2, -0.3, 0.4,
      -0.5, 0.6, 0.7, -0.8,
      0.9, -1.0, 1.1, 1.2;
  const Eigen::MatrixXd sum_of_augments =
      augment_zero_row_col(M) + augment_zero_row_col(F);
  const Eigen::MatrixXd augment_of_sum = augment_zero_row_col(M + F);
  CHECK((sum_of_augments - augment_of_sum).cwiseAbs().maxCoeff() == 0.0);

  // Nonzero singular values are untouched; the augmentation only adds a zero.
  Eigen::JacobiSVD<Eigen::MatrixXd> base(M);
  Eigen::JacobiSVD<Eigen::MatrixXd> aug(G);
  const double top = base.singularValues()(0);
  for (int i = 0; i < 3; ++i)
    CHECK(std::abs(base.singularValues()(i) - aug.singularValues()(i)) <=
          1e-12 * top);
  CHECK(aug.singularValues()(3) <= 1e-12 * top);
}

TEST_CASE("condition guard certifies kappa inflation") {
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
  D.diagonal() << 100.0, 50.0, 10.0;
  const Spectrum spec = decompose_symmetric(SymMatrix(D));

  SUBCASE("zero perturbation gives a unit ratio") {
    const ConditionGuard g =
        condition_guard(spec, Eigen::MatrixXd::Zero(3, 3), 20.0);
    CHECK(g.kappa_ratio_bound == 1.0);
    CHECK(g.slack == 0.0);
    CHECK(g.floor.guaranteed);
    CHECK(g.valid);
  }

  SUBCASE("small isotropic perturbation, oracle condition number") {
    const Eigen::MatrixXd E = 0.1 * Eigen::MatrixXd::Identity(3, 3);
    const ConditionGuard g = condition_guard(spec, E, 20.0);
    CHECK(g.floor.lhs == doctest::Approx(0.7224));
    CHECK(g.slack == doctest::Approx(0.001));
    CHECK(g.kappa_ratio_bound == doctest::Approx(1.001 / 0.99));
    CHECK(g.kappa_ratio_bound <= 2.2);
    CHECK(g.valid);

    const Spectrum tilted = decompose_symmetric(SymMatrix(D + E));
    const double kappa_tilted = tilted.eigenvalues.cwiseAbs().maxCoeff() /
                                tilted.eigenvalues.cwiseAbs().minCoeff();
    CHECK(kappa_tilted <= g.kappa_ratio_bound * 10.0 + 1e-9);
  }

  SUBCASE("guaranteed floor rescues a crossed Weyl denominator") {
    // The perturbation hits only the top eigenvector, so the floor holds
    // even though E_norm is past sigma_min/2; the ratio lands near 2.
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(3, 3);
    W.diagonal() << 2000.0, 1000.0, 1.0;
    const Spectrum wide = decompose_symmetric(SymMatrix(W));
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(3, 3);
    E(0, 0) = 0.6;
    const ConditionGuard g = condition_guard(wide, E, 100.0);
    REQUIRE(g.floor.guaranteed);
    CHECK(g.kappa_ratio_bound == doctest::Approx(1.0003 / 0.5));
    CHECK(g.valid);
    const Spectrum tilted = decompose_symmetric(SymMatrix(W + E));
    const double kappa_tilted = tilted.eigenvalues.cwiseAbs().maxCoeff() /
                                tilted.eigenvalues.cwiseAbs().minCoeff();
    CHECK(kappa_tilted <= g.kappa_ratio_bound * 2000.0);
  }

  SUBCASE("norm-level perturbation fails the slack check") {
    const Eigen::MatrixXd E = 100.0 * Eigen::MatrixXd::Identity(3, 3);
    const ConditionGuard g = condition_guard(spec, E, 20.0);
    CHECK_FALSE(g.valid);
    CHECK(std::isinf(g.kappa_ratio_bound));
    CHECK(g.slack == doctest::Approx(1.0));
  }

  SUBCASE("singular input reports an unbounded ratio instead of raising") {
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(3, 3);
    S.diagonal() << 5.0, 0.0, -2.0;
    const Spectrum sing = decompose_symmetric(SymMatrix(S));
    ConditionGuard g;
    CHECK_NOTHROW(g = condition_guard(
                      sing, Eigen::MatrixXd::Zero(3, 3), 1.0));
    CHECK_FALSE(g.valid);
    CHECK(std::isinf(g.kappa_ratio_bound));
    CHECK_FALSE(g.floor.guaranteed);
  }
}

TEST_CASE("outlier forecast reports the n-over-lambda law") {
  SUBCASE("exact arithmetic and regime boundary") {
    const OutlierForecast f = dw_outlier(400.0, 400, 0.7, 5.0);
    CHECK(f.prediction == 1.0);
    CHECK(f.correction_bound == 1.7);
    CHECK_FALSE(f.corollary_regime);  // 48*sqrt(400) = 960

    CHECK(dw_outlier(960.0, 400, 0.0, 0.0).corollary_regime);
    CHECK_FALSE(dw_outlier(959.0, 400, 0.0, 0.0).corollary_regime);
  }

  SUBCASE("degenerate spikes stay non-throwing") {
    OutlierForecast f{};
    CHECK_NOTHROW(f = dw_outlier(0.0, 100, 0.5, 1.0));
    CHECK_FALSE(std::isfinite(f.prediction));
    CHECK_FALSE(f.corollary_regime);

    const OutlierForecast neg = dw_outlier(-50.0, 100, 0.5, 1.0);
    CHECK(neg.prediction == -2.0);
    CHECK_FALSE(neg.corollary_regime);
  }

  SUBCASE("Monte Carlo mean shift tracks the prediction") {
    const int n = 300;
    const double lambda_1 = 3.0 * std::sqrt(static_cast<double>(n));
    const OutlierForecast f = dw_outlier(lambda_1, n, 0.0, 0.0);
    CHECK_FALSE(f.corollary_regime);  // supercritical but below 48*sqrt(n)

    double total = 0.0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      EnsembleSpec es;
      es.kind = EnsembleKind::wigner;
      es.n = n;
      es.entry_dist = EntryDist::gaussian;
      es.seed = 70000 + seed;
      Eigen::MatrixXd A = gen_symmetric_noise(es).mat();
      A(0, 0) += lambda_1;
      const Spectrum spec = decompose_symmetric(SymMatrix(A));
      total += spec.eigenvalues(0) - lambda_1;
    }
    const double mean_shift = total / 10.0;
    CHECK(mean_shift / f.prediction >= 0.75);
    CHECK(mean_shift / f.prediction <= 1.25);
  }
}

TEST_CASE("shift certificates serialize with hypothesis maps") {
  const SymMatrix A = gen_signal_diag_spikes({60.0, 40.0}, 3);
  const Spectrum spec = decompose_symmetric(A);
  SkewnessReport q{};
  q.x = 0.2;
  q.w = 0.5;
  q.E_norm = 0.3;

  const ShiftCertificate lo = lower_eigen_shift(spec, q, 1, 10.0);
  const nlohmann::json jl = shift_certificate_to_json(lo);
  CHECK(jl["direction"] == "lower");
  CHECK(jl["target"] == 0);
  CHECK(jl["bound"].get<double>() == lo.bound);
  CHECK(jl["delta_internal"].get<double>() == lo.delta_internal);
  CHECK(jl["hypotheses"].contains("bound_display"));
  CHECK(jl["hypotheses"].contains("gap_margin"));
  CHECK(jl["valid"].get<bool>() == lo.valid);

  const ShiftCertificate up = upper_eigen_shift(spec, q, 10.0);
  const nlohmann::json ju = shift_certificate_to_json(up);
  CHECK(ju["direction"] == "upper");
  CHECK(ju["hypotheses"].size() == 1);
  CHECK(ju["hypotheses"].contains("noise_radius"));
}
