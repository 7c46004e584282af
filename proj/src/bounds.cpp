#include "eigenshift/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eigenshift/errors.hpp"

namespace eigenshift {

namespace {

constexpr double kThreshold = 1.0 / 12.0;
constexpr double kThresholdSlack = 1e-15;

double fetch(const std::map<std::string, double>& in, const std::string& key) {
  auto it = in.find(key);
  if (it == in.end()) throw IncompleteInput("missing input: " + key);
  return it->second;
}

AssumptionVerdict finish_verdict(AssumptionKind kind,
                                 std::map<std::string, double> terms) {
  AssumptionVerdict v;
  v.kind = kind;
  v.terms = std::move(terms);
  v.max_ratio = 0.0;
  for (const auto& [name, val] : v.terms)
    v.max_ratio = std::max(v.max_ratio, val);
  v.holds = std::isfinite(v.max_ratio) &&
            v.max_ratio <= kThreshold + kThresholdSlack;
  return v;
}

// Shared body of C0/D0/C1/D1: radius is lambda_bar or sigma_bar, gap is
// delta_S or the contour margin delta.
AssumptionVerdict radius_gap_verdict(AssumptionKind kind,
                                     const std::map<std::string, double>& in,
                                     const std::string& radius_key,
                                     const std::string& gap_key) {
  const double p = fetch(in, "p");
  const double r = fetch(in, "r");
  const double E_norm = fetch(in, "E_norm");
  const double radius = fetch(in, radius_key);
  const double gap = fetch(in, gap_key);
  const double x = fetch(in, "x");
  const double w = fetch(in, "w");
  std::map<std::string, double> terms;
  terms["noise_ratio"] = std::sqrt(p) * E_norm / radius;
  terms["x_ratio"] = r * x / gap;
  terms["w_ratio"] = std::sqrt(r) * w / std::sqrt(radius * gap);
  return finish_verdict(kind, std::move(terms));
}

AssumptionVerdict spiked_verdict(AssumptionKind kind,
                                 const std::map<std::string, double>& in,
                                 const std::string& order_gap_key) {
  const double p = fetch(in, "p");
  const double r = fetch(in, "r");
  const double E_norm = fetch(in, "E_norm");
  const double lambda_p = fetch(in, "lambda_p");
  const double lambda_r1 = fetch(in, "lambda_r1");
  const double lambda_1 = fetch(in, "lambda_1");
  const double n = fetch(in, "n");
  const double order_gap = fetch(in, order_gap_key);
  const double spike_gap = lambda_p - lambda_r1;
  std::map<std::string, double> terms;
  terms["noise_ratio"] = std::sqrt(p) * E_norm / spike_gap;
  terms["spread_ratio"] = r * lambda_1 / (order_gap * std::sqrt(n));
  terms["mixed_ratio"] = std::sqrt(r) * E_norm / std::sqrt(spike_gap * order_gap);
  return finish_verdict(kind, std::move(terms));
}

// Sum of the named terms in map iteration order; additive reports use this
// so `value` equals the term sum bitwise.
double sum_terms(const std::map<std::string, double>& terms) {
  double s = 0.0;
  for (const auto& [name, val] : terms) s += val;
  return s;
}

void require_margin(const GapReport& gaps) {
  if (!(gaps.delta > 0.0) || gaps.delta > gaps.delta_S)
    throw DegenerateGap("contour margin must lie in (0, delta_S]");
}

std::map<std::string, double> base_inputs(const SkewnessReport& sk,
                                          const Selection& sel) {
  return {{"p", static_cast<double>(sel.p)},
          {"r", static_cast<double>(sel.r)},
          {"E_norm", sk.E_norm},
          {"x", sk.x},
          {"w", sk.w}};
}

}  // namespace

std::string assumption_kind_name(AssumptionKind kind) {
  switch (kind) {
    case AssumptionKind::C0: return "C0";
    case AssumptionKind::D0: return "D0";
    case AssumptionKind::C1: return "C1";
    case AssumptionKind::D1: return "D1";
    case AssumptionKind::C2: return "C2";
    case AssumptionKind::C3: return "C3";
    case AssumptionKind::C3p: return "C3p";
  }
  throw IncompleteInput("unknown assumption kind");
}

AssumptionKind assumption_kind_from_name(const std::string& name) {
  if (name == "C0") return AssumptionKind::C0;
  if (name == "D0") return AssumptionKind::D0;
  if (name == "C1") return AssumptionKind::C1;
  if (name == "D1") return AssumptionKind::D1;
  if (name == "C2") return AssumptionKind::C2;
  if (name == "C3") return AssumptionKind::C3;
  if (name == "C3p" || name == "C3'") return AssumptionKind::C3p;
  throw IncompleteInput("unknown assumption kind: " + name);
}

AssumptionVerdict check_assumption(AssumptionKind kind,
                                   const std::map<std::string, double>& in) {
  switch (kind) {
    case AssumptionKind::C0:
      return radius_gap_verdict(kind, in, "lambda_bar", "delta_S");
    case AssumptionKind::D0:
      return radius_gap_verdict(kind, in, "lambda_bar", "delta");
    case AssumptionKind::C1:
      return radius_gap_verdict(kind, in, "sigma_bar", "delta_S");
    case AssumptionKind::D1:
      return radius_gap_verdict(kind, in, "sigma_bar", "delta");
    case AssumptionKind::C2: {
      const double p = fetch(in, "p");
      const double r = fetch(in, "r");
      const double eps1 = fetch(in, "eps1");
      const double eps2 = fetch(in, "eps2");
      const double eta = fetch(in, "eta");
      const double t1 = fetch(in, "t1");
      std::map<std::string, double> terms;
      terms["eps1_ratio"] = std::sqrt(p) * eps1;
      terms["eps2_ratio"] = r * t1 * eps2;
      terms["eta_ratio"] = std::sqrt(r * eta);
      return finish_verdict(kind, std::move(terms));
    }
    case AssumptionKind::C3:
      return spiked_verdict(kind, in, "delta_p_two_sided");
    case AssumptionKind::C3p:
      return spiked_verdict(kind, in, "delta_p");
  }
  throw IncompleteInput("unknown assumption kind");
}

nlohmann::json assumption_to_json(const AssumptionVerdict& v) {
  nlohmann::json j;
  j["kind"] = assumption_kind_name(v.kind);
  j["terms"] = v.terms;
  j["max_ratio"] = v.max_ratio;
  j["holds"] = v.holds;
  return j;
}

nlohmann::json bound_report_to_json(const BoundReport& b) {
  nlohmann::json j;
  j["method"] = b.method;
  j["value"] = b.value;
  j["terms"] = b.terms;
  j["assumption"] =
      b.assumption ? assumption_to_json(*b.assumption) : nlohmann::json();
  j["valid"] = b.valid;
  j["constant_free"] = b.constant_free;
  return j;
}

ClassicalBounds classical_bounds(double E_norm, double delta_S) {
  if (!(delta_S > 0.0)) throw DegenerateGap("delta_S must be positive");
  ClassicalBounds cb;
  cb.weyl = E_norm;
  cb.davis_kahan = 2.0 * E_norm / delta_S;
  return cb;
}

BoundReport eigenspace_bound(EigenspaceMode mode, const SkewnessReport& sk,
                             const Selection& sel, const GapReport& gaps) {
  BoundReport b;
  double g = 0.0;
  auto inputs = base_inputs(sk, sel);
  switch (mode) {
    case EigenspaceMode::leading_p:
      b.method = "eigenspace_leading";
      g = gaps.delta_p;
      inputs["lambda_bar"] = sel.lambda_bar;
      inputs["delta_S"] = g;
      b.assumption = check_assumption(AssumptionKind::C0, inputs);
      break;
    case EigenspaceMode::singular_p:
      b.method = "eigenspace_singular";
      g = gaps.delta_bar_p;
      inputs["lambda_bar"] = sel.lambda_bar;
      inputs["delta_S"] = g;
      b.assumption = check_assumption(AssumptionKind::C0, inputs);
      break;
    case EigenspaceMode::general_S:
      b.method = "eigenspace_general";
      g = gaps.delta_S;
      require_margin(gaps);
      inputs["lambda_bar"] = sel.lambda_bar;
      inputs["delta"] = gaps.delta;
      b.assumption = check_assumption(AssumptionKind::D0, inputs);
      break;
  }
  if (!(g > 0.0)) throw DegenerateGap("gap must be positive");
  const double c = 12.0 * std::sqrt(static_cast<double>(sel.p));
  const double sr = std::sqrt(static_cast<double>(sel.r));
  b.terms["noise_term"] = c * sk.E_norm / sel.lambda_bar;
  b.terms["x_term"] = c * sr * sk.x / g;
  b.terms["y_term"] = c * sr * sk.y / g;
  b.value = sum_terms(b.terms);
  b.valid = b.assumption->holds && std::isfinite(b.value);
  if (mode == EigenspaceMode::singular_p && !(b.value < 1.0)) b.valid = false;
  return b;
}

BoundReport y_variant_bounds(YVariant variant, const SkewnessReport& sk,
                             const Selection& sel, const GapReport& gaps,
                             const Spectrum& spec) {
  if (!(gaps.delta_p > 0.0)) throw DegenerateGap("delta_p must be positive");
  const int n = static_cast<int>(spec.eigenvalues.size());
  if (sel.p < 1 || sel.p > n) throw InvalidSelection("p out of range");
  const double c = 12.0 * std::sqrt(static_cast<double>(sel.p));
  const double sr = std::sqrt(static_cast<double>(sel.r));
  const double lambda_p = spec.eigenvalues(sel.p - 1);

  BoundReport b;
  auto inputs = base_inputs(sk, sel);
  inputs["lambda_bar"] = sel.lambda_bar;
  inputs["delta_S"] = gaps.delta_p;
  b.assumption = check_assumption(AssumptionKind::C0, inputs);

  switch (variant) {
    case YVariant::trivial:
      b.method = "y_trivial";
      b.terms["noise_term"] = c * sk.E_norm / sel.lambda_bar;
      b.terms["x_term"] = c * sr * sk.x / gaps.delta_p;
      b.terms["y_term"] =
          c * sr * sk.E_norm * sk.E_norm / (gaps.delta_p * sel.lambda_bar);
      break;
    case YVariant::spectral_sum: {
      b.method = "y_spectral_sum";
      double tail = 0.0;
      for (int l = sel.r; l < n; ++l) {
        const double gap = lambda_p - spec.eigenvalues(l);
        if (!(gap > 0.0))
          throw DegenerateGap(
              "spectral sum needs lambda_p above the excluded spectrum");
        tail += 1.0 / gap;
      }
      b.terms["noise_term"] = c * sk.E_norm / sel.lambda_bar;
      b.terms["x_term"] = c * sr * sk.x / gaps.delta_p;
      b.terms["y_term"] = c * sr * sk.xbar * sk.xbar * tail / gaps.delta_p;
      break;
    }
    case YVariant::low_rank: {
      b.method = "y_low_rank";
      if (!(lambda_p > 0.0))
        throw NegativeSpike("low-rank form needs lambda_p > 0");
      if (!(sk.sigma > 0.0))
        throw DegenerateGap("low-rank form needs a nonzero leading spectrum");
      const double r_d = static_cast<double>(sel.r);
      b.terms["noise_term"] = c * sk.E_norm / lambda_p;
      b.terms["x_term"] = c * sr * sk.x / gaps.delta_p;
      b.terms["y_term"] = c * sr * sk.ybar / (gaps.delta_p * sk.sigma);
      b.terms["x2_term"] =
          c * r_d * std::sqrt(r_d) * sk.x * sk.x / (gaps.delta_p * sk.sigma);
      break;
    }
  }
  b.value = sum_terms(b.terms);
  b.valid = b.assumption->holds && std::isfinite(b.value);
  return b;
}

BoundReport rectangular_bound(const SkewnessReport& sk, const Selection& sel,
                              const GapReport& gaps) {
  require_margin(gaps);
  if (!(gaps.delta_S > 0.0)) throw DegenerateGap("delta_S must be positive");
  BoundReport b;
  b.method = "rectangular";
  auto inputs = base_inputs(sk, sel);
  inputs["sigma_bar"] = sel.lambda_bar;
  inputs["delta"] = gaps.delta;
  b.assumption = check_assumption(AssumptionKind::D1, inputs);
  const double c = 12.0 * std::sqrt(2.0 * static_cast<double>(sel.p));
  const double sr = std::sqrt(static_cast<double>(sel.r));
  b.terms["noise_term"] = c * sk.E_norm / sel.lambda_bar;
  b.terms["x_term"] = c * sr * sk.x / gaps.delta_S;
  b.terms["y_term"] = c * sr * sk.y / gaps.delta_S;
  b.value = sum_terms(b.terms);
  b.valid = b.assumption->holds && std::isfinite(b.value);
  return b;
}

BoundReport comparator_bounds(Comparator method, const Spectrum& spec,
                              const Eigen::MatrixXd& E, int p) {
  const int n = static_cast<int>(spec.eigenvalues.size());
  if (p < 1 || p >= n)
    throw InvalidSelection("comparator bounds need 1 <= p < n");
  if (E.rows() != n || E.cols() != n)
    throw DimensionError("perturbation shape does not match the spectrum");
  const auto& lam = spec.eigenvalues;
  const double delta_p = lam(p - 1) - lam(p);
  const double E_norm = operator_norm(E);

  BoundReport b;
  b.constant_free = true;
  switch (method) {
    case Comparator::KL: {
      b.method = "KL";
      if (!(2.0 * E_norm <= delta_p))
        throw PreconditionFailed("2*E_norm <= delta_p");
      // xbar over all pairs.
      const Eigen::MatrixXd V =
          spec.eigenvectors.transpose() * E * spec.eigenvectors;
      const double xbar = V.cwiseAbs().maxCoeff();
      double inv_sum = 0.0;
      for (int i = 0; i < p; ++i)
        for (int j = p; j < n; ++j) inv_sum += 1.0 / (lam(i) - lam(j));
      b.terms["overlap_term"] = xbar * inv_sum;
      b.terms["noise_sq_term"] = (E_norm / delta_p) * (E_norm / delta_p);
      break;
    }
    case Comparator::BT: {
      b.method = "BT";
      if (!(delta_p > 0.0)) throw PreconditionFailed("delta_p > 0");
      if (!(4.0 * E_norm <= delta_p))
        throw PreconditionFailed("4*E_norm <= delta_p");
      const double abs_lp = std::abs(lam(p - 1));
      if (!(delta_p <= abs_lp / 4.0))
        throw PreconditionFailed("delta_p <= |lambda_p|/4");
      // Own block size: smallest r >= p whose boundary clears |lambda_p|/2.
      int r = n;
      for (int cand = p; cand < n; ++cand) {
        if (abs_lp / 2.0 <= std::abs(lam(p - 1) - lam(cand))) {
          r = cand;
          break;
        }
      }
      const Eigen::MatrixXd Ur = spec.eigenvectors.leftCols(r);
      const double x_r = (Ur.transpose() * E * Ur).cwiseAbs().maxCoeff();
      const double sigma1 = lam.cwiseAbs().maxCoeff();
      b.terms["log_term"] = E_norm / abs_lp * std::log(6.0 * sigma1 / delta_p);
      b.terms["block_term"] =
          static_cast<double>(r) * static_cast<double>(r) * x_r / delta_p;
      break;
    }
    case Comparator::JW: {
      b.method = "JW";
      if (!(lam(n - 1) > 0.0))
        throw PreconditionFailed("spectrum must be strictly positive");
      const double x0 = relative_overlap_max(spec, E);
      const double r_p = gap_ratio_sum(spec, p);
      if (!(r_p <= 1.0 / (8.0 * x0)))
        throw PreconditionFailed("r_p <= 1/(8*x0)");
      double main = 0.0;
      if (x0 > 0.0) {
        double s = 0.0;
        for (int i = 0; i < p; ++i)
          for (int j = p; j < n; ++j) {
            const double d = lam(i) - lam(j);
            s += lam(i) * lam(j) / (d * d);
          }
        main = x0 * std::sqrt(s);
      }
      b.terms["main_term"] = main;
      break;
    }
  }
  b.value = sum_terms(b.terms);
  b.valid = std::isfinite(b.value);
  return b;
}

double relative_overlap_max(const Spectrum& spec, const Eigen::MatrixXd& E) {
  const int n = static_cast<int>(spec.eigenvalues.size());
  if (E.rows() != n || E.cols() != n)
    throw DimensionError("perturbation shape does not match the spectrum");
  const Eigen::MatrixXd V =
      spec.eigenvectors.transpose() * E * spec.eigenvectors;
  double x0 = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      x0 = std::max(x0, std::abs(V(i, j)) /
                            std::sqrt(spec.eigenvalues(i) * spec.eigenvalues(j)));
  return x0;
}

double gap_ratio_sum(const Spectrum& spec, int p) {
  const int n = static_cast<int>(spec.eigenvalues.size());
  if (p < 1 || p >= n) throw InvalidSelection("gap ratio sum needs 1 <= p < n");
  const auto& lam = spec.eigenvalues;
  // Spectrum descending: the nearest excluded eigenvalue sits at the split,
  // so the per-index minima collapse to boundary gaps.
  double r_p = 0.0;
  for (int i = 0; i < p; ++i) r_p += lam(i) / (lam(i) - lam(p));
  for (int j = p; j < n; ++j) r_p += lam(j) / (lam(p - 1) - lam(j));
  return r_p;
}

double spiked_limit(SpikedModel model, double lambda_p, double gamma,
                    const std::vector<double>& H) {
  if (!(gamma >= 0.0)) throw IncompleteInput("gamma must be nonnegative");
  switch (model) {
    case SpikedModel::johnstone: {
      if (!(lambda_p > 1.0 + std::sqrt(gamma)))
        throw SubcriticalSpike("spike must exceed 1 + sqrt(gamma)");
      const double num = lambda_p * gamma;
      const double den =
          (lambda_p - 1.0) * (lambda_p - 1.0) + (lambda_p - 1.0) * gamma;
      return std::sqrt(num / den);
    }
    case SpikedModel::byz: {
      if (H.empty()) throw IncompleteInput("missing input: H");
      double m1 = 0.0, m2 = 0.0;
      for (double t : H) {
        if (lambda_p == t)
          throw DegenerateGap("spike coincides with a bulk eigenvalue");
        const double d = lambda_p - t;
        m1 += t * lambda_p / d;
        m2 += t * t / (d * d);
      }
      const double cnt = static_cast<double>(H.size());
      const double phi = lambda_p + gamma * m1 / cnt;
      const double dphi = 1.0 - gamma * m2 / cnt;
      if (!(dphi > 0.0))
        throw SubcriticalSpike("phi'(lambda_p) must be positive");
      const double radicand = 1.0 - lambda_p * dphi / phi;
      return std::sqrt(std::max(0.0, radicand));
    }
  }
  throw IncompleteInput("unknown spiked model");
}

DecayComparison decay_comparison_bounds(DecayFamily family, double c, int p,
                                        int n, double lambda1) {
  if (n < 2 || p < 1 || p >= n)
    throw IncompleteInput("need n >= 2 and 1 <= p < n");
  if (!(c > 0.0)) throw IncompleteInput("c must be positive");
  if (!(lambda1 > 0.0)) throw IncompleteInput("lambda1 must be positive");

  std::vector<double> h(static_cast<size_t>(n));
  for (int i = 1; i <= n; ++i) {
    double v = 0.0;
    switch (family) {
      case DecayFamily::polynomial:
        v = std::pow(static_cast<double>(i), -c);
        break;
      case DecayFamily::exponential:
        v = std::exp(-c * static_cast<double>(i));
        break;
      case DecayFamily::logarithmic:
        v = std::pow(std::log(static_cast<double>(i) + 1.0), -c);
        break;
    }
    h[static_cast<size_t>(i - 1)] = v;
  }
  for (int i = 1; i < n; ++i)
    if (!(h[i - 1] > h[i]) || !(h[n - 1] > 0.0))
      throw DegenerateGap("decay profile underflows or is not decreasing");

  double cross = 0.0;
  for (int i = 0; i < p; ++i)
    for (int j = p; j < n; ++j) {
      const double d = h[i] - h[j];
      cross += h[i] * h[j] / (d * d);
    }
  DecayComparison out;
  out.jw_value = std::sqrt(cross) / (lambda1 * h[n - 1]);

  const double gap_p = h[p - 1] - h[p];
  double tail = 0.0;
  for (int l = p; l < n; ++l) tail += 1.0 / (lambda1 * (h[p - 1] - h[l]));
  out.tv_value = std::sqrt(static_cast<double>(n)) / lambda1 +
                 1.0 / (lambda1 * gap_p) +
                 tail / (lambda1 * gap_p);
  out.ratio = out.jw_value / out.tv_value;
  return out;
}

}  // namespace eigenshift
