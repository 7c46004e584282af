#include "eigenshift/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eigenshift/errors.hpp"

namespace eigenshift {

namespace {

std::vector<int> validated_sorted(const std::vector<int>& S, Eigen::Index n,
                                  const char* what) {
  if (S.empty()) throw InvalidSelection(std::string(what) + " is empty");
  std::vector<int> sorted = S;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    if (sorted[k] < 0 || sorted[k] >= n)
      throw InvalidSelection(std::string(what) + " index out of range");
    if (k > 0 && sorted[k] == sorted[k - 1])
      throw InvalidSelection(std::string(what) + " has duplicate indices");
  }
  return sorted;
}

}  // namespace

Selection select_neighborhood_values(const Eigen::VectorXd& values,
                                     const std::vector<int>& S,
                                     double lambda_bar) {
  if (!(lambda_bar > 0.0)) throw InvalidRadius("neighborhood radius must be positive");
  const Eigen::Index n = values.size();
  Selection sel;
  sel.S = validated_sorted(S, n, "selection");
  sel.lambda_bar = lambda_bar;
  for (int j = 0; j < n; ++j) {
    for (int i : sel.S) {
      if (std::abs(values[i] - values[j]) <= lambda_bar) {
        sel.N.push_back(j);
        break;
      }
    }
  }
  sel.p = static_cast<int>(sel.S.size());
  sel.r = static_cast<int>(sel.N.size());
  return sel;
}

Selection select_neighborhood(const Spectrum& spec, const std::vector<int>& S,
                              double lambda_bar) {
  return select_neighborhood_values(spec.eigenvalues, S, lambda_bar);
}

GapReport spectral_gaps(const Spectrum& spec, const std::vector<int>& S,
                        int p) {
  const Eigen::Index n = spec.source_dim;
  std::vector<int> sorted = validated_sorted(S, n, "selection");
  if (static_cast<Eigen::Index>(sorted.size()) >= n)
    throw InvalidSelection("selection must be a proper subset");
  if (p < 1 || p >= n) throw InvalidSelection("p must be in [1, n-1]");

  const auto& ev = spec.eigenvalues;
  std::vector<bool> in_S(static_cast<std::size_t>(n), false);
  for (int i : sorted) in_S[static_cast<std::size_t>(i)] = true;

  GapReport g;
  g.delta_S = std::numeric_limits<double>::infinity();
  for (int i : sorted)
    for (int j = 0; j < n; ++j)
      if (!in_S[static_cast<std::size_t>(j)])
        g.delta_S = std::min(g.delta_S, std::abs(ev[i] - ev[j]));
  if (g.delta_S == 0.0)
    throw DegenerateGap("selection boundary gap is zero");

  g.delta_p = ev[p - 1] - ev[p];
  const double delta_pm1 =
      (p >= 2) ? (ev[p - 2] - ev[p - 1])
               : std::numeric_limits<double>::infinity();
  g.delta_p_two_sided = std::min(delta_pm1, g.delta_p);

  // Boundary gap of the top-p selection in magnitude order.
  std::vector<int> order = singular_order(ev);
  std::vector<bool> top(static_cast<std::size_t>(n), false);
  for (int k = 0; k < p; ++k) top[static_cast<std::size_t>(order[k])] = true;
  g.delta_bar_p = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (top[static_cast<std::size_t>(i)])
      for (int j = 0; j < n; ++j)
        if (!top[static_cast<std::size_t>(j)])
          g.delta_bar_p = std::min(g.delta_bar_p, std::abs(ev[i] - ev[j]));

  g.delta = g.delta_S;
  return g;
}

namespace {

Eigen::MatrixXd columns(const Eigen::MatrixXd& U, const std::vector<int>& idx) {
  Eigen::MatrixXd out(U.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t k = 0; k < idx.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = U.col(idx[k]);
  return out;
}

std::vector<int> complement(const std::vector<int>& N, Eigen::Index n) {
  std::vector<bool> in_N(static_cast<std::size_t>(n), false);
  for (int j : N) in_N[static_cast<std::size_t>(j)] = true;
  std::vector<int> out;
  for (int j = 0; j < n; ++j)
    if (!in_N[static_cast<std::size_t>(j)]) out.push_back(j);
  return out;
}

double max_offdiag_abs(const Eigen::MatrixXd& M) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    for (Eigen::Index j = 0; j < M.cols(); ++j)
      if (i != j) best = std::max(best, std::abs(M(i, j)));
  return best;
}

// max over i != j and k of |(W^T diag(1/(v_k - out_vals)) W)(i, j)|,
// shared by the symmetric and rectangular paths.
double middle_resolvent_max(const Eigen::MatrixXd& W,
                            const Eigen::VectorXd& out_vals,
                            const std::vector<double>& k_vals) {
  double y = 0.0;
  const Eigen::Index q = W.rows();
  for (double vk : k_vals) {
    Eigen::VectorXd inv(q);
    for (Eigen::Index l = 0; l < q; ++l) {
      const double gap = vk - out_vals[l];
      if (gap == 0.0)
        throw DegenerateGap("selected value collides with an outside value");
      inv[l] = 1.0 / gap;
    }
    Eigen::MatrixXd M = W.transpose() * inv.asDiagonal() * W;
    y = std::max(y, max_offdiag_abs(M));
  }
  return y;
}

}  // namespace

SkewnessReport skew_xyw(const Spectrum& spec, const Eigen::MatrixXd& E,
                        const Selection& sel, const std::vector<int>& kset) {
  const Eigen::Index n = spec.source_dim;
  if (E.rows() != n || E.cols() != n)
    throw DimensionError("perturbation dimension mismatch");

  std::vector<int> ks = kset.empty() ? sel.S : kset;
  for (int k : ks)
    if (!std::binary_search(sel.S.begin(), sel.S.end(), k))
      throw InvalidSelection("kset must be a subset of S");

  SkewnessReport sk;
  sk.E_norm = operator_norm(E);

  const Eigen::MatrixXd U_N = columns(spec.eigenvectors, sel.N);
  const Eigen::MatrixXd B = E * U_N;  // n x r
  sk.x = (U_N.transpose() * B).cwiseAbs().maxCoeff();
  sk.w = B.colwise().norm().maxCoeff();

  const std::vector<int> out = complement(sel.N, n);
  if (out.empty()) {
    sk.y = 0.0;  // empty-sum convention when N covers everything
    return sk;
  }
  const Eigen::MatrixXd W = columns(spec.eigenvectors, out).transpose() * B;
  Eigen::VectorXd out_vals(static_cast<Eigen::Index>(out.size()));
  for (std::size_t l = 0; l < out.size(); ++l)
    out_vals[static_cast<Eigen::Index>(l)] = spec.eigenvalues[out[l]];
  std::vector<double> k_vals;
  for (int k : ks) k_vals.push_back(spec.eigenvalues[k]);
  sk.y = middle_resolvent_max(W, out_vals, k_vals);
  return sk;
}

SkewnessReport skew_aux(const Spectrum& spec, const Eigen::MatrixXd& E,
                        const Selection& sel, int p) {
  const Eigen::Index n = spec.source_dim;
  if (E.rows() != n || E.cols() != n)
    throw DimensionError("perturbation dimension mismatch");
  if (p < 1 || p > n) throw InvalidSelection("p must be in [1, n]");

  SkewnessReport sk;
  sk.E_norm = operator_norm(E);
  sk.xbar =
      (spec.eigenvectors.transpose() * E * spec.eigenvectors).cwiseAbs().maxCoeff();

  const Eigen::MatrixXd B = E * columns(spec.eigenvectors, sel.N);
  sk.ybar = max_offdiag_abs(B.transpose() * B);

  sk.sigma = std::numeric_limits<double>::infinity();
  for (int i = 0; i < p; ++i)
    sk.sigma = std::min(sk.sigma, std::abs(spec.eigenvalues[i]));
  return sk;
}

SkewnessReport rect_skew_xyw(const Eigen::MatrixXd& U,
                             const Eigen::MatrixXd& V,
                             const Eigen::VectorXd& sigma,
                             const Eigen::MatrixXd& E, const Selection& sel) {
  const Eigen::Index q = sigma.size();
  if (U.cols() != q || V.cols() != q)
    throw DimensionError("singular basis width must match sigma");
  if (E.rows() != U.rows() || E.cols() != V.rows())
    throw DimensionError("perturbation dimension mismatch");

  SkewnessReport sk;
  sk.E_norm = operator_norm(E);

  const Eigen::MatrixXd U_N = columns(U, sel.N);
  const Eigen::MatrixXd V_N = columns(V, sel.N);
  const Eigen::MatrixXd EV = E * V_N;              // m x r
  const Eigen::MatrixXd EtU = E.transpose() * U_N; // n x r
  sk.x = (U_N.transpose() * EV).cwiseAbs().maxCoeff();
  sk.w = std::max(EV.colwise().norm().maxCoeff(),
                  EtU.colwise().norm().maxCoeff());

  // Outside directions with genuinely nonzero singular value.
  const double cutoff = (q > 0) ? 1e-12 * sigma.cwiseAbs().maxCoeff() : 0.0;
  std::vector<int> out;
  {
    std::vector<bool> in_N(static_cast<std::size_t>(q), false);
    for (int j : sel.N) in_N[static_cast<std::size_t>(j)] = true;
    for (int l = 0; l < q; ++l)
      if (!in_N[static_cast<std::size_t>(l)] && sigma[l] > cutoff)
        out.push_back(l);
  }
  if (out.empty()) {
    sk.y = 0.0;
    return sk;
  }

  Eigen::VectorXd out_vals(static_cast<Eigen::Index>(out.size()));
  for (std::size_t l = 0; l < out.size(); ++l)
    out_vals[static_cast<Eigen::Index>(l)] = sigma[out[l]];
  std::vector<double> k_vals;
  for (int k : sel.S) k_vals.push_back(sigma[k]);

  const Eigen::MatrixXd Wu = columns(U, out).transpose() * EV;
  const Eigen::MatrixXd Wv = columns(V, out).transpose() * EtU;
  sk.y = std::max(middle_resolvent_max(Wu, out_vals, k_vals),
                  middle_resolvent_max(Wv, out_vals, k_vals));
  return sk;
}

nlohmann::json skew_to_json(const SkewnessReport& sk, const Selection& sel,
                            double delta_S) {
  return nlohmann::json{{"x", sk.x},
                        {"y", sk.y},
                        {"w", sk.w},
                        {"xbar", sk.xbar},
                        {"ybar", sk.ybar},
                        {"sigma", sk.sigma},
                        {"E_norm", sk.E_norm},
                        {"p", sel.p},
                        {"r", sel.r},
                        {"lambda_bar", sel.lambda_bar},
                        {"delta_S", delta_S}};
}

}  // namespace eigenshift
