#include "eigenshift/contour.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "eigenshift/errors.hpp"

namespace eigenshift {

namespace {

void enumerate_rec(int parts_left, int remaining, std::vector<int>& prefix,
                   std::vector<Composition>& out, int T, int s) {
  if (parts_left == 1) {
    prefix.push_back(remaining);
    out.push_back({T, s, prefix});
    prefix.pop_back();
    return;
  }
  // Leave at least 1 for each remaining part.
  for (int first = 1; first <= remaining - (parts_left - 1); ++first) {
    prefix.push_back(first);
    enumerate_rec(parts_left - 1, remaining - first, prefix, out, T, s);
    prefix.pop_back();
  }
}

// Deterministic regardless of how callers chunk the terms: summation is a
// fixed binary tree over the index range.
double pairwise_sum(const std::vector<double>& v, std::size_t lo,
                    std::size_t hi) {
  if (hi - lo <= 8) {
    double acc = 0.0;
    for (std::size_t i = lo; i < hi; ++i) acc += v[i];
    return acc;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return pairwise_sum(v, lo, mid) + pairwise_sum(v, mid, hi);
}

// Gauss-Legendre nodes and weights on [-1, 1] by Newton iteration on the
// Legendre recurrence; machine-precision for the sizes used here.
void gauss_legendre(int n, std::vector<double>& xs, std::vector<double>& ws) {
  xs.assign(n, 0.0);
  ws.assign(n, 0.0);
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    xs[i] = -z;
    xs[n - 1 - i] = z;
    ws[i] = 2.0 / ((1.0 - z * z) * pp * pp);
    ws[n - 1 - i] = ws[i];
  }
}

}  // namespace

std::vector<Composition> enumerate_compositions(int T, int s) {
  std::vector<Composition> out;
  if (T <= 0 || T > s) return out;
  std::vector<int> prefix;
  prefix.reserve(static_cast<std::size_t>(T));
  enumerate_rec(T, s, prefix, out, T, s);
  return out;
}

ProfileGraph build_profile(int X_len, int Y_len, const Composition& L) {
  const int T = static_cast<int>(L.m.size());
  if (T != L.T || T == 0) throw ShapeError("composition is inconsistent");
  int s = 0;
  for (int mk : L.m) {
    if (mk < 1) throw ShapeError("composition parts must be positive");
    s += mk;
  }
  if (s != L.s) throw ShapeError("composition parts do not sum to s");
  if (X_len != T || Y_len != s + 1 - T)
    throw ShapeError("X/Y lengths do not match the composition");

  ProfileGraph g;
  for (int j = 1; j <= T; ++j) g.X.push_back(j);
  for (int j = T + 1; j <= s + 1; ++j) g.Y.push_back(j);
  g.degrees.assign(static_cast<std::size_t>(Y_len), 0);

  int cum = 0;  // sum_{k<j} (m_k - 1)
  for (int j = 1; j <= T; ++j) {
    const int hi = (s + 1) - cum;
    cum += L.m[static_cast<std::size_t>(j - 1)] - 1;
    const int lo = (s + 1) - cum;
    for (int yp = lo; yp <= hi; ++yp) {
      g.edges.emplace_back(j, yp);
      g.degrees[static_cast<std::size_t>(yp - (T + 1))] += 1;
    }
  }
  g.r_c = 0;
  for (int d : g.degrees) g.r_c += d - 1;
  return g;
}

double profile_weight(const ProfileGraph& g, const std::vector<double>& values_X,
                      const std::vector<double>& values_Y) {
  if (g.X.empty() || g.Y.empty()) return 0.0;
  if (values_X.size() != g.X.size() || values_Y.size() != g.Y.size())
    throw ShapeError("value lists do not match the profile");
  const int T = static_cast<int>(g.X.size());
  double w = 1.0;
  for (const auto& [xp, yp] : g.edges) {
    const double vx = values_X[static_cast<std::size_t>(xp - 1)];
    const double vy = values_Y[static_cast<std::size_t>(yp - T - 1)];
    if (vx == vy) throw DegenerateGap("edge endpoints share a value");
    w *= 1.0 / (vx - vy);
  }
  return w;
}

ProfileStats profile_stats(const ProfileGraph& g) {
  ProfileStats st;
  st.degrees = g.degrees;
  st.r_c = g.r_c;
  st.edge_count = static_cast<int>(g.edges.size());
  return st;
}

double integral_combinatorial(const std::vector<double>& inside,
                              const std::vector<double>& outside,
                              int s_cap) {
  const int T = static_cast<int>(inside.size());
  if (T == 0) return 0.0;
  if (outside.empty())
    throw UnsupportedAllInside(
        "all poles inside: the composition sum does not apply");
  const int s = T + static_cast<int>(outside.size()) - 1;
  if (s > s_cap) throw PreconditionFailed("s exceeds the composition cap");
  for (double a : inside)
    for (double b : outside)
      if (a == b) throw DegenerateGap("value appears on both sides");

  const auto comps = enumerate_compositions(T, s);
  std::vector<double> weights;
  weights.reserve(comps.size());
  for (const auto& L : comps) {
    const ProfileGraph g =
        build_profile(T, s + 1 - T, L);
    weights.push_back(profile_weight(g, inside, outside));
  }
  const double sum = pairwise_sum(weights, 0, weights.size());
  return (T % 2 == 0) ? -sum : sum;  // (-1)^{T+1}
}

std::complex<double> integral_numeric(const std::vector<double>& poles,
                                      const std::vector<bool>& inside,
                                      double tol) {
  if (poles.size() != inside.size())
    throw ShapeError("pole/flag lengths differ");
  if (poles.empty()) throw ShapeError("no poles given");
  if (!(tol > 0.0)) throw ShapeError("tolerance must be positive");

  std::vector<double> ins, outs;
  for (std::size_t i = 0; i < poles.size(); ++i)
    (inside[i] ? ins : outs).push_back(poles[i]);

  const double all_lo = *std::min_element(poles.begin(), poles.end());
  const double all_hi = *std::max_element(poles.begin(), poles.end());
  double spread = all_hi - all_lo;
  if (spread == 0.0) spread = 1.0;

  double left_x, right_x, half_h;
  if (ins.empty()) {
    // Nothing enclosed: a unit box far to the left of every pole.
    half_h = 0.5;
    right_x = all_lo - spread - 1.0;
    left_x = right_x - 1.0;
  } else {
    const double in_lo = *std::min_element(ins.begin(), ins.end());
    const double in_hi = *std::max_element(ins.begin(), ins.end());
    half_h = 0.5 * (1.0 + (in_hi - in_lo));

    double left_out = -std::numeric_limits<double>::infinity();
    double right_out = std::numeric_limits<double>::infinity();
    for (double o : outs) {
      if (o > in_lo && o < in_hi)
        throw NoSeparatingContour("outside pole between inside poles");
      if (o <= in_lo) left_out = std::max(left_out, o);
      if (o >= in_hi) right_out = std::min(right_out, o);
    }
    left_x = std::isfinite(left_out) ? 0.5 * (in_lo + left_out)
                                     : in_lo - half_h;
    right_x = std::isfinite(right_out) ? 0.5 * (in_hi + right_out)
                                       : in_hi + half_h;

    double margin = std::numeric_limits<double>::infinity();
    for (double v : ins)
      margin = std::min({margin, v - left_x, right_x - v, half_h});
    for (double o : outs) {
      if (o <= in_lo) margin = std::min(margin, left_x - o);
      if (o >= in_hi) margin = std::min(margin, o - right_x);
    }
    if (!(margin >= 1e-6 * spread))
      throw NoSeparatingContour("separation margin below 1e-6 of the spread");
  }

  std::vector<double> xs, ws;
  gauss_legendre(32, xs, ws);

  const std::complex<double> corners[4] = {
      {left_x, -half_h}, {right_x, -half_h}, {right_x, half_h},
      {left_x, half_h}};

  auto integrand = [&](std::complex<double> z) {
    std::complex<double> f = 1.0;
    for (double p : poles) f /= (z - p);
    return f;
  };

  auto evaluate = [&](int panels) {
    std::complex<double> acc = 0.0;
    for (int e = 0; e < 4; ++e) {
      const std::complex<double> za = corners[e];
      const std::complex<double> zb = corners[(e + 1) % 4];
      const std::complex<double> seg = (zb - za) / double(panels);
      for (int k = 0; k < panels; ++k) {
        const std::complex<double> z0 = za + seg * double(k);
        std::complex<double> panel = 0.0;
        for (int q = 0; q < 32; ++q) {
          const std::complex<double> z = z0 + seg * (0.5 * (xs[q] + 1.0));
          panel += ws[q] * integrand(z);
        }
        acc += panel * (seg * 0.5);
      }
    }
    return acc / (std::complex<double>(0.0, 2.0 * std::numbers::pi));
  };

  std::complex<double> prev = evaluate(1);
  for (int k = 0; k < 20; ++k) {
    const std::complex<double> cur = evaluate(2 << k);
    if (std::abs(cur - prev) < tol) {
      if (std::abs(cur.imag()) > tol)
        throw NonConvergent("imaginary part above tolerance");
      return cur;
    }
    prev = cur;
  }
  throw NonConvergent("panel doubling did not converge");
}

}  // namespace eigenshift
