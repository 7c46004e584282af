#pragma once

#include <complex>
#include <utility>
#include <vector>

namespace eigenshift {

// Composition of s into T positive parts m_1 + ... + m_T = s.
struct Composition {
  int T = 0;
  int s = 0;
  std::vector<int> m;
};

// Directed bipartite graph on positions 1..s+1. X occupies positions 1..T,
// Y the remaining s+1-T. X position j sends edges to every Y position in
// [(s+1) - sum_{k<=j}(m_k - 1), (s+1) - sum_{k<j}(m_k - 1)], so it emits
// exactly m_j edges and the whole graph has exactly s.
struct ProfileGraph {
  std::vector<int> X;                      // positions 1..T
  std::vector<int> Y;                      // positions T+1..s+1
  std::vector<std::pair<int, int>> edges;  // (X position, Y position)
  std::vector<int> degrees;                // one per Y position
  int r_c = 0;                             // sum over Y of (degree - 1)
};

struct ProfileStats {
  std::vector<int> degrees;
  int r_c = 0;
  int edge_count = 0;
};

// All compositions in lexicographic order; C(s-1, T-1) of them. Empty for
// T > s or T <= 0 rather than an error, which is the convenient convention
// at the recursion boundaries.
std::vector<Composition> enumerate_compositions(int T, int s);

// Throws ShapeError when the lengths are inconsistent with L.
ProfileGraph build_profile(int X_len, int Y_len, const Composition& L);

// Product over the edge multiset of 1/(value_X - value_Y); a repeated edge
// contributes a squared factor. Empty X or Y returns 0 by convention.
// Coincident endpoint values throw DegenerateGap.
double profile_weight(const ProfileGraph& g, const std::vector<double>& values_X,
                      const std::vector<double>& values_Y);

ProfileStats profile_stats(const ProfileGraph& g);

// (-1)^{T+1} sum over L of w(inside, outside | L), with T = |inside|.
// This is the closed form of (1/2πi) ∮ prod 1/(z - value) dz around the
// inside values. T = 0 returns 0 (nothing enclosed). An empty outside list
// is refused with UnsupportedAllInside: the composition sum is vacuous
// there and the true value is not recovered by it. Values shared between
// the two sides throw DegenerateGap; within one side repeats are fine.
// s = |inside| + |outside| - 1 must stay <= s_cap (the sum has C(s-1, T-1)
// terms; this module exists for verification, not production summation).
double integral_combinatorial(const std::vector<double>& inside,
                              const std::vector<double>& outside,
                              int s_cap = 18);

// (1/2πi) ∮ dz / prod (z - pole_j) over an axis-aligned rectangle whose
// vertical edges bisect the gaps between the extreme inside values and the
// nearest outside ones (or stand off by the rectangle height when there is
// no outside pole on that flank). Height is 1 + spread of inside values.
// Composite 32-node Gauss-Legendre per edge, panel count doubled until two
// successive estimates agree within tol; NonConvergent after 20 doublings
// or if the imaginary part refuses to settle below tol. If no separating
// rectangle with margin >= 1e-6 * pole spread exists: NoSeparatingContour.
std::complex<double> integral_numeric(const std::vector<double>& poles,
                                      const std::vector<bool>& inside,
                                      double tol);

}  // namespace eigenshift
