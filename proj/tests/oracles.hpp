#pragma once

// Independent reference computations used to freeze expected values. They
// work directly on raw 0/1 vectors and never call into the library's
// correlation or prediction code paths.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

namespace blindspot::oracle {

struct Ratio {
  long num = 0;
  long den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

/// Agreement count over n: the binary Kendall's Tau.
inline Ratio agreement(const std::vector<int>& x, const std::vector<int>& y) {
  Ratio r{0, static_cast<long>(x.size())};
  for (std::size_t i = 0; i < x.size(); ++i) r.num += x[i] == y[i] ? 1 : 0;
  return r;
}

/// Restricted change agreement of target x given proxy y, both raw state
/// vectors with an implied leading 1. Zero when y never changed.
inline Ratio change_agreement(const std::vector<int>& x, const std::vector<int>& y,
                              bool literal = false) {
  Ratio r{0, 0};
  int px = 1, py = 1;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const int dx = x[i] - px;
    const int dy = y[i] - py;
    if (dy != 0) ++r.den;
    if (dx == dy && (literal || dy != 0)) ++r.num;
    px = x[i];
    py = y[i];
  }
  if (r.den == 0) return Ratio{0, 1};
  return r;
}

inline std::vector<int> random_bits(std::mt19937_64& gen, std::size_t n, double p_one = 0.5) {
  std::bernoulli_distribution coin(p_one);
  std::vector<int> out(n);
  for (auto& b : out) b = coin(gen) ? 1 : 0;
  return out;
}

/// Misprediction probability, expanded term by term from the three
/// conditions (proxy good enough, same last state, mismatch / change).
inline double misprediction(double L, double M, double F) {
  const double p_spatial_invoked = 1.0 - L;
  const double p_same_last = M * M + (1.0 - M) * (1.0 - M);
  const double p_spatial_wrong = (1.0 - L) / 2.0;
  const double p_diff_last = 1.0 - p_same_last;
  return p_spatial_invoked * p_same_last * p_spatial_wrong +
         p_spatial_invoked * p_diff_last * F + L * F;
}

}  // namespace blindspot::oracle
