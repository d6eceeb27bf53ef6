#pragma once

// Reference implementations used only by the test suite. They are written
// for clarity and share no code paths with the library routines they check.

#include <cmath>
#include <complex>
#include <map>
#include <random>
#include <vector>

#include "modnls/lattice_seq.hpp"

namespace oracle {

using modnls::cplx;
using modnls::LatticeIndex;
using modnls::LatticeSeq;

inline LatticeSeq naive_convolve(const LatticeSeq& a, const LatticeSeq& b) {
  std::map<LatticeIndex, cplx> acc;
  for (const auto& [ka, va] : a.entries())
    for (const auto& [kb, vb] : b.entries()) acc[ka + kb] += va * vb;
  std::vector<LatticeSeq::Entry> entries(acc.begin(), acc.end());
  return LatticeSeq(a.dim(), std::move(entries));
}

/// Complex Gaussian amplitudes on the full ball |k| <= radius.
inline LatticeSeq random_seq(std::mt19937_64& rng, int d, int radius, double decay = 0.0) {
  std::normal_distribution<double> normal;
  std::vector<LatticeSeq::Entry> entries;
  const int lo = -radius;
  const int hi_y = d >= 2 ? radius : 0;
  const int hi_z = d >= 3 ? radius : 0;
  for (int x = lo; x <= radius; ++x)
    for (int y = d >= 2 ? lo : 0; y <= hi_y; ++y)
      for (int z = d >= 3 ? lo : 0; z <= hi_z; ++z) {
        LatticeIndex k = LatticeIndex::zero(d);
        k.c = {x, y, z};
        if (k.norm_sq() > static_cast<std::int64_t>(radius) * radius) continue;
        const double w = std::pow(modnls::japanese_bracket(k), -decay);
        entries.emplace_back(k, w * cplx(normal(rng), normal(rng)));
      }
  return LatticeSeq(d, std::move(entries));
}

inline double max_abs_diff(const LatticeSeq& a, const LatticeSeq& b) {
  std::map<LatticeIndex, cplx> diff;
  for (const auto& [k, v] : a.entries()) diff[k] += v;
  for (const auto& [k, v] : b.entries()) diff[k] -= v;
  double m = 0.0;
  for (const auto& [k, v] : diff) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace oracle
