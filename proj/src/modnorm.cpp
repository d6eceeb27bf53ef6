#include "modnls/modnorm.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "modnls/error.hpp"

namespace modnls {

namespace {

constexpr double kRelSlack = 1e-12;

std::vector<double> axis_window(const GridSpec& spec, double width) {
  std::vector<double> w(spec.n());
  for (int m = 0; m < spec.n(); ++m) {
    const double z = spec.dx() * spec.signed_mode(m);
    w[m] = std::exp(-z * z / (width * width));
  }
  return w;
}

bool exponent_le(Exponent a, Exponent b) { return a.reciprocal() >= b.reciprocal(); }

}  // namespace

const char* norm_method_name(NormMethod m) noexcept {
  return m == NormMethod::decomposition ? "decomposition" : "stft";
}

// ------------------------------------------------------ decomposition norm

std::vector<double> box_norm_profile(const DecompositionBasis& basis,
                                     std::span<const cplx> spectrum, Exponent p) {
  const auto indices = basis.indices();
  std::vector<double> out(indices.size(), 0.0);
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const double l2sq = box_l2_norm_sq(basis, indices[i], spectrum);
    if (l2sq == 0.0) continue;
    if (!p.is_inf() && p.value() == 2.0) {
      out[i] = std::sqrt(l2sq);
      continue;
    }
    out[i] = lp_norm(box_from_spectrum(basis, indices[i], spectrum), p);
  }
  return out;
}

double profile_norm(const DecompositionBasis& basis, std::span<const double> profile, Exponent q,
                    double s) {
  const auto indices = basis.indices();
  require(profile.size() == indices.size(), ErrorCode::invalid_argument,
          "profile length differs from the number of covered indices");
  std::vector<LatticeSeq::Entry> entries;
  entries.reserve(profile.size());
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (profile[i] != 0.0) entries.emplace_back(indices[i], profile[i]);
  return weighted_norm(LatticeSeq(basis.spec().dim(), std::move(entries)), q, s);
}

ModNormReport mod_norm_decomp(const DecompositionBasis& basis, const GridField& f,
                              const NormParams& params) {
  require(basis.spec() == f.spec(), ErrorCode::spec_mismatch, "field grid differs from basis grid");
  require(params.d == f.spec().dim(), ErrorCode::dimension_mismatch,
          "norm parameters dimension differs from grid dimension");
  require_band_limited(f, basis.covered_band(), "field");

  const auto profile = box_norm_profile(basis, forward_dft(f), params.p);
  ModNormReport report;
  report.params = params;
  report.method = NormMethod::decomposition;
  std::vector<LatticeSeq::Entry> entries;
  for (std::size_t i = 0; i < profile.size(); ++i)
    if (profile[i] != 0.0) entries.emplace_back(basis.indices()[i], profile[i]);
  report.per_k_profile = LatticeSeq(params.d, std::move(entries));
  report.value = weighted_norm(report.per_k_profile, params.q, params.s);
  return report;
}

double mod_norm(const DecompositionBasis& basis, const GridField& f, const NormParams& params) {
  return mod_norm_decomp(basis, f, params).value;
}

// --------------------------------------------------------------- STFT

StftSampling stft_sampling(const GridSpec& spec, const StftSettings& settings) {
  require(settings.window_width > 0.0 && settings.space_step > 0.0 && settings.freq_step > 0.0,
          ErrorCode::invalid_argument, "STFT steps and window width must be positive");
  StftSampling out;
  out.space_stride = std::max(1, static_cast<int>(std::lround(settings.space_step / spec.dx())));
  out.freq_stride = std::max(1, static_cast<int>(std::lround(settings.freq_step / spec.dk())));
  require(spec.n() % out.space_stride == 0, ErrorCode::undersampled_stft,
          "undersampled STFT: space step does not tile the periodic grid");
  out.space_step = out.space_stride * spec.dx();
  out.freq_step = out.freq_stride * spec.dk();
  return out;
}

namespace {

struct StftAccumulation {
  std::vector<std::size_t> freq_index;  // sampled spectrum entries
  std::vector<double> slice;            // sum_x |V|^p or max_x |V|
  double energy = 0.0;                  // sum |V|^2 over all samples
  StftSampling sampling;
};

StftAccumulation accumulate_stft(const GridField& f, Exponent p, const StftSettings& settings) {
  const auto& spec = f.spec();
  const int d = spec.dim();
  StftAccumulation acc;
  acc.sampling = stft_sampling(spec, settings);
  const int sx = acc.sampling.space_stride;
  const int sf = acc.sampling.freq_stride;

  for (std::size_t j = 0; j < spec.size(); ++j) {
    const auto idx = spec.unflatten(j);
    bool keep = true;
    for (int a = 0; a < d; ++a) keep = keep && spec.signed_mode(idx[a]) % sf == 0;
    if (keep) acc.freq_index.push_back(j);
  }
  acc.slice.assign(acc.freq_index.size(), 0.0);

  const auto w1 = axis_window(spec, settings.window_width);
  const double scale = std::pow(spec.dx(), d) / std::pow(2.0 * std::numbers::pi, 0.5 * d);
  const int per_axis = spec.n() / sx;
  std::size_t shifts = 1;
  for (int a = 0; a < d; ++a) shifts *= static_cast<std::size_t>(per_axis);

  std::vector<cplx> buf(spec.size());
  const auto samples = f.samples();
  const double pv = p.is_inf() ? 0.0 : p.value();
  for (std::size_t s = 0; s < shifts; ++s) {
    std::array<int, kMaxDim> shift{};
    std::size_t rem = s;
    for (int a = d - 1; a >= 0; --a) {
      shift[a] = static_cast<int>(rem % per_axis) * sx;
      rem /= per_axis;
    }
    for (std::size_t i = 0; i < spec.size(); ++i) {
      const auto idx = spec.unflatten(i);
      double g = 1.0;
      for (int a = 0; a < d; ++a) g *= w1[(idx[a] - shift[a] + spec.n()) % spec.n()];
      buf[i] = samples[i] * g;
    }
    dft_inplace(spec, buf, false);
    for (std::size_t k = 0; k < acc.freq_index.size(); ++k) {
      const double v = scale * std::abs(buf[acc.freq_index[k]]);
      acc.energy += v * v;
      if (p.is_inf())
        acc.slice[k] = std::max(acc.slice[k], v);
      else
        acc.slice[k] += pv == 1.0 ? v : (pv == 2.0 ? v * v : std::pow(v, pv));
    }
  }
  return acc;
}

double energy_ratio(const GridField& f, const StftAccumulation& acc, const StftSettings& settings) {
  const int d = f.spec().dim();
  const double f2 = std::pow(lp_norm(f, Exponent(2.0)), 2);
  const double w2 = settings.window_width * settings.window_width;
  const double g2 = std::pow(0.5 * std::numbers::pi * w2, 0.5 * d);
  const double cell = std::pow(acc.sampling.space_step * acc.sampling.freq_step, d);
  return acc.energy * cell / (f2 * g2);
}

}  // namespace

double stft_energy_ratio(const GridField& f, const StftSettings& settings) {
  require(lp_norm(f, Exponent(2.0)) > 0.0, ErrorCode::zero_norm, "zero-norm input");
  return energy_ratio(f, accumulate_stft(f, Exponent(2.0), settings), settings);
}

ModNormReport mod_norm_stft(const GridField& f, const NormParams& params,
                            const StftSettings& settings) {
  const auto& spec = f.spec();
  require(params.d == spec.dim(), ErrorCode::dimension_mismatch,
          "norm parameters dimension differs from grid dimension");
  ModNormReport report;
  report.params = params;
  report.method = NormMethod::stft;
  report.per_k_profile = LatticeSeq(params.d);
  if (lp_norm(f, Exponent::inf()) == 0.0) return report;

  const auto acc = accumulate_stft(f, params.p, settings);
  const double ratio = energy_ratio(f, acc, settings);
  if (std::abs(ratio - 1.0) > settings.frame_tolerance)
    fail(ErrorCode::undersampled_stft,
         "undersampled STFT: frame energy ratio " + std::to_string(ratio));

  const int d = spec.dim();
  const double a_d = std::pow(acc.sampling.space_step, d);
  const double b_d = std::pow(acc.sampling.freq_step, d);
  double total = 0.0;
  for (std::size_t k = 0; k < acc.freq_index.size(); ++k) {
    const auto idx = spec.unflatten(acc.freq_index[k]);
    double xi_sq = 0.0;
    for (int a = 0; a < d; ++a) xi_sq += spec.freq(idx[a]) * spec.freq(idx[a]);
    const double weight = std::pow(1.0 + xi_sq, 0.5 * params.s);
    const double slice = params.p.is_inf() ? acc.slice[k]
                                           : std::pow(acc.slice[k] * a_d, params.p.reciprocal());
    const double term = weight * slice;
    if (params.q.is_inf())
      total = std::max(total, term);
    else
      total += std::pow(term, params.q.value()) * b_d;
  }
  report.value = params.q.is_inf() ? total : std::pow(total, params.q.reciprocal());
  return report;
}

// ------------------------------------------------------------- Hölder

double holder_ratio(const DecompositionBasis& basis, const GridField& f, const GridField& g,
                    Exponent p, Exponent p1, Exponent p2, Exponent q, double s) {
  require(std::abs(p.reciprocal() - p1.reciprocal() - p2.reciprocal()) <= 1e-12,
          ErrorCode::hypothesis_violation, "exponent relation 1/p = 1/p1 + 1/p2 violated");
  const int d = basis.spec().dim();
  const NormParams target{d, p, q, s};
  require(target.sufficiently_large(), ErrorCode::hypothesis_violation,
          "regularity s is not sufficiently large for q");
  const double band = ProductDecomposer::product_band(basis);
  require_band_limited(f, band, "first factor");
  require_band_limited(g, band, "second factor");

  const double nf = mod_norm(basis, f, NormParams{d, p1, q, s});
  const double ng = mod_norm(basis, g, NormParams{d, p2, q, s});
  require(nf > 0.0 && ng > 0.0, ErrorCode::zero_norm, "zero-norm input");
  return mod_norm(basis, multiply(f, g), target) / (nf * ng);
}

// ---------------------------------------------------------- embeddings

double embedding_cutoff(std::span<const double> xi) {
  const double rd = std::sqrt(static_cast<double>(xi.size()));
  double r2 = 0.0;
  for (double v : xi) r2 += v * v;
  const double r = std::sqrt(r2);
  if (r <= rd) return 1.0;
  return bump_profile((r - rd) / rd);
}

double embedding_constant(const DecompositionBasis& basis, Exponent p1, Exponent p2) {
  require(exponent_le(p1, p2), ErrorCode::hypothesis_violation, "embedding needs p1 <= p2");
  const double inv_r = 1.0 - p1.reciprocal() + p2.reciprocal();
  const Exponent r = inv_r <= 0.0 ? Exponent::inf() : Exponent(std::min(1e300, 1.0 / inv_r));
  const auto& spec = basis.spec();
  const int d = spec.dim();
  std::vector<cplx> tau(spec.size());
  double worst = 0.0;
  std::array<double, kMaxDim> eta{};
  for (const auto& k : basis.indices()) {
    for (std::size_t j = 0; j < spec.size(); ++j) {
      const auto idx = spec.unflatten(j);
      for (int a = 0; a < d; ++a) eta[a] = spec.freq(idx[a]) - k.c[a];
      tau[j] = embedding_cutoff(std::span<const double>(eta.data(), d));
    }
    worst = std::max(worst, lp_norm(multiplier_kernel(spec, tau), r));
  }
  return worst;
}

EmbeddingCheck embedding_check(const GridField& f, const DecompositionBasis& basis,
                               const NormParams& from, const NormParams& to) {
  require(from.d == to.d && from.d == basis.spec().dim(), ErrorCode::dimension_mismatch,
          "embedding parameters dimension mismatch");
  require(from.s >= to.s && exponent_le(from.p, to.p) && exponent_le(from.q, to.q),
          ErrorCode::hypothesis_violation, "embedding needs s1 >= s2, p1 <= p2, q1 <= q2");
  require(basis.spec() == f.spec(), ErrorCode::spec_mismatch, "field grid differs from basis grid");
  require_band_limited(f, basis.covered_band(), "field");

  const auto spectrum = forward_dft(f);
  const auto prof_from = box_norm_profile(basis, spectrum, from.p);
  const auto prof_to = from.p == to.p ? prof_from : box_norm_profile(basis, spectrum, to.p);

  EmbeddingCheck out;
  out.constant = embedding_constant(basis, from.p, to.p);
  out.lhs = profile_norm(basis, prof_to, to.q, to.s);
  out.rhs = out.constant * profile_norm(basis, prof_from, from.q, from.s);
  out.holds = out.lhs <= out.rhs * (1.0 + kRelSlack);
  return out;
}

SupBound sup_norm_bound(const GridField& f, const DecompositionBasis& basis) {
  require(basis.spec() == f.spec(), ErrorCode::spec_mismatch, "field grid differs from basis grid");
  require_band_limited(f, basis.covered_band(), "field");
  SupBound out;
  out.sup = lp_norm(f, Exponent::inf());
  for (double v : box_norm_profile(basis, forward_dft(f), Exponent::inf())) out.bound += v;
  out.holds = out.sup <= out.bound * (1.0 + kRelSlack);
  return out;
}

// -------------------------------------------------------------- Peetre

PeetreResult peetre_scan(double s, int R, int d) {
  require(R >= 1, ErrorCode::invalid_argument, "Peetre range must be at least 1");
  require(d >= 1 && d <= kMaxDim, ErrorCode::invalid_argument, "bad dimension");

  std::vector<LatticeIndex> cube;
  const int ry = d >= 2 ? R : 0;
  const int rz = d >= 3 ? R : 0;
  for (int a = -R; a <= R; ++a)
    for (int b = -ry; b <= ry; ++b)
      for (int c = -rz; c <= rz; ++c) {
        LatticeIndex k = LatticeIndex::zero(d);
        k.c = {a, b, c};
        cube.push_back(k);
      }

  // Powers of 1 + |m|^2 for every squared norm that can occur.
  const std::size_t top = static_cast<std::size_t>(d) * 4 * R * R + 1;
  std::vector<double> pow_s(top), pow_abs(top);
  for (std::size_t m = 0; m < top; ++m) {
    pow_s[m] = std::pow(1.0 + static_cast<double>(m), 0.5 * s);
    pow_abs[m] = std::pow(1.0 + static_cast<double>(m), 0.5 * std::abs(s));
  }
  const double c = std::exp2(std::abs(s));

  PeetreResult out;
  for (const auto& k : cube) {
    const double wk = c * pow_s[k.norm_sq()];
    for (const auto& l : cube) {
      std::int64_t sum_sq = 0;
      for (int a = 0; a < d; ++a) {
        const std::int64_t v = k.c[a] + l.c[a];
        sum_sq += v * v;
      }
      const double lhs = pow_s[sum_sq];
      const double rhs = wk * pow_abs[l.norm_sq()];
      out.worst_ratio = std::max(out.worst_ratio, lhs / rhs);
      if (lhs > rhs * (1.0 + kRelSlack)) out.holds = false;
      ++out.pairs;
    }
  }
  return out;
}

bool peetre_check(double s, int R, int d) { return peetre_scan(s, R, d).holds; }

}  // namespace modnls
