#include "modnls/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "modnls/error.hpp"

namespace modnls {

namespace {

double bump_on_cube(std::span<const double> eta) {
  const int d = static_cast<int>(eta.size());
  double dist_sq = 0.0;
  for (double e : eta) {
    const double excess = std::max(0.0, std::abs(e) - 0.5);
    dist_sq += excess * excess;
  }
  const double r = std::sqrt(dist_sq) / (0.5 * std::sqrt(static_cast<double>(d)));
  return bump_profile(r);
}

// Half width of the max-norm box containing supp sigma_0.
double support_half_width(int d) { return 0.5 * (1.0 + std::sqrt(static_cast<double>(d))); }

void check_spec(const DecompositionBasis& basis, const GridSpec& spec) {
  require(basis.spec() == spec, ErrorCode::spec_mismatch, "field grid differs from basis grid");
}

}  // namespace

double bump_profile(double r) noexcept {
  if (!(r < 1.0)) return 0.0;
  return std::exp(1.0 - 1.0 / (1.0 - r * r));
}

double partition_symbol(std::span<const double> eta) {
  const int d = static_cast<int>(eta.size());
  require(d >= 1 && d <= kMaxDim, ErrorCode::invalid_argument, "bad frequency dimension");
  const double num = bump_on_cube(eta);
  if (num == 0.0) return 0.0;

  // Translates phi(eta - m) can be nonzero only for |eta_i - m_i| < 1.37.
  std::array<int, kMaxDim> base{};
  for (int i = 0; i < d; ++i) base[i] = static_cast<int>(std::lround(eta[i]));
  std::array<double, kMaxDim> shifted{};
  double den = 0.0;
  const int span_y = d >= 2 ? 2 : 0;
  const int span_z = d >= 3 ? 2 : 0;
  for (int a = -2; a <= 2; ++a)
    for (int b = -span_y; b <= span_y; ++b)
      for (int c = -span_z; c <= span_z; ++c) {
        const int off[kMaxDim] = {a, b, c};
        for (int i = 0; i < d; ++i) shifted[i] = eta[i] - (base[i] + off[i]);
        den += bump_on_cube(std::span<const double>(shifted.data(), d));
      }
  return num / den;
}

// -------------------------------------------------------------- the basis

double DecompositionBasis::covered_band() const noexcept {
  return cutoff_ - std::sqrt(static_cast<double>(spec_.dim()));
}

bool DecompositionBasis::covers(const LatticeIndex& k) const noexcept {
  return k.dim == spec_.dim() && k.max_abs() <= cutoff_;
}

std::size_t DecompositionBasis::position(const LatticeIndex& k) const {
  require(k.dim == spec_.dim(), ErrorCode::dimension_mismatch, "lattice index dimension mismatch");
  require(k.max_abs() <= cutoff_, ErrorCode::cutoff_exceeded,
          "cutoff exceeded: |k|_inf > " + std::to_string(cutoff_));
  const std::size_t side = 2 * static_cast<std::size_t>(cutoff_) + 1;
  std::size_t s = 0;
  for (int i = 0; i < k.dim; ++i) s = s * side + static_cast<std::size_t>(k.c[i] + cutoff_);
  return s;
}

const SparseSymbol& DecompositionBasis::symbol(const LatticeIndex& k) const {
  return symbols_[position(k)];
}

std::vector<double> DecompositionBasis::dense_symbol(const LatticeIndex& k) const {
  const auto& sym = symbol(k);
  std::vector<double> out(spec_.size(), 0.0);
  for (std::size_t i = 0; i < sym.index.size(); ++i) out[sym.index[i]] = sym.value[i];
  return out;
}

int default_lattice_cutoff(const GridSpec& spec) {
  const int K = static_cast<int>(std::floor(spec.nyquist() - std::sqrt(double(spec.dim()))));
  require(K >= 2, ErrorCode::cutoff_exceeded,
          "grid resolves fewer than two lattice cells per direction");
  return K;
}

DecompositionBasis build_partition(const GridSpec& spec) {
  return build_partition(spec, default_lattice_cutoff(spec));
}

DecompositionBasis build_partition(const GridSpec& spec, int K) {
  const int d = spec.dim();
  require(K >= 2, ErrorCode::invalid_argument, "lattice cutoff must be at least 2");
  const double h = support_half_width(d);
  require(K + h <= spec.nyquist(), ErrorCode::cutoff_exceeded,
          "cutoff exceeded: symbols for |k|_inf = " + std::to_string(K) +
              " reach past the Nyquist frequency");

  // Property (i) needs enough samples inside each unit cell.
  const int per_cell = 2 * static_cast<int>(std::floor(0.5 / spec.dk())) + 1;
  require(per_cell >= 4, ErrorCode::unresolved_cell, "unresolved cell: grid too coarse");

  DecompositionBasis basis(spec);
  basis.cutoff_ = K;
  const int side = 2 * K + 1;
  std::size_t count = 1;
  for (int i = 0; i < d; ++i) count *= static_cast<std::size_t>(side);
  basis.indices_.reserve(count);
  basis.symbols_.resize(count);

  const int n = spec.n();
  const double dk = spec.dk();
  double lower = 1.0;
  for (std::size_t s = 0; s < count; ++s) {
    LatticeIndex k = LatticeIndex::zero(d);
    std::size_t rem = s;
    for (int i = d - 1; i >= 0; --i) {
      k.c[i] = static_cast<int>(rem % side) - K;
      rem /= side;
    }
    basis.indices_.push_back(k);

    std::array<int, kMaxDim> lo{}, hi{};
    for (int i = 0; i < d; ++i) {
      lo[i] = static_cast<int>(std::ceil((k.c[i] - h) / dk));
      hi[i] = static_cast<int>(std::floor((k.c[i] + h) / dk));
    }
    auto& sym = basis.symbols_[s];
    std::array<int, kMaxDim> m = lo;
    std::array<double, kMaxDim> eta{};
    while (true) {
      std::array<int, kMaxDim> natural{};
      bool in_cell = true;
      for (int i = 0; i < d; ++i) {
        eta[i] = dk * m[i] - k.c[i];
        natural[i] = ((m[i] % n) + n) % n;
        in_cell = in_cell && std::abs(eta[i]) <= 0.5;
      }
      const double v = partition_symbol(std::span<const double>(eta.data(), d));
      if (v > 0.0) {
        sym.index.push_back(static_cast<std::uint32_t>(spec.flatten(natural)));
        sym.value.push_back(v);
      }
      if (in_cell) lower = std::min(lower, v);
      int axis = d - 1;
      while (axis >= 0 && m[axis] == hi[axis]) {
        m[axis] = lo[axis];
        --axis;
      }
      if (axis < 0) break;
      ++m[axis];
    }
  }
  require(lower > 0.0, ErrorCode::unresolved_cell, "unresolved cell: sigma_k vanishes on Q_k");
  basis.lower_bound_ = lower;

  // Derivative bounds from central differences on a fine sampling of supp sigma_0.
  const double step = d == 1 ? 1.0 / 256 : (d == 2 ? 1.0 / 48 : 1.0 / 8);
  const double delta = 1e-4;
  const int half = static_cast<int>(std::ceil(h / step));
  std::array<double, 3> bounds{};
  std::array<int, kMaxDim> g{};
  for (int i = 0; i < d; ++i) g[i] = -half;
  std::array<double, kMaxDim> pt{};
  while (true) {
    for (int i = 0; i < d; ++i) pt[i] = g[i] * step;
    std::span<const double> view(pt.data(), d);
    const double v0 = partition_symbol(view);
    bounds[0] = std::max(bounds[0], std::abs(v0));
    for (int i = 0; i < d; ++i) {
      auto shifted = pt;
      shifted[i] += delta;
      const double vp = partition_symbol(std::span<const double>(shifted.data(), d));
      shifted[i] -= 2 * delta;
      const double vm = partition_symbol(std::span<const double>(shifted.data(), d));
      bounds[1] = std::max(bounds[1], std::abs(vp - vm) / (2 * delta));
      bounds[2] = std::max(bounds[2], std::abs(vp - 2 * v0 + vm) / (delta * delta));
    }
    int axis = d - 1;
    while (axis >= 0 && g[axis] == half) {
      g[axis] = -half;
      --axis;
    }
    if (axis < 0) break;
    ++g[axis];
  }
  basis.derivative_bounds_ = bounds;
  return basis;
}

// ------------------------------------------------------------- operators

GridField box_from_spectrum(const DecompositionBasis& basis, const LatticeIndex& k,
                            std::span<const cplx> spectrum) {
  require(spectrum.size() == basis.spec().size(), ErrorCode::spec_mismatch,
          "spectrum size differs from basis grid");
  const auto& sym = basis.symbol(k);
  std::vector<cplx> buf(spectrum.size());
  for (std::size_t i = 0; i < sym.index.size(); ++i)
    buf[sym.index[i]] = sym.value[i] * spectrum[sym.index[i]];
  return inverse_dft(basis.spec(), std::move(buf));
}

GridField box_operator(const DecompositionBasis& basis, const LatticeIndex& k, const GridField& f) {
  check_spec(basis, f.spec());
  return box_from_spectrum(basis, k, forward_dft(f));
}

double box_l2_norm_sq(const DecompositionBasis& basis, const LatticeIndex& k,
                      std::span<const cplx> spectrum) {
  const auto& sym = basis.symbol(k);
  double acc = 0.0;
  for (std::size_t i = 0; i < sym.index.size(); ++i)
    acc += sym.value[i] * sym.value[i] * std::norm(spectrum[sym.index[i]]);
  const auto& spec = basis.spec();
  return acc * spec.cell_volume() / static_cast<double>(spec.size());
}

void require_band_limited(const GridField& f, double band, const char* what) {
  const double excess = spectral_excess(f, band);
  if (excess > kSpectralTolerance)
    fail(ErrorCode::spectral_overflow,
         std::string("spectral overflow: ") + what + " has relative weight " +
             std::to_string(excess) + " outside |xi|_inf <= " + std::to_string(band));
}

// ------------------------------------------------------------ multipliers

MultiplierSymbol::MultiplierSymbol(const GridSpec& s, std::vector<cplx> v, double index)
    : spec(s), values(std::move(v)), sobolev_index(index) {
  require(values.size() == spec.size(), ErrorCode::invalid_argument,
          "symbol size differs from grid size");
  for (const auto& x : values)
    require(std::isfinite(x.real()) && std::isfinite(x.imag()), ErrorCode::invalid_argument,
            "symbol contains non-finite values");
}

MultiplierSymbol MultiplierSymbol::from_partition(const DecompositionBasis& basis,
                                                  const LatticeIndex& k, double index) {
  const auto dense = basis.dense_symbol(k);
  return MultiplierSymbol(basis.spec(), std::vector<cplx>(dense.begin(), dense.end()), index);
}

GridField apply_multiplier(const MultiplierSymbol& sym, const GridField& f) {
  require(sym.spec == f.spec(), ErrorCode::spec_mismatch, "symbol grid differs from field grid");
  auto spectrum = forward_dft(f);
  for (std::size_t i = 0; i < spectrum.size(); ++i) spectrum[i] *= sym.values[i];
  return inverse_dft(f.spec(), std::move(spectrum));
}

namespace {

// <z>^2 at signed grid position i (natural order).
double position_bracket_sq(const GridSpec& spec, std::size_t flat) {
  const auto idx = spec.unflatten(flat);
  double acc = 1.0;
  for (int a = 0; a < spec.dim(); ++a) {
    const double z = spec.dx() * spec.signed_mode(idx[a]);
    acc += z * z;
  }
  return acc;
}

}  // namespace

double sobolev_norm(const MultiplierSymbol& sym) {
  const auto& spec = sym.spec;
  std::vector<cplx> hat(sym.values);
  dft_inplace(spec, hat, false);
  const int d = spec.dim();
  const double scale = std::pow(spec.dk(), d) / std::pow(2.0 * std::numbers::pi, 0.5 * d);
  double acc = 0.0;
  for (std::size_t i = 0; i < hat.size(); ++i) {
    const double w = sym.sobolev_index == 0.0
                         ? 1.0
                         : std::pow(position_bracket_sq(spec, i), sym.sobolev_index);
    acc += w * std::norm(scale * hat[i]);
  }
  return std::sqrt(acc * spec.cell_volume());
}

GridField multiplier_kernel(const GridSpec& spec, std::span<const cplx> symbol) {
  require(symbol.size() == spec.size(), ErrorCode::spec_mismatch,
          "symbol size differs from grid size");
  std::vector<cplx> buf(symbol.begin(), symbol.end());
  dft_inplace(spec, buf, true);
  const double scale = static_cast<double>(spec.size()) / std::pow(spec.length(), spec.dim());
  for (auto& v : buf) v *= scale;
  return GridField(spec, std::move(buf));
}

double bernstein_constant(const GridSpec& spec, double s) {
  double acc = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) acc += std::pow(position_bracket_sq(spec, i), -s);
  return std::sqrt(acc * spec.cell_volume()) / std::pow(2.0 * std::numbers::pi, 0.5 * spec.dim());
}

double bernstein_constant_continuum(int d, double s) {
  require(s > 0.5 * d, ErrorCode::invalid_argument, "Bernstein bound needs s > d/2");
  const double integral =
      std::pow(std::numbers::pi, 0.5 * d) * std::tgamma(s - 0.5 * d) / std::tgamma(s);
  return std::sqrt(integral) / std::pow(2.0 * std::numbers::pi, 0.5 * d);
}

// ------------------------------------------------------ product identity

std::vector<LatticeIndex> product_offsets(int d) {
  require(d >= 1 && d <= kMaxDim, ErrorCode::invalid_argument, "bad dimension");
  const int r = static_cast<int>(std::floor(3.0 * std::sqrt(static_cast<double>(d))));
  const std::int64_t r2 = 9 * static_cast<std::int64_t>(d);
  std::vector<LatticeIndex> out;
  const int ry = d >= 2 ? r : 0;
  const int rz = d >= 3 ? r : 0;
  for (int a = -r; a <= r; ++a)
    for (int b = -ry; b <= ry; ++b)
      for (int c = -rz; c <= rz; ++c) {
        LatticeIndex m = LatticeIndex::zero(d);
        m.c = {a, b, c};
        if (m.norm_sq() <= r2) out.push_back(m);
      }
  return out;
}

double ProductDecomposer::product_band(const DecompositionBasis& basis) {
  return std::min(0.5 * basis.spec().nyquist(), 0.5 * basis.covered_band());
}

ProductDecomposer::ProductDecomposer(const DecompositionBasis& basis, const GridField& f,
                                     const GridField& g)
    : basis_(basis), offsets_(product_offsets(basis.spec().dim())) {
  check_spec(basis, f.spec());
  check_spec(basis, g.spec());
  const double band = product_band(basis);
  require_band_limited(f, band, "first factor");
  require_band_limited(g, band, "second factor");

  const auto f_hat = forward_dft(f);
  const auto g_hat = forward_dft(g);
  f_boxes_.reserve(basis.indices().size());
  g_boxes_.reserve(basis.indices().size());
  for (const auto& k : basis.indices()) {
    f_boxes_.push_back(box_from_spectrum(basis, k, f_hat));
    g_boxes_.push_back(box_from_spectrum(basis, k, g_hat));
  }
  const auto fg = multiply(f, g);
  fg_sup_ = lp_norm(fg, Exponent::inf());
  fg_spectrum_ = forward_dft(fg);
}

ProductCheck ProductDecomposer::check(const LatticeIndex& k) const {
  require(basis_.covers(k), ErrorCode::cutoff_exceeded, "cutoff exceeded");
  const auto& spec = basis_.spec();
  const auto direct = box_from_spectrum(basis_, k, fg_spectrum_);

  const auto indices = basis_.indices();
  std::vector<cplx> sum(spec.size());
  for (const auto& m : offsets_) {
    for (std::size_t li = 0; li < indices.size(); ++li) {
      const LatticeIndex j = k + m - indices[li];
      if (!basis_.covers(j)) continue;
      const auto fl = f_boxes_[li].samples();
      const auto gj = g_boxes_[basis_.position(j)].samples();
      for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += fl[i] * gj[i];
    }
  }
  dft_inplace(spec, sum, false);
  const auto decomposed = box_from_spectrum(basis_, k, sum);

  double err = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i)
    err = std::max(err, std::abs(direct[i] - decomposed[i]));

  ProductCheck out;
  out.discrepancy = fg_sup_ > 0.0 ? err / fg_sup_ : err;
  out.offsets = offsets_.size();
  out.offset_bound = std::pow(6.0 * std::sqrt(static_cast<double>(spec.dim())) + 1.0, spec.dim());
  return out;
}

ProductCheck product_decomposition_check(const DecompositionBasis& basis, const GridField& f,
                                         const GridField& g, const LatticeIndex& k) {
  return ProductDecomposer(basis, f, g).check(k);
}

}  // namespace modnls
