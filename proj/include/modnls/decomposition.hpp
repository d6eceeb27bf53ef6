#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "modnls/grid.hpp"
#include "modnls/lattice_seq.hpp"

namespace modnls {

/// Bump profile used for the partition: exp(1 - 1/(1 - r^2)) for r < 1, else 0.
double bump_profile(double r) noexcept;

/// sigma_0 at a frequency point eta (length d): phi(eta) / sum_m phi(eta - m),
/// where phi equals 1 on the unit cube Q_0 and vanishes outside B_{sqrt d}.
double partition_symbol(std::span<const double> eta);

/// A symbol restricted to the grid frequencies where it is nonzero.
struct SparseSymbol {
  std::vector<std::uint32_t> index;  // flat spectrum index, natural FFT order
  std::vector<double> value;
};

/// Frequency-uniform partition of unity {sigma_k : |k|_inf <= K} on a grid.
class DecompositionBasis {
 public:
  const GridSpec& spec() const noexcept { return spec_; }
  int lattice_cutoff() const noexcept { return cutoff_; }
  int bump_version() const noexcept { return 1; }

  /// Achieved min of sigma_k over grid frequencies in Q_k.
  double lower_bound_c() const noexcept { return lower_bound_; }
  /// Sup bounds of sigma_0 and its first and second partial derivatives.
  const std::array<double, 3>& derivative_bounds() const noexcept { return derivative_bounds_; }
  /// Largest max-norm radius on which sum_k sigma_k == 1 is guaranteed: K - sqrt d.
  double covered_band() const noexcept;

  /// Covered lattice indices in lexicographic order.
  std::span<const LatticeIndex> indices() const noexcept { return indices_; }
  bool covers(const LatticeIndex& k) const noexcept;
  /// Position of k in indices(); throws cutoff_exceeded outside the cube.
  std::size_t position(const LatticeIndex& k) const;
  const SparseSymbol& symbol(const LatticeIndex& k) const;
  /// Dense copy of sigma_k over the full spectrum.
  std::vector<double> dense_symbol(const LatticeIndex& k) const;

  friend DecompositionBasis build_partition(const GridSpec& spec, int K);

 private:
  explicit DecompositionBasis(const GridSpec& spec) : spec_(spec) {}

  GridSpec spec_;
  int cutoff_ = 0;
  double lower_bound_ = 0.0;
  std::array<double, 3> derivative_bounds_{};
  std::vector<LatticeIndex> indices_;
  std::vector<SparseSymbol> symbols_;
};

/// floor(n pi / L - sqrt d); throws cutoff_exceeded when below 2.
int default_lattice_cutoff(const GridSpec& spec);

/// Builds and certifies the partition. Throws unresolved_cell when the grid
/// cannot certify the lower bound on Q_0, cutoff_exceeded when some symbol
/// would reach past the Nyquist frequency.
DecompositionBasis build_partition(const GridSpec& spec, int K);
DecompositionBasis build_partition(const GridSpec& spec);

/// box_k f = F^-1 sigma_k F f.
GridField box_operator(const DecompositionBasis& basis, const LatticeIndex& k, const GridField& f);
/// Same, starting from an already computed forward DFT of f.
GridField box_from_spectrum(const DecompositionBasis& basis, const LatticeIndex& k,
                            std::span<const cplx> spectrum);

/// Squared grid L^2 norm of box_k f computed in frequency space.
double box_l2_norm_sq(const DecompositionBasis& basis, const LatticeIndex& k,
                      std::span<const cplx> spectrum);

/// Throws spectral_overflow when f carries relative L^2 weight above
/// kSpectralTolerance outside |xi|_inf <= band.
void require_band_limited(const GridField& f, double band, const char* what);

struct MultiplierSymbol {
  GridSpec spec;
  std::vector<cplx> values;  // natural FFT order
  double sobolev_index = 0.0;

  MultiplierSymbol(const GridSpec& s, std::vector<cplx> v, double index);
  static MultiplierSymbol from_partition(const DecompositionBasis& basis, const LatticeIndex& k,
                                         double index);
};

GridField apply_multiplier(const MultiplierSymbol& sym, const GridField& f);

/// Discrete H^s norm of the symbol: (sum_z <z>^{2s} |sigma^(z)|^2 dx^d)^{1/2}
/// with the unitary Fourier transform evaluated by a DFT over the frequency grid.
double sobolev_norm(const MultiplierSymbol& sym);

/// Convolution kernel K(z) = L^{-d} sum_j sigma_j e^{i xi_j z} on the signed
/// grid positions, so that T_sigma f = K * f under grid quadrature.
GridField multiplier_kernel(const GridSpec& spec, std::span<const cplx> symbol);

/// (2 pi)^{-d/2} (sum_z <z>^{-2s} dx^d)^{1/2}: with Cauchy-Schwarz this bounds
/// the grid kernel L^1 norm, hence ||T_sigma||_{L^p -> L^p} <= this * ||sigma||_{H^s}.
double bernstein_constant(const GridSpec& spec, double s);
/// (2 pi)^{-d/2} (pi^{d/2} Gamma(s - d/2) / Gamma(s))^{1/2}, the continuum value.
double bernstein_constant_continuum(int d, double s);

/// {m in Z^d : |m| <= 3 sqrt d}.
std::vector<LatticeIndex> product_offsets(int d);

struct ProductCheck {
  double discrepancy = 0.0;  // ||direct - decomposed||_inf / ||fg||_inf
  std::size_t offsets = 0;   // #M
  double offset_bound = 0.0; // (6 sqrt d + 1)^d
};

/// Compares box_k(fg) with box_k sum_{m in M} sum_l (box_l f)(box_{k+m-l} g).
/// f and g must be band-limited to product_band(basis).
class ProductDecomposer {
 public:
  ProductDecomposer(const DecompositionBasis& basis, const GridField& f, const GridField& g);

  /// Max-norm band that keeps products alias-free and covered.
  static double product_band(const DecompositionBasis& basis);

  ProductCheck check(const LatticeIndex& k) const;

 private:
  const DecompositionBasis& basis_;
  std::vector<GridField> f_boxes_;
  std::vector<GridField> g_boxes_;
  std::vector<cplx> fg_spectrum_;
  double fg_sup_ = 0.0;
  std::vector<LatticeIndex> offsets_;
};

ProductCheck product_decomposition_check(const DecompositionBasis& basis, const GridField& f,
                                         const GridField& g, const LatticeIndex& k);

}  // namespace modnls
