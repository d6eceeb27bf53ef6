#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "modnls/lattice_seq.hpp"

namespace modnls {

/// Uniform periodic grid on [-L/2, L/2)^d with n points per axis.
///
/// Frequencies follow the angular convention: mode j (signed, -n/2 <= j < n/2)
/// sits at xi = 2 pi j / L. Storage of spectra is in natural FFT order.
class GridSpec {
 public:
  GridSpec(int dim, double half_length, int points_per_axis);

  int dim() const noexcept { return dim_; }
  int n() const noexcept { return n_; }
  double half_length() const noexcept { return half_; }
  double length() const noexcept { return 2.0 * half_; }
  double dx() const noexcept { return length() / n_; }
  double cell_volume() const noexcept;
  /// Spacing of the frequency grid, 2 pi / L.
  double dk() const noexcept;
  /// pi n / L
  double nyquist() const noexcept;
  std::size_t size() const noexcept { return size_; }

  double coord(int i) const noexcept { return -half_ + i * dx(); }
  int signed_mode(int j) const noexcept { return j < n_ / 2 ? j : j - n_; }
  double freq(int j) const noexcept { return dk() * signed_mode(j); }

  /// Per-axis indices of a flat row-major index (axis 0 slowest).
  std::array<int, kMaxDim> unflatten(std::size_t flat) const noexcept;
  std::size_t flatten(const std::array<int, kMaxDim>& idx) const noexcept;

  friend bool operator==(const GridSpec& a, const GridSpec& b) noexcept {
    return a.dim_ == b.dim_ && a.n_ == b.n_ && a.half_ == b.half_;
  }

 private:
  int dim_;
  double half_;
  int n_;
  std::size_t size_;
};

/// Complex samples on a GridSpec, row-major.
class GridField {
 public:
  explicit GridField(const GridSpec& spec);
  GridField(const GridSpec& spec, std::vector<cplx> samples);

  /// Samples fn at every grid point; fn receives the d coordinates.
  static GridField from_function(const GridSpec& spec,
                                 const std::function<cplx(std::span<const double>)>& fn);

  const GridSpec& spec() const noexcept { return spec_; }
  std::span<const cplx> samples() const noexcept { return samples_; }
  std::span<cplx> samples() noexcept { return samples_; }
  cplx operator[](std::size_t i) const noexcept { return samples_[i]; }
  cplx& operator[](std::size_t i) noexcept { return samples_[i]; }

  GridField conj() const;
  GridField& operator+=(const GridField& other);
  GridField& operator-=(const GridField& other);
  GridField& operator*=(cplx factor);
  friend GridField operator+(GridField a, const GridField& b) { return a += b; }
  friend GridField operator-(GridField a, const GridField& b) { return a -= b; }
  friend GridField operator*(cplx f, GridField a) { return a *= f; }
  /// Pointwise product.
  friend GridField multiply(const GridField& a, const GridField& b);

 private:
  GridSpec spec_;
  std::vector<cplx> samples_;
};

// DFT helpers. forward_dft is unnormalised, inverse_dft divides by n^d, so
// inverse_dft(forward_dft(f)) == f up to rounding.
std::vector<cplx> forward_dft(const GridField& f);
GridField inverse_dft(const GridSpec& spec, std::vector<cplx> spectrum);
void dft_inplace(const GridSpec& spec, std::span<cplx> data, bool inverse);

/// |xi|^2 for every entry of a spectrum in natural order.
std::vector<double> frequency_sq(const GridSpec& spec);
/// |xi|_inf for every entry of a spectrum in natural order.
std::vector<double> frequency_linf(const GridSpec& spec);

/// Rectangle-rule L^p norm, cell volume dx^d; p = inf takes the sample max.
double lp_norm(std::span<const cplx> samples, const GridSpec& spec, Exponent p);
double lp_norm(const GridField& f, Exponent p);

/// Relative L^2 weight of the spectrum outside |xi|_inf <= band (0 for f = 0).
double spectral_excess(const GridSpec& spec, std::span<const cplx> spectrum, double band);
double spectral_excess(const GridField& f, double band);

/// Default overflow tolerance applied to spectral_excess.
inline constexpr double kSpectralTolerance = 1e-9;

/// Binary layout: d, n, L as little-endian IEEE-754 doubles, one version byte,
/// then n^d (re, im) double pairs in row-major order.
inline constexpr std::uint8_t kGridFieldVersion = 1;
void write_grid_field(std::ostream& os, const GridField& f);
GridField read_grid_field(std::istream& is);

}  // namespace modnls
