#include "modnls/grid.hpp"

#include <fftw3.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <istream>
#include <map>
#include <mutex>
#include <numbers>
#include <ostream>

#include "modnls/error.hpp"

namespace modnls {

static_assert(std::endian::native == std::endian::little,
              "grid field binary format assumes a little-endian host");

namespace {

// FFTW plans are created once per (d, n, direction) and executed through the
// new-array interface, which is safe to call concurrently.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int dim, int n, bool inverse) {
    std::lock_guard lock(mutex_);
    const auto key = std::make_tuple(dim, n, inverse);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::size_t total = 1;
    for (int i = 0; i < dim; ++i) total *= static_cast<std::size_t>(n);
    auto* buf = fftw_alloc_complex(total);
    int dims[kMaxDim] = {n, n, n};
    fftw_plan plan = fftw_plan_dft(dim, dims, buf, buf, inverse ? FFTW_BACKWARD : FFTW_FORWARD,
                                   FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    require(plan != nullptr, ErrorCode::invalid_argument, "FFTW could not create a plan");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mutex_;
  std::map<std::tuple<int, int, bool>, fftw_plan> plans_;
};

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

// ---------------------------------------------------------------- GridSpec

GridSpec::GridSpec(int dim, double half_length, int points_per_axis)
    : dim_(dim), half_(half_length), n_(points_per_axis), size_(1) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::invalid_argument, "grid dimension must be 1..3");
  require(is_power_of_two(points_per_axis) && points_per_axis >= 2, ErrorCode::invalid_argument,
          "points per axis must be a power of two");
  require(std::isfinite(half_length) && half_length > 0.0, ErrorCode::invalid_argument,
          "half length must be positive");
  // Each unit frequency cell must carry at least four samples per axis.
  require(length() >= 8.0 * std::numbers::pi * (1.0 - 1e-12), ErrorCode::invalid_argument,
          "domain too short to resolve unit frequency cells (need L >= 8 pi)");
  for (int i = 0; i < dim; ++i) size_ *= static_cast<std::size_t>(n_);
}

double GridSpec::cell_volume() const noexcept { return std::pow(dx(), dim_); }
double GridSpec::dk() const noexcept { return 2.0 * std::numbers::pi / length(); }
double GridSpec::nyquist() const noexcept { return std::numbers::pi * n_ / length(); }

std::array<int, kMaxDim> GridSpec::unflatten(std::size_t flat) const noexcept {
  std::array<int, kMaxDim> idx{};
  for (int a = dim_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

std::size_t GridSpec::flatten(const std::array<int, kMaxDim>& idx) const noexcept {
  std::size_t flat = 0;
  for (int a = 0; a < dim_; ++a) flat = flat * n_ + static_cast<std::size_t>(idx[a]);
  return flat;
}

// --------------------------------------------------------------- GridField

GridField::GridField(const GridSpec& spec) : spec_(spec), samples_(spec.size()) {}

GridField::GridField(const GridSpec& spec, std::vector<cplx> samples)
    : spec_(spec), samples_(std::move(samples)) {
  require(samples_.size() == spec_.size(), ErrorCode::invalid_argument,
          "sample count differs from n^d");
  for (const auto& v : samples_)
    require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorCode::invalid_argument,
            "grid field contains non-finite samples");
}

GridField GridField::from_function(const GridSpec& spec,
                                   const std::function<cplx(std::span<const double>)>& fn) {
  GridField f(spec);
  std::array<double, kMaxDim> x{};
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto idx = spec.unflatten(i);
    for (int a = 0; a < spec.dim(); ++a) x[a] = spec.coord(idx[a]);
    f.samples_[i] = fn(std::span<const double>(x.data(), spec.dim()));
  }
  return GridField(spec, std::move(f.samples_));
}

GridField GridField::conj() const {
  GridField out(*this);
  for (auto& v : out.samples_) v = std::conj(v);
  return out;
}

GridField& GridField::operator+=(const GridField& other) {
  require(spec_ == other.spec_, ErrorCode::spec_mismatch, "grid spec mismatch");
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] += other.samples_[i];
  return *this;
}

GridField& GridField::operator-=(const GridField& other) {
  require(spec_ == other.spec_, ErrorCode::spec_mismatch, "grid spec mismatch");
  for (std::size_t i = 0; i < samples_.size(); ++i) samples_[i] -= other.samples_[i];
  return *this;
}

GridField& GridField::operator*=(cplx factor) {
  for (auto& v : samples_) v *= factor;
  return *this;
}

GridField multiply(const GridField& a, const GridField& b) {
  require(a.spec_ == b.spec_, ErrorCode::spec_mismatch, "grid spec mismatch");
  GridField out(a);
  for (std::size_t i = 0; i < out.samples_.size(); ++i) out.samples_[i] *= b.samples_[i];
  return out;
}

// --------------------------------------------------------------------- DFT

void dft_inplace(const GridSpec& spec, std::span<cplx> data, bool inverse) {
  require(data.size() == spec.size(), ErrorCode::invalid_argument, "DFT buffer size mismatch");
  auto plan = PlanCache::instance().get(spec.dim(), spec.n(), inverse);
  auto* ptr = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, ptr, ptr);
  if (inverse) {
    const double scale = 1.0 / static_cast<double>(spec.size());
    for (auto& v : data) v *= scale;
  }
}

std::vector<cplx> forward_dft(const GridField& f) {
  std::vector<cplx> out(f.samples().begin(), f.samples().end());
  dft_inplace(f.spec(), out, false);
  return out;
}

GridField inverse_dft(const GridSpec& spec, std::vector<cplx> spectrum) {
  dft_inplace(spec, spectrum, true);
  return GridField(spec, std::move(spectrum));
}

std::vector<double> frequency_sq(const GridSpec& spec) {
  std::vector<double> out(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto idx = spec.unflatten(i);
    double acc = 0.0;
    for (int a = 0; a < spec.dim(); ++a) acc += spec.freq(idx[a]) * spec.freq(idx[a]);
    out[i] = acc;
  }
  return out;
}

std::vector<double> frequency_linf(const GridSpec& spec) {
  std::vector<double> out(spec.size());
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto idx = spec.unflatten(i);
    double m = 0.0;
    for (int a = 0; a < spec.dim(); ++a) m = std::max(m, std::abs(spec.freq(idx[a])));
    out[i] = m;
  }
  return out;
}

double lp_norm(std::span<const cplx> samples, const GridSpec& spec, Exponent p) {
  if (p.is_inf()) {
    double m = 0.0;
    for (const auto& v : samples) m = std::max(m, std::abs(v));
    return m;
  }
  const double pv = p.value();
  double acc = 0.0;
  if (pv == 2.0) {
    for (const auto& v : samples) acc += std::norm(v);
    return std::sqrt(acc * spec.cell_volume());
  }
  if (pv == 1.0) {
    for (const auto& v : samples) acc += std::abs(v);
    return acc * spec.cell_volume();
  }
  for (const auto& v : samples) acc += std::pow(std::abs(v), pv);
  return std::pow(acc * spec.cell_volume(), 1.0 / pv);
}

double lp_norm(const GridField& f, Exponent p) { return lp_norm(f.samples(), f.spec(), p); }

double spectral_excess(const GridSpec& spec, std::span<const cplx> spectrum, double band) {
  const auto linf = frequency_linf(spec);
  double total = 0.0;
  double outside = 0.0;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    const double e = std::norm(spectrum[i]);
    total += e;
    if (linf[i] > band) outside += e;
  }
  return total > 0.0 ? std::sqrt(outside / total) : 0.0;
}

double spectral_excess(const GridField& f, double band) {
  return spectral_excess(f.spec(), forward_dft(f), band);
}

// ---------------------------------------------------------------------- IO

void write_grid_field(std::ostream& os, const GridField& f) {
  const double header[3] = {static_cast<double>(f.spec().dim()), static_cast<double>(f.spec().n()),
                            f.spec().length()};
  os.write(reinterpret_cast<const char*>(header), sizeof header);
  os.put(static_cast<char>(kGridFieldVersion));
  os.write(reinterpret_cast<const char*>(f.samples().data()),
           static_cast<std::streamsize>(f.samples().size() * sizeof(cplx)));
  require(static_cast<bool>(os), ErrorCode::io, "failed to write grid field");
}

GridField read_grid_field(std::istream& is) {
  double header[3] = {};
  is.read(reinterpret_cast<char*>(header), sizeof header);
  const int version = is.get();
  require(static_cast<bool>(is), ErrorCode::io, "grid field: truncated header");
  require(version == kGridFieldVersion, ErrorCode::io,
          "grid field: unsupported version " + std::to_string(version));
  const int dim = static_cast<int>(header[0]);
  const int n = static_cast<int>(header[1]);
  require(header[0] == dim && header[1] == n, ErrorCode::io, "grid field: non-integral header");
  const GridSpec spec(dim, 0.5 * header[2], n);
  std::vector<cplx> samples(spec.size());
  is.read(reinterpret_cast<char*>(samples.data()),
          static_cast<std::streamsize>(samples.size() * sizeof(cplx)));
  require(static_cast<bool>(is), ErrorCode::io, "grid field: truncated sample block");
  return GridField(spec, std::move(samples));
}

}  // namespace modnls
