#include "modnls/corpus.hpp"

#include <cmath>
#include <random>

#include "modnls/error.hpp"

namespace modnls {

namespace {

std::mt19937_64 member_engine(std::uint64_t seed, std::uint64_t member, std::uint32_t kind) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(member), static_cast<std::uint32_t>(member >> 32),
                    kind};
  return std::mt19937_64(seq);
}

// Signed grid modes m with |dk m| <= band, per axis.
int band_modes(const GridSpec& spec, double band) {
  const int m = static_cast<int>(std::floor(band / spec.dk() + 1e-12));
  return std::min(m, spec.n() / 2 - 1);
}

GridField gaussian_member(const GridSpec& spec, std::mt19937_64& rng, double band) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int d = spec.dim();
  const double width = 1.0 + 0.5 * unit(rng);
  // exp(-w^2 xi^2 / 4) drops below 1e-9 relative L^2 weight 9.5 / w past its centre.
  const double reach = 9.5 / width;
  const double center_span = std::min(2.0, spec.half_length() / 4.0);
  std::array<double, kMaxDim> center{}, mod{};
  for (int a = 0; a < d; ++a) {
    center[a] = center_span * (2.0 * unit(rng) - 1.0);
    const double room = std::max(0.0, band - reach);
    const double raw = room * (2.0 * unit(rng) - 1.0);
    mod[a] = spec.dk() * std::round(raw / spec.dk());
  }
  return GridField::from_function(spec, [&](std::span<const double> x) {
    double r2 = 0.0;
    double phase = 0.0;
    for (int a = 0; a < d; ++a) {
      r2 += (x[a] - center[a]) * (x[a] - center[a]);
      phase += mod[a] * x[a];
    }
    return std::exp(-r2 / (width * width)) * std::polar(1.0, phase);
  });
}

GridField plane_wave_member(const GridSpec& spec, std::mt19937_64& rng, double band) {
  const int d = spec.dim();
  const int top = band_modes(spec, band);
  std::uniform_int_distribution<int> pick(-top, top);
  std::array<double, kMaxDim> xi{};
  for (int a = 0; a < d; ++a) xi[a] = spec.dk() * pick(rng);
  return GridField::from_function(spec, [&](std::span<const double> x) {
    double phase = 0.0;
    for (int a = 0; a < d; ++a) phase += xi[a] * (x[a] + spec.half_length());
    return std::polar(1.0, phase);
  });
}

GridField noise_member(const GridSpec& spec, std::mt19937_64& rng, double band) {
  const int d = spec.dim();
  const int top = band_modes(spec, band);
  std::normal_distribution<double> normal;
  std::vector<cplx> spectrum(spec.size());
  std::array<int, kMaxDim> m{};
  for (int a = 0; a < d; ++a) m[a] = -top;
  double energy = 0.0;
  while (true) {
    std::array<int, kMaxDim> natural{};
    for (int a = 0; a < d; ++a) natural[a] = (m[a] + spec.n()) % spec.n();
    const cplx c(normal(rng), normal(rng));
    spectrum[spec.flatten(natural)] = c;
    energy += std::norm(c);
    int axis = d - 1;
    while (axis >= 0 && m[axis] == top) {
      m[axis] = -top;
      --axis;
    }
    if (axis < 0) break;
    ++m[axis];
  }
  // Unit L^2 norm: ||f||^2 = dx^d / N sum |F|^2 with F the unnormalised DFT.
  // Coefficients c_m multiply e^{i xi_m (x + L/2)}, so F = N c.
  const double l2 = std::sqrt(energy * std::pow(spec.length(), d));
  const double n_total = static_cast<double>(spec.size());
  for (auto& v : spectrum) v *= n_total / l2;
  return inverse_dft(spec, std::move(spectrum));
}

}  // namespace

CorpusKind parse_corpus_kind(std::string_view name) {
  if (name == "gaussian") return CorpusKind::gaussian;
  if (name == "plane-wave") return CorpusKind::plane_wave;
  if (name == "band-limited-noise") return CorpusKind::band_limited_noise;
  if (name == "decaying-lattice") return CorpusKind::decaying_lattice;
  fail(ErrorCode::invalid_argument, "unknown corpus kind '" + std::string(name) + "'");
}

const char* corpus_kind_name(CorpusKind kind) noexcept {
  switch (kind) {
    case CorpusKind::gaussian: return "gaussian";
    case CorpusKind::plane_wave: return "plane-wave";
    case CorpusKind::band_limited_noise: return "band-limited-noise";
    case CorpusKind::decaying_lattice: return "decaying-lattice";
  }
  return "unknown";
}

GridField unit_gaussian(const GridSpec& spec) {
  return GridField::from_function(spec, [](std::span<const double> x) {
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return cplx(std::exp(-r2));
  });
}

std::vector<GridField> field_corpus(CorpusKind kind, const GridSpec& spec, std::size_t count,
                                    std::uint64_t seed, double band) {
  require(count >= 1, ErrorCode::invalid_argument, "corpus count must be at least 1");
  require(kind != CorpusKind::decaying_lattice, ErrorCode::invalid_argument,
          "decaying-lattice is a sequence corpus");
  require(band > 0.0, ErrorCode::invalid_argument, "corpus band must be positive");
  std::vector<GridField> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    auto rng = member_engine(seed, i, static_cast<std::uint32_t>(kind));
    switch (kind) {
      case CorpusKind::gaussian:
        out.push_back(i == 0 ? unit_gaussian(spec) : gaussian_member(spec, rng, band));
        break;
      case CorpusKind::plane_wave: out.push_back(plane_wave_member(spec, rng, band)); break;
      default: out.push_back(noise_member(spec, rng, band)); break;
    }
  }
  return out;
}

namespace {

std::vector<LatticeIndex> lattice_ball(int d, int radius) {
  std::vector<LatticeIndex> ball;
  const std::int64_t r2 = static_cast<std::int64_t>(radius) * radius;
  const int ry = d >= 2 ? radius : 0;
  const int rz = d >= 3 ? radius : 0;
  for (int a = -radius; a <= radius; ++a)
    for (int b = -ry; b <= ry; ++b)
      for (int c = -rz; c <= rz; ++c) {
        LatticeIndex k = LatticeIndex::zero(d);
        k.c = {a, b, c};
        if (k.norm_sq() <= r2) ball.push_back(k);
      }
  return ball;
}

LatticeSeq ball_member(int d, std::span<const LatticeIndex> ball, std::uint64_t seed,
                       std::size_t member, double s) {
  auto rng = member_engine(seed, member, 0x1a77u);
  std::normal_distribution<double> normal;
  const double tails[3] = {0.0, s, s + d};
  const double t = tails[member % 3];
  std::vector<LatticeSeq::Entry> entries;
  entries.reserve(ball.size());
  for (const auto& k : ball) {
    const cplx z(normal(rng), normal(rng));
    entries.emplace_back(k, t == 0.0 ? z : z * std::pow(japanese_bracket(k), -t));
  }
  return LatticeSeq(d, std::move(entries));
}

void check_lattice_shape(int d, int radius) {
  require(d >= 1 && d <= kMaxDim && radius >= 0, ErrorCode::invalid_argument,
          "bad lattice corpus shape");
}

}  // namespace

std::vector<LatticeSeq> lattice_corpus(int d, int radius, std::size_t count, std::uint64_t seed,
                                       double s) {
  require(count >= 1, ErrorCode::invalid_argument, "corpus count must be at least 1");
  check_lattice_shape(d, radius);
  const auto ball = lattice_ball(d, radius);
  std::vector<LatticeSeq> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(ball_member(d, ball, seed, i, s));
  return out;
}

LatticeSeq lattice_member(int d, int radius, std::uint64_t seed, std::size_t member, double s) {
  check_lattice_shape(d, radius);
  return ball_member(d, lattice_ball(d, radius), seed, member, s);
}

}  // namespace modnls
