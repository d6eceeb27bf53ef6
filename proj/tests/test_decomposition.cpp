#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>
#include <sstream>

#include "modnls/corpus.hpp"
#include "modnls/decomposition.hpp"
#include "modnls/error.hpp"

using namespace modnls;

namespace {

constexpr double kPi = std::numbers::pi;

// L = 16 pi puts every integer frequency on the grid (dk = 1/8).
GridSpec line_spec(int n = 512) { return GridSpec(1, 8.0 * kPi, n); }

GridField plane_wave(const GridSpec& spec, std::span<const double> xi) {
  return GridField::from_function(spec, [&](std::span<const double> x) {
    double phase = 0.0;
    for (int a = 0; a < spec.dim(); ++a) phase += xi[a] * x[a];
    return std::polar(1.0, phase);
  });
}

double max_abs_diff(const GridField& a, const GridField& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.spec().size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("grid spec validation") {
  CHECK_THROWS_AS(GridSpec(1, 20.0, 100), Error);
  CHECK_THROWS_AS(GridSpec(1, 4.0 * kPi - 0.1, 64), Error);
  CHECK_NOTHROW(GridSpec(1, 4.0 * kPi, 64));
  CHECK_THROWS_AS(GridSpec(4, 20.0, 64), Error);
  const GridSpec s(2, 20.0, 64);
  CHECK(s.size() == 4096);
  CHECK(s.dx() == doctest::Approx(40.0 / 64));
  CHECK(s.nyquist() == doctest::Approx(kPi * 64 / 40.0));
  CHECK(s.signed_mode(33) == -31);
  for (std::size_t i : {std::size_t{0}, std::size_t{77}, std::size_t{4095}})
    CHECK(s.flatten(s.unflatten(i)) == i);
}

TEST_CASE("grid fields and transforms") {
  const auto spec = line_spec(128);
  CHECK_THROWS_AS(GridField(spec, std::vector<cplx>(5)), Error);
  std::vector<cplx> bad(spec.size());
  bad[3] = cplx(std::nan(""), 0.0);
  CHECK_THROWS_AS(GridField(spec, bad), Error);

  const auto g = unit_gaussian(spec);
  const auto back = inverse_dft(spec, forward_dft(g));
  CHECK(max_abs_diff(g, back) < 1e-14);
  // Closed forms of the Gaussian norms: sqrt(pi/2)^(1/2), sqrt(pi), 1.
  CHECK(lp_norm(g, Exponent(2.0)) == doctest::Approx(std::sqrt(std::sqrt(kPi / 2))).epsilon(1e-12));
  CHECK(lp_norm(g, Exponent(1.0)) == doctest::Approx(std::sqrt(kPi)).epsilon(1e-12));
  CHECK(lp_norm(g, Exponent::inf()) == 1.0);
  CHECK(spectral_excess(g, 9.5) < 1e-9);
  CHECK(spectral_excess(g, 3.0) > 1e-3);
  CHECK(spectral_excess(GridField(spec), 1.0) == 0.0);
}

TEST_CASE("grid field binary round trip") {
  const GridSpec spec(2, 5.0 * kPi, 32);
  const auto f = field_corpus(CorpusKind::band_limited_noise, spec, 1, 9, 3.0)[0];
  std::stringstream ss;
  write_grid_field(ss, f);
  const auto back = read_grid_field(ss);
  CHECK(back.spec() == spec);
  CHECK(max_abs_diff(back, f) == 0.0);

  std::string raw = ss.str();
  raw[3 * sizeof(double)] = 7;
  std::stringstream wrong_version(raw);
  CHECK_THROWS_AS(read_grid_field(wrong_version), Error);
  std::stringstream truncated(ss.str().substr(0, 40));
  CHECK_THROWS_AS(read_grid_field(truncated), Error);
}

TEST_CASE("default cutoff") {
  CHECK(default_lattice_cutoff(GridSpec(1, 360.0, 4096)) == 16);
  CHECK(default_lattice_cutoff(line_spec()) == 31);
  CHECK_THROWS_AS(default_lattice_cutoff(GridSpec(1, 4.0 * kPi, 16)), Error);
  CHECK_THROWS_AS(build_partition(line_spec(), 32), Error);
  CHECK_THROWS_AS(build_partition(line_spec(), 1), Error);
}

TEST_CASE("partition of unity properties") {
  for (const auto& spec : {line_spec(), GridSpec(2, 6.0 * kPi, 128)}) {
    const auto basis = build_partition(spec);
    const int d = spec.dim();
    const double band = basis.covered_band();
    const auto linf = frequency_linf(spec);
    std::vector<double> total(spec.size(), 0.0);
    for (const auto& k : basis.indices()) {
      const auto& sym = basis.symbol(k);
      for (std::size_t i = 0; i < sym.index.size(); ++i) {
        const double v = sym.value[i];
        REQUIRE(v >= 0.0);
        REQUIRE(v <= 1.0);
        total[sym.index[i]] += v;
        // Support inside B_{sqrt d}(k) and exact translate of sigma_0.
        const auto idx = spec.unflatten(sym.index[i]);
        std::array<double, kMaxDim> eta{};
        double dist_sq = 0.0;
        for (int a = 0; a < d; ++a) {
          eta[a] = spec.freq(idx[a]) - k.c[a];
          dist_sq += eta[a] * eta[a];
        }
        REQUIRE(dist_sq < d);
        REQUIRE(v == partition_symbol(std::span<const double>(eta.data(), d)));
      }
    }
    double worst = 0.0;
    for (std::size_t i = 0; i < spec.size(); ++i)
      if (linf[i] <= band) worst = std::max(worst, std::abs(total[i] - 1.0));
    CHECK(worst <= 1e-12);

    const double origin[kMaxDim] = {0.0, 0.0, 0.0};
    const double s0 = partition_symbol(std::span<const double>(origin, d));
    CHECK(s0 <= 1.0);
    CHECK(s0 >= basis.lower_bound_c());
    CHECK(basis.lower_bound_c() >= 0.25);
    CHECK(basis.derivative_bounds()[0] >= s0);
    CHECK(basis.derivative_bounds()[0] <= 1.0);
    CHECK(basis.derivative_bounds()[1] > 0.0);
    CHECK(std::isfinite(basis.derivative_bounds()[2]));
  }
}

TEST_CASE("sigma_3 vanishes at distance one") {
  const auto spec = line_spec();
  const auto basis = build_partition(spec);
  const auto dense = basis.dense_symbol(LatticeIndex{3});
  for (int j = 0; j < spec.n(); ++j)
    if (std::abs(spec.freq(j) - 3.0) >= 1.0) REQUIRE(dense[j] == 0.0);
  CHECK_THROWS_AS(basis.symbol(LatticeIndex{32}), Error);
}

TEST_CASE("box operator") {
  const auto spec = line_spec();
  const auto basis = build_partition(spec, 16);

  SUBCASE("plane waves are eigenfunctions") {
    for (double m : {0.0, 2.0, 2.5, -7.375}) {
      const double xi[1] = {m};
      const auto f = plane_wave(spec, xi);
      for (int k : {-8, 2, 3}) {
        const auto out = box_operator(basis, LatticeIndex{k}, f);
        const double s = partition_symbol(std::vector<double>{m - k});
        double err = 0.0;
        for (std::size_t i = 0; i < spec.size(); ++i) err = std::max(err, std::abs(out[i] - s * f[i]));
        CHECK(err < 1e-13);
      }
    }
  }

  const auto corpus = field_corpus(CorpusKind::band_limited_noise, spec, 6, 42, 14.0);

  SUBCASE("reconstruction and orthogonality") {
    for (const auto& f : corpus) {
      GridField sum(spec);
      for (const auto& k : basis.indices()) sum += box_operator(basis, k, f);
      CHECK(max_abs_diff(sum, f) <= 1e-10);
      // Disjoint supports: only round-off of the intermediate transform survives.
      const auto inner = box_operator(basis, LatticeIndex{4}, f);
      const double scale = lp_norm(inner, Exponent::inf());
      CHECK(lp_norm(box_operator(basis, LatticeIndex{7}, inner), Exponent::inf()) <= 1e-15 * scale);
      CHECK(lp_norm(box_operator(basis, LatticeIndex{1}, inner), Exponent::inf()) <= 1e-15 * scale);
    }
  }

  SUBCASE("linearity") {
    const cplx alpha(0.7, -1.2), beta(-2.0, 0.3);
    const auto combo = alpha * corpus[0] + beta * corpus[1];
    for (int k : {-5, 0, 11}) {
      const auto lhs = box_operator(basis, LatticeIndex{k}, combo);
      const auto rhs = alpha * box_operator(basis, LatticeIndex{k}, corpus[0]) +
                       beta * box_operator(basis, LatticeIndex{k}, corpus[1]);
      CHECK(max_abs_diff(lhs, rhs) <= 1e-12 * lp_norm(rhs, Exponent::inf()));
    }
  }

  SUBCASE("output spectrum stays in the ball around k") {
    const auto out = box_operator(basis, LatticeIndex{-6}, corpus[2]);
    const auto hat = forward_dft(out);
    double outside = 0.0, peak = 0.0;
    for (int j = 0; j < spec.n(); ++j) {
      peak = std::max(peak, std::abs(hat[j]));
      if (std::abs(spec.freq(j) + 6.0) >= 1.0) outside = std::max(outside, std::abs(hat[j]));
    }
    CHECK(outside <= 1e-13 * peak);
  }

  SUBCASE("errors") {
    CHECK_THROWS_AS(box_operator(basis, LatticeIndex{17}, corpus[0]), Error);
    CHECK_THROWS_AS(box_operator(basis, LatticeIndex{0}, unit_gaussian(line_spec(256))), Error);
  }
}

TEST_CASE("multipliers") {
  const auto spec = line_spec();
  const auto basis = build_partition(spec, 16);
  const auto f = field_corpus(CorpusKind::band_limited_noise, spec, 1, 5, 12.0)[0];

  const MultiplierSymbol one(spec, std::vector<cplx>(spec.size(), 1.0), 1.0);
  CHECK(max_abs_diff(apply_multiplier(one, f), f) < 1e-13);
  const auto sk = MultiplierSymbol::from_partition(basis, LatticeIndex{3}, 1.0);
  CHECK(max_abs_diff(apply_multiplier(sk, f), box_operator(basis, LatticeIndex{3}, f)) == 0.0);
  CHECK_THROWS_AS(apply_multiplier(sk, unit_gaussian(line_spec(256))), Error);
  CHECK_THROWS_AS(MultiplierSymbol(spec, std::vector<cplx>(3), 1.0), Error);

  const MultiplierSymbol zero(spec, std::vector<cplx>(spec.size()), 1.0);
  CHECK(sobolev_norm(zero) == 0.0);
  const auto s0 = MultiplierSymbol::from_partition(basis, LatticeIndex{0}, 1.0);
  const double h1 = sobolev_norm(s0);
  CHECK(h1 > 0.0);
  CHECK(std::isfinite(h1));

  // s = 0: Plancherel against the L^2(d xi) norm of the samples.
  const auto plain = MultiplierSymbol::from_partition(basis, LatticeIndex{0}, 0.0);
  double l2 = 0.0;
  for (const auto& v : plain.values) l2 += std::norm(v);
  l2 = std::sqrt(l2 * spec.dk());
  CHECK(std::abs(sobolev_norm(plain) - l2) <= 1e-10 * l2);
}

TEST_CASE("Bernstein multiplier estimate") {
  const auto spec = line_spec();
  const auto basis = build_partition(spec, 16);
  const double s = 0.5 * spec.dim() + 0.5;
  const double c_grid = bernstein_constant(spec, s);
  CHECK(c_grid == doctest::Approx(bernstein_constant_continuum(1, s)).epsilon(0.05));

  const auto corpus = field_corpus(CorpusKind::band_limited_noise, spec, 200, 77, 15.0);
  for (int k : {-10, 0, 3, 12}) {
    const auto sym = MultiplierSymbol::from_partition(basis, LatticeIndex{k}, s);
    const double h = sobolev_norm(sym);
    const auto kernel = multiplier_kernel(spec, sym.values);
    const double k1 = lp_norm(kernel, Exponent(1.0));
    CHECK(k1 <= c_grid * h);
    for (const auto& f : corpus)
      for (auto p : {Exponent(1.0), Exponent(2.0), Exponent::inf()}) {
        const double ratio = lp_norm(apply_multiplier(sym, f), p) / lp_norm(f, p);
        REQUIRE(ratio <= k1 * (1.0 + 1e-12));
      }
  }
}

TEST_CASE("box operator bounds are uniform in k") {
  // With L = 16 pi integer modulations are exact on the grid, so
  // box_k (e^{ikx} f) = e^{ikx} box_0 f and ratios agree across k.
  const auto spec = line_spec();
  const auto basis = build_partition(spec, 16);
  const auto corpus = field_corpus(CorpusKind::band_limited_noise, spec, 200, 91, 4.0);
  for (auto p : {Exponent(1.0), Exponent(2.0), Exponent::inf()}) {
    double lo = 1e300, hi = 0.0;
    for (int k : {-8, -3, 0, 5, 9}) {
      const double xi[1] = {static_cast<double>(k)};
      const auto wave = plane_wave(spec, xi);
      double sup = 0.0;
      for (const auto& f : corpus) {
        const auto g = multiply(wave, f);
        sup = std::max(sup, lp_norm(box_operator(basis, LatticeIndex{k}, g), p) / lp_norm(g, p));
      }
      lo = std::min(lo, sup);
      hi = std::max(hi, sup);
    }
    CHECK(hi <= 1.05 * lo);
  }

  double lo = 1e300, hi = 0.0;
  for (const auto& k : basis.indices()) {
    const auto dense = basis.dense_symbol(k);
    const double k1 = lp_norm(multiplier_kernel(spec, std::vector<cplx>(dense.begin(), dense.end())),
                              Exponent(1.0));
    lo = std::min(lo, k1);
    hi = std::max(hi, k1);
  }
  CHECK(hi <= 1.05 * lo);
}

TEST_CASE("product decomposition") {
  const auto spec = line_spec();
  const auto basis = build_partition(spec, 16);
  CHECK(product_offsets(1).size() == 7);
  CHECK(product_offsets(2).size() <= std::pow(6.0 * std::sqrt(2.0) + 1.0, 2));
  CHECK(product_offsets(3).size() <= std::pow(6.0 * std::sqrt(3.0) + 1.0, 3));

  SUBCASE("single plane wave") {
    const double xi[1] = {3.25};
    const auto f = plane_wave(spec, xi);
    for (int k : {6, 7, 0}) {
      const auto r = product_decomposition_check(basis, f, f, LatticeIndex{k});
      CHECK(r.discrepancy <= 1e-10);
      CHECK(r.offsets == 7);
      CHECK(r.offset_bound == 7.0);
    }
  }

  SUBCASE("random band-limited pairs") {
    const double band = ProductDecomposer::product_band(basis);
    CHECK(band == doctest::Approx(7.5));
    const auto fs = field_corpus(CorpusKind::band_limited_noise, spec, 4, 1, band);
    const auto gs = field_corpus(CorpusKind::band_limited_noise, spec, 4, 2, band);
    for (std::size_t i = 0; i < fs.size(); ++i) {
      const ProductDecomposer dec(basis, fs[i], gs[i]);
      for (const auto& k : basis.indices()) REQUIRE(dec.check(k).discrepancy <= 1e-8);
    }
  }

  SUBCASE("overflow is rejected") {
    const double xi[1] = {12.0};
    const auto wide = plane_wave(spec, xi);
    CHECK_THROWS_WITH_AS(product_decomposition_check(basis, wide, wide, LatticeIndex{0}),
                         doctest::Contains("spectral overflow"), Error);
  }
}
