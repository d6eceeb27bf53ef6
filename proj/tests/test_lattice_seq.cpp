#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "modnls/error.hpp"
#include "modnls/lattice_seq.hpp"
#include "support/oracles.hpp"

using namespace modnls;

namespace {

NormParams params(int d, double q, double s) {
  NormParams p;
  p.d = d;
  p.q = Exponent(q);
  p.s = s;
  return p;
}

}  // namespace

TEST_CASE("exponent parsing") {
  CHECK(Exponent::parse("inf").is_inf());
  CHECK(Exponent::parse(" Infinity ").is_inf());
  CHECK(Exponent::parse("4/3").value() == doctest::Approx(4.0 / 3.0));
  CHECK(Exponent::parse("2").value() == 2.0);
  CHECK(Exponent::inf().reciprocal() == 0.0);
  CHECK(Exponent(2.0).dual_reciprocal() == 0.5);
  CHECK_THROWS_AS(Exponent::parse("0.5"), Error);
  CHECK_THROWS_AS(Exponent::parse("abc"), Error);
  CHECK_THROWS_AS(Exponent::parse("1/0"), Error);
}

TEST_CASE("regularity threshold flag") {
  CHECK(params(1, 1.0, 0.0).sufficiently_large());
  CHECK_FALSE(params(1, 1.0, -0.1).sufficiently_large());
  CHECK_FALSE(params(1, 2.0, 0.5).sufficiently_large());
  CHECK(params(1, 2.0, 0.51).sufficiently_large());
  NormParams inf_q = params(2, 2.0, 2.01);
  inf_q.q = Exponent::inf();
  CHECK(inf_q.sufficiently_large());
  inf_q.s = 2.0;
  CHECK_FALSE(inf_q.sufficiently_large());
}

TEST_CASE("japanese bracket") {
  CHECK(japanese_bracket(LatticeIndex::zero(1)) == 1.0);
  CHECK(japanese_bracket(LatticeIndex{1}) == doctest::Approx(1.41421356237));
  CHECK(japanese_bracket(LatticeIndex{3, 4}) == doctest::Approx(std::sqrt(26.0)));
}

TEST_CASE("sequence construction") {
  const LatticeSeq a(1, {{LatticeIndex{2}, 1.0}, {LatticeIndex{2}, -1.0}, {LatticeIndex{-3}, 2.0}});
  CHECK(a.size() == 1);
  CHECK(a.at(LatticeIndex{-3}) == cplx(2.0));
  CHECK(a.at(LatticeIndex{2}) == cplx(0.0));
  CHECK(a.support_radius() == 3);
  CHECK(LatticeSeq(2, {{LatticeIndex{1, 1}, 1.0}}).support_radius() == 2);
  CHECK(LatticeSeq(2, {{LatticeIndex{3, 4}, 1.0}}).support_radius() == 5);
  CHECK_THROWS_AS(LatticeSeq(2, {{LatticeIndex{1}, 1.0}}), Error);
}

TEST_CASE("weighted norm examples") {
  const auto d0 = LatticeSeq::delta(LatticeIndex::zero(1));
  for (double q : {1.0, 2.0, 3.5})
    for (double s : {-1.0, 0.0, 2.0}) CHECK(weighted_norm(d0, Exponent(q), s) == 1.0);
  CHECK(weighted_norm(d0, Exponent::inf(), 3.0) == 1.0);
  CHECK(weighted_norm(LatticeSeq::delta(LatticeIndex{1}), Exponent::inf(), 2.0) ==
        doctest::Approx(2.0).epsilon(1e-15));
  const LatticeSeq two(1, {{LatticeIndex{0}, 1.0}, {LatticeIndex{1}, 1.0}});
  CHECK(weighted_norm(two, params(1, 1.0, 2.0)) == doctest::Approx(3.0).epsilon(1e-15));
  CHECK_THROWS_AS(weighted_norm(two, params(2, 1.0, 2.0)), Error);
}

TEST_CASE("weighted norm homogeneity") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto a = oracle::random_seq(rng, 1 + trial % 2, 6);
    const cplx lambda(0.3 * trial - 4.0, 1.7);
    for (double q : {1.0, 2.0, 4.0}) {
      const double lhs = weighted_norm(a.scaled(lambda), Exponent(q), 1.25);
      const double rhs = std::abs(lambda) * weighted_norm(a, Exponent(q), 1.25);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * rhs);
    }
  }
}

TEST_CASE("convolution identities") {
  const LatticeIndex j{2, -1};
  const LatticeIndex k{-5, 3};
  CHECK(convolve(LatticeSeq::delta(j), LatticeSeq::delta(k)) == LatticeSeq::delta(j + k));

  std::mt19937_64 rng(7);
  const auto a = oracle::random_seq(rng, 2, 4);
  const auto b = oracle::random_seq(rng, 2, 3);
  const auto c = oracle::random_seq(rng, 2, 2);
  CHECK(convolve(a, LatticeSeq::delta(LatticeIndex::zero(2))) == a);
  CHECK(convolve(a, b) == convolve(b, a));
  CHECK(oracle::max_abs_diff(convolve(convolve(a, b), c), convolve(a, convolve(b, c))) < 1e-12);
  CHECK(convolve(a, b).support_radius() <= a.support_radius() + b.support_radius());
  CHECK(convolve(a, LatticeSeq(2)).is_zero());
  CHECK_THROWS_AS(convolve(a, LatticeSeq(1)), Error);
}

TEST_CASE("convolution matches the naive double sum") {
  std::mt19937_64 rng(3);
  for (int d = 1; d <= 3; ++d)
    for (int trial = 0; trial < 5; ++trial) {
      const auto a = oracle::random_seq(rng, d, 2 + trial);
      const auto b = oracle::random_seq(rng, d, 1 + 2 * trial % 5);
      const auto fast = convolve(a, b);
      const auto slow = oracle::naive_convolve(a, b);
      CHECK(oracle::max_abs_diff(fast, slow) < 1e-12);
    }
}

TEST_CASE("annulus decomposition") {
  auto single = annulus_decompose(LatticeSeq::delta(LatticeIndex::zero(1)));
  REQUIRE(single.levels.size() == 1);
  CHECK(single.levels[0].first == 0);

  auto two = annulus_decompose(LatticeSeq::delta(LatticeIndex{2}));
  REQUIRE(two.levels.size() == 1);
  CHECK(two.levels[0].first == 2);

  std::mt19937_64 rng(5);
  const auto a = oracle::random_seq(rng, 1, 7);
  const auto dec = annulus_decompose(a);
  CHECK(dec.max_level == 3);
  LatticeSeq sum(1);
  std::size_t count = 0;
  for (const auto& [l, piece] : dec.levels) {
    CHECK(l <= 3);
    for (const auto& [k, v] : piece.entries()) CHECK(annulus_level(k) == l);
    count += piece.size();
    sum = sum + piece;
  }
  CHECK(count == a.size());
  CHECK(sum == a);
}

TEST_CASE("annulus boundaries use exact integer radii") {
  CHECK(annulus_level(LatticeIndex{1}) == 1);
  CHECK(annulus_level(LatticeIndex{3}) == 2);
  CHECK(annulus_level(LatticeIndex{4}) == 3);
  CHECK(annulus_level(LatticeIndex{1, 1}) == 1);  // |k| = sqrt 2 < 2
  CHECK(annulus_level(LatticeIndex{0, 2}) == 2);
  CHECK(in_ball(LatticeIndex{3, 4}, 3));  // 5 < 8
  CHECK_FALSE(in_ball(LatticeIndex{0, 8}, 3));
  CHECK_FALSE(in_ball(LatticeIndex{0}, 0) == false);
}

TEST_CASE("bracket lies within two octaves of the annulus scale") {
  auto check = [](const LatticeIndex& k) {
    const int l = annulus_level(k);
    const double b = japanese_bracket(k);
    return std::exp2(l - 1) <= b && b < std::exp2(l + 1);
  };
  bool ok = true;
  for (int x = -1024; x <= 1024; ++x) ok = ok && check(LatticeIndex{x});
  for (int x = -64; x <= 64; ++x)
    for (int y = -64; y <= 64; ++y)
      if (x * x + y * y <= 64 * 64) ok = ok && check(LatticeIndex{x, y});
  CHECK(ok);
}

TEST_CASE("necessary profile") {
  const auto p = params(1, 2.0, 1.0);
  auto delta = lp_necessary_profile(LatticeSeq::delta(LatticeIndex::zero(1)), p);
  REQUIRE(delta.levels.size() == 1);
  CHECK(delta.levels[0].c_l == 1.0);
  CHECK(delta.profile_norm == 1.0);

  const LatticeSeq annulus(1, {{LatticeIndex{4}, 1.0}, {LatticeIndex{-6}, 2.0}});
  auto single = lp_necessary_profile(annulus, p);
  REQUIRE(single.levels.size() == 4);
  for (const auto& lb : single.levels) CHECK(lb.c_l == (lb.level == 3 ? 1.0 : 0.0));

  std::mt19937_64 rng(17);
  const auto q2 = params(2, 2.0, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = oracle::random_seq(rng, 2, 12, trial % 3 == 0 ? 0.0 : 2.0);
    const auto prof = lp_necessary_profile(a, q2);
    CHECK(prof.bounds_hold);
    CHECK(std::abs(prof.profile_norm - 1.0) <= 1e-12);
  }

  CHECK_THROWS_WITH(lp_necessary_profile(LatticeSeq(1), p), "zero-norm input");
}

TEST_CASE("sufficient condition for balls") {
  const auto p = params(1, 2.0, 1.0);
  std::vector<LatticeSeq> zero{LatticeSeq(1)};
  std::vector<double> c0{0.0};
  auto z = balls_sufficient_bound(zero, p, 0.0, c0);
  CHECK(z.norm == 0.0);
  CHECK(z.holds);

  // One piece at m = 0 meeting the hypothesis with equality.
  const double N = 2.0;
  std::vector<LatticeSeq> one{LatticeSeq::delta(LatticeIndex{0}, N / ball_constant(1.0))};
  std::vector<double> c1{1.0};
  auto r = balls_sufficient_bound(one, p, N, c1);
  CHECK(r.holds);
  CHECK(r.norm <= N);

  // Random admissible pieces scaled to equality.
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const int M = 5;
    std::vector<double> cm(M);
    for (auto& c : cm) c = unif(rng);
    double norm = 0.0;
    for (double c : cm) norm += c * c;
    for (auto& c : cm) c /= std::sqrt(norm);
    std::vector<LatticeSeq> pieces;
    for (int m = 0; m < M; ++m) {
      const int radius = (1 << m) - 1;
      auto raw = oracle::random_seq(rng, 1, radius);
      const double target = std::exp2(-m * p.s) * cm[m] * N / ball_constant(p.s);
      pieces.push_back(raw.scaled(target / weighted_norm(raw, Exponent(2.0), 0.0)));
    }
    auto res = balls_sufficient_bound(pieces, p, N, cm);
    CHECK(res.holds);
  }

  std::vector<LatticeSeq> outside{LatticeSeq::delta(LatticeIndex{1}, 0.01)};
  CHECK_THROWS_WITH(balls_sufficient_bound(outside, p, N, c1),
                    "piece m = 0 leaves the ball B_m");
  std::vector<LatticeSeq> too_big{LatticeSeq::delta(LatticeIndex{0}, N)};
  CHECK_THROWS_WITH(balls_sufficient_bound(too_big, p, N, c1),
                    "piece m = 0 violates the norm hypothesis");
  std::vector<double> c_big{1.5};
  CHECK_THROWS_AS(balls_sufficient_bound(one, p, N, c_big), Error);
  CHECK_THROWS_AS(balls_sufficient_bound(one, params(1, 2.0, 0.0), N, c1), Error);
}

TEST_CASE("geometric series truncation") {
  for (double s : {0.5, 1.0, 2.0}) {
    double partial = 0.0;
    for (int m = 0; m <= 64; ++m) partial += std::exp2(-m * s);
    const double limit = 1.0 / (1.0 - std::exp2(-s));
    const double bound = std::exp2(-65 * s) / (1.0 - std::exp2(-s));
    CHECK(limit - partial <= bound + 4 * std::numeric_limits<double>::epsilon() * limit);
  }
}

TEST_CASE("convolution split") {
  const auto d0 = LatticeSeq::delta(LatticeIndex::zero(1));
  auto trivial = algebra_convolution_split(d0, d0);
  REQUIRE(trivial.a_pieces.size() == 1);
  CHECK(trivial.a_pieces[0] == d0);
  CHECK(trivial.b_pieces.empty());

  std::mt19937_64 rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = 1 + trial % 2;
    const auto a = oracle::random_seq(rng, d, d == 1 ? 16 : 6);
    const auto b = oracle::random_seq(rng, d, d == 1 ? 16 : 5);
    const auto split = algebra_convolution_split(a, b);
    LatticeSeq sum(d);
    for (std::size_t i = 0; i < split.a_pieces.size(); ++i) {
      for (const auto& [k, v] : split.a_pieces[i].entries())
        REQUIRE(in_ball(k, static_cast<int>(i) + 1));
      sum = sum + split.a_pieces[i];
    }
    for (std::size_t j = 0; j < split.b_pieces.size(); ++j) {
      for (const auto& [k, v] : split.b_pieces[j].entries())
        REQUIRE(in_ball(k, static_cast<int>(j) + 2));
      sum = sum + split.b_pieces[j];
    }
    const auto direct = oracle::naive_convolve(a, b);
    CHECK(oracle::max_abs_diff(sum, direct) <= 1e-12 * weighted_norm(direct, Exponent::inf(), 0));
  }
  CHECK_THROWS_AS(algebra_convolution_split(d0, LatticeSeq(2)), Error);
}

TEST_CASE("l1 embedding constant") {
  // Brute force over a much larger ball never exceeds the truncated-plus-tail bound.
  for (auto [d, q, s] : {std::tuple{1, 2.0, 1.0}, std::tuple{2, 2.0, 1.5}, std::tuple{1, 4.0, 1.0}}) {
    const Exponent qe(q);
    const double c = l1_embedding_constant(d, qe, s, 40);
    const double alpha = s / qe.dual_reciprocal();
    double brute = 0.0;
    const int big = d == 1 ? 200000 : 2000;
    for (int x = -big; x <= big; ++x) {
      if (d == 1) {
        brute += std::pow(1.0 + double(x) * x, -0.5 * alpha);
        continue;
      }
      for (int y = -big; y <= big; ++y)
        if (std::int64_t(x) * x + std::int64_t(y) * y <= std::int64_t(big) * big)
          brute += std::pow(1.0 + double(x) * x + double(y) * y, -0.5 * alpha);
    }
    CHECK(std::pow(brute, qe.dual_reciprocal()) <= c);
  }
  CHECK(l1_embedding_constant(1, Exponent(1.0), 0.0, 10) == 1.0);
  CHECK(std::isinf(l1_embedding_constant(1, Exponent(2.0), 0.5, 10)));

  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const auto a = oracle::random_seq(rng, 1, 10);
    const double c = l1_embedding_constant(1, Exponent(2.0), 1.0, 100);
    CHECK(weighted_norm(a, Exponent(1.0), 0.0) <= c * weighted_norm(a, Exponent(2.0), 1.0));
  }
}

TEST_CASE("text round trip") {
  std::mt19937_64 rng(37);
  const auto a = oracle::random_seq(rng, 2, 5);
  std::stringstream ss;
  write_lattice_seq(ss, a, Exponent::parse("4/3"), 0.75);
  const auto back = read_lattice_seq(ss);
  CHECK(back.seq == a);
  CHECK(back.q == Exponent::parse("4/3"));
  CHECK(back.s == 0.75);

  std::stringstream bad("1 2 0 1\n5 1.0 0.0\n");
  CHECK_THROWS_AS(read_lattice_seq(bad), Error);
  std::stringstream empty("");
  CHECK_THROWS_AS(read_lattice_seq(empty), Error);
}
