// Acceptance run: one PASS/FAIL line per criterion, nonzero exit when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "modnls/corpus.hpp"
#include "modnls/error.hpp"
#include "modnls/grid.hpp"
#include "modnls/harness.hpp"
#include "modnls/lattice_seq.hpp"
#include "modnls/nls_solver.hpp"
#include "support/split_step.hpp"

using namespace modnls;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20261016;

fs::path g_root;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok) { pass = pass && ok; }
  template <class T>
  Outcome& operator<<(const T& v) {
    detail << v;
    return *this;
  }
};

ResultRecord campaign(const std::string& name, const std::string& tag,
                      std::initializer_list<std::pair<const char*, std::string>> kv) {
  Config c;
  for (const auto& [k, v] : kv) c.set(k, v);
  return run_campaign(name, c, kSeed, g_root / tag);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

void note_error(Outcome& o, const ResultRecord& r) {
  if (!r.error.empty()) o << " [" << r.campaign << " error: " << r.error << "]";
}

// ---------------------------------------------------------------- criteria

void propagator_exponent(Outcome& o) {
  const auto p1 = campaign("propagator-growth", "c1_p1", {{"p", "1"}});
  const auto p2 = campaign("propagator-growth", "c1_p2", {{"p", "2"}});
  o.require(p1.pass && p2.pass);
  o.require(parse_real(p1.config.at("length")) >= 720.0);
  note_error(o, p1);
  note_error(o, p2);
  if (p1.error.empty() && p2.error.empty())
    o << "p=1 slope " << fmt(p1.metrics.at("slope")) << " (0.50 +- 0.05), p=2 slope "
      << fmt(p2.metrics.at("slope")) << " (0 +- 0.02), conservation "
      << fmt(p2.metrics.at("conservation_error"));
}

void exponent_monotonicity(Outcome& o) {
  for (const char* p : {"1", "4/3", "2"}) {
    const auto r =
        campaign("propagator-growth", std::string("c2_p") + (p[1] ? "4_3" : p),
                 {{"p", p}, {"slope_tol", "0.05"}});
    o.require(r.pass);
    note_error(o, r);
    if (r.error.empty())
      o << "p=" << p << " slope " << fmt(r.metrics.at("slope")) << " target "
        << fmt(r.metrics.at("exponent")) << "; ";
  }
}

void product_identity(Outcome& o) {
  const auto r = campaign("product-decomp", "c3", {{"d", "1"}, {"K", "16"}, {"pairs", "100"}});
  o.require(r.pass);
  note_error(o, r);
  if (r.error.empty())
    o << "max discrepancy " << fmt(r.metrics.at("max_discrepancy")) << ", #M "
      << r.metrics.at("offsets") << " <= " << r.metrics.at("offset_bound");
}

void algebra(Outcome& o) {
  const std::vector<std::vector<std::pair<const char*, std::string>>> cases = {
      {{"d", "1"}, {"q", "1"}, {"s", "0"}},
      {{"d", "1"}, {"q", "2"}, {"s", "0.75"}},
      {{"d", "2"}, {"q", "2"}, {"s", "1.5"}},
      {{"d", "1"}, {"q", "inf"}, {"s", "1.1"}},
  };
  int i = 0;
  for (const auto& kv : cases) {
    Config c;
    for (const auto& [k, v] : kv) c.set(k, v);
    c.set("pairs", "10000");
    c.set("radius", "8");
    const auto r = run_campaign("algebra", c, kSeed, g_root / ("c4_" + std::to_string(i++)));
    o.require(r.pass);
    note_error(o, r);
    if (r.error.empty())
      o << "(" << kv[0].second << "," << kv[1].second << "," << kv[2].second << ") growth "
        << fmt(r.metrics.at("growth")) << " split " << fmt(r.metrics.at("split_error")) << "; ";
  }
}

void holder(Outcome& o) {
  const char* triples[3][3] = {{"1", "2", "2"}, {"2", "4", "4"}, {"1", "1", "inf"}};
  double worst_over = 0.0, worst_change = 0.0;
  for (const auto& t : triples)
    for (const char* q : {"1", "2"}) {
      const auto r = campaign("holder",
                              std::string("c5_") + t[0] + t[1] + t[2] + "_q" + q,
                              {{"p", t[0]}, {"p1", t[1]}, {"p2", t[2]}, {"q", q}});
      o.require(r.pass);
      note_error(o, r);
      if (!r.error.empty()) continue;
      worst_over = std::max(worst_over, r.metrics.at("validation_over_calibration"));
      worst_change = std::max(worst_change, r.metrics.at("refinement_change"));
    }
  o << "worst validation/calibration " << fmt(worst_over) << " (<= 1.1), worst refinement change "
    << fmt(worst_change) << " (<= 0.1)";
}

void littlewood_paley(Outcome& o) {
  struct Case {
    int d;
    const char* q;
    double s;
  };
  const Case cases[] = {{1, "1", 0.5}, {1, "2", 1.0}, {2, "2", 1.5}, {1, "inf", 0.75},
                        {2, "1", 2.0}, {1, "2", -0.5}, {3, "2", 1.0}, {1, "4/3", 0.25}};
  constexpr int kInstances = 1000;
  std::mt19937_64 rng(kSeed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  int necessary_ok = 0;
  double worst_norm = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const Case& c = cases[i % 8];
    const NormParams params{c.d, Exponent::parse(c.q), Exponent::parse(c.q), c.s};
    const int radius = c.d == 3 ? 4 : 1 + i % 13;
    const auto a = lattice_member(c.d, radius, kSeed, static_cast<std::size_t>(i), c.s);
    const auto prof = lp_necessary_profile(a, params);
    const double err = std::abs(prof.profile_norm - 1.0);
    worst_norm = std::max(worst_norm, err);
    necessary_ok += (prof.bounds_hold && err <= 1e-12) ? 1 : 0;
  }

  int sufficient_ok = 0;
  double worst_ratio = 0.0;
  for (int i = 0; i < kInstances; ++i) {
    const Case& c = cases[i % 8];
    const double s = std::abs(c.s) > 0.0 ? std::abs(c.s) : 0.5;
    const Exponent q = Exponent::parse(c.q);
    const NormParams params{c.d, q, q, s};
    const int pieces_count = c.d == 3 ? 3 : 1 + i % 6;
    std::vector<double> cm(static_cast<std::size_t>(pieces_count));
    for (auto& v : cm) v = unit(rng);
    const double scale = weighted_norm(
        LatticeSeq(1, [&] {
          std::vector<LatticeSeq::Entry> e;
          for (int m = 0; m < pieces_count; ++m) e.push_back({LatticeIndex{m}, cm[m]});
          return e;
        }()),
        q, 0.0);
    for (auto& v : cm) v /= scale;
    const double N = 0.5 + 4.0 * unit(rng);
    std::vector<LatticeSeq> pieces;
    for (int m = 0; m < pieces_count; ++m) {
      const auto raw = lattice_member(c.d, (1 << m) - 1, kSeed + 1, static_cast<std::size_t>(i * 8 + m), 0.0);
      const double target = std::exp2(-m * s) * cm[m] * N / ball_constant(s);
      pieces.push_back(raw.scaled(target / weighted_norm(raw, q, 0.0)));
    }
    const auto r = balls_sufficient_bound(pieces, params, N, cm);
    worst_ratio = std::max(worst_ratio, r.norm / N);
    sufficient_ok += r.holds ? 1 : 0;
  }
  o.require(necessary_ok == kInstances && sufficient_ok == kInstances);
  o << "necessary " << necessary_ok << "/" << kInstances << " (max |norm - 1| " << fmt(worst_norm)
    << "), sufficient " << sufficient_ok << "/" << kInstances << " (max norm/N "
    << fmt(worst_ratio) << ")";
}

void peetre(Outcome& o) {
  double worst = 0.0;
  for (const char* s : {"-1.5", "0", "0.75", "2"})
    for (const auto& [d, R] : {std::pair{"1", "64"}, std::pair{"2", "24"}}) {
      const auto r = campaign("peetre", std::string("c7_s") + s + "_d" + d,
                              {{"s", s}, {"R", R}, {"d", d}});
      o.require(r.pass);
      note_error(o, r);
      if (r.error.empty()) worst = std::max(worst, r.metrics.at("worst_ratio"));
    }
  o << "worst lhs/rhs " << fmt(worst);
}

void nls_solver(Outcome& o) {
  const auto r = campaign("nls-solve", "c8",
                          {{"norm", "0.1"}, {"d", "1"}, {"p", "2"}, {"q", "1"}, {"s", "1"},
                           {"T", "0.2"}, {"steps", "64"}});
  o.require(r.pass);
  note_error(o, r);
  if (!r.error.empty()) return;
  // Independent reference that shares no transform code with the library.
  const auto u = read_trajectory(g_root / "c8" / "trajectory" / "u.index");
  const auto& u0 = u.fields.front();
  const auto ref = oracle::split_step(std::vector<cplx>(u0.samples().begin(), u0.samples().end()),
                                      u0.spec().length(), 0.2, 256, 64, -1);
  double dist = 0.0;
  for (std::size_t j = 0; j < u.fields.size(); ++j) {
    const GridField rj(u0.spec(), ref[j]);
    dist = std::max(dist, lp_norm(u.fields[j] - rj, Exponent(2.0)));
  }
  o.require(dist <= 1e-5);
  o << "iterations " << r.metrics.at("iterations") << ", max factor "
    << fmt(r.metrics.at("max_factor")) << ", defect " << fmt(r.metrics.at("defect"))
    << ", oracle distance " << fmt(dist) << ", mass drift " << fmt(r.metrics.at("mass_drift"));
}

void existence_scaling(Outcome& o) {
  const auto r = campaign("existence-scan", "c9", {{"lambdas", "0.5,1,2,4"}});
  o.require(r.pass);
  note_error(o, r);
  if (r.error.empty())
    o << "slope " << fmt(r.metrics.at("slope")) << " +- " << fmt(r.metrics.at("slope_stderr"))
      << " over " << r.metrics.at("fitted") << " points (-2 +- 0.3)";
}

void lipschitz(Outcome& o) {
  const auto r = campaign("lipschitz", "c10", {});
  o.require(r.pass);
  note_error(o, r);
  if (r.error.empty())
    for (const char* k : {"scale", "bump", "phase"})
      o << k << " " << fmt(r.metrics.at(std::string("ratio_") + k)) << " <= "
        << fmt(r.metrics.at(std::string("bound_") + k)) << "; ";
}

void embeddings(Outcome& o) {
  const auto r = campaign("embeddings", "c11", {{"count", "50"}});
  o.require(r.pass);
  note_error(o, r);
  if (r.error.empty())
    o << "failures " << r.metrics.at("failures") << " over " << r.metrics.at("members")
      << " fields, worst sup ratio " << fmt(r.metrics.at("sup_worst_ratio"));
}

}  // namespace

int main(int argc, char** argv) {
  g_root = argc > 1 ? fs::path(argv[1]) : fs::temp_directory_path() / "modnls_acceptance";
  fs::remove_all(g_root);

  struct Criterion {
    const char* name;
    double budget_s;
    std::function<void(Outcome&)> run;
  };
  const Criterion criteria[] = {
      {"propagator exponent", 120, propagator_exponent},
      {"exponent monotonicity", 300, exponent_monotonicity},
      {"product decomposition identity", 60, product_identity},
      {"sequence algebra", 180, algebra},
      {"Hoelder-type product bound", 300, holder},
      {"Littlewood-Paley round trips", 60, littlewood_paley},
      {"Peetre inequality", 30, peetre},
      {"NLS Picard solver", 180, nls_solver},
      {"existence-time scaling", 600, existence_scaling},
      {"Lipschitz data-to-solution", 180, lipschitz},
      {"embeddings", 60, embeddings},
  };

  int failed = 0;
  int index = 0;
  for (const auto& c : criteria) {
    ++index;
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    try {
      c.run(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o << " [exception: " << e.what() << "]";
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = secs <= c.budget_s;
    const bool pass = o.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("%s %2d %s (%.1f s of %.0f s): %s\n", pass ? "PASS" : "FAIL", index, c.name, secs,
                c.budget_s, o.detail.str().c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
