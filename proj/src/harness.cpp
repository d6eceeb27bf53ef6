#include "modnls/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "json.hpp"
#include "modnls/corpus.hpp"
#include "modnls/decomposition.hpp"
#include "modnls/error.hpp"
#include "modnls/lattice_seq.hpp"
#include "modnls/modnorm.hpp"
#include "modnls/nls_solver.hpp"
#include "modnls/propagator.hpp"

namespace modnls {

namespace fs = std::filesystem;

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

double parse_real(std::string_view text) {
  std::string_view t = trim(text);
  double factor = 1.0;
  if (t.size() >= 2 && t.substr(t.size() - 2) == "pi") {
    factor = std::numbers::pi;
    t = trim(t.substr(0, t.size() - 2));
    if (t.empty()) return factor;
  }
  const std::string s(t);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used != 0 && used == s.size(), ErrorCode::schema,
          "expected a number, got '" + std::string(text) + "'");
  return v * factor;
}

Config Config::parse(std::string_view text) {
  Config c;
  int line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    const std::string_view line = trim(text.substr(0, nl));
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    require(eq != std::string_view::npos, ErrorCode::schema,
            "config line " + std::to_string(line_no) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    require(!key.empty(), ErrorCode::schema,
            "config line " + std::to_string(line_no) + ": empty key");
    c.set(std::string(key), std::string(trim(line.substr(eq + 1))));
  }
  return c;
}

Config Config::load(const fs::path& file) {
  std::ifstream is(file);
  require(static_cast<bool>(is), ErrorCode::io, "cannot read config " + file.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

void Config::set(const std::string& key, const std::string& value) { values_[key] = value; }

void Config::apply_override(std::string_view assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string_view::npos && !trim(assignment.substr(0, eq)).empty(),
          ErrorCode::schema, "override must be key=value: '" + std::string(assignment) + "'");
  set(std::string(trim(assignment.substr(0, eq))), std::string(trim(assignment.substr(eq + 1))));
}

const std::string& Config::get(const std::string& key) const {
  const auto it = values_.find(key);
  require(it != values_.end(), ErrorCode::schema, "missing config key '" + key + "'");
  return it->second;
}

std::string ResultRecord::to_json() const {
  nlohmann::ordered_json j;
  j["campaign"] = campaign;
  j["seed"] = seed;
  j["config"] = config;
  j["thresholds"] = thresholds;
  j["metrics"] = metrics;
  j["artifacts"] = artifacts;
  j["pass"] = pass;
  if (!error.empty()) j["error"] = error;
  return j.dump(2);
}

namespace {

class Context {
 public:
  Context(std::map<std::string, std::string> cfg, std::uint64_t seed, fs::path out,
          ResultRecord& rec)
      : cfg_(std::move(cfg)), seed_(seed), out_(std::move(out)), rec_(rec) {}

  std::uint64_t seed() const { return seed_; }
  const fs::path& out() const { return out_; }
  ResultRecord& record() { return rec_; }

  const std::string& text(const std::string& key) const { return cfg_.at(key); }
  bool is_auto(const std::string& key) const { return text(key) == "auto"; }

  double real(const std::string& key) const {
    try {
      return parse_real(text(key));
    } catch (const Error& e) {
      fail(ErrorCode::schema, "config key '" + key + "': " + e.what());
    }
  }

  int integer(const std::string& key) const {
    const std::string& v = text(key);
    int out = 0;
    const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    require(ec == std::errc() && ptr == v.data() + v.size(), ErrorCode::schema,
            "config key '" + key + "': expected an integer, got '" + v + "'");
    return out;
  }

  int positive(const std::string& key) const {
    const int v = integer(key);
    require(v >= 1, ErrorCode::schema, "config key '" + key + "' must be positive");
    return v;
  }

  Exponent exponent(const std::string& key) const {
    try {
      return Exponent::parse(text(key));
    } catch (const Error& e) {
      fail(ErrorCode::schema, "config key '" + key + "': " + e.what());
    }
  }

  std::vector<double> reals(const std::string& key) const {
    std::vector<double> out;
    std::string_view rest = text(key);
    while (!rest.empty()) {
      const auto comma = rest.find(',');
      try {
        out.push_back(parse_real(rest.substr(0, comma)));
      } catch (const Error& e) {
        fail(ErrorCode::schema, "config key '" + key + "': " + e.what());
      }
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    require(!out.empty(), ErrorCode::schema, "config key '" + key + "' is empty");
    return out;
  }

  Nonlinearity sign(const std::string& key) const {
    try {
      return parse_nonlinearity(text(key));
    } catch (const Error& e) {
      fail(ErrorCode::schema, "config key '" + key + "': " + e.what());
    }
  }

  /// Replaces an "auto" entry with its resolved value in the echoed config.
  double resolve(const std::string& key, double value) {
    cfg_[key] = format_real(value);
    rec_.config[key] = cfg_[key];
    return value;
  }

  double threshold(const std::string& key) {
    const double v = real(key);
    rec_.thresholds[key] = v;
    return v;
  }

  void metric(const std::string& key, double v) { rec_.metrics[key] = v; }

  std::ofstream open(const std::string& file) {
    std::ofstream os(out_ / file);
    require(static_cast<bool>(os), ErrorCode::io, "cannot write " + (out_ / file).string());
    os << std::setprecision(17);
    rec_.artifacts.push_back(file);
    return os;
  }

  void plot(const std::string& body) {
    auto os = open("plot.gp");
    os << "set datafile separator ','\n"
       << "set terminal pngcairo size 900,600\n"
       << "set output '" << rec_.campaign << ".png'\n"
       << "set key top left\n"
       << body;
  }

 private:
  std::map<std::string, std::string> cfg_;
  std::uint64_t seed_;
  fs::path out_;
  ResultRecord& rec_;
};

NormParams norm_params(const Context& c, int d) {
  return NormParams{d, c.exponent("p"), c.exponent("q"), c.real("s")};
}

GridSpec grid(const Context& c, int d) {
  const double length = c.real("length");
  require(length > 0.0, ErrorCode::schema, "config key 'length' must be positive");
  return GridSpec(d, 0.5 * length, c.positive("n"));
}

/// Unit Gaussian rescaled to modulation norm `norm`.
GridField scaled_gaussian(const DecompositionBasis& basis, const NormParams& params, double norm) {
  const GridField g = unit_gaussian(basis.spec());
  return (norm / mod_norm(basis, g, params)) * g;
}

PicardSettings picard_settings(const Context& c) {
  PicardSettings s;
  s.steps = c.positive("steps");
  s.tol = c.real("tol");
  s.max_iter = c.positive("max_iter");
  return s;
}

// ---------------------------------------------------------------- algebra

void run_algebra(Context& c) {
  const int d = c.positive("d");
  const Exponent q = c.exponent("q");
  const double s = c.real("s");
  const int pairs = c.positive("pairs");
  const int radius = c.positive("radius");
  const int split_pairs = c.positive("split_pairs");
  const double growth_tol = c.threshold("growth_tol");
  const double split_tol = c.threshold("split_tol");
  const bool admissible = NormParams{d, Exponent(2.0), q, s}.sufficiently_large();

  auto csv = c.open("ratios.csv");
  csv << "radius,pair,ratio\n";
  std::array<double, 2> worst{};
  for (int level = 0; level < 2; ++level) {
    const int R = radius << level;
    for (int i = 0; i < pairs; ++i) {
      const auto a = lattice_member(d, R, c.seed(), 2 * i, s);
      const auto b = lattice_member(d, R, c.seed(), 2 * i + 1, s);
      const double ratio =
          weighted_norm(convolve(a, b), q, s) / (weighted_norm(a, q, s) * weighted_norm(b, q, s));
      csv << R << ',' << i << ',' << ratio << '\n';
      worst[level] = std::max(worst[level], ratio);
    }
  }

  double split_error = 0.0;
  for (int i = 0; i < split_pairs; ++i) {
    const auto a = lattice_member(d, radius, c.seed(), 2 * i, s);
    const auto b = lattice_member(d, radius, c.seed(), 2 * i + 1, s);
    const auto direct = convolve(a, b);
    const auto split = algebra_convolution_split(a, b);
    LatticeSeq sum(d);
    for (const auto& piece : split.a_pieces) sum = sum + piece;
    for (const auto& piece : split.b_pieces) sum = sum + piece;
    double scale = 0.0;
    for (const auto& e : direct.entries()) scale = std::max(scale, std::abs(e.second));
    double diff = 0.0;
    for (const auto& e : (sum + direct.scaled(-1.0)).entries())
      diff = std::max(diff, std::abs(e.second));
    split_error = std::max(split_error, scale > 0.0 ? diff / scale : diff);
  }

  const double growth = worst[1] / worst[0] - 1.0;
  c.metric("sufficiently_large", admissible ? 1.0 : 0.0);
  c.metric("max_ratio_radius", worst[0]);
  c.metric("max_ratio_doubled", worst[1]);
  c.metric("growth", growth);
  c.metric("split_error", split_error);
  c.record().pass = admissible && std::isfinite(worst[1]) && growth <= growth_tol &&
                    split_error <= split_tol;
  c.plot("set xlabel 'pair'\nset ylabel 'convolution ratio'\n"
         "plot 'ratios.csv' every ::1 using 2:($1==" + std::to_string(radius) +
         " ? $3 : 1/0) title 'R' with points, "
         "'' every ::1 using 2:($1==" + std::to_string(2 * radius) +
         " ? $3 : 1/0) title '2R' with points\n");
}

// ---------------------------------------------------------------- holder

struct HolderPass {
  double worst = 0.0;
  double worst_refined = 0.0;
};

void run_holder(Context& c) {
  const int d = c.positive("d");
  const Exponent p = c.exponent("p"), p1 = c.exponent("p1"), p2 = c.exponent("p2");
  const Exponent q = c.exponent("q");
  const double s = c.resolve("s", c.is_auto("s") ? regularity_threshold(d, q) + c.real("s_offset")
                                                 : c.real("s"));
  const int counts[2] = {c.positive("calibration"), c.positive("validation")};
  const double ratio_factor = c.threshold("ratio_factor");
  const double refine_tol = c.threshold("refine_tol");

  const GridSpec coarse = grid(c, d);
  const GridSpec fine(d, coarse.half_length(), 2 * coarse.n());
  const auto basis = build_partition(coarse);
  const auto basis_fine = build_partition(fine);
  const double band = ProductDecomposer::product_band(basis);

  auto csv = c.open("ratios.csv");
  csv << "corpus,pair,kind,ratio,ratio_refined\n";
  HolderPass result[2];
  double change = 0.0;
  for (int which = 0; which < 2; ++which) {
    const std::size_t count = static_cast<std::size_t>(counts[which]);
    const std::uint64_t seed = c.seed() + static_cast<std::uint64_t>(which);
    for (const auto kind : {CorpusKind::gaussian, CorpusKind::band_limited_noise}) {
      const auto fs_coarse = field_corpus(kind, coarse, 2 * count, seed, band);
      const auto fs_fine = field_corpus(kind, fine, 2 * count, seed, band);
      for (std::size_t i = 0; i < count; ++i) {
        const double r = holder_ratio(basis, fs_coarse[i], fs_coarse[count + i], p, p1, p2, q, s);
        const double rf =
            holder_ratio(basis_fine, fs_fine[i], fs_fine[count + i], p, p1, p2, q, s);
        csv << (which == 0 ? "calibration" : "validation") << ',' << i << ','
            << corpus_kind_name(kind) << ',' << r << ',' << rf << '\n';
        result[which].worst = std::max(result[which].worst, r);
        result[which].worst_refined = std::max(result[which].worst_refined, rf);
        change = std::max(change, std::abs(rf / r - 1.0));
      }
    }
  }

  const double over = result[1].worst / result[0].worst;
  c.metric("calibration_max", result[0].worst);
  c.metric("validation_max", result[1].worst);
  c.metric("validation_over_calibration", over);
  c.metric("calibration_max_refined", result[0].worst_refined);
  c.metric("validation_max_refined", result[1].worst_refined);
  c.metric("refinement_change", change);
  c.record().pass = over <= ratio_factor && change <= refine_tol;
  c.plot("set xlabel 'pair'\nset ylabel 'Hoelder ratio'\n"
         "plot 'ratios.csv' every ::1 using 2:4 title 'n' with points, "
         "'' every ::1 using 2:5 title '2n' with points\n");
}

// ---------------------------------------------------------------- propagator-growth

void run_propagator_growth(Context& c) {
  const int d = c.positive("d");
  const NormParams params = norm_params(c, d);
  const double t_min = c.real("t_min"), t_max = c.real("t_max");
  const double length = c.is_auto("length")
                            ? c.resolve("length", std::max(720.0, required_domain_length(t_max)))
                            : c.real("length");
  const double exponent = propagator_exponent(params);
  const bool l2 = !params.p.is_inf() && params.p.value() == 2.0;
  if (c.is_auto("slope_target")) c.resolve("slope_target", exponent);
  if (c.is_auto("slope_tol")) c.resolve("slope_tol", l2 ? 0.02 : 0.05);
  const double slope_target = c.threshold("slope_target");
  const double slope_tol = c.threshold("slope_tol");
  const double conservation_tol = c.threshold("conservation_tol");

  const GridSpec spec(d, 0.5 * length, c.positive("n"));
  const auto basis = build_partition(spec);
  const auto times = log_spaced_times(t_min, t_max, c.positive("times"));
  const GridField f = unit_gaussian(spec);
  const auto fit = modnorm_growth(basis, f, params, times);
  const double norm0 = mod_norm(basis, f, params);
  double conservation = 0.0;
  for (double v : fit.norms) conservation = std::max(conservation, std::abs(v / norm0 - 1.0));

  const auto corpus = field_corpus(CorpusKind::gaussian, spec,
                                   static_cast<std::size_t>(c.positive("envelope_count")),
                                   c.seed(), c.real("envelope_band"));
  const auto envelope = bound_envelope_check(basis, corpus, params, times);

  {
    auto csv = c.open("growth.csv");
    write_growth_csv(csv, fit);
  }
  c.metric("slope", fit.fitted_slope);
  c.metric("slope_stderr", fit.slope_stderr);
  c.metric("intercept", fit.intercept);
  c.metric("exponent", exponent);
  c.metric("initial_norm", norm0);
  c.metric("conservation_error", conservation);
  c.metric("envelope_holds", envelope.holds ? 1.0 : 0.0);
  c.metric("envelope_c_fit", envelope.c_fit);
  c.metric("envelope_worst_margin", envelope.worst_margin);
  c.record().pass = std::abs(fit.fitted_slope - slope_target) <= slope_tol && envelope.holds &&
                    (!l2 || conservation <= conservation_tol);
  c.plot("set logscale xy\nset xlabel '1 + t'\nset ylabel 'modulation norm'\n"
         "plot 'growth.csv' every ::1 using (1+$1):2 title 'norm' with linespoints\n");
}

// ---------------------------------------------------------------- product-decomp

void run_product_decomp(Context& c) {
  const int d = c.positive("d");
  const GridSpec spec = grid(c, d);
  const auto basis = build_partition(spec, c.positive("K"));
  const double band = c.is_auto("band")
                          ? c.resolve("band", ProductDecomposer::product_band(basis))
                          : c.real("band");
  const std::size_t pairs = static_cast<std::size_t>(c.positive("pairs"));
  const double tol = c.threshold("tol");

  const auto corpus = field_corpus(CorpusKind::band_limited_noise, spec, 2 * pairs, c.seed(), band);
  const auto idx = basis.indices();
  std::vector<double> per_k(idx.size(), 0.0);
  ProductCheck last;
  for (std::size_t i = 0; i < pairs; ++i) {
    const ProductDecomposer dec(basis, corpus[2 * i], corpus[2 * i + 1]);
    for (std::size_t j = 0; j < idx.size(); ++j) {
      last = dec.check(idx[j]);
      per_k[j] = std::max(per_k[j], last.discrepancy);
    }
  }
  const double worst = *std::max_element(per_k.begin(), per_k.end());

  auto csv = c.open("discrepancy.csv");
  csv << "k,max_discrepancy\n";
  for (std::size_t j = 0; j < idx.size(); ++j) {
    for (int a = 0; a < d; ++a) csv << (a ? ":" : "") << idx[j][a];
    csv << ',' << per_k[j] << '\n';
  }
  c.metric("max_discrepancy", worst);
  c.metric("offsets", static_cast<double>(last.offsets));
  c.metric("offset_bound", last.offset_bound);
  c.metric("covered_indices", static_cast<double>(idx.size()));
  c.record().pass = worst <= tol && static_cast<double>(last.offsets) <= last.offset_bound;
  c.plot("set logscale y\nset xlabel 'k (row)'\nset ylabel 'relative sup error'\n"
         "plot 'discrepancy.csv' every ::1 using 0:2 title 'max over pairs' with points\n");
}

// ---------------------------------------------------------------- embeddings

struct Ordering {
  NormParams from, to;
  std::string label;
};

std::vector<Ordering> parse_orderings(const Context& c, int d) {
  std::vector<Ordering> out;
  std::string_view rest = c.text("orderings");
  const auto triple = [&](std::string_view t) {
    NormParams np;
    np.d = d;
    std::string_view parts[3];
    for (int i = 0; i < 3; ++i) {
      const auto slash = t.find(',');
      require((slash == std::string_view::npos) == (i == 2), ErrorCode::schema,
              "config key 'orderings': expected p,q,s, got '" + std::string(t) + "'");
      parts[i] = trim(t.substr(0, slash));
      t = i == 2 ? std::string_view{} : t.substr(slash + 1);
    }
    try {
      np.p = Exponent::parse(parts[0]);
      np.q = Exponent::parse(parts[1]);
      np.s = parse_real(parts[2]);
    } catch (const Error& e) {
      fail(ErrorCode::schema, std::string("config key 'orderings': ") + e.what());
    }
    return np;
  };
  while (!rest.empty()) {
    const auto semi = rest.find(';');
    const std::string_view item = trim(rest.substr(0, semi));
    rest = semi == std::string_view::npos ? std::string_view{} : rest.substr(semi + 1);
    if (item.empty()) continue;
    const auto gt = item.find('>');
    require(gt != std::string_view::npos, ErrorCode::schema,
            "config key 'orderings': expected from>to, got '" + std::string(item) + "'");
    out.push_back({triple(item.substr(0, gt)), triple(item.substr(gt + 1)), std::string(item)});
  }
  require(!out.empty(), ErrorCode::schema, "config key 'orderings' is empty");
  return out;
}

void run_embeddings(Context& c) {
  const int d = c.positive("d");
  const GridSpec spec = grid(c, d);
  const auto basis = build_partition(spec);
  const auto orderings = parse_orderings(c, d);
  const std::size_t count = static_cast<std::size_t>(c.positive("count"));
  const double max_failures = c.threshold("max_failures");

  const CorpusKind kinds[3] = {CorpusKind::gaussian, CorpusKind::plane_wave,
                               CorpusKind::band_limited_noise};
  std::vector<std::pair<CorpusKind, GridField>> corpus;
  for (int k = 0; k < 3; ++k) {
    const std::size_t share = count / 3 + (static_cast<std::size_t>(k) < count % 3 ? 1 : 0);
    if (share == 0) continue;
    for (auto& f : field_corpus(kinds[k], spec, share, c.seed() + static_cast<std::uint64_t>(k),
                                basis.covered_band()))
      corpus.emplace_back(kinds[k], std::move(f));
  }

  auto csv = c.open("embeddings.csv");
  csv << "member,kind,check,lhs,rhs\n";
  int failures = 0;
  std::vector<double> worst(orderings.size(), 0.0);
  double sup_worst = 0.0;
  for (std::size_t m = 0; m < corpus.size(); ++m) {
    const auto& [kind, f] = corpus[m];
    for (std::size_t o = 0; o < orderings.size(); ++o) {
      const auto chk = embedding_check(f, basis, orderings[o].from, orderings[o].to);
      csv << m << ',' << corpus_kind_name(kind) << ',' << orderings[o].label << ',' << chk.lhs
          << ',' << chk.rhs << '\n';
      worst[o] = std::max(worst[o], chk.lhs / chk.rhs);
      failures += chk.holds ? 0 : 1;
    }
    const auto sup = sup_norm_bound(f, basis);
    csv << m << ',' << corpus_kind_name(kind) << ",sup," << sup.sup << ',' << sup.bound << '\n';
    sup_worst = std::max(sup_worst, sup.sup / sup.bound);
    failures += sup.holds ? 0 : 1;
  }
  for (std::size_t o = 0; o < orderings.size(); ++o)
    c.metric("worst_ratio_" + std::to_string(o), worst[o]);
  c.metric("sup_worst_ratio", sup_worst);
  c.metric("members", static_cast<double>(corpus.size()));
  c.metric("failures", failures);
  c.record().pass = failures <= max_failures;
  c.plot("set xlabel 'member'\nset ylabel 'lhs / rhs'\n"
         "plot 'embeddings.csv' every ::1 using 1:($4/$5) title 'ratio' with points\n");
}

// ---------------------------------------------------------------- peetre

void run_peetre(Context& c) {
  const double s = c.real("s");
  const int R = c.positive("R");
  const int d = c.positive("d");
  const double max_ratio = c.threshold("max_ratio");
  auto csv = c.open("peetre.csv");
  csv << "radius,worst_ratio,pairs\n";
  PeetreResult full;
  for (int r = 1;; r = std::min(2 * r, R)) {
    const auto res = peetre_scan(s, r, d);
    csv << r << ',' << res.worst_ratio << ',' << res.pairs << '\n';
    if (r == R) {
      full = res;
      break;
    }
  }
  c.metric("worst_ratio", full.worst_ratio);
  c.metric("pairs", static_cast<double>(full.pairs));
  c.metric("holds", full.holds ? 1.0 : 0.0);
  c.record().pass = full.holds && full.worst_ratio <= max_ratio;
  c.plot("set xlabel 'R'\nset ylabel 'worst lhs / rhs'\n"
         "plot 'peetre.csv' every ::1 using 1:2 title 'worst ratio' with linespoints\n");
}

// ---------------------------------------------------------------- nls-solve

void run_nls_solve(Context& c) {
  const int d = c.positive("d");
  const NormParams params = norm_params(c, d);
  const GridSpec spec = grid(c, d);
  const auto basis = build_partition(spec);
  const Nonlinearity sign = c.sign("sign");
  const double horizon = c.real("T");
  const PicardSettings settings = picard_settings(c);
  const int substeps = c.positive("oracle_substeps");
  require(substeps % settings.steps == 0, ErrorCode::schema,
          "config key 'oracle_substeps' must be a multiple of 'steps'");
  const double factor_max = c.threshold("factor_max");
  const double defect_max = c.threshold("defect_max");
  const double oracle_max = c.threshold("oracle_max");
  const double drift_max = c.threshold("mass_drift_max");

  const GridField u0 = scaled_gaussian(basis, params, c.real("norm"));
  const auto run = picard_solve(u0, horizon, sign, basis, params, settings);
  {
    auto js = c.open("picard.json");
    js << picard_run_json(run, c.seed()) << '\n';
  }
  {
    auto csv = c.open("factors.csv");
    csv << "iteration,residual,factor\n";
    for (std::size_t i = 0; i < run.residuals.size(); ++i) {
      csv << i + 1 << ',' << run.residuals[i] << ',';
      if (i >= 1 && i - 1 < run.contraction_factors.size()) csv << run.contraction_factors[i - 1];
      csv << '\n';
    }
  }
  c.metric("converged", run.status == PicardStatus::converged ? 1.0 : 0.0);
  c.metric("iterations", run.iterations);
  c.metric("max_factor", run.max_factor());
  c.metric("defect", run.defect);
  c.metric("radius", run.radius);
  c.metric("c_hom", run.c_hom);
  c.metric("data_norm", run.data_norm);
  c.metric("overflow_node", run.overflow_node);
  if (!run.solution) {
    c.record().error = std::string("picard iteration ended with status ") +
                       picard_status_name(run.status);
    c.plot("set logscale y\nset xlabel 'iteration'\nset ylabel 'increment'\n"
           "plot 'factors.csv' every ::1 using 1:2 title 'residual' with linespoints\n");
    return;
  }
  const Trajectory& u = *run.solution;
  const auto reference = split_step_reference(u0, u.grid, sign, substeps / settings.steps);
  const double oracle = max_node_l2_distance(u, reference);
  const double drift = mass_drift(u);
  const auto index = write_trajectory(c.out() / "trajectory", "u", u);
  c.record().artifacts.push_back(fs::relative(index, c.out()).string());
  {
    auto csv = c.open("nodes.csv");
    csv << "t,l2,modnorm,oracle_distance\n";
    for (std::size_t j = 0; j < u.fields.size(); ++j) {
      const GridField diff = u.fields[j] - reference.fields[j];
      csv << u.grid.node(static_cast<int>(j)) << ',' << lp_norm(u.fields[j], Exponent(2.0)) << ','
          << mod_norm(basis, u.fields[j], params) << ',' << lp_norm(diff, Exponent(2.0)) << '\n';
    }
  }
  c.metric("oracle_distance", oracle);
  c.metric("mass_drift", drift);
  c.record().pass = run.status == PicardStatus::converged && run.contracts(factor_max) &&
                    run.defect <= defect_max && oracle <= oracle_max && drift <= drift_max;
  c.plot("set logscale y\nset xlabel 'iteration'\nset ylabel 'increment'\n"
         "plot 'factors.csv' every ::1 using 1:2 title 'residual' with linespoints\n");
}

// ---------------------------------------------------------------- existence-scan

void run_existence_scan(Context& c) {
  const int d = c.positive("d");
  const NormParams params = norm_params(c, d);
  const GridSpec spec = grid(c, d);
  const auto basis = build_partition(spec);
  const auto lambdas = c.reals("lambdas");
  ScanSettings settings;
  settings.picard = picard_settings(c);
  settings.t_floor = c.real("t_floor");
  settings.t_ceiling = c.real("t_ceiling");
  settings.bisection_steps = c.positive("bisection_steps");
  settings.factor_limit = c.threshold("factor_limit");
  const double slope_target = c.threshold("slope_target");
  const double slope_tol = c.threshold("slope_tol");
  const double min_fitted = c.threshold("min_fitted");

  const GridField u0 = c.real("amplitude") * unit_gaussian(spec);
  const auto scan = existence_time_scan(u0, lambdas, c.sign("sign"), basis, params, settings);

  auto csv = c.open("scan.csv");
  csv << "lambda,data_norm,t_star,censored,floored,envelope\n";
  int censored = 0;
  for (std::size_t i = 0; i < scan.points.size(); ++i) {
    const auto& pt = scan.points[i];
    csv << pt.lambda << ',' << pt.data_norm << ',' << pt.t_star << ',' << pt.censored << ','
        << pt.floored << ',' << scan.envelope_horizon[i] << '\n';
    c.metric("t_star_" + std::to_string(i), pt.t_star);
    c.metric("data_norm_" + std::to_string(i), pt.data_norm);
    censored += (pt.censored || pt.floored) ? 1 : 0;
  }
  c.metric("slope", scan.slope);
  c.metric("slope_stderr", scan.slope_stderr);
  c.metric("fitted", static_cast<double>(scan.fitted));
  c.metric("excluded", censored);
  c.record().pass = static_cast<double>(scan.fitted) >= min_fitted &&
                    std::abs(scan.slope - slope_target) <= slope_tol;
  c.plot("set logscale xy\nset xlabel 'data norm'\nset ylabel 'certified horizon'\n"
         "plot 'scan.csv' every ::1 using 2:3 title 'T*' with linespoints, "
         "'' every ::1 using 2:6 title 'envelope' with lines\n");
}

// ---------------------------------------------------------------- lipschitz

void run_lipschitz(Context& c) {
  const int d = c.positive("d");
  const NormParams params = norm_params(c, d);
  const GridSpec spec = grid(c, d);
  const auto basis = build_partition(spec);
  const Nonlinearity sign = c.sign("sign");
  const double horizon = c.real("T");
  const double eps = c.real("eps");
  const PicardSettings settings = picard_settings(c);
  const double factor_limit = c.threshold("factor_limit");
  const double max_bound_ratio = c.threshold("max_bound_ratio");

  const GridField u0 = scaled_gaussian(basis, params, c.real("norm"));
  const GridField bump = GridField::from_function(spec, [&](std::span<const double> x) {
    double r2 = 0.0;
    for (double xi : x) r2 += (xi - 3.0) * (xi - 3.0);
    return eps * std::exp(-r2) * std::polar(1.0, 2.0 * x[0]);
  });
  const std::pair<const char*, GridField> perturbations[3] = {
      {"scale", cplx(1.0 + eps) * u0},
      {"bump", u0 + bump},
      {"phase", std::polar(1.0, eps) * u0},
  };

  auto csv = c.open("lipschitz.csv");
  csv << "perturbation,data_distance,solution_distance,ratio,kappa,c_hom,bound\n";
  bool holds = true;
  double worst = 0.0;
  for (const auto& [name, v0] : perturbations) {
    const auto r = lipschitz_check(u0, v0, sign, basis, params, horizon, settings, factor_limit);
    csv << name << ',' << r.data_distance << ',' << r.solution_distance << ',' << r.ratio << ','
        << r.kappa << ',' << r.c_hom << ',' << r.bound << '\n';
    const std::string key(name);
    c.metric("ratio_" + key, r.ratio);
    c.metric("bound_" + key, r.bound);
    c.metric("kappa_" + key, r.kappa);
    holds = holds && r.holds;
    worst = std::max(worst, r.ratio / r.bound);
  }
  c.metric("worst_bound_ratio", worst);
  c.record().pass = holds && worst <= max_bound_ratio;
  c.plot("set style data histograms\nset ylabel 'ratio'\n"
         "plot 'lipschitz.csv' every ::1 using 4:xtic(1) title 'measured', "
         "'' every ::1 using 7 title 'bound'\n");
}

// ---------------------------------------------------------------- table

using Defaults = std::vector<std::pair<std::string, std::string>>;

struct CampaignDef {
  CampaignInfo info;
  Defaults defaults;
  std::function<void(Context&)> run;
};

const Defaults kNlsBase = {
    {"d", "1"},         {"n", "1024"},       {"length", "40"},  {"p", "2"},
    {"q", "1"},         {"s", "1"},          {"sign", "defocusing"},
    {"steps", "64"},    {"tol", "1e-10"},    {"max_iter", "100"},
};

Defaults with(Defaults base, const Defaults& extra) {
  base.insert(base.end(), extra.begin(), extra.end());
  return base;
}

const std::vector<CampaignDef>& table() {
  static const std::vector<CampaignDef> defs = {
      {{"algebra", "convolution-norm ratio of random lattice pairs and exact splitting"},
       {{"d", "1"}, {"q", "1"}, {"s", "0"}, {"pairs", "10000"}, {"radius", "8"},
        {"split_pairs", "50"}, {"growth_tol", "0.1"}, {"split_tol", "1e-12"}},
       run_algebra},
      {{"holder", "product ratio on calibration and validation corpora, with grid refinement"},
       {{"d", "1"}, {"p", "1"}, {"p1", "2"}, {"p2", "2"}, {"q", "1"}, {"s", "auto"},
        {"s_offset", "0.25"}, {"n", "512"}, {"length", "16pi"}, {"calibration", "20"},
        {"validation", "20"}, {"ratio_factor", "1.1"}, {"refine_tol", "0.1"}},
       run_holder},
      {{"propagator-growth", "log-log growth of the evolved Gaussian norm and the bound envelope"},
       {{"d", "1"}, {"p", "1"}, {"q", "1"}, {"s", "0"}, {"n", "4096"}, {"length", "auto"},
        {"t_min", "1"}, {"t_max", "30"}, {"times", "20"}, {"envelope_count", "5"},
        {"envelope_band", "4"}, {"slope_target", "auto"}, {"slope_tol", "auto"},
        {"conservation_tol", "1e-10"}},
       run_propagator_growth},
      {{"product-decomp", "direct versus decomposed box of a product on random pairs"},
       {{"d", "1"}, {"K", "16"}, {"n", "512"}, {"length", "16pi"}, {"pairs", "100"},
        {"band", "auto"}, {"tol", "1e-8"}},
       run_product_decomp},
      {{"embeddings", "modulation-space embeddings and the sup bound on a mixed corpus"},
       {{"d", "1"}, {"n", "512"}, {"length", "16pi"}, {"count", "50"},
        {"orderings", "1,1,1>2,2,0;2,1,0>inf,inf,0;4/3,1,1.5>inf,2,1"}, {"max_failures", "0"}},
       run_embeddings},
      {{"peetre", "exhaustive Peetre inequality scan"},
       {{"s", "2"}, {"R", "64"}, {"d", "1"}, {"max_ratio", "1"}},
       run_peetre},
      {{"nls-solve", "Picard solve of the cubic equation against a split-step reference"},
       with(kNlsBase, {{"norm", "0.1"}, {"T", "0.2"}, {"oracle_substeps", "256"},
                       {"factor_max", "0.9"}, {"defect_max", "1e-8"}, {"oracle_max", "1e-5"},
                       {"mass_drift_max", "1e-4"}}),
       run_nls_solve},
      {{"existence-scan", "certified existence horizon against data norm"},
       with(kNlsBase, {{"amplitude", "8"}, {"lambdas", "0.5,1,2,4"}, {"t_floor", "1e-5"},
                       {"t_ceiling", "10"}, {"bisection_steps", "30"}, {"factor_limit", "0.9"},
                       {"slope_target", "-2"}, {"slope_tol", "0.3"}, {"min_fitted", "2"}}),
       run_existence_scan},
      {{"lipschitz", "solution distance against data distance for three perturbations"},
       with(kNlsBase, {{"norm", "0.1"}, {"T", "0.2"}, {"eps", "1e-3"}, {"factor_limit", "0.9"},
                       {"max_bound_ratio", "1"}}),
       run_lipschitz},
  };
  return defs;
}

const CampaignDef& find_campaign(std::string_view name) {
  for (const auto& def : table())
    if (def.info.name == name) return def;
  fail(ErrorCode::schema, "unknown campaign '" + std::string(name) + "'");
}

}  // namespace

const std::vector<CampaignInfo>& campaigns() {
  static const std::vector<CampaignInfo> infos = [] {
    std::vector<CampaignInfo> out;
    for (const auto& def : table()) out.push_back(def.info);
    return out;
  }();
  return infos;
}

Config campaign_defaults(std::string_view name) {
  Config c;
  for (const auto& [k, v] : find_campaign(name).defaults) c.set(k, v);
  return c;
}

ResultRecord run_campaign(std::string_view name, const Config& config, std::uint64_t seed,
                          const fs::path& out_dir) {
  const CampaignDef& def = find_campaign(name);
  std::map<std::string, std::string> resolved;
  for (const auto& [k, v] : def.defaults) resolved[k] = v;
  for (const auto& [k, v] : config.values()) {
    require(resolved.count(k) != 0, ErrorCode::schema,
            "unknown config key '" + k + "' for campaign " + def.info.name);
    resolved[k] = v;
  }

  ResultRecord rec;
  rec.campaign = def.info.name;
  rec.seed = seed;
  rec.config = resolved;

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  require(!ec, ErrorCode::io, "cannot create output directory " + out_dir.string());

  Context ctx(resolved, seed, out_dir, rec);
  try {
    def.run(ctx);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::schema) throw;
    rec.pass = false;
    rec.error = std::string(error_code_name(e.code())) + ": " + e.what();
  } catch (const std::exception& e) {
    rec.pass = false;
    rec.error = e.what();
  }
  if (!rec.error.empty()) rec.pass = false;

  rec.artifacts.insert(rec.artifacts.begin(), "record.json");
  std::ofstream os(out_dir / "record.json");
  require(static_cast<bool>(os), ErrorCode::io, "cannot write record.json");
  os << rec.to_json() << '\n';
  return rec;
}

}  // namespace modnls
