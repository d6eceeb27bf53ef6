#include "modnls/propagator.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

#include "modnls/error.hpp"
#include "modnls/modnorm.hpp"

namespace modnls {

PropagatorPlan::PropagatorPlan(const GridSpec& spec, double t) : spec_(spec), t_(t) {
  require(std::isfinite(t), ErrorCode::invalid_argument, "propagator time must be finite");
  const auto xi2 = frequency_sq(spec);
  phase_.resize(xi2.size());
  for (std::size_t j = 0; j < xi2.size(); ++j) phase_[j] = std::polar(1.0, -t * xi2[j]);
}

void PropagatorPlan::apply_spectrum(std::span<cplx> spectrum) const {
  require(spectrum.size() == phase_.size(), ErrorCode::spec_mismatch,
          "spectrum size differs from propagator grid");
  for (std::size_t j = 0; j < phase_.size(); ++j) spectrum[j] *= phase_[j];
}

GridField evolve(const PropagatorPlan& plan, const GridField& f) {
  require(plan.spec() == f.spec(), ErrorCode::spec_mismatch,
          "field grid differs from propagator grid");
  if (plan.time() == 0.0) return f;
  auto spectrum = forward_dft(f);
  plan.apply_spectrum(spectrum);
  return inverse_dft(f.spec(), std::move(spectrum));
}

GridField evolve(double t, const GridField& f) { return evolve(PropagatorPlan(f.spec(), t), f); }

double group_law_check(const GridSpec& spec, double t1, double t2, const GridField& f) {
  require(spec == f.spec(), ErrorCode::spec_mismatch, "field grid differs from propagator grid");
  const double base = lp_norm(f, Exponent(2.0));
  if (base == 0.0) return 0.0;
  const auto once = evolve(PropagatorPlan(spec, t1 + t2), f);
  const auto twice = evolve(PropagatorPlan(spec, t2), evolve(PropagatorPlan(spec, t1), f));
  return lp_norm(once - twice, Exponent(2.0)) / base;
}

GrowthFit fit_loglog(std::vector<double> times, std::vector<double> norms) {
  require(times.size() == norms.size() && times.size() >= 2, ErrorCode::invalid_argument,
          "growth fit needs two or more (t, norm) pairs");
  for (std::size_t i = 0; i < times.size(); ++i) {
    require(times[i] >= 0.0 && norms[i] > 0.0, ErrorCode::invalid_argument,
            "growth fit needs nonnegative times and positive norms");
    require(i == 0 || times[i] > times[i - 1], ErrorCode::invalid_argument,
            "growth fit times must be strictly increasing");
  }
  const std::size_t n = times.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log1p(times[i]);
    my += std::log(norms[i]);
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x = std::log1p(times[i]) - mx;
    sxx += x * x;
    sxy += x * (std::log(norms[i]) - my);
  }
  GrowthFit fit;
  fit.fitted_slope = sxy / sxx;
  fit.intercept = my - fit.fitted_slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = std::log(norms[i]) - fit.intercept - fit.fitted_slope * std::log1p(times[i]);
      ssr += r * r;
    }
    fit.slope_stderr = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  }
  fit.times = std::move(times);
  fit.norms = std::move(norms);
  return fit;
}

std::vector<double> log_spaced_times(double a, double b, int count) {
  require(a > 0.0 && b > a && count >= 2, ErrorCode::invalid_argument,
          "log spacing needs 0 < a < b and two or more points");
  std::vector<double> out(count);
  const double la = std::log(a), lb = std::log(b);
  for (int i = 0; i < count; ++i) out[i] = std::exp(la + (lb - la) * i / (count - 1));
  out.front() = a;
  out.back() = b;
  return out;
}

double boundary_mass_fraction(const GridField& f, double strip) {
  const auto& spec = f.spec();
  const double edge = (0.5 - strip) * spec.length();
  double total = 0.0, outer = 0.0;
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const double m = std::norm(f[i]);
    total += m;
    const auto idx = spec.unflatten(i);
    bool near = false;
    for (int a = 0; a < spec.dim(); ++a) near = near || std::abs(spec.coord(idx[a])) >= edge;
    if (near) outer += m;
  }
  return total == 0.0 ? 0.0 : outer / total;
}

void require_resolved(const GridField& f, double t) {
  const double frac = boundary_mass_fraction(f);
  if (frac > kWraparoundTolerance)
    fail(ErrorCode::domain_too_small, "domain too small: boundary mass fraction " +
                                          std::to_string(frac) + " at t = " + std::to_string(t));
}

double required_domain_length(double t_max) { return 12.0 * std::sqrt(1.0 + 4.0 * t_max * t_max); }

double propagator_exponent(const NormParams& params) noexcept {
  return params.d * std::abs(0.5 - params.p.reciprocal());
}

namespace {

// Norm at each time from one forward transform.
std::vector<double> evolved_norms(const DecompositionBasis& basis, const GridField& f,
                                  const NormParams& params, std::span<const double> times) {
  require(basis.spec() == f.spec(), ErrorCode::spec_mismatch, "field grid differs from basis grid");
  require(params.d == f.spec().dim(), ErrorCode::dimension_mismatch,
          "norm parameters dimension differs from grid dimension");
  for (std::size_t i = 0; i < times.size(); ++i)
    require(times[i] >= 0.0 && (i == 0 || times[i] > times[i - 1]), ErrorCode::invalid_argument,
            "times must be nonnegative and strictly increasing");
  require_band_limited(f, basis.covered_band(), "field");
  const auto spectrum = forward_dft(f);
  std::vector<double> out;
  out.reserve(times.size());
  for (double t : times) {
    auto evolved = spectrum;
    PropagatorPlan(f.spec(), t).apply_spectrum(evolved);
    require_resolved(inverse_dft(f.spec(), evolved), t);
    out.push_back(
        profile_norm(basis, box_norm_profile(basis, evolved, params.p), params.q, params.s));
  }
  return out;
}

}  // namespace

GrowthFit modnorm_growth(const DecompositionBasis& basis, const GridField& f,
                         const NormParams& params, std::span<const double> times) {
  auto norms = evolved_norms(basis, f, params, times);
  return fit_loglog(std::vector<double>(times.begin(), times.end()), std::move(norms));
}

EnvelopeCheck bound_envelope_check(const DecompositionBasis& basis,
                                   std::span<const GridField> corpus, const NormParams& params,
                                   std::span<const double> times) {
  require(!corpus.empty() && !times.empty(), ErrorCode::invalid_argument,
          "envelope check needs a corpus and times");
  EnvelopeCheck out;
  out.exponent = propagator_exponent(params);
  const double t_max = times.back();
  std::vector<std::vector<double>> ratios;
  for (const auto& f : corpus) {
    const double base = evolved_norms(basis, f, params, std::vector<double>{0.0}).front();
    require(base > 0.0, ErrorCode::zero_norm, "zero-norm input");
    auto norms = evolved_norms(basis, f, params, times);
    for (auto& v : norms) v /= base;
    out.c_fit = std::max(out.c_fit, norms.back() / std::pow(1.0 + t_max, out.exponent));
    ratios.push_back(std::move(norms));
  }
  for (const auto& r : ratios)
    for (std::size_t i = 0; i < times.size(); ++i) {
      const double margin = r[i] / (out.c_fit * std::pow(1.0 + times[i], out.exponent));
      out.worst_margin = std::max(out.worst_margin, margin);
    }
  out.holds = out.worst_margin <= 1.0 + 1e-12;
  return out;
}

void write_growth_csv(std::ostream& os, const GrowthFit& fit) {
  os << std::setprecision(17) << "t,norm\n";
  for (std::size_t i = 0; i < fit.times.size(); ++i)
    os << fit.times[i] << ',' << fit.norms[i] << '\n';
  os << "fit," << fit.fitted_slope << ',' << fit.slope_stderr << '\n';
}

}  // namespace modnls
