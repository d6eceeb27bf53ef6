#include "modnls/nls_solver.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "modnls/error.hpp"
#include "modnls/modnorm.hpp"
#include "modnls/propagator.hpp"

namespace modnls {

namespace {

using Spectra = std::vector<std::vector<cplx>>;

double spectrum_norm(const DecompositionBasis& basis, std::span<const cplx> spectrum,
                     const NormParams& params) {
  return profile_norm(basis, box_norm_profile(basis, spectrum, params.p), params.q, params.s);
}

void check_params(const DecompositionBasis& basis, const GridSpec& spec, const NormParams& params) {
  require(basis.spec() == spec, ErrorCode::spec_mismatch, "field grid differs from basis grid");
  require(params.d == spec.dim(), ErrorCode::dimension_mismatch,
          "norm parameters dimension differs from grid dimension");
}

std::vector<std::vector<cplx>> node_phases(const GridSpec& spec, const TimeGrid& grid) {
  std::vector<std::vector<cplx>> out;
  out.reserve(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const PropagatorPlan plan(spec, grid.node(static_cast<int>(j)));
    out.emplace_back(plan.phase().begin(), plan.phase().end());
  }
  return out;
}

// One Duhamel application on spectra; returns the first overflowing node or -1.
int duhamel_spectra(const GridSpec& spec, const TimeGrid& grid,
                    const std::vector<std::vector<cplx>>& phases, std::span<const cplx> u0_hat,
                    const Spectra& in, Nonlinearity sign, double coefficient, Spectra& out) {
  const double band = cubic_band(spec);
  for (std::size_t j = 0; j < in.size(); ++j)
    if (spectral_excess(spec, in[j], band) > kSpectralTolerance) return static_cast<int>(j);

  const std::size_t nodes = in.size();
  const std::size_t size = spec.size();
  const cplx factor = static_cast<double>(static_cast<int>(sign)) * coefficient * cplx(0.0, 1.0);
  const double h = grid.step();
  std::vector<cplx> buf(size), prefix(size, cplx(0.0)), first(size);
  out.assign(nodes, std::vector<cplx>(size));
  for (std::size_t j = 0; j < nodes; ++j) {
    // W_j = e^{i t_j |xi|^2} F(|u_j|^2 u_j)
    std::copy(in[j].begin(), in[j].end(), buf.begin());
    dft_inplace(spec, buf, true);
    for (auto& v : buf) v *= std::norm(v);
    dft_inplace(spec, buf, false);
    for (std::size_t m = 0; m < size; ++m) buf[m] *= std::conj(phases[j][m]);
    if (j == 0) first = buf;
    for (std::size_t m = 0; m < size; ++m) {
      prefix[m] += buf[m];
      const cplx integral = j == 0 ? cplx(0.0) : h * (prefix[m] - 0.5 * first[m] - 0.5 * buf[m]);
      out[j][m] = phases[j][m] * (u0_hat[m] + factor * integral);
    }
  }
  return -1;
}

Spectra to_spectra(const Trajectory& u) {
  Spectra out;
  out.reserve(u.fields.size());
  for (const auto& f : u.fields) out.push_back(forward_dft(f));
  return out;
}

Trajectory to_trajectory(const GridSpec& spec, const TimeGrid& grid, Spectra spectra) {
  std::vector<GridField> fields;
  fields.reserve(spectra.size());
  for (auto& s : spectra) fields.push_back(inverse_dft(spec, std::move(s)));
  return Trajectory(grid, std::move(fields));
}

double spectra_distance(const DecompositionBasis& basis, const Spectra& a, const Spectra& b,
                        const NormParams& params) {
  double out = 0.0;
  std::vector<cplx> diff;
  for (std::size_t j = 0; j < a.size(); ++j) {
    diff.resize(a[j].size());
    for (std::size_t m = 0; m < diff.size(); ++m) diff[m] = a[j][m] - b[j][m];
    out = std::max(out, spectrum_norm(basis, diff, params));
  }
  return out;
}

double linear_slope(std::span<const double> xs, std::span<const double> ys, double* stderr_out) {
  const std::size_t n = xs.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  const double slope = sxy / sxx;
  double ssr = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ys[i] - my - slope * (xs[i] - mx);
    ssr += r * r;
  }
  *stderr_out = n > 2 ? std::sqrt(ssr / static_cast<double>(n - 2) / sxx) : 0.0;
  return slope;
}

}  // namespace

// --------------------------------------------------------------- time grid

TimeGrid::TimeGrid(double horizon, int steps) : horizon_(horizon), steps_(steps) {
  require(std::isfinite(horizon) && horizon > 0.0, ErrorCode::invalid_argument,
          "time horizon must be positive");
  require(steps >= 8, ErrorCode::invalid_argument, "time grid needs at least 8 steps");
}

Trajectory::Trajectory(const TimeGrid& g, std::vector<GridField> f) : grid(g), fields(std::move(f)) {
  require(fields.size() == grid.size(), ErrorCode::invalid_argument,
          "trajectory needs one field per time node");
  for (const auto& field : fields)
    require(field.spec() == fields.front().spec(), ErrorCode::spec_mismatch,
            "trajectory fields must share one grid");
}

Trajectory Trajectory::constant(const TimeGrid& g, const GridField& f) {
  return Trajectory(g, std::vector<GridField>(g.size(), f));
}

Trajectory free_evolution(const GridField& u0, const TimeGrid& grid) {
  std::vector<GridField> fields;
  fields.reserve(grid.size());
  const auto spectrum = forward_dft(u0);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    auto s = spectrum;
    PropagatorPlan(u0.spec(), grid.node(static_cast<int>(j))).apply_spectrum(s);
    fields.push_back(inverse_dft(u0.spec(), std::move(s)));
  }
  return Trajectory(grid, std::move(fields));
}

double trajectory_norm(const DecompositionBasis& basis, const Trajectory& u,
                       const NormParams& params) {
  check_params(basis, u.spec(), params);
  double out = 0.0;
  for (const auto& f : u.fields) out = std::max(out, spectrum_norm(basis, forward_dft(f), params));
  return out;
}

double trajectory_distance(const DecompositionBasis& basis, const Trajectory& u,
                           const Trajectory& v, const NormParams& params) {
  require(u.fields.size() == v.fields.size() && u.spec() == v.spec(), ErrorCode::spec_mismatch,
          "trajectories live on different grids");
  check_params(basis, u.spec(), params);
  return spectra_distance(basis, to_spectra(u), to_spectra(v), params);
}

double mass_drift(const Trajectory& u) {
  const double m0 = lp_norm(u.fields.front(), Exponent(2.0));
  if (m0 == 0.0) return 0.0;
  double out = 0.0;
  for (const auto& f : u.fields) out = std::max(out, std::abs(lp_norm(f, Exponent(2.0)) - m0) / m0);
  return out;
}

double cubic_band(const GridSpec& spec) noexcept { return spec.nyquist() / 4.0; }

const char* nonlinearity_name(Nonlinearity sign) noexcept {
  return sign == Nonlinearity::focusing ? "focusing" : "defocusing";
}

Nonlinearity parse_nonlinearity(std::string_view name) {
  if (name == "focusing") return Nonlinearity::focusing;
  if (name == "defocusing") return Nonlinearity::defocusing;
  fail(ErrorCode::invalid_argument, "unknown nonlinearity '" + std::string(name) + "'");
}

DuhamelOutcome duhamel_apply(const GridField& u0, const Trajectory& traj, Nonlinearity sign,
                             double coefficient) {
  require(u0.spec() == traj.spec(), ErrorCode::spec_mismatch,
          "initial data and trajectory live on different grids");
  const auto& spec = u0.spec();
  DuhamelOutcome out;
  const auto u0_hat = forward_dft(u0);
  if (spectral_excess(spec, u0_hat, cubic_band(spec)) > kSpectralTolerance) {
    out.overflow_node = 0;
    return out;
  }
  Spectra next;
  out.overflow_node = duhamel_spectra(spec, traj.grid, node_phases(spec, traj.grid), u0_hat,
                                      to_spectra(traj), sign, coefficient, next);
  if (out.overflow_node < 0) out.result = to_trajectory(spec, traj.grid, std::move(next));
  return out;
}

// ------------------------------------------------------------------ Picard

const char* picard_status_name(PicardStatus s) noexcept {
  switch (s) {
    case PicardStatus::converged: return "converged";
    case PicardStatus::max_iter: return "max_iter";
    case PicardStatus::diverged: return "diverged";
    case PicardStatus::spectral_overflow: return "spectral_overflow";
  }
  return "unknown";
}

double PicardRun::max_factor() const noexcept {
  double out = 0.0;
  for (double f : contraction_factors) out = std::max(out, f);
  return out;
}

bool PicardRun::contracts(double limit) const noexcept {
  return status == PicardStatus::converged && max_factor() <= limit;
}

PicardRun picard_solve(const GridField& u0, double horizon, Nonlinearity sign,
                       const DecompositionBasis& basis, const NormParams& params,
                       const PicardSettings& settings) {
  const auto& spec = u0.spec();
  check_params(basis, spec, params);
  require(settings.max_iter >= 1 && settings.tol > 0.0, ErrorCode::invalid_argument,
          "Picard needs max_iter >= 1 and tol > 0");
  const TimeGrid grid(horizon, settings.steps);
  PicardRun run;
  run.sign = sign;
  run.horizon = horizon;

  const auto u0_hat = forward_dft(u0);
  if (spectral_excess(spec, u0_hat, cubic_band(spec)) > kSpectralTolerance) {
    run.status = PicardStatus::spectral_overflow;
    run.overflow_node = 0;
    run.defect = std::numeric_limits<double>::infinity();
    return run;
  }
  run.data_norm = spectrum_norm(basis, u0_hat, params);
  const auto phases = node_phases(spec, grid);

  Spectra current(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    current[j] = u0_hat;
    for (std::size_t m = 0; m < spec.size(); ++m) current[j][m] *= phases[j][m];
    if (run.data_norm > 0.0)
      run.c_hom = std::max(run.c_hom, spectrum_norm(basis, current[j], params) / run.data_norm);
  }
  run.radius = 2.0 * run.c_hom * run.data_norm;

  Spectra next;
  int above_one = 0;
  while (true) {
    const int overflow = duhamel_spectra(spec, grid, phases, u0_hat, current, sign,
                                         settings.coefficient, next);
    if (overflow >= 0) {
      run.status = PicardStatus::spectral_overflow;
      run.overflow_node = overflow;
      break;
    }
    const double diff = spectra_distance(basis, next, current, params);
    ++run.iterations;
    if (!run.residuals.empty()) {
      const double prev = run.residuals.back();
      const double factor = prev > 0.0 ? diff / prev : 0.0;
      run.contraction_factors.push_back(factor);
      above_one = factor > 1.0 ? above_one + 1 : 0;
    }
    run.residuals.push_back(diff);
    std::swap(current, next);
    if (settings.keep_iterates) run.iterates.push_back(to_trajectory(spec, grid, current));

    if (!std::isfinite(diff) || diff > settings.abort_growth * std::max(run.radius, 1.0) ||
        above_one >= 3) {
      run.status = PicardStatus::diverged;
      break;
    }
    if (diff <= settings.tol * run.radius) {
      run.status = PicardStatus::converged;
      break;
    }
    if (run.iterations >= settings.max_iter) {
      run.status = PicardStatus::max_iter;
      break;
    }
  }

  if (run.status != PicardStatus::spectral_overflow && run.status != PicardStatus::diverged &&
      duhamel_spectra(spec, grid, phases, u0_hat, current, sign, settings.coefficient, next) < 0)
    run.defect = spectra_distance(basis, next, current, params);
  else
    run.defect = std::numeric_limits<double>::infinity();
  run.solution = to_trajectory(spec, grid, std::move(current));
  return run;
}

std::string picard_run_json(const PicardRun& run, std::uint64_t seed) {
  nlohmann::json j;
  j["status"] = picard_status_name(run.status);
  j["iters"] = run.iterations;
  j["factors"] = run.contraction_factors;
  j["residuals"] = run.residuals;
  j["defect"] = run.defect;
  j["R"] = run.radius;
  j["T"] = run.horizon;
  j["seed"] = seed;
  j["sign"] = nonlinearity_name(run.sign);
  j["data_norm"] = run.data_norm;
  j["c_hom"] = run.c_hom;
  if (run.overflow_node >= 0) j["overflow_node"] = run.overflow_node;
  return j.dump(2);
}

// --------------------------------------------------------- existence scan

bool certified_horizon(const GridField& u0, double horizon, Nonlinearity sign,
                       const DecompositionBasis& basis, const NormParams& params,
                       const ScanSettings& settings) {
  return picard_solve(u0, horizon, sign, basis, params, settings.picard)
      .contracts(settings.factor_limit);
}

ScanResult existence_time_scan(const GridField& u0, std::span<const double> lambdas,
                               Nonlinearity sign, const DecompositionBasis& basis,
                               const NormParams& params, const ScanSettings& settings) {
  require(!lambdas.empty(), ErrorCode::invalid_argument, "scan needs at least one lambda");
  for (std::size_t i = 0; i < lambdas.size(); ++i)
    require(lambdas[i] > 0.0 && (i == 0 || lambdas[i] > lambdas[i - 1]),
            ErrorCode::invalid_argument, "lambdas must be positive and increasing");
  require(settings.t_floor > 0.0 && settings.t_ceiling > settings.t_floor &&
              settings.bisection_steps >= 1,
          ErrorCode::invalid_argument, "bad bisection interval");

  ScanResult out;
  for (double lambda : lambdas) {
    const auto data = lambda * u0;
    ScanPoint pt;
    pt.lambda = lambda;
    pt.data_norm = mod_norm(basis, data, params);
    if (certified_horizon(data, settings.t_ceiling, sign, basis, params, settings)) {
      pt.t_star = settings.t_ceiling;
      pt.censored = true;
    } else if (!certified_horizon(data, settings.t_floor, sign, basis, params, settings)) {
      pt.floored = true;
    } else {
      double lo = settings.t_floor, hi = settings.t_ceiling;
      for (int i = 0; i < settings.bisection_steps; ++i) {
        const double mid = std::sqrt(lo * hi);
        (certified_horizon(data, mid, sign, basis, params, settings) ? lo : hi) = mid;
      }
      pt.t_star = lo;
    }
    out.points.push_back(pt);
  }

  std::vector<double> xs, ys;
  const ScanPoint* calibration = nullptr;
  for (const auto& pt : out.points)
    if (!pt.censored && !pt.floored) {
      xs.push_back(std::log(pt.data_norm));
      ys.push_back(std::log(pt.t_star));
      if (!calibration) calibration = &pt;
    }
  out.fitted = xs.size();
  if (xs.size() >= 2) {
    out.slope = linear_slope(xs, ys, &out.slope_stderr);
  } else {
    out.slope = std::numeric_limits<double>::quiet_NaN();
    out.slope_stderr = std::numeric_limits<double>::quiet_NaN();
  }

  out.envelope_horizon.assign(out.points.size(), std::numeric_limits<double>::quiet_NaN());
  if (calibration) {
    const auto run = picard_solve(calibration->lambda * u0, calibration->t_star, sign, basis,
                                  params, settings.picard);
    const int d = params.d;
    const auto envelope = [d](double t, double r) {
      return t * std::pow(1.0 + t, 0.5 * d) * r * r;
    };
    const double c = run.max_factor() / envelope(calibration->t_star, run.radius);
    for (std::size_t i = 0; i < out.points.size(); ++i) {
      const double r = run.radius * out.points[i].data_norm / calibration->data_norm;
      if (!(c > 0.0) || r == 0.0) continue;
      double lo = 0.0, hi = 1.0;
      while (c * envelope(hi, r) < settings.factor_limit) hi *= 2.0;
      for (int k = 0; k < 100; ++k) {
        const double mid = 0.5 * (lo + hi);
        (c * envelope(mid, r) < settings.factor_limit ? lo : hi) = mid;
      }
      out.envelope_horizon[i] = lo;
    }
  }
  return out;
}

// ------------------------------------------------------------ continuation

const char* continuation_status_name(ContinuationStatus s) noexcept {
  switch (s) {
    case ContinuationStatus::completed: return "completed";
    case ContinuationStatus::norm_escape: return "norm_escape";
    case ContinuationStatus::spectral_overflow: return "spectral_overflow";
    case ContinuationStatus::step_underflow: return "step_underflow";
  }
  return "unknown";
}

Continuation continue_solution(const GridField& u0, Nonlinearity sign,
                               const DecompositionBasis& basis, const NormParams& params,
                               double t_total, double norm_ceiling,
                               const ContinuationSettings& settings) {
  check_params(basis, u0.spec(), params);
  require(t_total > 0.0 && norm_ceiling > 0.0, ErrorCode::invalid_argument,
          "continuation needs positive horizon and ceiling");
  Continuation out;
  out.times.push_back(0.0);
  out.fields.push_back(u0);
  out.norms.push_back(mod_norm(basis, u0, params));

  while (t_total - out.reached > 1e-12 * t_total) {
    const double current = out.norms.back();
    if (current > norm_ceiling) {
      out.status = ContinuationStatus::norm_escape;
      return out;
    }
    double step = t_total - out.reached;
    if (current > 0.0) step = std::min(step, settings.step_scale / (current * current));
    std::optional<PicardRun> accepted;
    while (!accepted) {
      if (step < settings.min_step) {
        out.status = ContinuationStatus::step_underflow;
        return out;
      }
      auto run = picard_solve(out.fields.back(), step, sign, basis, params, settings.picard);
      if (run.status == PicardStatus::spectral_overflow) {
        out.status = ContinuationStatus::spectral_overflow;
        return out;
      }
      if (run.contracts(settings.factor_limit))
        accepted = std::move(run);
      else
        step *= 0.5;
    }
    const auto& sol = *accepted->solution;
    for (std::size_t j = 1; j < sol.fields.size(); ++j) {
      out.times.push_back(out.reached + sol.grid.node(static_cast<int>(j)));
      out.fields.push_back(sol.fields[j]);
      out.norms.push_back(mod_norm(basis, sol.fields[j], params));
    }
    out.steps.push_back(step);
    out.reached += step;
    if (out.norms.back() > norm_ceiling ||
        std::any_of(out.norms.end() - static_cast<std::ptrdiff_t>(sol.fields.size() - 1),
                    out.norms.end(), [&](double v) { return v > norm_ceiling; })) {
      out.status = ContinuationStatus::norm_escape;
      return out;
    }
  }
  out.status = ContinuationStatus::completed;
  return out;
}

// -------------------------------------------------------------- Lipschitz

Trajectory split_step_reference(const GridField& u0, const TimeGrid& grid, Nonlinearity sign,
                                int substeps) {
  require(substeps >= 1, ErrorCode::invalid_argument, "split-step needs substeps >= 1");
  const auto& spec = u0.spec();
  const double h = grid.step() / substeps;
  const double sg = static_cast<int>(sign);
  const PropagatorPlan step(spec, h);
  std::vector<cplx> u(u0.samples().begin(), u0.samples().end());
  const auto half_kick = [&] {
    for (auto& z : u) z *= std::polar(1.0, sg * 0.5 * h * std::norm(z));
  };
  std::vector<GridField> fields{u0};
  for (int j = 0; j < grid.steps(); ++j) {
    for (int k = 0; k < substeps; ++k) {
      half_kick();
      dft_inplace(spec, u, false);
      step.apply_spectrum(u);
      dft_inplace(spec, u, true);
      half_kick();
    }
    fields.emplace_back(spec, u);
  }
  return Trajectory(grid, std::move(fields));
}

double max_node_l2_distance(const Trajectory& u, const Trajectory& v) {
  require(u.fields.size() == v.fields.size() && u.spec() == v.spec(), ErrorCode::spec_mismatch,
          "trajectories live on different grids");
  double out = 0.0;
  for (std::size_t j = 0; j < u.fields.size(); ++j)
    out = std::max(out, lp_norm(u.fields[j] - v.fields[j], Exponent(2.0)));
  return out;
}

double homogeneous_constant(const GridField& f, const TimeGrid& grid,
                            const DecompositionBasis& basis, const NormParams& params) {
  check_params(basis, f.spec(), params);
  const auto spectrum = forward_dft(f);
  const double base = spectrum_norm(basis, spectrum, params);
  if (base == 0.0) return 0.0;
  double out = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    auto s = spectrum;
    PropagatorPlan(f.spec(), grid.node(static_cast<int>(j))).apply_spectrum(s);
    out = std::max(out, spectrum_norm(basis, s, params) / base);
  }
  return out;
}

LipschitzResult lipschitz_check(const GridField& u0, const GridField& v0, Nonlinearity sign,
                                const DecompositionBasis& basis, const NormParams& params,
                                double horizon, const PicardSettings& settings,
                                double factor_limit) {
  const auto ru = picard_solve(u0, horizon, sign, basis, params, settings);
  const auto rv = picard_solve(v0, horizon, sign, basis, params, settings);
  require(ru.contracts(factor_limit) && rv.contracts(factor_limit), ErrorCode::not_converged,
          "not converged: Lipschitz check needs both solves to contract");
  LipschitzResult out;
  out.solution_distance = trajectory_distance(basis, *ru.solution, *rv.solution, params);
  out.data_distance = mod_norm(basis, u0 - v0, params);
  out.ratio = out.data_distance == 0.0 ? 0.0 : out.solution_distance / out.data_distance;
  out.kappa = std::max(ru.max_factor(), rv.max_factor());
  const TimeGrid grid(horizon, settings.steps);
  out.c_hom = std::max({homogeneous_constant(u0, grid, basis, params),
                        homogeneous_constant(v0, grid, basis, params),
                        homogeneous_constant(u0 - v0, grid, basis, params)});
  out.bound = out.c_hom * std::pow(1.0 + horizon, 0.5 * params.d) / (1.0 - out.kappa);
  out.holds = out.ratio <= out.bound;
  return out;
}

double cubic_ratio(const DecompositionBasis& basis, const Trajectory& u, const NormParams& params) {
  check_params(basis, u.spec(), params);
  double out = 0.0;
  for (const auto& f : u.fields) {
    const double n = mod_norm(basis, f, params);
    if (n == 0.0) continue;
    GridField cube = f;
    for (auto& v : cube.samples()) v *= std::norm(v);
    out = std::max(out, mod_norm(basis, cube, params) / (n * n * n));
  }
  return out;
}

// ------------------------------------------------------------ persistence

std::filesystem::path write_trajectory(const std::filesystem::path& dir, const std::string& stem,
                                       const Trajectory& u) {
  std::filesystem::create_directories(dir);
  const auto index_path = dir / (stem + ".index");
  std::ofstream index(index_path);
  require(static_cast<bool>(index), ErrorCode::io, "cannot write " + index_path.string());
  index << std::setprecision(17) << "# T " << u.grid.horizon() << " steps " << u.grid.steps()
        << '\n';
  for (std::size_t j = 0; j < u.fields.size(); ++j) {
    std::ostringstream name;
    name << stem << '_' << std::setw(4) << std::setfill('0') << j << ".bin";
    std::ofstream bin(dir / name.str(), std::ios::binary);
    require(static_cast<bool>(bin), ErrorCode::io, "cannot write " + name.str());
    write_grid_field(bin, u.fields[j]);
    index << j << ' ' << u.grid.node(static_cast<int>(j)) << ' ' << name.str() << '\n';
  }
  require(static_cast<bool>(index), ErrorCode::io, "failed writing " + index_path.string());
  return index_path;
}

Trajectory read_trajectory(const std::filesystem::path& index_path) {
  std::ifstream index(index_path);
  require(static_cast<bool>(index), ErrorCode::io, "cannot read " + index_path.string());
  std::string hash, t_key, steps_key;
  double horizon = 0.0;
  int steps = 0;
  index >> hash >> t_key >> horizon >> steps_key >> steps;
  require(hash == "#" && t_key == "T" && steps_key == "steps", ErrorCode::io,
          "malformed trajectory index " + index_path.string());
  const TimeGrid grid(horizon, steps);
  std::vector<GridField> fields;
  std::size_t j = 0;
  double t = 0.0;
  std::string file;
  while (index >> j >> t >> file) {
    require(j == fields.size(), ErrorCode::io, "trajectory index out of order");
    std::ifstream bin(index_path.parent_path() / file, std::ios::binary);
    require(static_cast<bool>(bin), ErrorCode::io, "cannot read " + file);
    fields.push_back(read_grid_field(bin));
  }
  require(fields.size() == grid.size(), ErrorCode::io, "trajectory index is incomplete");
  return Trajectory(grid, std::move(fields));
}

}  // namespace modnls
