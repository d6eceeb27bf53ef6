#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "modnls/decomposition.hpp"
#include "modnls/grid.hpp"

namespace modnls {

/// Nodes t_j = j T / N_t, j = 0..N_t.
class TimeGrid {
 public:
  TimeGrid(double horizon, int steps);

  double horizon() const noexcept { return horizon_; }
  int steps() const noexcept { return steps_; }
  double step() const noexcept { return horizon_ / steps_; }
  double node(int j) const noexcept { return j == steps_ ? horizon_ : j * step(); }
  std::size_t size() const noexcept { return static_cast<std::size_t>(steps_) + 1; }

 private:
  double horizon_;
  int steps_;
};

struct Trajectory {
  TimeGrid grid;
  std::vector<GridField> fields;  // one per node

  Trajectory(const TimeGrid& g, std::vector<GridField> f);
  /// u(t_j) = f for every node.
  static Trajectory constant(const TimeGrid& g, const GridField& f);
  const GridSpec& spec() const noexcept { return fields.front().spec(); }
};

/// e^{itLap} u0 at every node.
Trajectory free_evolution(const GridField& u0, const TimeGrid& grid);

/// Max over nodes of the modulation norm, the discrete X(T) norm.
double trajectory_norm(const DecompositionBasis& basis, const Trajectory& u,
                       const NormParams& params);
double trajectory_distance(const DecompositionBasis& basis, const Trajectory& u,
                           const Trajectory& v, const NormParams& params);

/// max_j | ||u_j||_2 - ||u_0||_2 | / ||u_0||_2 (0 for zero data).
double mass_drift(const Trajectory& u);

/// Band |xi|_inf <= nyquist / 4 inside which the cubic product is alias-free.
double cubic_band(const GridSpec& spec) noexcept;

/// Sign of the nonlinearity: u = e^{itLap} u0 + sign i int e^{i(t-s)Lap} |u|^2 u ds.
enum class Nonlinearity : int { focusing = 1, defocusing = -1 };

const char* nonlinearity_name(Nonlinearity sign) noexcept;
Nonlinearity parse_nonlinearity(std::string_view name);

struct DuhamelOutcome {
  std::optional<Trajectory> result;
  int overflow_node = -1;  // first node whose input left cubic_band
};

/// Applies the Duhamel operator once with composite-trapezoid quadrature.
/// coefficient scales the cubic term (0 gives the linear problem).
DuhamelOutcome duhamel_apply(const GridField& u0, const Trajectory& traj, Nonlinearity sign,
                             double coefficient = 1.0);

enum class PicardStatus { converged, max_iter, diverged, spectral_overflow };

const char* picard_status_name(PicardStatus s) noexcept;

struct PicardSettings {
  int steps = 64;           // N_t
  double tol = 1e-10;       // stop when ||u^{n+1} - u^n||_X <= tol R
  int max_iter = 100;
  double coefficient = 1.0; // multiplies |u|^2 u
  double abort_growth = 1e8; // diverged once an increment exceeds this times max(R, 1)
  bool keep_iterates = false;
};

struct PicardRun {
  PicardStatus status = PicardStatus::max_iter;
  Nonlinearity sign = Nonlinearity::defocusing;
  double horizon = 0.0;
  double data_norm = 0.0;  // ||u0||
  double c_hom = 0.0;      // max_j ||e^{it_j Lap} u0|| / ||u0||
  double radius = 0.0;     // R = 2 C_hom ||u0||
  int iterations = 0;      // Duhamel applications
  std::vector<double> residuals;           // ||u^{n+1} - u^n||_X per application
  std::vector<double> contraction_factors; // residuals[n] / residuals[n - 1]
  double defect = 0.0;                     // ||u - T u||_X of the returned solution
  int overflow_node = -1;
  std::optional<Trajectory> solution;      // last iterate
  std::vector<Trajectory> iterates;        // u^{(1)}, ... when keep_iterates

  double max_factor() const noexcept;
  bool contracts(double limit) const noexcept;
};

PicardRun picard_solve(const GridField& u0, double horizon, Nonlinearity sign,
                       const DecompositionBasis& basis, const NormParams& params,
                       const PicardSettings& settings = {});

/// {status, iters, factors, residuals, defect, R, T, seed, ...} as JSON text.
std::string picard_run_json(const PicardRun& run, std::uint64_t seed);

struct ScanSettings {
  double t_floor = 1e-5;
  double t_ceiling = 10.0;
  int bisection_steps = 30;
  double factor_limit = 0.9;
  PicardSettings picard;
};

struct ScanPoint {
  double lambda = 0.0;
  double data_norm = 0.0;
  double t_star = 0.0;     // largest certified horizon found
  bool censored = false;   // converged at t_ceiling
  bool floored = false;    // failed at t_floor
};

struct ScanResult {
  std::vector<ScanPoint> points;
  double slope = 0.0;      // d log t_star / d log ||lambda u0|| over uncensored points
  double slope_stderr = 0.0;
  std::size_t fitted = 0;
  /// Horizon where c T (1 + T)^{d/2} R^2 reaches factor_limit, with c calibrated
  /// on the first uncensored point.
  std::vector<double> envelope_horizon;
};

/// Certified when the solve converges with every contraction factor <= factor_limit.
bool certified_horizon(const GridField& u0, double horizon, Nonlinearity sign,
                       const DecompositionBasis& basis, const NormParams& params,
                       const ScanSettings& settings);

ScanResult existence_time_scan(const GridField& u0, std::span<const double> lambdas,
                               Nonlinearity sign, const DecompositionBasis& basis,
                               const NormParams& params, const ScanSettings& settings = {});

enum class ContinuationStatus { completed, norm_escape, spectral_overflow, step_underflow };

const char* continuation_status_name(ContinuationStatus s) noexcept;

struct ContinuationSettings {
  double step_scale = 0.25;  // T_step = step_scale / ||u(t)||^2
  double min_step = 1e-6;
  double factor_limit = 0.9;
  PicardSettings picard;
};

struct Continuation {
  ContinuationStatus status = ContinuationStatus::completed;
  std::vector<double> times;
  std::vector<GridField> fields;
  std::vector<double> norms;   // modulation norm at each stored time
  std::vector<double> steps;   // accepted sub-horizons
  double reached = 0.0;
};

Continuation continue_solution(const GridField& u0, Nonlinearity sign,
                               const DecompositionBasis& basis, const NormParams& params,
                               double t_total, double norm_ceiling,
                               const ContinuationSettings& settings = {});

struct LipschitzResult {
  double solution_distance = 0.0;  // ||u - v||_X(T)
  double data_distance = 0.0;      // ||u0 - v0||
  double ratio = 0.0;
  double kappa = 0.0;              // larger max contraction factor
  double c_hom = 0.0;
  double bound = 0.0;              // C_hom (1 + T)^{d/2} / (1 - kappa)
  bool holds = true;
};

/// Throws not_converged unless both solves converge with factors <= factor_limit.
LipschitzResult lipschitz_check(const GridField& u0, const GridField& v0, Nonlinearity sign,
                                const DecompositionBasis& basis, const NormParams& params,
                                double horizon, const PicardSettings& settings = {},
                                double factor_limit = 0.9);

/// Strang splitting with `substeps` steps per node interval: half nonlinear
/// phase rotation, exact free step, half rotation. Returns u at every node.
Trajectory split_step_reference(const GridField& u0, const TimeGrid& grid, Nonlinearity sign,
                                int substeps);

/// max_j ||u_j - v_j||_2.
double max_node_l2_distance(const Trajectory& u, const Trajectory& v);

/// max_j ||e^{it_j Lap} f|| / ||f|| on grid (0 for f = 0).
double homogeneous_constant(const GridField& f, const TimeGrid& grid,
                            const DecompositionBasis& basis, const NormParams& params);

/// max over nodes of || |u|^2 u || / ||u||^3 (nodes with u = 0 skipped).
double cubic_ratio(const DecompositionBasis& basis, const Trajectory& u, const NormParams& params);

/// Writes <stem>_<j>.bin per node and <stem>.index listing "j t file".
std::filesystem::path write_trajectory(const std::filesystem::path& dir, const std::string& stem,
                                       const Trajectory& u);
Trajectory read_trajectory(const std::filesystem::path& index);

}  // namespace modnls
