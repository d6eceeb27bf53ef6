#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "modnls/decomposition.hpp"
#include "modnls/grid.hpp"

namespace modnls {

/// e^{it Laplacian} as the Fourier multiplier e^{-it|xi|^2}.
class PropagatorPlan {
 public:
  PropagatorPlan(const GridSpec& spec, double t);

  const GridSpec& spec() const noexcept { return spec_; }
  double time() const noexcept { return t_; }
  /// Natural FFT order.
  std::span<const cplx> phase() const noexcept { return phase_; }

  /// Multiplies a spectrum in natural order by the phase.
  void apply_spectrum(std::span<cplx> spectrum) const;

 private:
  GridSpec spec_;
  double t_;
  std::vector<cplx> phase_;
};

GridField evolve(const PropagatorPlan& plan, const GridField& f);
GridField evolve(double t, const GridField& f);

/// ||e^{i(t1+t2)Lap} f - e^{it2 Lap} e^{it1 Lap} f||_2 / ||f||_2 (0 for f = 0).
double group_law_check(const GridSpec& spec, double t1, double t2, const GridField& f);

struct GrowthFit {
  std::vector<double> times;
  std::vector<double> norms;
  double fitted_slope = 0.0;  // d log(norm) / d log(1 + t)
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

/// Least squares of log(norm) against log(1 + t). Needs two or more points.
GrowthFit fit_loglog(std::vector<double> times, std::vector<double> norms);

/// count points log-spaced on [a, b], a > 0.
std::vector<double> log_spaced_times(double a, double b, int count);

/// L^2 mass fraction in the outer strip |x_i| >= (1/2 - strip) L of some axis.
double boundary_mass_fraction(const GridField& f, double strip = 0.01);

/// Mass fraction above which an evolved field counts as wrapped around.
inline constexpr double kWraparoundTolerance = 1e-6;

/// Throws domain_too_small when boundary_mass_fraction exceeds kWraparoundTolerance.
void require_resolved(const GridField& f, double t);

/// Smallest L with L >= 12 sqrt(1 + 4 T^2) for a unit-width Gaussian.
double required_domain_length(double t_max);

/// ||e^{itLap} f||_{M^s_{p,q}} at every time, fitted on log(1 + t).
/// times must be strictly increasing and nonnegative.
GrowthFit modnorm_growth(const DecompositionBasis& basis, const GridField& f,
                         const NormParams& params, std::span<const double> times);

/// d |1/2 - 1/p|.
double propagator_exponent(const NormParams& params) noexcept;

struct EnvelopeCheck {
  bool holds = true;
  double exponent = 0.0;
  double c_fit = 1.0;        // max(1, max_f ratio(T_max) / (1 + T_max)^exponent)
  double worst_margin = 0.0; // max over (f, t) of ratio / (c_fit (1 + t)^exponent)
};

/// Checks ||e^{itLap} f|| / ||f|| <= C_fit (1 + t)^{d|1/2 - 1/p|} over the corpus.
EnvelopeCheck bound_envelope_check(const DecompositionBasis& basis,
                                   std::span<const GridField> corpus, const NormParams& params,
                                   std::span<const double> times);

/// Columns t, norm, then a footer row "fit,<slope>,<stderr>".
void write_growth_csv(std::ostream& os, const GrowthFit& fit);

}  // namespace modnls
