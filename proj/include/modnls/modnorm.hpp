#pragma once

#include <cstdint>
#include <vector>

#include "modnls/decomposition.hpp"
#include "modnls/grid.hpp"
#include "modnls/lattice_seq.hpp"

namespace modnls {

enum class NormMethod { decomposition, stft };

const char* norm_method_name(NormMethod m) noexcept;

struct ModNormReport {
  NormParams params;
  double value = 0.0;
  LatticeSeq per_k_profile{1};  // ||box_k f||_p; empty for the STFT method
  NormMethod method = NormMethod::decomposition;
};

/// ||box_k f||_p for every k of basis.indices(), from the forward DFT of f.
/// p = 2 is evaluated in frequency space.
std::vector<double> box_norm_profile(const DecompositionBasis& basis,
                                     std::span<const cplx> spectrum, Exponent p);

/// Weighted l^q_s norm of a profile aligned with basis.indices().
double profile_norm(const DecompositionBasis& basis, std::span<const double> profile, Exponent q,
                    double s);

/// ||f||_{M^s_{p,q}} ~ ||(||box_k f||_p)_k||_{q,s}. f must be band-limited to
/// basis.covered_band(); otherwise throws spectral_overflow.
ModNormReport mod_norm_decomp(const DecompositionBasis& basis, const GridField& f,
                              const NormParams& params);
double mod_norm(const DecompositionBasis& basis, const GridField& f, const NormParams& params);

struct StftSettings {
  double window_width = 1.0;  // g(x) = exp(-|x|^2 / w^2)
  double space_step = 0.5;    // rounded to a multiple of dx
  double freq_step = 0.5;     // rounded to a multiple of 2 pi / L
  double frame_tolerance = 0.01;
};

struct StftSampling {
  int space_stride = 1;
  int freq_stride = 1;
  double space_step = 0.0;
  double freq_step = 0.0;
};

StftSampling stft_sampling(const GridSpec& spec, const StftSettings& settings);

/// sum |V_g f|^2 a^d b^d / (||f||^2 ||g||^2) over the sampled (x, xi) lattice;
/// equals 1 for an adequately sampled Gabor system.
double stft_energy_ratio(const GridField& f, const StftSettings& settings = {});

/// ||xi -> <xi>^s ||V_g f(., xi)||_p||_q by quadrature on the sampled lattice,
/// with V_g f(x, xi) = (2 pi)^{-d/2} int f(t) conj(g(t - x)) e^{-i xi t} dt.
/// Throws undersampled_stft when the energy ratio leaves 1 +- frame_tolerance.
ModNormReport mod_norm_stft(const GridField& f, const NormParams& params,
                            const StftSettings& settings = {});

/// ||fg||_{M^s_{p,q}} / (||f||_{M^s_{p1,q}} ||g||_{M^s_{p2,q}}).
double holder_ratio(const DecompositionBasis& basis, const GridField& f, const GridField& g,
                    Exponent p, Exponent p1, Exponent p2, Exponent q, double s);

/// Smooth cutoff equal to 1 on B_{sqrt d} and supported in B_{2 sqrt d}.
double embedding_cutoff(std::span<const double> xi);

/// max_k ||K_{tau_k}||_r with 1/r = 1 - 1/p1 + 1/p2, where tau_k = tau(. - k)
/// equals 1 on supp sigma_k; by Young's inequality
/// ||box_k f||_{p2} <= C ||box_k f||_{p1}.
double embedding_constant(const DecompositionBasis& basis, Exponent p1, Exponent p2);

struct EmbeddingCheck {
  double lhs = 0.0;       // ||f||_{M^{s2}_{p2,q2}}
  double rhs = 0.0;       // C_emb ||f||_{M^{s1}_{p1,q1}}
  double constant = 0.0;  // C_emb
  bool holds = false;
};

/// Requires s1 >= s2, p1 <= p2, q1 <= q2.
EmbeddingCheck embedding_check(const GridField& f, const DecompositionBasis& basis,
                               const NormParams& from, const NormParams& to);

struct SupBound {
  double sup = 0.0;    // max |f| over the grid
  double bound = 0.0;  // sum_k ||box_k f||_inf
  bool holds = true;
};

SupBound sup_norm_bound(const GridField& f, const DecompositionBasis& basis);

struct PeetreResult {
  bool holds = true;
  double worst_ratio = 0.0;  // max lhs / rhs
  std::uint64_t pairs = 0;
};

/// Exhaustive check of <k + l>^s <= 2^{|s|} <k>^s <l>^{|s|} over |k|_inf, |l|_inf <= R.
PeetreResult peetre_scan(double s, int R, int d);
bool peetre_check(double s, int R, int d);

}  // namespace modnls
