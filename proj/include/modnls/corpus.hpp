#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "modnls/grid.hpp"
#include "modnls/lattice_seq.hpp"

namespace modnls {

enum class CorpusKind { gaussian, plane_wave, band_limited_noise, decaying_lattice };

CorpusKind parse_corpus_kind(std::string_view name);
const char* corpus_kind_name(CorpusKind kind) noexcept;

/// Unit Gaussian exp(-|x|^2) sampled on the grid.
GridField unit_gaussian(const GridSpec& spec);

/// Grid-field corpora; `band` bounds the spectrum in |xi|_inf.
///  - gaussian: member 0 is the unit Gaussian, later members are shifted,
///    dilated (width 1..1.5) and modulated Gaussians whose spectrum stays
///    below 1e-9 relative weight outside the band.
///  - plane-wave: exp(i xi.x) at a random grid frequency inside the band.
///  - band-limited-noise: complex Gaussian coefficients on every grid mode
///    inside the band, normalised to unit L^2 norm.
/// Members are drawn from per-member streams keyed by (seed, member) and are
/// fixed functions of x: refining n with L fixed resamples the same fields.
std::vector<GridField> field_corpus(CorpusKind kind, const GridSpec& spec, std::size_t count,
                                    std::uint64_t seed, double band);

/// Complex Gaussian amplitudes on the ball |k| <= radius, reweighted by
/// <k>^{-t} with t cycling through {0, s, s + d} across members.
std::vector<LatticeSeq> lattice_corpus(int d, int radius, std::size_t count, std::uint64_t seed,
                                       double s);

/// Member `member` of lattice_corpus(d, radius, ., seed, s) without building the rest.
LatticeSeq lattice_member(int d, int radius, std::uint64_t seed, std::size_t member, double s);

}  // namespace modnls
