#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace modnls {

using cplx = std::complex<double>;

inline constexpr int kMaxDim = 3;

/// Lebesgue exponent in [1, inf]. Infinity is a distinct state rather than a
/// large number so that sup/max branches are taken explicitly.
class Exponent {
 public:
  explicit Exponent(double value);
  static Exponent inf() { return Exponent(); }

  /// Accepts "inf", "infinity", plain decimals and fractions like "4/3".
  static Exponent parse(std::string_view text);

  bool is_inf() const noexcept { return inf_; }
  double value() const noexcept;
  double reciprocal() const noexcept { return inf_ ? 0.0 : 1.0 / value_; }
  /// 1/p' = 1 - 1/p.
  double dual_reciprocal() const noexcept { return 1.0 - reciprocal(); }
  std::string str() const;

  friend bool operator==(const Exponent& a, const Exponent& b) noexcept {
    return a.inf_ == b.inf_ && (a.inf_ || a.value_ == b.value_);
  }

 private:
  Exponent() : value_(0.0), inf_(true) {}
  double value_;
  bool inf_;
};

/// (d, p, q, s): dimension, Lebesgue exponents and regularity.
struct NormParams {
  int d = 1;
  Exponent p{2.0};
  Exponent q{2.0};
  double s = 0.0;

  /// s > d(1 - 1/q) for q > 1, s >= 0 for q = 1.
  bool sufficiently_large() const noexcept;
};

/// Regularity threshold d(1 - 1/q); equality is admissible only for q = 1.
double regularity_threshold(int d, Exponent q) noexcept;

struct LatticeIndex {
  std::array<int, kMaxDim> c{};  // trailing coordinates beyond dim are zero
  int dim = 1;

  LatticeIndex() = default;
  explicit LatticeIndex(std::span<const int> coords);
  LatticeIndex(std::initializer_list<int> coords);
  static LatticeIndex zero(int dim);

  std::int64_t norm_sq() const noexcept;
  int max_abs() const noexcept;
  int operator[](int axis) const noexcept { return c[axis]; }

  friend LatticeIndex operator+(const LatticeIndex& a, const LatticeIndex& b);
  friend LatticeIndex operator-(const LatticeIndex& a, const LatticeIndex& b);
  friend bool operator==(const LatticeIndex& a, const LatticeIndex& b) noexcept {
    return a.dim == b.dim && a.c == b.c;
  }
  friend bool operator<(const LatticeIndex& a, const LatticeIndex& b) noexcept {
    return a.dim != b.dim ? a.dim < b.dim : a.c < b.c;
  }
};

/// <k> = sqrt(1 + |k|^2)
double japanese_bracket(const LatticeIndex& k) noexcept;

/// Finitely supported complex sequence on Z^d. Immutable once built; entries
/// are kept sorted by index and exact zeros are never stored.
class LatticeSeq {
 public:
  using Entry = std::pair<LatticeIndex, cplx>;

  explicit LatticeSeq(int dim);
  /// Duplicate indices are summed.
  LatticeSeq(int dim, std::vector<Entry> entries);

  static LatticeSeq delta(const LatticeIndex& k, cplx value = 1.0);

  int dim() const noexcept { return dim_; }
  /// Smallest integer R with |k| <= R on the support (0 for the zero sequence).
  int support_radius() const noexcept { return radius_; }
  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  bool is_zero() const noexcept { return entries_.empty(); }

  cplx at(const LatticeIndex& k) const;

  template <class Pred>
  LatticeSeq restricted(Pred&& keep) const {
    std::vector<Entry> out;
    for (const auto& e : entries_)
      if (keep(e.first)) out.push_back(e);
    return LatticeSeq(dim_, std::move(out));
  }

  LatticeSeq scaled(cplx factor) const;

  friend LatticeSeq operator+(const LatticeSeq& a, const LatticeSeq& b);
  friend bool operator==(const LatticeSeq& a, const LatticeSeq& b) noexcept {
    return a.dim_ == b.dim_ && a.entries_ == b.entries_;
  }

 private:
  int dim_;
  int radius_ = 0;
  std::vector<Entry> entries_;
};

double weighted_norm(const LatticeSeq& a, Exponent q, double s);
/// Uses params.q and params.s; params.d must match a.dim().
double weighted_norm(const LatticeSeq& a, const NormParams& params);

/// Exact discrete convolution over the finite supports.
LatticeSeq convolve(const LatticeSeq& a, const LatticeSeq& b);

// Dyadic annuli A_0 = {0}, A_l = {2^(l-1) <= |k| < 2^l}; balls B_m = {|k| < 2^m}.
// Membership is decided on the exact integer |k|^2.
int annulus_level(const LatticeIndex& k) noexcept;
bool in_ball(const LatticeIndex& k, int m) noexcept;

struct AnnulusDecomposition {
  std::vector<std::pair<int, LatticeSeq>> levels;  // only nonempty levels
  int max_level = 0;
};

AnnulusDecomposition annulus_decompose(const LatticeSeq& a);

/// C(s) = 2^|s| of the annulus characterisation.
double annulus_constant(double s) noexcept;
/// C(s) = 2^s / (1 - 2^-s) of the ball condition (s > 0).
double ball_constant(double s);

struct LevelBound {
  int level = 0;
  double c_l = 0.0;  // ||1_{A_l} a||_{q,s} / ||a||_{q,s}
  double lhs = 0.0;  // ||1_{A_l} a||_q
  double rhs = 0.0;  // C(s) 2^{-ls} C_l ||a||_{q,s}
};

struct NecessaryProfile {
  std::vector<LevelBound> levels;  // every level 0..max_level
  double profile_norm = 0.0;       // ||(C_l)||_q
  bool bounds_hold = true;
};

/// Throws ErrorCode::zero_norm for the zero sequence.
NecessaryProfile lp_necessary_profile(const LatticeSeq& a, const NormParams& params);

struct BallsBound {
  double norm = 0.0;  // ||sum_m piece_m||_{q,s}
  double bound = 0.0; // N
  bool holds = true;
};

/// pieces[m] must live in B_m and satisfy ||piece_m||_q <= 2^{-ms} C_m N / C(s).
/// Violated hypotheses throw with the offending m in the message.
BallsBound balls_sufficient_bound(std::span<const LatticeSeq> pieces,
                                  const NormParams& params, double N,
                                  std::span<const double> c_m);

struct ConvolutionSplit {
  std::vector<LatticeSeq> a_pieces;  // (1_{A_i} a) * (1_{B_i} b)
  std::vector<LatticeSeq> b_pieces;  // (1_{B_j} a) * (1_{A_{j+1}} b)
};

ConvolutionSplit algebra_convolution_split(const LatticeSeq& a, const LatticeSeq& b);

/// Upper bound for (sum_k <k>^{-s q'})^{1/q'}: lattice sum over |k| <= radius
/// plus an integral bound for the tail. Infinite when s is not sufficiently large.
double l1_embedding_constant(int d, Exponent q, double s, int radius);

/// Text format: header "d q s support_radius", then "k1 .. kd re im" per entry.
void write_lattice_seq(std::ostream& os, const LatticeSeq& a, Exponent q, double s);

struct LatticeSeqFile {
  LatticeSeq seq{1};
  Exponent q{1.0};
  double s = 0.0;
};

LatticeSeqFile read_lattice_seq(std::istream& is);

}  // namespace modnls
