#include "modnls/lattice_seq.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "modnls/error.hpp"

namespace modnls {

namespace {

constexpr double kRelSlack = 1e-12;

bool approx_le(double lhs, double rhs) {
  return lhs <= rhs * (1.0 + kRelSlack) + std::numeric_limits<double>::min();
}

double bracket_pow(std::int64_t norm_sq, double s) {
  if (s == 0.0) return 1.0;
  return std::pow(1.0 + static_cast<double>(norm_sq), 0.5 * s);
}

int max_level_of(const LatticeSeq& a) {
  int level = 0;
  for (const auto& [k, v] : a.entries()) level = std::max(level, annulus_level(k));
  return level;
}

bool canonically_less(const LatticeSeq& x, const LatticeSeq& y) {
  if (x.size() != y.size()) return x.size() < y.size();
  const auto ex = x.entries();
  const auto ey = y.entries();
  for (std::size_t i = 0; i < ex.size(); ++i) {
    const auto& [kx, vx] = ex[i];
    const auto& [ky, vy] = ey[i];
    if (!(kx == ky)) return kx < ky;
    if (vx.real() != vy.real()) return vx.real() < vy.real();
    if (vx.imag() != vy.imag()) return vx.imag() < vy.imag();
  }
  return false;
}

}  // namespace

// ---------------------------------------------------------------- Exponent

Exponent::Exponent(double value) : value_(value), inf_(std::isinf(value)) {
  require(inf_ || (std::isfinite(value) && value >= 1.0), ErrorCode::invalid_argument,
          "exponent must lie in [1, inf]");
  if (inf_) value_ = 0.0;
}

double Exponent::value() const noexcept {
  return inf_ ? std::numeric_limits<double>::infinity() : value_;
}

Exponent Exponent::parse(std::string_view text) {
  std::string t(text);
  t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char ch) { return std::isspace(ch); }),
          t.end());
  std::transform(t.begin(), t.end(), t.begin(), [](unsigned char ch) { return std::tolower(ch); });
  if (t == "inf" || t == "infinity") return inf();
  try {
    std::size_t pos = 0;
    const auto slash = t.find('/');
    if (slash != std::string::npos) {
      const double num = std::stod(t.substr(0, slash));
      const double den = std::stod(t.substr(slash + 1), &pos);
      require(pos == t.size() - slash - 1 && den != 0.0, ErrorCode::invalid_argument,
              "bad exponent '" + t + "'");
      return Exponent(num / den);
    }
    const double v = std::stod(t, &pos);
    require(pos == t.size(), ErrorCode::invalid_argument, "bad exponent '" + t + "'");
    return Exponent(v);
  } catch (const std::logic_error&) {
    fail(ErrorCode::invalid_argument, "bad exponent '" + t + "'");
  }
}

std::string Exponent::str() const {
  if (inf_) return "inf";
  std::ostringstream os;
  os.precision(17);
  os << value_;
  return os.str();
}

double regularity_threshold(int d, Exponent q) noexcept { return d * q.dual_reciprocal(); }

bool NormParams::sufficiently_large() const noexcept {
  if (!q.is_inf() && q.value() == 1.0) return s >= 0.0;
  return s > regularity_threshold(d, q);
}

// ------------------------------------------------------------ LatticeIndex

LatticeIndex::LatticeIndex(std::span<const int> coords) : dim(static_cast<int>(coords.size())) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::invalid_argument,
          "lattice dimension must be 1.." + std::to_string(kMaxDim));
  std::copy(coords.begin(), coords.end(), c.begin());
}

LatticeIndex::LatticeIndex(std::initializer_list<int> coords)
    : LatticeIndex(std::span<const int>(coords.begin(), coords.size())) {}

LatticeIndex LatticeIndex::zero(int dim) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::invalid_argument, "bad lattice dimension");
  LatticeIndex k;
  k.dim = dim;
  return k;
}

std::int64_t LatticeIndex::norm_sq() const noexcept {
  std::int64_t acc = 0;
  for (int i = 0; i < dim; ++i) acc += static_cast<std::int64_t>(c[i]) * c[i];
  return acc;
}

int LatticeIndex::max_abs() const noexcept {
  int m = 0;
  for (int i = 0; i < dim; ++i) m = std::max(m, std::abs(c[i]));
  return m;
}

LatticeIndex operator+(const LatticeIndex& a, const LatticeIndex& b) {
  require(a.dim == b.dim, ErrorCode::dimension_mismatch, "lattice index dimension mismatch");
  LatticeIndex r = a;
  for (int i = 0; i < a.dim; ++i) r.c[i] += b.c[i];
  return r;
}

LatticeIndex operator-(const LatticeIndex& a, const LatticeIndex& b) {
  require(a.dim == b.dim, ErrorCode::dimension_mismatch, "lattice index dimension mismatch");
  LatticeIndex r = a;
  for (int i = 0; i < a.dim; ++i) r.c[i] -= b.c[i];
  return r;
}

double japanese_bracket(const LatticeIndex& k) noexcept {
  return std::sqrt(1.0 + static_cast<double>(k.norm_sq()));
}

// -------------------------------------------------------------- LatticeSeq

LatticeSeq::LatticeSeq(int dim) : dim_(dim) {
  require(dim >= 1 && dim <= kMaxDim, ErrorCode::invalid_argument, "bad lattice dimension");
}

LatticeSeq::LatticeSeq(int dim, std::vector<Entry> entries) : LatticeSeq(dim) {
  for (const auto& e : entries)
    require(e.first.dim == dim, ErrorCode::dimension_mismatch,
            "entry index dimension differs from sequence dimension");
  std::stable_sort(entries.begin(), entries.end(),
                   [](const Entry& a, const Entry& b) { return a.first < b.first; });
  std::int64_t max_sq = 0;
  for (std::size_t i = 0; i < entries.size();) {
    Entry acc = entries[i++];
    while (i < entries.size() && entries[i].first == acc.first) acc.second += entries[i++].second;
    if (acc.second == cplx{}) continue;
    require(std::isfinite(acc.second.real()) && std::isfinite(acc.second.imag()),
            ErrorCode::invalid_argument, "non-finite sequence entry");
    max_sq = std::max(max_sq, acc.first.norm_sq());
    entries_.push_back(acc);
  }
  auto r = static_cast<int>(std::floor(std::sqrt(static_cast<double>(max_sq))));
  while (static_cast<std::int64_t>(r) * r < max_sq) ++r;
  radius_ = r;
}

LatticeSeq LatticeSeq::delta(const LatticeIndex& k, cplx value) {
  return LatticeSeq(k.dim, {{k, value}});
}

cplx LatticeSeq::at(const LatticeIndex& k) const {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), k,
                             [](const Entry& e, const LatticeIndex& key) { return e.first < key; });
  return (it != entries_.end() && it->first == k) ? it->second : cplx{};
}

LatticeSeq LatticeSeq::scaled(cplx factor) const {
  std::vector<Entry> out(entries_);
  for (auto& e : out) e.second *= factor;
  return LatticeSeq(dim_, std::move(out));
}

LatticeSeq operator+(const LatticeSeq& a, const LatticeSeq& b) {
  require(a.dim_ == b.dim_, ErrorCode::dimension_mismatch, "sequence dimension mismatch");
  std::vector<LatticeSeq::Entry> all(a.entries_);
  all.insert(all.end(), b.entries_.begin(), b.entries_.end());
  return LatticeSeq(a.dim_, std::move(all));
}

// -------------------------------------------------------------- operations

double weighted_norm(const LatticeSeq& a, Exponent q, double s) {
  if (q.is_inf()) {
    double m = 0.0;
    for (const auto& [k, v] : a.entries()) m = std::max(m, bracket_pow(k.norm_sq(), s) * std::abs(v));
    return m;
  }
  const double qv = q.value();
  double acc = 0.0;
  for (const auto& [k, v] : a.entries()) {
    const double t = bracket_pow(k.norm_sq(), s) * std::abs(v);
    acc += (qv == 1.0) ? t : std::pow(t, qv);
  }
  return (qv == 1.0) ? acc : std::pow(acc, 1.0 / qv);
}

double weighted_norm(const LatticeSeq& a, const NormParams& params) {
  require(params.d == a.dim(), ErrorCode::dimension_mismatch,
          "norm parameters dimension differs from sequence dimension");
  return weighted_norm(a, params.q, params.s);
}

LatticeSeq convolve(const LatticeSeq& lhs, const LatticeSeq& rhs) {
  require(lhs.dim() == rhs.dim(), ErrorCode::dimension_mismatch, "convolution dimension mismatch");
  const int d = lhs.dim();
  if (lhs.is_zero() || rhs.is_zero()) return LatticeSeq(d);

  // A canonical operand order fixes the summation order, so a*b == b*a bitwise.
  const bool swap = canonically_less(rhs, lhs);
  const LatticeSeq& a = swap ? rhs : lhs;
  const LatticeSeq& b = swap ? lhs : rhs;

  // Dense accumulation over the box |k|_inf <= Ra + Rb, addressed linearly so
  // that index addition becomes offset addition.
  const int r_out = a.support_radius() + b.support_radius();
  const std::int64_t side = 2 * static_cast<std::int64_t>(r_out) + 1;
  std::array<std::int64_t, kMaxDim> stride{};
  std::int64_t total = 1;
  for (int i = d - 1; i >= 0; --i) {
    stride[i] = total;
    total *= side;
  }
  auto linear = [&](const LatticeIndex& k) {
    std::int64_t off = 0;
    for (int i = 0; i < d; ++i) off += static_cast<std::int64_t>(k.c[i]) * stride[i];
    return off;
  };
  std::int64_t base = 0;
  for (int i = 0; i < d; ++i) base += r_out * stride[i];

  std::vector<std::int64_t> off_b;
  std::vector<cplx> val_b;
  off_b.reserve(b.size());
  val_b.reserve(b.size());
  for (const auto& [k, v] : b.entries()) {
    off_b.push_back(linear(k));
    val_b.push_back(v);
  }

  // Plain real arithmetic: the std::complex product carries an inf/nan
  // recovery branch that dominates this loop.
  std::vector<cplx> acc(static_cast<std::size_t>(total));
  for (const auto& [ka, va] : a.entries()) {
    cplx* out = acc.data() + base + linear(ka);
    const double ar = va.real(), ai = va.imag();
    for (std::size_t j = 0; j < off_b.size(); ++j) {
      const double br = val_b[j].real(), bi = val_b[j].imag();
      out[off_b[j]] += cplx(ar * br - ai * bi, ar * bi + ai * br);
    }
  }

  std::vector<LatticeSeq::Entry> entries;
  LatticeIndex k = LatticeIndex::zero(d);
  for (std::int64_t flat = 0; flat < total; ++flat) {
    if (acc[flat] == cplx{}) continue;
    std::int64_t rem = flat;
    for (int i = 0; i < d; ++i) {
      k.c[i] = static_cast<int>(rem / stride[i]) - r_out;
      rem %= stride[i];
    }
    entries.emplace_back(k, acc[flat]);
  }
  return LatticeSeq(d, std::move(entries));
}

int annulus_level(const LatticeIndex& k) noexcept {
  const std::int64_t n2 = k.norm_sq();
  if (n2 == 0) return 0;
  int l = 1;
  while (l < 31 && (std::int64_t{1} << (2 * l)) <= n2) ++l;
  return l;
}

bool in_ball(const LatticeIndex& k, int m) noexcept {
  if (m >= 30) return true;
  return k.norm_sq() < (std::int64_t{1} << (2 * m));
}

AnnulusDecomposition annulus_decompose(const LatticeSeq& a) {
  AnnulusDecomposition out;
  out.max_level = max_level_of(a);
  std::vector<std::vector<LatticeSeq::Entry>> buckets(out.max_level + 1);
  for (const auto& e : a.entries()) buckets[annulus_level(e.first)].push_back(e);
  for (int l = 0; l <= out.max_level; ++l)
    if (!buckets[l].empty()) out.levels.emplace_back(l, LatticeSeq(a.dim(), std::move(buckets[l])));
  return out;
}

double annulus_constant(double s) noexcept { return std::exp2(std::abs(s)); }

double ball_constant(double s) {
  require(s > 0.0, ErrorCode::invalid_argument, "ball constant needs s > 0");
  return std::exp2(s) / (1.0 - std::exp2(-s));
}

NecessaryProfile lp_necessary_profile(const LatticeSeq& a, const NormParams& params) {
  const double total = weighted_norm(a, params);
  require(total > 0.0, ErrorCode::zero_norm, "zero-norm input");
  const int max_level = max_level_of(a);
  const double cs = annulus_constant(params.s);

  NecessaryProfile out;
  std::vector<std::vector<LatticeSeq::Entry>> buckets(max_level + 1);
  for (const auto& e : a.entries()) buckets[annulus_level(e.first)].push_back(e);

  std::vector<LatticeSeq::Entry> c_entries;
  for (int l = 0; l <= max_level; ++l) {
    const LatticeSeq piece(a.dim(), std::move(buckets[l]));
    LevelBound lb;
    lb.level = l;
    lb.c_l = weighted_norm(piece, params.q, params.s) / total;
    lb.lhs = weighted_norm(piece, params.q, 0.0);
    lb.rhs = cs * std::exp2(-l * params.s) * lb.c_l * total;
    out.bounds_hold = out.bounds_hold && approx_le(lb.lhs, lb.rhs);
    c_entries.emplace_back(LatticeIndex{l}, lb.c_l);
    out.levels.push_back(lb);
  }
  out.profile_norm = weighted_norm(LatticeSeq(1, std::move(c_entries)), params.q, 0.0);
  return out;
}

BallsBound balls_sufficient_bound(std::span<const LatticeSeq> pieces, const NormParams& params,
                                  double N, std::span<const double> c_m) {
  require(params.s > 0.0, ErrorCode::hypothesis_violation, "ball condition needs s > 0");
  require(N >= 0.0, ErrorCode::hypothesis_violation, "N must be nonnegative");
  require(pieces.size() == c_m.size(), ErrorCode::invalid_argument,
          "one C_m per piece is required");

  std::vector<LatticeSeq::Entry> ce;
  for (std::size_t m = 0; m < c_m.size(); ++m) {
    require(c_m[m] >= 0.0, ErrorCode::hypothesis_violation,
            "C_m must be nonnegative (m = " + std::to_string(m) + ")");
    ce.emplace_back(LatticeIndex{static_cast<int>(m)}, c_m[m]);
  }
  require(approx_le(weighted_norm(LatticeSeq(1, std::move(ce)), params.q, 0.0), 1.0),
          ErrorCode::hypothesis_violation, "||(C_m)||_q exceeds 1");

  const double cs = ball_constant(params.s);
  LatticeSeq sum(params.d);
  for (std::size_t m = 0; m < pieces.size(); ++m) {
    const auto& piece = pieces[m];
    require(piece.dim() == params.d, ErrorCode::dimension_mismatch,
            "piece dimension mismatch (m = " + std::to_string(m) + ")");
    for (const auto& e : piece.entries())
      require(in_ball(e.first, static_cast<int>(m)), ErrorCode::support_violation,
              "piece m = " + std::to_string(m) + " leaves the ball B_m");
    const double bound = std::exp2(-static_cast<double>(m) * params.s) * c_m[m] * N / cs;
    require(approx_le(weighted_norm(piece, params.q, 0.0), bound), ErrorCode::hypothesis_violation,
            "piece m = " + std::to_string(m) + " violates the norm hypothesis");
    sum = sum + piece;
  }

  BallsBound out;
  out.bound = N;
  out.norm = weighted_norm(sum, params.q, params.s);
  out.holds = approx_le(out.norm, N);
  return out;
}

ConvolutionSplit algebra_convolution_split(const LatticeSeq& a, const LatticeSeq& b) {
  require(a.dim() == b.dim(), ErrorCode::dimension_mismatch, "convolution dimension mismatch");
  ConvolutionSplit out;
  const int la = max_level_of(a);
  const int lb = max_level_of(b);
  for (int i = 0; i <= la; ++i) {
    auto ai = a.restricted([i](const LatticeIndex& k) { return annulus_level(k) == i; });
    auto bi = b.restricted([i](const LatticeIndex& k) { return in_ball(k, i); });
    out.a_pieces.push_back(convolve(ai, bi));
  }
  for (int j = 0; j < lb; ++j) {
    auto aj = a.restricted([j](const LatticeIndex& k) { return in_ball(k, j); });
    auto bj = b.restricted([j](const LatticeIndex& k) { return annulus_level(k) == j + 1; });
    out.b_pieces.push_back(convolve(aj, bj));
  }
  return out;
}

double l1_embedding_constant(int d, Exponent q, double s, int radius) {
  require(d >= 1 && d <= kMaxDim, ErrorCode::invalid_argument, "bad dimension");
  const double inv_dual = q.dual_reciprocal();  // 1/q'
  if (inv_dual == 0.0) return s >= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
  const double alpha = s / inv_dual;  // s q'
  if (!(alpha > d)) return std::numeric_limits<double>::infinity();

  const double h = 0.5 * std::sqrt(static_cast<double>(d));
  require(radius > 2.0 * h, ErrorCode::invalid_argument, "truncation radius too small");

  double sum = 0.0;
  const std::int64_t r2 = static_cast<std::int64_t>(radius) * radius;
  std::array<int, kMaxDim> c{};
  const int lo = -radius;
  auto visit = [&](auto&& self, int axis, std::int64_t acc) -> void {
    if (axis == d) {
      if (acc <= r2) sum += std::pow(1.0 + static_cast<double>(acc), -0.5 * alpha);
      return;
    }
    for (c[axis] = lo; c[axis] <= radius; ++c[axis])
      self(self, axis + 1, acc + static_cast<std::int64_t>(c[axis]) * c[axis]);
  };
  visit(visit, 0, 0);

  constexpr double sphere_area[] = {2.0, 2.0 * std::numbers::pi, 4.0 * std::numbers::pi};
  const double u0 = radius - 2.0 * h;
  const double tail = sphere_area[d - 1] * std::pow(1.0 + h / u0, d - 1) * std::pow(u0, d - alpha) /
                      (alpha - d);
  return std::pow(sum + tail, inv_dual);
}

void write_lattice_seq(std::ostream& os, const LatticeSeq& a, Exponent q, double s) {
  const auto old_prec = os.precision(17);
  os << a.dim() << ' ' << q.str() << ' ' << s << ' ' << a.support_radius() << '\n';
  for (const auto& [k, v] : a.entries()) {
    for (int i = 0; i < k.dim; ++i) os << k.c[i] << ' ';
    os << v.real() << ' ' << v.imag() << '\n';
  }
  os.precision(old_prec);
}

LatticeSeqFile read_lattice_seq(std::istream& is) {
  std::string line;
  auto next_line = [&]() {
    while (std::getline(is, line)) {
      const auto first = line.find_first_not_of(" \t\r");
      if (first != std::string::npos && line[first] != '#') return true;
    }
    return false;
  };
  require(next_line(), ErrorCode::io, "lattice sequence file: missing header");
  std::istringstream header(line);
  int d = 0;
  int radius = 0;
  std::string q_text;
  double s = 0.0;
  require(static_cast<bool>(header >> d >> q_text >> s >> radius), ErrorCode::io,
          "lattice sequence file: malformed header");
  require(d >= 1 && d <= kMaxDim && radius >= 0, ErrorCode::io,
          "lattice sequence file: header out of range");

  std::vector<LatticeSeq::Entry> entries;
  while (next_line()) {
    std::istringstream row(line);
    LatticeIndex k = LatticeIndex::zero(d);
    for (int i = 0; i < d; ++i)
      require(static_cast<bool>(row >> k.c[i]), ErrorCode::io, "lattice sequence file: bad index");
    double re = 0.0;
    double im = 0.0;
    require(static_cast<bool>(row >> re >> im), ErrorCode::io, "lattice sequence file: bad value");
    require(k.norm_sq() <= static_cast<std::int64_t>(radius) * radius, ErrorCode::io,
            "lattice sequence file: entry outside declared support radius");
    entries.emplace_back(k, cplx{re, im});
  }
  return LatticeSeqFile{LatticeSeq(d, std::move(entries)), Exponent::parse(q_text), s};
}

}  // namespace modnls
