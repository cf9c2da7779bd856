#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "scaffoldlab/prime_field.hpp"

namespace scaffoldlab {

// Valuation of a series that may only be known up to finite precision.
//   finite   — v is the exact valuation (leading term stored).
//   at_least — the series is zero as far as stored, but only known below `value`.
//   infinite — the series is exactly zero.
struct Valuation {
  enum class Kind { finite, at_least, infinite };

  Kind kind = Kind::infinite;
  long long value = 0;  // meaningful for finite / at_least

  static Valuation finite(long long v) { return {Kind::finite, v}; }
  static Valuation at_least(long long v) { return {Kind::at_least, v}; }
  static Valuation infinite() { return {Kind::infinite, 0}; }

  bool is_finite() const { return kind == Kind::finite; }
  bool is_infinite() const { return kind == Kind::infinite; }
  bool is_exact() const { return kind != Kind::at_least; }
  // Lower bound usable in precision bookkeeping; caller must handle infinite separately.
  long long lower_bound() const { return value; }
  // True when the valuation is provably >= bound (conservative for at_least).
  bool at_least_ge(long long bound) const {
    return kind == Kind::infinite || value >= bound;
  }
  std::string str() const;

  friend bool operator==(const Valuation&, const Valuation&) = default;
};

// An element of F_p((t)), stored as a sparse map exponent -> coefficient in [1, p).
// `prec` == nullopt means the element is known exactly (finite support);
// otherwise coefficients are known for every exponent < *prec and unknown above.
class LaurentSeries {
 public:
  explicit LaurentSeries(PrimeField field) : field_(field) {}

  static LaurentSeries zero(PrimeField field) { return LaurentSeries(field); }
  static LaurentSeries constant(PrimeField field, long long c) {
    return monomial(field, c, 0);
  }
  static LaurentSeries one(PrimeField field) { return constant(field, 1); }
  static LaurentSeries monomial(PrimeField field, long long coeff, long long exp) {
    LaurentSeries s(field);
    unsigned c = field.reduce(coeff);
    if (c != 0) s.terms_[exp] = c;
    return s;
  }

  const PrimeField& field() const { return field_; }
  unsigned p() const { return field_.p(); }

  bool exact() const { return !prec_.has_value(); }
  std::optional<long long> precision() const { return prec_; }

  // No stored terms: exactly zero, or zero as far as the precision window sees.
  bool known_zero() const { return terms_.empty(); }
  bool exact_zero() const { return terms_.empty() && exact(); }
  bool is_one() const {
    return terms_.size() == 1 && terms_.begin()->first == 0 && terms_.begin()->second == 1;
  }

  const std::map<long long, unsigned>& terms() const { return terms_; }

  Valuation valuation() const {
    if (!terms_.empty()) return Valuation::finite(terms_.begin()->first);
    if (exact()) return Valuation::infinite();
    return Valuation::at_least(*prec_);
  }
  // Exact finite valuation or throw (PrecisionError when undecidable, ContractError on 0).
  long long exact_valuation() const;
  unsigned leading_coeff() const;  // throws on known_zero

  // Coefficient of t^e; throws PrecisionError when e is outside the known window.
  unsigned coeff(long long e) const;

  LaurentSeries operator-() const;
  friend LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b);
  friend LaurentSeries operator-(const LaurentSeries& a, const LaurentSeries& b);
  friend LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b);
  LaurentSeries& operator+=(const LaurentSeries& o) { return *this = *this + o; }
  LaurentSeries& operator-=(const LaurentSeries& o) { return *this = *this - o; }
  LaurentSeries& operator*=(const LaurentSeries& o) { return *this = *this * o; }

  LaurentSeries scale(long long c) const;       // multiply by a scalar
  LaurentSeries shift(long long e) const;       // multiply by t^e
  LaurentSeries truncated(long long cap) const; // drop knowledge at/above cap
  LaurentSeries pow(unsigned long long e) const;

  // Multiplicative inverse with s * inverse ~ 1; the result's coefficients are
  // known below target_prec (exact when s is a monomial, or capped by s's own precision).
  LaurentSeries inverse(long long target_prec) const;

  // Exact quotient a/b of exactly-known series with finite support; throws
  // ContractError when the division does not terminate with zero remainder.
  static LaurentSeries divide_exact(const LaurentSeries& a, const LaurentSeries& b);

  LaurentSeries frobenius() const;                   // s -> s^p
  LaurentSeries frobenius_iterate(unsigned k) const; // s -> s^(p^k)

  // Structural equality (same stored terms and same precision tag).
  friend bool operator==(const LaurentSeries& a, const LaurentSeries& b) {
    return a.field_ == b.field_ && a.terms_ == b.terms_ && a.prec_ == b.prec_;
  }

  // True when a and b agree on every exponent both know about.
  static bool agree_to_common_precision(const LaurentSeries& a, const LaurentSeries& b);

  // Canonical text form, lowest exponent first: "t^-1 + 2*t^3", "0", "1".
  std::string str() const;

 private:
  void set_precision(std::optional<long long> prec);
  void insert_term(long long e, unsigned c);

  PrimeField field_;
  std::map<long long, unsigned> terms_;
  std::optional<long long> prec_;
};

// Parse the grammar used by configs: sum of terms 'c', 't', 't^e', 'c*t^e' with
// integer literals, '+'/'-' separators, optional whitespace.  Throws ConfigError
// with a position on malformed input.
LaurentSeries parse_series(const PrimeField& field, std::string_view text);

}  // namespace scaffoldlab
