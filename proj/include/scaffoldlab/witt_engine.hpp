#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "scaffoldlab/series_field.hpp"

namespace scaffoldlab {

using BigInt = boost::multiprecision::cpp_int;

// Exponent vector [x_0..x_{m-1}, y_0..y_{m-1}] for a monomial in the universal
// variables X_h, Y_h.
using Monomial = std::vector<unsigned>;

// Graded order: lower total degree first; ties broken by descending
// lexicographic comparison of the exponent vector (X0 weighs heaviest).
struct MonomialOrder {
  bool operator()(const Monomial& a, const Monomial& b) const;
};

// Polynomial in X_0..X_{m-1}, Y_0..Y_{m-1} with exact integer coefficients.
class IntPolynomial {
 public:
  explicit IntPolynomial(unsigned levels) : levels_(levels) {}

  static IntPolynomial zero(unsigned levels) { return IntPolynomial(levels); }
  static IntPolynomial constant(unsigned levels, BigInt c);
  static IntPolynomial variable_x(unsigned levels, unsigned h);
  static IntPolynomial variable_y(unsigned levels, unsigned h);

  unsigned levels() const { return levels_; }
  bool is_zero() const { return terms_.empty(); }
  size_t term_count() const { return terms_.size(); }
  const std::map<Monomial, BigInt, MonomialOrder>& terms() const { return terms_; }

  IntPolynomial operator-() const;
  friend IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b);
  friend IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b);
  friend IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b);
  IntPolynomial& operator+=(const IntPolynomial& o) { return *this = *this + o; }
  IntPolynomial& operator-=(const IntPolynomial& o) { return *this = *this - o; }
  IntPolynomial pow(unsigned e) const;
  IntPolynomial scale(const BigInt& c) const;
  // Divide every coefficient by d; throws ContractError on a non-exact division.
  IntPolynomial divide_exact(const BigInt& d) const;
  // Substitute Y_0 = ... = Y_{count-1} = 0.
  IntPolynomial zero_y_below(unsigned count) const;

  // Coefficient of the monomial with the given exponents (vectors may be shorter
  // than `levels`; missing entries are zero).
  BigInt coefficient(const std::vector<unsigned>& xexp,
                     const std::vector<unsigned>& yexp) const;

  // Exact evaluation over the integers.
  BigInt eval_int(const std::vector<BigInt>& xs, const std::vector<BigInt>& ys) const;

  bool is_zero_mod_p(unsigned p) const;

  struct IsobaricResult {
    bool ok = false;
    long long weight = 0;                 // common weight when ok
    std::vector<std::string> offenders;   // rendered monomials breaking isobarity
  };
  // Checks that every monomial surviving reduction mod p has the same weight
  // under w(X_h) = w(Y_h) = p^h.  Pre: nonzero mod p.
  IsobaricResult isobaric_weight_mod_p(unsigned p) const;

  // Deterministic dump, graded order, e.g. "X1 + Y1 - X0*Y0".
  std::string str() const;

  friend bool operator==(const IntPolynomial& a, const IntPolynomial& b) {
    return a.levels_ == b.levels_ && a.terms_ == b.terms_;
  }

 private:
  void insert(const Monomial& mono, const BigInt& c);

  unsigned levels_;
  std::map<Monomial, BigInt, MonomialOrder> terms_;
};

// The universal coordinate-addition data for length-n Witt vectors at prime p:
// S_i defined by the integral recursion, carries D_i = S_i - X_i - Y_i, and the
// truncations E_{ij} = D_j |_{Y_0 = .. = Y_{i-1} = 0}.
class WittData {
 public:
  WittData(unsigned p, unsigned n);

  unsigned p() const { return p_; }
  unsigned n() const { return n_; }
  unsigned long long pn() const { return pn_; }
  const IntPolynomial& S(unsigned i) const { return S_.at(i); }
  const IntPolynomial& D(unsigned i) const { return D_.at(i); }
  // E_{ij} for 0 <= i <= j < n.
  const IntPolynomial& E(unsigned i, unsigned j) const;
  // Coordinates of the image of the rational integer k (reduced mod p^n).
  const std::vector<unsigned>& integer_rep(unsigned long long k) const;

 private:
  unsigned p_, n_;
  unsigned long long pn_;
  std::vector<IntPolynomial> S_, D_;
  std::vector<std::vector<IntPolynomial>> E_;  // E_[j][i]
  std::vector<std::vector<unsigned>> int_reps_;
};

// Shared, thread-safe cache keyed by (p, n).  Desk-scale cap: p^n <= 128.
std::shared_ptr<const WittData> witt_data(unsigned p, unsigned n);

// Coefficient rings for evaluating the mod-p reductions of the universal
// polynomials.  A ring provides: Elem, zero(), one(), add, mul, from_unsigned.
struct FpRing {
  PrimeField f;
  using Elem = unsigned;
  Elem zero() const { return 0; }
  Elem one() const { return 1 % f.p(); }
  Elem add(Elem a, Elem b) const { return f.add(a, b); }
  Elem mul(Elem a, Elem b) const { return f.mul(a, b); }
  Elem from_unsigned(unsigned c) const { return c % f.p(); }
};

struct SeriesRing {
  PrimeField f;
  using Elem = LaurentSeries;
  Elem zero() const { return LaurentSeries::zero(f); }
  Elem one() const { return LaurentSeries::one(f); }
  Elem add(const Elem& a, const Elem& b) const { return a + b; }
  Elem mul(const Elem& a, const Elem& b) const { return a * b; }
  Elem from_unsigned(unsigned c) const { return LaurentSeries::constant(f, c); }
};

// Evaluate poly mod p with X_h = xs[h], Y_h = ys[h].
template <typename Ring>
typename Ring::Elem evaluate_mod_p(const Ring& ring, unsigned p, const IntPolynomial& poly,
                                   const std::vector<typename Ring::Elem>& xs,
                                   const std::vector<typename Ring::Elem>& ys) {
  using Elem = typename Ring::Elem;
  const unsigned m = poly.levels();
  if (xs.size() < m || ys.size() < m) {
    throw ContractError("evaluate_mod_p: not enough argument values");
  }
  std::vector<std::vector<Elem>> powx(m), powy(m);
  auto power = [&](std::vector<Elem>& table, const Elem& base, unsigned e) -> const Elem& {
    if (table.empty()) table.push_back(ring.one());
    while (table.size() <= e) table.push_back(ring.mul(table.back(), base));
    return table[e];
  };
  Elem acc = ring.zero();
  for (const auto& [mono, coef] : poly.terms()) {
    long long cm = static_cast<long long>(coef % p);
    if (cm < 0) cm += p;
    if (cm == 0) continue;
    Elem term = ring.from_unsigned(static_cast<unsigned>(cm));
    for (unsigned h = 0; h < m; ++h) {
      if (mono[h] > 0) term = ring.mul(term, power(powx[h], xs[h], mono[h]));
      if (mono[m + h] > 0) term = ring.mul(term, power(powy[h], ys[h], mono[m + h]));
    }
    acc = ring.add(acc, term);
  }
  return acc;
}

// Coordinatewise Witt sum u (+) v over any coefficient ring of characteristic p.
template <typename Ring>
std::vector<typename Ring::Elem> witt_add(const Ring& ring, const WittData& w,
                                          const std::vector<typename Ring::Elem>& u,
                                          const std::vector<typename Ring::Elem>& v) {
  if (u.size() != w.n() || v.size() != w.n()) {
    throw ContractError("witt_add: vector length must equal n");
  }
  std::vector<typename Ring::Elem> out;
  out.reserve(w.n());
  for (unsigned i = 0; i < w.n(); ++i) {
    out.push_back(evaluate_mod_p(ring, w.p(), w.S(i), u, v));
  }
  return out;
}

}  // namespace scaffoldlab
