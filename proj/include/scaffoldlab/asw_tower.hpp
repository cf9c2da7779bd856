#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "scaffoldlab/witt_engine.hpp"

namespace scaffoldlab {

class Tower;

struct TowerConfig {
  unsigned p = 2;
  unsigned n = 1;
  std::vector<LaurentSeries> beta;
  long long series_precision = 64;  // absolute target for derived inversions
};

// An element of the degree-p^n extension L = K(x_0, .., x_{n-1}), stored on the
// monomial basis x_0^{a_0} .. x_{n-1}^{a_{n-1}} with 0 <= a_i < p.  Slot index
// = sum a_i p^i; every coefficient is a LaurentSeries over the base field.
class TowerElement {
 public:
  TowerElement(std::shared_ptr<const Tower> tower, std::vector<LaurentSeries> coords);

  const Tower& tower() const { return *tower_; }
  std::shared_ptr<const Tower> tower_ptr() const { return tower_; }
  const std::vector<LaurentSeries>& coords() const { return coords_; }
  const LaurentSeries& coord(size_t idx) const { return coords_.at(idx); }

  bool known_zero() const;   // nothing stored anywhere
  bool exact_zero() const;
  bool in_base_field() const;  // all non-constant slots known zero
  const LaurentSeries& base_part() const { return coords_[0]; }

  TowerElement operator-() const;
  friend TowerElement operator+(const TowerElement& a, const TowerElement& b);
  friend TowerElement operator-(const TowerElement& a, const TowerElement& b);
  friend TowerElement operator*(const TowerElement& a, const TowerElement& b);
  TowerElement& operator+=(const TowerElement& o) { return *this = *this + o; }
  TowerElement& operator-=(const TowerElement& o) { return *this = *this - o; }
  TowerElement& operator*=(const TowerElement& o) { return *this = *this * o; }
  TowerElement scale(const LaurentSeries& c) const;
  TowerElement pow(unsigned long long e) const;

  // Structural equality of stored coordinates (same tower instance required).
  friend bool operator==(const TowerElement& a, const TowerElement& b);

  std::string str() const;

 private:
  std::shared_ptr<const Tower> tower_;
  std::vector<LaurentSeries> coords_;
};

// The cyclic degree-p^n extension generated by x_0, .., x_{n-1} subject to
// x_i^p = x_i + beta_i + d_i (d_i the evaluated carry in the lower generators),
// with the Galois generator acting by coordinatewise unit translation.
// Immutable after build(); safe to share across threads.
class Tower : public std::enable_shared_from_this<Tower> {
 public:
  static std::shared_ptr<const Tower> build(const TowerConfig& cfg);

  const TowerConfig& config() const { return cfg_; }
  const PrimeField& field() const { return field_; }
  unsigned p() const { return cfg_.p; }
  unsigned n() const { return cfg_.n; }
  unsigned long long pn() const { return pn_; }
  const std::vector<LaurentSeries>& beta() const { return cfg_.beta; }
  const WittData& witt() const { return *witt_; }
  // d_i: the carry term in the relation for x_i (an element in x_0..x_{i-1}).
  const TowerElement& carry_term(unsigned i) const { return d_.at(i); }

  TowerElement zero() const;
  TowerElement one() const;
  TowerElement from_series(LaurentSeries s) const;
  TowerElement generator(unsigned i) const;
  // x_0^{e_0} .. x_{n-1}^{e_{n-1}} * coeff, exponents arbitrary; fully reduced.
  TowerElement monomial(const std::vector<unsigned>& exps, LaurentSeries coeff) const;
  // Reduce a raw exponent map (exponents may be >= p) to the normal basis form.
  TowerElement normal_form(
      const std::vector<std::pair<std::vector<unsigned>, LaurentSeries>>& raw) const;

  // sigma^k applied coefficientwise-fixed on K; k taken mod p^n.
  TowerElement apply_sigma(const TowerElement& e, unsigned long long k) const;
  const TowerElement& sigma_generator_image(unsigned long long k, unsigned i) const;

  // Product over all conjugates; asserts the result lands in K (ContractError
  // when a non-constant slot carries stored terms).
  LaurentSeries norm(const TowerElement& e) const;
  // Valuation on L normalised so v_L(uniformizer of L) = 1, computed through
  // the norm (slotwise minimums are NOT a valid valuation on this basis).
  Valuation valuation(const TowerElement& e) const;
  long long exact_valuation(const TowerElement& e) const;

  // Multiplicative inverse via the conjugate product; inversion of the base
  // norm targets the configured series precision.
  TowerElement invert(const TowerElement& e) const;

  // The same construction over the first j coordinates of beta.
  std::shared_ptr<const Tower> subtower(unsigned j) const;
  // Embed an element of a subtower built from a prefix of this beta.
  TowerElement lift(const TowerElement& sub) const;

  size_t index_of(const std::vector<unsigned>& exps) const;
  std::vector<unsigned> exps_of(size_t idx) const;

 private:
  explicit Tower(TowerConfig cfg);
  void init(const std::shared_ptr<Tower>& self);
  void fill_reductions(const std::shared_ptr<Tower>& self, unsigned nvars);
  size_t pair_code(const std::vector<unsigned>& exps) const;
  const TowerElement& reduction_for(const std::vector<unsigned>& exps) const;

  TowerConfig cfg_;
  PrimeField field_;
  unsigned long long pn_ = 1;
  std::shared_ptr<const WittData> witt_;
  std::vector<TowerElement> d_;    // carries, one per level
  std::vector<TowerElement> xp_;   // x_i^p in normal form
  std::vector<std::vector<unsigned>> digits_;  // slot index -> exponent tuple
  // reductions of x-exponent tuples with entries in [0, 2p-2] (all products of
  // two normal monomials land here); complete after init, read-only afterwards
  std::vector<std::optional<TowerElement>> reductions_;
  // sigma^k(x_i) for all k < p^n
  std::vector<std::vector<TowerElement>> sigma_x_;

  friend TowerElement operator*(const TowerElement& a, const TowerElement& b);
};

struct TowerRing {
  const Tower* tower;
  using Elem = TowerElement;
  Elem zero() const { return tower->zero(); }
  Elem one() const { return tower->one(); }
  Elem add(const Elem& a, const Elem& b) const { return a + b; }
  Elem mul(const Elem& a, const Elem& b) const { return a * b; }
  Elem from_unsigned(unsigned c) const {
    return tower->from_series(LaurentSeries::constant(tower->field(), c));
  }
};

}  // namespace scaffoldlab
