#include "scaffoldlab/series_field.hpp"

#include <algorithm>
#include <cctype>
#include <limits>
#include <sstream>
#include <vector>

namespace scaffoldlab {

namespace {

std::optional<long long> min_prec(std::optional<long long> a, std::optional<long long> b) {
  if (!a) return b;
  if (!b) return a;
  return std::min(*a, *b);
}

}  // namespace

std::string Valuation::str() const {
  switch (kind) {
    case Kind::finite:
      return std::to_string(value);
    case Kind::at_least:
      return ">=" + std::to_string(value);
    case Kind::infinite:
      return "infinity";
  }
  return "?";
}

long long LaurentSeries::exact_valuation() const {
  if (!terms_.empty()) return terms_.begin()->first;
  if (exact()) throw ContractError("exact_valuation of the zero series");
  throw PrecisionError("valuation undetermined: series is zero below precision " +
                       std::to_string(*prec_));
}

unsigned LaurentSeries::leading_coeff() const {
  if (terms_.empty()) {
    if (exact()) throw ContractError("leading_coeff of the zero series");
    throw PrecisionError("leading coefficient unknown at this precision");
  }
  return terms_.begin()->second;
}

unsigned LaurentSeries::coeff(long long e) const {
  auto it = terms_.find(e);
  if (it != terms_.end()) return it->second;
  if (prec_ && e >= *prec_) {
    throw PrecisionError("coefficient of t^" + std::to_string(e) +
                         " unknown beyond precision " + std::to_string(*prec_));
  }
  return 0;
}

void LaurentSeries::set_precision(std::optional<long long> prec) {
  prec_ = prec;
  if (prec_) {
    auto it = terms_.lower_bound(*prec_);
    terms_.erase(it, terms_.end());
  }
}

void LaurentSeries::insert_term(long long e, unsigned c) {
  c %= field_.p();
  if (c == 0) return;
  if (prec_ && e >= *prec_) return;
  auto [it, inserted] = terms_.emplace(e, c);
  if (!inserted) {
    unsigned s = field_.add(it->second, c);
    if (s == 0) {
      terms_.erase(it);
    } else {
      it->second = s;
    }
  }
}

LaurentSeries LaurentSeries::operator-() const {
  LaurentSeries r(field_);
  r.prec_ = prec_;
  for (auto& [e, c] : terms_) r.terms_[e] = field_.neg(c);
  return r;
}

LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b) {
  if (!(a.field_ == b.field_)) throw ContractError("series field mismatch in +");
  LaurentSeries r = a;
  r.set_precision(min_prec(a.prec_, b.prec_));
  for (auto& [e, c] : b.terms_) r.insert_term(e, c);
  return r;
}

LaurentSeries operator-(const LaurentSeries& a, const LaurentSeries& b) { return a + (-b); }

LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b) {
  if (!(a.field_ == b.field_)) throw ContractError("series field mismatch in *");
  const PrimeField& f = a.field_;
  LaurentSeries r(f);
  if (a.exact_zero() || b.exact_zero()) return r;  // exactly zero

  // Result precision: each input's uncertainty enters shifted by the other's valuation.
  std::optional<long long> prec;
  if (a.prec_) prec = min_prec(prec, *a.prec_ + b.valuation().lower_bound());
  if (b.prec_) prec = min_prec(prec, *b.prec_ + a.valuation().lower_bound());
  r.set_precision(prec);
  if (a.terms_.empty() || b.terms_.empty()) return r;

  const auto& big = a.terms_.size() >= b.terms_.size() ? a.terms_ : b.terms_;
  const auto& small = a.terms_.size() >= b.terms_.size() ? b.terms_ : a.terms_;
  const long long lo = big.begin()->first + small.begin()->first;
  long long hi = big.rbegin()->first + small.rbegin()->first + 1;
  if (prec) hi = std::min(hi, *prec);
  if (hi <= lo) return r;

  std::vector<long long> acc(static_cast<size_t>(hi - lo), 0);
  for (auto& [ea, ca] : big) {
    for (auto& [eb, cb] : small) {
      long long e = ea + eb;
      if (e >= hi) break;  // small is sorted ascending
      acc[static_cast<size_t>(e - lo)] += static_cast<long long>(ca) * cb;
    }
  }
  for (size_t i = 0; i < acc.size(); ++i) {
    unsigned c = f.reduce(acc[i]);
    if (c != 0) r.terms_.emplace_hint(r.terms_.end(), lo + static_cast<long long>(i), c);
  }
  return r;
}

LaurentSeries LaurentSeries::scale(long long c) const {
  unsigned cc = field_.reduce(c);
  LaurentSeries r(field_);
  r.prec_ = prec_;
  if (cc == 0) {
    return r;  // keeps precision tag: scalar zero annihilates stored terms exactly
  }
  for (auto& [e, v] : terms_) r.terms_[e] = field_.mul(v, cc);
  return r;
}

LaurentSeries LaurentSeries::shift(long long e) const {
  LaurentSeries r(field_);
  if (prec_) r.prec_ = *prec_ + e;
  for (auto& [k, v] : terms_) r.terms_[k + e] = v;
  return r;
}

LaurentSeries LaurentSeries::truncated(long long cap) const {
  LaurentSeries r = *this;
  r.set_precision(min_prec(prec_, cap));
  return r;
}

LaurentSeries LaurentSeries::pow(unsigned long long e) const {
  LaurentSeries acc = LaurentSeries::one(field_);
  LaurentSeries base = *this;
  while (e > 0) {
    if (e & 1) acc *= base;
    if (e >>= 1) base *= base;
  }
  return acc;
}

LaurentSeries LaurentSeries::inverse(long long target_prec) const {
  if (terms_.empty()) {
    if (exact()) throw ContractError("inverse of the zero series");
    throw PrecisionError("inverse needs a leading term; series is zero below precision " +
                         std::to_string(*prec_));
  }
  const long long v = terms_.begin()->first;
  const unsigned lead_inv = field_.inv(terms_.begin()->second);
  if (terms_.size() == 1) {
    LaurentSeries r = LaurentSeries::monomial(field_, lead_inv, -v);
    if (prec_) r.set_precision(*prec_ - 2 * v);
    return r;
  }
  long long result_prec = target_prec;
  if (prec_) result_prec = std::min(result_prec, *prec_ - 2 * v);

  // u = unit part with constant term 1; w = u^{-1} by back substitution.
  const long long m_cap = result_prec + v;  // coefficients of w needed below m_cap
  std::vector<unsigned> u(static_cast<size_t>(std::max<long long>(m_cap, 0)), 0);
  for (auto& [e, c] : terms_) {
    long long k = e - v;
    if (k < m_cap) u[static_cast<size_t>(k)] = field_.mul(c, lead_inv);
  }
  LaurentSeries r(field_);
  r.prec_ = result_prec;
  if (m_cap > 0) {
    std::vector<unsigned> w(static_cast<size_t>(m_cap), 0);
    w[0] = 1;
    for (long long m = 1; m < m_cap; ++m) {
      long long s = 0;
      for (long long k = 1; k <= m; ++k) {
        if (u[static_cast<size_t>(k)] != 0) {
          s += static_cast<long long>(u[static_cast<size_t>(k)]) *
               w[static_cast<size_t>(m - k)];
        }
      }
      w[static_cast<size_t>(m)] = field_.neg(field_.reduce(s));
    }
    for (long long m = 0; m < m_cap; ++m) {
      unsigned c = field_.mul(w[static_cast<size_t>(m)], lead_inv);
      if (c != 0) r.terms_[m - v] = c;
    }
  }
  return r;
}

LaurentSeries LaurentSeries::divide_exact(const LaurentSeries& a, const LaurentSeries& b) {
  if (!a.exact() || !b.exact()) throw ContractError("divide_exact needs exact operands");
  if (b.exact_zero()) throw ContractError("divide_exact by zero");
  if (a.exact_zero()) return LaurentSeries::zero(a.field_);
  const long long deg_gap = a.terms_.rbegin()->first - b.terms_.rbegin()->first;
  LaurentSeries q(a.field_);
  LaurentSeries r = a;
  const PrimeField& f = a.field_;
  const long long vb = b.terms_.begin()->first;
  const unsigned ib = f.inv(b.terms_.begin()->second);
  while (!r.terms_.empty() && r.terms_.begin()->first - vb <= deg_gap) {
    LaurentSeries qt =
        LaurentSeries::monomial(f, f.mul(r.terms_.begin()->second, ib),
                                r.terms_.begin()->first - vb);
    q += qt;
    r -= qt * b;
  }
  if (!r.terms_.empty()) throw ContractError("divide_exact: division is not exact");
  return q;
}

LaurentSeries LaurentSeries::frobenius() const {
  LaurentSeries r(field_);
  const long long p = field_.p();
  if (prec_) r.prec_ = *prec_ * p;  // gaps between stored p-th powers are known zero
  for (auto& [e, c] : terms_) r.terms_[e * p] = c;  // c^p = c in F_p
  return r;
}

LaurentSeries LaurentSeries::frobenius_iterate(unsigned k) const {
  LaurentSeries r = *this;
  for (unsigned i = 0; i < k; ++i) r = r.frobenius();
  return r;
}

bool LaurentSeries::agree_to_common_precision(const LaurentSeries& a, const LaurentSeries& b) {
  if (!(a.field_ == b.field_)) return false;
  std::optional<long long> common = min_prec(a.prec_, b.prec_);
  auto below = [&](long long e) { return !common || e < *common; };
  for (auto& [e, c] : a.terms_) {
    if (below(e) && (!b.terms_.count(e) || b.terms_.at(e) != c)) return false;
  }
  for (auto& [e, c] : b.terms_) {
    if (below(e) && !a.terms_.count(e)) return false;
  }
  return true;
}

std::string LaurentSeries::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (auto& [e, c] : terms_) {
    if (!first) out << " + ";
    first = false;
    if (e == 0) {
      out << c;
    } else {
      if (c != 1) out << c << "*";
      out << "t";
      if (e != 1) out << "^" << e;
    }
  }
  return out.str();
}

namespace {

class SeriesParser {
 public:
  SeriesParser(const PrimeField& field, std::string_view text)
      : field_(field), text_(text) {}

  LaurentSeries run() {
    LaurentSeries acc = LaurentSeries::zero(field_);
    skip_ws();
    if (eof()) fail("empty series text");
    bool negate = false;
    if (peek() == '+' || peek() == '-') {
      negate = (take() == '-');
      skip_ws();
    }
    acc += term(negate);
    skip_ws();
    while (!eof()) {
      char sep = take();
      if (sep != '+' && sep != '-') fail("expected '+' or '-'");
      skip_ws();
      acc += term(sep == '-');
      skip_ws();
    }
    return acc;
  }

 private:
  bool eof() const { return pos_ >= text_.size(); }
  char peek() const { return text_[pos_]; }
  char take() { return text_[pos_++]; }
  void skip_ws() {
    while (!eof() && std::isspace(static_cast<unsigned char>(peek()))) ++pos_;
  }
  [[noreturn]] void fail(const std::string& msg) const {
    throw ConfigError("series parse error at position " + std::to_string(pos_) + ": " + msg +
                      " in \"" + std::string(text_) + "\"");
  }

  long long integer() {
    bool neg = false;
    if (!eof() && peek() == '-') {
      neg = true;
      ++pos_;
    }
    if (eof() || !std::isdigit(static_cast<unsigned char>(peek()))) fail("expected an integer");
    long long v = 0;
    while (!eof() && std::isdigit(static_cast<unsigned char>(peek()))) {
      v = v * 10 + (take() - '0');
      if (v > std::numeric_limits<long long>::max() / 16) fail("integer literal too large");
    }
    return neg ? -v : v;
  }

  // term := int ['*' tpart] | tpart ; tpart := 't' ['^' int]
  LaurentSeries term(bool negate) {
    if (eof()) fail("expected a term");
    long long coeff = 1;
    bool have_coeff = false;
    if (peek() == '-' || std::isdigit(static_cast<unsigned char>(peek()))) {
      coeff = integer();
      have_coeff = true;
    }
    long long exp = 0;
    if (!eof() && (peek() == 't' || peek() == '*')) {
      if (have_coeff) {
        if (peek() != '*') fail("expected '*' between coefficient and t");
        ++pos_;
        skip_ws();
      }
      if (eof() || peek() != 't') fail("expected 't'");
      ++pos_;
      exp = 1;
      if (!eof() && peek() == '^') {
        ++pos_;
        exp = integer();
      }
    } else if (!have_coeff) {
      fail("expected a coefficient or 't'");
    }
    if (!eof() && !std::isspace(static_cast<unsigned char>(peek())) && peek() != '+' &&
        peek() != '-') {
      fail("unexpected character '" + std::string(1, peek()) + "'");
    }
    return LaurentSeries::monomial(field_, negate ? -coeff : coeff, exp);
  }

  const PrimeField& field_;
  std::string_view text_;
  size_t pos_ = 0;
};

}  // namespace

LaurentSeries parse_series(const PrimeField& field, std::string_view text) {
  return SeriesParser(field, text).run();
}

}  // namespace scaffoldlab
