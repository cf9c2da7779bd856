#include "scaffoldlab/witt_engine.hpp"

#include <mutex>
#include <numeric>
#include <sstream>

namespace scaffoldlab {

bool MonomialOrder::operator()(const Monomial& a, const Monomial& b) const {
  unsigned da = std::accumulate(a.begin(), a.end(), 0u);
  unsigned db = std::accumulate(b.begin(), b.end(), 0u);
  if (da != db) return da < db;
  return std::lexicographical_compare(b.begin(), b.end(), a.begin(), a.end());
}

IntPolynomial IntPolynomial::constant(unsigned levels, BigInt c) {
  IntPolynomial r(levels);
  if (c != 0) r.terms_.emplace(Monomial(2 * levels, 0), std::move(c));
  return r;
}

IntPolynomial IntPolynomial::variable_x(unsigned levels, unsigned h) {
  if (h >= levels) throw ContractError("variable_x: index out of range");
  IntPolynomial r(levels);
  Monomial m(2 * levels, 0);
  m[h] = 1;
  r.terms_.emplace(std::move(m), 1);
  return r;
}

IntPolynomial IntPolynomial::variable_y(unsigned levels, unsigned h) {
  if (h >= levels) throw ContractError("variable_y: index out of range");
  IntPolynomial r(levels);
  Monomial m(2 * levels, 0);
  m[levels + h] = 1;
  r.terms_.emplace(std::move(m), 1);
  return r;
}

void IntPolynomial::insert(const Monomial& mono, const BigInt& c) {
  if (c == 0) return;
  auto [it, inserted] = terms_.emplace(mono, c);
  if (!inserted) {
    it->second += c;
    if (it->second == 0) terms_.erase(it);
  }
}

IntPolynomial IntPolynomial::operator-() const {
  IntPolynomial r(levels_);
  for (auto& [m, c] : terms_) r.terms_.emplace(m, -c);
  return r;
}

IntPolynomial operator+(const IntPolynomial& a, const IntPolynomial& b) {
  if (a.levels_ != b.levels_) throw ContractError("polynomial level mismatch in +");
  IntPolynomial r = a;
  for (auto& [m, c] : b.terms_) r.insert(m, c);
  return r;
}

IntPolynomial operator-(const IntPolynomial& a, const IntPolynomial& b) { return a + (-b); }

IntPolynomial operator*(const IntPolynomial& a, const IntPolynomial& b) {
  if (a.levels_ != b.levels_) throw ContractError("polynomial level mismatch in *");
  IntPolynomial r(a.levels_);
  Monomial prod(2 * a.levels_);
  for (auto& [ma, ca] : a.terms_) {
    for (auto& [mb, cb] : b.terms_) {
      for (size_t k = 0; k < prod.size(); ++k) prod[k] = ma[k] + mb[k];
      r.insert(prod, ca * cb);
    }
  }
  return r;
}

IntPolynomial IntPolynomial::pow(unsigned e) const {
  IntPolynomial acc = IntPolynomial::constant(levels_, 1);
  IntPolynomial base = *this;
  while (e > 0) {
    if (e & 1) acc = acc * base;
    if (e >>= 1) base = base * base;
  }
  return acc;
}

IntPolynomial IntPolynomial::scale(const BigInt& c) const {
  IntPolynomial r(levels_);
  if (c == 0) return r;
  for (auto& [m, v] : terms_) r.terms_.emplace(m, v * c);
  return r;
}

IntPolynomial IntPolynomial::divide_exact(const BigInt& d) const {
  if (d == 0) throw ContractError("divide_exact by zero");
  IntPolynomial r(levels_);
  for (auto& [m, v] : terms_) {
    if (v % d != 0) {
      throw ContractError("divide_exact: coefficient not divisible (carry recursion broke)");
    }
    r.terms_.emplace(m, v / d);
  }
  return r;
}

IntPolynomial IntPolynomial::zero_y_below(unsigned count) const {
  IntPolynomial r(levels_);
  for (auto& [m, v] : terms_) {
    bool keep = true;
    for (unsigned h = 0; h < count && keep; ++h) {
      if (m[levels_ + h] > 0) keep = false;
    }
    if (keep) r.terms_.emplace(m, v);
  }
  return r;
}

BigInt IntPolynomial::coefficient(const std::vector<unsigned>& xexp,
                                  const std::vector<unsigned>& yexp) const {
  if (xexp.size() > levels_ || yexp.size() > levels_) {
    throw ContractError("coefficient: exponent vector longer than levels");
  }
  Monomial m(2 * levels_, 0);
  std::copy(xexp.begin(), xexp.end(), m.begin());
  std::copy(yexp.begin(), yexp.end(), m.begin() + levels_);
  auto it = terms_.find(m);
  return it == terms_.end() ? BigInt(0) : it->second;
}

BigInt IntPolynomial::eval_int(const std::vector<BigInt>& xs,
                               const std::vector<BigInt>& ys) const {
  if (xs.size() < levels_ || ys.size() < levels_) {
    throw ContractError("eval_int: not enough argument values");
  }
  BigInt acc = 0;
  for (auto& [m, c] : terms_) {
    BigInt term = c;
    for (unsigned h = 0; h < levels_; ++h) {
      for (unsigned k = 0; k < m[h]; ++k) term *= xs[h];
      for (unsigned k = 0; k < m[levels_ + h]; ++k) term *= ys[h];
    }
    acc += term;
  }
  return acc;
}

bool IntPolynomial::is_zero_mod_p(unsigned p) const {
  for (auto& [m, c] : terms_) {
    if (c % p != 0) return false;
  }
  return true;
}

namespace {

std::string render_monomial(const Monomial& m, unsigned levels) {
  std::ostringstream out;
  bool first = true;
  auto emit = [&](char v, unsigned idx, unsigned e) {
    if (e == 0) return;
    if (!first) out << "*";
    first = false;
    out << v << idx;
    if (e > 1) out << "^" << e;
  };
  for (unsigned h = 0; h < levels; ++h) emit('X', h, m[h]);
  for (unsigned h = 0; h < levels; ++h) emit('Y', h, m[levels + h]);
  return out.str();
}

}  // namespace

IntPolynomial::IsobaricResult IntPolynomial::isobaric_weight_mod_p(unsigned p) const {
  IsobaricResult res;
  bool have_weight = false;
  long long weight = 0;
  for (auto& [m, c] : terms_) {
    if (c % p == 0) continue;
    long long w = 0, ph = 1;
    for (unsigned h = 0; h < levels_; ++h) {
      w += static_cast<long long>(m[h] + m[levels_ + h]) * ph;
      ph *= p;
    }
    if (!have_weight) {
      have_weight = true;
      weight = w;
    } else if (w != weight) {
      res.offenders.push_back(render_monomial(m, levels_));
    }
  }
  if (!have_weight) throw ContractError("isobaric check on a polynomial that is zero mod p");
  res.ok = res.offenders.empty();
  res.weight = weight;
  return res;
}

std::string IntPolynomial::str() const {
  if (terms_.empty()) return "0";
  std::ostringstream out;
  bool first = true;
  for (auto& [m, c] : terms_) {
    BigInt a = c < 0 ? BigInt(-c) : c;
    if (first) {
      if (c < 0) out << "-";
      first = false;
    } else {
      out << (c < 0 ? " - " : " + ");
    }
    std::string mono = render_monomial(m, levels_);
    if (mono.empty()) {
      out << a;
    } else {
      if (a != 1) out << a << "*";
      out << mono;
    }
  }
  return out.str();
}

WittData::WittData(unsigned p, unsigned n) : p_(p), n_(n) {
  PrimeField field(p);  // validates primality and size
  pn_ = 1;
  for (unsigned i = 0; i < n; ++i) {
    pn_ *= p;
    if (pn_ > 128) {
      throw ConfigError("witt_data: p^n exceeds the desk-scale cap 128");
    }
  }
  if (n == 0) throw ConfigError("witt_data: n must be at least 1");

  // S_i via the integral recursion:
  //   p^i S_i = sum_{j<=i} p^j (X_j^{p^(i-j)} + Y_j^{p^(i-j)}) - sum_{j<i} p^j S_j^{p^(i-j)}
  S_.reserve(n);
  for (unsigned i = 0; i < n; ++i) {
    IntPolynomial num = IntPolynomial::zero(n);
    BigInt pj = 1;
    for (unsigned j = 0; j <= i; ++j) {
      unsigned e = 1;
      for (unsigned k = 0; k < i - j; ++k) e *= p;
      num += (IntPolynomial::variable_x(n, j).pow(e) + IntPolynomial::variable_y(n, j).pow(e))
                 .scale(pj);
      if (j < i) num -= S_[j].pow(e).scale(pj);
      pj *= p;
    }
    BigInt denom = 1;
    for (unsigned k = 0; k < i; ++k) denom *= p;
    S_.push_back(num.divide_exact(denom));
  }

  D_.reserve(n);
  for (unsigned i = 0; i < n; ++i) {
    D_.push_back(S_[i] - IntPolynomial::variable_x(n, i) - IntPolynomial::variable_y(n, i));
  }

  E_.resize(n);
  for (unsigned j = 0; j < n; ++j) {
    E_[j].reserve(j + 1);
    for (unsigned i = 0; i <= j; ++i) E_[j].push_back(D_[j].zero_y_below(i));
  }

  // Images of rational integers: repeated Witt addition of the unit vector.
  FpRing ring{field};
  std::vector<unsigned> acc(n, 0), one(n, 0);
  one[0] = 1 % p;
  int_reps_.reserve(pn_);
  int_reps_.push_back(acc);
  for (unsigned long long k = 1; k < pn_; ++k) {
    acc = witt_add(ring, *this, acc, one);
    int_reps_.push_back(acc);
  }
}

const IntPolynomial& WittData::E(unsigned i, unsigned j) const {
  if (j >= n_ || i > j) throw ContractError("E(i,j): need 0 <= i <= j < n");
  return E_[j][i];
}

const std::vector<unsigned>& WittData::integer_rep(unsigned long long k) const {
  return int_reps_[k % pn_];
}

std::shared_ptr<const WittData> witt_data(unsigned p, unsigned n) {
  static std::mutex mu;
  static std::map<std::pair<unsigned, unsigned>, std::shared_ptr<const WittData>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(p, n);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto data = std::make_shared<const WittData>(p, n);
  cache.emplace(key, data);
  return data;
}

}  // namespace scaffoldlab
