#include "scaffoldlab/asw_tower.hpp"

#include <algorithm>
#include <sstream>

#include "scaffoldlab/errors.hpp"

namespace scaffoldlab {

namespace {
// Everything downstream of the tower (conjugate products, operator checks)
// scales at least linearly in p^n slots per element; keep interactive.
constexpr unsigned long long kTowerCap = 27;
}  // namespace

// ---------------------------------------------------------------------------
// TowerElement

TowerElement::TowerElement(std::shared_ptr<const Tower> tower, std::vector<LaurentSeries> coords)
    : tower_(std::move(tower)), coords_(std::move(coords)) {
  if (!tower_) throw ContractError("tower element constructed without a tower");
  if (coords_.size() != tower_->pn()) {
    throw ContractError("tower element needs exactly p^n coordinates");
  }
}

bool TowerElement::known_zero() const {
  return std::all_of(coords_.begin(), coords_.end(),
                     [](const LaurentSeries& c) { return c.known_zero(); });
}

bool TowerElement::exact_zero() const {
  return std::all_of(coords_.begin(), coords_.end(),
                     [](const LaurentSeries& c) { return c.exact_zero(); });
}

bool TowerElement::in_base_field() const {
  for (size_t i = 1; i < coords_.size(); ++i) {
    if (!coords_[i].known_zero()) return false;
  }
  return true;
}

TowerElement TowerElement::operator-() const {
  std::vector<LaurentSeries> out;
  out.reserve(coords_.size());
  for (const auto& c : coords_) out.push_back(-c);
  return TowerElement(tower_, std::move(out));
}

static void require_same_tower(const TowerElement& a, const TowerElement& b) {
  if (a.tower_ptr() != b.tower_ptr()) {
    throw ContractError("tower elements belong to different towers");
  }
}

TowerElement operator+(const TowerElement& a, const TowerElement& b) {
  require_same_tower(a, b);
  std::vector<LaurentSeries> out;
  out.reserve(a.coords_.size());
  for (size_t i = 0; i < a.coords_.size(); ++i) out.push_back(a.coords_[i] + b.coords_[i]);
  return TowerElement(a.tower_, std::move(out));
}

TowerElement operator-(const TowerElement& a, const TowerElement& b) {
  require_same_tower(a, b);
  std::vector<LaurentSeries> out;
  out.reserve(a.coords_.size());
  for (size_t i = 0; i < a.coords_.size(); ++i) out.push_back(a.coords_[i] - b.coords_[i]);
  return TowerElement(a.tower_, std::move(out));
}

TowerElement operator*(const TowerElement& a, const TowerElement& b) {
  require_same_tower(a, b);
  const Tower& tw = *a.tower_;
  const size_t pn = tw.pn();
  const unsigned n = tw.n();
  const unsigned p = tw.p();
  std::vector<LaurentSeries> out(pn, LaurentSeries::zero(tw.field()));
  std::vector<unsigned> e(n);
  for (size_t ia = 0; ia < pn; ++ia) {
    const LaurentSeries& ca = a.coords_[ia];
    if (ca.exact_zero()) continue;
    const auto& da = tw.digits_[ia];
    for (size_t ib = 0; ib < pn; ++ib) {
      const LaurentSeries& cb = b.coords_[ib];
      if (cb.exact_zero()) continue;
      const auto& db = tw.digits_[ib];
      LaurentSeries prod = ca * cb;
      bool normal = true;
      for (unsigned h = 0; h < n; ++h) {
        e[h] = da[h] + db[h];
        if (e[h] >= p) normal = false;
      }
      if (normal) {
        out[tw.index_of(e)] += prod;
      } else {
        const TowerElement& red = tw.reduction_for(e);
        for (size_t s = 0; s < pn; ++s) {
          const LaurentSeries& rs = red.coords_[s];
          if (rs.exact_zero()) continue;
          out[s] += prod * rs;
        }
      }
    }
  }
  return TowerElement(a.tower_, std::move(out));
}

TowerElement TowerElement::scale(const LaurentSeries& c) const {
  std::vector<LaurentSeries> out;
  out.reserve(coords_.size());
  for (const auto& slot : coords_) out.push_back(slot * c);
  return TowerElement(tower_, std::move(out));
}

TowerElement TowerElement::pow(unsigned long long e) const {
  TowerElement acc = tower_->one();
  TowerElement base = *this;
  while (e > 0) {
    if (e & 1ULL) acc *= base;
    e >>= 1ULL;
    if (e > 0) base *= base;
  }
  return acc;
}

bool operator==(const TowerElement& a, const TowerElement& b) {
  require_same_tower(a, b);
  return a.coords_ == b.coords_;
}

std::string TowerElement::str() const {
  std::ostringstream os;
  bool first = true;
  for (size_t idx = 0; idx < coords_.size(); ++idx) {
    if (coords_[idx].exact_zero()) continue;
    if (!first) os << " + ";
    first = false;
    os << "(" << coords_[idx].str() << ")";
    const auto exps = tower_->exps_of(idx);
    for (size_t h = 0; h < exps.size(); ++h) {
      if (exps[h] == 0) continue;
      os << "*x" << h;
      if (exps[h] > 1) os << "^" << exps[h];
    }
  }
  if (first) os << "0";
  return os.str();
}

// ---------------------------------------------------------------------------
// Tower

Tower::Tower(TowerConfig cfg) : cfg_(std::move(cfg)), field_(cfg_.p) {
  if (cfg_.n == 0) throw ConfigError("tower depth n must be at least 1");
  pn_ = 1;
  for (unsigned i = 0; i < cfg_.n; ++i) {
    pn_ *= cfg_.p;
    if (pn_ > kTowerCap) {
      throw ConfigError("tower size p^n exceeds the supported cap of 27");
    }
  }
  if (cfg_.beta.size() != cfg_.n) {
    throw ConfigError("tower needs exactly n defining series");
  }
  for (const auto& b : cfg_.beta) {
    if (!(b.field() == field_)) {
      throw ConfigError("defining series live over the wrong prime field");
    }
  }
}

std::shared_ptr<const Tower> Tower::build(const TowerConfig& cfg) {
  std::shared_ptr<Tower> t(new Tower(cfg));
  t->init(t);
  return t;
}

size_t Tower::index_of(const std::vector<unsigned>& exps) const {
  if (exps.size() != cfg_.n) throw ContractError("exponent tuple has wrong length");
  size_t idx = 0, weight = 1;
  for (unsigned i = 0; i < cfg_.n; ++i) {
    if (exps[i] >= cfg_.p) throw ContractError("exponent tuple is not in normal form");
    idx += exps[i] * weight;
    weight *= cfg_.p;
  }
  return idx;
}

std::vector<unsigned> Tower::exps_of(size_t idx) const {
  if (idx >= pn_) throw ContractError("slot index out of range");
  return digits_[idx];
}

size_t Tower::pair_code(const std::vector<unsigned>& exps) const {
  const unsigned radix = 2 * cfg_.p - 1;
  size_t code = 0, weight = 1;
  for (unsigned i = 0; i < cfg_.n; ++i) {
    if (exps[i] >= radix) throw ContractError("exponent tuple outside the product range");
    code += exps[i] * weight;
    weight *= radix;
  }
  return code;
}

const TowerElement& Tower::reduction_for(const std::vector<unsigned>& exps) const {
  const auto& slot = reductions_[pair_code(exps)];
  if (!slot.has_value()) throw ContractError("reduction table lookup missed");
  return *slot;
}

void Tower::fill_reductions(const std::shared_ptr<Tower>& self, unsigned nvars) {
  const unsigned cap = 2 * cfg_.p - 2;
  // Enumerate exponent tuples supported on the first nvars generators; every
  // product of two normal monomials stays entrywise within [0, 2p-2].
  std::vector<std::vector<unsigned>> todo;
  std::vector<unsigned> cur(cfg_.n, 0);
  const auto collect = [&](auto&& rec, unsigned var) -> void {
    if (var == nvars) {
      if (*std::max_element(cur.begin(), cur.end()) >= cfg_.p &&
          !reductions_[pair_code(cur)].has_value()) {
        todo.push_back(cur);
      }
      return;
    }
    for (unsigned e = 0; e <= cap; ++e) {
      cur[var] = e;
      rec(rec, var + 1);
    }
    cur[var] = 0;
  };
  if (nvars > 0) collect(collect, 0);
  // Rewriting x_i^p strictly lowers the p-adic weight of a monomial, so
  // processing in increasing weight keeps every lookup inside filled entries.
  const auto weight = [&](const std::vector<unsigned>& e) {
    unsigned long long w = 0, pw = 1;
    for (unsigned i = 0; i < cfg_.n; ++i) {
      w += e[i] * pw;
      pw *= cfg_.p;
    }
    return w;
  };
  std::sort(todo.begin(), todo.end(),
            [&](const auto& a, const auto& b) { return weight(a) < weight(b); });
  for (const auto& tuple : todo) {
    unsigned i = 0;
    for (unsigned h = 0; h < cfg_.n; ++h) {
      if (tuple[h] >= cfg_.p) i = h;
    }
    std::vector<unsigned> rest = tuple;
    rest[i] -= cfg_.p;
    TowerElement base = zero();
    if (*std::max_element(rest.begin(), rest.end()) < cfg_.p) {
      std::vector<LaurentSeries> coords(pn_, LaurentSeries::zero(field_));
      coords[index_of(rest)] = LaurentSeries::one(field_);
      base = TowerElement(self, std::move(coords));
    } else {
      base = reduction_for(rest);
    }
    reductions_[pair_code(tuple)] = base * xp_[i];
  }
}

void Tower::init(const std::shared_ptr<Tower>& self) {
  witt_ = witt_data(cfg_.p, cfg_.n);
  digits_.resize(pn_);
  for (size_t idx = 0; idx < pn_; ++idx) {
    std::vector<unsigned> e(cfg_.n);
    size_t rem = idx;
    for (unsigned i = 0; i < cfg_.n; ++i) {
      e[i] = static_cast<unsigned>(rem % cfg_.p);
      rem /= cfg_.p;
    }
    digits_[idx] = std::move(e);
  }
  size_t pair_count = 1;
  for (unsigned i = 0; i < cfg_.n; ++i) pair_count *= 2 * cfg_.p - 1;
  reductions_.assign(pair_count, std::nullopt);

  TowerRing ring{this};
  std::vector<TowerElement> gens;
  std::vector<TowerElement> beta_elems;
  for (unsigned i = 0; i < cfg_.n; ++i) {
    std::vector<LaurentSeries> coords(pn_, LaurentSeries::zero(field_));
    std::vector<unsigned> unit(cfg_.n, 0);
    unit[i] = 1;
    coords[index_of(unit)] = LaurentSeries::one(field_);
    gens.emplace_back(self, std::move(coords));
    beta_elems.push_back(from_series(cfg_.beta[i]));
  }
  d_.clear();
  xp_.clear();
  for (unsigned i = 0; i < cfg_.n; ++i) {
    // The carry for level i only touches generators below i, whose power
    // relations are already in place.
    fill_reductions(self, i);
    d_.push_back(evaluate_mod_p(ring, cfg_.p, witt_->D(i), gens, beta_elems));
    xp_.push_back(gens[i] + beta_elems[i] + d_[i]);
  }
  fill_reductions(self, cfg_.n);

  sigma_x_.resize(pn_);
  for (unsigned long long k = 0; k < pn_; ++k) {
    std::vector<TowerElement> shift;
    for (unsigned coord : witt_->integer_rep(k)) {
      shift.push_back(from_series(LaurentSeries::constant(field_, coord)));
    }
    sigma_x_[k].reserve(cfg_.n);
    for (unsigned i = 0; i < cfg_.n; ++i) {
      sigma_x_[k].push_back(evaluate_mod_p(ring, cfg_.p, witt_->S(i), gens, shift));
    }
  }
}

TowerElement Tower::zero() const {
  return TowerElement(shared_from_this(),
                      std::vector<LaurentSeries>(pn_, LaurentSeries::zero(field_)));
}

TowerElement Tower::one() const { return from_series(LaurentSeries::one(field_)); }

TowerElement Tower::from_series(LaurentSeries s) const {
  if (!(s.field() == field_)) throw ContractError("series lives over the wrong prime field");
  std::vector<LaurentSeries> coords(pn_, LaurentSeries::zero(field_));
  coords[0] = std::move(s);
  return TowerElement(shared_from_this(), std::move(coords));
}

TowerElement Tower::generator(unsigned i) const {
  if (i >= cfg_.n) throw ContractError("generator index out of range");
  std::vector<LaurentSeries> coords(pn_, LaurentSeries::zero(field_));
  std::vector<unsigned> unit(cfg_.n, 0);
  unit[i] = 1;
  coords[index_of(unit)] = LaurentSeries::one(field_);
  return TowerElement(shared_from_this(), std::move(coords));
}

TowerElement Tower::monomial(const std::vector<unsigned>& exps, LaurentSeries coeff) const {
  if (exps.size() != cfg_.n) throw ContractError("exponent tuple has wrong length");
  TowerElement acc = from_series(std::move(coeff));
  for (unsigned i = 0; i < cfg_.n; ++i) {
    if (exps[i] > 0) acc *= generator(i).pow(exps[i]);
  }
  return acc;
}

TowerElement Tower::normal_form(
    const std::vector<std::pair<std::vector<unsigned>, LaurentSeries>>& raw) const {
  TowerElement acc = zero();
  for (const auto& [exps, coeff] : raw) acc += monomial(exps, coeff);
  return acc;
}

const TowerElement& Tower::sigma_generator_image(unsigned long long k, unsigned i) const {
  if (i >= cfg_.n) throw ContractError("generator index out of range");
  return sigma_x_[k % pn_][i];
}

TowerElement Tower::apply_sigma(const TowerElement& e, unsigned long long k) const {
  if (e.tower_ptr().get() != this) throw ContractError("element belongs to a different tower");
  k %= pn_;
  if (k == 0 || e.in_base_field()) return e;
  std::vector<std::vector<TowerElement>> pw(cfg_.n);
  const auto power = [&](unsigned i, unsigned a) -> const TowerElement& {
    auto& tab = pw[i];
    if (tab.empty()) tab.push_back(one());
    while (tab.size() <= a) tab.push_back(tab.back() * sigma_x_[k][i]);
    return tab[a];
  };
  TowerElement acc = zero();
  for (size_t idx = 0; idx < pn_; ++idx) {
    const LaurentSeries& c = e.coords()[idx];
    if (c.exact_zero()) continue;
    TowerElement term = from_series(c);
    for (unsigned i = 0; i < cfg_.n; ++i) {
      const unsigned a = digits_[idx][i];
      if (a > 0) term *= power(i, a);
    }
    acc += term;
  }
  return acc;
}

LaurentSeries Tower::norm(const TowerElement& e) const {
  if (e.tower_ptr().get() != this) throw ContractError("element belongs to a different tower");
  TowerElement acc = e;
  for (unsigned long long k = 1; k < pn_; ++k) acc *= apply_sigma(e, k);
  for (size_t s = 1; s < pn_; ++s) {
    if (!acc.coords()[s].known_zero()) {
      throw ContractError("conjugate product failed to land in the base field: " + acc.str());
    }
  }
  return acc.coords()[0];
}

Valuation Tower::valuation(const TowerElement& e) const { return norm(e).valuation(); }

long long Tower::exact_valuation(const TowerElement& e) const { return norm(e).exact_valuation(); }

TowerElement Tower::invert(const TowerElement& e) const {
  if (e.tower_ptr().get() != this) throw ContractError("element belongs to a different tower");
  if (e.exact_zero()) throw ContractError("cannot invert zero");
  if (e.known_zero()) {
    throw PrecisionError("cannot invert an element that is zero to working precision");
  }
  TowerElement conj = one();
  for (unsigned long long k = 1; k < pn_; ++k) conj *= apply_sigma(e, k);
  TowerElement full = e * conj;
  for (size_t s = 1; s < pn_; ++s) {
    if (!full.coords()[s].known_zero()) {
      throw ContractError("conjugate product failed to land in the base field: " + full.str());
    }
  }
  const LaurentSeries inv_norm = full.coords()[0].inverse(cfg_.series_precision);
  return conj.scale(inv_norm);
}

std::shared_ptr<const Tower> Tower::subtower(unsigned j) const {
  if (j == 0 || j > cfg_.n) throw ContractError("subtower level out of range");
  if (j == cfg_.n) return shared_from_this();
  TowerConfig sub = cfg_;
  sub.n = j;
  sub.beta.assign(cfg_.beta.begin(), cfg_.beta.begin() + j);
  return build(sub);
}

TowerElement Tower::lift(const TowerElement& sub) const {
  const Tower& st = sub.tower();
  if (st.p() != cfg_.p || st.n() > cfg_.n) {
    throw ContractError("lift source is not a subtower of this tower");
  }
  for (unsigned i = 0; i < st.n(); ++i) {
    if (!(st.beta()[i] == cfg_.beta[i])) {
      throw ContractError("lift source was built from different defining series");
    }
  }
  // Mixed-radix slot indices agree between the towers on the shared prefix.
  std::vector<LaurentSeries> coords(pn_, LaurentSeries::zero(field_));
  for (size_t idx = 0; idx < st.pn(); ++idx) coords[idx] = sub.coords()[idx];
  return TowerElement(shared_from_this(), std::move(coords));
}

}  // namespace scaffoldlab
