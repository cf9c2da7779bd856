#include "scaffoldlab/ramification.hpp"

#include <sstream>

#include "scaffoldlab/errors.hpp"

namespace scaffoldlab {

namespace {

long long ipow(unsigned base, unsigned exp) {
  long long r = 1;
  for (unsigned i = 0; i < exp; ++i) {
    if (r > (1LL << 56) / base) throw ContractError("integer power overflow");
    r *= base;
  }
  return r;
}

std::string fmt_level(unsigned i) { return "level " + std::to_string(i); }

}  // namespace

ReducedReport check_reduced(const std::vector<LaurentSeries>& beta, unsigned p) {
  ReducedReport rep;
  rep.reduced = true;
  for (size_t i = 0; i < beta.size(); ++i) {
    NamedCheck c;
    c.name = "reduced[" + std::to_string(i) + "]";
    const Valuation v = beta[i].valuation();
    if (v.is_infinite()) {
      c.ok = true;
      c.detail = fmt_level(i) + ": zero series";
    } else if (!v.is_exact()) {
      c.ok = false;
      c.detail = fmt_level(i) + ": valuation undetermined at working precision";
    } else if (v.value >= 0) {
      c.ok = true;
      c.detail = fmt_level(i) + ": v = " + std::to_string(v.value) + " >= 0";
    } else if (v.value % static_cast<long long>(p) != 0) {
      c.ok = true;
      c.detail = fmt_level(i) + ": v = " + std::to_string(v.value) + " prime to p";
    } else {
      c.ok = false;
      c.detail = fmt_level(i) + ": pole order " + std::to_string(-v.value) + " divisible by p";
    }
    if (!c.ok) rep.reduced = false;
    rep.coordinates.push_back(std::move(c));
  }
  return rep;
}

std::vector<long long> upper_breaks(const std::vector<LaurentSeries>& beta, unsigned p) {
  if (beta.empty()) throw ConfigError("upper breaks need at least one defining series");
  const Valuation v0 = beta[0].valuation();
  if (v0.is_infinite() || !v0.is_exact() || v0.value >= 0) {
    throw ConfigError("the first defining series must have a pole of exact negative order");
  }
  const unsigned n = static_cast<unsigned>(beta.size());
  std::vector<long long> u;
  u.reserve(n);
  for (unsigned i = 1; i <= n; ++i) {
    bool any = false;
    long long best = 0;
    for (unsigned j = 0; j < i; ++j) {
      const Valuation vj = beta[j].valuation();
      if (vj.is_infinite()) continue;  // zero coordinate contributes nothing
      const long long cand = -ipow(p, i - 1 - j) * beta[j].exact_valuation();
      if (!any || cand > best) {
        best = cand;
        any = true;
      }
    }
    if (!any) throw ConfigError("no pole available up to " + fmt_level(i - 1));
    u.push_back(best);
  }
  return u;
}

std::vector<long long> lower_breaks(const std::vector<long long>& u, unsigned p) {
  if (u.empty()) throw ConfigError("break computation needs at least one level");
  if (u[0] < 1) throw ConfigError("the first upper break must be at least 1");
  for (size_t i = 1; i < u.size(); ++i) {
    if (u[i] <= u[i - 1]) throw ConfigError("upper breaks must be strictly increasing");
  }
  std::vector<long long> b;
  b.reserve(u.size());
  b.push_back(u[0]);
  for (size_t i = 1; i < u.size(); ++i) {
    b.push_back(b[i - 1] + ipow(p, static_cast<unsigned>(i)) * (u[i] - u[i - 1]));
  }
  return b;
}

std::vector<long long> stable_m(const std::vector<long long>& u, unsigned p) {
  if (u.empty()) throw ConfigError("break computation needs at least one level");
  const unsigned n = static_cast<unsigned>(u.size());
  const long long scale = ipow(p, n - 1);
  std::vector<long long> m;
  m.reserve(n);
  m.push_back(0);
  for (unsigned i = 1; i < n; ++i) {
    const long long diff = u[i] - u[0];
    if (diff % scale != 0) {
      throw ConfigError("twist exponent at " + fmt_level(i) + " is not integral: (" +
                        std::to_string(u[i]) + " - " + std::to_string(u[0]) + ") / " +
                        std::to_string(scale));
    }
    m.push_back(diff / scale);
  }
  return m;
}

BreakData make_break_data(const std::vector<long long>& u, unsigned p) {
  BreakData d;
  d.u = u;
  d.b = lower_breaks(u, p);
  d.m = stable_m(u, p);
  const unsigned n = static_cast<unsigned>(u.size());
  const long long pn = ipow(p, n);
  for (unsigned i = 0; i < n; ++i) {
    if (d.b[i] % static_cast<long long>(p) == 0) {
      throw ConfigError("break data invariant violated: b at " + fmt_level(i) +
                        " is divisible by p");
    }
    if ((d.b[i] - d.b[0]) % pn != 0) {
      throw ConfigError("break data invariant violated: b at " + fmt_level(i) +
                        " leaves the congruence class of b_1 mod p^n");
    }
    if (d.b[i] > ipow(p, i) * d.u[i]) {
      throw ConfigError("break data invariant violated: b exceeds p^(j-1)*u at " + fmt_level(i));
    }
  }
  for (size_t i = 2; i < d.m.size(); ++i) {
    if (d.m[i] <= d.m[i - 1]) {
      throw ConfigError("break data invariant violated: twist exponents not increasing");
    }
  }
  return d;
}

Decomposition decompose(const std::vector<LaurentSeries>& beta, unsigned p,
                        const std::optional<std::vector<LaurentSeries>>& omega) {
  if (beta.empty()) throw ConfigError("decomposition needs at least one defining series");
  const unsigned n = static_cast<unsigned>(beta.size());
  const PrimeField f = beta[0].field();
  if (omega && omega->size() != n) {
    throw ConfigError("twist vector must have one entry per level");
  }
  Decomposition dec{beta[0], {}, {}};
  dec.omega.push_back(LaurentSeries::one(f));
  dec.delta.push_back(LaurentSeries::zero(f));
  if (omega && !((*omega)[0] == LaurentSeries::one(f))) {
    throw ConfigError("the level-0 twist must be 1");
  }
  const Valuation v0 = beta[0].valuation();
  if (v0.is_infinite() || !v0.is_exact() || v0.value >= 0) {
    throw ConfigError("the first defining series must have a pole of exact negative order");
  }
  for (unsigned i = 1; i < n; ++i) {
    LaurentSeries w = LaurentSeries::one(f);
    if (omega) {
      w = (*omega)[i];
    } else {
      const Valuation vi = beta[i].valuation();
      if (vi.is_infinite() || !vi.is_exact()) {
        throw ConfigError("cannot extract a twist at " + fmt_level(i) +
                          ": pole order unavailable");
      }
      const long long scale = ipow(p, n - 1);
      const long long gap = v0.value - vi.value;
      if (gap % scale != 0) {
        throw ConfigError("no monomial twist at " + fmt_level(i) + ": pole gap " +
                          std::to_string(gap) + " not divisible by " + std::to_string(scale));
      }
      // c^{p^{n-1}} = c in the prime field, so the coefficient ratio is the
      // twist coefficient itself.
      const unsigned c = f.mul(beta[i].leading_coeff(), f.inv(beta[0].leading_coeff()));
      w = LaurentSeries::monomial(f, c, -gap / scale);
    }
    const LaurentSeries main = beta[0] * w.frobenius_iterate(n - 1);
    const LaurentSeries delta = beta[i] - main;
    const Valuation vb = beta[i].valuation();
    const Valuation vd = delta.valuation();
    const bool strict =
        vd.is_infinite() || (vb.is_exact() && vd.lower_bound() > vb.lower_bound());
    if (!strict) {
      throw ConfigError("twist at " + fmt_level(i) +
                        " leaves a remainder at least as large as the series itself");
    }
    dec.omega.push_back(std::move(w));
    dec.delta.push_back(delta);
  }
  return dec;
}

namespace {

void push(std::vector<NamedCheck>& out, std::string name, bool ok, std::string detail) {
  out.push_back(NamedCheck{std::move(name), ok, std::move(detail)});
}

}  // namespace

AssumptionReport check_assumptions(const std::vector<long long>& u,
                                   const std::vector<long long>& b, unsigned p,
                                   const std::optional<std::vector<long long>>& m,
                                   const std::optional<Decomposition>& dec) {
  if (u.size() != b.size() || u.empty()) {
    throw ContractError("assumption checks need matching break vectors");
  }
  const unsigned n = static_cast<unsigned>(u.size());
  const long long pn = ipow(p, n);
  AssumptionReport rep;
  std::ostringstream os;

  {
    bool ok = u[0] >= 1;
    for (unsigned i = 1; i < n; ++i) ok = ok && u[i] > u[i - 1] && b[i] > b[i - 1];
    push(rep.checks, "breaks-increasing", ok,
         ok ? "strictly increasing" : "level ordering violated");
  }
  {
    bool ok = true;
    os.str("");
    for (unsigned i = 0; i < n; ++i) {
      if (b[i] % static_cast<long long>(p) == 0) {
        ok = false;
        os << "b[" << i << "]=" << b[i] << " divisible by p; ";
      }
    }
    push(rep.checks, "break-unit", ok, ok ? "all lower breaks prime to p" : os.str());
  }
  {
    bool ok = true;
    os.str("");
    for (unsigned i = 1; i < n; ++i) {
      if ((b[i] - b[0]) % pn != 0) {
        ok = false;
        os << "b[" << i << "]=" << b[i] << " not congruent to " << b[0] << " mod " << pn << "; ";
      }
    }
    push(rep.checks, "break-congruence", ok,
         ok ? "all lower breaks share the class of b_1 mod p^n" : os.str());
  }
  {
    bool ok = true;
    os.str("");
    for (unsigned i = 0; i < n; ++i) {
      const long long cap = ipow(p, i) * u[i];
      if (b[i] > cap) {
        ok = false;
        os << "b[" << i << "]=" << b[i] << " exceeds " << cap << "; ";
      }
    }
    push(rep.checks, "break-bound", ok, ok ? "b_j <= p^(j-1) u_j throughout" : os.str());
  }
  {
    if (!m) {
      push(rep.checks, "m-integral", false, "twist exponents unavailable");
    } else {
      bool ok = m->size() == n && (*m)[0] == 0;
      for (size_t i = 1; ok && i < m->size(); ++i) {
        ok = (*m)[i] >= 0 && (i < 2 || (*m)[i] > (*m)[i - 1]);
      }
      push(rep.checks, "m-integral", ok,
           ok ? "integral and increasing" : "twist exponent shape violated");
    }
  }
  {
    bool ok = true;
    os.str("");
    for (unsigned i = 1; i < n; ++i) {
      const long long bound = pn * u[i - 1];
      if (b[i] <= bound) {
        ok = false;
        os << "b[" << i << "]=" << b[i] << " <= p^n*u[" << i - 1 << "]=" << bound << "; ";
      } else {
        os << "b[" << i << "]=" << b[i] << " > " << bound << "; ";
      }
    }
    push(rep.checks, "jump-growth", ok, n == 1 ? "no interior levels" : os.str());
  }
  {
    if (!dec) {
      push(rep.checks, "error-term-size", n == 1, n == 1 ? "no interior levels"
                                                         : "decomposition unavailable");
    } else {
      bool ok = true;
      os.str("");
      const long long scale = ipow(p, n - 1);
      for (unsigned i = 1; i < n; ++i) {
        const Valuation vd = dec->delta[i].valuation();
        if (vd.is_infinite()) {
          os << "delta[" << i << "]=0; ";
          continue;
        }
        const long long bound = -scale * vd.lower_bound();
        if (b[i] > bound) {
          os << "b[" << i << "]=" << b[i] << " > " << bound << "; ";
        } else {
          ok = false;
          os << "b[" << i << "]=" << b[i] << " <= -p^(n-1)*v(delta[" << i << "])=" << bound
             << "; ";
        }
      }
      push(rep.checks, "error-term-size", ok, n == 1 ? "no interior levels" : os.str());
    }
  }
  {
    if (!dec) {
      push(rep.checks, "pole-match", false, "decomposition unavailable");
    } else {
      bool ok = true;
      os.str("");
      for (unsigned i = 0; i < n; ++i) {
        const LaurentSeries main = dec->beta * dec->omega[i].frobenius_iterate(n - 1);
        const Valuation vm = main.valuation();
        if (!vm.is_finite() || vm.value != -u[i]) {
          ok = false;
          os << "main term at level " << i << " sits at " << vm.str() << ", expected "
             << -u[i] << "; ";
        }
      }
      push(rep.checks, "pole-match", ok, ok ? "main terms carry the full pole" : os.str());
    }
  }
  {
    if (!dec || !m) {
      push(rep.checks, "twist-size", false,
           !dec ? "decomposition unavailable" : "twist exponents unavailable");
    } else {
      bool ok = true;
      os.str("");
      for (unsigned i = 0; i < n; ++i) {
        const Valuation vw = dec->omega[i].valuation();
        if (!vw.is_finite() || -vw.value != (*m)[i]) {
          ok = false;
          os << "twist at level " << i << " has size " << vw.str() << ", expected -"
             << (*m)[i] << "; ";
        }
      }
      push(rep.checks, "twist-size", ok, ok ? "twist poles equal the stable exponents" : os.str());
    }
  }
  {
    bool ok = true;
    os.str("");
    for (unsigned i = 1; i < n; ++i) {
      if (u[i] <= static_cast<long long>(p) * u[i - 1]) {
        ok = false;
        os << "u[" << i << "]=" << u[i] << " <= p*u[" << i - 1 << "]; ";
      }
    }
    push(rep.checks, "upper-break-growth", ok, n == 1 ? "no interior levels" : os.str());
  }
  push(rep.checks, "main-term-extraction", dec.has_value(),
       dec ? "decomposition available" : "decomposition unavailable");

  rep.eligible = true;
  for (const auto& c : rep.checks) rep.eligible = rep.eligible && c.ok;
  return rep;
}

AssumptionReport check_assumptions(const BreakData& breaks, const Decomposition& dec,
                                   unsigned p) {
  return check_assumptions(breaks.u, breaks.b, p, breaks.m, dec);
}

}  // namespace scaffoldlab
