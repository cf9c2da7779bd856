#pragma once

#include <optional>
#include <string>
#include <vector>

#include "scaffoldlab/series_field.hpp"

namespace scaffoldlab {

struct NamedCheck {
  std::string name;
  bool ok = false;
  std::string detail;
};

struct ReducedReport {
  bool reduced = false;
  std::vector<NamedCheck> coordinates;  // one entry per level
};

// Each defining series must have a pole prime to p, or no pole at all.
ReducedReport check_reduced(const std::vector<LaurentSeries>& beta, unsigned p);

// u_i = max over j < i of -p^{i-1-j} v(beta_j); needs a genuine pole at level 0.
std::vector<long long> upper_breaks(const std::vector<LaurentSeries>& beta, unsigned p);

// b_1 = u_1 and b_{i+1} = b_i + p^i (u_{i+1} - u_i); u must be strictly
// increasing with u_1 >= 1.
std::vector<long long> lower_breaks(const std::vector<long long>& u, unsigned p);

// m_0 = 0 and m_i = (u_{i+1} - u_1) / p^{n-1}; rejects non-integral steps.
std::vector<long long> stable_m(const std::vector<long long>& u, unsigned p);

// Fully validated break package: construction re-derives b and m and checks
// every structural invariant (unit breaks, congruence class, growth bounds).
struct BreakData {
  std::vector<long long> u;
  std::vector<long long> b;
  std::vector<long long> m;
};

BreakData make_break_data(const std::vector<long long>& u, unsigned p);

// beta_i = beta * omega_i^{p^{n-1}} + delta_i with v(delta_i) > v(beta_i);
// omega_0 = 1 and delta_0 = 0 by construction.
struct Decomposition {
  LaurentSeries beta;
  std::vector<LaurentSeries> omega;
  std::vector<LaurentSeries> delta;
};

// When omega is omitted, each omega_i is extracted as a monomial c * t^{-m'}
// from the leading terms (the coefficient ratio is its own p^{n-1}-th root in
// the prime field).  Throws ConfigError naming the offending level when no
// decomposition of this shape exists.
Decomposition decompose(const std::vector<LaurentSeries>& beta, unsigned p,
                        const std::optional<std::vector<LaurentSeries>>& omega = std::nullopt);

struct AssumptionReport {
  std::vector<NamedCheck> checks;
  bool eligible = false;
};

// Evaluates every named eligibility condition on raw break vectors so that
// failing cases still produce a full report.  m and dec may be absent when
// their construction already failed upstream.
AssumptionReport check_assumptions(const std::vector<long long>& u,
                                   const std::vector<long long>& b, unsigned p,
                                   const std::optional<std::vector<long long>>& m,
                                   const std::optional<Decomposition>& dec);

AssumptionReport check_assumptions(const BreakData& breaks, const Decomposition& dec, unsigned p);

}  // namespace scaffoldlab
