#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "scaffoldlab/asw_tower.hpp"
#include "scaffoldlab/ramification.hpp"

namespace scaffoldlab {

// Digit combinatorics on S = {0, .., p^n - 1}: the weight B(s) pairs base-p
// digits of s with reversed lower breaks, r is the least nonnegative residue
// mod p^n, and a(t) inverts s -> r(-B(s)).
struct DigitMaps {
  unsigned p = 2;
  unsigned n = 1;
  unsigned long long pn = 2;
  std::vector<long long> b;
  std::vector<long long> weights;      // B(s) for s in [0, p^n)
  std::vector<unsigned long long> inv; // a(s) for s in [0, p^n)

  long long B(unsigned long long s) const { return weights.at(s); }
  unsigned long long r(long long t) const {
    const long long m = static_cast<long long>(pn);
    return static_cast<unsigned long long>(((t % m) + m) % m);
  }
  unsigned long long a(long long t) const { return inv.at(r(t)); }
  unsigned digit(unsigned long long s, unsigned i) const;  // base-p digit i of s
};

DigitMaps digit_maps(const std::vector<long long>& b, unsigned p);

// Normal-basis generator data for the full tower and every prefix subtower:
// Y_j is the twisted-column determinant over K_j, the cofactors expand it
// along the generator column, X_j rescales Y_j to a one-unit under its own
// top translation, and (mu, eps) split the lower translations of X_j into a
// base-field main term and a small error.
struct SubtowerData {
  std::shared_ptr<const Tower> tower;
  TowerElement Y;
  std::vector<LaurentSeries> cofactors;
  TowerElement X;  // coordinates may be truncated when the top cofactor is not monomial
};

struct MuEpsRecord {
  unsigned i = 0, j = 0;                // 1-based, i <= j
  long long v_mu_sub = 0;               // valuation of mu in subtower-j units
  std::optional<long long> v_eps_sub;   // absent when eps vanishes exactly
  long long sub_bound = 0;              // required margin inside subtower j
  bool sub_ok = false;
};

struct GeneratorData {
  std::shared_ptr<const Tower> tower;
  BreakData breaks;
  Decomposition dec;
  TowerElement Y;
  std::vector<LaurentSeries> cofactors;     // t_i, i = 0..n-1
  std::vector<SubtowerData> sub;            // index j-1 for level j = 1..n
  std::vector<TowerElement> X;              // X_j lifted into the full tower
  std::vector<std::vector<LaurentSeries>> mu;  // mu[i-1][j-1] for i <= j
  std::vector<MuEpsRecord> mu_eps;
  std::vector<TowerElement> eps;  // parallel to mu_eps, each living in its subtower
};

GeneratorData build_generators(std::shared_ptr<const Tower> tower, const BreakData& breaks,
                               const Decomposition& dec);

// Re-derives every structural identity of the generator package from first
// principles (conjugate-product valuations, exact operator displacements,
// cofactor spacing, linear independence of the conjugates of Y) and throws
// ContractError on any mismatch.  Returns the named results for reporting.
std::vector<NamedCheck> verify_generators(const GeneratorData& gen);

// min over interior levels of b_{i+1} - p^n u_i; absent (unbounded) when n = 1.
std::optional<long long> scaffold_precision(const BreakData& breaks, unsigned p);

// The candidate valuation-indexed basis lambda_t and the translation
// operators psi_i, represented as base-field coefficient vectors over the
// group-element powers sigma^k.
class ScaffoldOperators {
 public:
  ScaffoldOperators(GeneratorData gen, DigitMaps digits);

  const GeneratorData& gen() const { return gen_; }
  const DigitMaps& digits() const { return digits_; }

  // t^w * prod X_i^{digit}, with w forced integral by the digit maps.
  const TowerElement& lambda(long long t) const;
  const std::vector<LaurentSeries>& psi_coeffs(unsigned i) const;  // i = 1..n
  TowerElement apply_psi(unsigned i, const TowerElement& e) const;

 private:
  GeneratorData gen_;
  DigitMaps digits_;
  std::vector<std::vector<LaurentSeries>> psi_;
  mutable std::map<long long, TowerElement> lambda_cache_;
};

struct AxiomRecord {
  unsigned axiom = 0;  // 1: valuation, 2: periodicity, 3: psi(1)=0, 4: congruence
  unsigned i = 0;      // operator level for axioms 3/4
  long long t = 0;     // window point for axioms 1/2/4
  bool ok = false;
  std::string detail;
  std::optional<std::string> unit;  // rendered u_it for active digits in axiom 4
};

struct ScaffoldCertificate {
  std::optional<long long> precision_c;  // absent = unbounded (n = 1)
  long long used_c = 0;                  // the finite bound actually checked
  std::string psi_choice;
  long long window_lo = 0, window_hi = 0;
  std::vector<AxiomRecord> records;
  std::vector<NamedCheck> unit_periodicity;  // reported, never asserted
  bool valid = false;
};

// Direct check of the four scaffold axioms over the window [lo, hi).  Axiom
// failures mark the certificate invalid with the offending (i, t); shortfalls
// of working precision throw PrecisionError instead.
ScaffoldCertificate verify_scaffold(const ScaffoldOperators& ops, long long lo, long long hi,
                                    long long used_c, std::optional<long long> declared_c);

struct GmsVerdict {
  long long r_u1 = 0;
  bool strengthened_ok = false;
  bool divisor_ok = false;
  std::string verdict;  // "free" | "unknown"
};

GmsVerdict gms_verdict(const BreakData& breaks, unsigned p, std::optional<long long> c);

struct HopfVerdict {
  bool congruence_ok = false;
  std::string verdict;  // "hopf" | "unknown"
};

HopfVerdict hopf_verdict(const BreakData& breaks, unsigned p, const GmsVerdict& gms);

}  // namespace scaffoldlab
