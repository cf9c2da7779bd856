#include <doctest.h>

#include <random>
#include <sstream>

#include "scaffoldlab/series_field.hpp"

using namespace scaffoldlab;

namespace {

LaurentSeries rand_nonzero(const PrimeField& f, std::mt19937& rng) {
  std::uniform_int_distribution<int> nterms(1, 6), expd(-8, 8), coeffd(1, f.p() - 1);
  LaurentSeries s = LaurentSeries::zero(f);
  for (int i = 0, n = nterms(rng); i < n; ++i) {
    s += LaurentSeries::monomial(f, coeffd(rng), expd(rng));
  }
  if (s.known_zero()) s += LaurentSeries::one(f);
  return s;
}

}  // namespace

TEST_CASE("prime field basics") {
  PrimeField f5(5);
  CHECK(f5.reduce(-1) == 4);
  CHECK(f5.inv(2) == 3);
  CHECK(f5.pow(2, 4) == 1);
  CHECK_THROWS_AS(PrimeField(4), ConfigError);
  CHECK_THROWS_AS(PrimeField(131), ConfigError);  // beyond desk scale
  PrimeField f2(2);
  CHECK(f2.neg(1) == 1);
}

TEST_CASE("parse and render round trip") {
  PrimeField f2(2), f3(3);
  CHECK(parse_series(f2, "t^-1").str() == "t^-1");
  CHECK(parse_series(f2, "0").str() == "0");
  // duplicate exponents collapse mod p: t^-3 + t^-3 = 0 over F_2
  CHECK(parse_series(f2, "t^-3 + t^2 + t^-3").str() == "t^2");
  CHECK(parse_series(f3, "2*t^2").str() == "2*t^2");
  CHECK(parse_series(f3, "-1*t^2").str() == "2*t^2");
  CHECK(parse_series(f3, "5").str() == "2");
  CHECK(parse_series(f3, "t").str() == "t");
  CHECK(parse_series(f3, " 1 + t + 2*t^-4 ").str() == "2*t^-4 + 1 + t");
  CHECK(parse_series(f3, "t - t").str() == "0");

  std::mt19937 rng(7);
  for (unsigned p : {2u, 3u, 5u}) {
    PrimeField f(p);
    for (int i = 0; i < 50; ++i) {
      LaurentSeries s = rand_nonzero(f, rng);
      CHECK(parse_series(f, s.str()) == s);
    }
  }
}

TEST_CASE("parse rejects malformed input with position") {
  PrimeField f2(2);
  CHECK_THROWS_AS(parse_series(f2, ""), ConfigError);
  CHECK_THROWS_AS(parse_series(f2, "t^"), ConfigError);
  CHECK_THROWS_AS(parse_series(f2, "2*"), ConfigError);
  CHECK_THROWS_AS(parse_series(f2, "x + 1"), ConfigError);
  CHECK_THROWS_AS(parse_series(f2, "1 + + 2"), ConfigError);
  CHECK_THROWS_AS(parse_series(f2, "t^1x"), ConfigError);
  try {
    parse_series(f2, "1 + q");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("position") != std::string::npos);
  }
}

TEST_CASE("valuation semantics distinguish exact zero from zero-to-precision") {
  PrimeField f2(2);
  LaurentSeries z = LaurentSeries::zero(f2);
  CHECK(z.valuation() == Valuation::infinite());
  CHECK(z.exact_zero());

  LaurentSeries zp = z.truncated(10);
  CHECK(zp.known_zero());
  CHECK_FALSE(zp.exact_zero());
  CHECK(zp.valuation() == Valuation::at_least(10));
  CHECK_FALSE(zp.valuation().is_exact());
  CHECK_THROWS_AS(zp.exact_valuation(), PrecisionError);

  LaurentSeries s = parse_series(f2, "t^-3 + 1");
  CHECK(s.valuation() == Valuation::finite(-3));
  CHECK(s.exact_valuation() == -3);
}

TEST_CASE("addition and multiplication precision rules") {
  PrimeField f3(3);
  LaurentSeries a = parse_series(f3, "t^-1 + 1");           // exact
  LaurentSeries b = parse_series(f3, "t + t^2").truncated(5);  // known below 5

  LaurentSeries sum = a + b;
  CHECK(sum.precision() == 5);  // min of precisions
  LaurentSeries exact_sum = a + parse_series(f3, "t");
  CHECK(exact_sum.exact());

  // product precision: min over inputs of (own precision + other's valuation)
  LaurentSeries prod = a * b;  // 5 + (-1) = 4
  CHECK(prod.precision() == 4);
  CHECK((a * a).exact());

  // stored terms never reach at/above the precision cap
  for (auto& [e, c] : prod.terms()) CHECK(e < 4);

  // known coefficients of truncated products are exact: compare against exact compute
  LaurentSeries b_exact = parse_series(f3, "t + t^2");
  LaurentSeries prod_exact = a * b_exact;
  for (auto& [e, c] : prod.terms()) CHECK(prod_exact.coeff(e) == c);
}

TEST_CASE("inverse: geometric series example") {
  PrimeField f2(2);
  // (1+t)^-1 = 1 + t + t^2 + ... ; known below 3
  LaurentSeries s = parse_series(f2, "1 + t");
  LaurentSeries r = s.inverse(3);
  CHECK(r.str() == "1 + t + t^2");
  CHECK(r.precision() == 3);
  LaurentSeries check = s * r;
  CHECK(check.coeff(0) == 1);
  CHECK(check.coeff(1) == 0);
  CHECK(check.coeff(2) == 0);
}

TEST_CASE("inverse of a monomial is exact") {
  PrimeField f5(5);
  LaurentSeries m = parse_series(f5, "3*t^-7");
  LaurentSeries r = m.inverse(40);
  CHECK(r.exact());
  CHECK((m * r).is_one());
  CHECK(r.str() == "2*t^7");  // 3*2=6=1 mod 5
}

TEST_CASE("inverse is two-sided identity on random nonzero series") {
  std::mt19937 rng(41);
  for (unsigned p : {2u, 3u, 5u}) {
    PrimeField f(p);
    for (int i = 0; i < 200; ++i) {
      LaurentSeries s = rand_nonzero(f, rng);
      long long target = 30;
      LaurentSeries r = s.inverse(target);
      LaurentSeries lhs = s * r, rhs = r * s;
      CHECK(lhs.coeff(0) == 1);
      CHECK(rhs.coeff(0) == 1);
      // all other known coefficients vanish
      for (auto& [e, c] : lhs.terms()) CHECK(e == 0);
      for (auto& [e, c] : rhs.terms()) CHECK(e == 0);
    }
  }
}

TEST_CASE("frobenius maps t^e to t^(pe) and scales precision") {
  PrimeField f3(3);
  LaurentSeries s = parse_series(f3, "2*t^-1 + t^4");
  LaurentSeries fs = s.frobenius();
  CHECK(fs.str() == "2*t^-3 + t^12");  // coefficients fixed: c^p = c in F_p
  CHECK((s * s * s) == fs);            // agrees with brute cube

  LaurentSeries st = s.truncated(5);
  CHECK(st.frobenius().precision() == 15);

  // frobenius is multiplicative
  LaurentSeries a = parse_series(f3, "t^-2 + 2"), b = parse_series(f3, "1 + t");
  CHECK((a * b).frobenius() == a.frobenius() * b.frobenius());

  // iterate
  CHECK(s.frobenius_iterate(2) == s.frobenius().frobenius());
  CHECK(s.frobenius_iterate(0) == s);
}

TEST_CASE("exact division of finitely supported series") {
  PrimeField f2(2);
  LaurentSeries a = parse_series(f2, "t^-1 + t^2");  // = t^-1 (1 + t^3)
  LaurentSeries b = parse_series(f2, "1 + t");
  // 1 + t^3 = (1+t)(1+t+t^2) over F_2
  LaurentSeries q = LaurentSeries::divide_exact(a, b);
  CHECK(q.exact());
  CHECK(q * b == a);
  CHECK(q.str() == "t^-1 + 1 + t");
  CHECK_THROWS_AS(LaurentSeries::divide_exact(parse_series(f2, "1 + t"),
                                              parse_series(f2, "1 + t^2 + t^5")),
                  ContractError);
}

TEST_CASE("scale, shift, pow helpers") {
  PrimeField f5(5);
  LaurentSeries s = parse_series(f5, "1 + t");
  CHECK(s.scale(3).str() == "3 + 3*t");
  CHECK(s.shift(-2).str() == "t^-2 + t^-1");
  CHECK(s.pow(0).is_one());
  CHECK(s.pow(3) == s * s * s);
}
