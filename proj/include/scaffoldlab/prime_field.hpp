#pragma once

#include <cstdint>

#include "scaffoldlab/errors.hpp"

namespace scaffoldlab {

// The field Z/p for a small prime p.  Values are canonical residues in [0, p).
class PrimeField {
 public:
  explicit PrimeField(unsigned p) : p_(p) {
    if (p < 2 || p > 127 || !is_prime(p)) {
      throw ConfigError("p must be a prime in [2, 127], got " + std::to_string(p));
    }
  }

  unsigned p() const { return p_; }

  unsigned reduce(long long v) const {
    long long r = v % static_cast<long long>(p_);
    if (r < 0) r += p_;
    return static_cast<unsigned>(r);
  }

  unsigned add(unsigned a, unsigned b) const { return (a + b) % p_; }
  unsigned sub(unsigned a, unsigned b) const { return (a + p_ - b % p_) % p_; }
  unsigned neg(unsigned a) const { return a == 0 ? 0u : p_ - a; }
  unsigned mul(unsigned a, unsigned b) const { return (a * b) % p_; }

  unsigned pow(unsigned a, unsigned long long e) const {
    unsigned long long base = a % p_, acc = 1;
    while (e > 0) {
      if (e & 1) acc = acc * base % p_;
      base = base * base % p_;
      e >>= 1;
    }
    return static_cast<unsigned>(acc);
  }

  unsigned inv(unsigned a) const {
    if (a % p_ == 0) throw ContractError("inverse of 0 in prime field");
    return pow(a, p_ - 2);
  }

  friend bool operator==(const PrimeField& a, const PrimeField& b) = default;

 private:
  static bool is_prime(unsigned v) {
    if (v < 2) return false;
    for (unsigned d = 2; d * d <= v; ++d) {
      if (v % d == 0) return false;
    }
    return true;
  }

  unsigned p_;
};

}  // namespace scaffoldlab
