#pragma once

// Minimal RAII wrapper over an MPFR value. All operations round to nearest
// at the precision of the destination.

#include <mpfr.h>

#include <utility>

namespace lrsched::detail {

class MpFloat {
 public:
  explicit MpFloat(mpfr_prec_t bits, double value = 0.0) {
    mpfr_init2(value_, bits);
    mpfr_set_d(value_, value, MPFR_RNDN);
  }
  MpFloat(const MpFloat& other) {
    mpfr_init2(value_, mpfr_get_prec(other.value_));
    mpfr_set(value_, other.value_, MPFR_RNDN);
  }
  MpFloat& operator=(const MpFloat& other) {
    if (this != &other) mpfr_set(value_, other.value_, MPFR_RNDN);
    return *this;
  }
  ~MpFloat() { mpfr_clear(value_); }

  mpfr_prec_t precision() const { return mpfr_get_prec(value_); }
  double to_double() const { return mpfr_get_d(value_, MPFR_RNDN); }
  int sign() const { return mpfr_sgn(value_); }

  MpFloat& operator+=(const MpFloat& o) { mpfr_add(value_, value_, o.value_, MPFR_RNDN); return *this; }
  MpFloat& operator-=(const MpFloat& o) { mpfr_sub(value_, value_, o.value_, MPFR_RNDN); return *this; }
  MpFloat& operator*=(const MpFloat& o) { mpfr_mul(value_, value_, o.value_, MPFR_RNDN); return *this; }
  MpFloat& operator/=(const MpFloat& o) { mpfr_div(value_, value_, o.value_, MPFR_RNDN); return *this; }

  friend MpFloat operator+(MpFloat a, const MpFloat& b) { return a += b; }
  friend MpFloat operator-(MpFloat a, const MpFloat& b) { return a -= b; }
  friend MpFloat operator*(MpFloat a, const MpFloat& b) { return a *= b; }
  friend MpFloat operator/(MpFloat a, const MpFloat& b) { return a /= b; }

  friend MpFloat sqrt(MpFloat a) {
    mpfr_sqrt(a.value_, a.value_, MPFR_RNDN);
    return a;
  }
  friend MpFloat abs(MpFloat a) {
    mpfr_abs(a.value_, a.value_, MPFR_RNDN);
    return a;
  }
  friend bool operator<(const MpFloat& a, const MpFloat& b) { return mpfr_less_p(a.value_, b.value_) != 0; }

  static MpFloat power_of_two(mpfr_prec_t bits, long exponent) {
    MpFloat r(bits, 1.0);
    mpfr_mul_2si(r.value_, r.value_, exponent, MPFR_RNDN);
    return r;
  }

 private:
  mpfr_t value_;
};

}  // namespace lrsched::detail
