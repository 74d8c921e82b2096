#pragma once

namespace lrsched {

// Compensated (Kahan-Babuska/Neumaier) running sum.
struct KahanSum {
  double sum = 0.0;
  double compensation = 0.0;

  KahanSum& operator+=(double value) {
    const double t = sum + value;
    if ((sum >= 0 ? sum : -sum) >= (value >= 0 ? value : -value)) {
      compensation += (sum - t) + value;
    } else {
      compensation += (value - t) + sum;
    }
    sum = t;
    return *this;
  }

  double value() const { return sum + compensation; }
};

}  // namespace lrsched
