#pragma once

// Slow, independent reference implementations. Nothing here calls into the
// library's numerical code; formulas are evaluated literally in long double.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <vector>

namespace oracle {

using Vec = std::vector<double>;

inline long double suffix_sum(std::span<const double> w, std::size_t from) {
  long double s = 0.0L;
  for (std::size_t p = from; p < w.size(); ++p) s += w[p];
  return s;
}

// eta_t = w_t * sum_{p>t} w_p / sum_p w_p, evaluated term by term.
inline std::vector<long double> schedule_direct(std::span<const double> w) {
  const long double total = suffix_sum(w, 0);
  std::vector<long double> eta(w.size());
  for (std::size_t t = 0; t < w.size(); ++t) eta[t] = w[t] * suffix_sum(w, t + 1) / total;
  return eta;
}

inline std::vector<long double> max_normalized(std::vector<long double> v) {
  const long double m = *std::max_element(v.begin(), v.end());
  for (auto& x : v) x /= m;
  return v;
}

// Right-hand side of the all-tail identity, double loop as written.
inline long double tail_rhs_naive(std::span<const double> q, std::span<const double> w) {
  const std::size_t n = q.size();
  long double first = 0.0L;
  for (std::size_t t = 0; t < n; ++t) first += w[t] * static_cast<long double>(q[t]);
  long double rhs = first / suffix_sum(w, 0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    long double inner = 0.0L;
    for (std::size_t t = k; t < n; ++t) inner += w[t] * (static_cast<long double>(q[t]) - q[k]);
    rhs += (1.0L / suffix_sum(w, k + 1) - 1.0L / suffix_sum(w, k)) * inner;
  }
  return rhs;
}

// Right-hand side of the older nonincreasing-eta inequality.
inline long double tail_upper_naive(std::span<const double> q, std::span<const double> eta) {
  const std::size_t n = q.size();
  long double rhs = 0.0L;
  for (std::size_t t = 0; t < n; ++t) rhs += eta[t] * static_cast<long double>(q[t]);
  rhs /= static_cast<long double>(n);
  // 1-based: k = 1..T-1, inner t = T-k+1..T, reference q_{T-k}.
  for (std::size_t k = 1; k < n; ++k) {
    const std::size_t ref = n - k - 1;  // zero-based index of q_{T-k}
    long double inner = 0.0L;
    for (std::size_t t = ref + 1; t < n; ++t) inner += eta[t] * (static_cast<long double>(q[t]) - q[ref]);
    rhs += inner / (static_cast<long double>(k) * (k + 1));
  }
  return rhs;
}

struct NaiveBound {
  long double distance = 0, variance = 0, tail = 0, total = 0;
};

// Last-iterate bound for an arbitrary schedule, each sum recomputed from scratch.
inline NaiveBound anyeta_naive(std::span<const double> eta, std::span<const double> g, double D) {
  const std::size_t n = eta.size();
  auto sum_eta = [&](std::size_t from) {
    long double s = 0.0L;
    for (std::size_t t = from; t < n; ++t) s += eta[t];
    return s;
  };
  auto sum_sq = [&](std::size_t from) {
    long double s = 0.0L;
    for (std::size_t t = from; t < n; ++t) s += static_cast<long double>(eta[t]) * eta[t] * g[t] * g[t];
    return s;
  };
  NaiveBound b;
  const long double s1 = sum_eta(0);
  b.distance = static_cast<long double>(D) * D / (2 * s1);
  b.variance = sum_sq(0) / (2 * s1);
  for (std::size_t k = 0; k + 1 < n; ++k) b.tail += eta[k] / sum_eta(k + 1) * (sum_sq(k) / sum_eta(k));
  b.tail /= 2;
  b.total = b.distance + b.variance + b.tail;
  return b;
}

// x_t = s_t (z_t / s_1 + sum_{p<t} x_p (1/s_{p+1} - 1/s_p)) with z_t = z_1 + sum_{p<t} Delta_p.
inline std::vector<Vec> rearrange_recursion(std::span<const Vec> updates, std::span<const double> w, const Vec& z1) {
  const std::size_t T = w.size();
  const std::size_t d = z1.size();
  std::vector<long double> s(T + 1, 0.0L);
  for (std::size_t t = T; t-- > 0;) s[t] = s[t + 1] + w[t];
  std::vector<std::vector<long double>> x;
  std::vector<long double> z(z1.begin(), z1.end());
  for (std::size_t t = 0; t < T; ++t) {
    if (t > 0) {
      for (std::size_t i = 0; i < d; ++i) z[i] += updates[t - 1][i];
    }
    std::vector<long double> xt(d);
    for (std::size_t i = 0; i < d; ++i) {
      long double acc = z[i] / s[0];
      for (std::size_t p = 0; p < t; ++p) acc += x[p][i] * (1.0L / s[p + 1] - 1.0L / s[p]);
      xt[i] = s[t] * acc;
    }
    x.push_back(std::move(xt));
  }
  std::vector<Vec> out;
  for (const auto& xt : x) out.emplace_back(xt.begin(), xt.end());
  return out;
}

// (D^2 + sum w^2 g^2) / (2 sum w)
inline long double weighted_objective(std::span<const double> w, std::span<const double> g, double D) {
  long double num = static_cast<long double>(D) * D;
  long double den = 0.0L;
  for (std::size_t t = 0; t < w.size(); ++t) {
    num += static_cast<long double>(w[t]) * w[t] * g[t] * g[t];
    den += w[t];
  }
  return num / (2 * den);
}

// Central differences of log objective, step h_k = rel * w_k.
inline Vec log_objective_gradient(std::span<const double> w, std::span<const double> g, double D, double rel = 1e-6) {
  Vec grad(w.size());
  Vec probe(w.begin(), w.end());
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double h = rel * w[k];
    probe[k] = w[k] + h;
    const long double up = std::log(weighted_objective(probe, g, D));
    probe[k] = w[k] - h;
    const long double down = std::log(weighted_objective(probe, g, D));
    probe[k] = w[k];
    grad[k] = static_cast<double>((up - down) / (2 * h));
  }
  return grad;
}

// Best objective among `samples` random positive weight vectors. Half the
// samples are log-uniform over [1e-3, 1e3] * center, half are local
// perturbations of `center` within a factor of 2.
inline long double random_search_min(std::span<const double> g, double D, std::span<const double> center,
                                     std::size_t samples, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> wide(-3.0, 3.0);
  std::uniform_real_distribution<double> local(-1.0, 1.0);
  long double best = INFINITY;
  Vec w(g.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t t = 0; t < w.size(); ++t) {
      const double e = s % 2 == 0 ? wide(rng) : 0.3 * local(rng);
      w[t] = center[t] * std::pow(10.0, e);
    }
    best = std::min(best, weighted_objective(w, g, D));
  }
  return best;
}

// Median of each centered window over an explicitly materialized padded
// sequence: first element repeated on the left, mirror without the edge on
// the right.
inline Vec median_filter_naive(std::span<const double> v, std::size_t width) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.size());
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(width / 2);
  auto at = [&](std::ptrdiff_t i) -> double {
    if (i < 0) return v[0];
    if (i < n) return v[i];
    if (n == 1) return v[0];
    const std::ptrdiff_t period = 2 * (n - 1);
    std::ptrdiff_t r = i % period;
    if (r >= n) r = period - r;
    return v[r];
  };
  Vec out(v.size());
  for (std::ptrdiff_t t = 0; t < n; ++t) {
    Vec window;
    for (std::ptrdiff_t j = t - half; j <= t + half; ++j) window.push_back(at(j));
    std::sort(window.begin(), window.end());
    out[t] = window[window.size() / 2];
  }
  return out;
}

inline double relative_error(long double a, long double b) {
  const long double scale = std::max({std::fabs(a), std::fabs(b), 1e-300L});
  return static_cast<double>(std::fabs(a - b) / scale);
}

}  // namespace oracle
