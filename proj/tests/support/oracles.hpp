#pragma once

// Independent reference implementations used only by the tests. None of
// these call into the library's numeric code paths.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace oracle {

using Real = long double;

inline std::vector<Real> mean_rows(const std::vector<std::vector<float>>& rows) {
  std::vector<Real> acc(rows.front().size(), 0.0L);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) acc[j] += r[j];
  }
  for (auto& a : acc) a /= static_cast<Real>(rows.size());
  return acc;
}

template <typename T>
Real distance(const std::vector<T>& a, const std::vector<T>& b) {
  Real s = 0.0L;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const Real d = static_cast<Real>(a[i]) - static_cast<Real>(b[i]);
    s += d * d;
  }
  return std::sqrt(s);
}

/// Exhaustive scan; first strict minimum wins.
inline std::size_t argmin_distance(const std::vector<float>& q, const std::vector<std::vector<float>>& refs) {
  std::size_t best = 0;
  Real best_d = std::numeric_limits<Real>::infinity();
  for (std::size_t r = 0; r < refs.size(); ++r) {
    Real s = 0.0L;
    for (std::size_t j = 0; j < q.size(); ++j) {
      const Real d = static_cast<Real>(q[j]) - static_cast<Real>(refs[r][j]);
      s += d * d;
    }
    if (s < best_d) {
      best_d = s;
      best = r;
    }
  }
  return best;
}

struct Softmax {
  Real loss;
  Real p0, p1;
};

inline Softmax softmax_ce(Real z0, Real z1, int cls) {
  const Real m = std::max(z0, z1);
  const Real e0 = std::exp(z0 - m), e1 = std::exp(z1 - m);
  const Real s = e0 + e1;
  const Real p_true = (cls == 0 ? e0 : e1) / s;
  return {-std::log(p_true), e0 / s, e1 / s};
}

/// Mean cross-entropy of a 2xD linear layer; params laid out as W0, W1, b0, b1.
inline Real mean_loss(const std::vector<double>& params, std::size_t dim, const std::vector<std::vector<double>>& x,
                      const std::vector<int>& y) {
  Real total = 0.0L;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Real z[2];
    for (int k = 0; k < 2; ++k) {
      Real a = params[2 * dim + k];
      for (std::size_t j = 0; j < dim; ++j) a += static_cast<Real>(params[k * dim + j]) * x[i][j];
      z[k] = a;
    }
    total += softmax_ce(z[0], z[1], y[i]).loss;
  }
  return total / static_cast<Real>(x.size());
}

/// Central differences, step h, evaluated in double precision.
inline std::vector<double> finite_difference_grad(const std::vector<double>& params, std::size_t dim,
                                                  const std::vector<std::vector<double>>& x, const std::vector<int>& y,
                                                  double h) {
  std::vector<double> g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto plus = params, minus = params;
    plus[i] += h;
    minus[i] -= h;
    const double fp = static_cast<double>(mean_loss(plus, dim, x, y));
    const double fm = static_cast<double>(mean_loss(minus, dim, x, y));
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Textbook scalar Adam, one parameter at a time.
struct ScalarAdam {
  double lr = 1e-4, b1 = 0.9, b2 = 0.999, eps = 1e-8;
  double m = 0.0, v = 0.0;
  int t = 0;

  double step(double theta, double g) {
    t += 1;
    m = b1 * m + (1 - b1) * g;
    v = b2 * v + (1 - b2) * g * g;
    double mhat = m / (1 - std::pow(b1, t));
    double vhat = v / (1 - std::pow(b2, t));
    return theta - lr * mhat / (std::sqrt(vhat) + eps);
  }
};

struct Counts {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

/// Confusion matrix by explicit case analysis on 0/1 labels, 1 = positive.
inline Counts count_by_hand(const std::vector<int>& pred, const std::vector<int>& truth) {
  Counts c;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (pred[i] == 1 && truth[i] == 1) c.tp++;
    if (pred[i] == 1 && truth[i] == 0) c.fp++;
    if (pred[i] == 0 && truth[i] == 0) c.tn++;
    if (pred[i] == 0 && truth[i] == 1) c.fn++;
  }
  return c;
}

inline double f1_by_hand(const Counts& c) {
  if (c.tp == 0) return 0.0;  // covers every zero-denominator case when tp = 0
  const double p = double(c.tp) / double(c.tp + c.fp);
  const double r = double(c.tp) / double(c.tp + c.fn);
  return 2 * p * r / (p + r);
}

inline std::vector<float> random_vector(std::mt19937_64& rng, std::size_t dim, float scale = 1.0f) {
  std::normal_distribution<float> n(0.0f, scale);
  std::vector<float> v(dim);
  for (auto& x : v) x = n(rng);
  return v;
}

}  // namespace oracle
