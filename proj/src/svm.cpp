#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "stemcalyx/classify.hpp"
#include "stemcalyx/error.hpp"

namespace stemcalyx {

double poly_kernel(const std::vector<double>& x, const std::vector<double>& z, int degree, double gamma) {
  double dot = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) dot += x[i] * z[i];
  dot = gamma * dot + 1.0;
  double out = 1.0;
  for (int d = 0; d < degree; ++d) out *= dot;
  return out;
}

double BinarySvm::decision(const std::vector<double>& x, int degree, double gamma) const {
  double sum = 0.0;
  for (std::size_t i = 0; i < support.size(); ++i) sum += coef[i] * poly_kernel(support[i], x, degree, gamma);
  return sum - rho;
}

// Sequential minimal optimization on the dual
//   min 1/2 a'Qa - e'a,  0 <= a <= C,  y'a = 0,  Q_ij = y_i y_j K(x_i, x_j),
// with maximal-violating-pair selection (second-order choice of the second
// index). Stops when the KKT gap m(a) - M(a) drops below `tolerance`.
BinarySvm train_binary_svm(const std::vector<std::vector<double>>& x, const std::vector<double>& y,
                           int degree, double c, double tolerance, std::size_t max_iterations,
                           double gamma) {
  const std::size_t n = x.size();
  if (n < 2 || y.size() != n) throw Error(ErrorKind::Parameter, "SVM needs at least two labelled samples");
  if (!(c > 0.0)) throw Error(ErrorKind::Parameter, "SVM C must be positive");
  if (degree < 1) throw Error(ErrorKind::Parameter, "SVM kernel degree must be >= 1");
  if (!(gamma > 0.0)) throw Error(ErrorKind::Parameter, "SVM kernel gamma must be positive");
  bool has_pos = false;
  bool has_neg = false;
  for (double v : y) {
    if (v == 1.0) has_pos = true;
    else if (v == -1.0) has_neg = true;
    else throw Error(ErrorKind::Parameter, "SVM labels must be +1 or -1");
  }
  if (!has_pos || !has_neg) throw Error(ErrorKind::Parameter, "SVM needs both classes");

  std::vector<double> kernel(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      const double k = poly_kernel(x[i], x[j], degree, gamma);
      kernel[i * n + j] = k;
      kernel[j * n + i] = k;
    }
  }
  auto K = [&](std::size_t i, std::size_t j) { return kernel[i * n + j]; };
  auto Q = [&](std::size_t i, std::size_t j) { return y[i] * y[j] * kernel[i * n + j]; };

  std::vector<double> alpha(n, 0.0);
  std::vector<double> grad(n, -1.0);
  auto in_up = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] < c) || (y[t] < 0 && alpha[t] > 0);
  };
  auto in_low = [&](std::size_t t) {
    return (y[t] > 0 && alpha[t] > 0) || (y[t] < 0 && alpha[t] < c);
  };
  constexpr double kTau = 1e-12;

  std::size_t iter = 0;
  bool converged = false;
  while (iter < max_iterations) {
    double gmax = -std::numeric_limits<double>::infinity();
    std::size_t i = n;
    for (std::size_t t = 0; t < n; ++t) {
      if (in_up(t) && -y[t] * grad[t] >= gmax) {
        gmax = -y[t] * grad[t];
        i = t;
      }
    }
    double gmin = std::numeric_limits<double>::infinity();
    std::size_t j = n;
    double best_obj = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      if (!in_low(t)) continue;
      const double v = -y[t] * grad[t];
      gmin = std::min(gmin, v);
      if (i == n) continue;
      const double b = gmax - v;
      if (b > 0.0) {
        double a = K(i, i) + K(t, t) - 2.0 * K(i, t);
        if (a <= 0.0) a = kTau;
        const double obj = -(b * b) / a;
        if (obj <= best_obj) {
          best_obj = obj;
          j = t;
        }
      }
    }
    if (i == n || j == n || gmax - gmin < tolerance) {
      converged = true;
      break;
    }
    ++iter;

    const double old_i = alpha[i];
    const double old_j = alpha[j];
    if (y[i] != y[j]) {
      double quad = Q(i, i) + Q(j, j) + 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) {
          alpha[j] = 0.0;
          alpha[i] = diff;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = -diff;
      }
      if (diff > 0.0) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = c - diff;
        }
      } else if (alpha[j] > c) {
        alpha[j] = c;
        alpha[i] = c + diff;
      }
    } else {
      double quad = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
      if (quad <= 0.0) quad = kTau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) {
          alpha[i] = c;
          alpha[j] = sum - c;
        }
      } else if (alpha[j] < 0.0) {
        alpha[j] = 0.0;
        alpha[i] = sum;
      }
      if (sum > c) {
        if (alpha[j] > c) {
          alpha[j] = c;
          alpha[i] = sum - c;
        }
      } else if (alpha[i] < 0.0) {
        alpha[i] = 0.0;
        alpha[j] = sum;
      }
    }
    const double di = alpha[i] - old_i;
    const double dj = alpha[j] - old_j;
    for (std::size_t t = 0; t < n; ++t) grad[t] += Q(t, i) * di + Q(t, j) * dj;
  }
  if (!converged) {
    throw Error(ErrorKind::Training, "SMO did not reach KKT tolerance within " +
                                         std::to_string(max_iterations) + " iterations");
  }

  // Offset: mean over free vectors, else the midpoint of the feasible range.
  double upper = std::numeric_limits<double>::infinity();
  double lower = -std::numeric_limits<double>::infinity();
  double free_sum = 0.0;
  std::size_t free_count = 0;
  for (std::size_t t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] < 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] > 0) upper = std::min(upper, yg);
      else lower = std::max(lower, yg);
    } else {
      free_sum += yg;
      ++free_count;
    }
  }
  BinarySvm svm;
  svm.rho = free_count > 0 ? free_sum / static_cast<double>(free_count) : (upper + lower) / 2.0;
  svm.alpha = alpha;
  svm.y = y;
  svm.iterations = iter;
  for (std::size_t t = 0; t < n; ++t) {
    if (alpha[t] <= 0.0) continue;
    svm.support.push_back(x[t]);
    svm.coef.push_back(alpha[t] * y[t]);
  }
  return svm;
}

}  // namespace stemcalyx
