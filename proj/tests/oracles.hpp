#pragma once

// Reference implementations used only by tests. They deliberately avoid the
// library's numerical paths: the normal cdf comes from adaptive Simpson
// quadrature, quantiles from bisection, and k-means optima from exhaustive
// partition enumeration.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <cstring>

#include <Eigen/Dense>

namespace oracle {

/// Bitwise equality of two Eigen dense objects (NaN-safe, unlike ==).
template <class A, class B>
bool bits_equal(const A& a, const B& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
  return std::memcmp(a.eval().data(), b.eval().data(),
                     sizeof(typename A::Scalar) *
                         static_cast<size_t>(a.size())) == 0;
}

inline long double normal_pdf_ld(long double z) {
  const long double inv_sqrt_2pi = 0.3989422804014326779399460599343818685L;
  return inv_sqrt_2pi * std::exp(-0.5L * z * z);
}

inline long double adaptive_simpson(
    const std::function<long double(long double)>& f, long double a,
    long double b, long double fa, long double fb, long double fm,
    long double whole, long double tol, int depth) {
  const long double m = 0.5L * (a + b);
  const long double lm = 0.5L * (a + m);
  const long double rm = 0.5L * (m + b);
  const long double flm = f(lm);
  const long double frm = f(rm);
  const long double left = (m - a) / 6.0L * (fa + 4.0L * flm + fm);
  const long double right = (b - m) / 6.0L * (fm + 4.0L * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0L * tol) {
    return left + right + (left + right - whole) / 15.0L;
  }
  return adaptive_simpson(f, a, m, fa, fm, flm, left, 0.5L * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, fb, frm, right, 0.5L * tol, depth - 1);
}

inline long double integrate(const std::function<long double(long double)>& f,
                             long double a, long double b,
                             long double tol = 1e-16L) {
  if (a == b) return 0.0L;
  const long double fa = f(a);
  const long double fb = f(b);
  const long double fm = f(0.5L * (a + b));
  const long double whole = (b - a) / 6.0L * (fa + 4.0L * fm + fb);
  return adaptive_simpson(f, a, b, fa, fb, fm, whole, tol, 48);
}

inline double normal_cdf(double z) {
  if (z < -40.0) return 0.0;
  if (z > 40.0) return 1.0;
  const long double body =
      integrate([](long double t) { return normal_pdf_ld(t); }, 0.0L,
                std::fabs(static_cast<long double>(z)));
  const long double value = z >= 0.0 ? 0.5L + body : 0.5L - body;
  return static_cast<double>(value);
}

inline double truncnorm_pdf(double x, double mu, double sigma, double a,
                            double b) {
  if (x < a || x > b) return 0.0;
  const double mass = normal_cdf((b - mu) / sigma) - normal_cdf((a - mu) / sigma);
  return static_cast<double>(normal_pdf_ld((x - mu) / sigma)) / (sigma * mass);
}

inline double truncnorm_cdf(double x, double mu, double sigma, double a,
                            double b) {
  if (x <= a) return 0.0;
  if (x >= b) return 1.0;
  const double pa = normal_cdf((a - mu) / sigma);
  const double pb = normal_cdf((b - mu) / sigma);
  return (normal_cdf((x - mu) / sigma) - pa) / (pb - pa);
}

/// Bisection inverse of the truncated normal cdf.
inline double truncnorm_quantile(double u, double mu, double sigma, double a,
                                 double b) {
  double lo = a, hi = b;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (truncnorm_cdf(mid, mu, sigma, a, b) < u) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Bisection solve of P(|X| <= alpha) = p_zero for the truncated normal.
inline double solve_alpha(double p_zero, double mu, double sigma, double a,
                          double b) {
  const auto prob = [&](double alpha) {
    return truncnorm_cdf(alpha, mu, sigma, a, b) -
           truncnorm_cdf(-alpha, mu, sigma, a, b);
  };
  double lo = 0.0, hi = b;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (prob(mid) < p_zero) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a cdf.
inline double ks_statistic(std::vector<double> sample,
                           const std::function<double(double)>& cdf) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (size_t i = 0; i < sample.size(); ++i) {
    const double f = cdf(sample[i]);
    d = std::max(d, (static_cast<double>(i) + 1.0) / n - f);
    d = std::max(d, f - static_cast<double>(i) / n);
  }
  return d;
}

/// Globally optimal weighted k-means distortion (1/n) sum_k w_k min_j d2 by
/// exhaustive enumeration of all m^n labelings. Only viable for tiny n.
inline double global_kmeans_distortion(const Eigen::MatrixXd& pts,
                                       const Eigen::VectorXd& w, int m) {
  const int n = static_cast<int>(pts.rows());
  const int d = static_cast<int>(pts.cols());
  std::vector<int> label(static_cast<size_t>(n), 0);
  double best = std::numeric_limits<double>::infinity();
  Eigen::MatrixXd sums(m, d);
  Eigen::VectorXd wsum(m);
  while (true) {
    sums.setZero();
    wsum.setZero();
    for (int k = 0; k < n; ++k) {
      sums.row(label[static_cast<size_t>(k)]) += w[k] * pts.row(k);
      wsum[label[static_cast<size_t>(k)]] += w[k];
    }
    double sse = 0.0;
    for (int k = 0; k < n; ++k) {
      const int j = label[static_cast<size_t>(k)];
      if (wsum[j] <= 0.0) continue;
      const Eigen::RowVectorXd mean = sums.row(j) / wsum[j];
      sse += w[k] * (pts.row(k) - mean).squaredNorm();
    }
    best = std::min(best, sse / static_cast<double>(n));
    int pos = 0;
    while (pos < n && label[static_cast<size_t>(pos)] == m - 1) {
      label[static_cast<size_t>(pos)] = 0;
      ++pos;
    }
    if (pos == n) break;
    ++label[static_cast<size_t>(pos)];
  }
  return best;
}

/// Textbook Lloyd iteration (unweighted) from a given initial codebook.
/// Empty cells keep their previous prototype. Returns the final distortion
/// (1/n) sum_k min_j d2.
inline double textbook_kmeans_from_init(const Eigen::MatrixXd& pts,
                                        Eigen::MatrixXd protos) {
  const int n = static_cast<int>(pts.rows());
  const int m = static_cast<int>(protos.rows());
  std::vector<int> assign(static_cast<size_t>(n), -1);
  for (int it = 0; it < 500; ++it) {
    bool changed = false;
    for (int k = 0; k < n; ++k) {
      int arg = 0;
      double bd = (pts.row(k) - protos.row(0)).squaredNorm();
      for (int j = 1; j < m; ++j) {
        const double dj = (pts.row(k) - protos.row(j)).squaredNorm();
        if (dj < bd) {
          bd = dj;
          arg = j;
        }
      }
      if (assign[static_cast<size_t>(k)] != arg) changed = true;
      assign[static_cast<size_t>(k)] = arg;
    }
    if (!changed) break;
    for (int j = 0; j < m; ++j) {
      Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(pts.cols());
      int count = 0;
      for (int k = 0; k < n; ++k) {
        if (assign[static_cast<size_t>(k)] == j) {
          sum += pts.row(k);
          ++count;
        }
      }
      if (count > 0) protos.row(j) = sum / count;
    }
  }
  double sse = 0.0;
  for (int k = 0; k < n; ++k) {
    double bd = (pts.row(k) - protos.row(0)).squaredNorm();
    for (int j = 1; j < m; ++j) {
      bd = std::min(bd, (pts.row(k) - protos.row(j)).squaredNorm());
    }
    sse += bd;
  }
  return sse / static_cast<double>(n);
}

/// Plain textbook k-means (unweighted, random distinct-point init, empty
/// cells keep their old prototype). Returns the best distortion over the
/// requested number of restarts.
inline double textbook_kmeans_distortion(const Eigen::MatrixXd& pts, int m,
                                         int starts, std::mt19937_64& rng) {
  const int n = static_cast<int>(pts.rows());
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> order(static_cast<size_t>(n));
  for (int s = 0; s < starts; ++s) {
    for (int i = 0; i < n; ++i) order[static_cast<size_t>(i)] = i;
    std::shuffle(order.begin(), order.end(), rng);
    Eigen::MatrixXd protos(m, pts.cols());
    int picked = 0;
    for (int i = 0; i < n && picked < m; ++i) {
      const auto row = pts.row(order[static_cast<size_t>(i)]);
      bool duplicate = false;
      for (int j = 0; j < picked; ++j) {
        if ((protos.row(j) - row).squaredNorm() == 0.0) duplicate = true;
      }
      if (!duplicate) protos.row(picked++) = row;
    }
    if (picked < m) continue;
    std::vector<int> assign(static_cast<size_t>(n), -1);
    for (int it = 0; it < 200; ++it) {
      bool changed = false;
      for (int k = 0; k < n; ++k) {
        int arg = 0;
        double bd = (pts.row(k) - protos.row(0)).squaredNorm();
        for (int j = 1; j < m; ++j) {
          const double dj = (pts.row(k) - protos.row(j)).squaredNorm();
          if (dj < bd) {
            bd = dj;
            arg = j;
          }
        }
        if (assign[static_cast<size_t>(k)] != arg) changed = true;
        assign[static_cast<size_t>(k)] = arg;
      }
      if (!changed) break;
      for (int j = 0; j < m; ++j) {
        Eigen::RowVectorXd sum = Eigen::RowVectorXd::Zero(pts.cols());
        int count = 0;
        for (int k = 0; k < n; ++k) {
          if (assign[static_cast<size_t>(k)] == j) {
            sum += pts.row(k);
            ++count;
          }
        }
        if (count > 0) protos.row(j) = sum / count;
      }
    }
    double sse = 0.0;
    for (int k = 0; k < n; ++k) {
      double bd = (pts.row(k) - protos.row(0)).squaredNorm();
      for (int j = 1; j < m; ++j) {
        bd = std::min(bd, (pts.row(k) - protos.row(j)).squaredNorm());
      }
      sse += bd;
    }
    best = std::min(best, sse / static_cast<double>(n));
  }
  return best;
}

}  // namespace oracle
