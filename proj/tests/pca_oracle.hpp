#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

namespace pageseg::testing {

struct EigenPairs {
  std::vector<double> values;                // descending
  std::vector<std::vector<double>> vectors;  // matching unit vectors
};

/// Sample covariance (n - 1) of row-major data, accumulated naively.
inline std::vector<std::vector<double>> brute_covariance(const std::vector<double>& rows, int n, int d) {
  std::vector<double> mean(d, 0.0);
  for (int r = 0; r < n; ++r)
    for (int j = 0; j < d; ++j) mean[j] += rows[r * d + j] / n;
  std::vector<std::vector<double>> c(d, std::vector<double>(d, 0.0));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b) {
      double s = 0.0;
      for (int r = 0; r < n; ++r) s += (rows[r * d + a] - mean[a]) * (rows[r * d + b] - mean[b]);
      c[a][b] = s / (n - 1);
    }
  return c;
}

/// Cyclic Jacobi rotations until the off-diagonal mass vanishes.
inline EigenPairs jacobi_eigen(std::vector<std::vector<double>> a) {
  const int n = static_cast<int>(a.size());
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (int i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a[x][x] > a[y][y]; });
  EigenPairs out;
  for (int i : order) {
    out.values.push_back(a[i][i]);
    std::vector<double> col(n);
    for (int k = 0; k < n; ++k) col[k] = v[k][i];
    out.vectors.push_back(col);
  }
  return out;
}

}  // namespace pageseg::testing
