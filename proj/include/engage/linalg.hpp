#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

// Minimal dense matrix plus a cyclic Jacobi eigensolver for real symmetric
// matrices. The graphs this project diagonalizes stay small (hundreds of
// nodes), so rotation sweeps to machine precision are entirely adequate.

namespace engage {

class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(int rows, int cols, double fill = 0.0)
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("DenseMatrix: negative shape");
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& at(int i, int j) { return data_[index(i, j)]; }
  double at(int i, int j) const { return data_[index(i, j)]; }

 private:
  std::size_t index(int i, int j) const {
    if (i < 0 || i >= rows_ || j < 0 || j >= cols_)
      throw std::out_of_range("DenseMatrix: index out of range");
    return static_cast<std::size_t>(i) * cols_ + j;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

struct EigenDecomposition {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column j pairs with values[j]; orthonormal
};

// Cyclic Jacobi iteration. Input must be symmetric within 1e-10 relative to
// its largest entry.
inline EigenDecomposition symmetric_eigen(const DenseMatrix& input) {
  const int n = input.rows();
  if (input.cols() != n) throw std::invalid_argument("symmetric_eigen: matrix not square");

  double max_abs = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) max_abs = std::max(max_abs, std::abs(input.at(i, j)));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(input.at(i, j) - input.at(j, i)) > 1e-10 * (1.0 + max_abs))
        throw std::invalid_argument("symmetric_eigen: matrix not symmetric");

  DenseMatrix a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a.at(i, j) = 0.5 * (input.at(i, j) + input.at(j, i));
  DenseMatrix v(n, n, 0.0);
  for (int i = 0; i < n; ++i) v.at(i, i) = 1.0;

  double frob = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) frob += a.at(i, j) * a.at(i, j);
  frob = std::sqrt(frob);
  const double stop = 1e-14 * (1.0 + frob);

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += a.at(i, j) * a.at(i, j);
    if (std::sqrt(2.0 * off) <= stop) break;

    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a.at(p, q);
        if (apq == 0.0) continue;
        const double app = a.at(p, p);
        const double aqq = a.at(q, q);
        const double theta = (aqq - app) / (2.0 * apq);
        double t = 1.0 / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        if (theta < 0.0) t = -t;
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (int k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = a.at(k, p);
          const double akq = a.at(k, q);
          a.at(k, p) = a.at(p, k) = c * akp - s * akq;
          a.at(k, q) = a.at(q, k) = s * akp + c * akq;
        }
        a.at(p, p) = c * c * app - 2.0 * s * c * apq + s * s * aqq;
        a.at(q, q) = s * s * app + 2.0 * s * c * apq + c * c * aqq;
        a.at(p, q) = a.at(q, p) = 0.0;

        for (int k = 0; k < n; ++k) {
          const double vkp = v.at(k, p);
          const double vkq = v.at(k, q);
          v.at(k, p) = c * vkp - s * vkq;
          v.at(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int i, int j) { return a.at(i, i) < a.at(j, j); });

  EigenDecomposition out;
  out.values.resize(static_cast<std::size_t>(n));
  out.vectors = DenseMatrix(n, n);
  for (int j = 0; j < n; ++j) {
    out.values[static_cast<std::size_t>(j)] = a.at(order[static_cast<std::size_t>(j)],
                                                   order[static_cast<std::size_t>(j)]);
    for (int i = 0; i < n; ++i)
      out.vectors.at(i, j) = v.at(i, order[static_cast<std::size_t>(j)]);
  }
  return out;
}

}  // namespace engage
