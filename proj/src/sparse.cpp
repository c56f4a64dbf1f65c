#include "cafem/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cafem/errors.hpp"

namespace cafem {

LinalgCounters& linalg_counters() {
  static LinalgCounters counters;
  return counters;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) { return std::sqrt(dot(a, a)); }

SparseMatrixSym SparseMatrixSym::from_triplets(std::size_t n, std::span<const Triplet> triplets) {
  std::vector<Triplet> sorted(triplets.begin(), triplets.end());
  for (const auto& t : sorted)
    if (t.row < 0 || t.col < 0 || static_cast<std::size_t>(t.row) >= n || static_cast<std::size_t>(t.col) >= n)
      throw InputError("triplet (" + std::to_string(t.row) + ", " + std::to_string(t.col) +
                       ") outside a " + std::to_string(n) + "x" + std::to_string(n) + " matrix");
  std::sort(sorted.begin(), sorted.end(),
            [](const Triplet& a, const Triplet& b) { return a.row != b.row ? a.row < b.row : a.col < b.col; });

  SparseMatrixSym m;
  m.n_ = n;
  m.row_offsets_.assign(n + 1, 0);
  std::size_t k = 0;
  while (k < sorted.size()) {
    const int r = sorted[k].row, c = sorted[k].col;
    double v = 0.0;
    while (k < sorted.size() && sorted[k].row == r && sorted[k].col == c) v += sorted[k++].value;
    if (v != 0.0) {
      m.columns_.push_back(c);
      m.values_.push_back(v);
      ++m.row_offsets_[static_cast<std::size_t>(r) + 1];
    }
  }
  for (std::size_t i = 0; i < n; ++i) m.row_offsets_[i + 1] += m.row_offsets_[i];
  return m;
}

SparseMatrixSym SparseMatrixSym::identity(std::size_t n) {
  std::vector<Triplet> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = {static_cast<int>(i), static_cast<int>(i), 1.0};
  return from_triplets(n, t);
}

SparseMatrixSym SparseMatrixSym::combine(double a, const SparseMatrixSym& A, double b, const SparseMatrixSym& B) {
  if (A.n_ != B.n_) throw InputError("combine: dimension mismatch");
  ++linalg_counters().matrix_combinations;
  SparseMatrixSym m;
  m.n_ = A.n_;
  m.row_offsets_.assign(m.n_ + 1, 0);
  for (std::size_t i = 0; i < m.n_; ++i) {
    std::size_t p = A.row_offsets_[i], q = B.row_offsets_[i];
    const std::size_t pe = A.row_offsets_[i + 1], qe = B.row_offsets_[i + 1];
    while (p < pe || q < qe) {
      int col;
      double v;
      if (q == qe || (p < pe && A.columns_[p] < B.columns_[q])) {
        col = A.columns_[p];
        v = a * A.values_[p++];
      } else if (p == pe || B.columns_[q] < A.columns_[p]) {
        col = B.columns_[q];
        v = b * B.values_[q++];
      } else {
        col = A.columns_[p];
        v = a * A.values_[p++] + b * B.values_[q++];
      }
      if (v != 0.0) {
        m.columns_.push_back(col);
        m.values_.push_back(v);
      }
    }
    m.row_offsets_[i + 1] = m.columns_.size();
  }
  return m;
}

double SparseMatrixSym::at(std::size_t i, std::size_t j) const {
  const auto first = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i]);
  const auto last = columns_.begin() + static_cast<std::ptrdiff_t>(row_offsets_[i + 1]);
  const auto it = std::lower_bound(first, last, static_cast<int>(j));
  return (it != last && *it == static_cast<int>(j)) ? values_[static_cast<std::size_t>(it - columns_.begin())] : 0.0;
}

std::vector<double> SparseMatrixSym::diagonal() const {
  std::vector<double> d(n_);
  for (std::size_t i = 0; i < n_; ++i) d[i] = at(i, i);
  return d;
}

void SparseMatrixSym::matvec(std::span<const double> x, std::span<double> y) const {
  if (x.size() != n_ || y.size() != n_)
    throw InputError("matvec: expected vectors of length " + std::to_string(n_));
  for (std::size_t i = 0; i < n_; ++i) {
    double s = 0.0;
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) s += values_[k] * x[columns_[k]];
    y[i] = s;
  }
}

std::vector<double> SparseMatrixSym::operator*(std::span<const double> x) const {
  std::vector<double> y(n_);
  matvec(x, y);
  return y;
}

double SparseMatrixSym::total() const {
  double s = 0.0;
  for (double v : values_) s += v;
  return s;
}

double SparseMatrixSym::asymmetry() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t k = row_offsets_[i]; k < row_offsets_[i + 1]; ++k) {
      const auto j = static_cast<std::size_t>(columns_[k]);
      worst = std::max(worst, std::abs(values_[k] - at(j, i)));
    }
  return worst;
}

PcgSolver::PcgSolver(std::shared_ptr<const SparseMatrixSym> matrix, SolveOptions options)
    : matrix_(std::move(matrix)), options_(options) {
  if (!matrix_) throw InputError("PcgSolver: null matrix");
  const auto d = matrix_->diagonal();
  inv_diag_.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (!(d[i] > 0.0)) throw InputError("PcgSolver: non-positive diagonal entry at row " + std::to_string(i));
    inv_diag_[i] = 1.0 / d[i];
  }
  ++linalg_counters().preconditioner_setups;
}

SolveStats PcgSolver::solve(std::span<const double> rhs, std::span<double> x) const {
  const std::size_t n = matrix_->size();
  if (rhs.size() != n || x.size() != n) throw InputError("solve: dimension mismatch");
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(rhs[i])) throw InputError("solve: non-finite right-hand side at row " + std::to_string(i));
  ++linalg_counters().solves;

  SolveStats stats;
  const double bnorm = norm2(rhs);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return stats;
  }
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(x[i])) x[i] = 0.0;

  std::vector<double> r(n), z(n), p(n), q(n);
  matrix_->matvec(x, r);
  for (std::size_t i = 0; i < n; ++i) r[i] = rhs[i] - r[i];
  auto energy = [&] {
    double e = 0.0;
    for (std::size_t i = 0; i < n; ++i) e -= 0.5 * x[i] * (rhs[i] + r[i]);
    return e;
  };
  if (options_.record_energy) stats.energy.push_back(energy());

  const double target = options_.relative_tolerance * bnorm;
  double rnorm = norm2(r);
  for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag_[i] * r[i];
  p = z;
  double rz = dot(r, z);

  while (rnorm > target) {
    if (stats.iterations >= options_.max_iterations)
      throw SolverError("PCG did not converge in " + std::to_string(options_.max_iterations) +
                            " iterations (relative residual " + std::to_string(rnorm / bnorm) + ")",
                        rnorm / bnorm);
    matrix_->matvec(p, q);
    const double alpha = rz / dot(p, q);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * q[i];
    }
    ++stats.iterations;
    if (options_.record_energy) stats.energy.push_back(energy());
    rnorm = norm2(r);
    for (std::size_t i = 0; i < n; ++i) z[i] = inv_diag_[i] * r[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  stats.relative_residual = rnorm / bnorm;
  return stats;
}

std::vector<double> PcgSolver::solve(std::span<const double> rhs) const {
  std::vector<double> x(rhs.size(), 0.0);
  solve(rhs, x);
  return x;
}

}  // namespace cafem
