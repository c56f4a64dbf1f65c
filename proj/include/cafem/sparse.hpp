#pragma once

#include <atomic>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace cafem {

struct Triplet {
  int row = 0;
  int col = 0;
  double value = 0.0;
};

/// Symmetric sparse matrix in compressed row layout. Both triangles are
/// stored; column indices are sorted within each row and exact zeros are
/// dropped when the matrix is built.
class SparseMatrixSym {
 public:
  SparseMatrixSym() = default;

  /// Sums duplicate entries. Does not check value symmetry; see asymmetry().
  static SparseMatrixSym from_triplets(std::size_t n, std::span<const Triplet> triplets);
  static SparseMatrixSym identity(std::size_t n);

  /// a*A + b*B on the union of both patterns.
  static SparseMatrixSym combine(double a, const SparseMatrixSym& A, double b, const SparseMatrixSym& B);

  std::size_t size() const { return n_; }
  std::size_t nonzeros() const { return values_.size(); }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const int> columns() const { return columns_; }
  std::span<const double> values() const { return values_; }

  double at(std::size_t i, std::size_t j) const;
  std::vector<double> diagonal() const;

  /// y = A x. Throws InputError on dimension mismatch.
  void matvec(std::span<const double> x, std::span<double> y) const;
  std::vector<double> operator*(std::span<const double> x) const;

  /// Sum of all stored entries (1' A 1).
  double total() const;

  /// max |A_ij - A_ji| over the stored pattern; also counts structural asymmetry.
  double asymmetry() const;

 private:
  std::size_t n_ = 0;
  std::vector<std::size_t> row_offsets_{0};
  std::vector<int> columns_;
  std::vector<double> values_;
};

/// Process-wide instrumentation used to verify that system matrices are built
/// and preconditioned once per run.
struct LinalgCounters {
  std::atomic<long> matrix_combinations{0};
  std::atomic<long> preconditioner_setups{0};
  std::atomic<long> solves{0};
  void reset() {
    matrix_combinations = 0;
    preconditioner_setups = 0;
    solves = 0;
  }
};
LinalgCounters& linalg_counters();

struct SolveOptions {
  double relative_tolerance = 1e-10;
  int max_iterations = 20000;
  /// Record the energy functional 0.5 x'Ax - b'x after every iteration.
  bool record_energy = false;
};

struct SolveStats {
  int iterations = 0;
  double relative_residual = 0.0;
  std::vector<double> energy;
};

/// Jacobi-preconditioned conjugate gradient bound to one SPD matrix. The
/// preconditioner is built once in the constructor; solve() is const and may
/// be called concurrently from several threads.
class PcgSolver {
 public:
  PcgSolver(std::shared_ptr<const SparseMatrixSym> matrix, SolveOptions options = {});

  const SparseMatrixSym& matrix() const { return *matrix_; }
  const SolveOptions& options() const { return options_; }

  /// Solves A x = rhs starting from the value already in x. Throws InputError
  /// on non-finite rhs and SolverError when the iteration cap is reached.
  SolveStats solve(std::span<const double> rhs, std::span<double> x) const;
  std::vector<double> solve(std::span<const double> rhs) const;

 private:
  std::shared_ptr<const SparseMatrixSym> matrix_;
  SolveOptions options_;
  std::vector<double> inv_diag_;
};

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace cafem
