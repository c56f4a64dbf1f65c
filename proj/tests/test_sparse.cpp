#include <gtest/gtest.h>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <random>

#include "cafem/errors.hpp"
#include "cafem/sparse.hpp"

using namespace cafem;

namespace {

// Random SPD matrix with a sprinkling of zeros, as triplets and as a dense oracle.
struct RandomSpd {
  std::vector<Triplet> triplets;
  Eigen::MatrixXd dense;
};

RandomSpd random_spd(int n, std::mt19937_64& rng, double fill = 0.3) {
  std::uniform_real_distribution<double> val(-1.0, 1.0), coin(0.0, 1.0);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < i; ++j)
      if (coin(rng) < fill) a(i, j) = a(j, i) = val(rng);
  for (int i = 0; i < n; ++i) a(i, i) = a.row(i).cwiseAbs().sum() + 0.5 + coin(rng);
  RandomSpd r{{}, a};
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (a(i, j) != 0.0) r.triplets.push_back({i, j, a(i, j)});
  return r;
}

std::vector<double> random_vector(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> val(-1.0, 1.0);
  std::vector<double> v(n);
  for (auto& x : v) x = val(rng);
  return v;
}

}  // namespace

TEST(SparseMatrix, IdentityMatvecReturnsInput) {
  std::mt19937_64 rng(1);
  const auto x = random_vector(7, rng);
  EXPECT_EQ(SparseMatrixSym::identity(7) * x, x);
}

TEST(SparseMatrix, UnitVectorPicksColumn) {
  std::mt19937_64 rng(2);
  const auto r = random_spd(10, rng);
  const auto a = SparseMatrixSym::from_triplets(10, r.triplets);
  for (int j = 0; j < 10; ++j) {
    std::vector<double> e(10, 0.0);
    e[j] = 1.0;
    const auto col = a * e;
    for (int i = 0; i < 10; ++i) EXPECT_EQ(col[i], r.dense(i, j));
  }
}

TEST(SparseMatrix, MatvecMatchesDenseOracle) {
  std::mt19937_64 rng(3);
  const auto r = random_spd(10, rng);
  const auto a = SparseMatrixSym::from_triplets(10, r.triplets);
  const auto x = random_vector(10, rng);
  const Eigen::VectorXd ref = r.dense * Eigen::Map<const Eigen::VectorXd>(x.data(), 10);
  const auto y = a * x;
  for (int i = 0; i < 10; ++i) EXPECT_NEAR(y[i], ref(i), 1e-13);
}

TEST(SparseMatrix, DuplicatesSumAndZerosAreDropped) {
  const std::vector<Triplet> t{{0, 0, 1.0}, {0, 0, 2.0}, {0, 1, 0.5}, {1, 0, 0.5}, {1, 1, 0.0}, {1, 1, 4.0},
                               {0, 1, -0.5}, {1, 0, -0.5}};
  const auto a = SparseMatrixSym::from_triplets(2, t);
  EXPECT_EQ(a.at(0, 0), 3.0);
  EXPECT_EQ(a.at(1, 1), 4.0);
  EXPECT_EQ(a.at(0, 1), 0.0);
  EXPECT_EQ(a.nonzeros(), 2u);
}

TEST(SparseMatrix, ColumnsSortedWithinRows) {
  std::mt19937_64 rng(4);
  const auto a = SparseMatrixSym::from_triplets(30, random_spd(30, rng).triplets);
  const auto off = a.row_offsets();
  const auto cols = a.columns();
  for (std::size_t i = 0; i + 1 < off.size(); ++i)
    for (std::size_t k = off[i] + 1; k < off[i + 1]; ++k) EXPECT_LT(cols[k - 1], cols[k]);
  EXPECT_EQ(a.asymmetry(), 0.0);
}

TEST(SparseMatrix, CombineMatchesDenseSum) {
  std::mt19937_64 rng(5);
  const auto ra = random_spd(12, rng), rb = random_spd(12, rng, 0.1);
  const auto a = SparseMatrixSym::from_triplets(12, ra.triplets), b = SparseMatrixSym::from_triplets(12, rb.triplets);
  const auto c = SparseMatrixSym::combine(1.0, a, 0.25, b);
  const Eigen::MatrixXd ref = ra.dense + 0.25 * rb.dense;
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) EXPECT_NEAR(c.at(i, j), ref(i, j), 1e-15);
}

TEST(SparseMatrix, DimensionMismatchIsInputError) {
  const auto a = SparseMatrixSym::identity(3);
  std::vector<double> x(4), y(3);
  EXPECT_THROW(a.matvec(x, y), InputError);
}

TEST(PcgSolver, ConstructedSolutionIsAllOnes) {
  std::mt19937_64 rng(6);
  auto a = std::make_shared<const SparseMatrixSym>(SparseMatrixSym::from_triplets(40, random_spd(40, rng).triplets));
  const std::vector<double> ones(40, 1.0);
  const auto x = PcgSolver(a).solve(*a * ones);
  for (double v : x) EXPECT_NEAR(v, 1.0, 1e-9);
}

TEST(PcgSolver, ZeroRightHandSideGivesZero) {
  std::mt19937_64 rng(7);
  auto a = std::make_shared<const SparseMatrixSym>(SparseMatrixSym::from_triplets(10, random_spd(10, rng).triplets));
  std::vector<double> x(10, 3.0);
  PcgSolver(a).solve(std::vector<double>(10, 0.0), x);
  for (double v : x) EXPECT_EQ(v, 0.0);
}

TEST(PcgSolver, MatchesDenseDirectSolveOnRandomSystems) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const auto r = random_spd(50, rng);
    auto a = std::make_shared<const SparseMatrixSym>(SparseMatrixSym::from_triplets(50, r.triplets));
    const auto b = random_vector(50, rng);
    const auto x = PcgSolver(a).solve(b);
    const Eigen::VectorXd ref = r.dense.llt().solve(Eigen::Map<const Eigen::VectorXd>(b.data(), 50));
    double err = 0.0;
    for (int i = 0; i < 50; ++i) err = std::max(err, std::abs(x[i] - ref(i)));
    EXPECT_LE(err / ref.cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(PcgSolver, ReachesRequestedRelativeResidual) {
  std::mt19937_64 rng(9);
  auto a = std::make_shared<const SparseMatrixSym>(SparseMatrixSym::from_triplets(80, random_spd(80, rng).triplets));
  const auto b = random_vector(80, rng);
  std::vector<double> x(80, 0.0);
  const SolveStats s = PcgSolver(a).solve(b, x);
  auto r = *a * x;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  EXPECT_LE(norm2(r) / norm2(b), 1e-10 * 1.0001);
  EXPECT_LE(s.relative_residual, 1e-10);
}

TEST(PcgSolver, EnergyFunctionalDecreasesEveryIteration) {
  std::mt19937_64 rng(10);
  SolveOptions opt;
  opt.record_energy = true;
  auto a = std::make_shared<const SparseMatrixSym>(SparseMatrixSym::from_triplets(60, random_spd(60, rng).triplets));
  const auto b = random_vector(60, rng);
  std::vector<double> x(60, 0.0);
  const SolveStats s = PcgSolver(a, opt).solve(b, x);
  ASSERT_GE(s.energy.size(), 2u);
  for (std::size_t k = 1; k < s.energy.size(); ++k) EXPECT_LE(s.energy[k], s.energy[k - 1] + 1e-14);
}

TEST(PcgSolver, RepeatedSolvesAreBitwiseIdentical) {
  std::mt19937_64 rng(11);
  auto a = std::make_shared<const SparseMatrixSym>(SparseMatrixSym::from_triplets(30, random_spd(30, rng).triplets));
  const PcgSolver solver(a);
  const auto b = random_vector(30, rng);
  EXPECT_EQ(solver.solve(b), solver.solve(b));
}

TEST(PcgSolver, NonFiniteRhsIsInputError) {
  auto a = std::make_shared<const SparseMatrixSym>(SparseMatrixSym::identity(3));
  std::vector<double> b{1.0, std::numeric_limits<double>::quiet_NaN(), 0.0};
  EXPECT_THROW(PcgSolver(a).solve(b), InputError);
}

TEST(PcgSolver, IterationCapIsSolverErrorWithResidual) {
  std::mt19937_64 rng(12);
  SolveOptions opt;
  opt.max_iterations = 2;
  auto a = std::make_shared<const SparseMatrixSym>(SparseMatrixSym::from_triplets(40, random_spd(40, rng).triplets));
  try {
    PcgSolver(a, opt).solve(random_vector(40, rng));
    FAIL() << "expected SolverError";
  } catch (const SolverError& e) {
    EXPECT_GT(e.residual(), 1e-10);
  }
}

TEST(PcgSolver, PreconditionerBuiltOncePerHandle) {
  std::mt19937_64 rng(13);
  auto a = std::make_shared<const SparseMatrixSym>(SparseMatrixSym::from_triplets(20, random_spd(20, rng).triplets));
  linalg_counters().reset();
  const PcgSolver solver(a);
  for (int i = 0; i < 5; ++i) solver.solve(random_vector(20, rng));
  EXPECT_EQ(linalg_counters().preconditioner_setups.load(), 1);
  EXPECT_EQ(linalg_counters().solves.load(), 5);
}
