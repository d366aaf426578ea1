#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "cfa/lp.hpp"
#include "oracles.hpp"

using cfa::lp::LpProblem;
using cfa::lp::LpSolution;
using cfa::lp::SolveStatus;

namespace {

LpProblem make(std::initializer_list<std::initializer_list<double>> rows,
               std::initializer_list<double> rhs,
               std::initializer_list<double> obj) {
  Eigen::MatrixXd A(rows.size(), rows.begin()->size());
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double v : r) A(i, j++) = v;
    ++i;
  }
  Eigen::VectorXd b(static_cast<Eigen::Index>(rhs.size()));
  int k = 0;
  for (double v : rhs) b(k++) = v;
  Eigen::VectorXd c(static_cast<Eigen::Index>(obj.size()));
  k = 0;
  for (double v : obj) c(k++) = v;
  return LpProblem::dense(std::move(A), std::move(b), std::move(c));
}

// dx_j / db_i for structural j, assembled from the basis inverse
Eigen::MatrixXd structural_sensitivity(const LpProblem& p,
                                       const LpSolution& s) {
  Eigen::MatrixXd S = Eigen::MatrixXd::Zero(p.cols(), p.rows());
  for (int k = 0; k < static_cast<int>(s.basis.size()); ++k) {
    int j = s.basis[static_cast<std::size_t>(k)];
    if (j < p.cols()) S.row(j) = s.basis_inverse.row(k);
  }
  return S;
}

}  // namespace

TEST_CASE("single variable bound", "[lp]") {
  auto p = make({{1.0}}, {5.0}, {1.0});
  auto s = cfa::lp::solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.x(0) == Catch::Approx(5.0));
  CHECK(s.objective == Catch::Approx(5.0));
  CHECK(s.duals(0) == Catch::Approx(1.0));
  CHECK(cfa::lp::basic_value_sensitivity(s)(0, 0) == Catch::Approx(1.0));
}

TEST_CASE("empty feasible set", "[lp]") {
  auto p = make({{1.0}}, {-1.0}, {0.0});
  auto s = cfa::lp::solve(p);
  REQUIRE(s.status == SolveStatus::Infeasible);
  CHECK(s.diagnostic_row >= 0);
}

TEST_CASE("unbounded ray", "[lp]") {
  // x2 unconstrained from above with positive cost
  auto p = make({{1.0, 0.0}}, {3.0}, {0.0, 1.0});
  auto s = cfa::lp::solve(p);
  REQUIRE(s.status == SolveStatus::Unbounded);
  CHECK(s.diagnostic_col >= 0);
}

TEST_CASE("2x2 sensitivity by hand", "[lp]") {
  auto p = make({{1.0, 0.0}, {1.0, 1.0}}, {3.0, 5.0}, {1.0, 1.0});
  auto s = cfa::lp::solve(p);
  REQUIRE(s.status == SolveStatus::Optimal);
  CHECK(s.x(0) == Catch::Approx(3.0));
  CHECK(s.x(1) == Catch::Approx(2.0));
  auto S = structural_sensitivity(p, s);
  CHECK(S(1, 1) == Catch::Approx(1.0));   // dx2/db2
  CHECK(S(1, 0) == Catch::Approx(-1.0));  // dx2/db1
}

TEST_CASE("matches vertex enumeration on random instances", "[lp][oracle]") {
  std::mt19937_64 rng(20240217ULL);
  int optimal_seen = 0;
  for (int trial = 0; trial < 400; ++trial) {
    auto p = oracle::random_small_lp(rng);
    auto expect = oracle::classify(p.matrix(), p.b, p.c);
    auto got = cfa::lp::solve(p);
    INFO("trial " << trial);
    REQUIRE(got.status == expect.status);
    if (expect.status == SolveStatus::Optimal) {
      ++optimal_seen;
      CHECK(std::abs(got.objective - expect.objective) < 1e-8);
    }
  }
  CHECK(optimal_seen > 50);  // the generator must exercise the optimal path
}

TEST_CASE("duality and complementary slackness", "[lp][property]") {
  std::mt19937_64 rng(77001ULL);
  int checked = 0;
  while (checked < 120) {
    auto p = oracle::random_small_lp(rng);
    auto s = cfa::lp::solve(p);
    if (s.status != SolveStatus::Optimal) continue;
    ++checked;
    // strong duality
    CHECK(std::abs(p.c.dot(s.x) - p.b.dot(s.duals)) < 1e-6);
    // dual feasibility of the sign constraint
    CHECK(s.duals.minCoeff() > -1e-7);
    // complementary slackness row by row
    Eigen::VectorXd slack = p.b - p.matrix() * s.x;
    for (int i = 0; i < p.rows(); ++i)
      CHECK(std::abs(s.duals(i) * slack(i)) < 1e-6);
    // basic values must equal Binv b in basis order
    Eigen::VectorXd xb = s.basis_inverse * p.b;
    for (int k = 0; k < p.rows(); ++k) {
      int j = s.basis[static_cast<std::size_t>(k)];
      if (j < p.cols()) CHECK(std::abs(s.x(j) - xb(k)) < 1e-6);
    }
  }
}

TEST_CASE("duals equal Binv' cB", "[lp][property]") {
  std::mt19937_64 rng(5150ULL);
  int checked = 0;
  while (checked < 60) {
    auto p = oracle::random_small_lp(rng);
    auto s = cfa::lp::solve(p);
    if (s.status != SolveStatus::Optimal) continue;
    ++checked;
    Eigen::VectorXd cb(p.rows());
    for (int k = 0; k < p.rows(); ++k) {
      int j = s.basis[static_cast<std::size_t>(k)];
      cb(k) = j < p.cols() ? p.c(j) : 0.0;
    }
    Eigen::VectorXd y = s.basis_inverse.transpose() * cb;
    CHECK((y - s.duals).lpNorm<Eigen::Infinity>() < 1e-9);
  }
}

TEST_CASE("sensitivity matches re-solve under rhs perturbation",
          "[lp][property]") {
  std::mt19937_64 rng(315ULL);
  const double h = 1e-5;
  int checked = 0;
  while (checked < 80) {
    auto p = oracle::random_small_lp(rng);
    auto s = cfa::lp::solve(p);
    if (s.status != SolveStatus::Optimal) continue;
    auto S = structural_sensitivity(p, s);
    bool counted = false;
    for (int i = 0; i < p.rows(); ++i) {
      LpProblem up = p, dn = p;
      up.b(i) += h;
      dn.b(i) -= h;
      auto su = cfa::lp::solve(up);
      auto sd = cfa::lp::solve(dn);
      if (su.status != SolveStatus::Optimal ||
          sd.status != SolveStatus::Optimal)
        continue;
      if (su.basis != s.basis || sd.basis != s.basis) continue;  // kink
      Eigen::VectorXd fd = (su.x - sd.x) / (2.0 * h);
      INFO("row " << i);
      CHECK((fd - S.col(i)).lpNorm<Eigen::Infinity>() < 1e-6);
      counted = true;
    }
    if (counted) ++checked;
  }
}

TEST_CASE("identical inputs give identical bases", "[lp][determinism]") {
  std::mt19937_64 rng(999ULL);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = oracle::random_small_lp(rng);
    auto a = cfa::lp::solve(p);
    auto b = cfa::lp::solve(p);
    REQUIRE(a.status == b.status);
    if (a.status == SolveStatus::Optimal) {
      CHECK(a.basis == b.basis);
      CHECK(a.x == b.x);  // bitwise
    }
  }
}

TEST_CASE("warm start agrees with cold solve", "[lp]") {
  std::mt19937_64 rng(424242ULL);
  std::uniform_real_distribution<double> bump(-0.05, 0.05);
  int checked = 0;
  while (checked < 60) {
    auto p = oracle::random_small_lp(rng);
    auto s = cfa::lp::solve(p);
    if (s.status != SolveStatus::Optimal) continue;
    ++checked;
    LpProblem q = p;
    for (int i = 0; i < q.rows(); ++i) q.b(i) += bump(rng);
    cfa::lp::WarmStart ws{s.basis, s.basis_inverse};
    auto warm = cfa::lp::solve(q, ws);
    auto cold = cfa::lp::solve(q);
    REQUIRE(warm.status == cold.status);
    if (cold.status == SolveStatus::Optimal)
      CHECK(warm.objective == Catch::Approx(cold.objective).margin(1e-7));
  }
}

TEST_CASE("validation rejects malformed problems", "[lp]") {
  Eigen::MatrixXd A(1, 2);
  A << 1.0, 2.0;
  Eigen::VectorXd b(1), c(1);
  b << 1.0;
  c << 1.0;
  auto p = LpProblem::dense(A, b, c);
  CHECK_THROWS_AS(cfa::lp::solve(p), std::invalid_argument);

  Eigen::MatrixXd A2(1, 1);
  A2 << std::numeric_limits<double>::quiet_NaN();
  Eigen::VectorXd b2(1), c2(1);
  b2 << 1.0;
  c2 << 1.0;
  auto q = LpProblem::dense(A2, b2, c2);
  CHECK_THROWS_AS(cfa::lp::solve(q), std::invalid_argument);
}
