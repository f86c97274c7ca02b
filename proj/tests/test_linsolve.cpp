#include <doctest.h>

#include <Eigen/Dense>
#include <random>

#include "ctns/linsolve.hpp"

using namespace ctns;

namespace {

SparseMatrix from_dense(const Eigen::MatrixXd& d) {
  SparseMatrix s(d.rows(), d.cols());
  std::vector<Eigen::Triplet<double>> trip;
  for (int i = 0; i < d.rows(); ++i) {
    for (int j = 0; j < d.cols(); ++j) {
      trip.emplace_back(i, j, d(i, j));
    }
  }
  s.setFromTriplets(trip.begin(), trip.end());
  s.makeCompressed();
  return s;
}

}  // namespace

TEST_CASE("apply_constraints is the identity without constraints") {
  Eigen::MatrixXd d(2, 2);
  d << 2, 1, 1, 2;
  LinearSystem sys{from_dense(d), Eigen::Vector2d(1, 1), {}};
  const LinearSystem out = apply_constraints(sys);
  CHECK(Eigen::MatrixXd(out.A) == d);
  CHECK(out.b == sys.b);
}

TEST_CASE("hand-eliminated 2x2 system") {
  Eigen::MatrixXd d(2, 2);
  d << 2, 1, 1, 2;
  LinearSystem sys{from_dense(d), Eigen::Vector2d(1, 1), {{0, 0.0}}};
  const Eigen::VectorXd x = solve(sys);
  CHECK(x[0] == doctest::Approx(0.0));
  CHECK(x[1] == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("nonzero prescribed value corrects the right-hand side") {
  Eigen::MatrixXd d(3, 3);
  d << 4, 1, 0, 1, 3, 1, 0, 1, 5;
  LinearSystem sys{from_dense(d), Eigen::Vector3d(0, 0, 0), {{0, 2.0}}};
  const Eigen::VectorXd x = solve(sys);
  CHECK(x[0] == doctest::Approx(2.0));
  // remaining system: [3 1; 1 5] (x1,x2) = (-2, 0)
  CHECK(x[1] == doctest::Approx(-10.0 / 14).epsilon(1e-13));
  CHECK(x[2] == doctest::Approx(2.0 / 14).epsilon(1e-13));
}

TEST_CASE("conflicting constraints are rejected") {
  Eigen::MatrixXd d(2, 2);
  d << 1, 0, 0, 1;
  LinearSystem sys{from_dense(d), Eigen::Vector2d(0, 0), {{0, 1.0}, {0, 2.0}}};
  CHECK_THROWS_AS(apply_constraints(sys), ConstraintError);
}

TEST_CASE("identity and hand-solved systems") {
  LinearSystem eye{from_dense(Eigen::MatrixXd::Identity(3, 3)),
                   Eigen::Vector3d(3, -1, 2), {}};
  CHECK(solve(eye) == Eigen::Vector3d(3, -1, 2));

  Eigen::MatrixXd d(2, 2);
  d << 4, 1, 1, 3;
  LinearSystem sys{from_dense(d), Eigen::Vector2d(1, 2), {}};
  const Eigen::VectorXd x = solve(sys);
  CHECK(x[0] == doctest::Approx(1.0 / 11).epsilon(1e-13));
  CHECK(x[1] == doctest::Approx(7.0 / 11).epsilon(1e-13));
}

TEST_CASE("zero matrix raises a singularity error") {
  SparseMatrix z(4, 4);
  z.makeCompressed();
  LinearSystem sys{z, Eigen::VectorXd::Ones(4), {}};
  CHECK_THROWS_AS(solve(sys), SingularityError);
}

TEST_CASE("residual contract on random SPD and saddle systems") {
  std::mt19937 rng(99);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double tol = 1e-10;

  for (int trial = 0; trial < 5; ++trial) {
    const int n = 40;
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
    }
    const Eigen::MatrixXd spd =
        B.transpose() * B + Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b[i] = gauss(rng);
    LinearSystem sys{from_dense(spd), b, {}};
    const Eigen::VectorXd x = solve(sys, tol);
    CHECK((b - Eigen::MatrixXd(spd) * x).norm() <= tol * b.norm());

    // indefinite saddle block [[A, C],[C^T, 0]]
    const int m = 12;
    Eigen::MatrixXd C(n, m);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < m; ++j) C(i, j) = gauss(rng);
    }
    Eigen::MatrixXd S = Eigen::MatrixXd::Zero(n + m, n + m);
    S.topLeftCorner(n, n) = spd;
    S.topRightCorner(n, m) = C;
    S.bottomLeftCorner(m, n) = C.transpose();
    Eigen::VectorXd bs(n + m);
    for (int i = 0; i < n + m; ++i) bs[i] = gauss(rng);
    LinearSystem saddle{from_dense(S), bs, {}};
    const Eigen::VectorXd xs = solve(saddle, tol);
    CHECK((bs - S * xs).norm() <= tol * bs.norm());
  }
}

TEST_CASE("solves are bitwise deterministic") {
  std::mt19937 rng(5);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 30;
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
  }
  const Eigen::MatrixXd spd = B.transpose() * B + Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = gauss(rng);
  LinearSystem sys{from_dense(spd), b, {{3, 0.25}}};
  const Eigen::VectorXd x1 = solve(sys);
  const Eigen::VectorXd x2 = solve(sys);
  for (int i = 0; i < n; ++i) CHECK(x1[i] == x2[i]);
}

TEST_CASE("krylov path with a nearby factorization meets the same contract") {
  std::mt19937 rng(17);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int n = 60;
  Eigen::MatrixXd B(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) B(i, j) = gauss(rng);
  }
  const Eigen::MatrixXd base = B.transpose() * B + 10.0 * Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd pert = base;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) pert(i, j) += 0.01 * gauss(rng);
  }

  SparseLuSolver lu;
  lu.factorize(from_dense(base));
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) b[i] = gauss(rng);

  const SparseMatrix A = from_dense(pert);
  const double tol = 1e-11;
  const auto x = krylov_solve(A, lu, b, tol, 50);
  REQUIRE(x.has_value());
  CHECK((b - A * *x).norm() <= tol * b.norm());

  // zero iterations cannot converge for a genuinely perturbed system
  const auto none = krylov_solve(A, lu, b, 1e-14, 0);
  CHECK(!none.has_value());
}
