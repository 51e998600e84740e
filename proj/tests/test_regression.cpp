#include <cmath>
#include <set>

#include <Eigen/QR>

#include "doctest.h"
#include "sparsedyn/error.hpp"
#include "sparsedyn/random.hpp"
#include "sparsedyn/regression.hpp"

using namespace sparsedyn;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index m, Eigen::Index k) {
  Eigen::MatrixXd a(m, k);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return a;
}

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index m) {
  Eigen::VectorXd v(m);
  for (Eigen::Index i = 0; i < m; ++i) v[i] = rng.normal();
  return v;
}

// Columns orthogonal with squared norm m.
Eigen::MatrixXd orthonormal_design(Rng& rng, Eigen::Index m, Eigen::Index k) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(random_matrix(rng, m, k));
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(m, k);
  return std::sqrt(static_cast<double>(m)) * q;
}

LassoOptions raw() {
  LassoOptions o;
  o.standardize = false;
  return o;
}

}  // namespace

TEST_CASE("soft_threshold") {
  CHECK(soft_threshold(3, 1) == 2);
  CHECK(soft_threshold(0.5, 1) == 0);
  CHECK(soft_threshold(-3, 1) == -2);
  CHECK(soft_threshold(-1, 1) == 0);
  CHECK(soft_threshold(2, 0) == 2);
}

TEST_CASE("lasso_cd: closed form on the two-sample orthonormal example") {
  Eigen::MatrixXd theta = std::sqrt(2.0) * Eigen::MatrixXd::Identity(2, 2);
  Eigen::VectorXd y(2);
  y << 6.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  for (bool standardize : {false, true}) {
    LassoOptions o;
    o.standardize = standardize;
    const auto r = lasso_cd(theta, y, 0.5, o);
    CHECK(r.converged);
    CHECK(r.coef[0] == doctest::Approx(2.5).epsilon(1e-12));
    CHECK(r.coef[1] == 0.0);
  }
}

TEST_CASE("lasso_cd: property - matches soft-threshold oracle on random orthonormal designs") {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = static_cast<Eigen::Index>(1 + rng.uniform_index(10));
    const auto m = static_cast<Eigen::Index>(k + rng.uniform_index(static_cast<std::uint64_t>(51 - k)));
    const Eigen::MatrixXd theta = orthonormal_design(rng, m, k);
    const Eigen::VectorXd y = random_vector(rng, m);
    const Eigen::VectorXd z = theta.transpose() * y / static_cast<double>(m);
    const double lambda = rng.uniform(0.01, 1.0) * z.cwiseAbs().maxCoeff();
    Eigen::VectorXd oracle(k);
    for (Eigen::Index j = 0; j < k; ++j) oracle[j] = soft_threshold(z[j], lambda);
    const auto r = lasso_cd(theta, y, lambda, raw());
    CHECK((r.coef - oracle).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("lasso_cd: lambda above lambda_max gives zero; parameter errors") {
  Rng rng(2);
  const Eigen::MatrixXd theta = random_matrix(rng, 30, 5);
  const Eigen::VectorXd y = random_vector(rng, 30);
  const double lmax = (theta.transpose() * y).cwiseAbs().maxCoeff() / 30.0;
  CHECK(lasso_cd(theta, y, lmax, raw()).coef.cwiseAbs().maxCoeff() == 0.0);
  CHECK(lasso_cd(theta, y, 2 * lmax, raw()).coef.cwiseAbs().maxCoeff() == 0.0);
  CHECK(lasso_cd(theta, y, 0.999 * lmax, raw()).coef.cwiseAbs().maxCoeff() > 0.0);
  CHECK_THROWS_AS(lasso_cd(theta, y, 0.0), Error);
  CHECK_THROWS_AS(lasso_cd(theta, y, -1.0), Error);
}

TEST_CASE("lasso_cd: tiny lambda reproduces least squares") {
  Rng rng(3);
  for (bool standardize : {false, true}) {
    const Eigen::MatrixXd theta = random_matrix(rng, 80, 6);
    const Eigen::VectorXd y = random_vector(rng, 80);
    const Eigen::VectorXd ols = theta.colPivHouseholderQr().solve(y);
    LassoOptions o;
    o.standardize = standardize;
    o.tol = 1e-12;
    const auto r = lasso_cd(theta, y, 1e-10, o);
    CHECK(r.converged);
    CHECK((r.coef - ols).cwiseAbs().maxCoeff() < 1e-6);
  }
}

TEST_CASE("lasso_cd: non-convergence is flagged, not thrown") {
  Rng rng(4);
  Eigen::MatrixXd theta = random_matrix(rng, 40, 6);
  theta.col(1) = theta.col(0) + 1e-3 * theta.col(1);
  const Eigen::VectorXd y = random_vector(rng, 40);
  LassoOptions o;
  o.max_iters = 1;
  o.tol = 1e-14;
  const auto r = lasso_cd(theta, y, 1e-4, o);
  CHECK_FALSE(r.converged);
  CHECK(r.sweeps == 1);
}

TEST_CASE("lasso_cd: property - KKT conditions and monotone objective on random designs") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = static_cast<Eigen::Index>(2 + rng.uniform_index(15));
    const auto m = static_cast<Eigen::Index>(5 + rng.uniform_index(100));
    Eigen::MatrixXd theta = random_matrix(rng, m, k);
    // Correlated columns make the problem less trivial.
    theta.col(k - 1) = 0.8 * theta.col(0) + 0.2 * theta.col(k - 1);
    const Eigen::VectorXd y = random_vector(rng, m);
    const double lmax = (theta.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(m);
    const double lambda = lmax * std::pow(10.0, rng.uniform(-3.0, 0.0));
    LassoOptions o = raw();
    o.check_descent = true;
    const auto r = lasso_cd(theta, y, lambda, o);
    REQUIRE(r.converged);
    const Eigen::VectorXd grad = theta.transpose() * (y - theta * r.coef) / static_cast<double>(m);
    for (Eigen::Index j = 0; j < k; ++j) {
      if (r.coef[j] != 0.0) {
        CHECK(std::abs(grad[j] - lambda * (r.coef[j] > 0 ? 1.0 : -1.0)) < 10 * o.tol);
      } else {
        CHECK(std::abs(grad[j]) <= lambda + 10 * o.tol);
      }
    }
  }
}

TEST_CASE("fit_path: grid, first entry and warm-started solutions") {
  Rng rng(6);
  const Eigen::MatrixXd theta = random_matrix(rng, 60, 8);
  const Eigen::VectorXd y = random_vector(rng, 60);
  PathOptions po;
  po.n_lambdas = 25;
  po.lambda_min_ratio = 1e-2;
  const auto path = fit_path(theta, y, po);
  REQUIRE(path.entries.size() == 25);
  CHECK(path.entries[0].term_count == 0);
  CHECK(path.entries[0].coef.cwiseAbs().maxCoeff() == 0.0);
  for (std::size_t i = 1; i < path.entries.size(); ++i) CHECK(path.entries[i].lambda < path.entries[i - 1].lambda);
  CHECK(path.entries.back().lambda == doctest::Approx(path.entries[0].lambda * 1e-2).epsilon(1e-12));
  for (const auto& e : path.entries) {
    CHECK(e.term_count == count_nonzero(e.coef));
    CHECK(std::isnan(e.cv_r2));
    // Each warm-started entry matches a cold solve at the same lambda.
    const auto cold = lasso_cd(theta, y, e.lambda);
    CHECK((cold.coef - e.coef).cwiseAbs().maxCoeff() < 1e-4);
  }
  CHECK(path.entries.back().train_r2 > path.entries[1].train_r2);

  po.n_lambdas = 1;
  CHECK_THROWS_AS(fit_path(theta, y, po), Error);
}

TEST_CASE("fit_path: some entry recovers a constructed two-term support") {
  Rng rng(7);
  const Eigen::Index m = 200;
  const Eigen::MatrixXd theta = random_matrix(rng, m, 10);
  Eigen::VectorXd y = 2.0 * theta.col(3) - theta.col(7);
  for (Eigen::Index i = 0; i < m; ++i) y[i] += 0.01 * rng.normal();
  PathOptions po;
  const auto path = fit_path(theta, y, po);
  bool found = false;
  for (const auto& e : path.entries) {
    std::set<Eigen::Index> support;
    for (Eigen::Index j = 0; j < e.coef.size(); ++j) {
      if (e.coef[j] != 0.0) support.insert(j);
    }
    found |= support == std::set<Eigen::Index>{3, 7};
  }
  CHECK(found);
}

TEST_CASE("fit_all_states: reduction, permutation and determinism") {
  Rng rng(8);
  const Eigen::MatrixXd theta = random_matrix(rng, 50, 6);
  Eigen::MatrixXd ydots(50, 3);
  ydots.col(0) = random_vector(rng, 50);
  ydots.col(1) = random_vector(rng, 50);
  ydots.col(2) = ydots.col(0);

  const double lambda = 0.05;
  const Eigen::MatrixXd xi = fit_all_states(theta, ydots, lambda);
  CHECK(xi.col(0) == lasso_cd(theta, ydots.col(0), lambda).coef);
  CHECK(xi.col(2) == xi.col(0));

  Eigen::MatrixXd swapped(50, 3);
  swapped << ydots.col(1), ydots.col(2), ydots.col(0);
  const Eigen::MatrixXd xs = fit_all_states(theta, swapped, lambda);
  CHECK(xs.col(0) == xi.col(1));
  CHECK(xs.col(2) == xi.col(0));

  PathOptions po;
  po.n_lambdas = 10;
  const auto paths = fit_all_states(theta, ydots, po);
  REQUIRE(paths.size() == 3);
  for (std::size_t e = 0; e < 10; ++e) CHECK(paths[2].entries[e].coef == paths[0].entries[e].coef);
  CHECK(paths[1].state_index == 1);
}

TEST_CASE("fit_all_states: per-state failures are all reported") {
  Rng rng(9);
  const Eigen::MatrixXd theta = random_matrix(rng, 20, 4);
  Eigen::MatrixXd ydots = Eigen::MatrixXd::Zero(20, 3);
  ydots.col(1) = random_vector(rng, 20);
  try {
    fit_all_states(theta, ydots, PathOptions{});
    FAIL("zero targets accepted");
  } catch (const Error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("state 0") != std::string::npos);
    CHECK(msg.find("state 2") != std::string::npos);
    CHECK(msg.find("state 1") == std::string::npos);
  }
}

TEST_CASE("r2_score") {
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  CHECK(r2_score(y, y) == 1.0);
  CHECK(r2_score(y, Eigen::VectorXd::Constant(4, 2.5)) == 0.0);
  CHECK(r2_score(y, -y) < 0.0);
  CHECK_THROWS_AS(r2_score(Eigen::VectorXd::Ones(3), Eigen::VectorXd::Ones(3)), Error);
}
