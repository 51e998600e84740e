#include "sparsedyn/regression.hpp"

#include <cmath>
#include <string>

#include "parallel.hpp"
#include "sparsedyn/error.hpp"

namespace sparsedyn {

double soft_threshold(double z, double t) {
  if (z > t) return z - t;
  if (z < -t) return z + t;
  return 0.0;
}

LassoDesign::LassoDesign(const Eigen::MatrixXd& theta, bool standardize)
    : rows_(theta.rows()), theta_(theta), scales_(Eigen::VectorXd::Ones(theta.cols())) {
  if (rows_ < 1) fail(ErrorKind::kInsufficientData, "LASSO design has no rows");
  if (!theta.allFinite()) fail(ErrorKind::kData, "LASSO design contains non-finite values");
  const auto m = static_cast<double>(rows_);
  for (Eigen::Index j = 0; j < theta.cols(); ++j) {
    const double rms = std::sqrt(theta.col(j).squaredNorm() / m);
    if (rms == 0.0) {
      scales_[j] = 0.0;
      theta_.col(j).setZero();
    } else if (standardize) {
      scales_[j] = rms;
      theta_.col(j) /= rms;
    }
  }
  gram_ = (theta_.transpose() * theta_) / m;
}

Eigen::VectorXd LassoDesign::correlations(const Eigen::VectorXd& y) const {
  if (y.size() != rows_) fail(ErrorKind::kSchema, "LASSO target length does not match design rows");
  return (theta_.transpose() * y) / static_cast<double>(rows_);
}

double LassoDesign::lambda_max(const Eigen::VectorXd& y) const {
  const Eigen::VectorXd c = correlations(y);
  return c.size() == 0 ? 0.0 : c.cwiseAbs().maxCoeff();
}

LassoResult LassoDesign::solve_scaled(const Eigen::VectorXd& c, double yy, double lambda, const Eigen::VectorXd& start,
                                      const LassoOptions& options) const {
  if (!(lambda > 0.0)) fail(ErrorKind::kParameter, "LASSO lambda must be positive");
  if (options.max_iters < 1) fail(ErrorKind::kParameter, "LASSO max_iters must be at least 1");
  const Eigen::Index k = gram_.cols();
  LassoResult result;
  Eigen::VectorXd b = start;
  for (Eigen::Index j = 0; j < k; ++j) {
    if (gram_(j, j) == 0.0) b[j] = 0.0;
  }
  // q = c - G b, the negative gradient of the smooth part.
  Eigen::VectorXd q = c - gram_ * b;
  auto objective = [&] { return -0.5 * b.dot(c + q) + 0.5 * yy + lambda * b.lpNorm<1>(); };
  double previous = options.check_descent ? objective() : 0.0;

  for (int sweep = 1; sweep <= options.max_iters; ++sweep) {
    double max_change = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) {
      const double gjj = gram_(j, j);
      if (gjj == 0.0) continue;
      const double updated = soft_threshold(q[j] + gjj * b[j], lambda) / gjj;
      const double delta = updated - b[j];
      if (delta == 0.0) continue;
      q -= delta * gram_.col(j);
      b[j] = updated;
      max_change = std::max(max_change, std::abs(delta));
    }
    result.sweeps = sweep;
    if (options.check_descent) {
      const double current = objective();
      if (current > previous + 1e-12 * std::max(1.0, std::abs(previous))) {
        fail(ErrorKind::kEvaluation, "coordinate descent objective increased at sweep " + std::to_string(sweep));
      }
      previous = current;
    }
    if (max_change < options.tol) {
      result.converged = true;
      break;
    }
  }
  result.coef = std::move(b);
  return result;
}

Eigen::VectorXd LassoDesign::to_original(const Eigen::VectorXd& b) const {
  Eigen::VectorXd xi(b.size());
  for (Eigen::Index j = 0; j < b.size(); ++j) xi[j] = scales_[j] == 0.0 ? 0.0 : b[j] / scales_[j];
  return xi;
}

LassoResult lasso_cd(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double lambda,
                     const LassoOptions& options) {
  if (!(lambda > 0.0)) fail(ErrorKind::kParameter, "LASSO lambda must be positive");
  const LassoDesign design(theta, options.standardize);
  LassoResult r = design.solve_scaled(design.correlations(y), y.squaredNorm() / static_cast<double>(y.size()),
                                      lambda, Eigen::VectorXd::Zero(theta.cols()), options);
  r.coef = design.to_original(r.coef);
  return r;
}

double r2_score(const Eigen::VectorXd& truth, const Eigen::VectorXd& prediction) {
  if (truth.size() != prediction.size()) fail(ErrorKind::kSchema, "R^2 inputs differ in length");
  if (truth.size() == 0) fail(ErrorKind::kUndefinedR2, "R^2 of an empty sample");
  const double mean = truth.mean();
  const double ss_tot = (truth.array() - mean).square().sum();
  if (ss_tot == 0.0) fail(ErrorKind::kUndefinedR2, "R^2 undefined: target has zero variance");
  const double ss_res = (truth - prediction).squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

int count_nonzero(const Eigen::VectorXd& coef) {
  int n = 0;
  for (Eigen::Index j = 0; j < coef.size(); ++j) n += coef[j] != 0.0;
  return n;
}

namespace {

double safe_r2(const Eigen::VectorXd& truth, const Eigen::VectorXd& prediction) {
  try {
    return r2_score(truth, prediction);
  } catch (const Error&) {
    return std::numeric_limits<double>::quiet_NaN();
  }
}

}  // namespace

RegularizationPath fit_path(const LassoDesign& design, const Eigen::VectorXd& y, const PathOptions& options,
                            int state_index) {
  if (options.n_lambdas < 2) fail(ErrorKind::kParameter, "regularization path needs at least 2 lambdas");
  if (!(options.lambda_min_ratio > 0.0 && options.lambda_min_ratio < 1.0)) {
    fail(ErrorKind::kParameter, "lambda_min_ratio must lie in (0, 1)");
  }
  if (!y.allFinite()) fail(ErrorKind::kData, "LASSO target contains non-finite values");
  const Eigen::VectorXd c = design.correlations(y);
  const double lmax = c.size() == 0 ? 0.0 : c.cwiseAbs().maxCoeff();
  if (!(lmax > 0.0)) fail(ErrorKind::kDegenerateColumn, "LASSO target is orthogonal to every candidate term");
  const double yy = y.squaredNorm() / static_cast<double>(y.size());

  RegularizationPath path;
  path.state_index = state_index;
  Eigen::VectorXd b = Eigen::VectorXd::Zero(design.cols());
  const double log_ratio = std::log(options.lambda_min_ratio);
  for (int i = 0; i < options.n_lambdas; ++i) {
    PathEntry e;
    e.lambda = i == 0 ? lmax : lmax * std::exp(log_ratio * i / (options.n_lambdas - 1));
    if (i > 0 && !(e.lambda < path.entries.back().lambda)) {
      fail(ErrorKind::kParameter, "regularization grid is not strictly decreasing");
    }
    LassoResult r = design.solve_scaled(c, yy, e.lambda, b, options.lasso);
    b = r.coef;
    e.converged = r.converged;
    e.coef = design.to_original(b);
    e.term_count = count_nonzero(e.coef);
    e.train_r2 = safe_r2(y, design.predict_scaled(b));
    path.entries.push_back(std::move(e));
  }
  return path;
}

RegularizationPath fit_path(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, const PathOptions& options) {
  return fit_path(LassoDesign(theta, options.lasso.standardize), y, options, 0);
}

std::vector<RegularizationPath> fit_all_states(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& ydots,
                                               const PathOptions& options) {
  if (ydots.rows() != theta.rows()) fail(ErrorKind::kSchema, "derivative rows do not match library rows");
  const LassoDesign design(theta, options.lasso.standardize);
  const auto n = static_cast<std::size_t>(ydots.cols());
  std::vector<RegularizationPath> paths(n);
  std::vector<std::string> errors(n);
  std::vector<ErrorKind> kinds(n, ErrorKind::kEvaluation);
  detail::parallel_for(n, [&](std::size_t i) {
    try {
      paths[i] = fit_path(design, ydots.col(static_cast<Eigen::Index>(i)), options, static_cast<int>(i));
    } catch (const Error& e) {
      errors[i] = e.what();
      kinds[i] = e.kind();
    }
  });
  std::string combined;
  ErrorKind first = ErrorKind::kEvaluation;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i].empty()) continue;
    if (combined.empty()) first = kinds[i];
    combined += (combined.empty() ? "" : "; ") + std::string("state ") + std::to_string(i) + ": " + errors[i];
  }
  if (!combined.empty()) fail(first, combined);
  return paths;
}

Eigen::MatrixXd fit_all_states(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& ydots, double lambda,
                               const LassoOptions& options) {
  if (ydots.rows() != theta.rows()) fail(ErrorKind::kSchema, "derivative rows do not match library rows");
  if (!(lambda > 0.0)) fail(ErrorKind::kParameter, "LASSO lambda must be positive");
  const LassoDesign design(theta, options.standardize);
  Eigen::MatrixXd xi(theta.cols(), ydots.cols());
  detail::parallel_for(static_cast<std::size_t>(ydots.cols()), [&](std::size_t i) {
    const auto col = static_cast<Eigen::Index>(i);
    const Eigen::VectorXd y = ydots.col(col);
    const auto r = design.solve_scaled(design.correlations(y), y.squaredNorm() / static_cast<double>(y.size()),
                                       lambda, Eigen::VectorXd::Zero(theta.cols()), options);
    xi.col(col) = design.to_original(r.coef);
  });
  return xi;
}

}  // namespace sparsedyn
