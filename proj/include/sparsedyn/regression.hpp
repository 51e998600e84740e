#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

namespace sparsedyn {

double soft_threshold(double z, double t);

struct LassoOptions {
  double tol = 1e-6;       // max coefficient change per sweep, in solver coordinates
  int max_iters = 10000;   // coordinate-descent sweeps
  bool standardize = true; // rescale columns to unit RMS for the solve
  bool check_descent = false;  // verify the objective never rises between sweeps
};

struct LassoResult {
  Eigen::VectorXd coef;
  bool converged = false;
  int sweeps = 0;
};

/// A design matrix prepared for repeated LASSO solves: column scales and the
/// scaled Gram matrix are computed once and shared across targets.
class LassoDesign {
 public:
  LassoDesign(const Eigen::MatrixXd& theta, bool standardize);

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return gram_.cols(); }
  // Column scale s_j; solver coordinates are b_j = s_j * xi_j. Zero for
  // all-zero columns, which are pinned at zero.
  const Eigen::VectorXd& scales() const { return scales_; }
  const Eigen::MatrixXd& gram() const { return gram_; }  // A'A / m
  Eigen::VectorXd correlations(const Eigen::VectorXd& y) const;  // A'y / m
  double lambda_max(const Eigen::VectorXd& y) const;

  // Minimizes (1/2m)|y - A b|^2 + lambda |b|_1 by cyclic coordinate descent
  // from `start` (solver coordinates); returns b.
  LassoResult solve_scaled(const Eigen::VectorXd& correlations, double yy, double lambda,
                           const Eigen::VectorXd& start, const LassoOptions& options) const;
  Eigen::VectorXd to_original(const Eigen::VectorXd& b) const;
  Eigen::VectorXd predict_scaled(const Eigen::VectorXd& b) const { return theta_ * b; }

 private:
  Eigen::Index rows_;
  Eigen::MatrixXd theta_;
  Eigen::VectorXd scales_;
  Eigen::MatrixXd gram_;
};

// (1/2m)|y - theta xi|^2 + lambda |xi|_1 in the coordinates the solver used;
// with standardize=false this is the objective on theta itself.
LassoResult lasso_cd(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, double lambda,
                     const LassoOptions& options = {});

double r2_score(const Eigen::VectorXd& truth, const Eigen::VectorXd& prediction);

struct PathEntry {
  double lambda = 0.0;
  Eigen::VectorXd coef;  // original (unscaled) coordinates
  double train_r2 = std::numeric_limits<double>::quiet_NaN();
  double cv_r2 = std::numeric_limits<double>::quiet_NaN();
  int term_count = 0;
  bool converged = true;
};

struct RegularizationPath {
  int state_index = 0;
  std::vector<PathEntry> entries;  // lambda strictly decreasing
};

struct PathOptions {
  int n_lambdas = 50;
  double lambda_min_ratio = 1e-3;
  LassoOptions lasso;
};

// Log-spaced lambdas from lambda_max down to lambda_max * ratio, warm
// started; train R^2 recorded per entry.
RegularizationPath fit_path(const LassoDesign& design, const Eigen::VectorXd& y, const PathOptions& options,
                            int state_index = 0);
RegularizationPath fit_path(const Eigen::MatrixXd& theta, const Eigen::VectorXd& y, const PathOptions& options);

// One path per derivative column, solved concurrently. Failures are gathered
// for all states and reported together.
std::vector<RegularizationPath> fit_all_states(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& ydots,
                                               const PathOptions& options);

// Single-lambda variant: column i of the result solves state i.
Eigen::MatrixXd fit_all_states(const Eigen::MatrixXd& theta, const Eigen::MatrixXd& ydots, double lambda,
                               const LassoOptions& options = {});

int count_nonzero(const Eigen::VectorXd& coef);

}  // namespace sparsedyn
