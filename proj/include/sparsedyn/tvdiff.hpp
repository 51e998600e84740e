#pragma once

#include <functional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "sparsedyn/data.hpp"

namespace sparsedyn {

struct TvOptions {
  double reg = 1e-2;       // weight on total variation of the derivative
  int iterations = 100;    // fixed-point iteration cap
  double epsilon = 1e-8;   // smoothing inside sqrt(dg^2 + epsilon)
  double tolerance = 1e-6; // relative iterate change that counts as converged
};

struct TvColumnResult {
  Eigen::VectorXd derivative;
  bool converged = false;
  int iterations = 0;
  double objective = 0.0;
};

// Interior rows use (x[i+1] - x[i-1]) / 2dt, endpoints one-sided differences.
Eigen::VectorXd central_difference(const Eigen::Ref<const Eigen::VectorXd>& x, double dt);
DerivativeSet central_difference(const TimeSeriesDataset& ds);

/// Total-variation regularized derivative of one sampled column.
///
/// Minimizes reg * sum_i sqrt((g[i+1]-g[i])^2 + epsilon) + 1/2 |A g - (x - x[0])|^2
/// where A is trapezoidal cumulative integration on the sample grid, so g is
/// collocated with x. Each lagged-diffusivity step solves the quadratic model
/// exactly through a sparse saddle-point system; the iterate with the lowest
/// objective is returned, together with a convergence flag.
///
/// Scaling: differentiating a*x with reg' = |a|*reg and epsilon' = a^2*epsilon
/// gives exactly a times the result for x (up to solver round-off).
TvColumnResult tv_differentiate(const Eigen::Ref<const Eigen::VectorXd>& x, double dt, const TvOptions& options);

// Column-wise over a dataset's states; columns run concurrently.
DerivativeSet tv_differentiate(const TimeSeriesDataset& ds, const TvOptions& options);

struct DiffSettings {
  DiffMethod method = DiffMethod::kTvRegularized;
  TvOptions tv;
};

// Dispatches on settings.method.
DerivativeSet differentiate(const TimeSeriesDataset& ds, const DiffSettings& settings);

// The objective above, for diagnostics and tests.
double tv_objective(const Eigen::Ref<const Eigen::VectorXd>& g, const Eigen::Ref<const Eigen::VectorXd>& x,
                    double dt, double reg, double epsilon);

// Trapezoidal cumulative integral of each derivative column, starting at x0.
Eigen::MatrixXd integrate_back(const Eigen::MatrixXd& derivs, const Eigen::Ref<const Eigen::VectorXd>& x0,
                               double dt);

// Logarithmically spaced values from lo to hi inclusive.
std::vector<double> log_grid(double lo, double hi, int count);

struct TvSweepResult {
  std::vector<double> regs;
  std::vector<double> losses;
  double best_reg = 0.0;
  double best_loss = 0.0;
  Eigen::VectorXd best_derivative;
};

// Runs tv_differentiate for each candidate reg and keeps the one with the
// smallest loss(derivative). Ties keep the earlier candidate.
TvSweepResult sweep_tv_reg(const Eigen::Ref<const Eigen::VectorXd>& x, double dt, std::span<const double> regs,
                           const TvOptions& base, const std::function<double(const Eigen::VectorXd&)>& loss);

}  // namespace sparsedyn
