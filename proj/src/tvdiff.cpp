#include "sparsedyn/tvdiff.hpp"

#include <cmath>
#include <limits>

#include <Eigen/SparseCore>
#include <Eigen/SparseLU>

#include "parallel.hpp"
#include "sparsedyn/error.hpp"

namespace sparsedyn {
namespace {

// Saddle-point form of min_g reg/2 g'Lg + 1/2 |Ag - f|^2.
//
// With w = A g (w_0 = 0) written as the bidiagonal constraint
// B w = C g, where (B w)_r = w_r - w_{r-1} and (C g)_r = dt/2 (g_{r-1} + g_r),
// eliminating w leaves the sparse system
//   [ reg L   -C' ] [g ]   [ 0  ]
//   [  C      BB' ] [mu] = [ Bf ]
// with unknowns ordered g_0..g_{m-1}, mu_1..mu_{m-1}.
class LaggedSystem {
 public:
  LaggedSystem(Eigen::Index m, double dt) : m_(m), half_dt_(0.5 * dt) {}

  Eigen::VectorXd solve(const Eigen::VectorXd& weights, double reg, const Eigen::VectorXd& rhs) {
    const Eigen::SparseMatrix<double> system = assemble(weights, reg);
    if (!analyzed_) {
      solver_.analyzePattern(system);
      analyzed_ = true;
    }
    solver_.factorize(system);
    if (solver_.info() != Eigen::Success) {
      fail(ErrorKind::kEvaluation, "TV differentiation: sparse factorization failed");
    }
    Eigen::VectorXd solution = solver_.solve(rhs);
    return solution.head(m_);
  }

 private:
  Eigen::SparseMatrix<double> assemble(const Eigen::VectorXd& weights, double reg) const {
    const Eigen::Index n = 2 * m_ - 1;
    std::vector<Eigen::Triplet<double>> entries;
    entries.reserve(static_cast<std::size_t>(9 * m_));
    // reg * L, L = D' W D.
    for (Eigen::Index k = 0; k + 1 < m_; ++k) {
      const double w = reg * weights[k];
      entries.emplace_back(k, k, w);
      entries.emplace_back(k + 1, k + 1, w);
      entries.emplace_back(k, k + 1, -w);
      entries.emplace_back(k + 1, k, -w);
    }
    for (Eigen::Index r = 1; r < m_; ++r) {
      const Eigen::Index mu = m_ + r - 1;
      // C and -C'.
      entries.emplace_back(mu, r - 1, half_dt_);
      entries.emplace_back(mu, r, half_dt_);
      entries.emplace_back(r - 1, mu, -half_dt_);
      entries.emplace_back(r, mu, -half_dt_);
      // BB': diag (1, 2, 2, ...), off-diagonal -1.
      entries.emplace_back(mu, mu, r == 1 ? 1.0 : 2.0);
      if (r > 1) {
        entries.emplace_back(mu, mu - 1, -1.0);
        entries.emplace_back(mu - 1, mu, -1.0);
      }
    }
    Eigen::SparseMatrix<double> system(n, n);
    system.setFromTriplets(entries.begin(), entries.end());
    return system;
  }

  Eigen::Index m_;
  double half_dt_;
  bool analyzed_ = false;
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> solver_;
};

Eigen::VectorXd lagged_weights(const Eigen::VectorXd& g, double epsilon) {
  const Eigen::Index m = g.size();
  Eigen::VectorXd w(m - 1);
  for (Eigen::Index k = 0; k + 1 < m; ++k) {
    const double d = g[k + 1] - g[k];
    w[k] = 1.0 / std::sqrt(d * d + epsilon);
  }
  return w;
}

}  // namespace

Eigen::VectorXd central_difference(const Eigen::Ref<const Eigen::VectorXd>& x, double dt) {
  const Eigen::Index m = x.size();
  if (m < 3) fail(ErrorKind::kInsufficientData, "central difference needs at least 3 samples");
  Eigen::VectorXd d(m);
  d[0] = (x[1] - x[0]) / dt;
  d[m - 1] = (x[m - 1] - x[m - 2]) / dt;
  for (Eigen::Index i = 1; i + 1 < m; ++i) d[i] = (x[i + 1] - x[i - 1]) / (2.0 * dt);
  return d;
}

DerivativeSet central_difference(const TimeSeriesDataset& ds) {
  DerivativeSet out;
  out.method = DiffMethod::kCentralDifference;
  out.derivs.resize(ds.rows(), ds.state_count());
  for (Eigen::Index j = 0; j < ds.state_count(); ++j) {
    out.derivs.col(j) = central_difference(ds.states().col(j), ds.dt());
  }
  out.converged.assign(static_cast<std::size_t>(ds.state_count()), true);
  return out;
}

double tv_objective(const Eigen::Ref<const Eigen::VectorXd>& g, const Eigen::Ref<const Eigen::VectorXd>& x,
                    double dt, double reg, double epsilon) {
  const Eigen::Index m = x.size();
  double tv = 0.0;
  for (Eigen::Index k = 0; k + 1 < m; ++k) {
    const double d = g[k + 1] - g[k];
    tv += std::sqrt(d * d + epsilon);
  }
  double misfit = 0.0;
  double w = 0.0;
  for (Eigen::Index i = 1; i < m; ++i) {
    w += 0.5 * dt * (g[i - 1] + g[i]);
    const double r = w - (x[i] - x[0]);
    misfit += r * r;
  }
  return reg * tv + 0.5 * misfit;
}

TvColumnResult tv_differentiate(const Eigen::Ref<const Eigen::VectorXd>& x, double dt, const TvOptions& options) {
  const Eigen::Index m = x.size();
  if (m < 5) fail(ErrorKind::kInsufficientData, "TV differentiation needs at least 5 samples");
  if (!(options.reg > 0.0)) fail(ErrorKind::kParameter, "TV regularization weight must be positive");
  if (options.iterations < 1) fail(ErrorKind::kParameter, "TV iteration count must be at least 1");
  if (!(options.epsilon > 0.0)) fail(ErrorKind::kParameter, "TV smoothing epsilon must be positive");
  if (!(dt > 0.0)) fail(ErrorKind::kParameter, "sampling interval must be positive");

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(2 * m - 1);
  for (Eigen::Index r = 1; r < m; ++r) rhs[m + r - 1] = x[r] - x[r - 1];

  TvColumnResult result;
  Eigen::VectorXd g = central_difference(x, dt);
  result.derivative = g;
  result.objective = tv_objective(g, x, dt, options.reg, options.epsilon);

  LaggedSystem system(m, dt);
  for (int it = 1; it <= options.iterations; ++it) {
    Eigen::VectorXd next = system.solve(lagged_weights(g, options.epsilon), options.reg, rhs);
    if (!next.allFinite()) fail(ErrorKind::kEvaluation, "TV differentiation produced non-finite values");
    const double change = (next - g).norm();
    const double size = std::max(next.norm(), std::numeric_limits<double>::min());
    g = std::move(next);
    result.iterations = it;

    const double objective = tv_objective(g, x, dt, options.reg, options.epsilon);
    if (objective <= result.objective) {
      result.objective = objective;
      result.derivative = g;
    }
    if (change <= options.tolerance * size) {
      result.converged = true;
      break;
    }
  }
  return result;
}

DerivativeSet tv_differentiate(const TimeSeriesDataset& ds, const TvOptions& options) {
  const auto n = static_cast<std::size_t>(ds.state_count());
  std::vector<TvColumnResult> columns(n);
  detail::parallel_for(n, [&](std::size_t j) {
    columns[j] = tv_differentiate(ds.states().col(static_cast<Eigen::Index>(j)), ds.dt(), options);
  });
  DerivativeSet out;
  out.method = DiffMethod::kTvRegularized;
  out.derivs.resize(ds.rows(), ds.state_count());
  for (std::size_t j = 0; j < n; ++j) {
    out.derivs.col(static_cast<Eigen::Index>(j)) = columns[j].derivative;
    out.converged.push_back(columns[j].converged);
  }
  return out;
}

Eigen::MatrixXd integrate_back(const Eigen::MatrixXd& derivs, const Eigen::Ref<const Eigen::VectorXd>& x0,
                               double dt) {
  if (x0.size() != derivs.cols()) fail(ErrorKind::kSchema, "initial row length does not match derivative columns");
  Eigen::MatrixXd x(derivs.rows(), derivs.cols());
  if (derivs.rows() == 0) return x;
  x.row(0) = x0.transpose();
  for (Eigen::Index i = 1; i < derivs.rows(); ++i) {
    x.row(i) = x.row(i - 1) + 0.5 * dt * (derivs.row(i - 1) + derivs.row(i));
  }
  return x;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (!(lo > 0.0) || !(hi > 0.0) || count < 1) fail(ErrorKind::kParameter, "log grid needs positive bounds");
  std::vector<double> grid(static_cast<std::size_t>(count));
  if (count == 1) {
    grid[0] = lo;
    return grid;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (count - 1));
  return grid;
}

TvSweepResult sweep_tv_reg(const Eigen::Ref<const Eigen::VectorXd>& x, double dt, std::span<const double> regs,
                           const TvOptions& base, const std::function<double(const Eigen::VectorXd&)>& loss) {
  if (regs.empty()) fail(ErrorKind::kParameter, "TV sweep needs at least one candidate");
  TvSweepResult sweep;
  for (double reg : regs) {
    TvOptions options = base;
    options.reg = reg;
    TvColumnResult r = tv_differentiate(x, dt, options);
    const double value = loss(r.derivative);
    sweep.regs.push_back(reg);
    sweep.losses.push_back(value);
    if (sweep.losses.size() == 1 || value < sweep.best_loss) {
      sweep.best_loss = value;
      sweep.best_reg = reg;
      sweep.best_derivative = std::move(r.derivative);
    }
  }
  return sweep;
}

DerivativeSet differentiate(const TimeSeriesDataset& ds, const DiffSettings& settings) {
  return settings.method == DiffMethod::kTvRegularized ? tv_differentiate(ds, settings.tv) : central_difference(ds);
}

}  // namespace sparsedyn
