#include "sparsedyn/pipeline.hpp"

#include <cmath>

#include "sparsedyn/dynamics.hpp"
#include "sparsedyn/error.hpp"
#include "sparsedyn/random.hpp"

namespace sparsedyn {
FitResult fit_model(const TimeSeriesDataset& ds, const FitSettings& settings) {
  auto [zds, stats] = normalize(ds);
  DerivativeSet targets = differentiate(zds, settings.diff);
  SplitIndices split = split_311(ds.rows(), derive_seed(settings.seed, "split"));

  CandidateLibrary lib = build_library(ds.variable_names(), settings.library);
  const Eigen::MatrixXd theta = evaluate_library(lib, zds);
  const Eigen::MatrixXd theta_train = take_rows(theta, split.train);
  const Eigen::MatrixXd theta_cv = take_rows(theta, split.cv);

  auto paths = fit_all_states(theta_train, take_rows(targets.derivs, split.train), settings.path);
  const Eigen::MatrixXd ydot_cv = take_rows(targets.derivs, split.cv);
  for (std::size_t i = 0; i < paths.size(); ++i) {
    fill_cv_r2(paths[i], theta_cv, ydot_cv.col(static_cast<Eigen::Index>(i)));
  }

  SparseModel model(std::move(lib));
  model.state_names = ds.state_names();
  model.input_name = ds.input_name();
  model.stats = stats;
  model.fitted_on = ds.fingerprint();
  model.fit_info = fit_settings_json(settings);
  model.fit_info["rows"] = {{"train", split.train.size()}, {"cv", split.cv.size()}, {"test", split.test.size()}};
  nlohmann::json converged = nlohmann::json::array();
  for (bool c : targets.converged) converged.push_back(c);
  model.fit_info["differentiation_converged"] = converged;

  FitResult fit{std::move(model), std::move(paths), std::move(split), std::move(targets)};
  reselect(fit, ds, settings.method, settings.score_alpha, settings.score_beta);
  return fit;
}

void reselect(FitResult& fit, const TimeSeriesDataset& ds, SelectionMethod method, double score_alpha,
              double score_beta) {
  auto& model = fit.model;
  const auto n = static_cast<Eigen::Index>(fit.paths.size());
  model.xi = Eigen::MatrixXd::Zero(model.library.size(), n);
  model.lambdas.assign(static_cast<std::size_t>(n), 0.0);
  model.selections.clear();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& path = fit.paths[static_cast<std::size_t>(i)];
    SelectionReport r =
        method == SelectionMethod::kCvPeak ? select_cv_peak(path) : select_by_score(path, score_alpha, score_beta);
    model.xi.col(i) = path.entries[r.chosen_index].coef;
    model.lambdas[static_cast<std::size_t>(i)] = r.chosen_lambda;
    model.selections.push_back(std::move(r));
  }
  model.fit_info["selection"] = {{"method", to_string(method)}, {"score_alpha", score_alpha}, {"score_beta", score_beta}};
  model.train_r2 = derivative_r2(model, predict_derivatives(model, ds), fit.targets.derivs, fit.split.train);
}

nlohmann::json fit_settings_json(const FitSettings& s) {
  std::vector<std::string> unary;
  for (auto f : s.library.unary) unary.emplace_back(to_string(f));
  return {{"seed", s.seed},
          {"differentiation",
           {{"method", to_string(s.diff.method)},
            {"reg", s.diff.tv.reg},
            {"iterations", s.diff.tv.iterations},
            {"epsilon", s.diff.tv.epsilon},
            {"tolerance", s.diff.tv.tolerance}}},
          {"library",
           {{"max_total_degree", s.library.max_total_degree},
            {"min_exponent", s.library.min_exponent},
            {"max_exponent", s.library.max_exponent},
            {"include_constant", s.library.include_constant},
            {"unary", unary}}},
          {"regression",
           {{"n_lambdas", s.path.n_lambdas},
            {"lambda_min_ratio", s.path.lambda_min_ratio},
            {"tol", s.path.lasso.tol},
            {"max_iters", s.path.lasso.max_iters}}}};
}

std::string render_path_table(const RegularizationPath& path) {
  std::string out = "lambda\tterm_count\ttrain_r2\tcv_r2\tconverged\n";
  for (const auto& e : path.entries) {
    out += format_double(e.lambda) + "\t" + std::to_string(e.term_count) + "\t" +
           (std::isfinite(e.train_r2) ? format_double(e.train_r2) : "nan") + "\t" +
           (std::isfinite(e.cv_r2) ? format_double(e.cv_r2) : "nan") + "\t" + (e.converged ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace sparsedyn
