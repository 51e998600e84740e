#pragma once

#include <cstdint>
#include <vector>

#include "sparsedyn/data.hpp"
#include "sparsedyn/library.hpp"
#include "sparsedyn/model.hpp"
#include "sparsedyn/regression.hpp"
#include "sparsedyn/selection.hpp"
#include "sparsedyn/tvdiff.hpp"

namespace sparsedyn {

struct FitSettings {
  DiffSettings diff;
  LibraryOptions library;
  PathOptions path;
  SelectionMethod method = SelectionMethod::kCvPeak;
  double score_alpha = -0.05;
  double score_beta = -1.0;
  std::uint64_t seed = 0;
};

struct FitResult {
  SparseModel model;
  std::vector<RegularizationPath> paths;  // cv_r2 filled
  SplitIndices split;
  DerivativeSet targets;  // normalized derivatives of the fit dataset
};

// normalize -> differentiate -> library -> per-state path on the training
// rows -> cv_r2 on the cv rows -> selection. The split is drawn from
// derive_seed(seed, "split").
FitResult fit_model(const TimeSeriesDataset& ds, const FitSettings& settings);

// Reselects from already fitted paths (no refit); updates xi, lambdas,
// selections and train_r2.
void reselect(FitResult& fit, const TimeSeriesDataset& ds, SelectionMethod method, double score_alpha,
              double score_beta);

nlohmann::json fit_settings_json(const FitSettings& settings);

// Tab-separated lambda, term_count, train_r2, cv_r2 per path entry.
std::string render_path_table(const RegularizationPath& path);

}  // namespace sparsedyn
