#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "sparsedyn/regression.hpp"

namespace sparsedyn {

enum class SelectionMethod { kCvPeak, kComplexityScore };

const char* to_string(SelectionMethod method);
SelectionMethod parse_selection_method(const std::string& text);

struct ExcludedEntry {
  std::size_t index = 0;
  std::string reason;

  bool operator==(const ExcludedEntry&) const = default;
};

struct SelectionReport {
  int state_index = 0;
  SelectionMethod method = SelectionMethod::kCvPeak;
  std::size_t chosen_index = 0;  // position in the source path
  double chosen_lambda = 0.0;
  int chosen_term_count = 0;
  double cv_r2 = 0.0;
  std::optional<double> score;
  // Whether the path's cv_r2 curve peaks in its interior, for either method.
  bool peak_found = false;
  std::vector<ExcludedEntry> excluded;  // complexity score only

  bool operator==(const SelectionReport&) const = default;
};

double cv_r2(const PathEntry& entry, const Eigen::MatrixXd& theta_cv, const Eigen::VectorXd& ydot_cv);
// Fills cv_r2 on every entry of the path.
void fill_cv_r2(RegularizationPath& path, const Eigen::MatrixXd& theta_cv, const Eigen::VectorXd& ydot_cv);

// Argmax of cv_r2, ties toward the larger lambda. peak_found is true when the
// maximum is interior and the curve falls after it.
SelectionReport select_cv_peak(const RegularizationPath& path);

double complexity_score(int k, double cv_r2, double score_alpha, double score_beta);
// Maximizes score_alpha * k - score_beta * ln(cv_r2) over entries with
// cv_r2 > 0; the rest are listed in `excluded`.
SelectionReport select_by_score(const RegularizationPath& path, double score_alpha, double score_beta);

nlohmann::json to_json(const SelectionReport& report);
SelectionReport selection_from_json(const nlohmann::json& j);

}  // namespace sparsedyn
