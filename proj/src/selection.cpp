#include "sparsedyn/selection.hpp"

#include <cmath>

#include "sparsedyn/data.hpp"
#include "sparsedyn/error.hpp"

namespace sparsedyn {
namespace {

void require_cv(const RegularizationPath& path, std::size_t min_entries) {
  if (path.entries.size() < min_entries) {
    fail(ErrorKind::kSelection, "selection needs at least " + std::to_string(min_entries) + " path entries");
  }
  for (const auto& e : path.entries) {
    if (std::isnan(e.cv_r2)) fail(ErrorKind::kSelection, "path entry has no cross-validation R^2");
  }
}

SelectionReport report_for(const RegularizationPath& path, std::size_t index, SelectionMethod method) {
  SelectionReport r;
  r.state_index = path.state_index;
  r.method = method;
  r.chosen_index = index;
  r.chosen_lambda = path.entries[index].lambda;
  r.chosen_term_count = path.entries[index].term_count;
  r.cv_r2 = path.entries[index].cv_r2;
  return r;
}

std::size_t cv_argmax(const RegularizationPath& path) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < path.entries.size(); ++i) {
    if (path.entries[i].cv_r2 > path.entries[best].cv_r2) best = i;
  }
  return best;
}

// Interior maximum with a strictly lower value at the smallest lambda.
bool has_cv_peak(const RegularizationPath& path) {
  const std::size_t best = cv_argmax(path);
  const std::size_t last = path.entries.size() - 1;
  return best > 0 && best < last && path.entries[last].cv_r2 < path.entries[best].cv_r2;
}

}  // namespace

const char* to_string(SelectionMethod method) {
  return method == SelectionMethod::kCvPeak ? "cv-peak" : "score";
}

SelectionMethod parse_selection_method(const std::string& text) {
  if (text == "cv-peak") return SelectionMethod::kCvPeak;
  if (text == "score" || text == "complexity-score") return SelectionMethod::kComplexityScore;
  fail(ErrorKind::kConfig, "unknown selection method '" + text + "' (expected cv-peak or score)");
}

double cv_r2(const PathEntry& entry, const Eigen::MatrixXd& theta_cv, const Eigen::VectorXd& ydot_cv) {
  if (theta_cv.cols() != entry.coef.size()) fail(ErrorKind::kSchema, "CV library width does not match coefficients");
  return r2_score(ydot_cv, theta_cv * entry.coef);
}

void fill_cv_r2(RegularizationPath& path, const Eigen::MatrixXd& theta_cv, const Eigen::VectorXd& ydot_cv) {
  for (auto& e : path.entries) e.cv_r2 = cv_r2(e, theta_cv, ydot_cv);
}

SelectionReport select_cv_peak(const RegularizationPath& path) {
  require_cv(path, 3);
  SelectionReport r = report_for(path, cv_argmax(path), SelectionMethod::kCvPeak);
  r.peak_found = has_cv_peak(path);
  return r;
}

double complexity_score(int k, double cv_r2, double score_alpha, double score_beta) {
  if (!(cv_r2 > 0.0)) fail(ErrorKind::kSelection, "complexity score needs cv_r2 > 0");
  return score_alpha * k - score_beta * std::log(cv_r2);
}

SelectionReport select_by_score(const RegularizationPath& path, double score_alpha, double score_beta) {
  require_cv(path, 1);
  std::vector<ExcludedEntry> excluded;
  std::optional<std::size_t> best;
  double best_score = 0.0;
  for (std::size_t i = 0; i < path.entries.size(); ++i) {
    const auto& e = path.entries[i];
    if (!(e.cv_r2 > 0.0)) {
      excluded.push_back({i, "cv_r2 = " + format_double(e.cv_r2) + " is not positive; ln undefined"});
      continue;
    }
    const double s = complexity_score(e.term_count, e.cv_r2, score_alpha, score_beta);
    if (!best || s > best_score) {
      best = i;
      best_score = s;
    }
  }
  if (!best) fail(ErrorKind::kSelection, "no path entry has positive cv_r2; complexity score undefined");
  SelectionReport r = report_for(path, *best, SelectionMethod::kComplexityScore);
  r.score = best_score;
  r.excluded = std::move(excluded);
  r.peak_found = has_cv_peak(path);
  return r;
}

nlohmann::json to_json(const SelectionReport& report) {
  nlohmann::json excluded = nlohmann::json::array();
  for (const auto& e : report.excluded) excluded.push_back({{"index", e.index}, {"reason", e.reason}});
  nlohmann::json j{{"state_index", report.state_index},
                   {"method", to_string(report.method)},
                   {"chosen_index", report.chosen_index},
                   {"chosen_lambda", report.chosen_lambda},
                   {"chosen_term_count", report.chosen_term_count},
                   {"cv_r2", report.cv_r2},
                   {"peak_found", report.peak_found},
                   {"excluded", std::move(excluded)}};
  j["score"] = report.score ? nlohmann::json(*report.score) : nlohmann::json(nullptr);
  return j;
}

SelectionReport selection_from_json(const nlohmann::json& j) {
  try {
    SelectionReport r;
    r.state_index = j.at("state_index").get<int>();
    r.method = parse_selection_method(j.at("method").get<std::string>());
    r.chosen_index = j.at("chosen_index").get<std::size_t>();
    r.chosen_lambda = j.at("chosen_lambda").get<double>();
    r.chosen_term_count = j.at("chosen_term_count").get<int>();
    r.cv_r2 = j.at("cv_r2").get<double>();
    r.peak_found = j.at("peak_found").get<bool>();
    if (!j.at("score").is_null()) r.score = j.at("score").get<double>();
    for (const auto& e : j.at("excluded")) {
      r.excluded.push_back({e.at("index").get<std::size_t>(), e.at("reason").get<std::string>()});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, std::string("malformed selection report: ") + e.what());
  }
}

}  // namespace sparsedyn
