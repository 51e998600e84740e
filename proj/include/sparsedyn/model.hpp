#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "sparsedyn/data.hpp"
#include "sparsedyn/library.hpp"
#include "sparsedyn/polynomial.hpp"
#include "sparsedyn/selection.hpp"

namespace sparsedyn {

/// Fitted sparse dynamics: dz/dt = Theta(z) * xi in normalized coordinates
/// z = (v - means) / scales, over the library's variables (states then input).
struct SparseModel {
  explicit SparseModel(CandidateLibrary lib) : library(std::move(lib)) {}

  CandidateLibrary library;
  std::vector<std::string> state_names;
  std::string input_name;
  Eigen::MatrixXd xi;  // k x n
  NormalizationStats stats;
  std::vector<double> lambdas;    // chosen lambda per state
  std::vector<double> train_r2;   // per state, on the training rows
  std::vector<SelectionReport> selections;
  std::string fitted_on;          // dataset fingerprint
  nlohmann::json fit_info = nlohmann::json::object();

  Eigen::Index state_count() const { return static_cast<Eigen::Index>(state_names.size()); }
  int term_count(Eigen::Index state) const;
  // Throws a schema error if shapes or names are inconsistent.
  void validate() const;
};

nlohmann::json to_json(const SparseModel& model);
SparseModel model_from_json(const nlohmann::json& j);
void save_model(const SparseModel& model, const std::filesystem::path& path);
SparseModel load_model(const std::filesystem::path& path);

// State i's equation in raw coordinates, dx_i/dt as a polynomial in the
// unnormalized variables. Only power products with nonnegative exponents
// can be expanded; other active terms raise a parameter error.
Polynomial raw_polynomial(const SparseModel& model, Eigen::Index state);

// Copy of the model with one coefficient set to zero (ablation studies).
SparseModel drop_term(const SparseModel& model, Eigen::Index state, const std::string& display);

// One line per state, "d<name>/dt = c1 term1 + c2 term2 ...", coefficients
// to 4 significant digits, canonical term order, zero terms omitted. The
// equations are in the model's normalized coordinates.
std::string render_equations(const SparseModel& model);

// Model files share a manifest when libraries match term for term.
bool same_library(const CandidateLibrary& a, const CandidateLibrary& b);

// Reads a JSON document; errors cite the file and the parser's position.
nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace sparsedyn
