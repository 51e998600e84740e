#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "sparsedyn/data.hpp"

namespace sparsedyn {

enum class UnaryFn { kSin, kCos, kLogAbs, kExp, kSqrtAbs };

const char* to_string(UnaryFn fn);
UnaryFn parse_unary_fn(const std::string& text);
const std::vector<UnaryFn>& all_unary_fns();

enum class TermKind { kConstant, kPowerProduct, kUnary };

struct TermDescriptor {
  TermKind kind = TermKind::kConstant;
  std::vector<int> exponents;  // power products: one per variable
  UnaryFn unary_fn = UnaryFn::kSin;
  int variable = 0;  // unary terms
  std::string display;

  bool operator==(const TermDescriptor&) const = default;
};

struct LibraryOptions {
  int max_total_degree = 2;
  int min_exponent = -2;
  int max_exponent = 2;
  bool include_constant = true;
  std::vector<UnaryFn> unary = all_unary_fns();
};

/// Ordered list of candidate functions over named variables (states then
/// input). Order: constant, power products by total absolute degree then
/// descending lexicographic exponent vector, unary terms by function then
/// variable.
class CandidateLibrary {
 public:
  CandidateLibrary(std::vector<std::string> variable_names, std::vector<TermDescriptor> terms);

  const std::vector<std::string>& variable_names() const { return variable_names_; }
  const std::vector<TermDescriptor>& terms() const { return terms_; }
  const TermDescriptor& term(Eigen::Index j) const { return terms_[static_cast<std::size_t>(j)]; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(terms_.size()); }
  std::vector<std::string> display_names() const;
  // Index of the term with this display name, or -1.
  Eigen::Index find(const std::string& display) const;

 private:
  std::vector<std::string> variable_names_;
  std::vector<TermDescriptor> terms_;
};

CandidateLibrary build_library(const std::vector<std::string>& variable_names, const LibraryOptions& options);
// Placeholder names x1..xn.
CandidateLibrary build_library(int n_vars, const LibraryOptions& options);

// Inputs with |x| below this are clamped to sign(x) * kClamp (zero to +kClamp)
// before negative powers and log.
inline constexpr double kClamp = 1e-8;

// m x k matrix of term values over the given variable columns.
Eigen::MatrixXd evaluate_library(const CandidateLibrary& lib, const Eigen::MatrixXd& variables);
Eigen::MatrixXd evaluate_library(const CandidateLibrary& lib, const TimeSeriesDataset& ds);
double evaluate_term(const TermDescriptor& term, const double* row);

// Display name from exponents, e.g. "x1 x2^-1", "x1^2", "1".
std::string power_display(const std::vector<std::string>& names, const std::vector<int>& exponents);
std::string unary_display(UnaryFn fn, const std::string& name);

nlohmann::json to_json(const CandidateLibrary& lib);
CandidateLibrary library_from_json(const nlohmann::json& j);

}  // namespace sparsedyn
