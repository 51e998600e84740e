#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace sparsedyn {

/// Uniformly sampled trajectory of n states driven by one scalar input.
///
/// Rows are samples. The constructor validates shape, grid uniformity
/// (relative tolerance 1e-9 of dt) and finiteness, so every live instance
/// satisfies those invariants.
class TimeSeriesDataset {
 public:
  static constexpr double kGridTolerance = 1e-9;

  TimeSeriesDataset(std::vector<std::string> state_names, std::string input_name,
                    Eigen::VectorXd times, Eigen::MatrixXd states, Eigen::VectorXd input);

  const std::vector<std::string>& state_names() const { return state_names_; }
  const std::string& input_name() const { return input_name_; }
  const Eigen::VectorXd& times() const { return times_; }
  const Eigen::MatrixXd& states() const { return states_; }
  const Eigen::VectorXd& input() const { return input_; }
  double dt() const { return dt_; }

  Eigen::Index rows() const { return states_.rows(); }
  Eigen::Index state_count() const { return states_.cols(); }
  double duration() const { return times_[times_.size() - 1] - times_[0]; }

  // State names followed by the input name.
  std::vector<std::string> variable_names() const;
  // m x (n+1) matrix: states then the input column.
  Eigen::MatrixXd variables() const;

  // Hex digest over names and the exact bit patterns of all values.
  std::string fingerprint() const;

 private:
  std::vector<std::string> state_names_;
  std::string input_name_;
  Eigen::VectorXd times_;
  Eigen::MatrixXd states_;
  Eigen::VectorXd input_;
  double dt_ = 0.0;
};

enum class DiffMethod { kTvRegularized, kCentralDifference };

const char* to_string(DiffMethod method);
DiffMethod parse_diff_method(const std::string& text);

/// Time derivatives aligned row-for-row with a dataset's states.
struct DerivativeSet {
  Eigen::MatrixXd derivs;
  DiffMethod method = DiffMethod::kCentralDifference;
  // Per-column convergence of the differentiation solver; always true for
  // central differences.
  std::vector<bool> converged;
};

/// Column statistics over the n+1 variables (states then input).
struct NormalizationStats {
  Eigen::VectorXd means;
  Eigen::VectorXd scales;  // population standard deviation, divisor m

  bool operator==(const NormalizationStats&) const = default;
};

struct SplitIndices {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> cv;
  std::vector<Eigen::Index> test;
  std::uint64_t seed = 0;
};

// Reads a comma-separated file with a header row. The `time` column is
// required; `input_column` names the forcing; every other column is a state,
// in header order.
TimeSeriesDataset ingest_csv(const std::filesystem::path& path, const std::string& input_column);

// Writes time, states, input with 17 significant digits.
void write_csv(const TimeSeriesDataset& ds, const std::filesystem::path& path);
std::string to_csv(const TimeSeriesDataset& ds);

std::pair<TimeSeriesDataset, NormalizationStats> normalize(const TimeSeriesDataset& ds);
// Applies precomputed statistics (e.g. those stored in a fitted model).
TimeSeriesDataset apply_normalization(const TimeSeriesDataset& ds, const NormalizationStats& stats);
TimeSeriesDataset denormalize(const TimeSeriesDataset& ds, const NormalizationStats& stats);
NormalizationStats identity_stats(Eigen::Index variable_count);

// Random 3:1:1 row partition; |train| = round(0.6 m), the remainder is
// halved with any odd row going to cv. Index sets are sorted ascending.
SplitIndices split_311(Eigen::Index m, std::uint64_t seed);

// Row subsets.
Eigen::MatrixXd take_rows(const Eigen::MatrixXd& matrix, const std::vector<Eigen::Index>& rows);
Eigen::VectorXd take_rows(const Eigen::VectorXd& vector, const std::vector<Eigen::Index>& rows);

// Number formatting shared by all text outputs: 17 significant digits,
// exact round trip through parse_double.
std::string format_double(double value);
// Parses a complete decimal or scientific literal; nullopt otherwise.
std::optional<double> parse_double(std::string_view text);

}  // namespace sparsedyn
