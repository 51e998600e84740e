#include "sparsedyn/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <sstream>

#include "sparsedyn/error.hpp"
#include "sparsedyn/random.hpp"

namespace sparsedyn {
namespace {

std::string_view trim(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '\t')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '\t' || text.back() == '\r')) {
    text.remove_suffix(1);
  }
  return text;
}

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      cells.push_back(trim(line.substr(start)));
      return cells;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
}

std::uint64_t hash_doubles(const double* data, Eigen::Index count, std::uint64_t state) {
  return fnv1a64(std::string_view(reinterpret_cast<const char*>(data),
                                  static_cast<std::size_t>(count) * sizeof(double)),
                 state);
}

struct ColumnMoments {
  double mean;
  double scale;
};

ColumnMoments moments(const Eigen::Ref<const Eigen::VectorXd>& column) {
  const double m = static_cast<double>(column.size());
  const double mean = column.sum() / m;
  const double variance = (column.array() - mean).square().sum() / m;
  return {mean, std::sqrt(variance)};
}

}  // namespace

TimeSeriesDataset::TimeSeriesDataset(std::vector<std::string> state_names, std::string input_name,
                                     Eigen::VectorXd times, Eigen::MatrixXd states,
                                     Eigen::VectorXd input)
    : state_names_(std::move(state_names)),
      input_name_(std::move(input_name)),
      times_(std::move(times)),
      states_(std::move(states)),
      input_(std::move(input)) {
  const Eigen::Index m = times_.size();
  if (m < 2) fail(ErrorKind::kInsufficientData, "dataset needs at least 2 rows, got " + std::to_string(m));
  if (states_.rows() != m || input_.size() != m) {
    fail(ErrorKind::kSchema, "states/input row count does not match the time column");
  }
  if (static_cast<Eigen::Index>(state_names_.size()) != states_.cols()) {
    fail(ErrorKind::kSchema, "state name count does not match state column count");
  }
  if (states_.cols() < 1) fail(ErrorKind::kSchema, "dataset has no state columns");

  for (Eigen::Index i = 0; i < m; ++i) {
    if (!std::isfinite(times_[i])) fail(ErrorKind::kData, "non-finite time at row " + std::to_string(i));
    if (!std::isfinite(input_[i])) {
      fail(ErrorKind::kData, "non-finite value at row " + std::to_string(i) + ", column '" + input_name_ + "'");
    }
    for (Eigen::Index j = 0; j < states_.cols(); ++j) {
      if (!std::isfinite(states_(i, j))) {
        fail(ErrorKind::kData, "non-finite value at row " + std::to_string(i) + ", column '" +
                                   state_names_[static_cast<std::size_t>(j)] + "'");
      }
    }
  }

  dt_ = (times_[m - 1] - times_[0]) / static_cast<double>(m - 1);
  if (!(dt_ > 0.0)) fail(ErrorKind::kGrid, "time column is not strictly increasing");
  for (Eigen::Index i = 1; i < m; ++i) {
    const double step = times_[i] - times_[i - 1];
    if (!(step > 0.0) || std::abs(step - dt_) > kGridTolerance * dt_) {
      std::ostringstream msg;
      msg << "non-uniform time grid between rows " << i - 1 << " and " << i << ": step "
          << format_double(step) << " vs expected " << format_double(dt_);
      fail(ErrorKind::kGrid, msg.str());
    }
  }
}

std::vector<std::string> TimeSeriesDataset::variable_names() const {
  std::vector<std::string> names = state_names_;
  names.push_back(input_name_);
  return names;
}

Eigen::MatrixXd TimeSeriesDataset::variables() const {
  Eigen::MatrixXd all(rows(), state_count() + 1);
  all.leftCols(state_count()) = states_;
  all.col(state_count()) = input_;
  return all;
}

std::string TimeSeriesDataset::fingerprint() const {
  std::uint64_t h = fnv1a64("sparsedyn-dataset");
  for (const auto& name : variable_names()) {
    h = fnv1a64(name, h);
    h = fnv1a64(std::string_view("\0", 1), h);
  }
  h = hash_doubles(times_.data(), times_.size(), h);
  h = hash_doubles(states_.data(), states_.size(), h);
  h = hash_doubles(input_.data(), input_.size(), h);
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

const char* to_string(DiffMethod method) {
  return method == DiffMethod::kTvRegularized ? "tv" : "central";
}

DiffMethod parse_diff_method(const std::string& text) {
  if (text == "tv" || text == "tv-regularized") return DiffMethod::kTvRegularized;
  if (text == "central" || text == "central-difference") return DiffMethod::kCentralDifference;
  fail(ErrorKind::kParameter, "unknown differentiation method '" + text + "' (expected tv or central)");
}

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  return std::string(buf, result.ptr);
}

std::optional<double> parse_double(std::string_view text) {
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const auto result = std::from_chars(text.data(), text.data() + text.size(), value);
  if (result.ec != std::errc() || result.ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

TimeSeriesDataset ingest_csv(const std::filesystem::path& path, const std::string& input_column) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");

  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::kSchema, "'" + path.string() + "' is empty");
  std::vector<std::string> header;
  for (auto cell : split_commas(line)) header.emplace_back(cell);

  auto find_column = [&](const std::string& name) -> std::size_t {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) fail(ErrorKind::kSchema, "missing column '" + name + "' in " + path.string());
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t time_col = find_column("time");
  const std::size_t input_col = find_column(input_column);
  if (time_col == input_col) fail(ErrorKind::kSchema, "input column cannot be the time column");

  std::vector<std::size_t> state_cols;
  std::vector<std::string> state_names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == time_col || c == input_col) continue;
    if (header[c].empty()) fail(ErrorKind::kSchema, "empty column name at position " + std::to_string(c + 1));
    state_cols.push_back(c);
    state_names.push_back(header[c]);
  }
  if (state_cols.empty()) fail(ErrorKind::kSchema, "no state columns in " + path.string());

  std::vector<std::vector<double>> rows;
  std::size_t line_number = 1;
  while (std::getline(in, line)) {
    ++line_number;
    if (trim(line).empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != header.size()) {
      fail(ErrorKind::kSchema, "line " + std::to_string(line_number) + " has " + std::to_string(cells.size()) +
                                   " cells, header has " + std::to_string(header.size()));
    }
    std::vector<double> values(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto parsed = parse_double(cells[c]);
      if (!parsed || !std::isfinite(*parsed)) {
        fail(ErrorKind::kData, "line " + std::to_string(line_number) + ", column '" + header[c] + "': " +
                                   (cells[c].empty() ? std::string("empty cell")
                                                     : "invalid value '" + std::string(cells[c]) + "'"));
      }
      values[c] = *parsed;
    }
    rows.push_back(std::move(values));
  }

  const auto m = static_cast<Eigen::Index>(rows.size());
  Eigen::VectorXd times(m), input(m);
  Eigen::MatrixXd states(m, static_cast<Eigen::Index>(state_cols.size()));
  for (Eigen::Index i = 0; i < m; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    times[i] = row[time_col];
    input[i] = row[input_col];
    for (std::size_t j = 0; j < state_cols.size(); ++j) {
      states(i, static_cast<Eigen::Index>(j)) = row[state_cols[j]];
    }
  }
  return TimeSeriesDataset(std::move(state_names), input_column, std::move(times), std::move(states),
                           std::move(input));
}

std::string to_csv(const TimeSeriesDataset& ds) {
  std::string out = "time";
  for (const auto& name : ds.state_names()) out += "," + name;
  out += "," + ds.input_name() + "\n";
  for (Eigen::Index i = 0; i < ds.rows(); ++i) {
    out += format_double(ds.times()[i]);
    for (Eigen::Index j = 0; j < ds.state_count(); ++j) {
      out += ',';
      out += format_double(ds.states()(i, j));
    }
    out += ',';
    out += format_double(ds.input()[i]);
    out += '\n';
  }
  return out;
}

void write_csv(const TimeSeriesDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << to_csv(ds);
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

std::pair<TimeSeriesDataset, NormalizationStats> normalize(const TimeSeriesDataset& ds) {
  const auto names = ds.variable_names();
  const Eigen::MatrixXd vars = ds.variables();
  NormalizationStats stats;
  stats.means.resize(vars.cols());
  stats.scales.resize(vars.cols());
  for (Eigen::Index j = 0; j < vars.cols(); ++j) {
    const auto [mean, scale] = moments(vars.col(j));
    if (!(scale > 0.0) || scale <= 1e-300) {
      fail(ErrorKind::kDegenerateColumn,
           "column '" + names[static_cast<std::size_t>(j)] + "' has zero variance");
    }
    stats.means[j] = mean;
    stats.scales[j] = scale;
  }
  return {apply_normalization(ds, stats), stats};
}

TimeSeriesDataset apply_normalization(const TimeSeriesDataset& ds, const NormalizationStats& stats) {
  const Eigen::Index n = ds.state_count();
  if (stats.means.size() != n + 1 || stats.scales.size() != n + 1) {
    fail(ErrorKind::kSchema, "normalization stats do not match the dataset's variable count");
  }
  Eigen::MatrixXd states(ds.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    states.col(j) = (ds.states().col(j).array() - stats.means[j]) / stats.scales[j];
  }
  Eigen::VectorXd input = (ds.input().array() - stats.means[n]) / stats.scales[n];
  return TimeSeriesDataset(ds.state_names(), ds.input_name(), ds.times(), std::move(states), std::move(input));
}

TimeSeriesDataset denormalize(const TimeSeriesDataset& ds, const NormalizationStats& stats) {
  const Eigen::Index n = ds.state_count();
  if (stats.means.size() != n + 1 || stats.scales.size() != n + 1) {
    fail(ErrorKind::kSchema, "normalization stats do not match the dataset's variable count");
  }
  Eigen::MatrixXd states(ds.rows(), n);
  for (Eigen::Index j = 0; j < n; ++j) {
    states.col(j) = ds.states().col(j).array() * stats.scales[j] + stats.means[j];
  }
  Eigen::VectorXd input = ds.input().array() * stats.scales[n] + stats.means[n];
  return TimeSeriesDataset(ds.state_names(), ds.input_name(), ds.times(), std::move(states), std::move(input));
}

NormalizationStats identity_stats(Eigen::Index variable_count) {
  return {Eigen::VectorXd::Zero(variable_count), Eigen::VectorXd::Ones(variable_count)};
}

SplitIndices split_311(Eigen::Index m, std::uint64_t seed) {
  if (m < 5) fail(ErrorKind::kInsufficientData, "3:1:1 split needs at least 5 rows, got " + std::to_string(m));
  // round(3m/5); 3m/5 never has a fractional part of exactly one half.
  const Eigen::Index n_train = (6 * m + 5) / 10;
  const Eigen::Index remainder = m - n_train;
  const Eigen::Index n_cv = (remainder + 1) / 2;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(derive_seed(seed, "split-311"));
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.uniform_index(i + 1));
    std::swap(order[i], order[j]);
  }

  SplitIndices split;
  split.seed = seed;
  const auto begin = order.begin();
  split.train.assign(begin, begin + n_train);
  split.cv.assign(begin + n_train, begin + n_train + n_cv);
  split.test.assign(begin + n_train + n_cv, order.end());
  std::sort(split.train.begin(), split.train.end());
  std::sort(split.cv.begin(), split.cv.end());
  std::sort(split.test.begin(), split.test.end());
  return split;
}

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& matrix, const std::vector<Eigen::Index>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), matrix.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = matrix.row(rows[i]);
  return out;
}

Eigen::VectorXd take_rows(const Eigen::VectorXd& vector, const std::vector<Eigen::Index>& rows) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) out[static_cast<Eigen::Index>(i)] = vector[rows[i]];
  return out;
}

}  // namespace sparsedyn
