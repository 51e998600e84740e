#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "sparsedyn/data.hpp"
#include "sparsedyn/model.hpp"
#include "sparsedyn/plant.hpp"
#include "sparsedyn/tvdiff.hpp"

namespace sparsedyn {

enum class Protocol { kHeldOut, kLongTime, kOutsidePerturbation };

const char* to_string(Protocol protocol);
Protocol parse_protocol(const std::string& text);

struct StateScore {
  std::string name;
  std::optional<double> train_r2;  // absent for protocols without training rows
  double test_r2 = 0.0;
  int term_count = 0;

  bool operator==(const StateScore&) const = default;
};

struct EvaluationReport {
  Protocol protocol = Protocol::kHeldOut;
  std::string fingerprint;
  Eigen::Index train_rows = 0;
  Eigen::Index test_rows = 0;
  std::vector<StateScore> per_state;

  bool operator==(const EvaluationReport&) const = default;
};

// Theta(z) * xi with z the dataset normalized by the model's stats; rows
// match ds, values are normalized derivatives.
Eigen::MatrixXd predict_derivatives(const SparseModel& model, const TimeSeriesDataset& ds);

// Normalizes ds with the model's stats and differentiates the result, so the
// targets live in the same coordinates as the fit.
DerivativeSet model_targets(const SparseModel& model, const TimeSeriesDataset& ds, const DiffSettings& diff);

// R^2 on a row subset; undefined R^2 (constant target) propagates as an error.
std::vector<double> derivative_r2(const SparseModel& model, const Eigen::MatrixXd& predictions,
                                  const Eigen::MatrixXd& targets, const std::vector<Eigen::Index>& rows);

// `targets` are normalized derivatives from model_targets. Empty train_rows
// leaves train_r2 unset; empty test_rows means every row.
EvaluationReport evaluate(const SparseModel& model, const TimeSeriesDataset& ds, const Eigen::MatrixXd& targets,
                          const std::vector<Eigen::Index>& train_rows, const std::vector<Eigen::Index>& test_rows,
                          Protocol protocol);

struct SampledInput {
  Eigen::VectorXd times;
  Eigen::VectorXd values;
};

using InputSource = std::variant<PerturbationSignal, SampledInput>;

// Value of the input at t; sampled inputs interpolate linearly and raise a
// range error outside their time span.
double input_at(const InputSource& input, double t);

/// Fixed-step RK4 of the learned equations in normalized coordinates.
/// Returns rows at t0, t0 + dt, ..., t1 (round((t1 - t0) / dt) + 1 rows)
/// in raw coordinates, with the input column filled from `input`.
/// Any |z| above kModelDivergenceBound, or a non-finite value, throws
/// DivergenceError carrying the step time.
TimeSeriesDataset integrate_model(const SparseModel& model, const Eigen::VectorXd& x0, const InputSource& input,
                                  double t0, double t1, double dt);

inline constexpr double kModelDivergenceBound = 1e6;

struct ProtocolConfig {
  PlantSpec plant;
  double dt = 0.01;
  double duration = 100.0;  // training duration
  double segment_duration = 1.0;
  std::vector<SegmentKind> kinds{SegmentKind::kStep, SegmentKind::kLinear, SegmentKind::kSigmoid};
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  DiffSettings diff;
  double long_time_multiplier = 2.5;
};

// Datasets for the two simulated protocols. Long-time keeps the training
// band with multiplier x duration; outside-perturbation uses the plant's
// outside band. Each draws a fresh signal from a labelled child seed.
struct ProtocolDatasets {
  PerturbationSignal long_signal;
  TimeSeriesDataset long_time;
  PerturbationSignal outside_signal;
  TimeSeriesDataset outside;
};

ProtocolDatasets simulate_protocol_datasets(const ProtocolConfig& config);

// Held-out (train/test rows of the fit dataset), long-time and outside
// perturbation, in that order.
std::vector<EvaluationReport> run_protocol_suite(const SparseModel& model, const TimeSeriesDataset& train_ds,
                                                 const Eigen::MatrixXd& train_targets, const SplitIndices& split,
                                                 const ProtocolConfig& config);

// Variable | Train | Test | N
std::string render_heldout_table(const EvaluationReport& report);
// Variable | one R^2 column per report (e.g. Long Time, Outside Training).
std::string render_protocol_table(const std::vector<EvaluationReport>& reports);

nlohmann::json to_json(const EvaluationReport& report);
EvaluationReport report_from_json(const nlohmann::json& j);

}  // namespace sparsedyn
