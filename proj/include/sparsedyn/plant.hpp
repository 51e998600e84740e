#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <json.hpp>

#include "sparsedyn/data.hpp"
#include "sparsedyn/library.hpp"
#include "sparsedyn/polynomial.hpp"

namespace sparsedyn {

enum class SegmentKind { kStep, kLinear, kSigmoid };

const char* to_string(SegmentKind kind);
SegmentKind parse_segment_kind(const std::string& text);

struct Segment {
  SegmentKind kind = SegmentKind::kStep;
  double duration = 1.0;
  double start_level = 0.0;
  double end_level = 0.0;

  bool operator==(const Segment&) const = default;
};

/// Piecewise forcing starting at t = 0. Steps hold end_level over their whole
/// segment; linear ramps interpolate; sigmoid ramps follow
/// start + (end - start) * logistic(12 (tau - 1/2)) with tau in [0, 1],
/// affinely rescaled so the ramp meets both levels exactly.
/// A boundary instant belongs to the segment that starts there.
class PerturbationSignal {
 public:
  PerturbationSignal(std::vector<Segment> segments, std::uint64_t seed);

  const std::vector<Segment>& segments() const { return segments_; }
  std::uint64_t seed() const { return seed_; }
  double span() const { return boundaries_.back(); }
  double operator()(double t) const;
  // Smallest and largest level across all segments.
  std::pair<double, double> level_range() const;

 private:
  std::vector<Segment> segments_;
  std::vector<double> boundaries_;  // cumulative segment ends, starting with 0
  std::uint64_t seed_;
};

double sample_signal(const PerturbationSignal& signal, double t);

// Segment count = span / segment_duration; each segment draws its kind
// uniformly from `kinds` and its target level uniformly from [lo, hi]. The
// first segment starts from an extra uniform draw.
PerturbationSignal generate_signal(double span, double segment_duration, double lo, double hi,
                                   const std::vector<SegmentKind>& kinds, std::uint64_t seed);

nlohmann::json to_json(const PerturbationSignal& signal);
PerturbationSignal signal_from_json(const nlohmann::json& j);

struct TrueTerm {
  std::vector<int> exponents;  // over states then input
  double coef = 0.0;
};

struct PlantSpec {
  std::string name;
  std::vector<std::string> state_names;
  std::string input_name = "u";
  std::vector<std::vector<TrueTerm>> rhs;  // one term list per state
  Eigen::VectorXd x0;
  double train_lo = 0.0, train_hi = 1.0;
  double outside_lo = 1.0, outside_hi = 2.0;
  std::string description;

  std::vector<std::string> variable_names() const;
  Eigen::Index state_count() const { return static_cast<Eigen::Index>(state_names.size()); }
  Eigen::VectorXd rhs_value(const Eigen::VectorXd& x, double u) const;
  Polynomial polynomial(std::size_t state) const;
  // Whether every true term is a member of the library built with `options`.
  bool representable(const LibraryOptions& options) const;
};

const std::vector<PlantSpec>& builtin_plants();
const PlantSpec& find_plant(const std::string& name);

// Fixed-step RK4 with exact signal evaluation at the substeps. Rows are
// round(span / dt) + 1. Optional noise N(0, noise_sigma * column std) is
// added to the states afterwards.
TimeSeriesDataset simulate(const PlantSpec& spec, const PerturbationSignal& signal, double dt, double noise_sigma,
                           std::uint64_t seed);

// States whose magnitude exceeds this during simulation raise DivergenceError.
inline constexpr double kPlantDivergenceBound = 1e6;

/// Ground-truth description of a plant, plus its support expressed in the
/// normalized coordinates of a given dataset (so it can be compared with a
/// model fit on that dataset).
nlohmann::json truth_manifest(const PlantSpec& spec, const LibraryOptions& library, const NormalizationStats* stats);

// Display names of the monomials in state i's equation after substituting
// x = s z + m and dividing by s_i; the constant "1" is included if present.
std::vector<std::string> normalized_truth_support(const PlantSpec& spec, std::size_t state,
                                                  const NormalizationStats& stats);

}  // namespace sparsedyn
