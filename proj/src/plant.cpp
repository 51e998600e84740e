#include "sparsedyn/plant.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sparsedyn/error.hpp"
#include "sparsedyn/random.hpp"

namespace sparsedyn {
namespace {

double logistic(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// logistic(12 (tau - 1/2)) stretched so that tau = 0 and tau = 1 land exactly
// on the segment's start and end levels.
double sigmoid_fraction(double tau) {
  const double lo = logistic(-6.0);
  return (logistic(12.0 * (tau - 0.5)) - lo) / (1.0 - 2.0 * lo);
}

TrueTerm term(std::initializer_list<int> exponents, double coef) { return {std::vector<int>(exponents), coef}; }

std::vector<PlantSpec> make_builtins() {
  std::vector<PlantSpec> plants;

  PlantSpec lin;
  lin.name = "forced-linear-2";
  lin.state_names = {"x1", "x2"};
  lin.rhs = {{term({0, 1, 0}, 1.0)}, {term({1, 0, 0}, -1.0), term({0, 1, 0}, -0.1), term({0, 0, 1}, 0.002)}};
  lin.x0 = Eigen::Vector2d(4.0, 0.0);
  lin.train_lo = 1000.0;
  lin.train_hi = 3000.0;
  lin.outside_lo = 3000.0;
  lin.outside_hi = 4000.0;
  lin.description = "damped oscillator driven through its velocity";
  plants.push_back(lin);

  PlantSpec vdp;
  vdp.name = "forced-vanderpol";
  vdp.state_names = {"x1", "x2"};
  vdp.rhs = {{term({0, 1, 0}, 1.0)},
             {term({0, 1, 0}, 1.0), term({2, 1, 0}, -1.0), term({1, 0, 0}, -1.0), term({0, 0, 1}, 0.002)}};
  vdp.x0 = Eigen::Vector2d(4.0, 0.0);
  vdp.train_lo = 1000.0;
  vdp.train_hi = 3000.0;
  vdp.outside_lo = 3000.0;
  vdp.outside_hi = 4000.0;
  vdp.description = "van der Pol oscillator (mu = 1); x1^2 x2 lies outside the degree-2 library";
  plants.push_back(vdp);

  PlantSpec mix;
  mix.name = "mix-cascade-4";
  mix.state_names = {"x1", "x2", "x3", "x4"};
  mix.rhs = {
      {term({0, 1, 0, 0, 0}, 1.0), term({1, 0, 1, 0, 0}, -0.28)},
      {term({1, 0, 0, 0, 0}, -0.88), term({0, 1, 0, 0, 0}, -0.32), term({0, 0, 0, 0, 1}, 0.21),
       term({1, 0, 1, 0, 0}, -0.09)},
      {term({0, 0, 0, 1, 0}, 1.0), term({0, 0, 1, 0, 1}, 0.1)},
      {term({0, 0, 1, 0, 0}, -4.97), term({0, 0, 0, 1, 0}, -0.29), term({0, 0, 0, 0, 1}, -0.61),
       term({1, 0, 1, 0, 0}, 0.29)},
  };
  mix.x0 = (Eigen::VectorXd(4) << 1.0, 0.0, 0.5, 0.0).finished();
  mix.train_lo = 1.0;
  mix.train_hi = 3.0;
  // The x3/x4 block loses damping once u exceeds about 2.9, so the
  // extrapolation band sits below the training band.
  mix.outside_lo = 0.0;
  mix.outside_hi = 1.0;
  mix.description = "two coupled oscillating stages with bilinear cross-coupling and input inflow";
  plants.push_back(mix);
  return plants;
}

}  // namespace

const char* to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kStep: return "step";
    case SegmentKind::kLinear: return "linear";
    case SegmentKind::kSigmoid: return "sigmoid";
  }
  return "?";
}

SegmentKind parse_segment_kind(const std::string& text) {
  if (text == "step") return SegmentKind::kStep;
  if (text == "linear") return SegmentKind::kLinear;
  if (text == "sigmoid") return SegmentKind::kSigmoid;
  fail(ErrorKind::kConfig, "unknown perturbation kind '" + text + "' (expected step, linear or sigmoid)");
}

PerturbationSignal::PerturbationSignal(std::vector<Segment> segments, std::uint64_t seed)
    : segments_(std::move(segments)), seed_(seed) {
  if (segments_.empty()) fail(ErrorKind::kParameter, "perturbation signal needs at least one segment");
  boundaries_.push_back(0.0);
  for (const auto& s : segments_) {
    if (!(s.duration > 0.0) || !std::isfinite(s.duration)) fail(ErrorKind::kParameter, "segment duration must be positive");
    if (!std::isfinite(s.start_level) || !std::isfinite(s.end_level)) {
      fail(ErrorKind::kParameter, "segment levels must be finite");
    }
    boundaries_.push_back(boundaries_.back() + s.duration);
  }
}

double PerturbationSignal::operator()(double t) const {
  const double end = boundaries_.back();
  const double slack = 1e-9 * std::max(1.0, end);
  if (!(t >= -slack && t <= end + slack)) {
    fail(ErrorKind::kRange, "signal evaluated at t = " + format_double(t) + " outside [0, " + format_double(end) + "]");
  }
  t = std::clamp(t, 0.0, end);
  auto it = std::upper_bound(boundaries_.begin(), boundaries_.end(), t);
  auto index = static_cast<std::size_t>(std::distance(boundaries_.begin(), it)) - 1;
  index = std::min(index, segments_.size() - 1);
  const Segment& s = segments_[index];
  const double tau = std::clamp((t - boundaries_[index]) / s.duration, 0.0, 1.0);
  switch (s.kind) {
    case SegmentKind::kStep: return s.end_level;
    case SegmentKind::kLinear: return s.start_level + (s.end_level - s.start_level) * tau;
    case SegmentKind::kSigmoid: return s.start_level + (s.end_level - s.start_level) * sigmoid_fraction(tau);
  }
  return s.end_level;
}

std::pair<double, double> PerturbationSignal::level_range() const {
  double lo = segments_.front().start_level, hi = lo;
  for (const auto& s : segments_) {
    lo = std::min({lo, s.start_level, s.end_level});
    hi = std::max({hi, s.start_level, s.end_level});
  }
  return {lo, hi};
}

double sample_signal(const PerturbationSignal& signal, double t) { return signal(t); }

PerturbationSignal generate_signal(double span, double segment_duration, double lo, double hi,
                                   const std::vector<SegmentKind>& kinds, std::uint64_t seed) {
  if (!(span > 0.0) || !(segment_duration > 0.0)) fail(ErrorKind::kParameter, "signal span and segment must be positive");
  if (!(lo < hi) || !std::isfinite(lo) || !std::isfinite(hi)) {
    fail(ErrorKind::kParameter, "signal bounds need lo < hi, got [" + format_double(lo) + ", " + format_double(hi) + "]");
  }
  if (kinds.empty()) fail(ErrorKind::kParameter, "signal needs at least one segment kind");
  const double ratio = span / segment_duration;
  const double count = std::round(ratio);
  if (count < 1.0 || std::abs(ratio - count) > 1e-9 * std::max(1.0, ratio)) {
    fail(ErrorKind::kParameter, "signal span must be a whole multiple of the segment duration");
  }
  Rng rng(seed);
  std::vector<Segment> segments;
  double level = rng.uniform(lo, hi);
  for (long i = 0; i < static_cast<long>(count); ++i) {
    Segment s;
    s.kind = kinds[rng.uniform_index(kinds.size())];
    s.duration = segment_duration;
    s.start_level = level;
    s.end_level = rng.uniform(lo, hi);
    level = s.end_level;
    segments.push_back(s);
  }
  return PerturbationSignal(std::move(segments), seed);
}

nlohmann::json to_json(const PerturbationSignal& signal) {
  nlohmann::json segs = nlohmann::json::array();
  for (const auto& s : signal.segments()) {
    segs.push_back({{"kind", to_string(s.kind)},
                    {"duration", s.duration},
                    {"start_level", s.start_level},
                    {"end_level", s.end_level}});
  }
  return {{"seed", signal.seed()}, {"segments", std::move(segs)}};
}

PerturbationSignal signal_from_json(const nlohmann::json& j) {
  try {
    std::vector<Segment> segments;
    for (const auto& js : j.at("segments")) {
      segments.push_back({parse_segment_kind(js.at("kind").get<std::string>()), js.at("duration").get<double>(),
                          js.at("start_level").get<double>(), js.at("end_level").get<double>()});
    }
    return PerturbationSignal(std::move(segments), j.at("seed").get<std::uint64_t>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, std::string("malformed signal record: ") + e.what());
  }
}

std::vector<std::string> PlantSpec::variable_names() const {
  auto names = state_names;
  names.push_back(input_name);
  return names;
}

Eigen::VectorXd PlantSpec::rhs_value(const Eigen::VectorXd& x, double u) const {
  const Eigen::Index n = state_count();
  Eigen::VectorXd dx = Eigen::VectorXd::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (const auto& t : rhs[static_cast<std::size_t>(i)]) {
      double v = t.coef;
      for (std::size_t j = 0; j < t.exponents.size(); ++j) {
        const double base = static_cast<Eigen::Index>(j) < n ? x[static_cast<Eigen::Index>(j)] : u;
        for (int p = 0; p < t.exponents[j]; ++p) v *= base;
        for (int p = 0; p < -t.exponents[j]; ++p) v /= base;
      }
      dx[i] += v;
    }
  }
  return dx;
}

Polynomial PlantSpec::polynomial(std::size_t state) const {
  Polynomial p;
  for (const auto& t : rhs.at(state)) p[t.exponents] += t.coef;
  return p;
}

bool PlantSpec::representable(const LibraryOptions& options) const {
  const auto lib = build_library(variable_names(), options);
  for (const auto& eq : rhs) {
    for (const auto& t : eq) {
      const bool constant = std::all_of(t.exponents.begin(), t.exponents.end(), [](int e) { return e == 0; });
      if (lib.find(constant ? "1" : power_display(variable_names(), t.exponents)) < 0) return false;
    }
  }
  return true;
}

const std::vector<PlantSpec>& builtin_plants() {
  static const std::vector<PlantSpec> plants = make_builtins();
  return plants;
}

const PlantSpec& find_plant(const std::string& name) {
  for (const auto& p : builtin_plants()) {
    if (p.name == name) return p;
  }
  std::string known;
  for (const auto& p : builtin_plants()) known += (known.empty() ? "" : ", ") + p.name;
  fail(ErrorKind::kConfig, "unknown plant '" + name + "' (builtin plants: " + known + ")");
}

TimeSeriesDataset simulate(const PlantSpec& spec, const PerturbationSignal& signal, double dt, double noise_sigma,
                           std::uint64_t seed) {
  if (!(dt > 0.0)) fail(ErrorKind::kParameter, "simulation dt must be positive");
  if (!(noise_sigma >= 0.0)) fail(ErrorKind::kParameter, "noise_sigma must be nonnegative");
  const double steps_real = signal.span() / dt;
  const auto steps = static_cast<Eigen::Index>(std::llround(steps_real));
  if (steps < 1 || std::abs(steps_real - static_cast<double>(steps)) > 1e-6 * std::max(1.0, steps_real)) {
    fail(ErrorKind::kParameter, "simulation span must be a whole number of dt steps");
  }
  const Eigen::Index n = spec.state_count();
  Eigen::VectorXd times(steps + 1), input(steps + 1);
  Eigen::MatrixXd states(steps + 1, n);
  Eigen::VectorXd x = spec.x0;
  for (Eigen::Index i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    times[i] = t;
    input[i] = signal(t);
    states.row(i) = x.transpose();
    if (i == steps) break;
    const double uh = signal(t + 0.5 * dt);
    const Eigen::VectorXd k1 = spec.rhs_value(x, input[i]);
    const Eigen::VectorXd k2 = spec.rhs_value(x + 0.5 * dt * k1, uh);
    const Eigen::VectorXd k3 = spec.rhs_value(x + 0.5 * dt * k2, uh);
    const Eigen::VectorXd k4 = spec.rhs_value(x + dt * k3, signal(static_cast<double>(i + 1) * dt));
    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!x.allFinite() || x.cwiseAbs().maxCoeff() > kPlantDivergenceBound) {
      const double at = static_cast<double>(i + 1) * dt;
      throw DivergenceError(at, "plant '" + spec.name + "' diverged at t = " + format_double(at));
    }
  }
  if (noise_sigma > 0.0) {
    Rng rng(derive_seed(seed, "measurement-noise"));
    for (Eigen::Index j = 0; j < n; ++j) {
      const double mean = states.col(j).mean();
      const double sd = std::sqrt((states.col(j).array() - mean).square().mean());
      for (Eigen::Index i = 0; i <= steps; ++i) states(i, j) += noise_sigma * sd * rng.normal();
    }
  }
  return TimeSeriesDataset(spec.state_names, spec.input_name, std::move(times), std::move(states), std::move(input));
}

std::vector<std::string> normalized_truth_support(const PlantSpec& spec, std::size_t state,
                                                  const NormalizationStats& stats) {
  const auto names = spec.variable_names();
  const Polynomial p = spec.polynomial(state);
  if (has_negative_exponent(p)) fail(ErrorKind::kParameter, "normalized support needs nonnegative exponents");
  Polynomial z = prune(affine_substitute(p, stats.scales, stats.means), 1e-12);
  std::vector<std::string> out;
  for (const auto& [a, c] : z) out.push_back(power_display(names, a));
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json truth_manifest(const PlantSpec& spec, const LibraryOptions& library, const NormalizationStats* stats) {
  const auto names = spec.variable_names();
  nlohmann::json states = nlohmann::json::array();
  for (std::size_t i = 0; i < spec.rhs.size(); ++i) {
    nlohmann::json terms = nlohmann::json::array();
    for (const auto& t : spec.rhs[i]) {
      terms.push_back({{"display", power_display(names, t.exponents)}, {"exponents", t.exponents}, {"coef", t.coef}});
    }
    nlohmann::json js{{"name", spec.state_names[i]}, {"terms", std::move(terms)}};
    if (stats != nullptr) {
      if (has_negative_exponent(spec.polynomial(i))) {
        js["normalized_support"] = nullptr;
      } else {
        js["normalized_support"] = normalized_truth_support(spec, i, *stats);
      }
    }
    states.push_back(std::move(js));
  }
  nlohmann::json j{{"plant", spec.name},
                   {"description", spec.description},
                   {"variables", names},
                   {"x0", std::vector<double>(spec.x0.data(), spec.x0.data() + spec.x0.size())},
                   {"train_bounds", {spec.train_lo, spec.train_hi}},
                   {"outside_bounds", {spec.outside_lo, spec.outside_hi}},
                   {"representable_in_library", spec.representable(library)},
                   {"states", std::move(states)}};
  if (stats != nullptr) {
    j["normalization"] = {{"means", std::vector<double>(stats->means.data(), stats->means.data() + stats->means.size())},
                          {"scales",
                           std::vector<double>(stats->scales.data(), stats->scales.data() + stats->scales.size())}};
  }
  return j;
}

}  // namespace sparsedyn
