#include "sparsedyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "sparsedyn/error.hpp"
#include "sparsedyn/random.hpp"
#include "sparsedyn/regression.hpp"

namespace sparsedyn {
namespace {

struct ActiveTerms {
  std::vector<Eigen::Index> index;
  Eigen::MatrixXd coef;  // |active| x n
};

ActiveTerms active_terms(const SparseModel& model) {
  ActiveTerms a;
  for (Eigen::Index j = 0; j < model.xi.rows(); ++j) {
    if ((model.xi.row(j).array() != 0.0).any()) a.index.push_back(j);
  }
  a.coef.resize(static_cast<Eigen::Index>(a.index.size()), model.xi.cols());
  for (std::size_t r = 0; r < a.index.size(); ++r) a.coef.row(static_cast<Eigen::Index>(r)) = model.xi.row(a.index[r]);
  return a;
}

void require_variables(const SparseModel& model, const TimeSeriesDataset& ds) {
  if (ds.variable_names() != model.library.variable_names()) {
    fail(ErrorKind::kSchema, "dataset variables do not match the model's library");
  }
}

std::string fixed3(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

const char* column_label(Protocol p) {
  switch (p) {
    case Protocol::kHeldOut: return "Test";
    case Protocol::kLongTime: return "Long Time";
    case Protocol::kOutsidePerturbation: return "Outside Training";
  }
  return "?";
}

std::string render_rows(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& r : rows) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    std::string s;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const std::string pad(width[c] - cells[c].size(), ' ');
      if (c == 0) {
        s += cells[c] + pad;
      } else {
        s += "  " + pad + cells[c];
      }
    }
    out += s + "\n";
  };
  line(header);
  std::size_t total = 0;
  for (auto w : width) total += w;
  out += std::string(total + 2 * (width.size() - 1), '-') + "\n";
  for (const auto& r : rows) line(r);
  return out;
}

}  // namespace

const char* to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::kHeldOut: return "held-out";
    case Protocol::kLongTime: return "long-time";
    case Protocol::kOutsidePerturbation: return "outside-perturbation";
  }
  return "?";
}

Protocol parse_protocol(const std::string& text) {
  for (auto p : {Protocol::kHeldOut, Protocol::kLongTime, Protocol::kOutsidePerturbation}) {
    if (text == to_string(p)) return p;
  }
  fail(ErrorKind::kSchema, "unknown protocol '" + text + "'");
}

Eigen::MatrixXd predict_derivatives(const SparseModel& model, const TimeSeriesDataset& ds) {
  require_variables(model, ds);
  const Eigen::MatrixXd z = apply_normalization(ds, model.stats).variables();
  const ActiveTerms a = active_terms(model);
  Eigen::MatrixXd theta(z.rows(), static_cast<Eigen::Index>(a.index.size()));
  std::vector<double> row(static_cast<std::size_t>(z.cols()));
  for (Eigen::Index i = 0; i < z.rows(); ++i) {
    for (Eigen::Index v = 0; v < z.cols(); ++v) row[static_cast<std::size_t>(v)] = z(i, v);
    for (std::size_t r = 0; r < a.index.size(); ++r) {
      const double value = evaluate_term(model.library.term(a.index[r]), row.data());
      if (!std::isfinite(value)) {
        fail(ErrorKind::kEvaluation, "term '" + model.library.term(a.index[r]).display + "' is not finite at row " +
                                         std::to_string(i));
      }
      theta(i, static_cast<Eigen::Index>(r)) = value;
    }
  }
  return theta * a.coef;
}

DerivativeSet model_targets(const SparseModel& model, const TimeSeriesDataset& ds, const DiffSettings& diff) {
  require_variables(model, ds);
  return differentiate(apply_normalization(ds, model.stats), diff);
}

std::vector<double> derivative_r2(const SparseModel& model, const Eigen::MatrixXd& predictions,
                                  const Eigen::MatrixXd& targets, const std::vector<Eigen::Index>& rows) {
  if (predictions.rows() != targets.rows() || predictions.cols() != model.state_count() ||
      targets.cols() != model.state_count()) {
    fail(ErrorKind::kSchema, "prediction and target shapes differ");
  }
  std::vector<double> r2;
  for (Eigen::Index i = 0; i < model.state_count(); ++i) {
    const Eigen::VectorXd t = take_rows(Eigen::VectorXd(targets.col(i)), rows);
    const Eigen::VectorXd p = take_rows(Eigen::VectorXd(predictions.col(i)), rows);
    try {
      r2.push_back(r2_score(t, p));
    } catch (const Error& e) {
      fail(e.kind(), "state '" + model.state_names[static_cast<std::size_t>(i)] + "': " + e.what());
    }
  }
  return r2;
}

EvaluationReport evaluate(const SparseModel& model, const TimeSeriesDataset& ds, const Eigen::MatrixXd& targets,
                          const std::vector<Eigen::Index>& train_rows, const std::vector<Eigen::Index>& test_rows,
                          Protocol protocol) {
  const Eigen::MatrixXd pred = predict_derivatives(model, ds);
  std::vector<Eigen::Index> test = test_rows;
  if (test.empty()) {
    test.resize(static_cast<std::size_t>(ds.rows()));
    for (Eigen::Index i = 0; i < ds.rows(); ++i) test[static_cast<std::size_t>(i)] = i;
  }
  const auto test_r2 = derivative_r2(model, pred, targets, test);
  std::vector<double> train_r2;
  if (!train_rows.empty()) train_r2 = derivative_r2(model, pred, targets, train_rows);

  EvaluationReport report;
  report.protocol = protocol;
  report.fingerprint = ds.fingerprint();
  report.train_rows = static_cast<Eigen::Index>(train_rows.size());
  report.test_rows = static_cast<Eigen::Index>(test.size());
  for (Eigen::Index i = 0; i < model.state_count(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    StateScore score{model.state_names[s], std::nullopt, test_r2[s], model.term_count(i)};
    if (!train_r2.empty()) score.train_r2 = train_r2[s];
    report.per_state.push_back(std::move(score));
  }
  return report;
}

double input_at(const InputSource& input, double t) {
  if (const auto* sig = std::get_if<PerturbationSignal>(&input)) return (*sig)(t);
  const auto& s = std::get<SampledInput>(input);
  const auto n = s.times.size();
  if (n == 0 || s.values.size() != n) fail(ErrorKind::kSchema, "sampled input needs matching, nonempty columns");
  const double slack = 1e-9 * std::max(1.0, std::abs(s.times[n - 1] - s.times[0]));
  if (t < s.times[0] - slack || t > s.times[n - 1] + slack) {
    fail(ErrorKind::kRange, "input requested at t=" + format_double(t) + " outside its samples");
  }
  if (n == 1 || t <= s.times[0]) return s.values[0];
  if (t >= s.times[n - 1]) return s.values[n - 1];
  const auto* begin = s.times.data();
  const auto hi = static_cast<Eigen::Index>(std::upper_bound(begin, begin + n, t) - begin);
  const Eigen::Index lo = hi - 1;
  const double w = (t - s.times[lo]) / (s.times[hi] - s.times[lo]);
  return (1.0 - w) * s.values[lo] + w * s.values[hi];
}

TimeSeriesDataset integrate_model(const SparseModel& model, const Eigen::VectorXd& x0, const InputSource& input,
                                  double t0, double t1, double dt) {
  model.validate();
  const Eigen::Index n = model.state_count();
  if (x0.size() != n) fail(ErrorKind::kSchema, "initial state has the wrong length");
  if (!x0.allFinite()) fail(ErrorKind::kParameter, "initial state must be finite");
  if (!(dt > 0.0) || !(t1 > t0)) fail(ErrorKind::kParameter, "integration needs dt > 0 and t1 > t0");
  const auto steps = static_cast<Eigen::Index>(std::llround((t1 - t0) / dt));
  if (steps < 1) fail(ErrorKind::kParameter, "integration span is shorter than one step");
  const double h = (t1 - t0) / static_cast<double>(steps);

  const ActiveTerms a = active_terms(model);
  const double mu = model.stats.means[n], su = model.stats.scales[n];
  std::vector<double> row(static_cast<std::size_t>(n + 1));
  auto rhs = [&](const Eigen::VectorXd& z, double t) {
    for (Eigen::Index v = 0; v < n; ++v) row[static_cast<std::size_t>(v)] = z[v];
    row[static_cast<std::size_t>(n)] = (input_at(input, t) - mu) / su;
    Eigen::VectorXd dz = Eigen::VectorXd::Zero(n);
    for (std::size_t r = 0; r < a.index.size(); ++r) {
      dz += evaluate_term(model.library.term(a.index[r]), row.data()) *
            a.coef.row(static_cast<Eigen::Index>(r)).transpose();
    }
    return dz;
  };

  Eigen::VectorXd times(steps + 1), u(steps + 1);
  Eigen::MatrixXd states(steps + 1, n);
  Eigen::VectorXd z = (x0 - model.stats.means.head(n)).cwiseQuotient(model.stats.scales.head(n));
  for (Eigen::Index k = 0; k <= steps; ++k) {
    const double t = t0 + static_cast<double>(k) * h;
    times[k] = t;
    u[k] = input_at(input, t);
    states.row(k) = z.transpose();
    if (k == steps) break;
    const Eigen::VectorXd k1 = rhs(z, t);
    const Eigen::VectorXd k2 = rhs(z + 0.5 * h * k1, t + 0.5 * h);
    const Eigen::VectorXd k3 = rhs(z + 0.5 * h * k2, t + 0.5 * h);
    const Eigen::VectorXd k4 = rhs(z + h * k3, t + h);
    z += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (!z.allFinite() || z.cwiseAbs().maxCoeff() > kModelDivergenceBound) {
      const double when = t + h;
      throw DivergenceError(when, "model trajectory diverged at t=" + format_double(when));
    }
  }
  for (Eigen::Index v = 0; v < n; ++v) {
    states.col(v) = states.col(v).array() * model.stats.scales[v] + model.stats.means[v];
  }
  return TimeSeriesDataset(model.state_names, model.input_name, std::move(times), std::move(states), std::move(u));
}

ProtocolDatasets simulate_protocol_datasets(const ProtocolConfig& c) {
  if (!(c.long_time_multiplier > 0.0)) fail(ErrorKind::kParameter, "long_time_multiplier must be positive");
  const double long_span = c.long_time_multiplier * c.duration;
  auto long_signal = generate_signal(long_span, c.segment_duration, c.plant.train_lo, c.plant.train_hi, c.kinds,
                                     derive_seed(c.seed, "long-time-signal"));
  auto outside_signal = generate_signal(c.duration, c.segment_duration, c.plant.outside_lo, c.plant.outside_hi,
                                        c.kinds, derive_seed(c.seed, "outside-signal"));
  auto long_ds = simulate(c.plant, long_signal, c.dt, c.noise_sigma, derive_seed(c.seed, "long-time"));
  auto outside_ds = simulate(c.plant, outside_signal, c.dt, c.noise_sigma, derive_seed(c.seed, "outside"));
  return {std::move(long_signal), std::move(long_ds), std::move(outside_signal), std::move(outside_ds)};
}

std::vector<EvaluationReport> run_protocol_suite(const SparseModel& model, const TimeSeriesDataset& train_ds,
                                                 const Eigen::MatrixXd& train_targets, const SplitIndices& split,
                                                 const ProtocolConfig& config) {
  std::vector<EvaluationReport> reports;
  reports.push_back(evaluate(model, train_ds, train_targets, split.train, split.test, Protocol::kHeldOut));
  const auto sets = simulate_protocol_datasets(config);
  const auto long_targets = model_targets(model, sets.long_time, config.diff);
  reports.push_back(evaluate(model, sets.long_time, long_targets.derivs, {}, {}, Protocol::kLongTime));
  const auto out_targets = model_targets(model, sets.outside, config.diff);
  reports.push_back(evaluate(model, sets.outside, out_targets.derivs, {}, {}, Protocol::kOutsidePerturbation));
  return reports;
}

std::string render_heldout_table(const EvaluationReport& report) {
  std::vector<std::vector<std::string>> rows;
  for (const auto& s : report.per_state) {
    rows.push_back({s.name, s.train_r2 ? fixed3(*s.train_r2) : "-", fixed3(s.test_r2), std::to_string(s.term_count)});
  }
  return render_rows({"Variable", "Train", "Test", "N"}, rows);
}

std::string render_protocol_table(const std::vector<EvaluationReport>& reports) {
  if (reports.empty()) fail(ErrorKind::kParameter, "no reports to render");
  std::vector<std::string> header{"Variable"};
  for (const auto& r : reports) header.emplace_back(column_label(r.protocol));
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < reports.front().per_state.size(); ++i) {
    std::vector<std::string> row{reports.front().per_state[i].name};
    for (const auto& r : reports) {
      if (r.per_state.size() != reports.front().per_state.size() || r.per_state[i].name != row[0]) {
        fail(ErrorKind::kComparability, "reports cover different states");
      }
      row.push_back(fixed3(r.per_state[i].test_r2));
    }
    rows.push_back(std::move(row));
  }
  return render_rows(header, rows);
}

nlohmann::json to_json(const EvaluationReport& report) {
  nlohmann::json states = nlohmann::json::array();
  for (const auto& s : report.per_state) {
    states.push_back({{"name", s.name},
                      {"train_r2", s.train_r2 ? nlohmann::json(*s.train_r2) : nlohmann::json(nullptr)},
                      {"test_r2", s.test_r2},
                      {"term_count", s.term_count}});
  }
  return {{"protocol", to_string(report.protocol)},
          {"fingerprint", report.fingerprint},
          {"train_rows", report.train_rows},
          {"test_rows", report.test_rows},
          {"states", std::move(states)}};
}

EvaluationReport report_from_json(const nlohmann::json& j) {
  try {
    EvaluationReport r;
    r.protocol = parse_protocol(j.at("protocol").get<std::string>());
    r.fingerprint = j.at("fingerprint").get<std::string>();
    r.train_rows = j.at("train_rows").get<Eigen::Index>();
    r.test_rows = j.at("test_rows").get<Eigen::Index>();
    for (const auto& s : j.at("states")) {
      StateScore score;
      score.name = s.at("name").get<std::string>();
      if (!s.at("train_r2").is_null()) score.train_r2 = s.at("train_r2").get<double>();
      score.test_r2 = s.at("test_r2").get<double>();
      score.term_count = s.at("term_count").get<int>();
      r.per_state.push_back(std::move(score));
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, std::string("malformed evaluation report: ") + e.what());
  }
}

}  // namespace sparsedyn
