#include "sparsedyn/commands.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <set>

#include "sparsedyn/dynamics.hpp"
#include "sparsedyn/error.hpp"
#include "sparsedyn/random.hpp"
#include "sparsedyn/regression.hpp"
#include "sparsedyn/structure.hpp"

namespace sparsedyn {
namespace {

const PlantSpec& require_plant(const RunConfig& c) {
  if (!c.plant) fail(ErrorKind::kSchema, c.source + ": this command needs 'plant'");
  return find_plant(*c.plant);
}

// Plant with the configured amplitude bands applied.
PlantSpec configured_plant(const RunConfig& c) {
  PlantSpec p = require_plant(c);
  if (c.simulation.amplitude) std::tie(p.train_lo, p.train_hi) = *c.simulation.amplitude;
  if (c.evaluation.outside_amplitude) std::tie(p.outside_lo, p.outside_hi) = *c.evaluation.outside_amplitude;
  return p;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

void write(CommandResult& r, const std::filesystem::path& path, const std::string& text) {
  write_text_file(path, text);
  r.written.push_back(path);
}

TimeSeriesDataset load_dataset(const RunConfig& c) { return ingest_csv(c.dataset_path(), c.input_column); }

std::string support_line(const std::vector<std::string>& terms) {
  std::string s = "{";
  for (std::size_t i = 0; i < terms.size(); ++i) s += (i ? ", " : "") + terms[i];
  return s + "}";
}

}  // namespace

CommandResult cmd_simulate(const RunConfig& c) {
  const PlantSpec plant = configured_plant(c);
  const auto& sim = c.simulation;
  const auto signal = generate_signal(sim.duration_h, sim.segment_h, plant.train_lo, plant.train_hi, sim.kinds,
                                      derive_seed(c.seed, "signal"));
  const auto ds = simulate(plant, signal, sim.dt, sim.noise_sigma, derive_seed(c.seed, "simulation"));
  const auto stats = normalize(ds).second;

  CommandResult r;
  write(r, c.output_dir / "dataset.csv", to_csv(ds));
  write(r, c.output_dir / "signal.json", to_json(signal).dump(2) + "\n");
  write(r, c.output_dir / "truth.json", truth_manifest(plant, c.fit.library, &stats).dump(2) + "\n");
  r.summary = "simulated " + plant.name + ": " + std::to_string(ds.rows()) + " rows, " +
              std::to_string(signal.segments().size()) + " segments, input in [" + format_double(plant.train_lo) +
              ", " + format_double(plant.train_hi) + "]\n";
  return r;
}

CommandResult cmd_fit(const RunConfig& c) {
  const auto ds = load_dataset(c);
  const auto fit = fit_model(ds, c.fit);
  const auto& model = fit.model;

  CommandResult r;
  write(r, c.output_dir / "model.json", to_json(model).dump(2) + "\n");
  for (std::size_t i = 0; i < fit.paths.size(); ++i) {
    write(r, c.output_dir / "paths" / (model.state_names[i] + ".tsv"), render_path_table(fit.paths[i]));
  }

  std::string s = "fit " + std::to_string(ds.rows()) + " rows (" + std::to_string(fit.split.train.size()) +
                  " train, " + std::to_string(fit.split.cv.size()) + " cv, " + std::to_string(fit.split.test.size()) +
                  " test), " + std::to_string(model.library.size()) + " candidate terms, differentiation " +
                  to_string(c.fit.diff.method) + "\n";
  for (std::size_t i = 0; i < fit.paths.size(); ++i) {
    const auto& sel = model.selections[i];
    s += model.state_names[i] + ": " + to_string(sel.method) + " lambda=" + format_double(sel.chosen_lambda) +
         " terms=" + std::to_string(sel.chosen_term_count) + " cv_r2=" + fixed(sel.cv_r2, 6) +
         " train_r2=" + fixed(model.train_r2[i], 6) + (sel.peak_found ? " (cv peak)" : " (no interior cv peak)");
    if (sel.score) s += " score=" + fixed(*sel.score, 6);
    if (!sel.excluded.empty()) s += " excluded=" + std::to_string(sel.excluded.size());
    s += "\n";
  }
  if (c.plant) {
    const PlantSpec& plant = find_plant(*c.plant);
    if (plant.variable_names() == ds.variable_names()) {
      for (Eigen::Index i = 0; i < model.state_count(); ++i) {
        auto truth = normalized_truth_support(plant, static_cast<std::size_t>(i), model.stats);
        std::set<std::string> want(truth.begin(), truth.end());
        const auto got = support_of(model, i).terms;
        std::set<std::string> have(got.begin(), got.end());
        want.erase("1");
        have.erase("1");
        s += model.state_names[static_cast<std::size_t>(i)] + " support " +
             (want == have ? "matches" : "differs from") + " the plant: " +
             support_line(std::vector<std::string>(have.begin(), have.end())) + "\n";
      }
    }
  }
  const std::string eq = render_equations(model);
  write(r, c.output_dir / "selection.txt", s);
  write(r, c.output_dir / "equations.txt", eq);
  r.summary = s + eq;
  return r;
}

CommandResult cmd_evaluate(const RunConfig& c) {
  const SparseModel model = load_model(c.model_path());
  const auto ds = load_dataset(c);
  if (ds.fingerprint() != model.fitted_on) {
    fail(ErrorKind::kData, "dataset '" + c.dataset_path().string() + "' is not the one the model was fitted on");
  }
  const std::uint64_t split_seed = model.fit_info.value("seed", c.seed);
  const auto split = split_311(ds.rows(), derive_seed(split_seed, "split"));
  const auto targets = model_targets(model, ds, c.fit.diff);

  std::vector<EvaluationReport> reports;
  if (c.plant) {
    ProtocolConfig pc;
    pc.plant = configured_plant(c);
    pc.dt = ds.dt();
    pc.duration = ds.duration();
    pc.segment_duration = c.simulation.segment_h;
    pc.kinds = c.simulation.kinds;
    pc.noise_sigma = c.simulation.noise_sigma;
    pc.seed = c.seed;
    pc.diff = c.fit.diff;
    pc.long_time_multiplier = c.evaluation.long_time_multiplier;
    reports = run_protocol_suite(model, ds, targets.derivs, split, pc);
  } else {
    reports.push_back(evaluate(model, ds, targets.derivs, split.train, split.test, Protocol::kHeldOut));
  }

  CommandResult r;
  std::string text = "Held-out (" + std::to_string(reports[0].test_rows) + " test rows)\n" +
                     render_heldout_table(reports[0]);
  if (reports.size() > 1) {
    text += "\nLong time and outside the training perturbation region\n" +
            render_protocol_table({reports.begin() + 1, reports.end()});
  }

  nlohmann::json j{{"model", c.model_path().generic_string()}, {"reports", nlohmann::json::array()}};
  for (const auto& rep : reports) j["reports"].push_back(to_json(rep));

  const Eigen::MatrixXd pred = predict_derivatives(model, ds);
  std::string tsv = "time";
  for (const auto& n : model.state_names) tsv += "\td" + n + "_data\td" + n + "_model";
  tsv += "\n";
  for (Eigen::Index t = 0; t < ds.rows(); ++t) {
    tsv += format_double(ds.times()[t]);
    for (Eigen::Index i = 0; i < model.state_count(); ++i) {
      tsv += "\t" + format_double(targets.derivs(t, i)) + "\t" + format_double(pred(t, i));
    }
    tsv += "\n";
  }
  write(r, c.output_dir / "derivatives.tsv", tsv);

  if (c.evaluation.integrate) {
    std::optional<PerturbationSignal> signal;
    const auto signal_path = c.output_dir / "signal.json";
    if (!c.dataset && std::filesystem::exists(signal_path)) signal = signal_from_json(read_json_file(signal_path));
    InputSource input = signal ? InputSource(*signal) : InputSource(SampledInput{ds.times(), ds.input()});
    nlohmann::json traj;
    text += "\nTrajectory from the initial state and the training input\n";
    try {
      const auto sim = integrate_model(model, ds.states().row(0).transpose(), input, ds.times()[0],
                                       ds.times()[ds.rows() - 1], ds.dt());
      write(r, c.output_dir / "trajectory.csv", to_csv(sim));
      traj["diverged"] = false;
      for (Eigen::Index i = 0; i < model.state_count(); ++i) {
        const double r2 = r2_score(ds.states().col(i), sim.states().col(i));
        traj["state_r2"][model.state_names[static_cast<std::size_t>(i)]] = r2;
        text += model.state_names[static_cast<std::size_t>(i)] + "  R2 " + fixed(r2, 3) + "\n";
      }
    } catch (const DivergenceError& e) {
      traj["diverged"] = true;
      traj["divergence_time"] = e.time();
      text += "diverged at t=" + format_double(e.time()) + "\n";
    }
    j["trajectory"] = traj;
  }
  write(r, c.output_dir / "report.json", j.dump(2) + "\n");
  write(r, c.output_dir / "report.txt", text);
  r.summary = text;
  return r;
}

CommandResult cmd_compare(const RunConfig& c) {
  if (c.compare.models.size() < 2) fail(ErrorKind::kConfig, c.source + ": 'compare.models' needs at least two models");
  std::vector<SparseModel> models;
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < c.compare.models.size(); ++k) {
    models.push_back(load_model(c.compare.models[k]));
    labels.push_back(c.compare.labels.empty() ? c.compare.models[k].stem().string() : c.compare.labels[k]);
    if (!same_library(models.front().library, models.back().library) ||
        models.front().state_names != models.back().state_names) {
      fail(ErrorKind::kComparability, "model '" + c.compare.models[k].string() + "' uses a different library than '" +
                                          c.compare.models[0].string() + "'");
    }
  }
  CommandResult r;
  std::string text;
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < models.front().state_count(); ++i) {
    std::vector<TermSupport> supports;
    for (std::size_t k = 0; k < models.size(); ++k) supports.push_back(support_of(models[k], i, labels[k]));
    text += "Number of terms retained across systems: " + supports[0].state + "\n" + render_common_table(supports) +
            "\nTerms retained across systems: " + supports[0].state + "\n" +
            render_census_table(repetition_census(supports)) + "\n";
    j.push_back(comparison_json(supports));
  }
  write(r, c.output_dir / "compare.txt", text);
  write(r, c.output_dir / "compare.json", j.dump(2) + "\n");
  r.summary = text;
  return r;
}

CommandResult cmd_render(const RunConfig& c) {
  const SparseModel model = load_model(c.model_path());
  CommandResult r;
  r.summary = render_equations(model);
  write(r, c.output_dir / "equations.txt", r.summary);
  return r;
}

}  // namespace sparsedyn
