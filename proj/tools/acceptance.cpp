// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.
// usage: sparsedyn_acceptance [demo-config]
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <algorithm>
#include <functional>
#include <iterator>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/QR>

#include "sparsedyn/commands.hpp"
#include "sparsedyn/config.hpp"
#include "sparsedyn/dynamics.hpp"
#include "sparsedyn/error.hpp"
#include "sparsedyn/library.hpp"
#include "sparsedyn/model.hpp"
#include "sparsedyn/pipeline.hpp"
#include "sparsedyn/plant.hpp"
#include "sparsedyn/random.hpp"
#include "sparsedyn/regression.hpp"
#include "sparsedyn/structure.hpp"
#include "sparsedyn/tvdiff.hpp"

#ifndef SPARSEDYN_DEMO_CONFIG
#define SPARSEDYN_DEMO_CONFIG "configs/demo.json"
#endif

using namespace sparsedyn;
namespace fs = std::filesystem;

namespace {

// Pinned tolerances.
constexpr double kCoefRelTol = 0.05;
constexpr double kRuntimeLimit = 60.0;
constexpr int kMaxSpurious = 3;
constexpr double kOracleTol = 1e-8;
constexpr double kKktFactor = 10.0;
constexpr double kPolyRmseFactor = 1.5;
constexpr double kLongTimeGap = 0.05;
constexpr double kRichardsonLo = 12.0, kRichardsonHi = 20.0;

struct Outcome {
  bool pass = true;
  std::string detail;
};

std::string num(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::set<std::string> support(const SparseModel& m, Eigen::Index state) {
  std::set<std::string> out;
  for (Eigen::Index j = 0; j < m.xi.rows(); ++j) {
    if (m.xi(j, state) != 0.0) out.insert(m.library.term(j).display);
  }
  return out;
}

std::string join(const std::set<std::string>& s) {
  std::string out = "{";
  for (const auto& t : s) out += (out.size() > 1 ? "," : "") + t;
  return out + "}";
}

TimeSeriesDataset run_plant(const PlantSpec& p, double hours, const std::vector<SegmentKind>& kinds, double noise,
                            std::uint64_t seed) {
  const auto sig = generate_signal(hours, 1.0, p.train_lo, p.train_hi, kinds, derive_seed(seed, "signal"));
  return simulate(p, sig, 0.01, noise, derive_seed(seed, "simulation"));
}

const std::vector<SegmentKind> kSmooth{SegmentKind::kLinear, SegmentKind::kSigmoid};

// Seed for the single-run criteria (the demo seed); the robustness sweep
// re-runs the same check over seeds 1..kSweepSeeds and reports the rate.
constexpr std::uint64_t kSeed = 2024;
constexpr int kSweepSeeds = 20;

struct PlantCheck {
  bool pass = true;
  std::string detail;
};

// Noise-free data, central differences, polynomial library.
PlantCheck exact_on(const PlantSpec& plant, std::uint64_t seed) {
  PlantCheck c;
  const auto t0 = std::chrono::steady_clock::now();
  const auto ds = run_plant(plant, 100.0, kSmooth, 0.0, seed);
  FitSettings s;
  s.diff.method = DiffMethod::kCentralDifference;
  s.library.unary.clear();
  s.path.lambda_min_ratio = 1e-4;
  s.seed = seed;
  const auto fit = fit_model(ds, s);
  const double elapsed = seconds_since(t0);

  bool supports_ok = true;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < fit.model.state_count(); ++i) {
    const auto truth = normalized_truth_support(plant, static_cast<std::size_t>(i), fit.model.stats);
    const std::set<std::string> want(truth.begin(), truth.end());
    const auto got = support(fit.model, i);
    if (got != want) {
      supports_ok = false;
      c.detail += " " + fit.model.state_names[static_cast<std::size_t>(i)] + " got " + join(got) + " want " +
                  join(want) + ";";
    }
    const auto raw = raw_polynomial(fit.model, i);
    for (const auto& term : plant.rhs[static_cast<std::size_t>(i)]) {
      const auto it = raw.find(term.exponents);
      const double v = it == raw.end() ? 0.0 : it->second;
      worst = std::max(worst, std::abs(v - term.coef) / std::abs(term.coef));
    }
  }
  c.pass = supports_ok && worst <= kCoefRelTol && elapsed < kRuntimeLimit;
  c.detail = std::string(supports_ok ? " supports equal" : " supports differ:") + c.detail + " worst coef err " +
             num(100.0 * worst, 3) + "%, " + num(elapsed, 3) + " s";
  return c;
}

// sigma = 0.01 measurement noise, TV differentiation.
PlantCheck noisy_on(const PlantSpec& plant, std::uint64_t seed) {
  PlantCheck c;
  const auto ds = run_plant(plant, 100.0, kSmooth, 0.01, seed);
  FitSettings s;
  s.diff.method = DiffMethod::kTvRegularized;
  s.diff.tv.reg = 1e-2;
  s.library.unary.clear();
  s.path.lambda_min_ratio = 3e-3;
  s.seed = seed;
  const auto fit = fit_model(ds, s);
  for (Eigen::Index i = 0; i < fit.model.state_count(); ++i) {
    const auto truth = normalized_truth_support(plant, static_cast<std::size_t>(i), fit.model.stats);
    const auto got = support(fit.model, i);
    int missing = 0, spurious = 0;
    for (const auto& t : truth) {
      // The normalized constant is a centring artefact; it is neither required nor counted.
      if (t != "1" && !got.count(t)) ++missing;
    }
    for (const auto& t : got) {
      if (t != "1" && std::find(truth.begin(), truth.end(), t) == truth.end()) ++spurious;
    }
    c.pass = c.pass && missing == 0 && spurious <= kMaxSpurious;
    c.detail += " " + fit.model.state_names[static_cast<std::size_t>(i)] + " -" + std::to_string(missing) + "/+" +
                std::to_string(spurious);
  }
  return c;
}

Outcome per_plant(const std::function<PlantCheck(const PlantSpec&, std::uint64_t)>& check, int sweep) {
  Outcome o;
  for (const char* name : {"forced-linear-2", "mix-cascade-4"}) {
    const auto& plant = find_plant(name);
    const auto c = check(plant, kSeed);
    o.pass = o.pass && c.pass;
    int passed = 0;
    for (int seed = 1; seed <= sweep; ++seed) passed += check(plant, static_cast<std::uint64_t>(seed)).pass ? 1 : 0;
    o.detail += std::string(" ") + name + ":" + c.detail + " [seeds 1-" + std::to_string(sweep) + ": " +
                std::to_string(passed) + " pass];";
  }
  return o;
}

Outcome exact_recovery() { return per_plant(exact_on, kSweepSeeds); }
Outcome noisy_recovery() { return per_plant(noisy_on, 5); }

Eigen::MatrixXd gaussian(Rng& rng, Eigen::Index m, Eigen::Index k) {
  Eigen::MatrixXd a(m, k);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  return a;
}

Outcome lasso_oracle() {
  Outcome o;
  Rng rng(2024);
  LassoOptions raw;
  raw.standardize = false;
  double worst_oracle = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = static_cast<Eigen::Index>(1 + rng.uniform_index(10));
    const auto m = static_cast<Eigen::Index>(k + rng.uniform_index(static_cast<std::uint64_t>(51 - k)));
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(gaussian(rng, m, k));
    const Eigen::MatrixXd theta =
        std::sqrt(static_cast<double>(m)) * (qr.householderQ() * Eigen::MatrixXd::Identity(m, k));
    const Eigen::VectorXd y = gaussian(rng, m, 1).col(0);
    // theta' theta / m = I, so the minimizer is the soft-thresholded correlation.
    const Eigen::VectorXd z = theta.transpose() * y / static_cast<double>(m);
    const double lambda = rng.uniform(0.01, 1.0) * z.cwiseAbs().maxCoeff();
    Eigen::VectorXd oracle(k);
    for (Eigen::Index j = 0; j < k; ++j) oracle[j] = std::copysign(std::max(std::abs(z[j]) - lambda, 0.0), z[j]);
    worst_oracle = std::max(worst_oracle, (lasso_cd(theta, y, lambda, raw).coef - oracle).cwiseAbs().maxCoeff());
  }
  double worst_kkt = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto k = static_cast<Eigen::Index>(2 + rng.uniform_index(15));
    const auto m = static_cast<Eigen::Index>(5 + rng.uniform_index(100));
    Eigen::MatrixXd theta = gaussian(rng, m, k);
    theta.col(k - 1) = 0.7 * theta.col(0) + 0.3 * theta.col(k - 1);
    const Eigen::VectorXd y = gaussian(rng, m, 1).col(0);
    const double lmax = (theta.transpose() * y).cwiseAbs().maxCoeff() / static_cast<double>(m);
    const double lambda = lmax * std::pow(10.0, rng.uniform(-3.0, 0.0));
    const Eigen::VectorXd b = lasso_cd(theta, y, lambda, raw).coef;
    const Eigen::VectorXd g = theta.transpose() * (y - theta * b) / static_cast<double>(m);
    for (Eigen::Index j = 0; j < k; ++j) {
      const double r = b[j] != 0.0 ? std::abs(g[j] - std::copysign(lambda, b[j])) : std::max(0.0, std::abs(g[j]) - lambda);
      worst_kkt = std::max(worst_kkt, r);
    }
  }
  o.pass = worst_oracle < kOracleTol && worst_kkt < kKktFactor * raw.tol;
  o.detail = " max oracle error " + num(worst_oracle, 3) + ", max KKT residual " + num(worst_kkt, 3) + " (limit " +
             num(kKktFactor * raw.tol, 3) + ")";
  return o;
}

double rmse(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

Outcome tv_beats_central() {
  Outcome o;
  const auto regs = log_grid(1e-12, 1e-1, 10);
  Rng rng(99);
  const Eigen::Index m = 1000;
  const double dt = 2.0 * M_PI / static_cast<double>(m - 1);
  Eigen::VectorXd t(m);
  for (Eigen::Index i = 0; i < m; ++i) t[i] = static_cast<double>(i) * dt;
  Eigen::VectorXd x = t.array().sin();
  for (Eigen::Index i = 0; i < m; ++i) x[i] += 0.05 * rng.normal();
  const Eigen::VectorXd truth = t.array().cos();
  const double cd = rmse(central_difference(x, dt), truth);
  const auto sweep = sweep_tv_reg(x, dt, regs, TvOptions{}, [&](const Eigen::VectorXd& g) { return rmse(g, truth); });
  o.pass = sweep.best_loss < cd;
  o.detail = " noisy sine: TV " + num(sweep.best_loss) + " vs central " + num(cd) + ";";

  const double h = 0.01;
  Eigen::VectorXd s(1000);
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = static_cast<double>(i) * h;
  const std::vector<std::pair<Eigen::VectorXd, Eigen::VectorXd>> polys{
      {s.array().square(), 2.0 * s},
      {s.array().cube() - 2.0 * s.array(), 3.0 * s.array().square() - 2.0},
      {1.0 - 0.5 * s.array() + 0.1 * s.array().pow(4), -0.5 + 0.4 * s.array().cube()}};
  double worst = 0.0;
  for (const auto& [f, df] : polys) {
    const double c = rmse(central_difference(f, h), df);
    const auto sw = sweep_tv_reg(f, h, regs, TvOptions{}, [&](const Eigen::VectorXd& g) { return rmse(g, df); });
    worst = std::max(worst, sw.best_loss / c);
  }
  o.pass = o.pass && worst <= kPolyRmseFactor;
  o.detail += " noiseless polynomials: worst TV/central " + num(worst, 3);
  return o;
}

struct DemoFit {
  RunConfig config;
  TimeSeriesDataset ds;
  FitResult fit;
  ProtocolConfig protocol;
};

DemoFit demo_fit(const fs::path& config_path) {
  auto config = load_config(config_path);
  const auto& plant = find_plant(*config.plant);
  PlantSpec p = plant;
  if (config.simulation.amplitude) std::tie(p.train_lo, p.train_hi) = *config.simulation.amplitude;
  if (config.evaluation.outside_amplitude) std::tie(p.outside_lo, p.outside_hi) = *config.evaluation.outside_amplitude;
  const auto& sim = config.simulation;
  const auto sig =
      generate_signal(sim.duration_h, sim.segment_h, p.train_lo, p.train_hi, sim.kinds, derive_seed(config.seed, "signal"));
  auto ds = simulate(p, sig, sim.dt, sim.noise_sigma, derive_seed(config.seed, "simulation"));
  auto fit = fit_model(ds, config.fit);
  ProtocolConfig pc;
  pc.plant = p;
  pc.dt = ds.dt();
  pc.duration = ds.duration();
  pc.segment_duration = sim.segment_h;
  pc.kinds = sim.kinds;
  pc.noise_sigma = sim.noise_sigma;
  pc.seed = config.seed;
  pc.diff = config.fit.diff;
  pc.long_time_multiplier = config.evaluation.long_time_multiplier;
  return {std::move(config), std::move(ds), std::move(fit), pc};
}

// Deletes -x1 from dx2/dt and scores both models on the outside band.
Outcome outside_degradation(const DemoFit& d) {
  Outcome o;
  const auto& model = d.fit.model;
  const auto ablated = drop_term(model, 1, "x1");
  const auto sets = simulate_protocol_datasets(d.protocol);
  const auto targets = model_targets(model, sets.outside, d.protocol.diff);
  const auto intact = evaluate(model, sets.outside, targets.derivs, {}, {}, Protocol::kOutsidePerturbation);
  const auto cut = evaluate(ablated, sets.outside, targets.derivs, {}, {}, Protocol::kOutsidePerturbation);
  for (std::size_t i = 0; i < intact.per_state.size(); ++i) {
    const bool affected = ablated.xi.col(static_cast<Eigen::Index>(i)) != model.xi.col(static_cast<Eigen::Index>(i));
    const double a = intact.per_state[i].test_r2, b = cut.per_state[i].test_r2;
    if (affected) o.pass = o.pass && b < a;
    o.detail += " " + intact.per_state[i].name + (affected ? " (affected)" : "") + ": intact " + num(a) +
                ", ablated " + num(b) + ";";
  }
  return o;
}

Outcome long_time(const DemoFit& d) {
  Outcome o;
  const auto reports = run_protocol_suite(d.fit.model, d.ds, d.fit.targets.derivs, d.fit.split, d.protocol);
  const auto& held = reports[0];
  const auto& lt = reports[1];
  for (std::size_t i = 0; i < held.per_state.size(); ++i) {
    const double gap = std::abs(lt.per_state[i].test_r2 - held.per_state[i].test_r2);
    o.pass = o.pass && gap <= kLongTimeGap;
    o.detail += " " + held.per_state[i].name + ": held-out " + num(held.per_state[i].test_r2) + ", " +
                num(d.protocol.long_time_multiplier * d.protocol.duration, 4) + " h " + num(lt.per_state[i].test_r2) +
                ";";
  }
  return o;
}

// dx/dt = -x from x(0) = 1 over [0, 1].
Outcome rk4_order() {
  LibraryOptions lo;
  lo.max_total_degree = 1;
  lo.min_exponent = 0;
  lo.unary.clear();
  SparseModel m(build_library(std::vector<std::string>{"x", "u"}, lo));
  m.state_names = {"x"};
  m.input_name = "u";
  m.xi = Eigen::MatrixXd::Zero(m.library.size(), 1);
  m.xi(m.library.find("x"), 0) = -1.0;
  m.stats = identity_stats(2);
  m.lambdas = {0.0};
  m.train_r2 = {1.0};
  const PerturbationSignal zero({{SegmentKind::kStep, 1.0, 0.0, 0.0}}, 0);
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  auto err = [&](double dt) {
    const auto out = integrate_model(m, x0, zero, 0.0, 1.0, dt);
    return std::abs(out.states()(out.rows() - 1, 0) - std::exp(-1.0));
  };
  const double ratio = err(0.1) / err(0.05);
  return {ratio >= kRichardsonLo && ratio <= kRichardsonHi, " error ratio dt=0.1 / dt=0.05: " + num(ratio)};
}

// Every exponent vector in [min,max]^n with total absolute degree in 1..d.
std::set<std::vector<int>> brute_force_powers(int n, const LibraryOptions& o) {
  std::set<std::vector<int>> out;
  std::vector<int> a(static_cast<std::size_t>(n), o.min_exponent);
  while (true) {
    int degree = 0;
    for (int e : a) degree += std::abs(e);
    if (degree >= 1 && degree <= o.max_total_degree) out.insert(a);
    std::size_t j = 0;
    while (j < a.size() && a[j] == o.max_exponent) a[j++] = o.min_exponent;
    if (j == a.size()) break;
    ++a[j];
  }
  return out;
}

Outcome library_enumeration() {
  Outcome o;
  const LibraryOptions opts;
  for (int n = 1; n <= 6; ++n) {
    const auto lib = build_library(n, opts);
    std::set<std::vector<int>> got;
    int constants = 0, unary = 0;
    for (const auto& t : lib.terms()) {
      if (t.kind == TermKind::kConstant) ++constants;
      if (t.kind == TermKind::kPowerProduct) got.insert(t.exponents);
      if (t.kind == TermKind::kUnary) ++unary;
    }
    const auto want = brute_force_powers(n, opts);
    const bool ok = got == want && constants == 1 && unary == 5 * n &&
                    lib.size() == static_cast<Eigen::Index>(1 + want.size() + 5 * static_cast<std::size_t>(n));
    o.pass = o.pass && ok;
    o.detail += " n=" + std::to_string(n) + ":" + std::to_string(lib.size()) + (ok ? "" : "(mismatch)");
  }
  int unary14 = 0;
  for (const auto& t : build_library(14, opts).terms()) unary14 += t.kind == TermKind::kUnary;
  o.pass = o.pass && unary14 == 70;
  o.detail += "; unary terms at 14 variables: " + std::to_string(unary14);
  return o;
}

Outcome structural_comparison() {
  Outcome o;
  Rng rng(77);
  LibraryOptions lo;
  lo.unary.clear();
  const auto lib = build_library(std::vector<std::string>{"x1", "x2", "x3", "u"}, lo);
  const auto k = lib.size();
  auto system = [&](const Eigen::VectorXd& coef) {
    SparseModel m(lib);
    m.state_names = {"x1"};
    m.xi = coef;
    m.stats = identity_stats(4);
    m.lambdas = {0.0};
    m.train_r2 = {1.0};
    return m;
  };
  int mismatches = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto systems = static_cast<std::size_t>(2 + rng.uniform_index(4));
    std::vector<TermSupport> supports;
    std::vector<std::set<Eigen::Index>> sets;
    for (std::size_t s = 0; s < systems; ++s) {
      std::set<Eigen::Index> idx;
      Eigen::VectorXd coef = Eigen::VectorXd::Zero(k);
      for (Eigen::Index j = 0; j < k; ++j) {
        if (rng.uniform() < 0.2) {
          idx.insert(j);
          coef[j] = rng.uniform() < 0.5 ? -rng.uniform(0.1, 2.0) : rng.uniform(0.1, 2.0);
        }
      }
      supports.push_back(support_of(system(coef), 0, "S" + std::to_string(s)));
      sets.push_back(idx);
    }
    for (std::size_t a = 0; a < systems; ++a) {
      for (std::size_t b = 0; b < systems; ++b) {
        std::size_t common = 0;
        for (auto j : sets[a]) common += sets[b].count(j);
        const auto c = common_terms(supports[a], supports[b]);
        if (c.common != common || c.total != sets[a].size()) ++mismatches;
        if (a == b && c.common != c.total) ++mismatches;
      }
      // Terms shared by every other system.
      std::vector<std::string> want;
      for (Eigen::Index j = 0; j < k; ++j) {
        bool everywhere = true;
        for (std::size_t b = 0; b < systems; ++b) {
          if (b != a && !sets[b].count(j)) everywhere = false;
        }
        if (everywhere) want.push_back(lib.term(j).display);
      }
      if (common_excluding(supports, a) != want) ++mismatches;
    }
    std::vector<std::size_t> tally(static_cast<std::size_t>(k), 0);
    for (const auto& s : sets) {
      for (auto j : s) ++tally[static_cast<std::size_t>(j)];
    }
    const auto census = repetition_census(supports);
    std::set<Eigen::Index> listed;
    for (const auto& entry : census) {
      listed.insert(entry.index);
      if (entry.count != tally[static_cast<std::size_t>(entry.index)]) ++mismatches;
    }
    for (Eigen::Index j = 0; j < k; ++j) {
      if ((tally[static_cast<std::size_t>(j)] > 0) != (listed.count(j) > 0)) ++mismatches;
    }
    for (std::size_t threshold : {2u, 3u}) {
      std::set<Eigen::Index> want, got;
      for (Eigen::Index j = 0; j < k; ++j) {
        if (tally[static_cast<std::size_t>(j)] >= threshold) want.insert(j);
      }
      for (const auto& e : census_at_least(census, threshold)) got.insert(e.index);
      if (got != want) ++mismatches;
    }
  }
  o.pass = mismatches == 0;
  o.detail = " 100 trials, " + std::to_string(mismatches) + " mismatches against set arithmetic";
  return o;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism(const fs::path& config_path) {
  const auto work = fs::temp_directory_path() / "sparsedyn_acceptance";
  fs::remove_all(work);
  auto config = load_config(config_path);
  config.output_dir = work / "run";
  const std::vector<std::string> files{"dataset.csv", "model.json", "report.json", "report.txt"};
  std::vector<std::string> first;
  for (int round = 0; round < 2; ++round) {
    fs::remove_all(config.output_dir);
    cmd_simulate(config);
    cmd_fit(config);
    cmd_evaluate(config);
    for (std::size_t i = 0; i < files.size(); ++i) {
      const auto bytes = slurp(config.output_dir / files[i]);
      if (round == 0) first.push_back(bytes);
      else if (bytes != first[i] || bytes.empty()) {
        fs::remove_all(work);
        return {false, " " + files[i] + " differs between runs"};
      }
    }
  }
  fs::remove_all(work);
  return {true, " dataset.csv, model.json, report.json, report.txt byte-identical across two runs"};
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path config = argc > 1 ? fs::path(argv[1]) : fs::path(SPARSEDYN_DEMO_CONFIG);
  int failed = 0;
  auto report = [&](int id, const char* name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string(" exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("%s %2d %s:%s\n", o.pass ? "PASS" : "FAIL", id, name, o.detail.c_str());
    std::fflush(stdout);
  };

  report(1, "exact support recovery", exact_recovery);
  report(2, "noisy recovery", noisy_recovery);
  report(3, "LASSO oracle and KKT", lasso_oracle);
  report(4, "TV beats central difference", tv_beats_central);

  std::optional<DemoFit> demo;
  std::string demo_error;
  try {
    demo = demo_fit(config);
  } catch (const std::exception& e) {
    demo_error = e.what();
  }
  auto with_demo = [&](Outcome (*fn)(const DemoFit&)) {
    return [&, fn] {
      if (!demo) return Outcome{false, " demo fit failed: " + demo_error};
      return fn(*demo);
    };
  };
  report(5, "degradation outside the training region", with_demo(outside_degradation));
  report(6, "long-time stability", with_demo(long_time));
  report(7, "RK4 order", rk4_order);
  report(8, "library enumeration", library_enumeration);
  report(9, "structural comparison", structural_comparison);
  report(10, "determinism", [&] { return determinism(config); });

  std::printf("%d of 10 criteria passed\n", 10 - failed);
  return failed == 0 ? 0 : 1;
}
