#include <cmath>

#include "doctest.h"
#include "sparsedyn/dynamics.hpp"
#include "sparsedyn/error.hpp"
#include "sparsedyn/pipeline.hpp"
#include "sparsedyn/random.hpp"
#include "sparsedyn/regression.hpp"

using namespace sparsedyn;

namespace {

// dx/dt = c * x over variables (x, u), identity normalization.
SparseModel scalar_model(double c) {
  LibraryOptions o;
  o.max_total_degree = 1;
  o.min_exponent = 0;
  o.unary.clear();
  SparseModel m(build_library(std::vector<std::string>{"x", "u"}, o));
  m.state_names = {"x"};
  m.input_name = "u";
  m.xi = Eigen::MatrixXd::Zero(m.library.size(), 1);
  m.xi(m.library.find("x"), 0) = c;
  m.stats = identity_stats(2);
  m.lambdas = {0.0};
  m.train_r2 = {1.0};
  return m;
}

PerturbationSignal zero_signal(double span) { return PerturbationSignal({{SegmentKind::kStep, span, 0.0, 0.0}}, 0); }

double endpoint(const SparseModel& m, double dt) {
  Eigen::VectorXd x0(1);
  x0 << 1.0;
  const auto out = integrate_model(m, x0, zero_signal(1.0), 0.0, 1.0, dt);
  return out.states()(out.rows() - 1, 0);
}

TimeSeriesDataset small_dataset(const PlantSpec& p, double hours, std::uint64_t seed) {
  const auto sig = generate_signal(hours, 1.0, p.train_lo, p.train_hi, {SegmentKind::kLinear, SegmentKind::kSigmoid}, seed);
  return simulate(p, sig, 0.01, 0.0, seed);
}

FitSettings clean_settings() {
  FitSettings s;
  s.diff.method = DiffMethod::kCentralDifference;
  s.library.unary.clear();
  s.path.lambda_min_ratio = 1e-4;
  s.seed = 3;
  return s;
}

}  // namespace

TEST_CASE("predict_derivatives: single identity term returns the normalized state") {
  Rng rng(1);
  const Eigen::Index m = 50;
  Eigen::VectorXd t(m), u(m);
  Eigen::MatrixXd x(m, 1);
  for (Eigen::Index i = 0; i < m; ++i) {
    t[i] = 0.1 * static_cast<double>(i);
    x(i, 0) = 3.0 + 2.0 * rng.normal();
    u[i] = rng.normal();
  }
  const TimeSeriesDataset ds({"x"}, "u", t, x, u);
  SparseModel model = scalar_model(1.0);
  model.stats = normalize(ds).second;
  const Eigen::MatrixXd pred = predict_derivatives(model, ds);
  const Eigen::VectorXd z = (x.col(0).array() - model.stats.means[0]) / model.stats.scales[0];
  CHECK((pred.col(0) - z).cwiseAbs().maxCoeff() < 1e-14);

  model.xi.setZero();
  CHECK(predict_derivatives(model, ds).cwiseAbs().maxCoeff() == 0.0);

  const TimeSeriesDataset renamed({"y"}, "u", t, x, u);
  CHECK_THROWS_AS(predict_derivatives(model, renamed), Error);
}

TEST_CASE("smallest lambda on a full-rank design has the best train R^2 on the path") {
  Rng rng(2);
  Eigen::MatrixXd theta(80, 5);
  for (Eigen::Index i = 0; i < theta.size(); ++i) theta.data()[i] = rng.normal();
  Eigen::VectorXd y = theta * Eigen::VectorXd::LinSpaced(5, -1.0, 1.0);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += 0.1 * rng.normal();
  PathOptions opt;
  opt.lambda_min_ratio = 1e-6;
  const auto path = fit_path(theta, y, opt);
  for (const auto& e : path.entries) {
    if (std::isfinite(e.train_r2)) CHECK(path.entries.back().train_r2 >= e.train_r2 - 1e-12);
  }
}

TEST_CASE("evaluate reproduces the stored train R^2") {
  const auto& p = find_plant("forced-linear-2");
  const auto ds = small_dataset(p, 20.0, 4);
  const auto fit = fit_model(ds, clean_settings());
  const auto report = evaluate(fit.model, ds, fit.targets.derivs, fit.split.train, fit.split.test, Protocol::kHeldOut);
  REQUIRE(report.per_state.size() == 2);
  for (std::size_t i = 0; i < 2; ++i) {
    REQUIRE(report.per_state[i].train_r2.has_value());
    CHECK(std::abs(*report.per_state[i].train_r2 - fit.model.train_r2[i]) <= 1e-12);
    CHECK(report.per_state[i].term_count == fit.model.term_count(static_cast<Eigen::Index>(i)));
  }
  CHECK(report.fingerprint == ds.fingerprint());
  CHECK(report.train_rows == static_cast<Eigen::Index>(fit.split.train.size()));

  // Recomputing from the stored coefficients after a file round trip.
  const SparseModel reloaded = model_from_json(nlohmann::json::parse(to_json(fit.model).dump()));
  const auto again = evaluate(reloaded, ds, model_targets(reloaded, ds, clean_settings().diff).derivs, fit.split.train,
                              fit.split.test, Protocol::kHeldOut);
  for (std::size_t i = 0; i < 2; ++i) CHECK(std::abs(*again.per_state[i].train_r2 - fit.model.train_r2[i]) <= 1e-12);
}

TEST_CASE("a truncated model scores strictly lower") {
  const auto& p = find_plant("forced-linear-2");
  const auto ds = small_dataset(p, 20.0, 5);
  const auto fit = fit_model(ds, clean_settings());
  const auto intact = evaluate(fit.model, ds, fit.targets.derivs, {}, {}, Protocol::kHeldOut);
  const auto cut = drop_term(fit.model, 1, "x1");
  const auto ablated = evaluate(cut, ds, fit.targets.derivs, {}, {}, Protocol::kHeldOut);
  CHECK(ablated.per_state[1].test_r2 < intact.per_state[1].test_r2);
  CHECK(ablated.per_state[0].test_r2 == intact.per_state[0].test_r2);
}

TEST_CASE("integrate_model: exponential decay and zero dynamics") {
  CHECK(std::abs(endpoint(scalar_model(-1.0), 0.001) - 0.36788) < 1e-5);
  CHECK(std::abs(endpoint(scalar_model(-1.0), 0.001) - std::exp(-1.0)) < 1e-12);
  CHECK(endpoint(scalar_model(0.0), 0.01) == 1.0);

  const auto out = integrate_model(scalar_model(-1.0), Eigen::VectorXd::Ones(1), zero_signal(2.0), 0.0, 2.0, 0.01);
  CHECK(out.rows() == 201);
  CHECK(out.times()[200] == doctest::Approx(2.0));
  CHECK(out.input().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("integrate_model: RK4 Richardson ratio") {
  const auto m = scalar_model(-1.0);
  const double truth = std::exp(-1.0);
  for (double dt : {0.1, 0.05, 0.02}) {
    const double ratio = std::abs(endpoint(m, dt) - truth) / std::abs(endpoint(m, dt / 2.0) - truth);
    CHECK(ratio >= 12.0);
    CHECK(ratio <= 20.0);
  }
}

TEST_CASE("integrate_model: divergence is reported with its time") {
  try {
    integrate_model(scalar_model(1.0), Eigen::VectorXd::Ones(1), zero_signal(30.0), 0.0, 30.0, 0.01);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.time() == doctest::Approx(std::log(1e6)).epsilon(1e-2));
    CHECK(e.kind() == ErrorKind::kDivergence);
  }
}

TEST_CASE("integrate_model: normalization round trip and inputs") {
  // dz/dt = u_z with stats (m, s): x(t) = x0 + s_x * int (u - m_u) / s_u.
  SparseModel m = scalar_model(0.0);
  m.xi(m.library.find("u"), 0) = 1.0;
  m.stats.means << 10.0, 2.0;
  m.stats.scales << 4.0, 0.5;
  SampledInput ramp{Eigen::VectorXd::LinSpaced(3, 0.0, 2.0), Eigen::Vector3d(2.0, 3.0, 4.0)};
  Eigen::VectorXd x0(1);
  x0 << 10.0;
  const auto out = integrate_model(m, x0, ramp, 0.0, 2.0, 0.01);
  // int_0^2 (u - 2) / 0.5 = int_0^2 2t dt = 4, times s_x = 4.
  CHECK(out.states()(out.rows() - 1, 0) == doctest::Approx(26.0).epsilon(1e-12));
  CHECK(out.input()[50] == doctest::Approx(2.5));

  CHECK(input_at(ramp, 1.5) == doctest::Approx(3.5));
  CHECK_THROWS_AS(input_at(ramp, 2.5), Error);
  CHECK_THROWS_AS(integrate_model(m, x0, ramp, 0.0, 3.0, 0.01), Error);
  CHECK_THROWS_AS(integrate_model(m, Eigen::VectorXd::Ones(2), ramp, 0.0, 1.0, 0.01), Error);
  CHECK_THROWS_AS(integrate_model(m, x0, ramp, 0.0, 1.0, 0.0), Error);
}

TEST_CASE("integrated learned model tracks the plant") {
  const auto& p = find_plant("forced-linear-2");
  const auto sig = generate_signal(20.0, 1.0, p.train_lo, p.train_hi, {SegmentKind::kLinear, SegmentKind::kSigmoid}, 6);
  const auto ds = simulate(p, sig, 0.01, 0.0, 6);
  const auto fit = fit_model(ds, clean_settings());
  const auto sim = integrate_model(fit.model, p.x0, sig, 0.0, 20.0, 0.01);
  const double range = ds.states().col(0).maxCoeff() - ds.states().col(0).minCoeff();
  CHECK((sim.states() - ds.states()).cwiseAbs().maxCoeff() < 0.05 * range);
}

TEST_CASE("protocol datasets and suite") {
  ProtocolConfig c;
  c.plant = find_plant("forced-linear-2");
  c.duration = 10.0;
  c.dt = 0.01;
  c.seed = 12;
  c.diff.method = DiffMethod::kCentralDifference;
  const auto sets = simulate_protocol_datasets(c);
  CHECK(sets.long_time.duration() == doctest::Approx(25.0));
  CHECK(sets.outside.duration() == doctest::Approx(10.0));
  const auto [lo, hi] = sets.outside_signal.level_range();
  CHECK(lo >= c.plant.outside_lo);
  CHECK(hi <= c.plant.outside_hi);
  CHECK(c.plant.outside_lo >= c.plant.train_hi);
  CHECK(sets.outside.input().minCoeff() >= c.plant.train_hi);
  const auto [llo, lhi] = sets.long_signal.level_range();
  CHECK(llo >= c.plant.train_lo);
  CHECK(lhi <= c.plant.train_hi);

  const auto sig = generate_signal(10.0, 1.0, c.plant.train_lo, c.plant.train_hi, c.kinds, 12);
  const auto ds = simulate(c.plant, sig, c.dt, 0.0, 12);
  FitSettings s = clean_settings();
  s.seed = 12;
  const auto fit = fit_model(ds, s);
  const auto reports = run_protocol_suite(fit.model, ds, fit.targets.derivs, fit.split, c);
  REQUIRE(reports.size() == 3);
  CHECK(reports[0].protocol == Protocol::kHeldOut);
  CHECK(reports[0].fingerprint == ds.fingerprint());
  CHECK(reports[1].protocol == Protocol::kLongTime);
  CHECK(reports[1].fingerprint == sets.long_time.fingerprint());
  CHECK(reports[2].fingerprint == sets.outside.fingerprint());
  CHECK_FALSE(reports[1].per_state[0].train_r2.has_value());
  for (const auto& r : reports) {
    CHECK(r.per_state.size() == 2);
    CHECK(report_from_json(nlohmann::json::parse(to_json(r).dump())) == r);
  }
}

TEST_CASE("table rendering") {
  EvaluationReport a;
  a.protocol = Protocol::kHeldOut;
  a.per_state = {{"Top F", 0.98312, 0.9571, 53}, {"P1", 0.5, -30.7444, 7}};
  CHECK(render_heldout_table(a) ==
        "Variable  Train     Test   N\n"
        "----------------------------\n"
        "Top F     0.983    0.957  53\n"
        "P1        0.500  -30.744   7\n");

  EvaluationReport lt = a, out = a;
  lt.protocol = Protocol::kLongTime;
  out.protocol = Protocol::kOutsidePerturbation;
  out.per_state[0].test_r2 = -4.94;
  CHECK(render_protocol_table({lt, out}) ==
        "Variable  Long Time  Outside Training\n"
        "-------------------------------------\n"
        "Top F         0.957            -4.940\n"
        "P1          -30.744           -30.744\n");
  EvaluationReport other = a;
  other.per_state.pop_back();
  CHECK_THROWS_AS(render_protocol_table({a, other}), Error);

  EvaluationReport missing = a;
  missing.per_state[0].train_r2.reset();
  CHECK(render_heldout_table(missing).find("Top F         -") != std::string::npos);
}

TEST_CASE("undefined R^2 propagates") {
  const Eigen::Index m = 20;
  const TimeSeriesDataset ds({"x"}, "u", Eigen::VectorXd::LinSpaced(m, 0.0, 1.9), Eigen::MatrixXd::Ones(m, 1),
                             Eigen::VectorXd::Zero(m));
  const SparseModel model = scalar_model(-1.0);
  try {
    evaluate(model, ds, Eigen::MatrixXd::Zero(m, 1), {}, {}, Protocol::kLongTime);
    FAIL("expected undefined R^2");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kUndefinedR2);
  }
}
