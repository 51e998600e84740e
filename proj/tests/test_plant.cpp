#include <cmath>
#include <set>

#include "doctest.h"
#include "sparsedyn/error.hpp"
#include "sparsedyn/plant.hpp"
#include "sparsedyn/random.hpp"

using namespace sparsedyn;

namespace {

const std::vector<SegmentKind> kAllKinds{SegmentKind::kStep, SegmentKind::kLinear, SegmentKind::kSigmoid};

double eval_poly(const Polynomial& p, const Eigen::VectorXd& v) {
  double total = 0.0;
  for (const auto& [a, c] : p) {
    double term = c;
    for (std::size_t j = 0; j < a.size(); ++j) term *= std::pow(v[static_cast<Eigen::Index>(j)], a[j]);
    total += term;
  }
  return total;
}

PlantSpec decay_plant() {
  PlantSpec p;
  p.name = "decay";
  p.state_names = {"x"};
  p.rhs = {{{{1, 0}, -1.0}, {{0, 1}, 0.001}}};
  p.x0 = Eigen::VectorXd::Ones(1);
  return p;
}

}  // namespace

TEST_CASE("affine_substitute: property - agrees with direct evaluation") {
  Rng rng(41);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 1 + static_cast<int>(rng.uniform_index(4));
    Polynomial p;
    for (int t = 0; t < 4; ++t) {
      std::vector<int> a(static_cast<std::size_t>(n));
      for (auto& e : a) e = static_cast<int>(rng.uniform_index(3));
      p[a] += rng.normal();
    }
    Eigen::VectorXd scale(n), offset(n), w(n);
    for (int j = 0; j < n; ++j) {
      scale[j] = rng.uniform(0.1, 3.0);
      offset[j] = rng.normal();
      w[j] = rng.normal();
    }
    const Polynomial q = affine_substitute(p, scale, offset);
    const Eigen::VectorXd v = scale.cwiseProduct(w) + offset;
    CHECK(eval_poly(q, w) == doctest::Approx(eval_poly(p, v)).epsilon(1e-10));
  }
  Polynomial neg{{{-1}, 1.0}};
  CHECK_THROWS_AS(affine_substitute(neg, Eigen::VectorXd::Ones(1), Eigen::VectorXd::Zero(1)), Error);
}

TEST_CASE("generate_signal: segment count, kinds and determinism") {
  const auto sig = generate_signal(100.0, 1.0, 1000.0, 3000.0, kAllKinds, 5);
  CHECK(sig.segments().size() == 100);
  CHECK(sig.span() == doctest::Approx(100.0));
  const auto again = generate_signal(100.0, 1.0, 1000.0, 3000.0, kAllKinds, 5);
  CHECK(again.segments() == sig.segments());
  CHECK(generate_signal(100.0, 1.0, 1000.0, 3000.0, kAllKinds, 6).segments() != sig.segments());
  std::set<SegmentKind> seen;
  for (const auto& s : sig.segments()) seen.insert(s.kind);
  CHECK(seen.size() == 3);
  for (std::size_t i = 1; i < sig.segments().size(); ++i) {
    CHECK(sig.segments()[i].start_level == sig.segments()[i - 1].end_level);
  }

  CHECK_THROWS_AS(generate_signal(100.0, 1.0, 3000.0, 1000.0, kAllKinds, 1), Error);
  CHECK_THROWS_AS(generate_signal(10.5, 1.0, 0.0, 1.0, kAllKinds, 1), Error);
  CHECK_THROWS_AS(generate_signal(10.0, 1.0, 0.0, 1.0, {}, 1), Error);
}

TEST_CASE("generate_signal: property - values stay within bounds") {
  Rng rng(42);
  for (int trial = 0; trial < 30; ++trial) {
    const double lo = rng.uniform(-10.0, 10.0);
    const double hi = lo + rng.uniform(0.1, 5.0);
    std::vector<SegmentKind> kinds;
    for (auto k : kAllKinds) {
      if (rng.uniform_index(2) == 0) kinds.push_back(k);
    }
    if (kinds.empty()) kinds.push_back(SegmentKind::kSigmoid);
    const auto sig = generate_signal(20.0, 0.5, lo, hi, kinds, rng.next_u64());
    for (int i = 0; i <= 4000; ++i) {
      const double v = sig(20.0 * i / 4000.0);
      CHECK(v >= lo);
      CHECK(v <= hi);
    }
  }
}

TEST_CASE("sample_signal: segment shapes") {
  const PerturbationSignal sig({{SegmentKind::kStep, 1.0, 0.0, 2.0},
                                {SegmentKind::kLinear, 1.0, 2.0, 4.0},
                                {SegmentKind::kSigmoid, 2.0, 4.0, 0.0},
                                {SegmentKind::kStep, 1.0, 0.0, 0.0}},
                               0);
  CHECK(sample_signal(sig, 0.0) == 2.0);
  CHECK(sample_signal(sig, 0.7) == 2.0);
  CHECK(sample_signal(sig, 1.5) == doctest::Approx(3.0));
  CHECK(sample_signal(sig, 3.0) == doctest::Approx(2.0));
  // Ramps are continuous at both ends.
  CHECK(sample_signal(sig, 2.0 + 1e-12) == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(std::abs(sample_signal(sig, 4.0 - 1e-12)) < 1e-9);
  // Logistic shape: a quarter of the way in, the unscaled fraction is
  // logistic(-3); the rescaling maps logistic(-6) to 0 and logistic(6) to 1.
  const double l6 = 1.0 / (1.0 + std::exp(6.0));
  const double frac = (1.0 / (1.0 + std::exp(3.0)) - l6) / (1.0 - 2.0 * l6);
  CHECK(sample_signal(sig, 2.5) == doctest::Approx(4.0 - 4.0 * frac).epsilon(1e-12));
  // Step with identical levels: no jump across the boundary.
  CHECK(sample_signal(sig, 4.0) == 0.0);
  CHECK(sample_signal(sig, 4.5) == 0.0);
  CHECK(sample_signal(sig, 5.0) == 0.0);
  CHECK_THROWS_AS(sample_signal(sig, 5.1), Error);
  CHECK_THROWS_AS(sample_signal(sig, -0.1), Error);

  const auto back = signal_from_json(nlohmann::json::parse(to_json(sig).dump()));
  CHECK(back.segments() == sig.segments());
}

TEST_CASE("simulate: linear plant settles at its fixed point") {
  const auto spec = decay_plant();
  const PerturbationSignal u({{SegmentKind::kStep, 20.0, 1000.0, 1000.0}}, 0);
  const auto ds = simulate(spec, u, 0.01, 0.0, 1);
  CHECK(ds.rows() == 2001);
  CHECK(ds.states()(ds.rows() - 1, 0) == doctest::Approx(1.0).epsilon(1e-12));

  // Away from equilibrium the state relaxes toward 1 as 1 + (x0 - 1) e^-t.
  PlantSpec off = spec;
  off.x0[0] = 3.0;
  const auto ds2 = simulate(off, u, 0.01, 0.0, 1);
  CHECK(ds2.states()(500, 0) == doctest::Approx(1.0 + 2.0 * std::exp(-5.0)).epsilon(1e-9));
}

TEST_CASE("simulate: grid, determinism and noise") {
  const auto& plant = find_plant("forced-linear-2");
  const auto sig = generate_signal(100.0, 1.0, plant.train_lo, plant.train_hi, kAllKinds, 3);
  const auto a = simulate(plant, sig, 0.01, 0.0, 3);
  CHECK(a.rows() == 10001);
  CHECK(a.dt() == doctest::Approx(0.01));
  const auto b = simulate(plant, sig, 0.01, 0.0, 3);
  CHECK(a.fingerprint() == b.fingerprint());

  const auto noisy = simulate(plant, sig, 0.01, 0.01, 3);
  const auto noisy2 = simulate(plant, sig, 0.01, 0.01, 3);
  CHECK(noisy.fingerprint() == noisy2.fingerprint());
  CHECK(noisy.input() == a.input());
  for (Eigen::Index j = 0; j < a.state_count(); ++j) {
    const Eigen::VectorXd diff = noisy.states().col(j) - a.states().col(j);
    const double mean = a.states().col(j).mean();
    const double sd = std::sqrt((a.states().col(j).array() - mean).square().mean());
    const double noise_sd = std::sqrt(diff.squaredNorm() / static_cast<double>(diff.size()));
    CHECK(noise_sd == doctest::Approx(0.01 * sd).epsilon(0.05));
  }
}

TEST_CASE("simulate: RK4 order on a smooth plant") {
  const auto& plant = find_plant("mix-cascade-4");
  const auto sig = generate_signal(4.0, 1.0, 1.0, 3.0, {SegmentKind::kLinear}, 8);
  auto end = [&](double dt) {
    const auto ds = simulate(plant, sig, dt, 0.0, 0);
    return Eigen::VectorXd(ds.states().row(ds.rows() - 1).transpose());
  };
  const Eigen::VectorXd ref = end(0.0025);
  const double e1 = (end(0.1) - ref).norm();
  const double e2 = (end(0.05) - ref).norm();
  // Linear ramps have kinks at segment boundaries; the grid includes them.
  CHECK(e1 / e2 > 12.0);
  CHECK(e1 / e2 < 20.0);
}

TEST_CASE("simulate: divergence is reported with its time") {
  PlantSpec grow;
  grow.name = "grow";
  grow.state_names = {"x"};
  grow.rhs = {{{{1, 0}, 1.0}}};
  grow.x0 = Eigen::VectorXd::Ones(1);
  const PerturbationSignal u({{SegmentKind::kStep, 30.0, 0.0, 0.0}}, 0);
  try {
    simulate(grow, u, 0.01, 0.0, 0);
    FAIL("divergence not detected");
  } catch (const DivergenceError& e) {
    CHECK(e.time() == doctest::Approx(std::log(1e6)).epsilon(0.01));
  }
  CHECK_THROWS_AS(simulate(grow, u, 0.0, 0.0, 0), Error);
}

TEST_CASE("builtin plants and truth manifests") {
  CHECK(builtin_plants().size() >= 3);
  const auto& lin = find_plant("forced-linear-2");
  REQUIRE(lin.rhs[0].size() == 1);
  CHECK(power_display(lin.variable_names(), lin.rhs[0][0].exponents) == "x2");
  CHECK(lin.representable(LibraryOptions{}));
  CHECK(find_plant("mix-cascade-4").representable(LibraryOptions{}));
  LibraryOptions poly;
  poly.unary.clear();
  CHECK(find_plant("mix-cascade-4").representable(poly));
  CHECK_FALSE(find_plant("forced-vanderpol").representable(LibraryOptions{}));
  CHECK_THROWS_AS(find_plant("distillation"), Error);

  NormalizationStats stats;
  stats.means = Eigen::Vector3d(4.0, 0.0, 2000.0);
  stats.scales = Eigen::Vector3d(0.5, 0.3, 500.0);
  CHECK(normalized_truth_support(lin, 0, stats) == std::vector<std::string>{"x2"});
  // Means at the equilibrium: the constant cancels exactly.
  CHECK(normalized_truth_support(lin, 1, stats) == std::vector<std::string>{"u", "x1", "x2"});
  stats.means[1] = 0.2;
  CHECK(normalized_truth_support(lin, 1, stats) == std::vector<std::string>{"1", "u", "x1", "x2"});
  CHECK(normalized_truth_support(lin, 0, stats) == std::vector<std::string>{"1", "x2"});

  const auto m = truth_manifest(lin, LibraryOptions{}, &stats);
  CHECK(m.at("plant") == "forced-linear-2");
  CHECK(m.at("states")[1].at("terms").size() == 3);
  CHECK(m.at("representable_in_library") == true);
  const auto v = truth_manifest(find_plant("forced-vanderpol"), LibraryOptions{}, nullptr);
  CHECK(v.at("representable_in_library") == false);
}
