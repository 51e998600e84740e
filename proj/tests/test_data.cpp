#include <cmath>
#include <array>
#include <filesystem>
#include <functional>
#include <fstream>
#include <set>

#include "doctest.h"
#include "sparsedyn/data.hpp"
#include "sparsedyn/error.hpp"
#include "sparsedyn/random.hpp"
#include "test_util.hpp"

using namespace sparsedyn;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an error");
  return ErrorKind::kIo;
}

TimeSeriesDataset random_dataset(Rng& rng, Eigen::Index m, Eigen::Index n) {
  Eigen::VectorXd t(m), u(m);
  Eigen::MatrixXd x(m, n);
  const double dt = 0.01 * (1.0 + rng.uniform());
  for (Eigen::Index i = 0; i < m; ++i) {
    t[i] = static_cast<double>(i) * dt;
    u[i] = rng.uniform(-5.0, 5.0) * 1e3;
    for (Eigen::Index j = 0; j < n; ++j) x(i, j) = rng.normal() * std::pow(10.0, rng.uniform(-3.0, 3.0));
  }
  std::vector<std::string> names;
  for (Eigen::Index j = 0; j < n; ++j) names.push_back("s" + std::to_string(j));
  return TimeSeriesDataset(names, "u", t, x, u);
}

}  // namespace

TEST_CASE("ingest_csv reads a minimal well-formed file") {
  testutil::TempDir dir;
  const auto path = dir.write("min.csv", "time,x,u\n0,1.5,10\n0.01,1.6,10\n0.02,1.7,11\n");
  const auto ds = ingest_csv(path, "u");
  CHECK(ds.rows() == 3);
  CHECK(ds.state_count() == 1);
  CHECK(ds.dt() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(ds.state_names() == std::vector<std::string>{"x"});
  CHECK(ds.input()[2] == 11.0);
}

TEST_CASE("ingest_csv keeps state columns in header order and accepts scientific notation") {
  testutil::TempDir dir;
  const auto path = dir.write("order.csv", "b,time,u,a\n1e-3,0,2,3\n2E2,0.5,2.5,4\n-3.5e+1,1.0,3,5\n");
  const auto ds = ingest_csv(path, "u");
  CHECK(ds.state_names() == std::vector<std::string>{"b", "a"});
  CHECK(ds.states()(0, 0) == 1e-3);
  CHECK(ds.states()(1, 0) == 200.0);
  CHECK(ds.states()(2, 0) == -35.0);
}

TEST_CASE("ingest_csv rejects spacing violations, blanks and missing columns") {
  testutil::TempDir dir;
  CHECK(kind_of([&] { ingest_csv(dir.write("g.csv", "time,x,u\n0,1,1\n0.01,1,1\n0.03,1,1\n"), "u"); }) ==
        ErrorKind::kGrid);
  CHECK(kind_of([&] { ingest_csv(dir.write("m.csv", "time,x\n0,1\n0.01,1\n"), "u"); }) == ErrorKind::kSchema);
  CHECK(kind_of([&] { ingest_csv(dir.write("t.csv", "t,x,u\n0,1,1\n0.01,1,1\n"), "u"); }) == ErrorKind::kSchema);

  const auto blank = dir.write("b.csv", "time,x,u\n0,1,1\n0.01,,1\n0.02,1,1\n");
  try {
    ingest_csv(blank, "u");
    FAIL("blank cell accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kData);
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("'x'") != std::string::npos);
  }
  CHECK(kind_of([&] { ingest_csv(dir.write("n.csv", "time,x,u\n0,nan,1\n0.01,1,1\n0.02,1,1\n"), "u"); }) ==
        ErrorKind::kData);
}

TEST_CASE("write then ingest reproduces the dataset bit for bit") {
  testutil::TempDir dir;
  Rng rng(7);
  for (int trial = 0; trial < 10; ++trial) {
    const auto ds = random_dataset(rng, 20 + trial, 1 + trial % 3);
    const auto path = dir.path() / ("rt" + std::to_string(trial) + ".csv");
    write_csv(ds, path);
    const auto back = ingest_csv(path, "u");
    CHECK(back.states() == ds.states());
    CHECK(back.input() == ds.input());
    CHECK(back.times() == ds.times());
    CHECK(back.fingerprint() == ds.fingerprint());
  }
}

TEST_CASE("normalize: hand-computed column") {
  Eigen::VectorXd t(3);
  t << 0, 1, 2;
  Eigen::MatrixXd x(3, 1);
  x << 1, 2, 3;
  Eigen::VectorXd u(3);
  u << 4, 6, 8;
  const TimeSeriesDataset ds({"x"}, "u", t, x, u);
  const auto [z, stats] = normalize(ds);
  CHECK(stats.means[0] == doctest::Approx(2.0));
  CHECK(stats.scales[0] == doctest::Approx(0.81650).epsilon(1e-5));
  CHECK(z.states()(0, 0) == doctest::Approx(-1.22474).epsilon(1e-5));
  CHECK(z.states()(1, 0) == doctest::Approx(0.0));
  CHECK(z.states()(2, 0) == doctest::Approx(1.22474).epsilon(1e-5));
  // Input follows the same rule.
  CHECK(z.input()[0] == doctest::Approx(-1.22474).epsilon(1e-5));
}

TEST_CASE("normalize is idempotent on normalized data and rejects constant columns") {
  Rng rng(3);
  const auto ds = random_dataset(rng, 50, 3);
  const auto [z, stats] = normalize(ds);
  const auto [z2, stats2] = normalize(z);
  CHECK((z2.states() - z.states()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((stats2.scales.array() - 1.0).abs().maxCoeff() < 1e-12);

  Eigen::VectorXd t(3);
  t << 0, 1, 2;
  Eigen::MatrixXd x(3, 1);
  x << 5, 5, 5;
  Eigen::VectorXd u(3);
  u << 1, 2, 3;
  try {
    normalize(TimeSeriesDataset({"flat"}, "u", t, x, u));
    FAIL("constant column accepted");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateColumn);
    CHECK(std::string(e.what()).find("flat") != std::string::npos);
  }
}

TEST_CASE("normalize: property - zero mean, unit scale, exact inverse") {
  Rng rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto ds = random_dataset(rng, 5 + static_cast<Eigen::Index>(rng.uniform_index(200)),
                                   1 + static_cast<Eigen::Index>(rng.uniform_index(5)));
    const auto [z, stats] = normalize(ds);
    const Eigen::MatrixXd vars = z.variables();
    for (Eigen::Index j = 0; j < vars.cols(); ++j) {
      const double mean = vars.col(j).mean();
      const double sd = std::sqrt((vars.col(j).array() - mean).square().mean());
      CHECK(std::abs(mean) < 1e-12);
      CHECK(std::abs(sd - 1.0) < 1e-9);
    }
    const auto back = denormalize(z, stats);
    const Eigen::MatrixXd orig = ds.variables();
    const Eigen::MatrixXd rec = back.variables();
    for (Eigen::Index j = 0; j < orig.cols(); ++j) {
      const double col_scale = orig.col(j).cwiseAbs().maxCoeff();
      CHECK((rec.col(j) - orig.col(j)).cwiseAbs().maxCoeff() <= 1e-12 * col_scale);
    }
  }
}

TEST_CASE("split_311 sizes") {
  auto sizes = [](const SplitIndices& s) {
    return std::array<std::size_t, 3>{s.train.size(), s.cv.size(), s.test.size()};
  };
  CHECK(sizes(split_311(10, 1)) == std::array<std::size_t, 3>{6, 2, 2});
  CHECK(sizes(split_311(10, 99)) == std::array<std::size_t, 3>{6, 2, 2});
  CHECK(sizes(split_311(5, 4)) == std::array<std::size_t, 3>{3, 1, 1});
  CHECK(sizes(split_311(10001, 4)) == std::array<std::size_t, 3>{6001, 2000, 2000});
  CHECK_THROWS_AS(split_311(4, 1), Error);
}

TEST_CASE("split_311: property - deterministic exact partition for random m") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    const auto m = static_cast<Eigen::Index>(5 + rng.uniform_index(9996));
    const std::uint64_t seed = rng.next_u64();
    const auto a = split_311(m, seed);
    const auto b = split_311(m, seed);
    CHECK(a.train == b.train);
    CHECK(a.cv == b.cv);
    CHECK(a.test == b.test);

    std::vector<int> seen(static_cast<std::size_t>(m), 0);
    for (const auto* set : {&a.train, &a.cv, &a.test}) {
      for (auto i : *set) seen[static_cast<std::size_t>(i)]++;
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    const double unit = static_cast<double>(m) / 5.0;
    CHECK(std::abs(static_cast<double>(a.train.size()) - 3 * unit) <= 1.0);
    CHECK(std::abs(static_cast<double>(a.cv.size()) - unit) <= 1.0);
    CHECK(std::abs(static_cast<double>(a.test.size()) - unit) <= 1.0);
  }
  // Different seeds shuffle differently.
  CHECK(split_311(1000, 1).train != split_311(1000, 2).train);
}

TEST_CASE("dataset constructor enforces invariants") {
  Eigen::VectorXd t(3);
  t << 0, 1, 2;
  Eigen::MatrixXd x(2, 1);
  x << 1, 2;
  Eigen::VectorXd u(3);
  u << 1, 2, 3;
  CHECK(kind_of([&] { TimeSeriesDataset({"x"}, "u", t, x, u); }) == ErrorKind::kSchema);
  Eigen::VectorXd t_bad(3);
  t_bad << 0, 2, 1;
  Eigen::MatrixXd x3(3, 1);
  x3 << 1, 2, 3;
  CHECK(kind_of([&] { TimeSeriesDataset({"x"}, "u", t_bad, x3, u); }) == ErrorKind::kGrid);
}
