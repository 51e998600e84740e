#include <cmath>
#include <cstring>
#include <filesystem>

#include "doctest.h"
#include "sparsedyn/dynamics.hpp"
#include "sparsedyn/error.hpp"
#include "sparsedyn/model.hpp"
#include "sparsedyn/random.hpp"

using namespace sparsedyn;

namespace {

LibraryOptions poly_options() {
  LibraryOptions o;
  o.min_exponent = 0;
  o.unary.clear();
  return o;
}

SparseModel random_model(Rng& rng, int n_states, const LibraryOptions& opts) {
  std::vector<std::string> names;
  for (int i = 0; i < n_states; ++i) names.push_back("s" + std::to_string(i + 1));
  auto vars = names;
  vars.push_back("u");
  SparseModel m(build_library(vars, opts));
  m.state_names = names;
  m.input_name = "u";
  m.xi = Eigen::MatrixXd::Zero(m.library.size(), n_states);
  for (Eigen::Index j = 0; j < m.xi.rows(); ++j) {
    for (Eigen::Index i = 0; i < n_states; ++i) {
      if (rng.uniform() < 0.3) m.xi(j, i) = rng.normal() / 3.0;
    }
  }
  m.stats.means.resize(n_states + 1);
  m.stats.scales.resize(n_states + 1);
  for (int v = 0; v <= n_states; ++v) {
    m.stats.means[v] = 4.0 * rng.normal();
    m.stats.scales[v] = 0.1 + 3.0 * rng.uniform();
  }
  m.lambdas.assign(static_cast<std::size_t>(n_states), 0.0);
  m.train_r2.assign(static_cast<std::size_t>(n_states), 0.0);
  for (int i = 0; i < n_states; ++i) {
    m.lambdas[static_cast<std::size_t>(i)] = std::exp(rng.normal());
    m.train_r2[static_cast<std::size_t>(i)] = 1.0 - rng.uniform() / 7.0;
  }
  m.fitted_on = "abc123";
  return m;
}

bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

}  // namespace

TEST_CASE("model JSON round trip is bit exact") {
  Rng rng(5);
  for (int trial = 0; trial < 10; ++trial) {
    SparseModel m = random_model(rng, 1 + trial % 3, LibraryOptions{});
    m.xi(0, 0) = 0.1 + 0.2;  // not representable in short decimal
    m.xi(1, 0) = -1e-300;
    const std::string text = to_json(m).dump(2);
    const SparseModel back = model_from_json(nlohmann::json::parse(text));
    CHECK(bit_equal(m.xi, back.xi));
    CHECK(bit_equal(m.stats.means, back.stats.means));
    CHECK(bit_equal(m.stats.scales, back.stats.scales));
    CHECK(m.lambdas == back.lambdas);
    CHECK(m.train_r2 == back.train_r2);
    CHECK(same_library(m.library, back.library));
    CHECK(to_json(back).dump(2) == text);
  }
}

TEST_CASE("save_model / load_model") {
  Rng rng(6);
  const SparseModel m = random_model(rng, 2, poly_options());
  const auto dir = std::filesystem::temp_directory_path() / "sparsedyn_test_model";
  std::filesystem::remove_all(dir);
  save_model(m, dir / "m.json");
  CHECK(to_json(load_model(dir / "m.json")) == to_json(m));

  write_text_file(dir / "bad.json", "{\n  \"format\": \"sparsedyn-model\",\n  oops\n}\n");
  try {
    load_model(dir / "bad.json");
    FAIL("expected a schema error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kSchema);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  CHECK_THROWS_AS(load_model(dir / "missing.json"), Error);
  std::filesystem::remove_all(dir);
}

TEST_CASE("validate rejects inconsistent models") {
  Rng rng(7);
  SparseModel m = random_model(rng, 2, poly_options());
  SparseModel wrong = m;
  wrong.xi.conservativeResize(wrong.xi.rows() - 1, Eigen::NoChange);
  CHECK_THROWS_AS(wrong.validate(), Error);
  wrong = m;
  wrong.stats.scales[0] = 0.0;
  CHECK_THROWS_AS(wrong.validate(), Error);
  wrong = m;
  wrong.state_names[0] = "other";
  CHECK_THROWS_AS(wrong.validate(), Error);
  wrong = m;
  wrong.xi(0, 0) = std::nan("");
  CHECK_THROWS_AS(wrong.validate(), Error);
}

TEST_CASE("raw_polynomial: property - reproduces predicted derivatives in raw units") {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 3;
    const SparseModel m = random_model(rng, n, poly_options());
    Eigen::MatrixXd x(5, n);
    Eigen::VectorXd u(5), t(5);
    for (Eigen::Index r = 0; r < 5; ++r) {
      t[r] = 0.1 * static_cast<double>(r);
      u[r] = m.stats.means[n] + rng.normal();
      for (int i = 0; i < n; ++i) x(r, i) = m.stats.means[i] + rng.normal();
    }
    const TimeSeriesDataset ds(m.state_names, "u", t, x, u);
    const Eigen::MatrixXd pred = predict_derivatives(m, ds);
    for (int i = 0; i < n; ++i) {
      const Polynomial raw = raw_polynomial(m, i);
      for (Eigen::Index r = 0; r < 5; ++r) {
        double value = 0.0;
        for (const auto& [e, c] : raw) {
          double term = c;
          for (int v = 0; v < n; ++v) term *= std::pow(x(r, v), e[static_cast<std::size_t>(v)]);
          value += term * std::pow(u[r], e[static_cast<std::size_t>(n)]);
        }
        CHECK(value == doctest::Approx(m.stats.scales[i] * pred(r, i)).epsilon(1e-9).scale(1.0));
      }
    }
  }
}

TEST_CASE("raw_polynomial refuses non-polynomial terms; drop_term zeroes one entry") {
  Rng rng(9);
  SparseModel m = random_model(rng, 1, LibraryOptions{});
  m.xi.setZero();
  m.xi(m.library.find("sin(s1)"), 0) = 1.0;
  CHECK_THROWS_AS(raw_polynomial(m, 0), Error);

  m.xi(m.library.find("s1"), 0) = 2.0;
  const SparseModel d = drop_term(m, 0, "s1");
  CHECK(d.xi(m.library.find("s1"), 0) == 0.0);
  CHECK(d.term_count(0) == m.term_count(0) - 1);
  CHECK_THROWS_AS(drop_term(m, 0, "nope"), Error);
  CHECK_THROWS_AS(drop_term(m, 3, "s1"), Error);
}
