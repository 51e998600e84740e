#include "sparsedyn/model.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sparsedyn/error.hpp"

namespace sparsedyn {
namespace {

std::vector<double> to_vector(const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

int SparseModel::term_count(Eigen::Index state) const {
  int n = 0;
  for (Eigen::Index j = 0; j < xi.rows(); ++j) n += xi(j, state) != 0.0;
  return n;
}

void SparseModel::validate() const {
  std::vector<std::string> names = state_names;
  names.push_back(input_name);
  if (names != library.variable_names()) fail(ErrorKind::kSchema, "model variables do not match its library");
  const auto n = state_count();
  if (xi.rows() != library.size() || xi.cols() != n) fail(ErrorKind::kSchema, "model coefficient matrix has wrong shape");
  if (!xi.allFinite()) fail(ErrorKind::kSchema, "model coefficients must be finite");
  const auto v = static_cast<Eigen::Index>(names.size());
  if (stats.means.size() != v || stats.scales.size() != v) fail(ErrorKind::kSchema, "model normalization has wrong length");
  if ((stats.scales.array() <= 0.0).any()) fail(ErrorKind::kSchema, "model normalization scales must be positive");
  if (static_cast<Eigen::Index>(lambdas.size()) != n || static_cast<Eigen::Index>(train_r2.size()) != n) {
    fail(ErrorKind::kSchema, "model per-state metadata has wrong length");
  }
}

Polynomial raw_polynomial(const SparseModel& model, Eigen::Index state) {
  if (state < 0 || state >= model.state_count()) fail(ErrorKind::kParameter, "state index out of range");
  const auto v = static_cast<Eigen::Index>(model.library.variable_names().size());
  Polynomial z;
  for (Eigen::Index j = 0; j < model.xi.rows(); ++j) {
    const double c = model.xi(j, state);
    if (c == 0.0) continue;
    const auto& term = model.library.term(j);
    if (term.kind == TermKind::kUnary) {
      fail(ErrorKind::kParameter, "term '" + term.display + "' has no polynomial expansion");
    }
    std::vector<int> e = term.kind == TermKind::kConstant ? std::vector<int>(static_cast<std::size_t>(v), 0)
                                                          : term.exponents;
    z[e] += c;
  }
  // z = (x - m) / s, and dx_i/dt = s_i dz_i/dt.
  const Eigen::VectorXd inv = model.stats.scales.cwiseInverse();
  Polynomial raw = affine_substitute(z, inv, -model.stats.means.cwiseProduct(inv));
  for (auto& [e, c] : raw) c *= model.stats.scales[state];
  return raw;
}

SparseModel drop_term(const SparseModel& model, Eigen::Index state, const std::string& display) {
  if (state < 0 || state >= model.state_count()) fail(ErrorKind::kParameter, "state index out of range");
  const Eigen::Index j = model.library.find(display);
  if (j < 0) fail(ErrorKind::kParameter, "no library term '" + display + "'");
  SparseModel out = model;
  out.xi(j, state) = 0.0;
  return out;
}

std::string render_equations(const SparseModel& model) {
  auto sig4 = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return std::string(buf);
  };
  std::string out;
  for (Eigen::Index i = 0; i < model.state_count(); ++i) {
    std::string line = "d" + model.state_names[static_cast<std::size_t>(i)] + "/dt =";
    bool first = true;
    for (Eigen::Index j = 0; j < model.xi.rows(); ++j) {
      const double c = model.xi(j, i);
      if (c == 0.0) continue;
      const auto& term = model.library.term(j);
      const std::string body = term.kind == TermKind::kConstant ? "" : " " + term.display;
      if (first) {
        line += " " + sig4(c) + body;
      } else {
        line += (c < 0.0 ? " - " : " + ") + sig4(std::abs(c)) + body;
      }
      first = false;
    }
    if (first) line += " 0";
    out += line + "\n";
  }
  return out;
}

bool same_library(const CandidateLibrary& a, const CandidateLibrary& b) {
  return a.variable_names() == b.variable_names() && a.terms() == b.terms();
}

nlohmann::json to_json(const SparseModel& model) {
  model.validate();
  nlohmann::json states = nlohmann::json::array();
  for (Eigen::Index i = 0; i < model.state_count(); ++i) {
    const auto s = static_cast<std::size_t>(i);
    nlohmann::json js{{"name", model.state_names[s]},
                      {"lambda", model.lambdas[s]},
                      {"train_r2", model.train_r2[s]},
                      {"term_count", model.term_count(i)},
                      {"coefficients", to_vector(model.xi.col(i))}};
    if (s < model.selections.size()) js["selection"] = to_json(model.selections[s]);
    states.push_back(std::move(js));
  }
  return {{"format", "sparsedyn-model"},
          {"version", 1},
          {"fitted_on", model.fitted_on},
          {"input_name", model.input_name},
          {"library", to_json(model.library)},
          {"normalization", {{"means", to_vector(model.stats.means)}, {"scales", to_vector(model.stats.scales)}}},
          {"states", std::move(states)},
          {"fit", model.fit_info}};
}

SparseModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "sparsedyn-model") fail(ErrorKind::kSchema, "not a sparsedyn model file");
    if (j.at("version") != 1) fail(ErrorKind::kSchema, "unsupported model file version");
    SparseModel model(library_from_json(j.at("library")));
    model.fitted_on = j.at("fitted_on").get<std::string>();
    model.input_name = j.at("input_name").get<std::string>();
    model.stats.means = to_eigen(j.at("normalization").at("means").get<std::vector<double>>());
    model.stats.scales = to_eigen(j.at("normalization").at("scales").get<std::vector<double>>());
    const auto& states = j.at("states");
    model.xi.resize(model.library.size(), static_cast<Eigen::Index>(states.size()));
    Eigen::Index i = 0;
    for (const auto& js : states) {
      model.state_names.push_back(js.at("name").get<std::string>());
      model.lambdas.push_back(js.at("lambda").get<double>());
      model.train_r2.push_back(js.at("train_r2").is_null() ? std::numeric_limits<double>::quiet_NaN()
                                                           : js.at("train_r2").get<double>());
      const auto coef = js.at("coefficients").get<std::vector<double>>();
      if (static_cast<Eigen::Index>(coef.size()) != model.library.size()) {
        fail(ErrorKind::kSchema, "state '" + model.state_names.back() + "' has the wrong number of coefficients");
      }
      model.xi.col(i++) = to_eigen(coef);
      if (js.contains("selection")) model.selections.push_back(selection_from_json(js.at("selection")));
    }
    if (!model.selections.empty() && model.selections.size() != model.state_names.size()) {
      fail(ErrorKind::kSchema, "selection reports must cover every state");
    }
    model.fit_info = j.value("fit", nlohmann::json::object());
    model.validate();
    return model;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, std::string("malformed model file: ") + e.what());
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  try {
    return nlohmann::json::parse(buffer.str());
  } catch (const nlohmann::json::parse_error& e) {
    fail(ErrorKind::kSchema, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorKind::kIo, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) fail(ErrorKind::kIo, "write failed for '" + path.string() + "'");
}

void save_model(const SparseModel& model, const std::filesystem::path& path) {
  write_text_file(path, to_json(model).dump(2) + "\n");
}

SparseModel load_model(const std::filesystem::path& path) {
  try {
    return model_from_json(read_json_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kIo) throw;
    fail(e.kind(), path.string() + ": " + e.what());
  }
}

}  // namespace sparsedyn
