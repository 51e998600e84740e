#include "sparsedyn/library.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "sparsedyn/error.hpp"

namespace sparsedyn {
namespace {

double clamp_small(double x) {
  if (std::abs(x) >= kClamp) return x;
  return x < 0.0 ? -kClamp : kClamp;
}

double int_power(double x, int e) {
  if (e == 0) return 1.0;
  if (e < 0) {
    const double inv = 1.0 / clamp_small(x);
    double r = inv;
    for (int i = 1; i < -e; ++i) r *= inv;
    return r;
  }
  double r = x;
  for (int i = 1; i < e; ++i) r *= x;
  return r;
}

void enumerate(std::vector<int>& current, std::size_t pos, int budget, const LibraryOptions& opt,
               std::vector<std::vector<int>>& out) {
  if (pos == current.size()) {
    if (std::any_of(current.begin(), current.end(), [](int a) { return a != 0; })) out.push_back(current);
    return;
  }
  for (int a = opt.min_exponent; a <= opt.max_exponent; ++a) {
    if (std::abs(a) > budget) continue;
    current[pos] = a;
    enumerate(current, pos + 1, budget - std::abs(a), opt, out);
  }
  current[pos] = 0;
}

int total_degree(const std::vector<int>& a) {
  int d = 0;
  for (int e : a) d += std::abs(e);
  return d;
}

}  // namespace

const char* to_string(UnaryFn fn) {
  switch (fn) {
    case UnaryFn::kSin: return "sin";
    case UnaryFn::kCos: return "cos";
    case UnaryFn::kLogAbs: return "log";
    case UnaryFn::kExp: return "exp";
    case UnaryFn::kSqrtAbs: return "sqrt";
  }
  return "?";
}

UnaryFn parse_unary_fn(const std::string& text) {
  for (UnaryFn fn : all_unary_fns()) {
    if (text == to_string(fn)) return fn;
  }
  fail(ErrorKind::kConfig, "unknown unary function '" + text + "' (expected sin, cos, log, exp or sqrt)");
}

const std::vector<UnaryFn>& all_unary_fns() {
  static const std::vector<UnaryFn> fns{UnaryFn::kSin, UnaryFn::kCos, UnaryFn::kLogAbs, UnaryFn::kExp,
                                        UnaryFn::kSqrtAbs};
  return fns;
}

std::string power_display(const std::vector<std::string>& names, const std::vector<int>& exponents) {
  std::string out;
  for (std::size_t v = 0; v < exponents.size(); ++v) {
    const int e = exponents[v];
    if (e == 0) continue;
    if (!out.empty()) out += ' ';
    out += names[v];
    if (e != 1) out += "^" + std::to_string(e);
  }
  return out.empty() ? "1" : out;
}

std::string unary_display(UnaryFn fn, const std::string& name) {
  return std::string(to_string(fn)) + "(" + name + ")";
}

CandidateLibrary::CandidateLibrary(std::vector<std::string> variable_names, std::vector<TermDescriptor> terms)
    : variable_names_(std::move(variable_names)), terms_(std::move(terms)) {
  const auto n = variable_names_.size();
  if (n == 0) fail(ErrorKind::kParameter, "library needs at least one variable");
  std::set<std::string> seen;
  for (const auto& t : terms_) {
    if (!seen.insert(t.display).second) fail(ErrorKind::kSchema, "duplicate library term '" + t.display + "'");
    switch (t.kind) {
      case TermKind::kConstant:
        break;
      case TermKind::kPowerProduct:
        if (t.exponents.size() != n) fail(ErrorKind::kSchema, "term '" + t.display + "' has wrong exponent count");
        if (total_degree(t.exponents) == 0) fail(ErrorKind::kSchema, "power-product term with all-zero exponents");
        break;
      case TermKind::kUnary:
        if (t.variable < 0 || static_cast<std::size_t>(t.variable) >= n) {
          fail(ErrorKind::kSchema, "term '" + t.display + "' refers to a missing variable");
        }
        break;
    }
  }
}

std::vector<std::string> CandidateLibrary::display_names() const {
  std::vector<std::string> out;
  out.reserve(terms_.size());
  for (const auto& t : terms_) out.push_back(t.display);
  return out;
}

Eigen::Index CandidateLibrary::find(const std::string& display) const {
  for (std::size_t j = 0; j < terms_.size(); ++j) {
    if (terms_[j].display == display) return static_cast<Eigen::Index>(j);
  }
  return -1;
}

CandidateLibrary build_library(const std::vector<std::string>& variable_names, const LibraryOptions& options) {
  if (variable_names.empty()) fail(ErrorKind::kParameter, "library needs at least one variable");
  if (options.max_total_degree < 0) fail(ErrorKind::kParameter, "max_total_degree must be nonnegative");
  if (options.min_exponent > options.max_exponent) fail(ErrorKind::kParameter, "min_exponent exceeds max_exponent");

  std::vector<TermDescriptor> terms;
  if (options.include_constant) terms.push_back({TermKind::kConstant, {}, UnaryFn::kSin, 0, "1"});

  std::vector<std::vector<int>> powers;
  std::vector<int> scratch(variable_names.size(), 0);
  enumerate(scratch, 0, options.max_total_degree, options, powers);
  std::sort(powers.begin(), powers.end(), [](const auto& a, const auto& b) {
    const int da = total_degree(a);
    const int db = total_degree(b);
    if (da != db) return da < db;
    return a > b;
  });
  for (auto& p : powers) {
    TermDescriptor t;
    t.kind = TermKind::kPowerProduct;
    t.display = power_display(variable_names, p);
    t.exponents = std::move(p);
    terms.push_back(std::move(t));
  }
  for (UnaryFn fn : options.unary) {
    for (std::size_t v = 0; v < variable_names.size(); ++v) {
      TermDescriptor t;
      t.kind = TermKind::kUnary;
      t.unary_fn = fn;
      t.variable = static_cast<int>(v);
      t.display = unary_display(fn, variable_names[v]);
      terms.push_back(std::move(t));
    }
  }
  return CandidateLibrary(variable_names, std::move(terms));
}

CandidateLibrary build_library(int n_vars, const LibraryOptions& options) {
  if (n_vars < 1) fail(ErrorKind::kParameter, "library needs at least one variable");
  std::vector<std::string> names;
  for (int i = 1; i <= n_vars; ++i) names.push_back("x" + std::to_string(i));
  return build_library(names, options);
}

double evaluate_term(const TermDescriptor& term, const double* row) {
  switch (term.kind) {
    case TermKind::kConstant:
      return 1.0;
    case TermKind::kPowerProduct: {
      double r = 1.0;
      for (std::size_t v = 0; v < term.exponents.size(); ++v) {
        if (term.exponents[v] != 0) r *= int_power(row[v], term.exponents[v]);
      }
      return r;
    }
    case TermKind::kUnary: {
      const double x = row[term.variable];
      switch (term.unary_fn) {
        case UnaryFn::kSin: return std::sin(x);
        case UnaryFn::kCos: return std::cos(x);
        case UnaryFn::kLogAbs: return std::log(std::abs(clamp_small(x)));
        case UnaryFn::kExp: return std::exp(x);
        case UnaryFn::kSqrtAbs: return std::sqrt(std::abs(x));
      }
    }
  }
  return 0.0;
}

Eigen::MatrixXd evaluate_library(const CandidateLibrary& lib, const Eigen::MatrixXd& variables) {
  const auto n = static_cast<Eigen::Index>(lib.variable_names().size());
  if (variables.cols() != n) {
    fail(ErrorKind::kSchema, "library expects " + std::to_string(n) + " variables, data has " +
                                 std::to_string(variables.cols()));
  }
  const Eigen::Index m = variables.rows();
  // Row-major copy so each row's variables are contiguous.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rows = variables;
  Eigen::MatrixXd theta(m, lib.size());
  for (Eigen::Index j = 0; j < lib.size(); ++j) {
    const auto& term = lib.term(j);
    for (Eigen::Index i = 0; i < m; ++i) theta(i, j) = evaluate_term(term, rows.row(i).data());
    if (!theta.col(j).allFinite()) {
      fail(ErrorKind::kEvaluation, "candidate term '" + term.display + "' evaluates to non-finite values");
    }
  }
  return theta;
}

Eigen::MatrixXd evaluate_library(const CandidateLibrary& lib, const TimeSeriesDataset& ds) {
  if (ds.variable_names() != lib.variable_names()) {
    fail(ErrorKind::kSchema, "dataset variables do not match the library's variables");
  }
  return evaluate_library(lib, ds.variables());
}

nlohmann::json to_json(const CandidateLibrary& lib) {
  nlohmann::json terms = nlohmann::json::array();
  for (const auto& t : lib.terms()) {
    nlohmann::json jt;
    jt["display"] = t.display;
    switch (t.kind) {
      case TermKind::kConstant:
        jt["kind"] = "constant";
        break;
      case TermKind::kPowerProduct:
        jt["kind"] = "power-product";
        jt["exponents"] = t.exponents;
        break;
      case TermKind::kUnary:
        jt["kind"] = "unary";
        jt["function"] = to_string(t.unary_fn);
        jt["variable"] = t.variable;
        break;
    }
    terms.push_back(std::move(jt));
  }
  return {{"variables", lib.variable_names()}, {"terms", std::move(terms)}};
}

CandidateLibrary library_from_json(const nlohmann::json& j) {
  try {
    const auto names = j.at("variables").get<std::vector<std::string>>();
    std::vector<TermDescriptor> terms;
    for (const auto& jt : j.at("terms")) {
      TermDescriptor t;
      const auto kind = jt.at("kind").get<std::string>();
      if (kind == "constant") {
        t.kind = TermKind::kConstant;
        t.display = "1";
      } else if (kind == "power-product") {
        t.kind = TermKind::kPowerProduct;
        t.exponents = jt.at("exponents").get<std::vector<int>>();
        if (t.exponents.size() != names.size()) fail(ErrorKind::kSchema, "manifest term has wrong exponent count");
        t.display = power_display(names, t.exponents);
      } else if (kind == "unary") {
        t.kind = TermKind::kUnary;
        t.unary_fn = parse_unary_fn(jt.at("function").get<std::string>());
        t.variable = jt.at("variable").get<int>();
        if (t.variable < 0 || static_cast<std::size_t>(t.variable) >= names.size()) {
          fail(ErrorKind::kSchema, "manifest term refers to a missing variable");
        }
        t.display = unary_display(t.unary_fn, names[static_cast<std::size_t>(t.variable)]);
      } else {
        fail(ErrorKind::kSchema, "unknown term kind '" + kind + "' in library manifest");
      }
      if (jt.contains("display") && jt.at("display").get<std::string>() != t.display) {
        fail(ErrorKind::kSchema, "manifest display name '" + jt.at("display").get<std::string>() +
                                     "' does not match its definition");
      }
      terms.push_back(std::move(t));
    }
    return CandidateLibrary(names, std::move(terms));
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kSchema, std::string("malformed library manifest: ") + e.what());
  }
}

}  // namespace sparsedyn
