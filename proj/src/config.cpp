#include "sparsedyn/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sparsedyn/error.hpp"

namespace sparsedyn {
namespace {

using nlohmann::json;

enum class Kind { kObject, kUnsigned, kInteger, kNumber, kString, kBool, kStringArray, kRange };

struct KeySpec {
  const char* key;
  Kind kind;
  const char* fallback;
  const char* doc;
};

const std::vector<KeySpec>& schema() {
  static const std::vector<KeySpec> keys{
      {"seed", Kind::kUnsigned, "0", "top-level seed; every random draw derives from it via a labelled hash"},
      {"output_dir", Kind::kString, "\"out\"", "directory for all written files"},
      {"plant", Kind::kString, "-", "builtin plant: forced-linear-2, forced-vanderpol or mix-cascade-4"},
      {"dataset", Kind::kString, "<output_dir>/dataset.csv", "CSV to fit/evaluate instead of the simulated one"},
      {"input_column", Kind::kString, "\"u\"", "name of the forcing column in the dataset CSV"},
      {"model", Kind::kString, "<output_dir>/model.json", "model file read by evaluate and render"},
      {"simulation", Kind::kObject, "", "surrogate plant simulation"},
      {"simulation.duration_h", Kind::kNumber, "100", "simulated span in hours"},
      {"simulation.dt", Kind::kNumber, "0.01", "integration and sampling step in hours"},
      {"simulation.segment_h", Kind::kNumber, "1", "duration of each perturbation segment"},
      {"simulation.amplitude", Kind::kRange, "plant training band", "[lo, hi] input level bounds"},
      {"simulation.kinds", Kind::kStringArray, "[\"step\", \"linear\", \"sigmoid\"]", "segment shapes to draw from"},
      {"simulation.noise_sigma", Kind::kNumber, "0", "measurement noise, as a fraction of each state's std"},
      {"differentiation", Kind::kObject, "", "numerical differentiation of the states"},
      {"differentiation.method", Kind::kString, "\"tv\"", "tv (total-variation regularized) or central"},
      {"differentiation.reg", Kind::kNumber, "0.01", "TV regularization weight (normalized units)"},
      {"differentiation.iterations", Kind::kInteger, "100", "TV iteration cap"},
      {"differentiation.epsilon", Kind::kNumber, "1e-8", "TV smoothing constant"},
      {"differentiation.tolerance", Kind::kNumber, "1e-6", "TV relative convergence tolerance"},
      {"library", Kind::kObject, "", "candidate function library"},
      {"library.max_total_degree", Kind::kInteger, "2", "largest sum of |exponents| in a power product"},
      {"library.min_exponent", Kind::kInteger, "-2", "smallest per-variable exponent"},
      {"library.max_exponent", Kind::kInteger, "2", "largest per-variable exponent"},
      {"library.include_constant", Kind::kBool, "true", "include the constant term \"1\""},
      {"library.unary", Kind::kStringArray, "[\"sin\", \"cos\", \"log\", \"exp\", \"sqrt\"]",
       "unary functions applied to each variable"},
      {"regression", Kind::kObject, "", "LASSO path"},
      {"regression.n_lambdas", Kind::kInteger, "50", "path length"},
      {"regression.lambda_min_ratio", Kind::kNumber, "1e-3", "smallest lambda as a fraction of lambda_max"},
      {"regression.tol", Kind::kNumber, "1e-6", "coordinate descent tolerance (max coefficient change)"},
      {"regression.max_iters", Kind::kInteger, "10000", "coordinate descent sweep cap"},
      {"selection", Kind::kObject, "", "model selection on the path"},
      {"selection.method", Kind::kString, "\"cv-peak\"", "cv-peak or score"},
      {"selection.score_alpha", Kind::kNumber, "-0.05", "weight on the term count in the score"},
      {"selection.score_beta", Kind::kNumber, "-1", "weight on ln(cv R^2) in the score"},
      {"evaluation", Kind::kObject, "", "evaluation protocols"},
      {"evaluation.long_time_multiplier", Kind::kNumber, "2.5", "long-time run length over the training length"},
      {"evaluation.outside_amplitude", Kind::kRange, "plant outside band", "[lo, hi] for the outside run"},
      {"evaluation.integrate", Kind::kBool, "true", "also integrate the model along the training input"},
      {"compare", Kind::kObject, "", "structural comparison"},
      {"compare.models", Kind::kStringArray, "[]", "model files to compare (at least two)"},
      {"compare.labels", Kind::kStringArray, "file stems", "system labels, one per model"},
  };
  return keys;
}

const KeySpec* find_key(const std::string& dotted) {
  for (const auto& k : schema()) {
    if (dotted == k.key) return &k;
  }
  return nullptr;
}

std::string pointer_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '~') {
      out += "~0";
    } else if (c == '/') {
      out += "~1";
    } else {
      out += c;
    }
  }
  return out;
}

// Input iterator that publishes how far the parser has read.
struct TrackingIterator {
  using iterator_category = std::input_iterator_tag;
  using value_type = char;
  using difference_type = std::ptrdiff_t;
  using pointer = const char*;
  using reference = const char&;

  const char* p = nullptr;
  const char** cursor = nullptr;

  reference operator*() const { return *p; }
  TrackingIterator& operator++() {
    *cursor = ++p;
    return *this;
  }
  TrackingIterator operator++(int) {
    auto old = *this;
    ++*this;
    return old;
  }
  bool operator==(const TrackingIterator& o) const { return p == o.p; }
  bool operator!=(const TrackingIterator& o) const { return p != o.p; }
};

// SAX pass that only records the line of every value.
class LineRecorder {
 public:
  LineRecorder(const char* begin, const char* const* cursor, std::map<std::string, int>& lines)
      : begin_(begin), cursor_(cursor), lines_(lines) {}

  bool null() { return scalar(); }
  bool boolean(bool) { return scalar(); }
  bool number_integer(json::number_integer_t) { return scalar(); }
  bool number_unsigned(json::number_unsigned_t) { return scalar(); }
  bool number_float(json::number_float_t, const std::string&) { return scalar(); }
  bool string(std::string&) { return scalar(); }
  bool binary(json::binary_t&) { return scalar(); }
  bool start_object(std::size_t) { return open(false); }
  bool start_array(std::size_t) { return open(true); }
  bool end_object() { return close(); }
  bool end_array() { return close(); }
  bool key(std::string& k) {
    stack_.back().key = k;
    lines_.emplace(stack_.back().path + "/" + pointer_escape(k), line());
    return true;
  }
  bool parse_error(std::size_t, const std::string&, const nlohmann::detail::exception&) { return false; }

 private:
  struct Frame {
    bool array = false;
    std::size_t next = 0;
    std::string key;
    std::string path;
  };

  int line() const {
    const char* end = std::max(begin_, *cursor_ - 1);
    return 1 + static_cast<int>(std::count(begin_, end, '\n'));
  }
  std::string value_path() {
    if (stack_.empty()) return "";
    auto& f = stack_.back();
    if (f.array) return f.path + "/" + std::to_string(f.next++);
    return f.path + "/" + pointer_escape(f.key);
  }
  bool scalar() {
    const auto p = value_path();
    lines_.emplace(p, line());
    return true;
  }
  bool open(bool array) {
    const auto p = value_path();
    lines_.emplace(p, line());
    stack_.push_back({array, 0, "", p});
    return true;
  }
  bool close() {
    stack_.pop_back();
    return true;
  }

  const char* begin_;
  const char* const* cursor_;
  std::map<std::string, int>& lines_;
  std::vector<Frame> stack_;
};

std::string dotted_to_pointer(const std::string& dotted) {
  std::string out;
  std::stringstream ss(dotted);
  std::string part;
  while (std::getline(ss, part, '.')) out += "/" + pointer_escape(part);
  return out;
}

class Resolver {
 public:
  explicit Resolver(RunConfig& c) : c_(c) {}

  void run() {
    check_keys(c_.document, "");
    auto& d = c_.document;
    if (d.contains("seed")) c_.seed = d["seed"].get<std::uint64_t>();
    if (d.contains("output_dir")) c_.output_dir = nonempty("output_dir");
    if (d.contains("plant")) {
      c_.plant = d["plant"].get<std::string>();
      try {
        find_plant(*c_.plant);
      } catch (const Error& e) {
        bad("plant", e.what());
      }
    }
    if (d.contains("dataset")) c_.dataset = nonempty("dataset");
    if (d.contains("input_column")) c_.input_column = nonempty("input_column");
    if (d.contains("model")) c_.model = nonempty("model");

    auto& sim = c_.simulation;
    sim.duration_h = positive("simulation.duration_h", sim.duration_h);
    sim.dt = positive("simulation.dt", sim.dt);
    sim.segment_h = positive("simulation.segment_h", sim.segment_h);
    if (has("simulation.amplitude")) sim.amplitude = range("simulation.amplitude");
    if (has("simulation.kinds")) {
      sim.kinds.clear();
      for (const auto& s : strings("simulation.kinds")) {
        try {
          sim.kinds.push_back(parse_segment_kind(s));
        } catch (const Error& e) {
          bad("simulation.kinds", e.what());
        }
      }
      if (sim.kinds.empty()) bad("simulation.kinds", "needs at least one kind");
    }
    if (has("simulation.noise_sigma")) {
      sim.noise_sigma = number("simulation.noise_sigma");
      if (sim.noise_sigma < 0.0) bad("simulation.noise_sigma", "must be nonnegative");
    }

    auto& f = c_.fit;
    f.seed = c_.seed;
    if (has("differentiation.method")) {
      try {
        f.diff.method = parse_diff_method(text("differentiation.method"));
      } catch (const Error& e) {
        bad("differentiation.method", e.what());
      }
    }
    f.diff.tv.reg = positive("differentiation.reg", f.diff.tv.reg);
    f.diff.tv.iterations = positive_int("differentiation.iterations", f.diff.tv.iterations);
    f.diff.tv.epsilon = positive("differentiation.epsilon", f.diff.tv.epsilon);
    f.diff.tv.tolerance = positive("differentiation.tolerance", f.diff.tv.tolerance);

    if (has("library.max_total_degree")) f.library.max_total_degree = integer("library.max_total_degree");
    if (has("library.min_exponent")) f.library.min_exponent = integer("library.min_exponent");
    if (has("library.max_exponent")) f.library.max_exponent = integer("library.max_exponent");
    if (f.library.max_total_degree < 0) bad("library.max_total_degree", "must be nonnegative");
    if (f.library.min_exponent > 0 || f.library.max_exponent < 0) {
      bad(has("library.min_exponent") ? "library.min_exponent" : "library.max_exponent",
          "exponent bounds must satisfy min <= 0 <= max");
    }
    if (has("library.include_constant")) f.library.include_constant = get("library.include_constant").get<bool>();
    if (has("library.unary")) {
      f.library.unary.clear();
      for (const auto& s : strings("library.unary")) {
        try {
          f.library.unary.push_back(parse_unary_fn(s));
        } catch (const Error& e) {
          bad("library.unary", e.what());
        }
      }
    }

    f.path.n_lambdas = positive_int("regression.n_lambdas", f.path.n_lambdas);
    if (f.path.n_lambdas < 2) bad("regression.n_lambdas", "must be at least 2");
    if (has("regression.lambda_min_ratio")) {
      f.path.lambda_min_ratio = number("regression.lambda_min_ratio");
      if (!(f.path.lambda_min_ratio > 0.0 && f.path.lambda_min_ratio < 1.0)) {
        bad("regression.lambda_min_ratio", "must lie in (0, 1)");
      }
    }
    f.path.lasso.tol = positive("regression.tol", f.path.lasso.tol);
    f.path.lasso.max_iters = positive_int("regression.max_iters", f.path.lasso.max_iters);

    if (has("selection.method")) {
      try {
        f.method = parse_selection_method(text("selection.method"));
      } catch (const Error& e) {
        bad("selection.method", e.what());
      }
    }
    if (has("selection.score_alpha")) f.score_alpha = number("selection.score_alpha");
    if (has("selection.score_beta")) f.score_beta = number("selection.score_beta");

    auto& ev = c_.evaluation;
    ev.long_time_multiplier = positive("evaluation.long_time_multiplier", ev.long_time_multiplier);
    if (has("evaluation.outside_amplitude")) ev.outside_amplitude = range("evaluation.outside_amplitude");
    if (has("evaluation.integrate")) ev.integrate = get("evaluation.integrate").get<bool>();

    if (has("compare.models")) {
      for (const auto& s : strings("compare.models")) c_.compare.models.emplace_back(s);
    }
    if (has("compare.labels")) {
      c_.compare.labels = strings("compare.labels");
      if (c_.compare.labels.size() != c_.compare.models.size()) {
        bad("compare.labels", "needs one label per entry of compare.models");
      }
    }
  }

 private:
  std::string where(const std::string& pointer) const {
    auto it = c_.lines.find(pointer);
    if (it == c_.lines.end() || it->second == 0) return c_.source + ": override";
    return c_.source + ":" + std::to_string(it->second);
  }

  [[noreturn]] void bad_at(const std::string& pointer, const std::string& dotted, const std::string& msg) const {
    fail(ErrorKind::kConfig, where(pointer) + ": '" + dotted + "': " + msg);
  }
  [[noreturn]] void bad(const std::string& dotted, const std::string& msg) const {
    bad_at(dotted_to_pointer(dotted), dotted, msg);
  }

  void check_keys(const json& obj, const std::string& prefix) {
    for (const auto& [k, v] : obj.items()) {
      const std::string dotted = prefix.empty() ? k : prefix + "." + k;
      const std::string pointer = dotted_to_pointer(dotted);
      const KeySpec* spec = find_key(dotted);
      if (!spec) bad_at(pointer, dotted, "unknown key (see --help for the accepted keys)");
      check_type(*spec, v, dotted);
      if (spec->kind == Kind::kObject) check_keys(v, dotted);
    }
  }

  void check_type(const KeySpec& spec, const json& v, const std::string& dotted) const {
    bool ok = false;
    const char* expected = "";
    switch (spec.kind) {
      case Kind::kObject: ok = v.is_object(); expected = "an object"; break;
      case Kind::kUnsigned: ok = v.is_number_unsigned() || (v.is_number_integer() && v.get<std::int64_t>() >= 0); expected = "a nonnegative integer"; break;
      case Kind::kInteger: ok = v.is_number_integer(); expected = "an integer"; break;
      case Kind::kNumber: ok = v.is_number(); expected = "a number"; break;
      case Kind::kString: ok = v.is_string(); expected = "a string"; break;
      case Kind::kBool: ok = v.is_boolean(); expected = "true or false"; break;
      case Kind::kStringArray:
        ok = v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); });
        expected = "an array of strings";
        break;
      case Kind::kRange:
        ok = v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number();
        expected = "[lo, hi]";
        break;
    }
    if (!ok) bad(dotted, std::string("expected ") + expected);
  }

  bool has(const std::string& dotted) const { return c_.document.contains(json::json_pointer(dotted_to_pointer(dotted))); }
  const json& get(const std::string& dotted) const { return c_.document.at(json::json_pointer(dotted_to_pointer(dotted))); }
  double number(const std::string& dotted) const {
    const double v = get(dotted).get<double>();
    if (!std::isfinite(v)) bad(dotted, "must be finite");
    return v;
  }
  double positive(const std::string& dotted, double fallback) const {
    if (!has(dotted)) return fallback;
    const double v = number(dotted);
    if (!(v > 0.0)) bad(dotted, "must be positive");
    return v;
  }
  int integer(const std::string& dotted) const {
    const auto v = get(dotted).get<std::int64_t>();
    if (v < -1000000 || v > 1000000) bad(dotted, "out of range");
    return static_cast<int>(v);
  }
  int positive_int(const std::string& dotted, int fallback) const {
    if (!has(dotted)) return fallback;
    const int v = integer(dotted);
    if (v <= 0) bad(dotted, "must be positive");
    return v;
  }
  std::string text(const std::string& dotted) const { return get(dotted).get<std::string>(); }
  std::string nonempty(const std::string& dotted) const {
    auto s = text(dotted);
    if (s.empty()) bad(dotted, "must not be empty");
    return s;
  }
  std::vector<std::string> strings(const std::string& dotted) const {
    return get(dotted).get<std::vector<std::string>>();
  }
  std::pair<double, double> range(const std::string& dotted) const {
    const auto& v = get(dotted);
    const double lo = v[0].get<double>(), hi = v[1].get<double>();
    if (!(std::isfinite(lo) && std::isfinite(hi) && lo < hi)) bad(dotted, "needs finite lo < hi");
    return {lo, hi};
  }

  RunConfig& c_;
};

void resolve(RunConfig& c) {
  RunConfig fresh;
  fresh.source = c.source;
  fresh.document = c.document;
  fresh.lines = c.lines;
  if (!fresh.document.is_object()) fail(ErrorKind::kConfig, c.source + ":1: the config must be a JSON object");
  Resolver(fresh).run();
  c = std::move(fresh);
}

}  // namespace

std::filesystem::path RunConfig::dataset_path() const { return dataset ? *dataset : output_dir / "dataset.csv"; }
std::filesystem::path RunConfig::model_path() const { return model ? *model : output_dir / "model.json"; }

RunConfig parse_config(const std::string& text, const std::string& source) {
  RunConfig c;
  c.source = source;
  try {
    c.document = json::parse(text);
  } catch (const json::parse_error& e) {
    // The library's message already carries "line L, column C".
    std::string msg = e.what();
    const auto at = msg.find("parse error");
    fail(ErrorKind::kConfig, source + ": " + (at == std::string::npos ? msg : msg.substr(at)));
  }
  const char* cursor = text.data();
  LineRecorder recorder(text.data(), &cursor, c.lines);
  TrackingIterator first{text.data(), &cursor};
  TrackingIterator last{text.data() + text.size(), &cursor};
  json::sax_parse(first, last, &recorder);
  resolve(c);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::kIo, "cannot open config '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), path.string());
}

void set_config_value(RunConfig& config, const std::string& dotted_key, const json& value) {
  if (!find_key(dotted_key)) fail(ErrorKind::kConfig, "override: unknown key '" + dotted_key + "'");
  const std::string pointer = dotted_to_pointer(dotted_key);
  config.document[json::json_pointer(pointer)] = value;
  config.lines[pointer] = 0;
  resolve(config);
}

std::string config_help() {
  std::size_t width = 0;
  for (const auto& k : schema()) width = std::max(width, std::string(k.key).size());
  std::string out = "Config keys (JSON object; unknown keys are errors):\n";
  for (const auto& k : schema()) {
    std::string line = "  " + std::string(k.key) + std::string(width - std::string(k.key).size() + 2, ' ') + k.doc;
    if (k.kind != Kind::kObject) line += std::string(" [default: ") + k.fallback + "]";
    out += line + "\n";
  }
  return out;
}

}  // namespace sparsedyn
