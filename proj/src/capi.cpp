#include "sparsedyn.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "sparsedyn/commands.hpp"
#include "sparsedyn/dynamics.hpp"
#include "sparsedyn/error.hpp"

struct sd_config {
  sparsedyn::RunConfig value;
};
struct sd_dataset {
  sparsedyn::TimeSeriesDataset value;
};
struct sd_model {
  sparsedyn::SparseModel value;
};

namespace {

thread_local std::string last_error;
thread_local std::string last_kind;

sd_status record(sd_status status, const std::string& kind, const std::string& message) {
  last_kind = kind;
  last_error = message;
  return status;
}

template <class F>
sd_status guarded(F&& body) {
  last_error.clear();
  last_kind.clear();
  try {
    body();
    return SD_OK;
  } catch (const sparsedyn::Error& e) {
    const auto status =
        e.category() == sparsedyn::ErrorCategory::kValidation ? SD_ERR_VALIDATION : SD_ERR_NUMERICAL;
    return record(status, sparsedyn::to_string(e.kind()), e.what());
  } catch (const std::bad_alloc&) {
    return record(SD_ERR_INTERNAL, "internal error", "out of memory");
  } catch (const std::exception& e) {
    return record(SD_ERR_INTERNAL, "internal error", e.what());
  }
}

sd_status null_argument(const char* what) {
  return record(SD_ERR_VALIDATION, "parameter error", std::string("null argument: ") + what);
}

char* copy_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

using Command = sparsedyn::CommandResult (*)(const sparsedyn::RunConfig&);

sd_status run_command(Command cmd, const sd_config* config, char** summary) {
  if (!config) return null_argument("config");
  return guarded([&] {
    const auto result = cmd(config->value);
    if (summary) *summary = copy_string(result.summary);
  });
}

}  // namespace

extern "C" {

const char* sd_version(void) { return "1.0.0"; }
const char* sd_last_error(void) { return last_error.c_str(); }
const char* sd_last_error_kind(void) { return last_kind.c_str(); }
void sd_string_free(char* s) { std::free(s); }

sd_status sd_config_load(const char* path, sd_config** out) {
  if (!path || !out) return null_argument("path/out");
  return guarded([&] { *out = new sd_config{sparsedyn::load_config(path)}; });
}

sd_status sd_config_parse(const char* text, const char* source_name, sd_config** out) {
  if (!text || !out) return null_argument("text/out");
  return guarded([&] { *out = new sd_config{sparsedyn::parse_config(text, source_name ? source_name : "config")}; });
}

sd_status sd_config_set(sd_config* config, const char* dotted_key, const char* json_value) {
  if (!config || !dotted_key || !json_value) return null_argument("config/key/value");
  return guarded([&] {
    nlohmann::json value;
    try {
      value = nlohmann::json::parse(json_value);
    } catch (const nlohmann::json::parse_error&) {
      sparsedyn::fail(sparsedyn::ErrorKind::kConfig,
                      std::string("override of '") + dotted_key + "': not a JSON value: " + json_value);
    }
    sparsedyn::set_config_value(config->value, dotted_key, value);
  });
}

void sd_config_free(sd_config* config) { delete config; }

const char* sd_config_help(void) {
  static const std::string text = sparsedyn::config_help();
  return text.c_str();
}

sd_status sd_cmd_simulate(const sd_config* c, char** s) { return run_command(sparsedyn::cmd_simulate, c, s); }
sd_status sd_cmd_fit(const sd_config* c, char** s) { return run_command(sparsedyn::cmd_fit, c, s); }
sd_status sd_cmd_evaluate(const sd_config* c, char** s) { return run_command(sparsedyn::cmd_evaluate, c, s); }
sd_status sd_cmd_compare(const sd_config* c, char** s) { return run_command(sparsedyn::cmd_compare, c, s); }
sd_status sd_cmd_render(const sd_config* c, char** s) { return run_command(sparsedyn::cmd_render, c, s); }

sd_status sd_dataset_load_csv(const char* path, const char* input_column, sd_dataset** out) {
  if (!path || !input_column || !out) return null_argument("path/input_column/out");
  return guarded([&] { *out = new sd_dataset{sparsedyn::ingest_csv(path, input_column)}; });
}

sd_status sd_dataset_shape(const sd_dataset* ds, size_t* rows, size_t* states) {
  if (!ds) return null_argument("dataset");
  if (rows) *rows = static_cast<size_t>(ds->value.rows());
  if (states) *states = static_cast<size_t>(ds->value.state_count());
  return SD_OK;
}

void sd_dataset_free(sd_dataset* ds) { delete ds; }

sd_status sd_model_load(const char* path, sd_model** out) {
  if (!path || !out) return null_argument("path/out");
  return guarded([&] { *out = new sd_model{sparsedyn::load_model(path)}; });
}

sd_status sd_model_shape(const sd_model* model, size_t* terms, size_t* states) {
  if (!model) return null_argument("model");
  if (terms) *terms = static_cast<size_t>(model->value.xi.rows());
  if (states) *states = static_cast<size_t>(model->value.xi.cols());
  return SD_OK;
}

sd_status sd_model_coefficient(const sd_model* model, size_t term, size_t state, double* out) {
  if (!model || !out) return null_argument("model/out");
  const auto& xi = model->value.xi;
  if (term >= static_cast<size_t>(xi.rows()) || state >= static_cast<size_t>(xi.cols())) {
    return record(SD_ERR_VALIDATION, "parameter error", "coefficient index out of range");
  }
  *out = xi(static_cast<Eigen::Index>(term), static_cast<Eigen::Index>(state));
  return SD_OK;
}

sd_status sd_model_render(const sd_model* model, char** text) {
  if (!model || !text) return null_argument("model/text");
  return guarded([&] { *text = copy_string(sparsedyn::render_equations(model->value)); });
}

sd_status sd_model_predict(const sd_model* model, const sd_dataset* ds, double* out, size_t out_len) {
  if (!model || !ds || !out) return null_argument("model/dataset/out");
  return guarded([&] {
    const Eigen::MatrixXd pred = sparsedyn::predict_derivatives(model->value, ds->value);
    if (out_len < static_cast<size_t>(pred.size())) {
      sparsedyn::fail(sparsedyn::ErrorKind::kParameter, "output buffer too small");
    }
    for (Eigen::Index r = 0; r < pred.rows(); ++r) {
      for (Eigen::Index c = 0; c < pred.cols(); ++c) out[r * pred.cols() + c] = pred(r, c);
    }
  });
}

void sd_model_free(sd_model* model) { delete model; }

}  // extern "C"
