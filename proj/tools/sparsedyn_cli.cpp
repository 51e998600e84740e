// sparsedyn command line: simulate, fit, evaluate, compare, render.
#include <cstdio>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "sparsedyn.h"

namespace {

struct Options {
  std::string config;
  std::optional<std::string> diff;
  std::optional<double> tv_reg;
  std::optional<int> tv_iters;
  std::optional<unsigned long long> seed;
  std::optional<std::string> output_dir;
  std::optional<std::string> model;
  std::optional<std::string> dataset;
  std::optional<std::string> plant;
};

int exit_code(sd_status s) {
  switch (s) {
    case SD_OK: return 0;
    case SD_ERR_VALIDATION: return 1;
    default: return 2;
  }
}

int report_failure(sd_status s) {
  std::fprintf(stderr, "error (%s): %s\n", sd_last_error_kind(), sd_last_error());
  return exit_code(s);
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

sd_status apply_overrides(sd_config* cfg, const Options& o) {
  sd_status s = SD_OK;
  auto set = [&](const char* key, const std::string& value) {
    if (s == SD_OK) s = sd_config_set(cfg, key, value.c_str());
  };
  if (o.diff) set("differentiation.method", quoted(*o.diff));
  if (o.tv_reg) set("differentiation.reg", CLI::detail::to_string(*o.tv_reg));
  if (o.tv_iters) set("differentiation.iterations", std::to_string(*o.tv_iters));
  if (o.seed) set("seed", std::to_string(*o.seed));
  if (o.output_dir) set("output_dir", quoted(*o.output_dir));
  if (o.model) set("model", quoted(*o.model));
  if (o.dataset) set("dataset", quoted(*o.dataset));
  if (o.plant) set("plant", quoted(*o.plant));
  return s;
}

int run(sd_status (*cmd)(const sd_config*, char**), const Options& o) {
  sd_config* cfg = nullptr;
  sd_status s = o.config.empty() ? sd_config_parse("{}", "<defaults>", &cfg) : sd_config_load(o.config.c_str(), &cfg);
  if (s != SD_OK) return report_failure(s);
  s = apply_overrides(cfg, o);
  char* summary = nullptr;
  if (s == SD_OK) s = cmd(cfg, &summary);
  sd_config_free(cfg);
  if (s != SD_OK) return report_failure(s);
  std::fputs(summary, stdout);
  sd_string_free(summary);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse identification of forced dynamics from time series."};
  app.footer(std::string("\n") + sd_config_help() +
             "\nExit status: 0 success, 1 invalid input or config, 2 numerical failure.");
  app.require_subcommand(1);
  app.set_version_flag("--version", sd_version());

  Options o;
  struct Sub {
    const char* name;
    const char* help;
    sd_status (*fn)(const sd_config*, char**);
  };
  const Sub subs[] = {
      {"simulate", "simulate the configured plant; writes dataset.csv, signal.json, truth.json", sd_cmd_simulate},
      {"fit", "differentiate, build the library, fit the LASSO path and select; writes model.json", sd_cmd_fit},
      {"evaluate", "held-out, long-time and outside-region R^2 tables; writes report.txt/json", sd_cmd_evaluate},
      {"compare", "common-term tables across the models in compare.models", sd_cmd_compare},
      {"render", "print the model's equations", sd_cmd_render},
  };
  sd_status (*chosen)(const sd_config*, char**) = nullptr;
  for (const auto& sub : subs) {
    auto* cmd = app.add_subcommand(sub.name, sub.help);
    cmd->add_option("-c,--config", o.config, "JSON run config")->check(CLI::ExistingFile);
    cmd->add_option("--diff", o.diff, "differentiation.method override")->check(CLI::IsMember({"tv", "central"}));
    cmd->add_option("--tv-reg", o.tv_reg, "differentiation.reg override");
    cmd->add_option("--tv-iters", o.tv_iters, "differentiation.iterations override");
    cmd->add_option("--seed", o.seed, "seed override");
    cmd->add_option("-o,--output-dir", o.output_dir, "output_dir override");
    cmd->add_option("--model", o.model, "model override");
    cmd->add_option("--dataset", o.dataset, "dataset override");
    cmd->add_option("--plant", o.plant, "plant override");
    cmd->footer(std::string("\n") + sd_config_help());
    cmd->callback([&chosen, fn = sub.fn] { chosen = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }
  return run(chosen, o);
}
