#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sparsedyn/config.hpp"

namespace sparsedyn {

struct CommandResult {
  std::string summary;  // printed by the CLI
  std::vector<std::filesystem::path> written;
};

// <output_dir>/dataset.csv, truth.json, signal.json
CommandResult cmd_simulate(const RunConfig& config);
// <output_dir>/model.json, selection.txt, equations.txt, paths/<state>.tsv
CommandResult cmd_fit(const RunConfig& config);
// <output_dir>/report.json, report.txt, derivatives.tsv, trajectory.csv
CommandResult cmd_evaluate(const RunConfig& config);
// <output_dir>/compare.txt, compare.json
CommandResult cmd_compare(const RunConfig& config);
// <output_dir>/equations.txt; the summary is the equations
CommandResult cmd_render(const RunConfig& config);

}  // namespace sparsedyn
