#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "sparsedyn/model.hpp"

namespace sparsedyn {

/// Terms with a nonzero coefficient in one state's equation. Terms are kept
/// in canonical library order alongside their library indices.
struct TermSupport {
  std::string system_id;
  std::string state;
  std::uint64_t library_digest = 0;
  std::vector<Eigen::Index> indices;
  std::vector<std::string> terms;

  bool operator==(const TermSupport&) const = default;
};

// Hash of the library manifest; equal digests mean comparable supports.
std::uint64_t library_digest(const CandidateLibrary& lib);

// Exact zeros only; no magnitude threshold.
TermSupport support_of(const SparseModel& model, Eigen::Index state, const std::string& system_id = "");

struct CommonCount {
  std::size_t common = 0;
  std::size_t total = 0;  // size of the row system's support

  bool operator==(const CommonCount&) const = default;
};

// (|a & b|, |a|). Supports must share library and state.
CommonCount common_terms(const TermSupport& a, const TermSupport& b);

struct CensusEntry {
  std::string term;
  Eigen::Index index = 0;
  std::size_t count = 0;

  bool operator==(const CensusEntry&) const = default;
};

// Every term present in at least one system, by count descending then
// library order. Needs >= 2 comparable supports.
std::vector<CensusEntry> repetition_census(const std::vector<TermSupport>& supports);
std::vector<CensusEntry> census_at_least(const std::vector<CensusEntry>& census, std::size_t threshold);

// Terms present in every system except supports[excluded] (library order).
std::vector<std::string> common_excluding(const std::vector<TermSupport>& supports, std::size_t excluded);

// Upper-triangular pairwise table: an "Excluding" column pair, then one
// Common/Total pair per system from the second on.
std::string render_common_table(const std::vector<TermSupport>& supports);
// Two columns: terms repeated in 2 or more systems, and in 3 or more.
std::string render_census_table(const std::vector<CensusEntry>& census);

nlohmann::json comparison_json(const std::vector<TermSupport>& supports);

}  // namespace sparsedyn
