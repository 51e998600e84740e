#include "sparsedyn/structure.hpp"

#include <algorithm>
#include <map>

#include "sparsedyn/error.hpp"
#include "sparsedyn/random.hpp"

namespace sparsedyn {
namespace {

void require_comparable(const TermSupport& a, const TermSupport& b) {
  if (a.library_digest != b.library_digest) {
    fail(ErrorKind::kComparability, "systems '" + a.system_id + "' and '" + b.system_id + "' use different libraries");
  }
  if (a.state != b.state) {
    fail(ErrorKind::kComparability, "cannot compare state '" + a.state + "' with state '" + b.state + "'");
  }
}

void require_group(const std::vector<TermSupport>& supports) {
  if (supports.size() < 2) fail(ErrorKind::kParameter, "comparison needs at least two systems");
  for (std::size_t s = 1; s < supports.size(); ++s) require_comparable(supports[0], supports[s]);
}

bool contains(const TermSupport& s, Eigen::Index index) {
  return std::binary_search(s.indices.begin(), s.indices.end(), index);
}

std::string pad_right(const std::string& s, std::size_t w) { return s + std::string(w - s.size(), ' '); }

std::string render_grid(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t c = 0; c < r.size(); ++c) width[c] = std::max(width[c], r[c].size());
  }
  std::string out;
  for (const auto& r : rows) {
    std::string line;
    for (std::size_t c = 0; c < r.size(); ++c) line += (c ? "  " : "") + pad_right(r[c], width[c]);
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + "\n";
  }
  return out;
}

}  // namespace

std::uint64_t library_digest(const CandidateLibrary& lib) { return fnv1a64(to_json(lib).dump()); }

TermSupport support_of(const SparseModel& model, Eigen::Index state, const std::string& system_id) {
  if (state < 0 || state >= model.state_count()) fail(ErrorKind::kParameter, "state index out of range");
  TermSupport s;
  s.system_id = system_id;
  s.state = model.state_names[static_cast<std::size_t>(state)];
  s.library_digest = library_digest(model.library);
  for (Eigen::Index j = 0; j < model.xi.rows(); ++j) {
    if (model.xi(j, state) == 0.0) continue;
    s.indices.push_back(j);
    s.terms.push_back(model.library.term(j).display);
  }
  return s;
}

CommonCount common_terms(const TermSupport& a, const TermSupport& b) {
  require_comparable(a, b);
  CommonCount c;
  c.total = a.indices.size();
  for (auto j : a.indices) c.common += contains(b, j);
  return c;
}

std::vector<CensusEntry> repetition_census(const std::vector<TermSupport>& supports) {
  require_group(supports);
  std::map<Eigen::Index, CensusEntry> tally;
  for (const auto& s : supports) {
    for (std::size_t r = 0; r < s.indices.size(); ++r) {
      auto& e = tally[s.indices[r]];
      e.term = s.terms[r];
      e.index = s.indices[r];
      ++e.count;
    }
  }
  std::vector<CensusEntry> out;
  for (auto& [j, e] : tally) out.push_back(std::move(e));
  std::stable_sort(out.begin(), out.end(), [](const CensusEntry& a, const CensusEntry& b) { return a.count > b.count; });
  return out;
}

std::vector<CensusEntry> census_at_least(const std::vector<CensusEntry>& census, std::size_t threshold) {
  std::vector<CensusEntry> out;
  for (const auto& e : census) {
    if (e.count >= threshold) out.push_back(e);
  }
  return out;
}

std::vector<std::string> common_excluding(const std::vector<TermSupport>& supports, std::size_t excluded) {
  require_group(supports);
  if (excluded >= supports.size()) fail(ErrorKind::kParameter, "excluded system index out of range");
  const std::size_t first = excluded == 0 ? 1 : 0;
  std::vector<std::string> out;
  const auto& base = supports[first];
  for (std::size_t r = 0; r < base.indices.size(); ++r) {
    bool everywhere = true;
    for (std::size_t s = 0; s < supports.size() && everywhere; ++s) {
      if (s != excluded) everywhere = contains(supports[s], base.indices[r]);
    }
    if (everywhere) out.push_back(base.terms[r]);
  }
  return out;
}

std::string render_common_table(const std::vector<TermSupport>& supports) {
  require_group(supports);
  const std::size_t n = supports.size();
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> top{supports[0].state, "Excluding", ""};
  std::vector<std::string> sub{"", "Common", "Total"};
  for (std::size_t j = 1; j < n; ++j) {
    top.insert(top.end(), {supports[j].system_id, ""});
    sub.insert(sub.end(), {"Common", "Total"});
  }
  rows.push_back(top);
  rows.push_back(sub);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::string> row{supports[i].system_id, std::to_string(common_excluding(supports, i).size()),
                                 std::to_string(supports[i].indices.size())};
    for (std::size_t j = 1; j < n; ++j) {
      if (j <= i) {
        row.insert(row.end(), {"", ""});
        continue;
      }
      const auto c = common_terms(supports[i], supports[j]);
      row.insert(row.end(), {std::to_string(c.common), std::to_string(c.total)});
    }
    rows.push_back(std::move(row));
  }
  return render_grid(rows);
}

std::string render_census_table(const std::vector<CensusEntry>& census) {
  const auto two = census_at_least(census, 2);
  const auto three = census_at_least(census, 3);
  std::vector<std::vector<std::string>> rows{{"2 or more", "3 or more"}};
  for (std::size_t r = 0; r < two.size(); ++r) {
    rows.push_back({two[r].term, r < three.size() ? three[r].term : ""});
  }
  return render_grid(rows);
}

nlohmann::json comparison_json(const std::vector<TermSupport>& supports) {
  require_group(supports);
  nlohmann::json systems = nlohmann::json::array();
  for (std::size_t i = 0; i < supports.size(); ++i) {
    nlohmann::json pairs = nlohmann::json::array();
    for (std::size_t j = 0; j < supports.size(); ++j) {
      if (j == i) continue;
      const auto c = common_terms(supports[i], supports[j]);
      pairs.push_back({{"with", supports[j].system_id}, {"common", c.common}, {"total", c.total}});
    }
    systems.push_back({{"system", supports[i].system_id},
                       {"terms", supports[i].terms},
                       {"excluding", common_excluding(supports, i)},
                       {"pairs", std::move(pairs)}});
  }
  nlohmann::json census = nlohmann::json::array();
  for (const auto& e : repetition_census(supports)) census.push_back({{"term", e.term}, {"count", e.count}});
  return {{"state", supports[0].state}, {"systems", std::move(systems)}, {"census", std::move(census)}};
}

}  // namespace sparsedyn
