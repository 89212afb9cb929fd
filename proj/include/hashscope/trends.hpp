#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include "hashscope/phases.hpp"
#include "hashscope/stats.hpp"

namespace hashscope {

struct TrendEntry {
  std::string hashtag;
  std::uint64_t count = 0;
  double weight = 0.0;  // count / top count, linear; word-cloud size

  bool operator==(const TrendEntry&) const = default;
};

struct TrendList {
  std::optional<PhaseId> scope;  // empty = whole corpus
  std::vector<TrendEntry> entries;

  bool contains(const std::string& hashtag) const {
    return std::any_of(entries.begin(), entries.end(), [&](const TrendEntry& e) { return e.hashtag == hashtag; });
  }
  bool operator==(const TrendList&) const = default;
};

namespace detail {
inline TrendList make_trends(std::vector<FrequencyTable::Entry> entries, std::size_t n, std::optional<PhaseId> scope) {
  const auto keep = std::min(n, entries.size());
  std::partial_sort(entries.begin(), entries.begin() + static_cast<std::ptrdiff_t>(keep), entries.end(),
                    FrequencyTable::by_count_desc);
  TrendList list{scope, {}};
  list.entries.reserve(keep);
  for (std::size_t i = 0; i < keep; ++i) {
    const double top = static_cast<double>(entries.front().second);
    list.entries.push_back({entries[i].first, entries[i].second, static_cast<double>(entries[i].second) / top});
  }
  return list;
}
}  // namespace detail

/// The n most frequent hashtags, ties broken lexicographically.
inline TrendList top_hashtags(const FrequencyTable& table, std::size_t n, std::optional<PhaseId> scope = std::nullopt) {
  if (n == 0) throw Error(Errc::invalid_argument, "top_hashtags needs n >= 1");
  return detail::make_trends({table.counts().begin(), table.counts().end()}, n, scope);
}

/// Per-phase top-n after dropping every hashtag on the overall list. The
/// exclusion happens before truncation, so a phase list is still n long
/// when the phase has enough other tags.
inline std::map<PhaseId, TrendList> phase_trends(const std::map<PhaseId, FrequencyTable>& per_phase,
                                                 const TrendList& overall, std::size_t n) {
  if (n == 0) throw Error(Errc::invalid_argument, "phase_trends needs n >= 1");
  std::unordered_set<std::string> excluded;
  for (const auto& e : overall.entries) excluded.insert(e.hashtag);
  std::map<PhaseId, TrendList> out;
  for (const auto& [phase, table] : per_phase) {
    std::vector<FrequencyTable::Entry> remaining;
    for (const auto& entry : table.counts())
      if (!excluded.contains(entry.first)) remaining.push_back(entry);
    out.emplace(phase, detail::make_trends(std::move(remaining), n, phase));
  }
  return out;
}

}  // namespace hashscope
