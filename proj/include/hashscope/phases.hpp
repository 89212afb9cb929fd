#pragma once

#include <array>
#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "hashscope/config.hpp"
#include "hashscope/error.hpp"
#include "hashscope/time.hpp"

namespace hashscope {

enum class PhaseId : std::uint8_t { pre, p1, p2, p3, p4, p5, p6, p7, post };

inline constexpr std::size_t kVotingPhases = 7;
inline constexpr std::array<PhaseId, 9> kAllPhases{PhaseId::pre, PhaseId::p1, PhaseId::p2, PhaseId::p3, PhaseId::p4,
                                                   PhaseId::p5,  PhaseId::p6, PhaseId::p7, PhaseId::post};

/// 1..7 for voting phases, 0 for pre, 8 for post.
constexpr int phase_number(PhaseId id) { return static_cast<int>(id); }
constexpr PhaseId voting_phase(int n) { return static_cast<PhaseId>(n); }

inline std::string phase_name(PhaseId id) {
  switch (id) {
    case PhaseId::pre: return "pre";
    case PhaseId::post: return "post";
    default: return "p" + std::to_string(phase_number(id));
  }
}

struct PhaseWindow {
  std::chrono::year_month_day start;
  std::chrono::year_month_day end;  // inclusive
};

/// Seven voting windows in civil dates plus the wall-clock offset used to
/// turn an instant into a date.
class PhaseSchedule {
 public:
  using Windows = std::array<PhaseWindow, kVotingPhases>;

  PhaseSchedule(Windows windows, std::chrono::minutes utc_offset) : windows_(windows), offset_(utc_offset) {
    validate();
  }

  /// Lok Sabha 2019 windows, dates read on Indian Standard Time.
  static PhaseSchedule lok_sabha_2019() {
    using namespace std::chrono;
    const auto d = [](unsigned m, unsigned dd) { return year_month_day{year{2019}, month{m}, day{dd}}; };
    return PhaseSchedule({PhaseWindow{d(4, 11), d(4, 17)}, PhaseWindow{d(4, 18), d(4, 23)},
                          PhaseWindow{d(4, 24), d(4, 28)}, PhaseWindow{d(4, 29), d(5, 5)},
                          PhaseWindow{d(5, 6), d(5, 11)}, PhaseWindow{d(5, 12), d(5, 18)},
                          PhaseWindow{d(5, 19), d(5, 22)}},
                         minutes{330});
  }

  /// Applies `phase.N = YYYY-MM-DD..YYYY-MM-DD` and `timezone = +HH:MM`
  /// overrides on top of `base`. Unrelated keys are ignored.
  static PhaseSchedule from_config(const KeyValues& values, const PhaseSchedule& base = lok_sabha_2019()) {
    Windows windows = base.windows_;
    auto offset = base.offset_;
    for (const auto& [key, value] : values) {
      if (key == "timezone") {
        const auto parsed = parse_utc_offset(value);
        if (!parsed) throw Error(Errc::config, "timezone must look like +05:30, got '" + value + "'");
        offset = *parsed;
        continue;
      }
      if (key.rfind("phase.", 0) != 0) continue;
      const auto index_text = key.substr(6);
      if (index_text.size() != 1 || index_text[0] < '1' || index_text[0] > '7')
        throw Error(Errc::config, "unknown phase key '" + key + "' (expected phase.1 .. phase.7)");
      const auto dots = value.find("..");
      const auto start = dots == std::string::npos ? std::nullopt : parse_date(value.substr(0, dots));
      const auto end = dots == std::string::npos ? std::nullopt : parse_date(value.substr(dots + 2));
      if (!start || !end) throw Error(Errc::config, key + " must be YYYY-MM-DD..YYYY-MM-DD, got '" + value + "'");
      windows[static_cast<std::size_t>(index_text[0] - '1')] = PhaseWindow{*start, *end};
    }
    return PhaseSchedule(windows, offset);
  }

  const Windows& windows() const noexcept { return windows_; }
  std::chrono::minutes utc_offset() const noexcept { return offset_; }

  /// Pre before phase 1, Post after phase 7. A date that falls in a gap
  /// between two configured windows stays with the earlier phase.
  PhaseId assign(Timestamp ts) const {
    const std::chrono::sys_days date{civil_date(ts, offset_)};
    if (date < std::chrono::sys_days{windows_.front().start}) return PhaseId::pre;
    if (date > std::chrono::sys_days{windows_.back().end}) return PhaseId::post;
    for (std::size_t i = kVotingPhases; i-- > 0;) {
      if (date >= std::chrono::sys_days{windows_[i].start}) return voting_phase(static_cast<int>(i) + 1);
    }
    return PhaseId::pre;
  }

  KeyValues to_key_values() const {
    KeyValues out;
    for (std::size_t i = 0; i < kVotingPhases; ++i)
      out["phase." + std::to_string(i + 1)] = format_date(windows_[i].start) + ".." + format_date(windows_[i].end);
    out["timezone"] = format_utc_offset(offset_);
    return out;
  }

 private:
  void validate() const {
    for (std::size_t i = 0; i < kVotingPhases; ++i) {
      const auto& w = windows_[i];
      if (std::chrono::sys_days{w.start} > std::chrono::sys_days{w.end})
        throw Error(Errc::config, "phase " + std::to_string(i + 1) + " starts after it ends");
      if (i > 0 && std::chrono::sys_days{w.start} <= std::chrono::sys_days{windows_[i - 1].end})
        throw Error(Errc::config, "phase " + std::to_string(i + 1) + " overlaps or precedes phase " + std::to_string(i));
    }
  }

  Windows windows_;
  std::chrono::minutes offset_;
};

inline PhaseId assign_phase(Timestamp ts, const PhaseSchedule& schedule) { return schedule.assign(ts); }

}  // namespace hashscope
