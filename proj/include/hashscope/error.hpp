#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace hashscope {

enum class Errc {
  malformed,          // input bytes are not a valid JSON object / UTF-8
  schema,             // required field missing or of the wrong type
  timestamp,          // timestamp field is not RFC 3339
  empty_input,
  insufficient_data,
  no_eligible_tweet,
  empty_corpus,
  degenerate,
  numeric,
  numeric_divergence,
  zero_vector,
  oov,
  oov_battle,
  unlabeled,
  invalid_argument,
  config,
  io,
  invariant,
};

inline std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::malformed: return "malformed";
    case Errc::schema: return "schema";
    case Errc::timestamp: return "timestamp";
    case Errc::empty_input: return "empty-input";
    case Errc::insufficient_data: return "insufficient-data";
    case Errc::no_eligible_tweet: return "no-eligible-tweet";
    case Errc::empty_corpus: return "empty-corpus";
    case Errc::degenerate: return "degenerate";
    case Errc::numeric: return "numeric";
    case Errc::numeric_divergence: return "numeric-divergence";
    case Errc::zero_vector: return "zero-vector";
    case Errc::oov: return "oov";
    case Errc::oov_battle: return "oov-battle";
    case Errc::unlabeled: return "unlabeled";
    case Errc::invalid_argument: return "invalid-argument";
    case Errc::config: return "config";
    case Errc::io: return "io";
    case Errc::invariant: return "invariant";
  }
  return "unknown";
}

/// Every failure surfaced by the library. `details()` carries auxiliary
/// tokens: spelling hints for an out-of-vocabulary query, or the list of
/// unlabeled hashtags for influence scoring.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, std::vector<std::string> details = {})
      : std::runtime_error(std::string(errc_name(code)) + ": " + message),
        code_(code),
        details_(std::move(details)) {}

  Errc code() const noexcept { return code_; }
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  Errc code_;
  std::vector<std::string> details_;
};

}  // namespace hashscope
