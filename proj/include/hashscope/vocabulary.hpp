#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "hashscope/error.hpp"

namespace hashscope {

using WordId = std::uint32_t;

/// Dense token <-> id map. Ids follow insertion order.
class Vocabulary {
 public:
  WordId add(const std::string& token) {
    const auto [it, inserted] = ids_.try_emplace(token, static_cast<WordId>(tokens_.size()));
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  std::optional<WordId> find(const std::string& token) const {
    const auto it = ids_.find(token);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const std::string& token) const { return ids_.contains(token); }

  const std::string& token(WordId id) const {
    if (id >= tokens_.size()) throw Error(Errc::invalid_argument, "word id out of range");
    return tokens_[id];
  }

  std::size_t size() const noexcept { return tokens_.size(); }
  bool empty() const noexcept { return tokens_.empty(); }
  const std::vector<std::string>& tokens() const noexcept { return tokens_; }

 private:
  std::unordered_map<std::string, WordId> ids_;
  std::vector<std::string> tokens_;
};

}  // namespace hashscope
