#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>

namespace pwe {

using TagId = std::uint32_t;

/// Fixed Penn Treebank inventory: 36 word tags, 6 symbol tags, then the
/// catch-all `XX` that every unknown tag string resolves to.
class TagSet {
 public:
  static constexpr std::size_t kWordTags = 36;
  static constexpr std::size_t kSymbolTags = 6;
  static constexpr std::size_t kSize = kWordTags + kSymbolTags + 1;
  static constexpr TagId kCatchAll = kSize - 1;

  static constexpr std::array<std::string_view, kSize> kTags = {
      "CC",  "CD",   "DT",  "EX",  "FW",   "IN",  "JJ",  "JJR", "JJS",
      "LS",  "MD",   "NN",  "NNS", "NNP",  "NNPS", "PDT", "POS", "PRP",
      "PRP$", "RB",  "RBR", "RBS", "RP",   "SYM", "TO",  "UH",  "VB",
      "VBD", "VBG",  "VBN", "VBP", "VBZ",  "WDT", "WP",  "WP$", "WRB",
      // symbol tags
      ".",   ",",    ":",   "``",  "''",   "$",
      "XX"};

  TagSet() {
    for (std::size_t i = 0; i < kSize; ++i) {
      index_.emplace(kTags[i], static_cast<TagId>(i));
    }
  }

  static constexpr std::size_t size() { return kSize; }

  TagId id(std::string_view tag) const {
    auto it = index_.find(tag);
    return it == index_.end() ? kCatchAll : it->second;
  }

  std::string_view name(TagId id) const {
    return id < kSize ? kTags[id] : kTags[kCatchAll];
  }

 private:
  std::unordered_map<std::string_view, TagId> index_;
};

}  // namespace pwe
