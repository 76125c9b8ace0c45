#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pwe/corpus.hpp"
#include "pwe/error.hpp"
#include "pwe/random.hpp"

namespace pwe {

/// Unigram^alpha sampling table. Word w owns the slots between the rounded
/// cumulative boundaries round(size * F(w-1)) and round(size * F(w)), so its
/// slot count is within one of size * count(w)^alpha / sum(count^alpha).
struct NegativeTable {
  std::vector<WordId> table;

  std::size_t size() const { return table.size(); }
};

inline NegativeTable build_negative_table(
    std::span<const std::uint64_t> counts, double alpha = 0.75,
    std::size_t size = 10'000'000) {
  if (counts.empty()) throw Error("negative table needs a non-empty vocabulary");
  if (size < counts.size()) {
    throw Error("negative table size " + std::to_string(size) +
                " is smaller than the vocabulary (" +
                std::to_string(counts.size()) + ")");
  }
  std::vector<double> weight(counts.size());
  double total = 0;
  for (std::size_t w = 0; w < counts.size(); ++w) {
    weight[w] = std::pow(static_cast<double>(counts[w]), alpha);
    total += weight[w];
  }
  if (!(total > 0)) throw Error("negative table weights sum to zero");

  NegativeTable out;
  out.table.resize(size);
  double cumulative = 0;
  std::size_t begin = 0;
  for (std::size_t w = 0; w < counts.size(); ++w) {
    cumulative += weight[w];
    std::size_t end =
        w + 1 == counts.size()
            ? size
            : static_cast<std::size_t>(
                  std::llround(cumulative / total * static_cast<double>(size)));
    end = std::min(std::max(end, begin), size);
    for (std::size_t s = begin; s < end; ++s) {
      out.table[s] = static_cast<WordId>(w);
    }
    begin = end;
  }
  return out;
}

inline NegativeTable build_negative_table(const Vocabulary& vocab,
                                          double alpha = 0.75,
                                          std::size_t size = 10'000'000) {
  return build_negative_table(std::span<const std::uint64_t>(vocab.counts),
                              alpha, size);
}

/// Draws a word different from `exclude`, re-drawing on collision. After 100
/// attempts the last draw is returned as is.
inline WordId draw_negative(const NegativeTable& table, Rng& rng,
                            WordId exclude = kNoWord) {
  WordId w = table.table[rng.below(table.size())];
  for (int attempt = 1; attempt < 100 && w == exclude; ++attempt) {
    w = table.table[rng.below(table.size())];
  }
  return w;
}

}  // namespace pwe
