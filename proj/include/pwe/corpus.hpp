#pragma once

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pwe/error.hpp"
#include "pwe/tagset.hpp"

namespace pwe {

using WordId = std::uint32_t;

inline constexpr WordId kNoWord = std::numeric_limits<WordId>::max();

struct TaggedToken {
  WordId word = 0;
  TagId tag = 0;

  friend bool operator==(const TaggedToken&, const TaggedToken&) = default;
};

/// Surface form plus raw tag string, as read from one `surface_TAG` token.
using RawToken = std::pair<std::string, std::string>;
using RawSentence = std::vector<RawToken>;

struct ParseOptions {
  bool lowercase = true;
  /// Untagged input: every whitespace token is a surface with tag `XX`.
  bool plain = false;
};

namespace detail {

inline void ascii_lower(std::string& s) {
  for (char& ch : s) {
    ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  }
}

inline bool is_space(char ch) {
  return ch == ' ' || ch == '\t' || ch == '\r' || ch == '\n' || ch == '\f' ||
         ch == '\v';
}

template <class F>
void for_each_field(std::string_view line, F&& f) {
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) f(line.substr(i, j - i));
    i = j;
  }
}

inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  for_each_field(line, [&](std::string_view f) { out.emplace_back(f); });
  return out;
}

}  // namespace detail

/// Splits one sentence of `surface_TAG` tokens on the last underscore.
/// Malformed tokens never fail: a missing or empty tag becomes `XX`, and a
/// token whose only underscore is its first byte is kept whole.
inline RawSentence parse_tagged_line(std::string_view line,
                                     const ParseOptions& options = {}) {
  RawSentence out;
  detail::for_each_field(line, [&](std::string_view token) {
    std::string surface;
    std::string tag;
    const auto cut = token.rfind('_');
    if (options.plain || cut == std::string_view::npos || cut == 0) {
      surface.assign(token);
      tag = "XX";
    } else {
      surface.assign(token.substr(0, cut));
      tag.assign(token.substr(cut + 1));
      if (tag.empty()) tag = "XX";
    }
    if (options.lowercase) detail::ascii_lower(surface);
    out.emplace_back(std::move(surface), std::move(tag));
  });
  return out;
}

/// Word inventory with dense ids in descending count order.
///
/// Per-word tag histograms are collected alongside the counts; they supply
/// the gold label (modal tag) for cluster-purity evaluation.
struct Vocabulary {
  std::vector<std::string> words;
  std::unordered_map<std::string, WordId> index;
  std::vector<std::uint64_t> counts;
  std::uint64_t total_tokens = 0;
  /// tag_counts[w] is sorted by tag id. May be empty when loaded from a
  /// vocabulary file without tag statistics.
  std::vector<std::vector<std::pair<TagId, std::uint64_t>>> tag_counts;

  std::size_t size() const { return words.size(); }

  bool contains(std::string_view word) const {
    return index.find(std::string(word)) != index.end();
  }

  /// Id of `word`, or -1 when out of vocabulary.
  std::int64_t find(std::string_view word) const {
    auto it = index.find(std::string(word));
    return it == index.end() ? -1 : static_cast<std::int64_t>(it->second);
  }

  bool has_tag_stats() const {
    return tag_counts.size() == words.size() && !words.empty();
  }

  /// Appends a word with the next id. Callers keep the count order.
  void push_back(std::string word, std::uint64_t count) {
    const auto id = static_cast<WordId>(words.size());
    if (!index.emplace(word, id).second) {
      throw Error("duplicate vocabulary entry '" + word + "'");
    }
    words.push_back(std::move(word));
    counts.push_back(count);
    total_tokens += count;
  }
};

/// Streaming frequency counter; `finish` applies the min-count cut.
class VocabularyBuilder {
 public:
  void add(const RawSentence& sentence) {
    for (const auto& [surface, tag] : sentence) {
      add(surface, tags_.id(tag));
    }
  }

  void add(const std::string& surface, TagId tag) {
    auto [it, inserted] = entries_.try_emplace(surface);
    Entry& e = it->second;
    if (inserted) e.first_seen = order_++;
    ++e.count;
    auto pos = std::lower_bound(
        e.tags.begin(), e.tags.end(), tag,
        [](const auto& p, TagId t) { return p.first < t; });
    if (pos != e.tags.end() && pos->first == tag) {
      ++pos->second;
    } else {
      e.tags.insert(pos, {tag, 1});
    }
    ++tokens_;
  }

  std::uint64_t tokens_seen() const { return tokens_; }

  Vocabulary finish(std::uint64_t min_count) const {
    if (min_count < 1) throw Error("min_count must be at least 1");
    if (tokens_ == 0) throw Error("empty corpus");
    std::vector<const std::pair<const std::string, Entry>*> kept;
    for (const auto& kv : entries_) {
      if (kv.second.count >= min_count) kept.push_back(&kv);
    }
    if (kept.empty()) {
      throw Error("no word reaches min_count " + std::to_string(min_count));
    }
    std::sort(kept.begin(), kept.end(), [](const auto* a, const auto* b) {
      if (a->second.count != b->second.count) {
        return a->second.count > b->second.count;
      }
      return a->second.first_seen < b->second.first_seen;
    });
    Vocabulary vocab;
    vocab.words.reserve(kept.size());
    for (const auto* kv : kept) {
      vocab.push_back(kv->first, kv->second.count);
      vocab.tag_counts.push_back(kv->second.tags);
    }
    return vocab;
  }

 private:
  struct Entry {
    std::uint64_t count = 0;
    std::uint64_t first_seen = 0;
    std::vector<std::pair<TagId, std::uint64_t>> tags;
  };

  TagSet tags_;
  std::unordered_map<std::string, Entry> entries_;
  std::uint64_t order_ = 0;
  std::uint64_t tokens_ = 0;
};

template <class SentenceRange>
Vocabulary build_vocabulary(const SentenceRange& sentences,
                            std::uint64_t min_count) {
  VocabularyBuilder builder;
  for (const RawSentence& s : sentences) builder.add(s);
  return builder.finish(min_count);
}

/// Calls f(line) for every line of a text file.
template <class F>
void for_each_line(const std::string& path, F&& f) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::string line;
  while (std::getline(in, line)) f(std::string_view(line));
  if (in.bad()) throw Error("read failure on '" + path + "'");
}

inline Vocabulary build_vocabulary_from_file(const std::string& path,
                                             std::uint64_t min_count,
                                             const ParseOptions& options = {}) {
  VocabularyBuilder builder;
  for_each_line(path, [&](std::string_view line) {
    builder.add(parse_tagged_line(line, options));
  });
  return builder.finish(min_count);
}

/// Maps a parsed sentence to ids. Out-of-vocabulary tokens are dropped and
/// the remaining positions close up.
inline std::vector<TaggedToken> encode_sentence(const RawSentence& sentence,
                                                const Vocabulary& vocab,
                                                const TagSet& tags) {
  std::vector<TaggedToken> out;
  out.reserve(sentence.size());
  for (const auto& [surface, tag] : sentence) {
    auto it = vocab.index.find(surface);
    if (it == vocab.index.end()) continue;
    out.push_back({it->second, tags.id(tag)});
  }
  return out;
}

/// Parses and encodes one line in a single pass, reusing `surface` as
/// scratch. Equivalent to encode_sentence(parse_tagged_line(line)).
inline void encode_tagged_line(std::string_view line, const Vocabulary& vocab,
                               const TagSet& tags, const ParseOptions& options,
                               std::vector<TaggedToken>& out,
                               std::string& surface) {
  out.clear();
  detail::for_each_field(line, [&](std::string_view token) {
    const auto cut = token.rfind('_');
    std::string_view tag = "XX";
    if (options.plain || cut == std::string_view::npos || cut == 0) {
      surface.assign(token);
    } else {
      surface.assign(token.substr(0, cut));
      if (cut + 1 < token.size()) tag = token.substr(cut + 1);
    }
    if (options.lowercase) detail::ascii_lower(surface);
    auto it = vocab.index.find(surface);
    if (it != vocab.index.end()) out.push_back({it->second, tags.id(tag)});
  });
}

/// Most frequent corpus tag of `word`; ties go to the lower tag id. Words
/// without statistics report `XX`.
inline TagId dominant_tag(WordId word, const Vocabulary& vocab) {
  if (word >= vocab.tag_counts.size()) return TagSet::kCatchAll;
  TagId best = TagSet::kCatchAll;
  std::uint64_t best_count = 0;
  for (const auto& [tag, count] : vocab.tag_counts[word]) {
    if (count > best_count || (count == best_count && tag < best)) {
      best = tag;
      best_count = count;
    }
  }
  return best;
}

/// Probability of keeping a token under frequent-word subsampling with
/// threshold `t`; 1 when subsampling is off.
inline double keep_probability(std::uint64_t count, std::uint64_t total,
                               double t) {
  if (t <= 0 || count == 0) return 1.0;
  const double f = static_cast<double>(count);
  const double scaled = t * static_cast<double>(total);
  return (std::sqrt(f / scaled) + 1.0) * scaled / f;
}

}  // namespace pwe
