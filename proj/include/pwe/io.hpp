#pragma once

#include <algorithm>
#include <bit>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pwe/corpus.hpp"
#include "pwe/error.hpp"
#include "pwe/model.hpp"
#include "pwe/tagset.hpp"
#include "pwe/vectors.hpp"

namespace pwe {

namespace detail {

inline std::ofstream open_out(const std::string& path, bool binary = false) {
  std::ofstream out(path, binary ? std::ios::binary | std::ios::trunc : std::ios::trunc);
  if (!out) throw Error("cannot write '" + path + "'");
  return out;
}

inline std::ifstream open_in(const std::string& path, bool binary = false) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw Error("cannot open '" + path + "'");
  return in;
}

inline void finish_write(std::ostream& out, const std::string& name) {
  out.flush();
  if (!out) throw Error("write failure on '" + name + "'");
}

inline std::string where(const std::string& name, std::size_t line) {
  return name + ":" + std::to_string(line) + ": ";
}

inline bool parse_size(const std::string& s, std::size_t& out) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) return false;
  errno = 0;
  char* end = nullptr;
  const auto v = std::strtoull(s.c_str(), &end, 10);
  if (errno != 0 || *end != '\0') return false;
  out = static_cast<std::size_t>(v);
  return true;
}

inline bool parse_real(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0';
}

/// `V d` header shared by both vector formats.
inline std::pair<std::size_t, std::size_t> parse_header(const std::string& line,
                                                        const std::string& name) {
  const auto f = split_fields(line);
  std::size_t rows = 0, dim = 0;
  if (f.size() != 2 || !parse_size(f[0], rows) || !parse_size(f[1], dim) || rows < 1 ||
      dim < 1) {
    throw Error(where(name, 1) + "expected header 'vocab_size dim' with both at least 1");
  }
  return {rows, dim};
}

inline void check_word(const std::string& word) {
  if (word.empty()) throw Error("cannot save an empty word");
  for (char ch : word) {
    if (is_space(ch)) throw Error("cannot save word containing whitespace: '" + word + "'");
  }
}

inline std::uint32_t to_little_endian(std::uint32_t x) {
  if constexpr (std::endian::native == std::endian::big) {
    x = ((x & 0xFF) << 24) | ((x & 0xFF00) << 8) | ((x >> 8) & 0xFF00) | (x >> 24);
  }
  return x;
}

/// Values a trained embedding never holds; seeing one means the file was
/// written with the other byte order or is corrupt.
inline bool implausible(float x) {
  return !std::isfinite(x) || std::abs(x) > 1e6f ||
         std::fpclassify(x) == FP_SUBNORMAL;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Text vectors: `V d`, then `word v1 ... vd` with 6 significant digits.

inline void save_vectors_text(const WordVectors& v, std::ostream& out) {
  out << v.size() << ' ' << v.dim() << '\n';
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    detail::check_word(v.words[i]);
    out << v.words[i];
    for (float x : v.matrix.row(i)) {
      if (!std::isfinite(x)) throw Error("cannot save non-finite value for '" + v.words[i] + "'");
      std::snprintf(buf, sizeof buf, "%.6g", static_cast<double>(x));
      out << ' ' << buf;
    }
    out << '\n';
  }
}

inline void save_vectors_text(const WordVectors& v, const std::string& path) {
  auto out = detail::open_out(path);
  save_vectors_text(v, out);
  detail::finish_write(out, path);
}

inline WordVectors load_vectors_text(std::istream& in, const std::string& name = "vectors") {
  std::string line;
  if (!std::getline(in, line)) throw Error(detail::where(name, 1) + "missing header");
  const auto [rows, dim] = detail::parse_header(line, name);
  std::vector<std::string> words;
  std::vector<float> data;
  std::size_t lineno = 1;
  for (std::size_t r = 0; r < rows; ++r) {
    ++lineno;
    if (!std::getline(in, line)) {
      throw Error(detail::where(name, lineno) + "header promises " + std::to_string(rows) +
                  " vectors but the file ends after " + std::to_string(r));
    }
    const auto f = detail::split_fields(line);
    if (f.size() != dim + 1) {
      throw Error(detail::where(name, lineno) + "expected a word and " + std::to_string(dim) +
                  " values, found " + std::to_string(f.size()) + " fields");
    }
    for (std::size_t j = 0; j < dim; ++j) {
      double x = 0;
      if (!detail::parse_real(f[j + 1], x) || !std::isfinite(x)) {
        throw Error(detail::where(name, lineno) + "bad value '" + f[j + 1] + "'");
      }
      data.push_back(static_cast<float>(x));
    }
    words.push_back(f[0]);
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::split_fields(line).empty()) {
      throw Error(detail::where(name, lineno) + "more vectors than the header's " +
                  std::to_string(rows));
    }
  }
  try {
    return WordVectors(std::move(words), Matrix<float>(rows, dim, std::move(data)));
  } catch (const Error& e) {
    throw Error(name + ": " + e.what());
  }
}

inline WordVectors load_vectors_text(const std::string& path) {
  auto in = detail::open_in(path);
  return load_vectors_text(in, path);
}

// ---------------------------------------------------------------------------
// Binary vectors: ASCII `V d\n`, then per word the word, one space, d
// little-endian float32 values and a newline.

inline void save_vectors_binary(const WordVectors& v, std::ostream& out) {
  out << v.size() << ' ' << v.dim() << '\n';
  for (std::size_t i = 0; i < v.size(); ++i) {
    detail::check_word(v.words[i]);
    out << v.words[i] << ' ';
    for (float x : v.matrix.row(i)) {
      const auto bits = detail::to_little_endian(std::bit_cast<std::uint32_t>(x));
      char bytes[4];
      std::memcpy(bytes, &bits, 4);
      out.write(bytes, 4);
    }
    out << '\n';
  }
}

inline void save_vectors_binary(const WordVectors& v, const std::string& path) {
  auto out = detail::open_out(path, true);
  save_vectors_binary(v, out);
  detail::finish_write(out, path);
}

inline WordVectors load_vectors_binary(std::istream& in, const std::string& name = "vectors") {
  std::string line;
  if (!std::getline(in, line)) throw Error(detail::where(name, 1) + "missing header");
  const auto [rows, dim] = detail::parse_header(line, name);
  std::vector<std::string> words;
  std::vector<float> data;
  for (std::size_t r = 0; r < rows; ++r) {
    std::string word;
    int ch = in.get();
    while (ch == '\n') ch = in.get();
    while (ch != std::char_traits<char>::eof() && ch != ' ') {
      word.push_back(static_cast<char>(ch));
      if (word.size() > 10'000) {
        throw Error(name + ": vector " + std::to_string(r + 1) + ": unterminated word");
      }
      ch = in.get();
    }
    if (ch == std::char_traits<char>::eof()) {
      throw Error(name + ": vector " + std::to_string(r + 1) + " of " + std::to_string(rows) +
                  ": file truncated");
    }
    for (std::size_t j = 0; j < dim; ++j) {
      char bytes[4];
      if (!in.read(bytes, 4)) {
        throw Error(name + ": vector " + std::to_string(r + 1) + " ('" + word +
                    "'): file truncated");
      }
      std::uint32_t bits = 0;
      std::memcpy(&bits, bytes, 4);
      const float x = std::bit_cast<float>(detail::to_little_endian(bits));
      if (detail::implausible(x)) {
        throw Error(name + ": vector " + std::to_string(r + 1) + " ('" + word +
                    "'): implausible value; wrong byte order or corrupt file");
      }
      data.push_back(x);
    }
    words.push_back(std::move(word));
  }
  try {
    return WordVectors(std::move(words), Matrix<float>(rows, dim, std::move(data)));
  } catch (const Error& e) {
    throw Error(name + ": " + e.what());
  }
}

inline WordVectors load_vectors_binary(const std::string& path) {
  auto in = detail::open_in(path, true);
  return load_vectors_binary(in, path);
}

/// Binary when the path ends in `.bin`, text otherwise.
inline WordVectors load_vectors(const std::string& path) {
  return path.ends_with(".bin") ? load_vectors_binary(path) : load_vectors_text(path);
}

inline void save_vectors(const WordVectors& v, const std::string& path) {
  if (path.ends_with(".bin")) {
    save_vectors_binary(v, path);
  } else {
    save_vectors_text(v, path);
  }
}

// ---------------------------------------------------------------------------
// Relevance tensor: `c P`, then per offset in [-c..-1, 1..c] a line
// `offset i` and P rows (context tag) of P values (center tag).

template <class Real>
void save_phi(const RelevanceTensor<Real>& phi, std::ostream& out) {
  out << phi.window() << ' ' << phi.tags() << '\n';
  char buf[32];
  for (std::size_t s = 0; s < phi.offsets(); ++s) {
    const int offset = phi.offset_at(s);
    out << "offset " << offset << '\n';
    for (std::size_t a = 0; a < phi.tags(); ++a) {
      for (std::size_t b = 0; b < phi.tags(); ++b) {
        std::snprintf(buf, sizeof buf, "%.9g",
                      static_cast<double>(phi.at(offset, static_cast<TagId>(a),
                                                 static_cast<TagId>(b))));
        out << (b ? " " : "") << buf;
      }
      out << '\n';
    }
  }
}

template <class Real>
void save_phi(const RelevanceTensor<Real>& phi, const std::string& path) {
  auto out = detail::open_out(path);
  save_phi(phi, out);
  detail::finish_write(out, path);
}

template <class Real = float>
RelevanceTensor<Real> load_phi(std::istream& in, const std::string& name = "phi") {
  std::string line;
  std::size_t lineno = 1;
  if (!std::getline(in, line)) throw Error(detail::where(name, 1) + "missing header");
  auto f = detail::split_fields(line);
  std::size_t window = 0, tags = 0;
  if (f.size() != 2 || !detail::parse_size(f[0], window) || !detail::parse_size(f[1], tags) ||
      window < 1 || tags < 1 || window > 10'000 || tags > 10'000) {
    throw Error(detail::where(name, 1) + "expected header 'window tags'");
  }
  RelevanceTensor<Real> phi(static_cast<int>(window), tags);
  for (std::size_t s = 0; s < phi.offsets(); ++s) {
    const int offset = phi.offset_at(s);
    ++lineno;
    if (!std::getline(in, line)) {
      throw Error(detail::where(name, lineno) + "missing block for offset " +
                  std::to_string(offset));
    }
    f = detail::split_fields(line);
    if (f.size() != 2 || f[0] != "offset" || f[1] != std::to_string(offset)) {
      throw Error(detail::where(name, lineno) + "expected 'offset " + std::to_string(offset) +
                  "'");
    }
    for (std::size_t a = 0; a < tags; ++a) {
      ++lineno;
      if (!std::getline(in, line)) {
        throw Error(detail::where(name, lineno) + "offset " + std::to_string(offset) +
                    " block ends early");
      }
      f = detail::split_fields(line);
      if (f.size() != tags) {
        throw Error(detail::where(name, lineno) + "expected " + std::to_string(tags) +
                    " values, found " + std::to_string(f.size()));
      }
      for (std::size_t b = 0; b < tags; ++b) {
        double x = 0;
        if (!detail::parse_real(f[b], x) || !std::isfinite(x)) {
          throw Error(detail::where(name, lineno) + "bad value '" + f[b] + "'");
        }
        phi.at(offset, static_cast<TagId>(a), static_cast<TagId>(b)) = static_cast<Real>(x);
      }
    }
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!detail::split_fields(line).empty()) {
      throw Error(detail::where(name, lineno) + "trailing data after the last offset block");
    }
  }
  return phi;
}

template <class Real = float>
RelevanceTensor<Real> load_phi(const std::string& path) {
  auto in = detail::open_in(path);
  return load_phi<Real>(in, path);
}

// ---------------------------------------------------------------------------
// Vocabulary: `word<TAB>count`, id = line number (0-based). Tag statistics
// live in a sidecar, one line per word in id order: `word<TAB>TAG count ...`.

inline std::string tag_stats_path(const std::string& vocab_path) { return vocab_path + ".tags"; }

inline void save_vocabulary(const Vocabulary& vocab, std::ostream& out) {
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    out << vocab.words[w] << '\t' << vocab.counts[w] << '\n';
  }
}

inline void save_tag_stats(const Vocabulary& vocab, std::ostream& out) {
  static const TagSet tags;
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    out << vocab.words[w] << '\t';
    if (w < vocab.tag_counts.size()) {
      bool first = true;
      for (const auto& [tag, count] : vocab.tag_counts[w]) {
        out << (first ? "" : " ") << tags.name(tag) << ' ' << count;
        first = false;
      }
    }
    out << '\n';
  }
}

/// Writes the vocabulary and, when present, its tag-statistics sidecar.
inline void save_vocabulary(const Vocabulary& vocab, const std::string& path) {
  auto out = detail::open_out(path);
  save_vocabulary(vocab, out);
  detail::finish_write(out, path);
  if (vocab.has_tag_stats()) {
    const auto side = tag_stats_path(path);
    auto tag_out = detail::open_out(side);
    save_tag_stats(vocab, tag_out);
    detail::finish_write(tag_out, side);
  }
}

inline Vocabulary load_vocabulary(std::istream& in, const std::string& name = "vocab") {
  Vocabulary vocab;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::size_t count = 0;
    if (tab == std::string::npos || tab == 0 ||
        !detail::parse_size(line.substr(tab + 1), count) || count == 0) {
      throw Error(detail::where(name, n) + "expected 'word<TAB>count'");
    }
    try {
      vocab.push_back(line.substr(0, tab), count);
    } catch (const Error& e) {
      throw Error(detail::where(name, n) + e.what());
    }
  }
  if (vocab.size() == 0) throw Error(name + ": empty vocabulary");
  return vocab;
}

inline void load_tag_stats(Vocabulary& vocab, std::istream& in, const std::string& name) {
  static const TagSet tags;
  std::vector<std::vector<std::pair<TagId, std::uint64_t>>> stats(vocab.size());
  std::string line;
  std::size_t w = 0;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw Error(detail::where(name, n) + "expected 'word<TAB>...'");
    if (w >= vocab.size() || line.substr(0, tab) != vocab.words[w]) {
      throw Error(detail::where(name, n) + "word does not match vocabulary entry " +
                  std::to_string(w));
    }
    const auto f = detail::split_fields(std::string_view(line).substr(tab + 1));
    if (f.size() % 2 != 0) throw Error(detail::where(name, n) + "expected 'TAG count' pairs");
    for (std::size_t i = 0; i < f.size(); i += 2) {
      std::size_t count = 0;
      if (!detail::parse_size(f[i + 1], count)) {
        throw Error(detail::where(name, n) + "bad count '" + f[i + 1] + "'");
      }
      stats[w].emplace_back(tags.id(f[i]), count);
    }
    std::sort(stats[w].begin(), stats[w].end());
    ++w;
  }
  if (w != vocab.size()) {
    throw Error(name + ": tag statistics cover " + std::to_string(w) + " of " +
                std::to_string(vocab.size()) + " words");
  }
  vocab.tag_counts = std::move(stats);
}

/// Loads a vocabulary file, plus its `.tags` sidecar when one exists (or
/// the explicit `tag_stats` path).
inline Vocabulary load_vocabulary(const std::string& path, const std::string& tag_stats = "") {
  auto in = detail::open_in(path);
  Vocabulary vocab = load_vocabulary(in, path);
  const std::string side = tag_stats.empty() ? tag_stats_path(path) : tag_stats;
  if (!tag_stats.empty() || std::filesystem::exists(side)) {
    auto tin = detail::open_in(side);
    load_tag_stats(vocab, tin, side);
  }
  return vocab;
}

}  // namespace pwe
