#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "pwe/error.hpp"
#include "pwe/model.hpp"

namespace pwe {

/// Trained vectors as exchanged through vector files: one row per word.
struct WordVectors {
  std::vector<std::string> words;
  Matrix<float> matrix;

  WordVectors() = default;
  WordVectors(std::vector<std::string> w, Matrix<float> m)
      : words(std::move(w)), matrix(std::move(m)) {
    if (words.size() != matrix.rows()) {
      throw Error("word list and vector matrix disagree in size");
    }
    reindex();
  }

  std::size_t size() const { return words.size(); }
  std::size_t dim() const { return matrix.cols(); }

  /// Row of `word`, or -1 when absent.
  std::int64_t find(std::string_view word) const {
    auto it = index_.find(std::string(word));
    return it == index_.end() ? -1 : static_cast<std::int64_t>(it->second);
  }

  void reindex() {
    index_.clear();
    for (std::size_t i = 0; i < words.size(); ++i) {
      if (!index_.emplace(words[i], static_cast<WordId>(i)).second) {
        throw Error("duplicate word '" + words[i] + "'");
      }
    }
  }

 private:
  std::unordered_map<std::string, WordId> index_;
};

/// Copies the input matrix of a trained model together with its vocabulary.
template <class Real>
WordVectors to_word_vectors(const std::vector<std::string>& words, const Matrix<Real>& m) {
  Matrix<float> out(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.values().size(); ++i) {
    out.values()[i] = static_cast<float>(m.values()[i]);
  }
  return WordVectors(words, std::move(out));
}

}  // namespace pwe
