#pragma once

// Fixtures shared by the unit and acceptance suites.

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "pwe/pwe.hpp"

namespace pwe::testing {

/// Tagged sentences from a small fixed grammar. Each tag class draws from
/// its own word pool with a skewed distribution, so the corpus has both
/// frequency structure and syntactic regularity. 50 distinct words.
inline std::vector<std::string> synthetic_tagged_lines(std::size_t tokens, std::uint64_t seed) {
  struct Pool {
    std::string_view tag;
    std::vector<std::string> words;
  };
  auto pool = [](std::string_view tag, std::string_view stem, int n) {
    Pool p{tag, {}};
    for (int i = 0; i < n; ++i) p.words.push_back(std::string(stem) + std::to_string(i));
    return p;
  };
  const std::vector<Pool> pools = {
      {"DT", {"the", "a"}},
      pool("NN", "noun", 16),
      pool("VBZ", "runs", 6),
      pool("VBD", "ran", 6),
      pool("JJ", "big", 8),
      pool("RB", "fast", 5),
      {"IN", {"in", "on", "of"}},
      {"PRP", {"he", "she", "it"}},
      {".", {"."}},
  };
  enum { DT, NN, VBZ, VBD, JJ, RB, IN, PRP, DOT };
  const std::vector<std::vector<int>> templates = {
      {DT, JJ, NN, VBZ, DT, NN, DOT},
      {PRP, VBD, RB, DOT},
      {DT, NN, IN, DT, NN, VBD, JJ, DOT},
      {PRP, VBZ, DT, JJ, NN, RB, DOT},
      {DT, NN, VBD, IN, DT, JJ, NN, DOT},
  };
  Rng rng(seed);
  std::vector<std::string> lines;
  std::size_t emitted = 0;
  while (emitted < tokens) {
    const auto& t = templates[rng.below(templates.size())];
    std::string line;
    for (int cls : t) {
      const auto& p = pools[static_cast<std::size_t>(cls)];
      // skewed: min of two uniform draws favours low indices
      const auto i = std::min(rng.below(p.words.size()), rng.below(p.words.size()));
      if (!line.empty()) line += ' ';
      line += p.words[i];
      line += '_';
      line += p.tag;
    }
    emitted += t.size();
    lines.push_back(std::move(line));
  }
  return lines;
}

struct SyntheticSetup {
  Vocabulary vocab;
  EncodedCorpus corpus;
  NegativeTable table;
};

inline SyntheticSetup synthetic_setup(std::size_t tokens, std::uint64_t seed,
                                      std::size_t table_size = 1'000'000) {
  const auto lines = synthetic_tagged_lines(tokens, seed);
  VocabularyBuilder builder;
  std::vector<RawSentence> parsed;
  for (const auto& l : lines) {
    parsed.push_back(parse_tagged_line(l));
    builder.add(parsed.back());
  }
  SyntheticSetup s{builder.finish(1), {}, {}};
  const TagSet tags;
  for (const auto& p : parsed) s.corpus.add(encode_sentence(p, s.vocab, tags));
  s.table = build_negative_table(s.vocab, 0.75, table_size);
  return s;
}

/// Random double-precision model for gradient checks.
template <class Real = double>
ModelParameters<Real> random_model(std::size_t vocab, std::size_t dim, std::size_t tags,
                                   int window, Rng& rng) {
  ModelParameters<Real> p{{Matrix<Real>(vocab, dim), Matrix<Real>(vocab, dim)},
                          RelevanceTensor<Real>(window, tags)};
  for (Real& x : p.model.input.values()) x = static_cast<Real>(rng.uniform(-0.5, 0.5));
  for (Real& x : p.model.output.values()) x = static_cast<Real>(rng.uniform(-0.5, 0.5));
  for (Real& x : p.phi.values()) x = static_cast<Real>(rng.uniform(0.5, 1.5));
  return p;
}

/// Random example with a non-empty subset of offsets in [-c, c] \ {0}.
inline TrainingExample random_example(std::size_t vocab, std::size_t tags, int window,
                                      Rng& rng) {
  TrainingExample ex;
  ex.center = {static_cast<WordId>(rng.below(vocab)), static_cast<TagId>(rng.below(tags))};
  while (ex.context.empty()) {
    for (int i = -window; i <= window; ++i) {
      if (i == 0 || rng.uniform() < 0.3) continue;
      ex.context.push_back({i, {static_cast<WordId>(rng.below(vocab)),
                                static_cast<TagId>(rng.below(tags))}});
    }
  }
  return ex;
}

/// k negatives, none equal to `exclude`; repeats allowed.
inline std::vector<WordId> random_negatives(std::size_t vocab, std::size_t k, WordId exclude,
                                            Rng& rng) {
  std::vector<WordId> out;
  while (out.size() < k) {
    const auto w = static_cast<WordId>(rng.below(vocab));
    if (w != exclude) out.push_back(w);
  }
  return out;
}

/// Largest relative error between analytic gradients and central finite
/// differences of the NS loss, over every parameter one PWE (or CBOW, when
/// `weighted` is false) example touches.
inline double max_cbow_gradient_error(ModelParameters<double>& p, const TrainingExample& ex,
                                      const std::vector<WordId>& negatives, bool weighted,
                                      double eps = 1e-4) {
  auto loss = [&] {
    return weighted ? pwe_loss<double>(ex, p.model, p.phi, negatives)
                    : cbow_loss<double>(ex, p.model, negatives);
  };
  ExampleGradients<double> g;
  if (weighted) {
    g = pwe_gradients<double>(ex, p.model, p.phi, negatives);
  } else {
    RelevanceTensor<double> ones(p.phi.window(), p.phi.tags(), 1.0);
    g = pwe_gradients<double>(ex, p.model, ones, negatives);
  }
  double worst = 0;
  for (const auto& [word, grad] : g.input_rows) {
    const auto num = numeric_gradient(loss, p.model.input.row(word), eps);
    for (std::size_t j = 0; j < grad.size(); ++j) {
      worst = std::max(worst, relative_error(grad[j], num[j]));
    }
  }
  for (const auto& [word, grad] : g.output_rows) {
    const auto num = numeric_gradient(loss, p.model.output.row(word), eps);
    for (std::size_t j = 0; j < grad.size(); ++j) {
      worst = std::max(worst, relative_error(grad[j], num[j]));
    }
  }
  if (weighted) {
    for (std::size_t k = 0; k < ex.context.size(); ++k) {
      const auto& c = ex.context[k];
      const double num =
          numeric_gradient(loss, p.phi.at(c.offset, c.token.tag, ex.center.tag), eps);
      worst = std::max(worst, relative_error(g.phi[k], num));
    }
  }
  return worst;
}

inline double max_sg_gradient_error(ModelParameters<double>& p, TaggedToken center,
                                    TaggedToken context, const std::vector<WordId>& negatives,
                                    double eps = 1e-4) {
  auto loss = [&] { return sg_loss<double>(center, context, p.model, negatives); };
  const auto g = sg_gradients<double>(center, context, p.model, negatives);
  double worst = 0;
  for (const auto& [word, grad] : g.input_rows) {
    const auto num = numeric_gradient(loss, p.model.input.row(word), eps);
    for (std::size_t j = 0; j < grad.size(); ++j) {
      worst = std::max(worst, relative_error(grad[j], num[j]));
    }
  }
  for (const auto& [word, grad] : g.output_rows) {
    const auto num = numeric_gradient(loss, p.model.output.row(word), eps);
    for (std::size_t j = 0; j < grad.size(); ++j) {
      worst = std::max(worst, relative_error(grad[j], num[j]));
    }
  }
  return worst;
}

}  // namespace pwe::testing
