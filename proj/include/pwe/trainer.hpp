#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "pwe/corpus.hpp"
#include "pwe/error.hpp"
#include "pwe/model.hpp"
#include "pwe/negative.hpp"
#include "pwe/random.hpp"
#include "pwe/tagset.hpp"

namespace pwe {

// ---------------------------------------------------------------------------
// Sentence sources. A source hands each worker its shard of encoded
// sentences through visit(worker, workers, f), calling f(span<const TaggedToken>).

/// Encoded sentences held in memory; shards are contiguous sentence ranges.
class EncodedCorpus {
 public:
  EncodedCorpus() = default;
  explicit EncodedCorpus(std::vector<std::vector<TaggedToken>> sentences)
      : sentences_(std::move(sentences)) {}

  void add(std::vector<TaggedToken> sentence) { sentences_.push_back(std::move(sentence)); }

  const std::vector<std::vector<TaggedToken>>& sentences() const { return sentences_; }

  std::uint64_t tokens() const {
    std::uint64_t n = 0;
    for (const auto& s : sentences_) n += s.size();
    return n;
  }

  template <class F>
  void visit(std::size_t worker, std::size_t workers, F&& f) const {
    const std::size_t n = sentences_.size();
    const std::size_t begin = n * worker / workers;
    const std::size_t end = n * (worker + 1) / workers;
    for (std::size_t i = begin; i < end; ++i) {
      f(std::span<const TaggedToken>(sentences_[i]));
    }
  }

 private:
  std::vector<std::vector<TaggedToken>> sentences_;
};

/// A tagged text file, split into equal byte ranges per worker. Each range
/// starts at the first line beginning at or after its start offset, so every
/// line belongs to exactly one worker.
class TaggedTextFile {
 public:
  TaggedTextFile(std::string path, const Vocabulary& vocab, ParseOptions options = {})
      : path_(std::move(path)), vocab_(&vocab), options_(options) {
    std::ifstream in(path_, std::ios::binary | std::ios::ate);
    if (!in) throw Error("cannot open corpus '" + path_ + "'");
    bytes_ = static_cast<std::uint64_t>(in.tellg());
  }

  /// Token total used for the learning-rate schedule.
  std::uint64_t tokens() const { return vocab_->total_tokens; }

  template <class F>
  void visit(std::size_t worker, std::size_t workers, F&& f) const {
    const std::uint64_t begin = bytes_ * worker / workers;
    const std::uint64_t end = bytes_ * (worker + 1) / workers;
    std::ifstream in(path_, std::ios::binary);
    if (!in) throw Error("cannot open corpus '" + path_ + "'");
    std::uint64_t pos = begin;
    std::string line;
    if (begin > 0) {
      in.seekg(static_cast<std::streamoff>(begin - 1));
      char prev = 0;
      in.get(prev);
      if (prev != '\n') {
        std::getline(in, line);
        pos += line.size() + 1;
      }
    }
    TagSet tags;
    std::vector<TaggedToken> encoded;
    std::string scratch;
    while (pos < end && std::getline(in, line)) {
      pos += line.size() + 1;
      encode_tagged_line(line, *vocab_, tags, options_, encoded, scratch);
      f(std::span<const TaggedToken>(encoded));
    }
    if (in.bad()) throw Error("read failure on corpus '" + path_ + "'");
  }

 private:
  std::string path_;
  const Vocabulary* vocab_;
  ParseOptions options_;
  std::uint64_t bytes_ = 0;
};

// ---------------------------------------------------------------------------
// Windows

/// Fills `ex` with the center at `t` and every neighbour within `reach`
/// positions, clipped at the sentence boundaries, in offset order.
inline void fill_example(std::span<const TaggedToken> sentence, std::size_t t, int reach,
                         TrainingExample& ex) {
  ex.center = sentence[t];
  ex.context.clear();
  const auto n = static_cast<std::ptrdiff_t>(sentence.size());
  const auto center = static_cast<std::ptrdiff_t>(t);
  for (int i = -reach; i <= reach; ++i) {
    if (i == 0) continue;
    const std::ptrdiff_t p = center + i;
    if (p < 0 || p >= n) continue;
    ex.context.push_back({i, sentence[static_cast<std::size_t>(p)]});
  }
}

/// Effective reach for one center: c, or b ~ Uniform{1..c} when dynamic.
inline int draw_reach(int window, bool dynamic_window, Rng& rng) {
  return dynamic_window ? 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(window)))
                        : window;
}

/// One example per token that has at least one in-sentence neighbour.
inline std::vector<TrainingExample> extract_examples(std::span<const TaggedToken> sentence,
                                                     int window, bool dynamic_window,
                                                     Rng& rng) {
  std::vector<TrainingExample> out;
  TrainingExample ex;
  for (std::size_t t = 0; t < sentence.size(); ++t) {
    fill_example(sentence, t, draw_reach(window, dynamic_window, rng), ex);
    if (!ex.context.empty()) out.push_back(ex);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Learning rate

inline constexpr std::uint64_t kLrQuantum = 10'000;
inline constexpr double kLrFloor = 1e-4;

struct TrainState {
  std::uint64_t words_processed = 0;
  /// Corpus tokens times epochs.
  std::uint64_t total_words = 0;
  double lr0 = 0.025;
  double current_lr = 0.025;
  int epoch = 0;
};

/// Linear decay to a floor of lr0 * 1e-4.
inline double update_lr(const TrainState& state) {
  const double floor = state.lr0 * kLrFloor;
  if (state.total_words == 0) return state.lr0;
  const double progress = static_cast<double>(state.words_processed) /
                          static_cast<double>(state.total_words);
  return std::max(state.lr0 * (1.0 - progress), floor);
}

// ---------------------------------------------------------------------------
// Training

struct TrainOptions {
  ModelKind kind = ModelKind::pwe;
  int workers = 1;
  /// Frequent-word subsampling threshold; 0 disables it.
  double subsample = 0;
  /// Progress and diagnostics sink (standard error in the CLI); null is quiet.
  std::ostream* log = nullptr;
  std::uint64_t progress_interval = 1'000'000;
  /// Called with the loss of every example. Only honoured with one worker.
  std::function<void(double)> on_example;
};

struct TrainSummary {
  TrainState state;
  std::uint64_t examples = 0;
  double mean_loss = 0;
  double seconds = 0;
  double words_per_second = 0;
};

template <class Real>
struct TrainResult {
  ModelParameters<Real> params;
  TrainSummary summary;
};

namespace detail {

struct SharedProgress {
  std::atomic<std::uint64_t> words{0};
  std::atomic<std::uint64_t> examples{0};
  std::atomic<double> current_lr{0};
  std::atomic<std::uint64_t> next_report{0};
};

template <class Real>
void write_phi_ranges(std::ostream& log, const RelevanceTensor<Real>& phi) {
  for (std::size_t s = 0; s < phi.offsets(); ++s) {
    const int offset = phi.offset_at(s);
    const auto m = phi.matrix(offset);
    const auto [lo, hi] = std::minmax_element(m.begin(), m.end());
    log << "phi offset " << offset << " min " << *lo << " max " << *hi << '\n';
  }
}

}  // namespace detail

/// Runs `config.epochs` passes of SGD over `source`.
///
/// With more than one worker the workers share the parameters without locks
/// and races between their updates are tolerated. One worker processes the
/// corpus in order and is fully deterministic for a given seed.
template <class Real = float, class Source>
TrainResult<Real> train(const Source& source, const Vocabulary& vocab,
                        const NegativeTable& negatives, const ModelConfig& config,
                        const TrainOptions& options = {}) {
  config.validate();
  if (options.workers < 1) throw Error("workers must be at least 1");
  if (vocab.size() == 0) throw Error("empty vocabulary");
  const std::uint64_t corpus_tokens = source.tokens();
  if (corpus_tokens == 0) throw Error("empty encoded corpus");

  TrainResult<Real> result{init_model<Real>(config, vocab.size(), TagSet::size()), {}};
  auto& model = result.params.model;
  auto& phi = result.params.phi;

  const auto workers = static_cast<std::size_t>(options.workers);
  const bool observe = static_cast<bool>(options.on_example) && workers == 1;
  TrainState base;
  base.lr0 = config.lr0;
  base.current_lr = config.lr0;
  base.total_words = corpus_tokens * static_cast<std::uint64_t>(config.epochs);

  detail::SharedProgress progress;
  progress.current_lr = config.lr0;
  progress.next_report = options.progress_interval;
  std::atomic<double> loss_total{0};
  const auto started = std::chrono::steady_clock::now();

  auto run_worker = [&](std::size_t worker, int epoch, Rng& rng) {
    StepWorkspace<Real> ws;
    TrainingExample ex;
    std::vector<TaggedToken> kept;
    std::vector<WordId> drawn(static_cast<std::size_t>(config.negatives));
    std::uint64_t pending_words = 0;
    std::uint64_t local_examples = 0;
    double local_loss = 0;
    double window_loss = 0;
    std::uint64_t window_examples = 0;
    double recent_mean = 0;
    bool have_window = false;

    auto record = [&](double loss) {
      ++local_examples;
      local_loss += loss;
      window_loss += loss;
      if (++window_examples == 100'000) {
        recent_mean = window_loss / 100'000.0;
        have_window = true;
        window_loss = 0;
        window_examples = 0;
      }
      if (observe) options.on_example(loss);
    };

    auto sync = [&](bool final) {
      if (pending_words < kLrQuantum && !final) return;
      const std::uint64_t words = progress.words += pending_words;
      pending_words = 0;
      TrainState s = base;
      s.words_processed = words;
      progress.current_lr = update_lr(s);
      if (options.log && options.progress_interval > 0) {
        std::uint64_t due = progress.next_report.load();
        if (words >= due &&
            progress.next_report.compare_exchange_strong(
                due, words + options.progress_interval)) {
          const double secs = std::chrono::duration<double>(
                                  std::chrono::steady_clock::now() - started)
                                  .count();
          const double mean =
              have_window ? recent_mean
              : window_examples > 0 ? window_loss / static_cast<double>(window_examples)
                                    : 0.0;
          *options.log << "epoch " << epoch + 1 << " progress " << std::fixed
                       << std::setprecision(2)
                       << 100.0 * static_cast<double>(words) /
                              static_cast<double>(base.total_words)
                       << "% lr " << std::setprecision(6) << progress.current_lr.load()
                       << " loss " << std::setprecision(4) << mean << " wps "
                       << std::setprecision(0)
                       << (secs > 0 ? static_cast<double>(words) / secs : 0.0)
                       << std::defaultfloat << std::setprecision(6) << '\n';
        }
      }
    };

    source.visit(worker, workers, [&](std::span<const TaggedToken> sentence) {
      pending_words += sentence.size();
      std::span<const TaggedToken> tokens = sentence;
      if (options.subsample > 0) {
        kept.clear();
        for (const auto& tok : sentence) {
          const double keep =
              keep_probability(vocab.counts[tok.word], vocab.total_tokens, options.subsample);
          if (keep >= 1.0 || rng.uniform() < keep) kept.push_back(tok);
        }
        tokens = kept;
      }
      const Real lr = static_cast<Real>(progress.current_lr.load(std::memory_order_relaxed));
      const Real phi_lr = config.phi_enabled
                              ? static_cast<Real>(static_cast<double>(lr) * config.phi_lr_scale)
                              : Real(0);
      for (std::size_t t = 0; t < tokens.size(); ++t) {
        fill_example(tokens, t, draw_reach(config.window, config.dynamic_window, rng), ex);
        if (ex.context.empty()) continue;
        if (options.kind == ModelKind::sg) {
          for (const auto& c : ex.context) {
            for (auto& w : drawn) w = draw_negative(negatives, rng, c.token.word);
            record(sg_step<Real>(ex.center, c.token, model, drawn, lr, ws));
          }
          continue;
        }
        for (auto& w : drawn) w = draw_negative(negatives, rng, ex.center.word);
        if (options.kind == ModelKind::pwe) {
          record(pwe_step<Real>(ex, model, phi, drawn, lr, phi_lr, ws));
        } else {
          record(cbow_step<Real>(ex, model, drawn, lr, ws));
        }
      }
      sync(false);
    });
    sync(true);
    progress.examples += local_examples;
    double expected = loss_total.load();
    while (!loss_total.compare_exchange_weak(expected, expected + local_loss)) {
    }
  };

  std::vector<Rng> rngs;
  for (std::size_t w = 0; w < workers; ++w) rngs.emplace_back(stream_seed(config.seed, w));

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    if (workers == 1) {
      run_worker(0, epoch, rngs[0]);
    } else {
      std::vector<std::jthread> threads;
      threads.reserve(workers);
      for (std::size_t w = 0; w < workers; ++w) {
        threads.emplace_back([&, w] { run_worker(w, epoch, rngs[w]); });
      }
    }
    if (options.log && options.kind == ModelKind::pwe) {
      *options.log << "epoch " << epoch + 1 << " done\n";
      detail::write_phi_ranges(*options.log, phi);
    }
  }

  if (progress.words.load() == 0) throw Error("empty encoded corpus");
  if (!model.all_finite() || !phi.all_finite()) {
    throw Error("training diverged: parameters are no longer finite");
  }

  auto& summary = result.summary;
  summary.state = base;
  summary.state.words_processed = progress.words.load();
  summary.state.current_lr = progress.current_lr.load();
  summary.state.epoch = config.epochs;
  summary.examples = progress.examples.load();
  summary.mean_loss = summary.examples > 0
                          ? loss_total.load() / static_cast<double>(summary.examples)
                          : 0.0;
  summary.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  summary.words_per_second =
      summary.seconds > 0 ? static_cast<double>(summary.state.words_processed) / summary.seconds
                          : 0.0;
  return result;
}

}  // namespace pwe
