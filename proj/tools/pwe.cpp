// Command-line front end: vocab, train, eval, purity, export.

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pwe/pwe.hpp"
#include "pwe/report.hpp"

namespace {

using nlohmann::json;

std::string fnv1a64_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw pwe::Error("cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ULL;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[static_cast<std::size_t>(i)]);
      h *= 0x100000001b3ULL;
    }
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

void write_manifest(const std::string& output, const json& manifest) {
  const std::string path = output + ".manifest.json";
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw pwe::Error("cannot write '" + path + "'");
  out << manifest.dump(2) << '\n';
  if (!out) throw pwe::Error("write failure on '" + path + "'");
}

struct CorpusFlags {
  std::string corpus;
  bool plain = false;
  bool no_lowercase = false;

  pwe::ParseOptions parse_options() const { return {!no_lowercase, plain}; }
};

// ---------------------------------------------------------------------------

struct VocabArgs {
  CorpusFlags in;
  std::uint64_t min_count = 50;
  std::string out;
};

int run_vocab(const VocabArgs& a) {
  const auto vocab = pwe::build_vocabulary_from_file(a.in.corpus, a.min_count,
                                                     a.in.parse_options());
  pwe::save_vocabulary(vocab, a.out);
  write_manifest(a.out, {{"command", "vocab"},
                         {"corpus", a.in.corpus},
                         {"corpus_fnv1a64", fnv1a64_file(a.in.corpus)},
                         {"min_count", a.min_count},
                         {"plain", a.in.plain},
                         {"lowercase", !a.in.no_lowercase},
                         {"vocab_size", vocab.size()},
                         {"retained_tokens", vocab.total_tokens}});
  std::cout << json{{"vocab_size", vocab.size()}, {"retained_tokens", vocab.total_tokens}}.dump()
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct TrainArgs {
  CorpusFlags in;
  std::string vocab;
  std::string model = "pwe";
  std::string out;
  std::string out_phi;
  std::string out_context;
  pwe::ModelConfig config;
  bool dynamic_window = false;
  bool dynamic_window_set = false;
  bool phi = true;
  bool phi_set = false;
  int workers = 1;
  double subsample = 0;
  double alpha = 0.75;
  std::size_t table_size = 10'000'000;
  std::uint64_t progress_interval = 1'000'000;
  bool quiet = false;
};

int run_train(TrainArgs a) {
  const auto kind = pwe::parse_model_kind(a.model);
  pwe::ModelConfig config = pwe::default_config(kind);
  config.dim = a.config.dim;
  config.window = a.config.window;
  config.negatives = a.config.negatives;
  config.lr0 = a.config.lr0;
  config.min_count = a.config.min_count;
  config.epochs = a.config.epochs;
  config.seed = a.config.seed;
  config.phi_lr_scale = a.config.phi_lr_scale;
  if (a.dynamic_window_set) config.dynamic_window = a.dynamic_window;
  if (a.phi_set) config.phi_enabled = a.phi;
  if (kind != pwe::ModelKind::pwe) config.phi_enabled = false;
  config.validate();

  const auto options = a.in.parse_options();
  const pwe::Vocabulary vocab =
      a.vocab.empty() ? pwe::build_vocabulary_from_file(a.in.corpus, config.min_count, options)
                      : pwe::load_vocabulary(a.vocab);
  const auto table = pwe::build_negative_table(vocab, a.alpha, a.table_size);
  const pwe::TaggedTextFile source(a.in.corpus, vocab, options);

  pwe::TrainOptions train_options;
  train_options.kind = kind;
  train_options.workers = a.workers;
  train_options.subsample = a.subsample;
  train_options.log = a.quiet ? nullptr : &std::cerr;
  train_options.progress_interval = a.progress_interval;

  const auto result = pwe::train<float>(source, vocab, table, config, train_options);
  const auto& params = result.params;

  pwe::save_vectors(pwe::to_word_vectors(vocab.words, params.model.input), a.out);
  if (!a.out_context.empty()) {
    pwe::save_vectors(pwe::to_word_vectors(vocab.words, params.model.output), a.out_context);
  }
  if (!a.out_phi.empty()) pwe::save_phi(params.phi, a.out_phi);

  write_manifest(a.out, {{"command", "train"},
                         {"model", pwe::to_string(kind)},
                         {"corpus", a.in.corpus},
                         {"corpus_fnv1a64", fnv1a64_file(a.in.corpus)},
                         {"vocab", a.vocab},
                         {"vocab_size", vocab.size()},
                         {"plain", a.in.plain},
                         {"lowercase", !a.in.no_lowercase},
                         {"dim", config.dim},
                         {"window", config.window},
                         {"negative", config.negatives},
                         {"lr", config.lr0},
                         {"min_count", config.min_count},
                         {"epochs", config.epochs},
                         {"dynamic_window", config.dynamic_window},
                         {"phi", config.phi_enabled},
                         {"phi_lr_scale", config.phi_lr_scale},
                         {"seed", config.seed},
                         {"workers", a.workers},
                         {"subsample", a.subsample},
                         {"alpha", a.alpha},
                         {"table_size", a.table_size},
                         {"out", a.out},
                         {"out_phi", a.out_phi},
                         {"out_context", a.out_context}});

  const auto& s = result.summary;
  std::cout << json{{"model", pwe::to_string(kind)},
                    {"words_processed", s.state.words_processed},
                    {"examples", s.examples},
                    {"mean_loss", s.mean_loss},
                    {"final_lr", s.state.current_lr},
                    {"seconds", s.seconds},
                    {"words_per_second", s.words_per_second}}
                   .dump()
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string vectors;
  std::string mode;
  std::vector<std::string> datasets;
  int workers = 1;
};

int run_eval(const EvalArgs& a) {
  const auto vectors = pwe::load_vectors(a.vectors);
  for (const auto& path : a.datasets) {
    const std::string name = std::filesystem::path(path).stem().string();
    pwe::EvalReport report;
    if (a.mode == "analogy") {
      report = pwe::eval_analogy(pwe::load_analogy(path), vectors, name, a.workers);
    } else {
      report = pwe::spearman_x100(pwe::load_similarity(path), vectors, name);
    }
    std::cout << pwe::to_json(report).dump() << '\n';
  }
  return 0;
}

// ---------------------------------------------------------------------------

struct PurityArgs {
  std::string vectors;
  std::string vocab;
  std::string tag_stats;
  std::size_t top_n = 500;
  std::size_t k = 5;
  std::uint64_t seed = 1;
};

int run_purity(const PurityArgs& a) {
  const auto vectors = pwe::load_vectors(a.vectors);
  const auto vocab = pwe::load_vocabulary(a.vocab, a.tag_stats);
  std::cout << pwe::to_json(pwe::eval_purity(vectors, vocab, a.top_n, a.k, a.seed)).dump()
            << '\n';
  return 0;
}

// ---------------------------------------------------------------------------

struct ExportArgs {
  std::string vectors;
  std::string vocab;
  std::string tag_stats;
  std::size_t top_n = 500;
  std::string out;
};

int run_export(const ExportArgs& a) {
  const auto vectors = pwe::load_vectors(a.vectors);
  const auto vocab = pwe::load_vocabulary(a.vocab, a.tag_stats);
  if (!vocab.has_tag_stats()) throw pwe::Error("export needs vocabulary tag statistics");
  std::vector<std::string> words;
  std::vector<pwe::CoarseGroup> groups;
  std::vector<float> data;
  for (std::size_t w = 0; w < vocab.size() && words.size() < a.top_n; ++w) {
    const auto r = vectors.find(vocab.words[w]);
    if (r < 0) continue;
    words.push_back(vocab.words[w]);
    groups.push_back(pwe::gold_group(static_cast<pwe::WordId>(w), vocab));
    const auto row = vectors.matrix.row(static_cast<std::size_t>(r));
    data.insert(data.end(), row.begin(), row.end());
  }
  const pwe::Matrix<float> rows(words.size(), vectors.dim(), std::move(data));
  std::ofstream out(a.out, std::ios::trunc);
  if (!out) throw pwe::Error("cannot write '" + a.out + "'");
  pwe::export_coords(words, groups, rows, out);
  std::cout << json{{"exported", words.size()}, {"out", a.out}}.dump() << '\n';
  return 0;
}

void add_corpus_flags(CLI::App* sub, CorpusFlags& f) {
  sub->add_option("--corpus", f.corpus, "Tagged corpus, one sentence per line")
      ->required()
      ->check(CLI::ExistingFile);
  sub->add_flag("--plain", f.plain, "Untagged input; every token gets tag XX");
  sub->add_flag("--no-lowercase", f.no_lowercase, "Keep surface case");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Word embeddings with part-of-speech relevance weighting"};
  app.require_subcommand(1);

  VocabArgs vocab_args;
  auto* vocab_cmd = app.add_subcommand("vocab", "Build a vocabulary with tag statistics");
  add_corpus_flags(vocab_cmd, vocab_args.in);
  vocab_cmd->add_option("--min-count", vocab_args.min_count, "Discard rarer words")
      ->capture_default_str();
  vocab_cmd->add_option("--out", vocab_args.out, "Vocabulary output path")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "Train word vectors");
  add_corpus_flags(train_cmd, train_args.in);
  train_cmd->add_option("--vocab", train_args.vocab,
                        "Vocabulary file (built from the corpus when omitted)");
  train_cmd->add_option("--model", train_args.model, "pwe | cbow | sg")
      ->check(CLI::IsMember({"pwe", "cbow", "sg"}))
      ->capture_default_str();
  train_cmd->add_option("--out", train_args.out, "Vector output (.bin for binary)")->required();
  train_cmd->add_option("--out-phi", train_args.out_phi, "Relevance tensor output");
  train_cmd->add_option("--out-context", train_args.out_context, "Output-vector export");
  train_cmd->add_option("--dim", train_args.config.dim)->capture_default_str();
  train_cmd->add_option("--window", train_args.config.window)->capture_default_str();
  train_cmd->add_option("--negative", train_args.config.negatives)->capture_default_str();
  train_cmd->add_option("--lr", train_args.config.lr0)->capture_default_str();
  train_cmd->add_option("--min-count", train_args.config.min_count)->capture_default_str();
  train_cmd->add_option("--epochs", train_args.config.epochs)->capture_default_str();
  train_cmd->add_option("--seed", train_args.config.seed)->capture_default_str();
  train_cmd->add_option("--workers", train_args.workers)->capture_default_str();
  train_cmd->add_option("--subsample", train_args.subsample,
                        "Frequent-word subsampling threshold (0 = off)")
      ->capture_default_str();
  train_cmd->add_option("--phi-lr-scale", train_args.config.phi_lr_scale)
      ->capture_default_str();
  train_cmd->add_option("--alpha", train_args.alpha, "Negative-sampling exponent")
      ->capture_default_str();
  train_cmd->add_option("--table-size", train_args.table_size)->capture_default_str();
  train_cmd->add_option("--progress-interval", train_args.progress_interval)
      ->capture_default_str();
  auto* dynamic_flag = train_cmd->add_flag("--dynamic-window,!--no-dynamic-window",
                                           train_args.dynamic_window,
                                           "Default: on for cbow/sg, off for pwe");
  auto* phi_flag = train_cmd->add_flag("--phi,!--no-phi", train_args.phi,
                                       "Learn relevance weights (pwe only)");
  train_cmd->add_flag("--quiet", train_args.quiet, "No progress on standard error");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Score vectors on analogy or similarity sets");
  eval_cmd->add_option("--vectors", eval_args.vectors)->required();
  eval_cmd->add_option("--mode", eval_args.mode)
      ->required()
      ->check(CLI::IsMember({"analogy", "sim"}));
  eval_cmd->add_option("--dataset", eval_args.datasets)->required();
  eval_cmd->add_option("--workers", eval_args.workers)->capture_default_str();

  PurityArgs purity_args;
  auto* purity_cmd = app.add_subcommand("purity", "k-means POS cluster purity");
  purity_cmd->add_option("--vectors", purity_args.vectors)->required();
  purity_cmd->add_option("--vocab", purity_args.vocab)->required();
  purity_cmd->add_option("--tag-stats", purity_args.tag_stats);
  purity_cmd->add_option("--top-n", purity_args.top_n)->capture_default_str();
  purity_cmd->add_option("--k", purity_args.k)->capture_default_str();
  purity_cmd->add_option("--seed", purity_args.seed)->capture_default_str();

  ExportArgs export_args;
  auto* export_cmd = app.add_subcommand("export", "Export top-N vectors with coarse POS groups");
  export_cmd->add_option("--vectors", export_args.vectors)->required();
  export_cmd->add_option("--vocab", export_args.vocab)->required();
  export_cmd->add_option("--tag-stats", export_args.tag_stats);
  export_cmd->add_option("--top-n", export_args.top_n)->capture_default_str();
  export_cmd->add_option("--out", export_args.out)->required();

  CLI11_PARSE(app, argc, argv);

  const std::string name = app.get_subcommands().front()->get_name();
  try {
    if (*vocab_cmd) return run_vocab(vocab_args);
    if (*train_cmd) {
      train_args.dynamic_window_set = dynamic_flag->count() > 0;
      train_args.phi_set = phi_flag->count() > 0;
      return run_train(train_args);
    }
    if (*eval_cmd) return run_eval(eval_args);
    if (*purity_cmd) return run_purity(purity_args);
    if (*export_cmd) return run_export(export_args);
  } catch (const std::exception& e) {
    std::cerr << "pwe " << name << ": " << e.what() << '\n';
    return 1;
  }
  return 1;
}
