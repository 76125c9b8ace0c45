// Trains PWE and CBOW on a tagged corpus and compares them on an analogy file.
//
//   pwe_quickstart data/sample/corpus.txt data/sample/syntactic.txt

#include <iostream>

#include "pwe/pwe.hpp"

int main(int argc, char** argv) {
  if (argc != 3) {
    std::cerr << "usage: " << argv[0] << " <tagged-corpus> <analogy-file>\n";
    return 2;
  }
  try {
    const auto vocab = pwe::build_vocabulary_from_file(argv[1], 5);
    const auto table = pwe::build_negative_table(vocab);
    const auto questions = pwe::load_analogy(argv[2]);
    const pwe::TaggedTextFile corpus(argv[1], vocab);

    for (auto kind : {pwe::ModelKind::pwe, pwe::ModelKind::cbow}) {
      auto config = pwe::default_config(kind);
      config.dim = 50;
      config.epochs = 5;
      pwe::TrainOptions options;
      options.kind = kind;
      const auto result = pwe::train(corpus, vocab, table, config, options);
      const auto vectors = pwe::to_word_vectors(vocab.words, result.params.model.input);
      const auto analogy = pwe::eval_analogy(questions, vectors);
      const auto purity = pwe::eval_purity(vectors, vocab, 60);
      std::cout << pwe::to_string(kind) << ": analogy " << analogy.accuracy << "% ("
                << analogy.correct << '/' << analogy.attempted << "), purity "
                << purity.purity_pct << "%, " << result.summary.words_per_second
                << " words/s\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "pwe_quickstart: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
