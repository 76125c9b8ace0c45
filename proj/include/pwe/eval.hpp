#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "pwe/corpus.hpp"
#include "pwe/error.hpp"
#include "pwe/model.hpp"
#include "pwe/random.hpp"
#include "pwe/vectors.hpp"

namespace pwe {

// ---------------------------------------------------------------------------
// Datasets

/// a : b :: c : d, where d is the expected answer.
struct AnalogyQuestion {
  std::string a, b, c, d;
};

struct SimilarityPair {
  std::string w1, w2;
  double gold = 0;
};

namespace detail {

inline bool parse_double(const std::string& s, double& out) {
  char* end = nullptr;
  out = std::strtod(s.c_str(), &end);
  return end != s.c_str() && *end == '\0' && std::isfinite(out);
}

}  // namespace detail

/// Four words per line; `:` lines are section headers and blank lines are
/// ignored. Words are lowercased to match the vocabulary.
inline std::vector<AnalogyQuestion> load_analogy(std::istream& in,
                                                 const std::string& name = "analogy") {
  std::vector<AnalogyQuestion> out;
  std::string line;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    auto f = detail::split_fields(line);
    if (f.empty() || f[0].starts_with(':')) continue;
    if (f.size() != 4) {
      throw Error(name + ":" + std::to_string(n) + ": expected 4 words, found " +
                  std::to_string(f.size()));
    }
    for (auto& w : f) detail::ascii_lower(w);
    out.push_back({f[0], f[1], f[2], f[3]});
  }
  return out;
}

inline std::vector<AnalogyQuestion> load_analogy(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open analogy file '" + path + "'");
  return load_analogy(in, path);
}

/// `w1 w2 score` per line. A first line whose last field is not a number is
/// taken as a header and skipped.
inline std::vector<SimilarityPair> load_similarity(std::istream& in,
                                                   const std::string& name = "similarity") {
  std::vector<SimilarityPair> out;
  std::string line;
  bool first = true;
  for (std::size_t n = 1; std::getline(in, line); ++n) {
    auto f = detail::split_fields(line);
    if (f.empty()) continue;
    double ignored = 0;
    if (first && !detail::parse_double(f.back(), ignored)) {
      first = false;
      continue;
    }
    if (f.size() != 3) {
      throw Error(name + ":" + std::to_string(n) + ": expected 3 fields, found " +
                  std::to_string(f.size()));
    }
    double score = 0;
    if (!detail::parse_double(f[2], score)) {
      throw Error(name + ":" + std::to_string(n) + ": score '" + f[2] +
                  "' is not a number");
    }
    first = false;
    detail::ascii_lower(f[0]);
    detail::ascii_lower(f[1]);
    out.push_back({f[0], f[1], score});
  }
  return out;
}

inline std::vector<SimilarityPair> load_similarity(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open similarity file '" + path + "'");
  return load_similarity(in, path);
}

// ---------------------------------------------------------------------------
// Reports

struct EvalReport {
  enum class Kind { analogy, similarity, purity };

  std::string dataset;
  Kind kind = Kind::analogy;
  std::size_t total = 0;
  std::size_t skipped_oov = 0;
  std::size_t attempted = 0;
  std::size_t correct = 0;
  double accuracy = 0;
  double spearman_x100 = 0;
  double purity_pct = 0;
};

// ---------------------------------------------------------------------------
// Analogy

inline constexpr double kCosMulEpsilon = 0.001;

/// Copy with every row scaled to unit length. Zero rows stay zero.
inline Matrix<float> normalize_rows(const Matrix<float>& m) {
  Matrix<float> out = m;
  for (std::size_t r = 0; r < out.rows(); ++r) {
    auto row = out.row(r);
    double norm = 0;
    for (float x : row) norm += static_cast<double>(x) * x;
    norm = std::sqrt(norm);
    if (norm > 0) {
      for (float& x : row) x = static_cast<float>(x / norm);
    }
  }
  return out;
}

namespace detail {

inline double cosine_unit(std::span<const float> a, std::span<const float> b) {
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    s += static_cast<double>(a[j]) * static_cast<double>(b[j]);
  }
  return s;
}

}  // namespace detail

/// Similarity-multiplication answer to a : b :: c : ?. Maximises
/// cos'(d,b) cos'(d,c) / (cos'(d,a) + 0.001) with cos' = (cos + 1) / 2 over
/// every d outside {a, b, c}; ties go to the lower id. Rows must be unit.
inline WordId answer_3cosmul(WordId a, WordId b, WordId c, const Matrix<float>& unit) {
  if (unit.rows() <= 3) throw Error("3CosMul needs more than 3 words");
  const auto ra = unit.row(a);
  const auto rb = unit.row(b);
  const auto rc = unit.row(c);
  WordId best = kNoWord;
  double best_score = -1;
  for (std::size_t d = 0; d < unit.rows(); ++d) {
    if (d == a || d == b || d == c) continue;
    const auto rd = unit.row(d);
    const double ca = (detail::cosine_unit(rd, ra) + 1) / 2;
    const double cb = (detail::cosine_unit(rd, rb) + 1) / 2;
    const double cc = (detail::cosine_unit(rd, rc) + 1) / 2;
    const double score = cb * cc / (ca + kCosMulEpsilon);
    if (score > best_score) {
      best_score = score;
      best = static_cast<WordId>(d);
    }
  }
  return best;
}

/// Accuracy over the questions whose four words are all in `vectors`.
inline EvalReport eval_analogy(const std::vector<AnalogyQuestion>& questions,
                               const WordVectors& vectors,
                               const std::string& dataset = "analogy", int workers = 1) {
  EvalReport report;
  report.dataset = dataset;
  report.kind = EvalReport::Kind::analogy;
  report.total = questions.size();

  struct Encoded {
    WordId a, b, c, d;
  };
  std::vector<Encoded> answerable;
  for (const auto& q : questions) {
    const auto a = vectors.find(q.a), b = vectors.find(q.b);
    const auto c = vectors.find(q.c), d = vectors.find(q.d);
    if (a < 0 || b < 0 || c < 0 || d < 0) {
      ++report.skipped_oov;
      continue;
    }
    answerable.push_back({static_cast<WordId>(a), static_cast<WordId>(b),
                          static_cast<WordId>(c), static_cast<WordId>(d)});
  }
  report.attempted = answerable.size();
  if (answerable.empty()) throw Error(dataset + ": no answerable questions");

  const Matrix<float> unit = normalize_rows(vectors.matrix);
  const auto n = static_cast<std::size_t>(std::max(workers, 1));
  std::vector<std::size_t> correct(n, 0);
  auto run = [&](std::size_t w) {
    const std::size_t begin = answerable.size() * w / n;
    const std::size_t end = answerable.size() * (w + 1) / n;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& q = answerable[i];
      if (answer_3cosmul(q.a, q.b, q.c, unit) == q.d) ++correct[w];
    }
  };
  if (n == 1) {
    run(0);
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t w = 0; w < n; ++w) threads.emplace_back(run, w);
  }
  report.correct = std::accumulate(correct.begin(), correct.end(), std::size_t{0});
  report.accuracy =
      100.0 * static_cast<double>(report.correct) / static_cast<double>(report.attempted);
  return report;
}

// ---------------------------------------------------------------------------
// Similarity

/// 1-based ranks; tied values share the mean of the ranks they span.
inline std::vector<double> average_ranks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
  std::vector<double> rank(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

/// Pearson correlation; 0 when either side has no variance.
inline double pearson(std::span<const double> x, std::span<const double> y) {
  const auto n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Spearman rank correlation with average ranks for ties.
inline double spearman(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw Error("spearman: inputs differ in length");
  if (x.size() < 2) throw Error("spearman: need at least 2 pairs");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return pearson(rx, ry);
}

inline double cosine(std::span<const float> a, std::span<const float> b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t j = 0; j < a.size(); ++j) {
    ab += static_cast<double>(a[j]) * b[j];
    aa += static_cast<double>(a[j]) * a[j];
    bb += static_cast<double>(b[j]) * b[j];
  }
  if (aa == 0 || bb == 0) return 0;
  return ab / std::sqrt(aa * bb);
}

/// Spearman x 100 between gold scores and model cosines; pairs with an OOV
/// word are skipped and counted.
inline EvalReport spearman_x100(const std::vector<SimilarityPair>& pairs,
                                const WordVectors& vectors,
                                const std::string& dataset = "similarity") {
  EvalReport report;
  report.dataset = dataset;
  report.kind = EvalReport::Kind::similarity;
  report.total = pairs.size();
  std::vector<double> gold, model;
  for (const auto& p : pairs) {
    const auto a = vectors.find(p.w1), b = vectors.find(p.w2);
    if (a < 0 || b < 0) {
      ++report.skipped_oov;
      continue;
    }
    gold.push_back(p.gold);
    model.push_back(cosine(vectors.matrix.row(static_cast<std::size_t>(a)),
                           vectors.matrix.row(static_cast<std::size_t>(b))));
  }
  report.attempted = gold.size();
  if (gold.size() < 2) throw Error(dataset + ": fewer than 2 scorable pairs");
  report.spearman_x100 = 100.0 * spearman(model, gold);
  return report;
}

// ---------------------------------------------------------------------------
// POS clustering

enum class CoarseGroup { N, V, J, R, Other };

inline std::string_view to_string(CoarseGroup g) {
  switch (g) {
    case CoarseGroup::N: return "N";
    case CoarseGroup::V: return "V";
    case CoarseGroup::J: return "J";
    case CoarseGroup::R: return "R";
    case CoarseGroup::Other: return "Other";
  }
  return "Other";
}

/// Collapses a Penn Treebank tag into {N, V, J, R, Other}.
inline CoarseGroup coarse_tag(std::string_view tag) {
  if (tag == "NN" || tag == "NNS" || tag == "NNP" || tag == "NNPS") return CoarseGroup::N;
  if (tag == "VB" || tag == "VBD" || tag == "VBG" || tag == "VBN" || tag == "VBP" ||
      tag == "VBZ") {
    return CoarseGroup::V;
  }
  if (tag == "JJ" || tag == "JJR" || tag == "JJS") return CoarseGroup::J;
  if (tag == "RB" || tag == "RBR" || tag == "RBS") return CoarseGroup::R;
  return CoarseGroup::Other;
}

struct KMeansResult {
  std::vector<std::size_t> assignment;
  Matrix<double> centroids;
  double inertia = 0;
  int iterations = 0;
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += (a[j] - b[j]) * (a[j] - b[j]);
  return s;
}

}  // namespace detail

/// Lloyd's algorithm on the L2-normalised rows of `vectors` with k-means++
/// seeding. Stops when no centroid moves by 1e-6 or after `max_iterations`.
/// A cluster that empties takes the point farthest from its own centroid.
template <class Real>
KMeansResult kmeans(const Matrix<Real>& vectors, std::size_t k, std::uint64_t seed,
                    int max_iterations = 200, double tolerance = 1e-6) {
  const std::size_t n = vectors.rows();
  const std::size_t d = vectors.cols();
  if (k < 1) throw Error("kmeans: k must be at least 1");
  if (n < k) {
    throw Error("kmeans: " + std::to_string(n) + " points cannot form " +
                std::to_string(k) + " clusters");
  }

  Matrix<double> points(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    double norm = 0;
    for (std::size_t j = 0; j < d; ++j) norm += static_cast<double>(vectors(i, j)) * vectors(i, j);
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < d; ++j) {
      points(i, j) = norm > 0 ? static_cast<double>(vectors(i, j)) / norm : 0.0;
    }
  }

  // k-means++ seeding
  Rng rng(seed);
  KMeansResult result;
  result.centroids = Matrix<double>(k, d);
  std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(n, false);
  std::size_t pick = rng.below(n);
  for (std::size_t c = 0; c < k; ++c) {
    if (c > 0) {
      double total = 0;
      for (double x : nearest) total += x;
      if (total > 0) {
        const double r = rng.uniform() * total;
        double acc = 0;
        pick = n;
        for (std::size_t i = 0; i < n; ++i) {
          if (nearest[i] <= 0) continue;
          acc += nearest[i];
          pick = i;
          if (acc > r) break;
        }
      } else {
        // every remaining point coincides with a centroid
        std::vector<std::size_t> rest;
        for (std::size_t i = 0; i < n; ++i) {
          if (!chosen[i]) rest.push_back(i);
        }
        pick = rest[rng.below(rest.size())];
      }
    }
    chosen[pick] = true;
    std::copy(points.row(pick).begin(), points.row(pick).end(),
              result.centroids.row(c).begin());
    for (std::size_t i = 0; i < n; ++i) {
      nearest[i] = std::min(nearest[i],
                            detail::squared_distance(points.row(i), result.centroids.row(c)));
    }
  }

  result.assignment.assign(n, 0);
  std::vector<double> dist(n, 0);
  std::vector<std::size_t> sizes(k, 0);
  for (int iter = 1; iter <= max_iterations; ++iter) {
    result.iterations = iter;
    std::fill(sizes.begin(), sizes.end(), 0);
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t best = 0;
      double best_dist = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < k; ++c) {
        const double dd = detail::squared_distance(points.row(i), result.centroids.row(c));
        if (dd < best_dist) {
          best_dist = dd;
          best = c;
        }
      }
      result.assignment[i] = best;
      dist[i] = best_dist;
      ++sizes[best];
    }
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] > 0) continue;
      std::size_t far = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (sizes[result.assignment[i]] < 2) continue;
        if (far == n || dist[i] > dist[far]) far = i;
      }
      if (far == n) break;
      --sizes[result.assignment[far]];
      result.assignment[far] = c;
      dist[far] = 0;
      sizes[c] = 1;
    }

    Matrix<double> updated(k, d);
    for (std::size_t i = 0; i < n; ++i) {
      auto row = updated.row(result.assignment[i]);
      const auto p = points.row(i);
      for (std::size_t j = 0; j < d; ++j) row[j] += p[j];
    }
    double shift = 0;
    for (std::size_t c = 0; c < k; ++c) {
      auto row = updated.row(c);
      for (double& x : row) x /= static_cast<double>(sizes[c]);
      shift = std::max(shift, std::sqrt(detail::squared_distance(row, result.centroids.row(c))));
    }
    result.centroids = std::move(updated);
    if (shift < tolerance) break;
  }

  result.inertia = 0;
  for (std::size_t i = 0; i < n; ++i) {
    result.inertia +=
        detail::squared_distance(points.row(i), result.centroids.row(result.assignment[i]));
  }
  return result;
}

/// Percentage of points whose cluster's majority gold label is their own.
template <class Label>
double cluster_purity(std::span<const std::size_t> assignment, std::span<const Label> gold) {
  if (assignment.size() != gold.size()) {
    throw Error("cluster_purity: assignment and gold labels differ in length");
  }
  if (assignment.empty()) throw Error("cluster_purity: no points");
  std::map<std::size_t, std::map<Label, std::size_t>> table;
  for (std::size_t i = 0; i < assignment.size(); ++i) ++table[assignment[i]][gold[i]];
  std::size_t majority = 0;
  for (const auto& [cluster, counts] : table) {
    std::size_t top = 0;
    for (const auto& [label, count] : counts) top = std::max(top, count);
    majority += top;
  }
  return 100.0 * static_cast<double>(majority) / static_cast<double>(assignment.size());
}

/// Coarse gold group of a vocabulary word, from its modal corpus tag.
inline CoarseGroup gold_group(WordId word, const Vocabulary& vocab) {
  static const TagSet tags;
  return coarse_tag(tags.name(dominant_tag(word, vocab)));
}

/// Clusters the `top_n` most frequent vocabulary words present in `vectors`
/// into k groups and scores them against their coarse gold groups.
inline EvalReport eval_purity(const WordVectors& vectors, const Vocabulary& vocab,
                              std::size_t top_n = 500, std::size_t k = 5,
                              std::uint64_t seed = 1) {
  if (!vocab.has_tag_stats()) throw Error("purity needs vocabulary tag statistics");
  std::vector<std::size_t> rows;
  std::vector<CoarseGroup> gold;
  for (std::size_t w = 0; w < vocab.size() && rows.size() < top_n; ++w) {
    const auto r = vectors.find(vocab.words[w]);
    if (r < 0) continue;
    rows.push_back(static_cast<std::size_t>(r));
    gold.push_back(gold_group(static_cast<WordId>(w), vocab));
  }
  Matrix<float> subset(rows.size(), vectors.dim());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto src = vectors.matrix.row(rows[i]);
    std::copy(src.begin(), src.end(), subset.row(i).begin());
  }
  const auto clusters = kmeans(subset, k, seed);
  EvalReport report;
  report.dataset = "top" + std::to_string(top_n);
  report.kind = EvalReport::Kind::purity;
  report.total = rows.size();
  report.attempted = rows.size();
  report.purity_pct =
      cluster_purity<CoarseGroup>(clusters.assignment, std::span<const CoarseGroup>(gold));
  return report;
}

// ---------------------------------------------------------------------------
// Coordinate export

/// Writes a header line, then `word<TAB>group<TAB>v1 ... vd` per word. No
/// projection is applied; the raw vector is written.
inline void export_coords(std::span<const std::string> words,
                          std::span<const CoarseGroup> groups, const Matrix<float>& rows,
                          std::ostream& out) {
  if (words.size() != groups.size() || words.size() != rows.rows()) {
    throw Error("export_coords: words, groups and rows differ in length");
  }
  out << "word\tgroup\t";
  for (std::size_t j = 0; j < rows.cols(); ++j) out << (j ? " v" : "v") << j + 1;
  out << '\n';
  for (std::size_t i = 0; i < words.size(); ++i) {
    out << words[i] << '\t' << to_string(groups[i]) << '\t';
    const auto r = rows.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) {
      if (j) out << ' ';
      out << r[j];
    }
    out << '\n';
  }
  if (!out) throw Error("export_coords: write failure");
}

}  // namespace pwe
