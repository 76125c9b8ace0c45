#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pwe/corpus.hpp"
#include "pwe/error.hpp"
#include "pwe/random.hpp"

namespace pwe {

enum class ModelKind { pwe, cbow, sg };

inline std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::pwe: return "pwe";
    case ModelKind::cbow: return "cbow";
    case ModelKind::sg: return "sg";
  }
  return "?";
}

inline ModelKind parse_model_kind(std::string_view name) {
  if (name == "pwe") return ModelKind::pwe;
  if (name == "cbow") return ModelKind::cbow;
  if (name == "sg") return ModelKind::sg;
  throw Error("unknown model '" + std::string(name) + "' (expected pwe, cbow or sg)");
}

struct ModelConfig {
  int dim = 300;
  int window = 5;
  int negatives = 5;
  double lr0 = 0.025;
  std::uint64_t min_count = 50;
  int epochs = 1;
  bool dynamic_window = false;
  bool phi_enabled = true;
  std::uint64_t seed = 1;
  /// Relevance weights learn at lr * phi_lr_scale.
  double phi_lr_scale = 1.0;

  void validate() const {
    if (dim < 1) throw Error("dim must be at least 1");
    if (window < 1) throw Error("window must be at least 1");
    if (negatives < 0) throw Error("negatives must be non-negative");
    if (!(lr0 > 0)) throw Error("learning rate must be positive");
    if (min_count < 1) throw Error("min_count must be at least 1");
    if (epochs < 1) throw Error("epochs must be at least 1");
  }
};

/// Defaults per model: PWE trains on a fixed window with learned weights,
/// the baselines on a dynamic window.
inline ModelConfig default_config(ModelKind kind) {
  ModelConfig config;
  config.dynamic_window = kind != ModelKind::pwe;
  config.phi_enabled = kind == ModelKind::pwe;
  return config;
}

/// Dense row-major matrix.
template <class Real>
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, Real fill = Real(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<Real> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows * cols) throw Error("matrix data does not match its shape");
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<Real> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const Real> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  Real& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  Real operator()(std::size_t r, std::size_t c) const {
    return data_[r * cols_ + c];
  }

  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](Real x) { return std::isfinite(x); });
  }

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Real> data_;
};

/// Input vectors (the exported embeddings) and output prediction vectors.
template <class Real>
struct EmbeddingModel {
  Matrix<Real> input;
  Matrix<Real> output;

  std::size_t vocab_size() const { return input.rows(); }
  std::size_t dim() const { return input.cols(); }
  bool all_finite() const { return input.all_finite() && output.all_finite(); }

  friend bool operator==(const EmbeddingModel&, const EmbeddingModel&) = default;
};

/// One P x P relevance matrix per signed offset in [-c, -1] u [1, c].
/// Entry (offset, context tag, center tag) weights the context word at that
/// offset when predicting a center word carrying the center tag.
template <class Real>
class RelevanceTensor {
 public:
  RelevanceTensor() = default;
  RelevanceTensor(int window, std::size_t tags, Real fill = Real(1))
      : window_(window),
        tags_(tags),
        data_(static_cast<std::size_t>(2 * window) * tags * tags, fill) {
    if (window < 1) throw Error("relevance tensor window must be at least 1");
    if (tags < 1) throw Error("relevance tensor needs at least one tag");
  }

  int window() const { return window_; }
  std::size_t tags() const { return tags_; }
  std::size_t offsets() const { return static_cast<std::size_t>(2 * window_); }

  bool valid_offset(int offset) const {
    return offset != 0 && offset >= -window_ && offset <= window_;
  }

  /// Position of `offset` in the order [-c .. -1, 1 .. c].
  std::size_t slot(int offset) const {
    return static_cast<std::size_t>(offset < 0 ? offset + window_
                                               : offset + window_ - 1);
  }

  int offset_at(std::size_t slot) const {
    const int s = static_cast<int>(slot);
    return s < window_ ? s - window_ : s - window_ + 1;
  }

  Real& at(int offset, TagId context, TagId center) {
    return data_[index(offset, context, center)];
  }
  Real at(int offset, TagId context, TagId center) const {
    return data_[index(offset, context, center)];
  }

  std::span<Real> matrix(int offset) {
    return {data_.data() + slot(offset) * tags_ * tags_, tags_ * tags_};
  }
  std::span<const Real> matrix(int offset) const {
    return {data_.data() + slot(offset) * tags_ * tags_, tags_ * tags_};
  }

  std::span<Real> values() { return data_; }
  std::span<const Real> values() const { return data_; }

  bool all_finite() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](Real x) { return std::isfinite(x); });
  }

  friend bool operator==(const RelevanceTensor&, const RelevanceTensor&) = default;

 private:
  std::size_t index(int offset, TagId context, TagId center) const {
    return (slot(offset) * tags_ + context) * tags_ + center;
  }

  int window_ = 0;
  std::size_t tags_ = 0;
  std::vector<Real> data_;
};

struct ContextEntry {
  int offset = 0;
  TaggedToken token;
};

/// A center token and its in-window neighbours, each tagged with its signed
/// distance from the center.
struct TrainingExample {
  TaggedToken center;
  std::vector<ContextEntry> context;
};

template <class Real>
struct ModelParameters {
  EmbeddingModel<Real> model;
  RelevanceTensor<Real> phi;
};

/// Input rows uniform in [-0.5/d, 0.5/d), output rows zero, every relevance
/// weight 1 so the weighted context starts as the plain context sum.
template <class Real>
ModelParameters<Real> init_model(const ModelConfig& config, std::size_t vocab_size,
                                 std::size_t tags) {
  config.validate();
  if (vocab_size < 1) throw Error("model needs a non-empty vocabulary");
  const auto d = static_cast<std::size_t>(config.dim);
  ModelParameters<Real> p{
      {Matrix<Real>(vocab_size, d), Matrix<Real>(vocab_size, d)},
      RelevanceTensor<Real>(config.window, tags, Real(1))};
  Rng rng(config.seed);
  for (Real& x : p.model.input.values()) {
    x = static_cast<Real>((rng.uniform() - 0.5) / static_cast<double>(d));
  }
  return p;
}

// ---------------------------------------------------------------------------
// Numerics

/// Logistic function without overflow for large |x|.
template <class Real>
Real sigmoid(Real x) {
  if (x >= Real(0)) return Real(1) / (Real(1) + std::exp(-x));
  const Real e = std::exp(x);
  return e / (Real(1) + e);
}

/// log(1 + exp(x)), stable for large |x|.
inline double softplus(double x) {
  return x > 0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

template <class Real>
Real dot(std::span<const Real> a, std::span<const Real> b) {
  Real s = 0;
  for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * b[j];
  return s;
}

// ---------------------------------------------------------------------------
// Context vector and losses

/// Weighted sum of the context input rows: sum_i phi_i(z_{t+i}, z_t) w_{t+i}.
template <class Real>
std::vector<Real> context_vector(const TrainingExample& ex, const Matrix<Real>& input,
                                 const RelevanceTensor<Real>& phi) {
  if (ex.context.empty()) throw Error("empty context");
  std::vector<Real> v(input.cols(), Real(0));
  for (const auto& c : ex.context) {
    const Real w = phi.at(c.offset, c.token.tag, ex.center.tag);
    const auto row = input.row(c.token.word);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += w * row[j];
  }
  return v;
}

/// Unweighted context sum (the CBOW context).
template <class Real>
std::vector<Real> context_sum(const TrainingExample& ex, const Matrix<Real>& input) {
  if (ex.context.empty()) throw Error("empty context");
  std::vector<Real> v(input.cols(), Real(0));
  for (const auto& c : ex.context) {
    const auto row = input.row(c.token.word);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] += row[j];
  }
  return v;
}

template <class Real>
struct SoftmaxLoss {
  double loss = 0;
  std::vector<Real> grad_v;
};

/// Full-softmax probabilities p(w | v) over every output row.
template <class Real>
std::vector<double> softmax_probabilities(std::span<const Real> v,
                                          const Matrix<Real>& output) {
  std::vector<double> p(output.rows());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < p.size(); ++w) {
    p[w] = static_cast<double>(dot(output.row(w), v));
    top = std::max(top, p[w]);
  }
  double z = 0;
  for (double& x : p) z += (x = std::exp(x - top));
  for (double& x : p) x /= z;
  return p;
}

/// -log p(center | v) under the full softmax, and its gradient in v.
/// Enumerates the vocabulary, so only meant for small models.
template <class Real>
SoftmaxLoss<Real> softmax_loss(std::span<const Real> v, WordId center,
                               const Matrix<Real>& output) {
  const auto p = softmax_probabilities(v, output);
  SoftmaxLoss<Real> out;
  out.loss = -std::log(p[center]);
  out.grad_v.assign(v.size(), Real(0));
  for (std::size_t w = 0; w < p.size(); ++w) {
    const double coeff = p[w] - (w == center ? 1.0 : 0.0);
    const auto row = output.row(w);
    for (std::size_t j = 0; j < v.size(); ++j) {
      out.grad_v[j] += static_cast<Real>(coeff * row[j]);
    }
  }
  return out;
}

template <class Real>
struct NsLoss {
  double loss = 0;
  std::vector<Real> grad_v;
  /// Gradient for each target occurrence: [0] the center, then negatives in
  /// the order given. Repeated negatives appear once per occurrence.
  std::vector<std::vector<Real>> grad_out;
};

/// Per-call scratch buffers so the training steps never allocate once warm.
template <class Real>
struct StepWorkspace {
  std::vector<Real> v;
  std::vector<Real> grad_v;
  std::vector<Real> coeff;
  std::vector<Real> weights;
  std::vector<Real> phi_grad;

  void prepare(std::size_t dim, std::size_t context, std::size_t targets) {
    v.assign(dim, Real(0));
    grad_v.assign(dim, Real(0));
    coeff.resize(targets);
    weights.resize(context);
    phi_grad.resize(context);
  }
};

namespace detail {

/// Negative-sampling forward pass. Fills coeff[j] = dloss/d(score_j) for the
/// center (j = 0) and each negative, and grad_v = dloss/dv, all read from the
/// current output rows. Returns the loss.
template <class Real>
double ns_forward(std::span<const Real> v, WordId center,
                  std::span<const WordId> negatives, const Matrix<Real>& output,
                  std::span<Real> coeff, std::span<Real> grad_v) {
  std::fill(grad_v.begin(), grad_v.end(), Real(0));
  double loss = 0;
  for (std::size_t j = 0; j <= negatives.size(); ++j) {
    const WordId target = j == 0 ? center : negatives[j - 1];
    const auto row = output.row(target);
    const Real score = dot(row, v);
    Real g;
    if (j == 0) {
      loss += softplus(-static_cast<double>(score));
      g = -sigmoid(-score);
    } else {
      loss += softplus(static_cast<double>(score));
      g = sigmoid(score);
    }
    coeff[j] = g;
    for (std::size_t k = 0; k < v.size(); ++k) grad_v[k] += g * row[k];
  }
  return loss;
}

template <class Real>
void apply_output_update(Matrix<Real>& output, WordId center,
                         std::span<const WordId> negatives,
                         std::span<const Real> coeff, std::span<const Real> v,
                         Real lr) {
  for (std::size_t j = 0; j <= negatives.size(); ++j) {
    const WordId target = j == 0 ? center : negatives[j - 1];
    const Real scale = lr * coeff[j];
    auto row = output.row(target);
    for (std::size_t k = 0; k < v.size(); ++k) row[k] -= scale * v[k];
  }
}

/// Builds the (weighted) context vector into ws.v and runs the NS forward
/// pass. kWeighted = false is the CBOW path with every weight exactly 1.
template <bool kWeighted, class Real>
double cbow_forward(const TrainingExample& ex, const EmbeddingModel<Real>& model,
                    const RelevanceTensor<Real>* phi,
                    std::span<const WordId> negatives, StepWorkspace<Real>& ws) {
  if (ex.context.empty()) throw Error("empty context");
  const std::size_t d = model.dim();
  ws.prepare(d, ex.context.size(), negatives.size() + 1);
  for (std::size_t k = 0; k < ex.context.size(); ++k) {
    const auto& c = ex.context[k];
    Real w = Real(1);
    if constexpr (kWeighted) w = phi->at(c.offset, c.token.tag, ex.center.tag);
    ws.weights[k] = w;
    const auto row = model.input.row(c.token.word);
    for (std::size_t j = 0; j < d; ++j) ws.v[j] += w * row[j];
  }
  return ns_forward<Real>(ws.v, ex.center.word, negatives, model.output, ws.coeff,
                          ws.grad_v);
}

/// Applies one SGD step from the snapshot held in ws. Output rows move along
/// coeff * v, each context row along weight * grad_v, and each addressed
/// relevance weight along grad_v . (pre-update context row).
template <bool kWeighted, class Real>
void cbow_apply(const TrainingExample& ex, EmbeddingModel<Real>& model,
                RelevanceTensor<Real>* phi, std::span<const WordId> negatives,
                Real lr, Real phi_lr, StepWorkspace<Real>& ws) {
  const std::size_t d = model.dim();
  const bool update_phi = kWeighted && phi_lr != Real(0);
  if (update_phi) {
    for (std::size_t k = 0; k < ex.context.size(); ++k) {
      ws.phi_grad[k] = dot<Real>(ws.grad_v, model.input.row(ex.context[k].token.word));
    }
  }
  apply_output_update<Real>(model.output, ex.center.word, negatives, ws.coeff, ws.v, lr);
  for (std::size_t k = 0; k < ex.context.size(); ++k) {
    const Real scale = lr * ws.weights[k];
    auto row = model.input.row(ex.context[k].token.word);
    for (std::size_t j = 0; j < d; ++j) row[j] -= scale * ws.grad_v[j];
  }
  if (update_phi) {
    for (std::size_t k = 0; k < ex.context.size(); ++k) {
      const auto& c = ex.context[k];
      phi->at(c.offset, c.token.tag, ex.center.tag) -= phi_lr * ws.phi_grad[k];
    }
  }
}

template <class Real>
double sg_forward(TaggedToken center, TaggedToken context,
                  const EmbeddingModel<Real>& model,
                  std::span<const WordId> negatives, StepWorkspace<Real>& ws) {
  ws.prepare(model.dim(), 0, negatives.size() + 1);
  const auto row = model.input.row(center.word);
  std::copy(row.begin(), row.end(), ws.v.begin());
  return ns_forward<Real>(ws.v, context.word, negatives, model.output, ws.coeff,
                          ws.grad_v);
}

template <class Real>
void add_row_gradient(std::vector<std::pair<WordId, std::vector<Real>>>& rows,
                      WordId word, std::span<const Real> g, Real scale) {
  auto it = std::find_if(rows.begin(), rows.end(),
                         [&](const auto& r) { return r.first == word; });
  if (it == rows.end()) {
    rows.emplace_back(word, std::vector<Real>(g.size(), Real(0)));
    it = std::prev(rows.end());
  }
  for (std::size_t j = 0; j < g.size(); ++j) it->second[j] += scale * g[j];
}

}  // namespace detail

/// Negative-sampling loss -log s(w_c . v) - sum_n log s(-w_n . v) and its
/// gradients in v and in every target output row.
template <class Real>
NsLoss<Real> ns_loss(std::span<const Real> v, WordId center,
                     std::span<const WordId> negatives, const Matrix<Real>& output) {
  NsLoss<Real> out;
  std::vector<Real> coeff(negatives.size() + 1);
  out.grad_v.resize(v.size());
  out.loss = detail::ns_forward<Real>(v, center, negatives, output, coeff, out.grad_v);
  for (Real g : coeff) {
    std::vector<Real> row(v.size());
    for (std::size_t j = 0; j < v.size(); ++j) row[j] = g * v[j];
    out.grad_out.push_back(std::move(row));
  }
  return out;
}

/// Analytic gradients of one example's NS loss, aggregated per parameter.
template <class Real>
struct ExampleGradients {
  double loss = 0;
  std::vector<Real> grad_v;
  /// One entry per distinct input row touched, in first-touch order.
  std::vector<std::pair<WordId, std::vector<Real>>> input_rows;
  /// One entry per distinct output row touched, in first-touch order.
  std::vector<std::pair<WordId, std::vector<Real>>> output_rows;
  /// Relevance-weight gradient for each context entry, in context order.
  std::vector<Real> phi;
};

template <class Real>
ExampleGradients<Real> pwe_gradients(const TrainingExample& ex,
                                     const EmbeddingModel<Real>& model,
                                     const RelevanceTensor<Real>& phi,
                                     std::span<const WordId> negatives) {
  StepWorkspace<Real> ws;
  ExampleGradients<Real> g;
  g.loss = detail::cbow_forward<true, Real>(ex, model, &phi, negatives, ws);
  g.grad_v = ws.grad_v;
  for (std::size_t k = 0; k < ex.context.size(); ++k) {
    const auto& c = ex.context[k];
    detail::add_row_gradient<Real>(g.input_rows, c.token.word, ws.grad_v, ws.weights[k]);
    g.phi.push_back(dot<Real>(ws.grad_v, model.input.row(c.token.word)));
  }
  for (std::size_t j = 0; j <= negatives.size(); ++j) {
    const WordId target = j == 0 ? ex.center.word : negatives[j - 1];
    detail::add_row_gradient<Real>(g.output_rows, target, ws.v, ws.coeff[j]);
  }
  return g;
}

template <class Real>
ExampleGradients<Real> sg_gradients(TaggedToken center, TaggedToken context,
                                    const EmbeddingModel<Real>& model,
                                    std::span<const WordId> negatives) {
  StepWorkspace<Real> ws;
  ExampleGradients<Real> g;
  g.loss = detail::sg_forward<Real>(center, context, model, negatives, ws);
  g.grad_v = ws.grad_v;
  detail::add_row_gradient<Real>(g.input_rows, center.word, ws.grad_v, Real(1));
  for (std::size_t j = 0; j <= negatives.size(); ++j) {
    const WordId target = j == 0 ? context.word : negatives[j - 1];
    detail::add_row_gradient<Real>(g.output_rows, target, ws.v, ws.coeff[j]);
  }
  return g;
}

template <class Real>
double pwe_loss(const TrainingExample& ex, const EmbeddingModel<Real>& model,
                const RelevanceTensor<Real>& phi, std::span<const WordId> negatives) {
  StepWorkspace<Real> ws;
  return detail::cbow_forward<true, Real>(ex, model, &phi, negatives, ws);
}

template <class Real>
double cbow_loss(const TrainingExample& ex, const EmbeddingModel<Real>& model,
                 std::span<const WordId> negatives) {
  StepWorkspace<Real> ws;
  return detail::cbow_forward<false, Real>(ex, model, nullptr, negatives, ws);
}

template <class Real>
double sg_loss(TaggedToken center, TaggedToken context,
               const EmbeddingModel<Real>& model, std::span<const WordId> negatives) {
  StepWorkspace<Real> ws;
  return detail::sg_forward<Real>(center, context, model, negatives, ws);
}

// ---------------------------------------------------------------------------
// SGD steps. Every gradient is taken at the pre-step parameters; the loss
// returned is the pre-step loss.

/// One PWE step. Relevance weights learn at `phi_lr`; 0 freezes them.
template <class Real>
double pwe_step(const TrainingExample& ex, EmbeddingModel<Real>& model,
                RelevanceTensor<Real>& phi, std::span<const WordId> negatives,
                Real lr, Real phi_lr, StepWorkspace<Real>& ws) {
  const double loss = detail::cbow_forward<true, Real>(ex, model, &phi, negatives, ws);
  detail::cbow_apply<true, Real>(ex, model, &phi, negatives, lr, phi_lr, ws);
  return loss;
}

template <class Real>
double pwe_step(const TrainingExample& ex, EmbeddingModel<Real>& model,
                RelevanceTensor<Real>& phi, std::span<const WordId> negatives,
                Real lr, Real phi_lr) {
  StepWorkspace<Real> ws;
  return pwe_step(ex, model, phi, negatives, lr, phi_lr, ws);
}

/// Baseline CBOW step: the PWE step with every weight fixed at 1. Window
/// reduction for the dynamic window happens before the example gets here.
template <class Real>
double cbow_step(const TrainingExample& ex, EmbeddingModel<Real>& model,
                 std::span<const WordId> negatives, Real lr, StepWorkspace<Real>& ws) {
  const double loss = detail::cbow_forward<false, Real>(ex, model, nullptr, negatives, ws);
  detail::cbow_apply<false, Real>(ex, model, nullptr, negatives, lr, Real(0), ws);
  return loss;
}

template <class Real>
double cbow_step(const TrainingExample& ex, EmbeddingModel<Real>& model,
                 std::span<const WordId> negatives, Real lr) {
  StepWorkspace<Real> ws;
  return cbow_step(ex, model, negatives, lr, ws);
}

/// Skip-gram step: the center's input row predicts `context` against the
/// negatives.
template <class Real>
double sg_step(TaggedToken center, TaggedToken context, EmbeddingModel<Real>& model,
               std::span<const WordId> negatives, Real lr, StepWorkspace<Real>& ws) {
  const double loss = detail::sg_forward<Real>(center, context, model, negatives, ws);
  detail::apply_output_update<Real>(model.output, context.word, negatives, ws.coeff,
                                    ws.v, lr);
  auto row = model.input.row(center.word);
  for (std::size_t j = 0; j < row.size(); ++j) row[j] -= lr * ws.grad_v[j];
  return loss;
}

template <class Real>
double sg_step(TaggedToken center, TaggedToken context, EmbeddingModel<Real>& model,
               std::span<const WordId> negatives, Real lr) {
  StepWorkspace<Real> ws;
  return sg_step(center, context, model, negatives, lr, ws);
}

}  // namespace pwe
