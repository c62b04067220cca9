#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "vidprobe/binary_io.hpp"
#include "vidprobe/embedding_store.hpp"
#include "vidprobe/error.hpp"
#include "vidprobe/label.hpp"
#include "vidprobe/random.hpp"

namespace vidprobe {

using Logits = std::array<double, 2>;

/// Two-logit linear classifier. Parameters are stored flat: weight row 0
/// (Real), weight row 1 (Fake), then the two biases.
class LinearProbe {
 public:
  LinearProbe() = default;
  explicit LinearProbe(std::size_t dim, std::string model_id = {})
      : dim_(dim), model_id_(std::move(model_id)), params_(2 * dim + 2, 0.0) {
    if (dim == 0) throw Error(ErrorCode::InvalidArgument, "probe dimension must be at least 1");
  }

  std::size_t dim() const { return dim_; }
  const std::string& model_id() const { return model_id_; }
  void set_model_id(std::string id) { model_id_ = std::move(id); }

  double& weight(std::size_t k, std::size_t j) { return params_[k * dim_ + j]; }
  double weight(std::size_t k, std::size_t j) const { return params_[k * dim_ + j]; }
  double& bias(std::size_t k) { return params_[2 * dim_ + k]; }
  double bias(std::size_t k) const { return params_[2 * dim_ + k]; }

  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  bool operator==(const LinearProbe&) const = default;

 private:
  std::size_t dim_ = 0;
  std::string model_id_;
  std::vector<double> params_;
};

/// Zero weights and bias. The objective is convex, so this only fixes the
/// optimization path; `seed` has no effect on parameters.
inline LinearProbe init_probe(std::size_t dim, std::uint64_t /*seed*/ = 0) { return LinearProbe(dim); }

template <typename T>
Logits forward(const LinearProbe& probe, std::span<const T> x) {
  if (x.size() != probe.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "input has length " + std::to_string(x.size()) + ", probe dim is " + std::to_string(probe.dim()));
  }
  Logits z{probe.bias(0), probe.bias(1)};
  for (std::size_t k = 0; k < 2; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) acc += probe.weight(k, j) * static_cast<double>(x[j]);
    z[k] += acc;
  }
  return z;
}

template <typename T>
Logits forward(const LinearProbe& probe, const std::vector<T>& x) {
  return forward(probe, std::span<const T>(x));
}

struct SoftmaxLoss {
  double loss = 0.0;
  std::array<double, 2> prob{};
};

/// Max-shifted softmax and -log p[true_class]. With two classes the loss is
/// softplus(z_other - z_true), evaluated with log1p so it stays accurate when
/// the true logit dominates and never overflows.
inline SoftmaxLoss softmax_cross_entropy(const Logits& z, std::size_t true_class) {
  if (!std::isfinite(z[0]) || !std::isfinite(z[1])) throw Error(ErrorCode::InvalidFeature, "non-finite logits");
  if (true_class > 1) throw Error(ErrorCode::InvalidArgument, "class index must be 0 or 1");
  const double m = std::max(z[0], z[1]);
  const double e0 = std::exp(z[0] - m);
  const double e1 = std::exp(z[1] - m);
  const double sum = e0 + e1;
  SoftmaxLoss out;
  out.prob = {e0 / sum, e1 / sum};
  const double t = z[1 - true_class] - z[true_class];
  out.loss = t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t));
  return out;
}

/// Dense training matrix (rows x dim) with labels.
struct Dataset {
  std::size_t dim = 0;
  std::vector<double> x;
  std::vector<ClassLabel> y;

  std::size_t size() const { return y.size(); }
  std::span<const double> row(std::size_t i) const { return {x.data() + i * dim, dim}; }

  void add(std::span<const float> v, ClassLabel label) {
    if (dim == 0) dim = v.size();
    if (v.size() != dim || dim == 0) {
      throw Error(ErrorCode::DimensionMismatch, "sample has length " + std::to_string(v.size()) + ", expected " +
                                                    std::to_string(dim));
    }
    for (float f : v) x.push_back(static_cast<double>(f));
    y.push_back(label);
  }
};

inline Dataset make_dataset(std::span<const EmbeddingRecord> records) {
  Dataset d;
  for (const auto& r : records) d.add(r.vector, r.class_label);
  return d;
}

inline Dataset make_dataset(const std::vector<EmbeddingRecord>& records) {
  return make_dataset(std::span<const EmbeddingRecord>(records));
}

struct Gradients {
  std::vector<double> params;  // same layout as LinearProbe::params()
  double mean_loss = 0.0;
};

/// Mean cross-entropy gradient over the selected rows. With e = p - onehot(y):
/// dW = mean(e x^T), db = mean(e).
inline Gradients gradients(const LinearProbe& probe, const Dataset& data, std::span<const std::size_t> rows) {
  if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "empty batch");
  if (data.dim != probe.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "data dim " + std::to_string(data.dim) + ", probe dim " + std::to_string(probe.dim()));
  }
  const std::size_t dim = probe.dim();
  Gradients g;
  g.params.assign(2 * dim + 2, 0.0);
  double loss = 0.0;
  for (std::size_t i : rows) {
    const auto x = data.row(i);
    const auto sm = softmax_cross_entropy(forward(probe, x), class_index(data.y[i]));
    loss += sm.loss;
    for (std::size_t k = 0; k < 2; ++k) {
      const double e = sm.prob[k] - (class_index(data.y[i]) == k ? 1.0 : 0.0);
      double* gw = g.params.data() + k * dim;
      for (std::size_t j = 0; j < dim; ++j) gw[j] += e * x[j];
      g.params[2 * dim + k] += e;
    }
  }
  const double inv = 1.0 / static_cast<double>(rows.size());
  for (double& v : g.params) v *= inv;
  g.mean_loss = loss * inv;
  return g;
}

inline Gradients gradients(const LinearProbe& probe, const Dataset& data) {
  std::vector<std::size_t> rows(data.size());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return gradients(probe, data, rows);
}

struct AdamOptions {
  double lr = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct AdamState {
  AdamOptions options;
  std::vector<double> m;
  std::vector<double> v;
  std::uint64_t t = 0;

  AdamState() = default;
  AdamState(std::size_t n, AdamOptions opts = {}) : options(opts), m(n, 0.0), v(n, 0.0) {}
};

/// One bias-corrected Adam update, in place.
inline void adam_step(std::span<double> params, AdamState& state, std::span<const double> grads) {
  if (grads.size() != params.size() || state.m.size() != params.size() || state.v.size() != params.size()) {
    throw Error(ErrorCode::DimensionMismatch, "parameter, gradient and optimizer state sizes differ");
  }
  for (double g : grads) {
    if (!std::isfinite(g)) throw Error(ErrorCode::InvalidFeature, "non-finite gradient");
  }
  const auto& o = state.options;
  ++state.t;
  const double c1 = 1.0 - std::pow(o.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(o.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    state.m[i] = o.beta1 * state.m[i] + (1.0 - o.beta1) * g;
    state.v[i] = o.beta2 * state.v[i] + (1.0 - o.beta2) * g * g;
    const double m_hat = state.m[i] / c1;
    const double v_hat = state.v[i] / c2;
    params[i] -= o.lr * m_hat / (std::sqrt(v_hat) + o.eps);
  }
}

inline void adam_step(LinearProbe& probe, AdamState& state, const Gradients& g) {
  adam_step(probe.params(), state, g.params);
}

struct TrainConfig {
  std::uint32_t epochs = 100;
  std::uint32_t batch_size = 32;
  std::uint64_t seed = 0;
  bool shuffle = true;
  AdamOptions adam;
};

struct TrainResult {
  LinearProbe probe;
  std::vector<double> loss_history;  // one mean loss per optimizer step

  /// Mean of the step losses in the given epoch.
  double epoch_loss(std::size_t epoch, std::size_t steps_per_epoch) const {
    double acc = 0.0;
    for (std::size_t s = 0; s < steps_per_epoch; ++s) acc += loss_history[epoch * steps_per_epoch + s];
    return acc / static_cast<double>(steps_per_epoch);
  }
};

/// Mini-batch Adam on cross-entropy. Epoch e visits rows in the order of
/// seeded_permutation(n, seed, e) (identity when shuffling is off); the last
/// batch of an epoch may be short.
inline TrainResult train(const Dataset& data, const TrainConfig& config, std::string model_id = {}) {
  if (config.epochs < 1) throw Error(ErrorCode::InvalidArgument, "epochs must be at least 1");
  if (config.batch_size < 1) throw Error(ErrorCode::InvalidArgument, "batch size must be at least 1");
  if (data.size() == 0) throw Error(ErrorCode::DegenerateLabels, "training set is empty");
  const auto n_real = static_cast<std::size_t>(std::count(data.y.begin(), data.y.end(), ClassLabel::Real));
  if (n_real == 0 || n_real == data.size()) {
    throw Error(ErrorCode::DegenerateLabels, "training set contains a single class");
  }

  TrainResult out{LinearProbe(data.dim, std::move(model_id)), {}};
  AdamState state(out.probe.params().size(), config.adam);
  const std::size_t n = data.size();
  const std::size_t bs = config.batch_size;
  const std::size_t steps = (n + bs - 1) / bs;
  out.loss_history.reserve(static_cast<std::size_t>(config.epochs) * steps);

  std::vector<std::size_t> order(n);
  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (config.shuffle) {
      order = seeded_permutation(n, config.seed, epoch);
    } else {
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
    }
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t lo = s * bs;
      const std::size_t hi = std::min(n, lo + bs);
      auto g = gradients(out.probe, data, std::span<const std::size_t>(order).subspan(lo, hi - lo));
      adam_step(out.probe, state, g);
      out.loss_history.push_back(g.mean_loss);
    }
  }
  return out;
}

struct ProbePrediction {
  ClassLabel label = ClassLabel::Real;
  double p_fake = 0.5;
};

/// Argmax of the logits; exactly equal logits resolve to Real.
template <typename T>
ProbePrediction predict(const LinearProbe& probe, std::span<const T> x) {
  const auto z = forward(probe, x);
  const auto sm = softmax_cross_entropy(z, 0);
  return {z[1] > z[0] ? ClassLabel::Fake : ClassLabel::Real, sm.prob[1]};
}

template <typename T>
ProbePrediction predict(const LinearProbe& probe, const std::vector<T>& x) {
  return predict(probe, std::span<const T>(x));
}

// ---------------------------------------------------------------------------
// VAPM probe file (little-endian):
//   "VAPM" | u32 version=1 | str16 model_id | u32 dim | (2*dim + 2) x f64 |
//   u32 epochs | u32 batch | f64 lr | u64 seed
// ---------------------------------------------------------------------------

inline constexpr std::string_view kProbeMagic = "VAPM";
inline constexpr std::uint32_t kProbeVersion = 1;

struct ProbeFile {
  LinearProbe probe;
  std::uint32_t epochs = 0;
  std::uint32_t batch_size = 0;
  double lr = 0.0;
  std::uint64_t seed = 0;

  bool operator==(const ProbeFile&) const = default;
};

inline ProbeFile make_probe_file(LinearProbe probe, const TrainConfig& config) {
  return {std::move(probe), config.epochs, config.batch_size, config.adam.lr, config.seed};
}

inline std::string serialize_probe(const ProbeFile& f) {
  for (double p : f.probe.params()) {
    if (!std::isfinite(p)) throw Error(ErrorCode::InvariantViolation, "probe has non-finite parameters");
  }
  binary::Writer w;
  w.bytes(kProbeMagic);
  w.uint(kProbeVersion);
  w.str16(f.probe.model_id());
  w.uint(static_cast<std::uint32_t>(f.probe.dim()));
  for (double p : f.probe.params()) w.f64(p);
  w.uint(f.epochs);
  w.uint(f.batch_size);
  w.f64(f.lr);
  w.uint(f.seed);
  return std::move(w).take();
}

inline ProbeFile parse_probe(std::string_view bytes) {
  if (bytes.substr(0, kProbeMagic.size()) != kProbeMagic) {
    throw Error(ErrorCode::UnsupportedFormat, "missing VAPM magic");
  }
  binary::Reader r(bytes, ErrorCode::CorruptStore);
  r.bytes(4);
  const auto version = r.uint<std::uint32_t>();
  if (version != kProbeVersion) throw Error(ErrorCode::UnsupportedFormat, "probe version " + std::to_string(version));
  auto model_id = r.str16();
  const auto dim = r.uint<std::uint32_t>();
  if (dim == 0) throw Error(ErrorCode::CorruptStore, "probe dimension is zero");
  if (r.remaining() / 8 < 2 * std::uint64_t{dim} + 2) throw Error(ErrorCode::CorruptStore, "probe file truncated");
  ProbeFile f;
  f.probe = LinearProbe(dim, std::move(model_id));
  for (double& p : f.probe.params()) {
    p = r.f64();
    if (!std::isfinite(p)) throw Error(ErrorCode::CorruptStore, "non-finite probe parameter");
  }
  f.epochs = r.uint<std::uint32_t>();
  f.batch_size = r.uint<std::uint32_t>();
  f.lr = r.f64();
  f.seed = r.uint<std::uint64_t>();
  if (!r.at_end()) throw Error(ErrorCode::CorruptStore, "trailing bytes in probe file");
  return f;
}

inline std::size_t save_probe(const ProbeFile& f, const std::filesystem::path& path) {
  const auto bytes = serialize_probe(f);
  binary::write_file_atomic(path, bytes);
  return bytes.size();
}

inline ProbeFile load_probe(const std::filesystem::path& path) { return parse_probe(binary::read_file(path)); }

/// Dimension mismatch is an error; a different encoder id only warns, since
/// the features may still be compatible.
inline std::vector<std::string> check_compatibility(const LinearProbe& probe, const EmbeddingStore& store) {
  if (probe.dim() != store.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "probe dim " + std::to_string(probe.dim()) + " vs store dim " +
                                                  std::to_string(store.dim()));
  }
  std::vector<std::string> warnings;
  if (probe.model_id() != store.model_id()) {
    warnings.push_back("probe was trained on '" + probe.model_id() + "' features, store holds '" +
                       store.model_id() + "'");
  }
  return warnings;
}

}  // namespace vidprobe
