#pragma once

#include <cmath>
#include <limits>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fusionrec/catalog.hpp"
#include "fusionrec/encoder.hpp"
#include "fusionrec/features.hpp"
#include "fusionrec/fusion.hpp"
#include "fusionrec/genre_model.hpp"

namespace fusionrec {

// ---------------------------------------------------------------------------
// Cosine embedding loss
// ---------------------------------------------------------------------------

inline constexpr double kNormEpsilon = 1e-12;

template <typename Scalar>
struct PairLoss {
  double loss = 0.0;
  double sim = 0.0;
  bool zero_vector = false;  // cosine undefined; sim taken as 0
  Vec<Scalar> d_a;
  Vec<Scalar> d_b;
};

/// y = +1: 1 - cos(a, b).  y = -1: max(0, cos(a, b) - margin).
/// Gradients are returned with respect to both inputs.
template <typename Scalar>
PairLoss<Scalar> cosine_embedding_loss_grad(const Vec<Scalar>& a, const Vec<Scalar>& b, int y,
                                            double margin) {
  detail::require_len(b.size(), a.size(), "second loss operand");
  PairLoss<Scalar> r;
  r.d_a = Vec<Scalar>::Zero(a.size());
  r.d_b = Vec<Scalar>::Zero(b.size());
  const double na = std::sqrt(static_cast<double>(a.squaredNorm()));
  const double nb = std::sqrt(static_cast<double>(b.squaredNorm()));
  if (na < kNormEpsilon || nb < kNormEpsilon) {
    r.zero_vector = true;
    r.sim = 0.0;
    r.loss = y == 1 ? 1.0 : std::max(0.0, -margin);
    return r;
  }
  r.sim = static_cast<double>(a.dot(b)) / (na * nb);
  double dsim;  // dL/dsim
  if (y == 1) {
    r.loss = 1.0 - r.sim;
    dsim = -1.0;
  } else {
    r.loss = std::max(0.0, r.sim - margin);
    dsim = r.sim > margin ? 1.0 : 0.0;
  }
  if (dsim != 0.0) {
    const auto s = static_cast<Scalar>(r.sim);
    r.d_a = static_cast<Scalar>(dsim) *
            (b / static_cast<Scalar>(na * nb) - s * a / static_cast<Scalar>(na * na));
    r.d_b = static_cast<Scalar>(dsim) *
            (a / static_cast<Scalar>(na * nb) - s * b / static_cast<Scalar>(nb * nb));
  }
  return r;
}

double cosine_embedding_loss(std::span<const float> a, std::span<const float> b, int y,
                             double margin);

// ---------------------------------------------------------------------------
// Optimizer, schedule, clipping
// ---------------------------------------------------------------------------

struct AdamWConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

/// One decoupled-weight-decay Adam update over a flat block.
/// `step` is the 1-based step number after incrementing.
void adamw_update(std::span<float> theta, std::span<const float> grad, std::span<float> m,
                  std::span<float> v, std::uint64_t step, double lr, const AdamWConfig& cfg);

struct OptimizerState {
  FusionGradients m;
  FusionGradients v;
  std::uint64_t step_count = 0;
  AdamWConfig config;

  static OptimizerState fresh(const FusionParameters& like, AdamWConfig cfg = {});
};

void adamw_step(OptimizerState& state, FusionParameters& params, const FusionGradients& grads,
                double lr);

struct SchedulerConfig {
  double base_lr = 2e-5;
  double eta_min = 0.0;
  std::uint32_t T_0 = 10;
  std::uint32_t T_mult = 2;
};

/// eta_min + (base_lr - eta_min) * (1 + cos(pi * T_cur / T_i)) / 2
double scheduled_lr(double T_cur, double T_i, const SchedulerConfig& cfg);

// Cosine annealing with warm restarts, stepped once per epoch.
class WarmRestartScheduler {
 public:
  explicit WarmRestartScheduler(SchedulerConfig cfg);
  double lr() const { return scheduled_lr(T_cur_, T_i_, cfg_); }
  void step();
  double T_cur() const { return T_cur_; }
  double T_i() const { return T_i_; }
  std::uint64_t epoch() const { return epoch_; }

 private:
  SchedulerConfig cfg_;
  double T_cur_ = 0.0;
  double T_i_;
  std::uint64_t epoch_ = 0;
};

/// Cumulative epochs at which the schedule restarts, up to `horizon`.
std::vector<std::uint64_t> restart_boundaries(std::uint32_t T_0, std::uint32_t T_mult,
                                              std::uint64_t horizon);

/// Rescales all blocks by max_norm / N when the global norm N exceeds max_norm.
/// Returns N. Throws NonFiniteGradient.
template <typename Scalar>
double clip_gradients(BasicFusionGradients<Scalar>& grads, double max_norm) {
  if (!all_finite(grads)) throw NonFiniteGradient("gradient contains NaN or Inf");
  const double norm = global_norm(grads);
  if (norm > max_norm) {
    // Shaved by a few ulps so rounding in the rescale cannot overshoot max_norm.
    const auto scale = static_cast<Scalar>(max_norm / norm *
                                           (1.0 - 4.0 * std::numeric_limits<Scalar>::epsilon()));
    grads.for_each_block([scale](Scalar* data, Eigen::Index n) {
      for (Eigen::Index i = 0; i < n; ++i) data[i] *= scale;
    });
  }
  return norm;
}

// ---------------------------------------------------------------------------
// Training pairs
// ---------------------------------------------------------------------------

struct TrainingPair {
  std::string source_id;
  std::string target_id;
  int label = 1;  // +1 or -1

  bool operator==(const TrainingPair&) const = default;
};

struct PairSamplingConfig {
  double jaccard_threshold = 0.25;
  std::uint32_t negatives_per_positive = 1;
  std::uint64_t seed = 7;
  std::size_t max_positives = 0;  // 0 keeps every positive
  double like_threshold = 4.0;
};

double genre_jaccard(std::span<const std::string> a, std::span<const std::string> b);

/// Positives: genre Jaccard >= threshold, or a user liked both items.
/// Negatives: uniform among pairs below the threshold that are not positive.
std::vector<TrainingPair> sample_pairs(const std::vector<Item>& source,
                                       const std::vector<Item>& target,
                                       const std::vector<Rating>* ratings,
                                       const PairSamplingConfig& config);

// ---------------------------------------------------------------------------
// Training loop
// ---------------------------------------------------------------------------

struct TrainConfig {
  std::uint32_t epochs = 2;
  std::uint32_t batch_size = 32;
  double base_lr = 2e-5;
  double margin = 0.5;
  double max_grad_norm = 1.0;
  std::uint32_t T_0 = 10;
  std::uint32_t T_mult = 2;
  double eta_min = 0.0;
  double weight_decay = 0.01;
  std::uint64_t seed = 7;

  void validate() const;
};

// One batch of pair inputs: column k of the source matrices pairs with
// column k of the target matrices.
template <typename Scalar>
struct PairBatch {
  ColMatrix<Scalar> source_text;
  ColMatrix<Scalar> source_genre;
  ColMatrix<Scalar> target_text;
  ColMatrix<Scalar> target_genre;
  std::vector<int> labels;
};

struct BatchLossInfo {
  double loss = 0.0;
  std::size_t zero_vectors = 0;
};

/// Mean cosine embedding loss over the batch. Both sides go through the same
/// parameters in one stacked forward pass. When `grads` is non-null the batch
/// gradient is accumulated into it.
template <typename Scalar>
BatchLossInfo batch_loss(const BasicFusionParameters<Scalar>& params, const PairBatch<Scalar>& batch,
                         double margin, BasicFusionGradients<Scalar>* grads) {
  const auto B = static_cast<Eigen::Index>(batch.labels.size());
  if (B == 0) throw EmptyInput("empty batch");
  if (batch.source_text.cols() != B || batch.target_text.cols() != B ||
      batch.source_genre.cols() != B || batch.target_genre.cols() != B)
    throw ShapeMismatch("pair batch column counts differ");
  ColMatrix<Scalar> text(batch.source_text.rows(), 2 * B);
  text << batch.source_text, batch.target_text;
  ColMatrix<Scalar> genre(batch.source_genre.rows(), 2 * B);
  genre << batch.source_genre, batch.target_genre;
  auto fw = forward_batch<Scalar>(params, std::move(text), std::move(genre));

  BatchLossInfo info;
  ColMatrix<Scalar> upstream = ColMatrix<Scalar>::Zero(fw.out.rows(), 2 * B);
  const auto inv_b = Scalar(1) / static_cast<Scalar>(B);
  for (Eigen::Index k = 0; k < B; ++k) {
    auto r = cosine_embedding_loss_grad<Scalar>(fw.out.col(k), fw.out.col(B + k),
                                                batch.labels[static_cast<std::size_t>(k)], margin);
    info.loss += r.loss;
    info.zero_vectors += r.zero_vector ? 1 : 0;
    upstream.col(k) = r.d_a * inv_b;
    upstream.col(B + k) = r.d_b * inv_b;
  }
  info.loss /= static_cast<double>(B);
  if (grads) backward_batch<Scalar>(params, fw, upstream, *grads);
  return info;
}

struct TrainingReport {
  std::vector<double> epoch_loss;
  std::vector<double> lr_trace;  // learning rate used in each epoch
  std::size_t pair_count = 0;
  std::size_t positive_count = 0;
  std::size_t negative_count = 0;
  std::size_t steps = 0;
  std::size_t zero_vector_warnings = 0;
  TrainConfig config;
};

/// Per-epoch loss and lr traces, pair counts and the config echo as JSON.
std::string training_report_json(const TrainingReport& report);

struct TrainResult {
  FusionParameters params;
  TrainingReport report;
};

/// Trains from explicit initial parameters.
TrainResult train(const FeatureTable& source, const FeatureTable& target,
                  const std::vector<TrainingPair>& pairs, const TrainConfig& config,
                  FusionParameters initial);

/// Initializes from config.seed and trains.
TrainResult train(const FeatureTable& source, const FeatureTable& target,
                  const std::vector<TrainingPair>& pairs, const TrainConfig& config);

TrainResult train(const std::vector<Item>& source, const std::vector<Item>& target,
                  const EncoderProvider& encoder, const GenreEmbeddingModel& genre_model,
                  const std::vector<TrainingPair>& pairs, const TrainConfig& config);

}  // namespace fusionrec
