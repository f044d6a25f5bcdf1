#include "fusionrec/trainer.hpp"

#include <algorithm>
#include <map>
#include <numbers>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "fusionrec/log.hpp"
#include "fusionrec/rng.hpp"

namespace fusionrec {

double cosine_embedding_loss(std::span<const float> a, std::span<const float> b, int y,
                             double margin) {
  if (a.size() != b.size()) throw ShapeMismatch("loss operands differ in length");
  if (y != 1 && y != -1) throw InvalidConfig("label must be +1 or -1");
  Eigen::Map<const Eigen::VectorXf> ma(a.data(), static_cast<Eigen::Index>(a.size()));
  Eigen::Map<const Eigen::VectorXf> mb(b.data(), static_cast<Eigen::Index>(b.size()));
  auto r = cosine_embedding_loss_grad<double>(ma.cast<double>(), mb.cast<double>(), y, margin);
  if (r.zero_vector) warn("cosine embedding loss: zero vector, similarity taken as 0");
  return r.loss;
}

void adamw_update(std::span<float> theta, std::span<const float> grad, std::span<float> m,
                  std::span<float> v, std::uint64_t step, double lr, const AdamWConfig& cfg) {
  if (grad.size() != theta.size() || m.size() != theta.size() || v.size() != theta.size())
    throw ShapeMismatch("optimizer block shapes differ");
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < theta.size(); ++i) {
    const double g = grad[i];
    const double mi = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
    const double vi = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
    m[i] = static_cast<float>(mi);
    v[i] = static_cast<float>(vi);
    const double m_hat = mi / bc1;
    const double v_hat = vi / bc2;
    const double t = theta[i];
    theta[i] = static_cast<float>(t - lr * (m_hat / (std::sqrt(v_hat) + cfg.eps) +
                                            cfg.weight_decay * t));
  }
}

OptimizerState OptimizerState::fresh(const FusionParameters& like, AdamWConfig cfg) {
  OptimizerState s;
  s.m = FusionGradients::zeros(like.text_dim(), like.genre_dim());
  s.v = FusionGradients::zeros(like.text_dim(), like.genre_dim());
  s.config = cfg;
  return s;
}

void adamw_step(OptimizerState& state, FusionParameters& params, const FusionGradients& grads,
                double lr) {
  if (grads.W_g.rows() != params.W_g.rows() || grads.W_g.cols() != params.W_g.cols() ||
      state.m.W_f.cols() != params.W_f.cols() || state.m.W_g.cols() != params.W_g.cols())
    throw ShapeMismatch("optimizer state, gradients and parameters differ in shape");
  ++state.step_count;
  auto apply = [&](auto& theta, const auto& g, auto& m, auto& v) {
    adamw_update({theta.data(), static_cast<std::size_t>(theta.size())},
                 {g.data(), static_cast<std::size_t>(g.size())},
                 {m.data(), static_cast<std::size_t>(m.size())},
                 {v.data(), static_cast<std::size_t>(v.size())}, state.step_count, lr,
                 state.config);
  };
  apply(params.W_g, grads.W_g, state.m.W_g, state.v.W_g);
  apply(params.b_g, grads.b_g, state.m.b_g, state.v.b_g);
  apply(params.W_f, grads.W_f, state.m.W_f, state.v.W_f);
  apply(params.b_f, grads.b_f, state.m.b_f, state.v.b_f);
}

double scheduled_lr(double T_cur, double T_i, const SchedulerConfig& cfg) {
  return cfg.eta_min +
         (cfg.base_lr - cfg.eta_min) * (1.0 + std::cos(std::numbers::pi * T_cur / T_i)) / 2.0;
}

WarmRestartScheduler::WarmRestartScheduler(SchedulerConfig cfg)
    : cfg_(cfg), T_i_(static_cast<double>(cfg.T_0)) {
  if (cfg.T_0 < 1 || cfg.T_mult < 1) throw InvalidConfig("scheduler needs T_0 >= 1, T_mult >= 1");
}

void WarmRestartScheduler::step() {
  ++epoch_;
  T_cur_ += 1.0;
  if (T_cur_ >= T_i_) {
    T_cur_ -= T_i_;
    T_i_ *= cfg_.T_mult;
  }
}

std::vector<std::uint64_t> restart_boundaries(std::uint32_t T_0, std::uint32_t T_mult,
                                              std::uint64_t horizon) {
  if (T_0 < 1 || T_mult < 1) throw InvalidConfig("scheduler needs T_0 >= 1, T_mult >= 1");
  std::vector<std::uint64_t> out;
  std::uint64_t period = T_0;
  std::uint64_t at = T_0;
  while (at <= horizon) {
    out.push_back(at);
    period *= T_mult;
    at += period;
  }
  return out;
}

double genre_jaccard(std::span<const std::string> a, std::span<const std::string> b) {
  std::set<std::string_view> sa(a.begin(), a.end());
  std::set<std::string_view> sb(b.begin(), b.end());
  if (sa.empty() && sb.empty()) return 0.0;
  std::size_t inter = 0;
  for (auto g : sa) inter += sb.count(g);
  return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

std::vector<TrainingPair> sample_pairs(const std::vector<Item>& source,
                                       const std::vector<Item>& target,
                                       const std::vector<Rating>* ratings,
                                       const PairSamplingConfig& config) {
  if (source.empty() || target.empty()) throw EmptyInput("pair sampling needs both catalogs");
  if (!(config.jaccard_threshold > 0.0 && config.jaccard_threshold <= 1.0))
    throw InvalidConfig("jaccard threshold must be in (0, 1]");

  // Inverted index genre -> target positions; only pairs sharing a genre
  // can reach a positive Jaccard.
  std::unordered_map<std::string, std::vector<std::size_t>> by_genre;
  std::vector<std::size_t> target_sizes(target.size());
  for (std::size_t t = 0; t < target.size(); ++t) {
    std::set<std::string> uniq(target[t].genres.begin(), target[t].genres.end());
    target_sizes[t] = uniq.size();
    for (const auto& g : uniq) by_genre[g].push_back(t);
  }

  std::set<std::pair<std::size_t, std::size_t>> positives;
  std::vector<std::uint32_t> shared(target.size(), 0);
  std::vector<std::size_t> touched;
  for (std::size_t s = 0; s < source.size(); ++s) {
    std::set<std::string> uniq(source[s].genres.begin(), source[s].genres.end());
    touched.clear();
    for (const auto& g : uniq) {
      auto it = by_genre.find(g);
      if (it == by_genre.end()) continue;
      for (auto t : it->second) {
        if (shared[t]++ == 0) touched.push_back(t);
      }
    }
    for (auto t : touched) {
      const double j = static_cast<double>(shared[t]) /
                       static_cast<double>(uniq.size() + target_sizes[t] - shared[t]);
      if (j >= config.jaccard_threshold) positives.emplace(s, t);
      shared[t] = 0;
    }
  }

  if (ratings) {
    ItemLookup src_lookup(source);
    ItemLookup tgt_lookup(target);
    std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<std::size_t>>> liked;
    for (const auto& r : *ratings) {
      if (r.rating < config.like_threshold) continue;
      auto& entry = liked[r.user_id];
      if (r.domain == Domain::Source) {
        if (auto p = src_lookup.position(r.item_id)) entry.first.push_back(*p);
      } else if (auto p = tgt_lookup.position(r.item_id)) {
        entry.second.push_back(*p);
      }
    }
    for (const auto& [user, sides] : liked)
      for (auto s : sides.first)
        for (auto t : sides.second) positives.emplace(s, t);
  }

  if (positives.empty()) throw NoPositivePairs("no source/target pair passes the positive rule");

  Rng rng(config.seed);
  std::vector<std::pair<std::size_t, std::size_t>> pos(positives.begin(), positives.end());
  if (config.max_positives > 0 && pos.size() > config.max_positives) {
    rng.shuffle(std::span(pos));
    pos.resize(config.max_positives);
    std::sort(pos.begin(), pos.end());
  }

  std::vector<TrainingPair> out;
  out.reserve(pos.size() * (1 + config.negatives_per_positive));
  constexpr int kMaxAttempts = 1000;
  std::size_t missed = 0;
  for (const auto& [s, t] : pos) {
    out.push_back({source[s].id, target[t].id, 1});
    for (std::uint32_t n = 0; n < config.negatives_per_positive; ++n) {
      bool found = false;
      for (int attempt = 0; attempt < kMaxAttempts && !found; ++attempt) {
        const auto ns = static_cast<std::size_t>(rng.below(source.size()));
        const auto nt = static_cast<std::size_t>(rng.below(target.size()));
        if (positives.contains({ns, nt})) continue;
        if (genre_jaccard(source[ns].genres, target[nt].genres) >= config.jaccard_threshold)
          continue;
        out.push_back({source[ns].id, target[nt].id, -1});
        found = true;
      }
      if (!found) ++missed;
    }
  }
  if (missed > 0)
    warn("pair sampling: " + std::to_string(missed) + " negative draw(s) found no eligible pair");
  return out;
}

void TrainConfig::validate() const {
  if (epochs < 1) throw InvalidConfig("epochs must be >= 1");
  if (batch_size < 1) throw InvalidConfig("batch_size must be >= 1");
  if (!(base_lr > 0.0)) throw InvalidConfig("base_lr must be > 0");
  if (!(margin >= 0.0 && margin < 1.0)) throw InvalidConfig("margin must be in [0, 1)");
  if (!(max_grad_norm > 0.0)) throw InvalidConfig("max_grad_norm must be > 0");
  if (T_0 < 1 || T_mult < 1) throw InvalidConfig("T_0 and T_mult must be >= 1");
  if (!(eta_min >= 0.0 && eta_min <= base_lr)) throw InvalidConfig("eta_min must be in [0, base_lr]");
  if (!(weight_decay >= 0.0)) throw InvalidConfig("weight_decay must be >= 0");
}

TrainResult train(const FeatureTable& source, const FeatureTable& target,
                  const std::vector<TrainingPair>& pairs, const TrainConfig& config,
                  FusionParameters initial) {
  config.validate();
  if (pairs.empty()) throw EmptyInput("no training pairs");
  if (initial.text_dim() != source.text.rows() || initial.genre_dim() != source.genre.rows() ||
      source.text.rows() != target.text.rows() || source.genre.rows() != target.genre.rows())
    throw ShapeMismatch("feature tables do not match fusion parameter shapes");

  struct Resolved {
    std::size_t s, t;
    int label;
  };
  std::vector<Resolved> resolved;
  resolved.reserve(pairs.size());
  TrainResult result{std::move(initial), {}};
  auto& report = result.report;
  report.config = config;
  report.pair_count = pairs.size();
  for (const auto& p : pairs) {
    auto s = source.position(p.source_id);
    auto t = target.position(p.target_id);
    if (!s || !t)
      throw InvalidConfig("training pair references unknown id '" +
                          (s ? p.target_id : p.source_id) + "'");
    if (p.label != 1 && p.label != -1) throw InvalidConfig("pair label must be +1 or -1");
    (p.label == 1 ? report.positive_count : report.negative_count)++;
    resolved.push_back({*s, *t, p.label});
  }

  auto& params = result.params;
  OptimizerState opt = OptimizerState::fresh(params, {.weight_decay = config.weight_decay});
  WarmRestartScheduler scheduler(
      {.base_lr = config.base_lr, .eta_min = config.eta_min, .T_0 = config.T_0, .T_mult = config.T_mult});
  Rng rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(resolved.size());
  auto grads = FusionGradients::zeros(params.text_dim(), params.genre_dim());

  for (std::uint32_t epoch = 0; epoch < config.epochs; ++epoch) {
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(std::span(order));
    const double lr = scheduler.lr();
    report.lr_trace.push_back(lr);
    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      const auto B = static_cast<Eigen::Index>(end - start);
      PairBatch<float> batch;
      batch.source_text.resize(source.text.rows(), B);
      batch.source_genre.resize(source.genre.rows(), B);
      batch.target_text.resize(target.text.rows(), B);
      batch.target_genre.resize(target.genre.rows(), B);
      for (Eigen::Index k = 0; k < B; ++k) {
        const auto& r = resolved[order[start + static_cast<std::size_t>(k)]];
        const auto s = static_cast<Eigen::Index>(r.s);
        const auto t = static_cast<Eigen::Index>(r.t);
        batch.source_text.col(k) = source.text.col(s);
        batch.source_genre.col(k) = source.genre.col(s);
        batch.target_text.col(k) = target.text.col(t);
        batch.target_genre.col(k) = target.genre.col(t);
        batch.labels.push_back(r.label);
      }
      grads.for_each_block([](float* d, Eigen::Index n) { std::fill(d, d + n, 0.0f); });
      const auto info = batch_loss<float>(params, batch, config.margin, &grads);
      report.zero_vector_warnings += info.zero_vectors;
      loss_sum += info.loss;
      ++batches;
      clip_gradients(grads, config.max_grad_norm);
      adamw_step(opt, params, grads, lr);
      ++report.steps;
    }
    const double mean_loss = loss_sum / static_cast<double>(batches);
    if (!std::isfinite(mean_loss))
      throw DivergedLoss("epoch " + std::to_string(epoch + 1) + " mean loss is not finite");
    report.epoch_loss.push_back(mean_loss);
    scheduler.step();
  }
  if (report.zero_vector_warnings > 0)
    warn("training: " + std::to_string(report.zero_vector_warnings) +
         " pair(s) had a zero fused vector; similarity taken as 0");
  return result;
}

TrainResult train(const FeatureTable& source, const FeatureTable& target,
                  const std::vector<TrainingPair>& pairs, const TrainConfig& config) {
  config.validate();
  return train(source, target, pairs, config,
               init_params<float>(config.seed, source.text.rows(), source.genre.rows()));
}

TrainResult train(const std::vector<Item>& source, const std::vector<Item>& target,
                  const EncoderProvider& encoder, const GenreEmbeddingModel& genre_model,
                  const std::vector<TrainingPair>& pairs, const TrainConfig& config) {
  config.validate();
  if (pairs.empty()) throw EmptyInput("no training pairs");
  return train(compute_features(source, encoder, genre_model),
               compute_features(target, encoder, genre_model), pairs, config);
}

std::string training_report_json(const TrainingReport& report) {
  const auto& c = report.config;
  nlohmann::ordered_json j;
  j["epoch_loss"] = report.epoch_loss;
  j["lr_trace"] = report.lr_trace;
  j["pair_count"] = report.pair_count;
  j["positive_count"] = report.positive_count;
  j["negative_count"] = report.negative_count;
  j["steps"] = report.steps;
  j["zero_vector_warnings"] = report.zero_vector_warnings;
  j["seed"] = c.seed;
  j["config"] = {{"epochs", c.epochs},
                 {"batch_size", c.batch_size},
                 {"base_lr", c.base_lr},
                 {"margin", c.margin},
                 {"max_grad_norm", c.max_grad_norm},
                 {"T_0", c.T_0},
                 {"T_mult", c.T_mult},
                 {"eta_min", c.eta_min},
                 {"weight_decay", c.weight_decay},
                 {"seed", c.seed}};
  return j.dump(2);
}

}  // namespace fusionrec
