#include "fusionrec/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

#include "fusionrec/log.hpp"

namespace fusionrec {

std::string_view to_string(EvalMode mode) {
  switch (mode) {
    case EvalMode::Fused: return "fused";
    case EvalMode::TextOnly: return "text_only";
    case EvalMode::GenreOnly: return "genre_only";
    case EvalMode::TfidfOnly: return "tfidf_only";
  }
  return "fused";
}

std::optional<EvalMode> parse_eval_mode(std::string_view s) {
  for (auto m : kAllModes)
    if (to_string(m) == s) return m;
  return std::nullopt;
}

std::vector<EvalUser> build_eval_users(const std::vector<Rating>& ratings) {
  std::map<std::string, EvalUser> by_user;
  for (const auto& r : ratings) {
    if (r.rating < kLikeThreshold) continue;
    auto& u = by_user[r.user_id];
    u.user_id = r.user_id;
    if (r.domain == Domain::Source) {
      u.liked_sources.push_back(r.item_id);
    } else {
      u.liked_targets[r.item_id] = r.rating;
    }
  }
  std::vector<EvalUser> out;
  for (auto& [id, u] : by_user) {
    std::sort(u.liked_sources.begin(), u.liked_sources.end());
    u.liked_sources.erase(std::unique(u.liked_sources.begin(), u.liked_sources.end()),
                          u.liked_sources.end());
    if (!u.liked_sources.empty() && !u.liked_targets.empty()) out.push_back(std::move(u));
  }
  if (out.empty()) throw NoEvalUsers("no user liked (rating >= 4) items in both domains");
  return out;
}

std::pair<double, double> mae_rmse(std::span<const double> preds, std::span<const double> truths) {
  if (preds.size() != truths.size()) throw LengthMismatch("predictions and truths differ in length");
  if (preds.empty()) throw EmptyInput("no predictions");
  double abs_sum = 0.0, sq_sum = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    const double e = preds[i] - truths[i];
    abs_sum += std::abs(e);
    sq_sum += e * e;
  }
  const double n = static_cast<double>(preds.size());
  return {abs_sum / n, std::sqrt(sq_sum / n)};
}

std::vector<double> scores_to_ratings(std::span<const double> scores) {
  std::vector<double> out(scores.size(), 3.0);
  if (scores.empty()) return out;
  const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < scores.size(); ++i) out[i] = 1.0 + 4.0 * ((scores[i] - *lo) / range);
  return out;
}

std::size_t threshold_count(int percent, std::size_t m) {
  return (static_cast<std::size_t>(percent) * m + 99) / 100;
}

Evaluator::Evaluator(const Recommender& recommender, ColMatrix<float> target_text)
    : recommender_(recommender),
      target_text_(std::move(target_text)),
      source_lookup_(recommender.source()) {
  const auto& ids = recommender_.index().item_ids;
  for (std::size_t i = 0; i < ids.size(); ++i) index_pos_.emplace(ids[i], i);
  if (target_text_.size() != 0 &&
      static_cast<std::size_t>(target_text_.cols()) != recommender_.index().size())
    throw ShapeMismatch("target text matrix does not match index row count");
}

std::vector<double> Evaluator::scores(const EvalUser& user, EvalMode mode,
                                      const ScoreWeights& weights) const {
  const auto profile = recommender_.seed_profile(user.liked_sources);
  const auto& index = recommender_.index();
  std::vector<double> out(index.size());
  switch (mode) {
    case EvalMode::Fused: {
      const auto breakdowns = recommender_.score_all(profile, weights);
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = breakdowns[i].combined;
      break;
    }
    case EvalMode::TextOnly: {
      if (target_text_.size() == 0) throw InvalidConfig("text_only mode needs raw target embeddings");
      for (std::size_t i = 0; i < out.size(); ++i) {
        const auto col = target_text_.col(static_cast<Eigen::Index>(i));
        out[i] = cosine(profile.text, std::span<const float>(col.data(), static_cast<std::size_t>(col.size())));
      }
      break;
    }
    case EvalMode::GenreOnly:
      for (std::size_t i = 0; i < out.size(); ++i) out[i] = cosine(profile.genre, index.genre_row(i));
      break;
    case EvalMode::TfidfOnly:
      for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = sparse_cosine(profile.tfidf, index.tfidf_rows[i]);
      break;
  }
  return out;
}

std::map<std::string, double> Evaluator::predict_ratings(const EvalUser& user, EvalMode mode,
                                                         const ScoreWeights& weights) const {
  const auto preds = scores_to_ratings(scores(user, mode, weights));
  const auto& ids = recommender_.index().item_ids;
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < ids.size(); ++i) out.emplace(ids[i], preds[i]);
  return out;
}

std::optional<EvalUser> Evaluator::resolve(const EvalUser& user) const {
  EvalUser u;
  u.user_id = user.user_id;
  for (const auto& s : user.liked_sources)
    if (source_lookup_.find(s)) u.liked_sources.push_back(s);
  for (const auto& [t, r] : user.liked_targets)
    if (index_pos_.contains(t)) u.liked_targets.emplace(t, r);
  if (u.liked_sources.empty() || u.liked_targets.empty()) return std::nullopt;
  return u;
}

EvalReport Evaluator::evaluate(std::span<const EvalUser> users, EvalMode mode,
                               const ScoreWeights& weights, std::span<const int> thresholds,
                               std::vector<UserEvaluation>* details) const {
  for (int p : thresholds)
    if (p < 1 || p > 100) throw InvalidConfig("thresholds must be percentages in [1, 100]");
  EvalReport report;
  report.mode = mode;
  std::map<int, std::vector<double>> preds, truths;
  std::size_t skipped = 0;
  for (const auto& raw : users) {
    auto user = resolve(raw);
    if (!user) {
      ++skipped;
      continue;
    }
    const auto all_preds = scores_to_ratings(scores(*user, mode, weights));
    UserEvaluation ue;
    ue.user_id = user->user_id;
    std::vector<std::pair<std::string, double>> ranked(user->liked_targets.begin(),
                                                       user->liked_targets.end());
    std::vector<double> pred_of(ranked.size());
    for (std::size_t i = 0; i < ranked.size(); ++i)
      pred_of[i] = all_preds[index_pos_.at(ranked[i].first)];
    std::vector<std::size_t> order(ranked.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      if (pred_of[a] != pred_of[b]) return pred_of[a] > pred_of[b];
      return ranked[a].first < ranked[b].first;
    });
    for (auto i : order) {
      ue.ranked_targets.push_back(ranked[i].first);
      ue.predicted.push_back(pred_of[i]);
      ue.truth.push_back(ranked[i].second);
    }
    for (int p : thresholds) {
      const auto take = threshold_count(p, ue.ranked_targets.size());
      ue.selected[p] = take;
      preds[p].insert(preds[p].end(), ue.predicted.begin(), ue.predicted.begin() + static_cast<std::ptrdiff_t>(take));
      truths[p].insert(truths[p].end(), ue.truth.begin(), ue.truth.begin() + static_cast<std::ptrdiff_t>(take));
    }
    ++report.user_count;
    report.pair_count += ue.ranked_targets.size();
    if (details) details->push_back(std::move(ue));
  }
  if (skipped > 0)
    warn(std::to_string(skipped) + " user(s) skipped: liked items not found in the catalog/index");
  if (report.user_count == 0) throw NoEvalUsers("no evaluable users");
  for (int p : thresholds) {
    const auto [mae, rmse] = mae_rmse(preds[p], truths[p]);
    report.mae[p] = mae;
    report.rmse[p] = rmse;
    report.pairs_at[p] = preds[p].size();
  }
  return report;
}

EvalReport run_ablation(const Evaluator& evaluator, EvalMode mode,
                        std::span<const EvalUser> users, const ScoreWeights& weights) {
  return evaluator.evaluate(users, mode, weights);
}

std::string eval_report_json(const EvalReport& report, const std::string& config_echo_json) {
  nlohmann::ordered_json j;
  j["mode"] = to_string(report.mode);
  nlohmann::ordered_json mae, rmse, pairs;
  for (const auto& [p, v] : report.mae) mae[std::to_string(p)] = v;
  for (const auto& [p, v] : report.rmse) rmse[std::to_string(p)] = v;
  for (const auto& [p, v] : report.pairs_at) pairs[std::to_string(p)] = v;
  j["thresholds"] = nlohmann::ordered_json::array();
  for (const auto& [p, v] : report.mae) j["thresholds"].push_back(p);
  j["mae"] = mae;
  j["rmse"] = rmse;
  j["pairs_at"] = pairs;
  j["user_count"] = report.user_count;
  j["pair_count"] = report.pair_count;
  j["config_echo"] = nlohmann::ordered_json::parse(config_echo_json);
  return j.dump(2);
}

}  // namespace fusionrec
