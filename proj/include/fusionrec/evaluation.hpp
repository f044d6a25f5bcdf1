#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fusionrec/catalog.hpp"
#include "fusionrec/features.hpp"
#include "fusionrec/recommender.hpp"
#include "fusionrec/scoring.hpp"

namespace fusionrec {

enum class EvalMode { Fused, TextOnly, GenreOnly, TfidfOnly };

inline constexpr std::array<EvalMode, 4> kAllModes{EvalMode::Fused, EvalMode::TextOnly,
                                                   EvalMode::GenreOnly, EvalMode::TfidfOnly};
inline constexpr std::array<int, 3> kDefaultThresholds{20, 50, 80};
inline constexpr double kLikeThreshold = 4.0;

std::string_view to_string(EvalMode mode);
std::optional<EvalMode> parse_eval_mode(std::string_view s);

struct EvalUser {
  std::string user_id;
  std::vector<std::string> liked_sources;        // sorted, unique
  std::map<std::string, double> liked_targets;  // id -> rating (>= 4)
};

/// Groups by user, drops ratings below 4 and keeps users with at least one
/// liked item in each domain. Throws NoEvalUsers.
std::vector<EvalUser> build_eval_users(const std::vector<Rating>& ratings);

/// (MAE, RMSE). Throws EmptyInput / LengthMismatch.
std::pair<double, double> mae_rmse(std::span<const double> preds, std::span<const double> truths);

/// Min-max maps scores onto [1, 5]; a constant list maps to 3.0 everywhere.
std::vector<double> scores_to_ratings(std::span<const double> scores);

/// Number of items in the top p% of m, rounded up.
std::size_t threshold_count(int percent, std::size_t m);

struct EvalReport {
  EvalMode mode = EvalMode::Fused;
  std::map<int, double> mae;
  std::map<int, double> rmse;
  std::map<int, std::size_t> pairs_at;  // selected pairs per threshold
  std::size_t user_count = 0;
  std::size_t pair_count = 0;  // ranked (user, liked target) pairs
};

// Per-user ranked liked targets with predicted and true ratings.
struct UserEvaluation {
  std::string user_id;
  std::vector<std::string> ranked_targets;
  std::vector<double> predicted;
  std::vector<double> truth;
  std::map<int, std::size_t> selected;  // threshold -> prefix length
};

class Evaluator {
 public:
  /// `target_text` holds raw encoder outputs for the index rows (same order)
  /// and is only needed by the text-only mode.
  Evaluator(const Recommender& recommender, ColMatrix<float> target_text);

  /// Scores for every index row under a mode.
  std::vector<double> scores(const EvalUser& user, EvalMode mode, const ScoreWeights& weights) const;

  /// Predicted rating for every index row, keyed by target id.
  std::map<std::string, double> predict_ratings(const EvalUser& user, EvalMode mode,
                                                const ScoreWeights& weights) const;

  EvalReport evaluate(std::span<const EvalUser> users, EvalMode mode, const ScoreWeights& weights,
                      std::span<const int> thresholds = kDefaultThresholds,
                      std::vector<UserEvaluation>* details = nullptr) const;

 private:
  std::optional<EvalUser> resolve(const EvalUser& user) const;

  const Recommender& recommender_;
  ColMatrix<float> target_text_;
  ItemLookup source_lookup_;
  std::map<std::string, std::size_t> index_pos_;
};

/// Runs one ablation mode over all users (alias of Evaluator::evaluate).
EvalReport run_ablation(const Evaluator& evaluator, EvalMode mode,
                        std::span<const EvalUser> users, const ScoreWeights& weights);

/// Report JSON: mode, mae/rmse keyed "20"/"50"/"80", user_count, pair_count,
/// config_echo.
std::string eval_report_json(const EvalReport& report, const std::string& config_echo_json = "{}");

}  // namespace fusionrec
