#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "statedex/records.hpp"

namespace statedex {

inline constexpr double kRoundClockSeconds = 115.0;
inline constexpr double kBombClockSeconds = 35.0;

/// Per-state model inputs. Counts and sums cover alive players only;
/// differences are CT minus T.
struct FeatureVector {
  int ct_alive = 0;
  int t_alive = 0;
  int hp_diff = 0;
  int equip_diff = 0;
  int grenade_diff = 0;
  int bomb_planted = 0;
  /// Seconds left on the round clock, or on the bomb timer once planted.
  double time_remaining = 0.0;

  static constexpr std::size_t kSize = 7;
  static const std::array<const char*, kSize>& names();
  std::array<double, kSize> values() const;

  friend bool operator==(const FeatureVector&, const FeatureVector&) = default;
};

FeatureVector featurize(const GameState& state, std::optional<double> bomb_plant_t);
FeatureVector featurize(const GameState& state, const RoundRecord& round);

struct LabeledExample {
  FeatureVector features;
  int ct_won = 0;  // Y_r
};

struct TrainingMeta {
  std::uint64_t seed = 0;
  std::string corpus_id;
  int iterations = 0;
  bool converged = false;
  std::vector<double> loss_curve;

  friend bool operator==(const TrainingMeta&, const TrainingMeta&) = default;
};

struct TrainOptions {
  int max_iterations = 500;
  double gradient_tolerance = 1e-6;
  /// L2 penalty on the standardized weights (not the intercept).
  double l2 = 1e-3;
  /// Corpora larger than this are subsampled, deterministically by seed.
  std::size_t max_examples = 400000;
};

/// Logistic model of P(CT wins | state) over raw feature values.
struct WinProbModel {
  std::array<double, FeatureVector::kSize> weights{};
  double intercept = 0.0;
  TrainingMeta training_meta;

  /// P(CT wins), strictly inside (0, 1).
  double predict(const FeatureVector& x) const;
  double predict(const GameState& state, const RoundRecord& round) const {
    return predict(featurize(state, round));
  }

  nlohmann::json to_json() const;
  /// Throws ParseError on a bad document or version.
  static WinProbModel from_json(const nlohmann::json& doc);
  void save(const std::filesystem::path& path) const;
  static WinProbModel load(const std::filesystem::path& path);

  friend bool operator==(const WinProbModel&, const WinProbModel&) = default;
};

inline constexpr int kModelFormatVersion = 1;

/// Fits the model by Newton's method on standardized features. Throws
/// Error("degenerate_labels") unless both outcomes occur.
WinProbModel train(std::span<const LabeledExample> corpus, std::uint64_t seed,
                   const TrainOptions& options = {});

/// Every frame of every round, labeled with the round's outcome.
std::vector<LabeledExample> label_rounds(std::span<const RoundRecord> rounds);

struct SeriesPoint {
  double t = 0.0;
  double p_ct = 0.0;
  double p_t() const { return 1.0 - p_ct; }
};

struct WinSeries {
  std::vector<SeriesPoint> points;
  std::optional<double> bomb_plant_t;
};

WinSeries round_series(const WinProbModel& model, const RoundRecord& round);

/// Area under the ROC curve, with ties counted as one half.
double auc(std::span<const double> scores, std::span<const int> labels);

}  // namespace statedex
