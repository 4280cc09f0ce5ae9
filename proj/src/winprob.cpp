#include "statedex/winprob.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <numeric>
#include <random>

#include <Eigen/Dense>

#include "statedex/error.hpp"

namespace statedex {

using nlohmann::json;

namespace {

constexpr std::size_t kDim = FeatureVector::kSize;

double sigmoid(double z) {
  // Clamping keeps the result strictly inside (0, 1) in double precision.
  z = std::clamp(z, -30.0, 30.0);
  return 1.0 / (1.0 + std::exp(-z));
}

std::string corpus_fingerprint(std::span<const LabeledExample> corpus) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h = (h ^ (v & 0xff)) * 0x100000001b3ULL;
      v >>= 8;
    }
  };
  for (const auto& ex : corpus) {
    for (double v : ex.features.values()) {
      std::uint64_t bits;
      std::memcpy(&bits, &v, sizeof bits);
      mix(bits);
    }
    mix(static_cast<std::uint64_t>(ex.ct_won));
  }
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace

const std::array<const char*, kDim>& FeatureVector::names() {
  static const std::array<const char*, kDim> kNames{
      "ct_alive", "t_alive", "hp_diff", "equip_diff", "grenade_diff", "bomb_planted",
      "time_remaining"};
  return kNames;
}

std::array<double, kDim> FeatureVector::values() const {
  return {double(ct_alive),     double(t_alive),      double(hp_diff), double(equip_diff),
          double(grenade_diff), double(bomb_planted), time_remaining};
}

FeatureVector featurize(const GameState& state, std::optional<double> bomb_plant_t) {
  FeatureVector f;
  for (const auto& p : state.players) {
    if (!p.alive) continue;
    const int sign = p.side == Side::CT ? 1 : -1;
    (p.side == Side::CT ? f.ct_alive : f.t_alive) += 1;
    f.hp_diff += sign * p.hp;
    f.equip_diff += sign * p.equipment_value;
    f.grenade_diff += sign * p.grenade_count;
  }
  f.bomb_planted = state.bomb_planted ? 1 : 0;
  if (state.bomb_planted) {
    const double since = bomb_plant_t ? state.t - *bomb_plant_t : 0.0;
    f.time_remaining = std::clamp(kBombClockSeconds - since, 0.0, kBombClockSeconds);
  } else {
    f.time_remaining = std::max(0.0, kRoundClockSeconds - state.t);
  }
  return f;
}

FeatureVector featurize(const GameState& state, const RoundRecord& round) {
  return featurize(state, round.bomb_plant_t);
}

double WinProbModel::predict(const FeatureVector& x) const {
  const auto v = x.values();
  double z = intercept;
  for (std::size_t i = 0; i < kDim; ++i) z += weights[i] * v[i];
  return sigmoid(z);
}

WinProbModel train(std::span<const LabeledExample> corpus, std::uint64_t seed,
                   const TrainOptions& options) {
  if (corpus.empty()) throw Error("degenerate_labels", "degenerate labels: empty corpus");
  const auto positives = std::count_if(corpus.begin(), corpus.end(),
                                       [](const LabeledExample& e) { return e.ct_won != 0; });
  if (positives == 0 || positives == static_cast<std::ptrdiff_t>(corpus.size()))
    throw Error("degenerate_labels", "degenerate labels: corpus has a single outcome class");

  // Deterministic subsample: a seeded shuffle of indices, truncated, then
  // restored to corpus order so the summation order stays fixed.
  std::vector<std::size_t> rows(corpus.size());
  std::iota(rows.begin(), rows.end(), 0);
  if (rows.size() > options.max_examples) {
    std::mt19937_64 rng(seed);
    for (std::size_t i = rows.size() - 1; i > 0; --i)
      std::swap(rows[i], rows[static_cast<std::size_t>(rng() % (i + 1))]);
    rows.resize(options.max_examples);
    std::sort(rows.begin(), rows.end());
  }
  const auto n = static_cast<Eigen::Index>(rows.size());

  Eigen::MatrixXd x(n, kDim + 1);
  Eigen::VectorXd y(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const auto& ex = corpus[rows[static_cast<std::size_t>(r)]];
    const auto v = ex.features.values();
    x(r, 0) = 1.0;
    for (std::size_t c = 0; c < kDim; ++c) x(r, static_cast<Eigen::Index>(c + 1)) = v[c];
    y(r) = ex.ct_won ? 1.0 : 0.0;
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(kDim + 1);
  Eigen::VectorXd scale = Eigen::VectorXd::Ones(kDim + 1);
  for (Eigen::Index c = 1; c <= static_cast<Eigen::Index>(kDim); ++c) {
    mean(c) = x.col(c).mean();
    const double sd = std::sqrt((x.col(c).array() - mean(c)).square().mean());
    scale(c) = sd > 0.0 ? sd : 1.0;
    x.col(c) = (x.col(c).array() - mean(c)) / scale(c);
  }

  Eigen::VectorXd penalty = Eigen::VectorXd::Constant(kDim + 1, options.l2);
  penalty(0) = 0.0;
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(kDim + 1);
  WinProbModel model;
  model.training_meta.seed = seed;
  model.training_meta.corpus_id = corpus_fingerprint(corpus);

  const double inv_n = 1.0 / static_cast<double>(n);
  for (int it = 0; it < options.max_iterations; ++it) {
    const Eigen::VectorXd z = x * beta;
    Eigen::VectorXd p(n);
    double loss = 0.0;
    for (Eigen::Index r = 0; r < n; ++r) {
      p(r) = 1.0 / (1.0 + std::exp(-z(r)));
      // log(1 + e^z) - y z, evaluated stably
      const double zr = z(r);
      loss += (zr > 0 ? zr + std::log1p(std::exp(-zr)) : std::log1p(std::exp(zr))) - y(r) * zr;
    }
    loss = loss * inv_n + 0.5 * (penalty.array() * beta.array().square()).sum();
    model.training_meta.loss_curve.push_back(loss);

    const Eigen::VectorXd grad =
        x.transpose() * (p - y) * inv_n + penalty.cwiseProduct(beta);
    model.training_meta.iterations = it + 1;
    if (grad.norm() < options.gradient_tolerance) {
      model.training_meta.converged = true;
      break;
    }
    const Eigen::VectorXd w = (p.array() * (1.0 - p.array())).matrix();
    Eigen::MatrixXd hessian = x.transpose() * w.asDiagonal() * x * inv_n;
    hessian.diagonal() += penalty;
    beta -= hessian.ldlt().solve(grad);
  }

  // Fold standardization back into raw-feature weights.
  double intercept = beta(0);
  for (std::size_t c = 0; c < kDim; ++c) {
    const auto i = static_cast<Eigen::Index>(c + 1);
    model.weights[c] = beta(i) / scale(i);
    intercept -= beta(i) * mean(i) / scale(i);
  }
  model.intercept = intercept;
  return model;
}

std::vector<LabeledExample> label_rounds(std::span<const RoundRecord> rounds) {
  std::vector<LabeledExample> out;
  for (const auto& r : rounds)
    for (const auto& f : r.frames)
      out.push_back({featurize(f, r), r.winner == Side::CT ? 1 : 0});
  return out;
}

WinSeries round_series(const WinProbModel& model, const RoundRecord& round) {
  WinSeries s;
  s.bomb_plant_t = round.bomb_plant_t;
  s.points.reserve(round.frames.size());
  for (const auto& f : round.frames) s.points.push_back({f.t, model.predict(featurize(f, round))});
  return s;
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw Error("invalid_argument", "auc: size mismatch");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  // Mann-Whitney U with mid-ranks for ties.
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const double mid = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t k = i; k < j; ++k)
      if (labels[order[k]]) {
        rank_sum += mid;
        ++pos;
      }
    i = j;
  }
  const std::size_t neg = scores.size() - pos;
  if (pos == 0 || neg == 0) throw Error("invalid_argument", "auc needs both classes");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(neg));
}

json WinProbModel::to_json() const {
  json features = json::array();
  for (const char* n : FeatureVector::names()) features.push_back(n);
  return {{"format", "statedex-winprob"},
          {"version", kModelFormatVersion},
          {"features", features},
          {"weights", weights},
          {"intercept", intercept},
          {"training_meta",
           {{"seed", training_meta.seed},
            {"corpus_id", training_meta.corpus_id},
            {"iterations", training_meta.iterations},
            {"converged", training_meta.converged},
            {"loss_curve", training_meta.loss_curve}}}};
}

WinProbModel WinProbModel::from_json(const json& doc) {
  try {
    if (doc.at("format") != "statedex-winprob") throw ParseError("not a win-probability model");
    if (doc.at("version") != kModelFormatVersion)
      throw ParseError("unsupported model version " + doc.at("version").dump());
    const auto features = doc.at("features").get<std::vector<std::string>>();
    const auto& expected = FeatureVector::names();
    if (features.size() != kDim || !std::equal(features.begin(), features.end(), expected.begin()))
      throw ParseError("model feature list does not match this build");
    WinProbModel m;
    const auto w = doc.at("weights").get<std::vector<double>>();
    if (w.size() != kDim) throw ParseError("model has the wrong number of weights");
    std::copy(w.begin(), w.end(), m.weights.begin());
    m.intercept = doc.at("intercept").get<double>();
    if (doc.contains("training_meta")) {
      const auto& meta = doc["training_meta"];
      m.training_meta.seed = meta.value("seed", std::uint64_t{0});
      m.training_meta.corpus_id = meta.value("corpus_id", std::string());
      m.training_meta.iterations = meta.value("iterations", 0);
      m.training_meta.converged = meta.value("converged", false);
      m.training_meta.loss_curve = meta.value("loss_curve", std::vector<double>{});
    }
    return m;
  } catch (const json::exception& e) {
    throw ParseError(std::string("model document: ") + e.what());
  }
}

void WinProbModel::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("io_error", "cannot create " + path.string());
  out << to_json().dump(2) << '\n';
}

WinProbModel WinProbModel::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io_error", "cannot open model " + path.string());
  try {
    return from_json(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace statedex
