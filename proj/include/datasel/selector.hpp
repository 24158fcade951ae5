#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "datasel/corpus.hpp"
#include "datasel/dense.hpp"
#include "datasel/simspace.hpp"

namespace datasel {

enum class Strategy { kRatioPenalty, kCoverage, kLinearPenalty, kRandom, kLength };

Strategy parse_strategy(std::string_view name);
std::string_view to_string(Strategy strategy);
bool needs_similarity(Strategy strategy);

/// A full permutation of the ground set. order[r] was picked at step r + 1
/// with value scores[r].
template <typename Scalar = double>
struct Ranking {
  std::vector<Index> order;
  Vector<Scalar> scores;
  std::string strategy;
  std::optional<std::uint64_t> seed;

  Index size() const { return static_cast<Index>(order.size()); }
};

/// Greedy selection state: the chosen prefix X and, for every candidate s,
/// the running penalty sum over x in X of sim(s, x).
template <typename Scalar>
class SelectionState {
 public:
  explicit SelectionState(Index n) : chosen_mask_(static_cast<std::size_t>(n), false) {
    penalty_sums_ = Vector<Scalar>::Zero(n);
  }

  void add(Index x, const SimilarityModel<Scalar>& model) {
    if (contains(x)) throw std::invalid_argument("index already chosen");
    chosen_.push_back(x);
    chosen_mask_[static_cast<std::size_t>(x)] = true;
    model.accumulate_row(x, penalty_sums_);
  }

  bool contains(Index s) const { return chosen_mask_[static_cast<std::size_t>(s)]; }
  const std::vector<Index>& chosen() const { return chosen_; }
  const Vector<Scalar>& penalty_sums() const { return penalty_sums_; }

 private:
  std::vector<Index> chosen_;
  std::vector<bool> chosen_mask_;
  Vector<Scalar> penalty_sums_;
};

// Gains within this relative distance of each other count as tied, so that
// ties that are exact in real arithmetic go to the lowest index even when
// rounding separates them.
inline constexpr double kTieTolerance = 1e-10;

/// True when candidate gain `g` (magnitude `g_scale`) beats the incumbent.
template <typename Scalar>
bool improves(Scalar g, Scalar g_scale, Scalar best, Scalar best_scale) {
  using std::max;
  return g > best + Scalar(kTieTolerance) * max(g_scale, best_scale);
}

// Marginal gains as functions of (coverage total, penalty sum). `scale`
// returns the magnitude of the terms the gain is computed from, which
// bounds its rounding error.

/// coverage / (1 + penalty)
struct RatioPenaltyGain {
  template <typename Scalar>
  Scalar operator()(Scalar coverage, Scalar penalty) const {
    return coverage / (Scalar(1) + penalty);
  }
  template <typename Scalar>
  Scalar scale(Scalar coverage, Scalar penalty) const {
    using std::abs;
    return abs((*this)(coverage, penalty));
  }
};

/// log coverage - log(1 + penalty). Same argmax as RatioPenaltyGain.
struct LogRatioPenaltyGain {
  template <typename Scalar>
  Scalar operator()(Scalar coverage, Scalar penalty) const {
    using std::log;
    return log(coverage) - log(Scalar(1) + penalty);
  }
  // An absolute difference in log space is a relative one in ratio space.
  template <typename Scalar>
  Scalar scale(Scalar, Scalar) const {
    return Scalar(1);
  }
};

/// coverage - alpha * penalty
struct LinearPenaltyGain {
  double alpha = 0.0;

  template <typename Scalar>
  Scalar operator()(Scalar coverage, Scalar penalty) const {
    return coverage - Scalar(alpha) * penalty;
  }
  template <typename Scalar>
  Scalar scale(Scalar coverage, Scalar penalty) const {
    using std::abs;
    return abs(coverage) + Scalar(alpha) * abs(penalty);
  }
};

/// Greedy driver: repeatedly picks the unchosen s maximizing
/// gain(coverage_totals[s], penalty_sums[s]), lowest index on ties, until the
/// whole ground set is ranked.
template <typename Scalar, typename Gain>
Ranking<Scalar> greedy_rank(const SimilarityModel<Scalar>& model, Gain gain,
                            std::string strategy) {
  const Index n = model.size();
  const Vector<Scalar>& coverage = model.coverage_totals();
  SelectionState<Scalar> state(n);
  Ranking<Scalar> ranking;
  ranking.strategy = std::move(strategy);
  ranking.order.reserve(static_cast<std::size_t>(n));
  ranking.scores.resize(n);

  for (Index step = 0; step < n; ++step) {
    Index best = -1;
    Scalar best_gain(0), best_scale(0);
    for (Index s = 0; s < n; ++s) {
      if (state.contains(s)) continue;
      const Scalar c = coverage(s);
      const Scalar p = state.penalty_sums()(s);
      const Scalar g = gain(c, p);
      const Scalar g_scale = gain.scale(c, p);
      if (best < 0 || improves(g, g_scale, best_gain, best_scale)) {
        best = s;
        best_gain = g;
        best_scale = g_scale;
      }
    }
    ranking.order.push_back(best);
    ranking.scores(step) = best_gain;
    // The last pick changes nothing that is read afterwards.
    if (step + 1 < n) state.add(best, model);
  }
  return ranking;
}

template <typename Scalar>
Ranking<Scalar> rank_ratio_penalty(const SimilarityModel<Scalar>& model) {
  return greedy_rank(model, RatioPenaltyGain{}, "ratio-penalty");
}

template <typename Scalar>
Ranking<Scalar> rank_log_ratio_penalty(const SimilarityModel<Scalar>& model) {
  return greedy_rank(model, LogRatioPenaltyGain{}, "log-ratio-penalty");
}

template <typename Scalar>
Ranking<Scalar> rank_linear_penalty(const SimilarityModel<Scalar>& model, double alpha) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("alpha must be a finite non-negative number");
  }
  return greedy_rank(model, LinearPenaltyGain{alpha}, "linear-penalty");
}

/// Coverage gains do not depend on the chosen set, so selecting by coverage
/// total alone is the greedy ranking and optimal for every prefix length.
/// Uses the greedy tie rule without maintaining penalty sums.
template <typename Scalar>
Ranking<Scalar> rank_coverage(const SimilarityModel<Scalar>& model) {
  using std::abs;
  const Index n = model.size();
  const Vector<Scalar>& coverage = model.coverage_totals();
  Ranking<Scalar> ranking;
  ranking.strategy = "coverage";
  ranking.order.reserve(static_cast<std::size_t>(n));
  ranking.scores.resize(n);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  for (Index step = 0; step < n; ++step) {
    Index best = -1;
    for (Index s = 0; s < n; ++s) {
      if (taken[static_cast<std::size_t>(s)]) continue;
      if (best < 0 ||
          improves(coverage(s), abs(coverage(s)), coverage(best), abs(coverage(best)))) {
        best = s;
      }
    }
    taken[static_cast<std::size_t>(best)] = true;
    ranking.order.push_back(best);
    ranking.scores(step) = coverage(best);
  }
  return ranking;
}

/// Seeded Fisher-Yates shuffle of 0..n-1; scores are all zero.
Ranking<double> rank_random(Index n, std::uint64_t seed);

/// Descending token count, lowest index on ties; scores are token counts.
Ranking<double> rank_length(const Corpus& corpus);

/// First k entries of the ranking, 1 <= k <= n.
template <typename Scalar>
std::vector<Index> rank_prefix(const Ranking<Scalar>& ranking, Index k) {
  if (k < 1 || k > ranking.size()) {
    throw std::out_of_range("prefix length " + std::to_string(k) + " outside [1, " +
                            std::to_string(ranking.size()) + "]");
  }
  return {ranking.order.begin(), ranking.order.begin() + k};
}

struct StrategyParams {
  Strategy strategy = Strategy::kRatioPenalty;
  double alpha = 0.0;
  std::optional<std::uint64_t> seed;
};

/// Runs one ranking strategy. `model` may be null for random and length.
Ranking<double> rank_with(const StrategyParams& params, const Corpus& corpus,
                          const SimilarityModel<double>* model);

// Active-learning baselines consume per-token confidences produced elsewhere.

struct UncertaintyRecord {
  Index index = 0;
  std::vector<double> token_probs;
};

using UncertaintySet = std::vector<UncertaintyRecord>;

/// Mean least confidence: average over tokens of 1 - p.
double sentence_uncertainty(const UncertaintyRecord& record);

/// Checks probabilities in [0, 1], unique non-negative indices and, when a
/// corpus is given, that every record matches its sentence's token count.
void validate_uncertainties(const UncertaintySet& set, const Corpus* corpus = nullptr);

/// The `batch` non-excluded sentences with highest uncertainty, lowest index
/// on ties.
std::vector<Index> select_batch_alc(const UncertaintySet& set, std::span<const Index> exclude,
                                    Index batch);

/// `batch` distinct sentences drawn one at a time with probability
/// proportional to uncertainty among those still available.
std::vector<Index> select_batch_alr(const UncertaintySet& set, std::span<const Index> exclude,
                                    Index batch, std::uint64_t seed);

}  // namespace datasel
