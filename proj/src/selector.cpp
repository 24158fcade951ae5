#include "datasel/selector.hpp"

#include <unordered_set>

#include "datasel/errors.hpp"
#include "datasel/rng.hpp"

namespace datasel {

namespace {

struct Candidate {
  Index index;
  double uncertainty;
};

// Non-excluded records sorted by sentence index.
std::vector<Candidate> candidates(const UncertaintySet& set, std::span<const Index> exclude,
                                  Index batch) {
  if (batch < 1) throw std::invalid_argument("batch must be >= 1");
  validate_uncertainties(set);
  const std::unordered_set<Index> excluded(exclude.begin(), exclude.end());
  std::vector<Candidate> out;
  for (const auto& record : set) {
    if (!excluded.contains(record.index)) {
      out.push_back({record.index, sentence_uncertainty(record)});
    }
  }
  if (static_cast<Index>(out.size()) < batch) {
    throw Error("not enough candidates: " + std::to_string(out.size()) +
                " remain after exclusion, batch is " + std::to_string(batch));
  }
  std::sort(out.begin(), out.end(),
            [](const Candidate& a, const Candidate& b) { return a.index < b.index; });
  return out;
}

}  // namespace

Strategy parse_strategy(std::string_view name) {
  if (name == "ratio-penalty") return Strategy::kRatioPenalty;
  if (name == "coverage") return Strategy::kCoverage;
  if (name == "linear-penalty") return Strategy::kLinearPenalty;
  if (name == "random") return Strategy::kRandom;
  if (name == "length") return Strategy::kLength;
  throw std::invalid_argument("unknown strategy '" + std::string(name) + "'");
}

std::string_view to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kRatioPenalty: return "ratio-penalty";
    case Strategy::kCoverage: return "coverage";
    case Strategy::kLinearPenalty: return "linear-penalty";
    case Strategy::kRandom: return "random";
    case Strategy::kLength: return "length";
  }
  return "unknown";
}

bool needs_similarity(Strategy strategy) {
  return strategy == Strategy::kRatioPenalty || strategy == Strategy::kCoverage ||
         strategy == Strategy::kLinearPenalty;
}

Ranking<double> rank_random(Index n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("ground set must be non-empty");
  Ranking<double> ranking;
  ranking.strategy = "random";
  ranking.seed = seed;
  ranking.order.resize(static_cast<std::size_t>(n));
  std::iota(ranking.order.begin(), ranking.order.end(), Index{0});
  Rng rng(seed);
  for (std::size_t i = ranking.order.size() - 1; i > 0; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i + 1));
    std::swap(ranking.order[i], ranking.order[j]);
  }
  ranking.scores = Vector<double>::Zero(n);
  return ranking;
}

Ranking<double> rank_length(const Corpus& corpus) {
  const Index n = corpus.size();
  Ranking<double> ranking;
  ranking.strategy = "length";
  ranking.order.resize(static_cast<std::size_t>(n));
  std::iota(ranking.order.begin(), ranking.order.end(), Index{0});
  std::stable_sort(ranking.order.begin(), ranking.order.end(),
                   [&](Index a, Index b) { return corpus[a].size() > corpus[b].size(); });
  ranking.scores.resize(n);
  for (Index r = 0; r < n; ++r) {
    ranking.scores(r) = static_cast<double>(corpus[ranking.order[static_cast<std::size_t>(r)]].size());
  }
  return ranking;
}

Ranking<double> rank_with(const StrategyParams& params, const Corpus& corpus,
                          const SimilarityModel<double>* model) {
  if (needs_similarity(params.strategy)) {
    if (model == nullptr) {
      throw std::invalid_argument(std::string(to_string(params.strategy)) +
                                  " needs embeddings");
    }
    if (model->size() != corpus.size()) {
      throw Error("similarity model size does not match corpus size");
    }
  }
  switch (params.strategy) {
    case Strategy::kRatioPenalty: return rank_ratio_penalty(*model);
    case Strategy::kCoverage: return rank_coverage(*model);
    case Strategy::kLinearPenalty: return rank_linear_penalty(*model, params.alpha);
    case Strategy::kRandom:
      if (!params.seed) throw std::invalid_argument("random strategy needs a seed");
      return rank_random(corpus.size(), *params.seed);
    case Strategy::kLength: return rank_length(corpus);
  }
  throw std::logic_error("unhandled strategy");
}

double sentence_uncertainty(const UncertaintyRecord& record) {
  if (record.token_probs.empty()) {
    throw std::invalid_argument("sentence " + std::to_string(record.index) +
                                " has no token probabilities");
  }
  double sum = 0.0;
  for (const double p : record.token_probs) sum += 1.0 - p;
  return sum / static_cast<double>(record.token_probs.size());
}

void validate_uncertainties(const UncertaintySet& set, const Corpus* corpus) {
  std::unordered_set<Index> seen;
  for (const auto& record : set) {
    const std::string where = "uncertainty record for sentence " + std::to_string(record.index);
    if (record.index < 0) throw Error("negative sentence index in uncertainty record");
    if (!seen.insert(record.index).second) throw Error("duplicate " + where);
    if (record.token_probs.empty()) throw Error(where + " has no token probabilities");
    for (const double p : record.token_probs) {
      if (!(p >= 0.0 && p <= 1.0)) throw Error(where + " has a probability outside [0, 1]");
    }
    if (corpus != nullptr) {
      if (record.index >= corpus->size()) throw Error(where + " is outside the corpus");
      if (static_cast<Index>(record.token_probs.size()) != (*corpus)[record.index].size()) {
        throw Error(where + " has " + std::to_string(record.token_probs.size()) +
                    " probabilities but the sentence has " +
                    std::to_string((*corpus)[record.index].size()) + " tokens");
      }
    }
  }
}

std::vector<Index> select_batch_alc(const UncertaintySet& set, std::span<const Index> exclude,
                                    Index batch) {
  auto pool = candidates(set, exclude, batch);
  std::stable_sort(pool.begin(), pool.end(), [](const Candidate& a, const Candidate& b) {
    return a.uncertainty > b.uncertainty;
  });
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(batch));
  for (Index i = 0; i < batch; ++i) out.push_back(pool[static_cast<std::size_t>(i)].index);
  return out;
}

std::vector<Index> select_batch_alr(const UncertaintySet& set, std::span<const Index> exclude,
                                    Index batch, std::uint64_t seed) {
  auto pool = candidates(set, exclude, batch);
  Rng rng(seed);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(batch));
  for (Index draw = 0; draw < batch; ++draw) {
    double total = 0.0;
    for (const auto& c : pool) total += c.uncertainty;
    if (!(total > 0.0)) {
      throw Error("all remaining candidates have zero uncertainty; sampling distribution "
                  "is undefined");
    }
    const double target = rng.uniform() * total;
    // Falls back to the last candidate with mass if rounding leaves the
    // cumulative sum just short of the target.
    std::size_t pick = pool.size();
    double cumulative = 0.0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].uncertainty <= 0.0) continue;
      cumulative += pool[i].uncertainty;
      pick = i;
      if (target < cumulative) break;
    }
    out.push_back(pool[pick].index);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
  }
  return out;
}

}  // namespace datasel
