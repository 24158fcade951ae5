#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "datasel/corpus.hpp"
#include "datasel/errors.hpp"
#include "datasel/selector.hpp"
#include "datasel/simspace.hpp"

namespace datasel {

/// Failure inside `run`, tagged with the stage that raised it.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("stage '" + stage + "': " + what), stage_(std::move(stage)) {}
  const std::string& stage() const { return stage_; }

 private:
  std::string stage_;
};

struct StrategySpec {
  std::string label;  // file stem for this strategy's outputs, unique per run
  StrategyParams params;
};

struct RunConfig {
  std::filesystem::path corpus;
  CorpusFormat corpus_format = CorpusFormat::kConllBio;
  std::filesystem::path embeddings;  // optional for random and length only
  std::vector<StrategySpec> strategies;
  std::vector<Index> k_grid = {10, 20, 30, 40, 50, 60, 70, 80, 90, 100};
  std::filesystem::path output_dir;
  std::optional<Index> tsne_top;
  SimilarityStorage storage = SimilarityStorage::kDense;
};

/// Parses a JSON run configuration. Relative paths resolve against
/// `base_dir`. Throws ConfigError.
///
///   {
///     "corpus": "train.bio", "corpus_format": "conll-bio",
///     "embeddings": "train.emb",
///     "strategies": ["ratio-penalty",
///                    {"strategy": "random", "seed": 7},
///                    {"strategy": "linear-penalty", "alpha": 0.5, "label": "lp"}],
///     "k_grid": [10, 20], "output_dir": "out",
///     "tsne_top": 40, "similarity": "dense"
///   }
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir);
RunConfig load_run_config(const std::filesystem::path& config_path);

/// Checks everything that can be checked without the data, plus the k grid
/// against the ground-set size `n` when given.
void validate_run_config(const RunConfig& config, std::optional<Index> n = std::nullopt);

struct RunArtifacts {
  std::optional<double> beta;
  std::vector<std::filesystem::path> files;  // relative to output_dir, manifest excluded
  std::filesystem::path manifest;
};

/// Loads inputs, ranks with every strategy and writes
///   rankings/<label>.tsv
///   subsets/<label>/k<k>.conll   (k<k>.txt when the corpus has no tags)
///   tsne_input.tsv               (when tsne_top is set)
///   manifest.json
/// Throws StageError.
RunArtifacts run(const RunConfig& config);

struct LabeledRanking {
  std::string label;
  Ranking<double> ranking;
};

/// TSV with one row per sentence: its embedding followed by a 0/1 column per
/// ranking marking membership in that ranking's top `top`.
void export_tsne_input(std::ostream& out, const EmbeddingMatrix& embeddings,
                       std::span<const LabeledRanking> rankings, Index top);

/// Recomputes every checksum listed in `<output_dir>/manifest.json`.
/// Returns one message per missing or changed file.
std::vector<std::string> verify_manifest(const std::filesystem::path& output_dir);

}  // namespace datasel
