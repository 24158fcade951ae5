// datasel: rank unlabeled sentences for annotation from their embeddings.

#include <algorithm>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "datasel/corpus.hpp"
#include "datasel/io.hpp"
#include "datasel/pipeline.hpp"
#include "datasel/selector.hpp"
#include "datasel/simspace.hpp"

namespace {

using namespace datasel;

SimilarityStorage parse_storage(const std::string& mode) {
  return mode == "lean" ? SimilarityStorage::kLean : SimilarityStorage::kDense;
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  return out;
}

struct RankArgs {
  std::string strategy;
  std::string corpus;
  std::string corpus_format = "conll-bio";
  std::string embeddings;
  std::optional<double> alpha;
  std::uint64_t seed = 0;
  std::string similarity = "dense";
  std::string output;
};

int cmd_rank(const RankArgs& args) {
  StrategyParams params;
  params.strategy = parse_strategy(args.strategy);
  if (params.strategy == Strategy::kLinearPenalty) {
    if (!args.alpha) throw std::invalid_argument("linear-penalty requires --alpha");
    params.alpha = *args.alpha;
  }
  if (params.strategy == Strategy::kRandom) params.seed = args.seed;

  const Corpus corpus = load_corpus(args.corpus, parse_corpus_format(args.corpus_format));
  std::optional<SimilarityModel<double>> model;
  std::optional<double> beta;
  if (!args.embeddings.empty()) {
    const EmbeddingMatrix emb = load_embeddings(args.embeddings);
    validate_pair(corpus, emb);
    if (needs_similarity(params.strategy)) {
      model = build_similarity(emb, parse_storage(args.similarity));
      if (corpus.size() > 1) beta = model->beta();
    } else if (corpus.size() > 1) {
      beta = compute_beta(emb);
    }
  } else if (needs_similarity(params.strategy)) {
    throw std::invalid_argument(args.strategy + " requires --embeddings");
  }

  const auto ranking = rank_with(params, corpus, model ? &*model : nullptr);
  save_ranking(args.output, ranking, beta);
  return 0;
}

struct SelectArgs {
  std::string strategy;
  std::string uncertainty;
  std::string exclude;
  Index batch = 0;
  std::uint64_t seed = 0;
  std::string corpus;
  std::string corpus_format = "conll-bio";
  std::string output;
};

int cmd_select_batch(const SelectArgs& args) {
  const UncertaintySet set = load_uncertainties(args.uncertainty);
  if (!args.corpus.empty()) {
    const Corpus corpus = load_corpus(args.corpus, parse_corpus_format(args.corpus_format));
    validate_uncertainties(set, &corpus);
  }
  const std::vector<Index> exclude = load_index_list(args.exclude);
  std::vector<Index> picked;
  if (args.strategy == "alc") {
    picked = select_batch_alc(set, exclude, args.batch);
  } else if (args.strategy == "alr") {
    picked = select_batch_alr(set, exclude, args.batch, args.seed);
  } else {
    throw std::invalid_argument("unknown batch strategy '" + args.strategy + "'");
  }
  auto out = open_output(args.output);
  write_index_list(out, picked);
  return 0;
}

struct StatsArgs {
  std::string embeddings;
  std::string corpus;
  std::string corpus_format = "conll-bio";
  std::optional<Index> neighbors_of;
  Index m = 3;
  std::string similarity = "dense";
};

int cmd_stats(const StatsArgs& args) {
  const EmbeddingMatrix emb = load_embeddings(args.embeddings);
  std::optional<Corpus> corpus;
  if (!args.corpus.empty()) {
    corpus = load_corpus(args.corpus, parse_corpus_format(args.corpus_format));
    validate_pair(*corpus, emb);
  }
  const auto model = build_similarity(emb, parse_storage(args.similarity));
  const Index n = model.size();

  std::cout << "n\t" << n << "\nd\t" << emb.cols() << '\n';
  if (n < 2) {
    std::cout << "beta\tnone\n";
    return 0;
  }
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  double sum = 0.0;
  Vector<double> row(n);
  for (Index i = 0; i < n; ++i) {
    model.row(i, row);
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      lo = std::min(lo, row(j));
      hi = std::max(hi, row(j));
      sum += row(j);
    }
  }
  std::cout << "beta\t" << format_real(model.beta()) << '\n'
            << "sim_mean\t" << format_real(sum / (double(n) * double(n - 1))) << '\n'
            << "sim_min\t" << format_real(lo) << '\n'
            << "sim_max\t" << format_real(hi) << '\n';

  if (args.neighbors_of) {
    const Index s = *args.neighbors_of;
    const auto neighbors = nearest_neighbors(model, s, args.m);
    std::cout << "\nrank\tindex\tsimilarity";
    if (corpus) std::cout << "\tsentence";
    std::cout << '\n';
    auto text = [&](Index i) {
      std::string joined;
      for (const auto& token : (*corpus)[i].tokens) joined += (joined.empty() ? "" : " ") + token;
      return joined;
    };
    std::cout << 0 << '\t' << s << '\t' << 1;
    if (corpus) std::cout << '\t' << text(s);
    std::cout << '\n';
    for (std::size_t r = 0; r < neighbors.size(); ++r) {
      std::cout << (r + 1) << '\t' << neighbors[r].index << '\t'
                << format_real(neighbors[r].similarity);
      if (corpus) std::cout << '\t' << text(neighbors[r].index);
      std::cout << '\n';
    }
  }
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& output_dir) {
  RunConfig config = load_run_config(config_path);
  if (!output_dir.empty()) config.output_dir = output_dir;
  const auto artifacts = run(config);
  std::cerr << "wrote " << artifacts.files.size() << " files and "
            << artifacts.manifest.string() << '\n';
  return 0;
}

int cmd_verify(const std::string& dir) {
  const auto problems = verify_manifest(dir);
  for (const auto& p : problems) std::cerr << p << '\n';
  if (problems.empty()) std::cerr << "all checksums match\n";
  return problems.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embedding-based training data selection for sequence labeling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", DATASEL_VERSION);

  const std::vector<std::string> kFormats = {"conll-bio", "plain-lines"};
  const std::vector<std::string> kStorage = {"dense", "lean"};

  RankArgs rank;
  auto* rank_cmd = app.add_subcommand("rank", "Rank the whole corpus with one strategy");
  rank_cmd->add_option("--strategy", rank.strategy)
      ->required()
      ->check(CLI::IsMember({"ratio-penalty", "coverage", "linear-penalty", "random", "length"}));
  rank_cmd->add_option("--corpus", rank.corpus)->required()->check(CLI::ExistingFile);
  rank_cmd->add_option("--corpus-format", rank.corpus_format, "conll-bio or plain-lines")
      ->check(CLI::IsMember(kFormats))
      ->capture_default_str();
  rank_cmd->add_option("--embeddings", rank.embeddings)->check(CLI::ExistingFile);
  rank_cmd->add_option("--alpha", rank.alpha, "Penalty weight for linear-penalty");
  rank_cmd->add_option("--seed", rank.seed, "Seed for random")->capture_default_str();
  rank_cmd->add_option("--similarity", rank.similarity, "dense or lean")
      ->check(CLI::IsMember(kStorage))
      ->capture_default_str();
  rank_cmd->add_option("--output", rank.output)->required();

  SelectArgs select;
  auto* select_cmd =
      app.add_subcommand("select-batch", "Pick the next active-learning batch");
  select_cmd->add_option("--strategy", select.strategy)
      ->required()
      ->check(CLI::IsMember({"alc", "alr"}));
  select_cmd->add_option("--uncertainty", select.uncertainty)
      ->required()
      ->check(CLI::ExistingFile);
  select_cmd->add_option("--exclude", select.exclude, "Already labeled indices")
      ->required()
      ->check(CLI::ExistingFile);
  select_cmd->add_option("--batch", select.batch)->required()->check(CLI::PositiveNumber);
  select_cmd->add_option("--seed", select.seed, "Seed for alr")->capture_default_str();
  select_cmd->add_option("--corpus", select.corpus, "Check token counts against this corpus")
      ->check(CLI::ExistingFile);
  select_cmd->add_option("--corpus-format", select.corpus_format)
      ->check(CLI::IsMember(kFormats))
      ->capture_default_str();
  select_cmd->add_option("--output", select.output)->required();

  StatsArgs stats;
  auto* stats_cmd = app.add_subcommand("stats", "Similarity statistics and neighbor tables");
  stats_cmd->add_option("--embeddings", stats.embeddings)->required()->check(CLI::ExistingFile);
  stats_cmd->add_option("--corpus", stats.corpus, "Print sentences next to neighbors")
      ->check(CLI::ExistingFile);
  stats_cmd->add_option("--corpus-format", stats.corpus_format)
      ->check(CLI::IsMember(kFormats))
      ->capture_default_str();
  stats_cmd->add_option("--neighbors", stats.neighbors_of, "Sentence index to list neighbors of");
  stats_cmd->add_option("-m,--count", stats.m, "Number of neighbors")->capture_default_str();
  stats_cmd->add_option("--similarity", stats.similarity)
      ->check(CLI::IsMember(kStorage))
      ->capture_default_str();

  std::string config_path, output_dir;
  auto* run_cmd = app.add_subcommand("run", "Run every configured strategy and export subsets");
  run_cmd->add_option("--config", config_path)->required()->check(CLI::ExistingFile);
  run_cmd->add_option("--output-dir", output_dir, "Overrides output_dir from the config");

  std::string verify_dir;
  auto* verify_cmd = app.add_subcommand("verify", "Check a run directory against its manifest");
  verify_cmd->add_option("--dir", verify_dir)->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*rank_cmd) return cmd_rank(rank);
    if (*select_cmd) return cmd_select_batch(select);
    if (*stats_cmd) return cmd_stats(stats);
    if (*run_cmd) return cmd_run(config_path, output_dir);
    if (*verify_cmd) return cmd_verify(verify_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
