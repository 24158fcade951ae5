#include "datasel/pipeline.hpp"

#include <fstream>
#include <future>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "datasel/checksum.hpp"
#include "datasel/io.hpp"
#include "datasel/rng.hpp"

namespace datasel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::string_view kManifestName = "manifest.json";

bool valid_label(std::string_view label) {
  if (label.empty()) return false;
  for (const char c : label) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    if (!ok) return false;
  }
  return label != "." && label != "..";
}

std::string default_label(const StrategyParams& params) {
  std::string label(to_string(params.strategy));
  if (params.strategy == Strategy::kRandom && params.seed) {
    label += "-seed" + std::to_string(*params.seed);
  } else if (params.strategy == Strategy::kLinearPenalty) {
    label += "-alpha" + format_real(params.alpha);
  }
  return label;
}

StrategySpec parse_strategy_entry(const json& entry) {
  StrategySpec spec;
  if (entry.is_string()) {
    spec.params.strategy = parse_strategy(entry.get<std::string>());
  } else if (entry.is_object()) {
    spec.params.strategy = parse_strategy(entry.at("strategy").get<std::string>());
    if (entry.contains("alpha")) spec.params.alpha = entry.at("alpha").get<double>();
    if (entry.contains("seed")) {
      if (!entry.at("seed").is_number_unsigned()) {
        throw ConfigError("seed must be a non-negative integer");
      }
      spec.params.seed = entry.at("seed").get<std::uint64_t>();
    }
    if (entry.contains("label")) spec.label = entry.at("label").get<std::string>();
  } else {
    throw ConfigError("strategy entries must be names or objects");
  }
  if (spec.label.empty()) spec.label = default_label(spec.params);
  return spec;
}

template <typename F>
auto in_stage(const std::string& stage, F&& body) -> decltype(body()) {
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(stage, e.what());
  }
}

std::ofstream create(const fs::path& path) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

bool needs_embeddings(const RunConfig& config) {
  if (config.tsne_top) return true;
  for (const auto& s : config.strategies) {
    if (needs_similarity(s.params.strategy)) return true;
  }
  return false;
}

}  // namespace

RunConfig parse_run_config(std::string_view json_text, const fs::path& base_dir) {
  RunConfig config;
  try {
    const json doc = json::parse(json_text);
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> kKnown = {
        "corpus", "corpus_format", "embeddings", "strategies",
        "k_grid", "output_dir",    "tsne_top",   "similarity"};
    for (const auto& [key, value] : doc.items()) {
      if (!kKnown.contains(key)) throw ConfigError("unknown config key '" + key + "'");
    }
    auto resolve = [&](const std::string& p) { return (base_dir / p).lexically_normal(); };

    config.corpus = resolve(doc.at("corpus").get<std::string>());
    if (doc.contains("corpus_format")) {
      config.corpus_format = parse_corpus_format(doc.at("corpus_format").get<std::string>());
    }
    if (doc.contains("embeddings")) {
      config.embeddings = resolve(doc.at("embeddings").get<std::string>());
    }
    for (const auto& entry : doc.at("strategies")) {
      config.strategies.push_back(parse_strategy_entry(entry));
    }
    if (doc.contains("k_grid")) config.k_grid = doc.at("k_grid").get<std::vector<Index>>();
    config.output_dir = resolve(doc.value("output_dir", std::string("out")));
    if (doc.contains("tsne_top")) config.tsne_top = doc.at("tsne_top").get<Index>();
    if (doc.contains("similarity")) {
      const auto mode = doc.at("similarity").get<std::string>();
      if (mode == "dense") {
        config.storage = SimilarityStorage::kDense;
      } else if (mode == "lean") {
        config.storage = SimilarityStorage::kLean;
      } else {
        throw ConfigError("similarity must be 'dense' or 'lean'");
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  validate_run_config(config);
  return config;
}

RunConfig load_run_config(const fs::path& config_path) {
  std::ifstream in(config_path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config " + config_path.string());
  std::stringstream text;
  text << in.rdbuf();
  return parse_run_config(text.str(), config_path.parent_path());
}

void validate_run_config(const RunConfig& config, std::optional<Index> n) {
  if (config.strategies.empty()) throw ConfigError("no strategies configured");
  std::set<std::string> labels;
  for (const auto& s : config.strategies) {
    if (!valid_label(s.label)) {
      throw ConfigError("label '" + s.label + "' may only use letters, digits, '-', '_', '.'");
    }
    if (!labels.insert(s.label).second) throw ConfigError("duplicate label '" + s.label + "'");
    if (s.params.strategy == Strategy::kRandom && !s.params.seed) {
      throw ConfigError("random strategy '" + s.label + "' needs a seed");
    }
    if (s.params.strategy == Strategy::kLinearPenalty &&
        !(s.params.alpha >= 0.0 && std::isfinite(s.params.alpha))) {
      throw ConfigError("alpha must be a finite non-negative number");
    }
  }
  if (config.k_grid.empty()) throw ConfigError("k_grid is empty");
  for (std::size_t i = 0; i < config.k_grid.size(); ++i) {
    if (config.k_grid[i] < 1) throw ConfigError("k_grid entries must be >= 1");
    if (i > 0 && config.k_grid[i] <= config.k_grid[i - 1]) {
      throw ConfigError("k_grid must be strictly increasing");
    }
  }
  if (config.tsne_top && *config.tsne_top < 1) throw ConfigError("tsne_top must be >= 1");
  if (needs_embeddings(config) && config.embeddings.empty()) {
    throw ConfigError("embeddings path required for the configured strategies");
  }
  if (n) {
    if (config.k_grid.back() > *n) {
      throw ConfigError("k_grid maximum " + std::to_string(config.k_grid.back()) +
                        " exceeds corpus size " + std::to_string(*n));
    }
    if (config.tsne_top && *config.tsne_top > *n) {
      throw ConfigError("tsne_top exceeds corpus size " + std::to_string(*n));
    }
  }
}

RunArtifacts run(const RunConfig& config) {
  in_stage("validate config", [&] { validate_run_config(config); });

  const Corpus corpus = in_stage("load corpus", [&] {
    return load_corpus(config.corpus, config.corpus_format);
  });
  in_stage("validate config", [&] { validate_run_config(config, corpus.size()); });

  std::optional<EmbeddingMatrix> embeddings;
  if (!config.embeddings.empty()) {
    embeddings = in_stage("load embeddings", [&] {
      auto emb = load_embeddings(config.embeddings);
      validate_pair(corpus, emb);
      return emb;
    });
  }

  std::optional<SimilarityModel<double>> model;
  std::optional<double> beta;
  if (embeddings) {
    in_stage("build similarity", [&] {
      bool need_model = false;
      for (const auto& s : config.strategies) {
        need_model = need_model || needs_similarity(s.params.strategy);
      }
      if (need_model) {
        model = build_similarity(*embeddings, config.storage);
        if (corpus.size() > 1) beta = model->beta();
      } else if (corpus.size() > 1) {
        beta = compute_beta(*embeddings);
      }
    });
  }

  // Strategies share only the immutable model.
  std::vector<std::future<Ranking<double>>> pending;
  for (const auto& spec : config.strategies) {
    pending.push_back(std::async(std::launch::async, [&, params = spec.params] {
      return rank_with(params, corpus, model ? &*model : nullptr);
    }));
  }
  std::vector<LabeledRanking> rankings;
  for (std::size_t i = 0; i < pending.size(); ++i) {
    const auto& label = config.strategies[i].label;
    rankings.push_back({label, in_stage("rank " + label, [&] { return pending[i].get(); })});
  }

  RunArtifacts artifacts;
  artifacts.beta = beta;
  const fs::path& out_dir = config.output_dir;
  const bool labeled = corpus.labeled();

  in_stage("write outputs", [&] {
    for (const auto& [label, ranking] : rankings) {
      const fs::path rel = fs::path("rankings") / (label + ".tsv");
      auto out = create(out_dir / rel);
      write_ranking(out, ranking, beta);
      artifacts.files.push_back(rel);

      for (const Index k : config.k_grid) {
        std::vector<Sentence> subset;
        for (const Index i : rank_prefix(ranking, k)) subset.push_back(corpus[i]);
        const fs::path sub_rel = fs::path("subsets") / label /
                                 ("k" + std::to_string(k) + (labeled ? ".conll" : ".txt"));
        auto sub = create(out_dir / sub_rel);
        if (labeled) {
          write_conll(sub, subset);
        } else {
          write_plain_lines(sub, subset);
        }
        artifacts.files.push_back(sub_rel);
      }
    }
    if (config.tsne_top) {
      const fs::path rel = "tsne_input.tsv";
      auto out = create(out_dir / rel);
      export_tsne_input(out, *embeddings, rankings, *config.tsne_top);
      artifacts.files.push_back(rel);
    }
  });

  in_stage("write manifest", [&] {
    json manifest;
    manifest["tool"] = "datasel";
    manifest["version"] = DATASEL_VERSION;
    manifest["rng"] = std::string(Rng::kRngName);
    manifest["n"] = corpus.size();
    manifest["dim"] = embeddings ? json(embeddings->cols()) : json(nullptr);
    manifest["beta"] = beta ? json(*beta) : json(nullptr);
    manifest["similarity"] = config.storage == SimilarityStorage::kDense ? "dense" : "lean";
    manifest["k_grid"] = config.k_grid;

    json inputs;
    inputs["corpus"] = {{"file", config.corpus.filename().string()},
                        {"format", std::string(to_string(config.corpus_format))},
                        {"sha256", sha256_file(config.corpus)}};
    if (embeddings) {
      inputs["embeddings"] = {{"file", config.embeddings.filename().string()},
                              {"sha256", sha256_file(config.embeddings)}};
    }
    manifest["inputs"] = inputs;

    json strategies = json::array();
    for (const auto& s : config.strategies) {
      json entry = {{"label", s.label}, {"strategy", std::string(to_string(s.params.strategy))}};
      entry["seed"] = s.params.seed ? json(*s.params.seed) : json(nullptr);
      if (s.params.strategy == Strategy::kLinearPenalty) entry["alpha"] = s.params.alpha;
      strategies.push_back(entry);
    }
    manifest["strategies"] = strategies;

    json files = json::object();
    for (const auto& rel : artifacts.files) {
      files[rel.generic_string()] = sha256_file(out_dir / rel);
    }
    manifest["files"] = files;

    artifacts.manifest = out_dir / kManifestName;
    auto out = create(artifacts.manifest);
    out << manifest.dump(2) << '\n';
    if (!out) throw Error("cannot write manifest");
  });
  return artifacts;
}

void export_tsne_input(std::ostream& out, const EmbeddingMatrix& embeddings,
                       std::span<const LabeledRanking> rankings, Index top) {
  const Index n = embeddings.rows();
  if (top < 1 || top > n) {
    throw std::out_of_range("top must be in [1, " + std::to_string(n) + "]");
  }
  std::vector<std::vector<char>> member;
  for (const auto& r : rankings) {
    if (r.ranking.size() != n) throw Error("ranking '" + r.label + "' has wrong size");
    std::vector<char> flags(static_cast<std::size_t>(n), 0);
    for (const Index i : rank_prefix(r.ranking, top)) flags[static_cast<std::size_t>(i)] = 1;
    member.push_back(std::move(flags));
  }

  for (Index c = 0; c < embeddings.cols(); ++c) out << (c > 0 ? "\t" : "") << 'e' << c;
  for (const auto& r : rankings) out << "\ttop" << top << '_' << r.label;
  out << '\n';
  for (Index i = 0; i < n; ++i) {
    for (Index c = 0; c < embeddings.cols(); ++c) {
      out << (c > 0 ? "\t" : "") << format_real(embeddings(i, c));
    }
    for (const auto& flags : member) out << '\t' << int(flags[static_cast<std::size_t>(i)]);
    out << '\n';
  }
}

std::vector<std::string> verify_manifest(const fs::path& output_dir) {
  std::ifstream in(output_dir / kManifestName, std::ios::binary);
  if (!in) throw Error("no manifest in " + output_dir.string());
  json manifest;
  try {
    manifest = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(std::string("unreadable manifest: ") + e.what());
  }
  std::vector<std::string> problems;
  for (const auto& [rel, expected] : manifest.at("files").items()) {
    const fs::path path = output_dir / rel;
    if (!fs::exists(path)) {
      problems.push_back(rel + ": missing");
    } else if (sha256_file(path) != expected.get<std::string>()) {
      problems.push_back(rel + ": checksum mismatch");
    }
  }
  return problems;
}

}  // namespace datasel
