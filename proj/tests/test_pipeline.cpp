#include <doctest.h>

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "datasel/io.hpp"
#include "datasel/pipeline.hpp"
#include "fixtures.hpp"

using namespace datasel;
namespace fs = std::filesystem;

namespace {

const char* kTwoStrategies = R"({
  "corpus": "train.conll",
  "embeddings": "train.emb",
  "strategies": ["ratio-penalty", {"strategy": "random", "seed": 7}],
  "k_grid": [10, 20],
  "output_dir": "out"
})";

std::vector<std::string> files_under(const fs::path& dir) {
  std::vector<std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) out.push_back(fs::relative(e.path(), dir).generic_string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_run_config(kTwoStrategies, "/data/exp");
  CHECK(cfg.corpus == fs::path("/data/exp/train.conll"));
  CHECK(cfg.output_dir == fs::path("/data/exp/out"));
  REQUIRE(cfg.strategies.size() == 2);
  CHECK(cfg.strategies[0].label == "ratio-penalty");
  CHECK(cfg.strategies[1].label == "random-seed7");
  CHECK(cfg.strategies[1].params.seed == std::optional<std::uint64_t>(7));

  const auto defaults = parse_run_config(R"({"corpus": "c", "embeddings": "e",
      "strategies": [{"strategy": "linear-penalty", "alpha": 0.5}]})", "/x");
  CHECK(defaults.k_grid == std::vector<Index>{10, 20, 30, 40, 50, 60, 70, 80, 90, 100});
  CHECK(defaults.strategies[0].label == "linear-penalty-alpha0.5");

  auto rejects = [](const std::string& text) {
    CHECK_THROWS_AS(parse_run_config(text, "/x"), ConfigError);
  };
  rejects("not json");
  rejects(R"({"corpus": "c", "embeddings": "e", "strategies": []})");
  rejects(R"({"corpus": "c", "embeddings": "e", "strategies": ["alc"]})");
  rejects(R"({"corpus": "c", "embeddings": "e", "strategies": ["coverage"], "k_grid": [20, 10]})");
  rejects(R"({"corpus": "c", "embeddings": "e", "strategies": ["coverage"], "k_grid": [0]})");
  rejects(R"({"corpus": "c", "strategies": ["coverage"]})");
  rejects(R"({"corpus": "c", "strategies": ["random"]})");
  rejects(R"({"corpus": "c", "strategies": ["length", "length"]})");
  rejects(R"({"corpus": "c", "strategies": [{"strategy": "length", "label": "a/b"}]})");
  rejects(R"({"corpus": "c", "embeddings": "e", "strategies": [{"strategy": "linear-penalty", "alpha": -1}]})");
  rejects(R"({"corpus": "c", "strategies": ["length"], "colour": "blue"})");
  CHECK_NOTHROW(parse_run_config(R"({"corpus": "c", "strategies": ["length"]})", "/x"));
}

TEST_CASE("run writes rankings, subsets and a manifest") {
  testing::TempDir dir;
  testing::write_dataset(dir, 100, 8, 1);
  testing::write_file(dir / "run.json", kTwoStrategies);
  const RunConfig cfg = load_run_config(dir / "run.json");
  const auto artifacts = run(cfg);

  CHECK(artifacts.files.size() == 6);
  CHECK(files_under(dir / "out") ==
        std::vector<std::string>{"manifest.json", "rankings/random-seed7.tsv",
                                 "rankings/ratio-penalty.tsv",
                                 "subsets/random-seed7/k10.conll",
                                 "subsets/random-seed7/k20.conll",
                                 "subsets/ratio-penalty/k10.conll",
                                 "subsets/ratio-penalty/k20.conll"});
  CHECK(verify_manifest(dir / "out").empty());

  const Corpus corpus = load_corpus(dir / "train.conll", CorpusFormat::kConllBio);
  const auto rps = load_ranking(dir / "out/rankings/ratio-penalty.tsv");
  CHECK(rps.header.beta == artifacts.beta);
  const Corpus k20 = load_corpus(dir / "out/subsets/ratio-penalty/k20.conll",
                                 CorpusFormat::kConllBio);
  REQUIRE(k20.size() == 20);
  for (Index r = 0; r < 20; ++r) {
    const Sentence& original = corpus[rps.ranking.order[static_cast<std::size_t>(r)]];
    CHECK(k20[r].tokens == original.tokens);
    CHECK(k20[r].tags == original.tags);
  }

  std::ifstream in(dir / "out/manifest.json");
  const auto manifest = nlohmann::json::parse(in);
  CHECK(manifest.at("n") == 100);
  CHECK(manifest.at("dim") == 8);
  CHECK(manifest.at("files").size() == 6);
  CHECK(manifest.at("strategies").at(1).at("seed") == 7);
  CHECK(manifest.at("inputs").at("corpus").at("file") == "train.conll");
}

TEST_CASE("reruns are byte-identical and tampering is detected") {
  testing::TempDir dir;
  testing::write_dataset(dir, 60, 5, 2);
  testing::write_file(dir / "run.json", R"({
    "corpus": "train.conll", "embeddings": "train.emb",
    "strategies": ["ratio-penalty", "coverage", "length",
                   {"strategy": "linear-penalty", "alpha": 1},
                   {"strategy": "random", "seed": 3}],
    "k_grid": [5, 50], "tsne_top": 10})");
  RunConfig cfg = load_run_config(dir / "run.json");
  cfg.output_dir = dir / "a";
  run(cfg);
  cfg.output_dir = dir / "b";
  run(cfg);
  const auto files = files_under(dir / "a");
  REQUIRE(files == files_under(dir / "b"));
  for (const auto& f : files) {
    CHECK_MESSAGE(testing::read_file(dir / "a" / f) == testing::read_file(dir / "b" / f), f);
  }

  testing::write_file(dir / "a/subsets/coverage/k5.conll", "x\tO\n");
  fs::remove(dir / "a/rankings/length.tsv");
  const auto problems = verify_manifest(dir / "a");
  CHECK(problems.size() == 2);
}

TEST_CASE("lean and dense similarity give the same run") {
  testing::TempDir dir;
  testing::write_dataset(dir, 40, 4, 3);
  RunConfig cfg = parse_run_config(R"({"corpus": "train.conll", "embeddings": "train.emb",
      "strategies": ["ratio-penalty", {"strategy": "linear-penalty", "alpha": 0.5}],
      "k_grid": [10]})", dir.path());
  cfg.output_dir = dir / "dense";
  run(cfg);
  cfg.storage = SimilarityStorage::kLean;
  cfg.output_dir = dir / "lean";
  run(cfg);
  for (const auto* f : {"rankings/ratio-penalty.tsv", "rankings/linear-penalty-alpha0.5.tsv"}) {
    CHECK(testing::read_file(dir / "dense" / f) == testing::read_file(dir / "lean" / f));
  }
}

TEST_CASE("run errors name the stage") {
  testing::TempDir dir;
  testing::write_dataset(dir, 100, 4, 4);
  RunConfig cfg = parse_run_config(kTwoStrategies, dir.path());
  cfg.k_grid = {10, 200};
  try {
    run(cfg);
    FAIL("expected error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "validate config");
  }

  testing::write_file(dir / "short.emb", "2 4\n0 0 0 0\n1 1 1 1\n");
  cfg = parse_run_config(kTwoStrategies, dir.path());
  cfg.embeddings = dir / "short.emb";
  try {
    run(cfg);
    FAIL("expected error");
  } catch (const StageError& e) {
    CHECK(e.stage() == "load embeddings");
  }

  cfg.corpus = dir / "missing.conll";
  CHECK_THROWS_AS(run(cfg), StageError);
}

TEST_CASE("unlabeled corpora export plain-lines subsets") {
  testing::TempDir dir;
  testing::write_file(dir / "pool.txt", "a b c\nd e\nf\ng h i j\n");
  RunConfig cfg = parse_run_config(R"({"corpus": "pool.txt", "corpus_format": "plain-lines",
      "strategies": ["length"], "k_grid": [2, 4]})", dir.path());
  const auto artifacts = run(cfg);
  CHECK_FALSE(artifacts.beta);
  CHECK(testing::read_file(dir / "out/subsets/length/k2.txt") == "g h i j\na b c\n");
}

TEST_CASE("t-SNE export") {
  EmbeddingMatrix emb(5, 2);
  emb << 0, 0, 1, 0, 2, 0, 3, 0, 4, 0.5;
  const auto model = build_similarity(emb);
  std::vector<LabeledRanking> rankings = {{"coverage", rank_coverage(model)},
                                          {"rps", rank_ratio_penalty(model)}};
  std::ostringstream out;
  export_tsne_input(out, emb, rankings, 2);
  std::istringstream lines(out.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "e0\te1\ttop2_coverage\ttop2_rps");
  const auto top = rank_prefix(rankings[0].ranking, 2);
  int rows = 0;
  while (std::getline(lines, line)) {
    std::vector<std::string> cols;
    std::istringstream fields(line);
    for (std::string f; std::getline(fields, f, '\t');) cols.push_back(f);
    REQUIRE(cols.size() == 4);
    const bool in_top = std::find(top.begin(), top.end(), rows) != top.end();
    CHECK(cols[2] == (in_top ? "1" : "0"));
    ++rows;
  }
  CHECK(rows == 5);
  CHECK_THROWS_AS(export_tsne_input(out, emb, rankings, 0), std::out_of_range);
  CHECK_THROWS_AS(export_tsne_input(out, emb, rankings, 6), std::out_of_range);
}
