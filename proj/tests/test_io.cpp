#include <doctest.h>

#include <sstream>

#include "datasel/checksum.hpp"
#include "datasel/errors.hpp"
#include "datasel/io.hpp"
#include "datasel/rng.hpp"
#include "oracle.hpp"
#include "test_util.hpp"

using namespace datasel;

TEST_CASE("ranking file layout") {
  EmbeddingMatrix m(3, 2);
  m << 0, 0, 3, 4, 6, 8;
  const auto model = build_similarity(m);
  std::ostringstream out;
  write_ranking(out, rank_ratio_penalty(model), model.beta());
  const std::string text = out.str();
  CHECK(text.starts_with("# strategy=ratio-penalty seed=none beta=0.15 n=3 rng=" +
                         std::string(Rng::kRngName) + "\n1\t1\t1.94473310"));
  CHECK(text.find("\n2\t0\t1.15154525") != std::string::npos);
  CHECK(text.ends_with("\n3\t2\t1\n"));

  std::ostringstream random_out;
  write_ranking(random_out, rank_random(3, 42), std::nullopt);
  CHECK(random_out.str().starts_with("# strategy=random seed=42 beta=none n=3 rng="));
}

TEST_CASE("ranking files read back exactly") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 10; ++trial) {
    const auto m = build_similarity(testing::to_matrix(oracle::random_points(gen, 20, 3)));
    const auto ranking = rank_linear_penalty(m, 0.5);
    std::stringstream buffer;
    write_ranking(buffer, ranking, m.beta());
    const RankingFile back = read_ranking(buffer);
    CHECK(back.ranking.order == ranking.order);
    CHECK(back.ranking.scores == ranking.scores);
    CHECK(back.header.beta == m.beta());
    CHECK(back.header.n == 20);
    CHECK(back.header.strategy == "linear-penalty");
  }
}

TEST_CASE("malformed ranking files") {
  auto fails = [](const std::string& text) {
    std::istringstream in(text);
    CHECK_THROWS_AS(read_ranking(in), ParseError);
  };
  fails("");
  fails("strategy=x n=1\n1\t0\t0\n");
  fails("# strategy=x n=2\n1\t0\t0\n");
  fails("# strategy=x n=2\n1\t0\t0\n2\t0\t0\n");
  fails("# strategy=x n=1\n2\t0\t0\n");
  fails("# strategy=x n=1\n1\tzero\t0\n");
}

TEST_CASE("real formatting round-trips") {
  for (const double v : {0.15, 1.0 / 3.0, 1e-300, -2.5, 1.9447331054820296}) {
    CHECK(std::stod(format_real(v)) == v);
  }
  CHECK(format_real(1.0) == "1");
}

TEST_CASE("uncertainty JSONL") {
  std::istringstream in(
      "{\"index\": 0, \"token_probs\": [0.9, 0.5, 0.7]}\n\n"
      "{\"token_probs\": [1], \"index\": 3}\n");
  const auto set = parse_uncertainties(in);
  REQUIRE(set.size() == 2);
  CHECK(set[0].token_probs.size() == 3);
  CHECK(set[1].index == 3);

  auto error_line = [](const std::string& text) -> std::size_t {
    std::istringstream bad(text);
    try {
      parse_uncertainties(bad);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  CHECK(error_line("{\"index\": 0, \"token_probs\": [1]}\n{\"index\": 1}\n") == 2);
  CHECK(error_line("not json\n") == 1);
  CHECK(error_line("{\"index\": 1.5, \"token_probs\": [1]}\n") == 1);
  CHECK(error_line("{\"index\": 1, \"token_probs\": [\"a\"]}\n") == 1);
}

TEST_CASE("index lists") {
  std::istringstream in("3\n\n 10 \n0\r\n");
  CHECK(parse_index_list(in) == std::vector<Index>{3, 10, 0});
  std::istringstream empty("");
  CHECK(parse_index_list(empty).empty());
  std::istringstream bad("1\n-2\n");
  CHECK_THROWS_AS(parse_index_list(bad), ParseError);
  std::ostringstream out;
  write_index_list(out, {4, 1});
  CHECK(out.str() == "4\n1\n");
}

TEST_CASE("sha256") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  testing::TempDir dir;
  testing::write_file(dir / "f", "abc");
  CHECK(sha256_file(dir / "f") == sha256_hex("abc"));
}
