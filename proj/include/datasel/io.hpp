#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "datasel/dense.hpp"
#include "datasel/selector.hpp"

namespace datasel {

/// Shortest decimal text that parses back to the same double.
std::string format_real(double value);

/// Key/value pairs of a ranking file's `#` header line.
struct RankingHeader {
  std::string strategy;
  std::optional<std::uint64_t> seed;
  std::optional<double> beta;
  Index n = 0;
  std::string rng;
};

// Ranking file:
//   # strategy=<name> seed=<n|none> beta=<x|none> n=<n> rng=<generator>
//   <rank>\t<sentence index>\t<score>      (rank is 1-based)
void write_ranking(std::ostream& out, const Ranking<double>& ranking,
                   std::optional<double> beta);
void save_ranking(const std::filesystem::path& path, const Ranking<double>& ranking,
                  std::optional<double> beta);

struct RankingFile {
  RankingHeader header;
  Ranking<double> ranking;
};

RankingFile read_ranking(std::istream& in);
RankingFile load_ranking(const std::filesystem::path& path);

/// One JSON object per line: {"index": i, "token_probs": [p1, ..., pk]}.
UncertaintySet parse_uncertainties(std::istream& in);
UncertaintySet load_uncertainties(const std::filesystem::path& path);

/// One sentence index per line; blank lines ignored.
std::vector<Index> parse_index_list(std::istream& in);
std::vector<Index> load_index_list(const std::filesystem::path& path);
void write_index_list(std::ostream& out, const std::vector<Index>& indices);

}  // namespace datasel
