#include "datasel/io.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "datasel/errors.hpp"
#include "datasel/rng.hpp"

namespace datasel {

namespace {

template <typename T>
bool parse_number(std::string_view text, T& value) {
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  return ec == std::errc() && ptr == end;
}

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

std::ofstream create_or_throw(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

RankingHeader parse_header(std::string_view line) {
  if (line.substr(0, 2) != "# ") throw ParseError(1, "missing '# ' ranking header");
  RankingHeader header;
  bool have_strategy = false, have_n = false;
  std::istringstream fields{std::string(line.substr(2))};
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw ParseError(1, "malformed header field '" + field + "'");
    const std::string key = field.substr(0, eq);
    const std::string value = field.substr(eq + 1);
    if (key == "strategy") {
      header.strategy = value;
      have_strategy = true;
    } else if (key == "seed") {
      if (value != "none") {
        std::uint64_t seed = 0;
        if (!parse_number(value, seed)) throw ParseError(1, "bad seed '" + value + "'");
        header.seed = seed;
      }
    } else if (key == "beta") {
      if (value != "none") {
        double beta = 0.0;
        if (!parse_number(value, beta)) throw ParseError(1, "bad beta '" + value + "'");
        header.beta = beta;
      }
    } else if (key == "n") {
      if (!parse_number(value, header.n) || header.n < 1) {
        throw ParseError(1, "bad n '" + value + "'");
      }
      have_n = true;
    } else if (key == "rng") {
      header.rng = value;
    }
  }
  if (!have_strategy || !have_n) throw ParseError(1, "header needs strategy= and n=");
  return header;
}

}  // namespace

std::string format_real(double value) {
  std::array<char, 32> buffer{};
  auto [ptr, ec] = std::to_chars(buffer.data(), buffer.data() + buffer.size(), value);
  if (ec != std::errc()) throw Error("cannot format number");
  return std::string(buffer.data(), ptr);
}

void write_ranking(std::ostream& out, const Ranking<double>& ranking,
                   std::optional<double> beta) {
  out << "# strategy=" << ranking.strategy
      << " seed=" << (ranking.seed ? std::to_string(*ranking.seed) : "none")
      << " beta=" << (beta ? format_real(*beta) : "none") << " n=" << ranking.size()
      << " rng=" << Rng::kRngName << '\n';
  for (Index r = 0; r < ranking.size(); ++r) {
    out << (r + 1) << '\t' << ranking.order[static_cast<std::size_t>(r)] << '\t'
        << format_real(ranking.scores(r)) << '\n';
  }
}

void save_ranking(const std::filesystem::path& path, const Ranking<double>& ranking,
                  std::optional<double> beta) {
  auto out = create_or_throw(path);
  write_ranking(out, ranking, beta);
  if (!out) throw Error("write failed: " + path.string());
}

RankingFile read_ranking(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(0, "empty ranking file");
  strip_cr(line);
  RankingFile file;
  file.header = parse_header(line);
  file.ranking.strategy = file.header.strategy;
  file.ranking.seed = file.header.seed;

  std::vector<double> scores;
  std::vector<bool> seen(static_cast<std::size_t>(file.header.n), false);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (blank(line)) continue;
    std::istringstream fields(line);
    std::string rank_text, index_text, score_text, extra;
    if (!std::getline(fields, rank_text, '\t') || !std::getline(fields, index_text, '\t') ||
        !std::getline(fields, score_text, '\t') || std::getline(fields, extra, '\t')) {
      throw ParseError(lineno, "expected rank<TAB>index<TAB>score");
    }
    Index rank = 0, index = 0;
    double score = 0.0;
    if (!parse_number(rank_text, rank) || !parse_number(index_text, index) ||
        !parse_number(score_text, score)) {
      throw ParseError(lineno, "non-numeric field");
    }
    if (rank != file.ranking.size() + 1) throw ParseError(lineno, "ranks must be 1, 2, 3, ...");
    if (index < 0 || index >= file.header.n || seen[static_cast<std::size_t>(index)]) {
      throw ParseError(lineno, "index " + index_text + " out of range or repeated");
    }
    seen[static_cast<std::size_t>(index)] = true;
    file.ranking.order.push_back(index);
    scores.push_back(score);
  }
  if (file.ranking.size() != file.header.n) {
    throw ParseError(0, "ranking has " + std::to_string(file.ranking.size()) +
                            " rows, header says n=" + std::to_string(file.header.n));
  }
  file.ranking.scores = Eigen::Map<const Vector<double>>(scores.data(), file.header.n);
  return file;
}

RankingFile load_ranking(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  try {
    return read_ranking(in);
  } catch (const ParseError& e) {
    throw e.with_source(path.string());
  }
}

UncertaintySet parse_uncertainties(std::istream& in) {
  UncertaintySet set;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    try {
      const auto obj = nlohmann::json::parse(line);
      if (!obj.is_object() || !obj.at("index").is_number_integer()) {
        throw ParseError(lineno, "expected an object with an integer \"index\"");
      }
      UncertaintyRecord record;
      record.index = obj.at("index").get<Index>();
      record.token_probs = obj.at("token_probs").get<std::vector<double>>();
      set.push_back(std::move(record));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(lineno, std::string("invalid uncertainty record: ") + e.what());
    }
  }
  return set;
}

UncertaintySet load_uncertainties(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  try {
    return parse_uncertainties(in);
  } catch (const ParseError& e) {
    throw e.with_source(path.string());
  }
}

std::vector<Index> parse_index_list(std::istream& in) {
  std::vector<Index> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (blank(line)) continue;
    const auto begin = line.find_first_not_of(" \t");
    const auto end = line.find_last_not_of(" \t\r");
    Index index = 0;
    if (!parse_number(std::string_view(line).substr(begin, end - begin + 1), index) ||
        index < 0) {
      throw ParseError(lineno, "expected a sentence index, got '" + line + "'");
    }
    out.push_back(index);
  }
  return out;
}

std::vector<Index> load_index_list(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  try {
    return parse_index_list(in);
  } catch (const ParseError& e) {
    throw e.with_source(path.string());
  }
}

void write_index_list(std::ostream& out, const std::vector<Index>& indices) {
  for (const Index i : indices) out << i << '\n';
}

}  // namespace datasel
