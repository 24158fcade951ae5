#include "datasel/corpus.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "datasel/errors.hpp"

namespace datasel {

namespace {

void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::vector<std::string> split_whitespace(std::string_view line) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && is_space(line[i])) ++i;
    std::size_t j = i;
    while (j < line.size() && !is_space(line[j])) ++j;
    if (j > i) out.emplace_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

std::ifstream open_or_throw(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return in;
}

Corpus parse_conll(std::istream& in, std::string name) {
  Corpus corpus{std::move(name), {}};
  std::vector<std::string> tokens, tags;
  std::size_t first_line = 0;
  std::size_t lineno = 0;

  auto flush = [&] {
    if (tokens.empty()) return;
    try {
      corpus.sentences.push_back(
          make_sentence(corpus.size(), std::move(tokens), std::move(tags)));
    } catch (const std::invalid_argument& e) {
      throw ParseError(first_line, e.what());
    }
    tokens.clear();
    tags.clear();
  };

  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) {
      flush();
      continue;
    }
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ParseError(lineno, "token without tag");
    std::string token = line.substr(0, tab);
    std::string tag = line.substr(tab + 1);
    if (token.empty()) throw ParseError(lineno, "empty token");
    if (tag.find('\t') != std::string::npos)
      throw ParseError(lineno, "expected exactly one tab");
    if (!is_bio_tag(tag)) throw ParseError(lineno, "invalid BIO tag '" + tag + "'");
    if (tokens.empty()) first_line = lineno;
    tokens.push_back(std::move(token));
    tags.push_back(std::move(tag));
  }
  flush();
  return corpus;
}

Corpus parse_plain(std::istream& in, std::string name) {
  Corpus corpus{std::move(name), {}};
  std::size_t lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    auto tokens = split_whitespace(line);
    if (tokens.empty()) throw ParseError(lineno, "empty sentence");
    corpus.sentences.push_back(make_sentence(corpus.size(), std::move(tokens)));
  }
  return corpus;
}

}  // namespace

CorpusFormat parse_corpus_format(std::string_view name) {
  if (name == "conll-bio") return CorpusFormat::kConllBio;
  if (name == "plain-lines") return CorpusFormat::kPlainLines;
  throw std::invalid_argument("unknown corpus format '" + std::string(name) + "'");
}

std::string_view to_string(CorpusFormat format) {
  return format == CorpusFormat::kConllBio ? "conll-bio" : "plain-lines";
}

bool is_bio_tag(std::string_view tag) {
  if (tag == "O") return true;
  return tag.size() > 2 && (tag[0] == 'B' || tag[0] == 'I') && tag[1] == '-';
}

Sentence make_sentence(Index index, std::vector<std::string> tokens,
                       std::optional<std::vector<std::string>> tags) {
  if (tokens.empty()) throw std::invalid_argument("sentence has no tokens");
  if (tags) {
    if (tags->size() != tokens.size()) {
      throw std::invalid_argument("tag/token length mismatch (" +
                                  std::to_string(tags->size()) + " tags, " +
                                  std::to_string(tokens.size()) + " tokens)");
    }
    for (const auto& tag : *tags) {
      if (!is_bio_tag(tag)) throw std::invalid_argument("invalid BIO tag '" + tag + "'");
    }
  }
  return Sentence{index, std::move(tokens), std::move(tags)};
}

bool Corpus::labeled() const {
  for (const auto& s : sentences) {
    if (!s.tags) return false;
  }
  return !sentences.empty();
}

Corpus parse_corpus(std::istream& in, CorpusFormat format, std::string name) {
  Corpus corpus = format == CorpusFormat::kConllBio ? parse_conll(in, std::move(name))
                                                    : parse_plain(in, std::move(name));
  if (corpus.sentences.empty()) throw ParseError(0, "empty corpus");
  return corpus;
}

Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format) {
  auto in = open_or_throw(path);
  try {
    return parse_corpus(in, format, path.stem().string());
  } catch (const ParseError& e) {
    throw e.with_source(path.string());
  }
}

void write_conll(std::ostream& out, std::span<const Sentence> sentences) {
  bool first = true;
  for (const auto& s : sentences) {
    if (!s.tags) {
      throw std::invalid_argument("sentence " + std::to_string(s.index) +
                                  " has no tags; cannot write conll-bio");
    }
    if (!first) out << '\n';
    first = false;
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      out << s.tokens[i] << '\t' << (*s.tags)[i] << '\n';
    }
  }
}

void write_plain_lines(std::ostream& out, std::span<const Sentence> sentences) {
  for (const auto& s : sentences) {
    for (std::size_t i = 0; i < s.tokens.size(); ++i) {
      if (i > 0) out << ' ';
      out << s.tokens[i];
    }
    out << '\n';
  }
}

EmbeddingMatrix parse_embeddings(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(0, "empty embedding file");
  strip_cr(line);

  long long rows = -1, dim = -1;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> rows >> dim) || (header >> extra) || rows < 1 || dim < 1) {
      throw ParseError(1, "header must be two positive integers 'n d'");
    }
  }

  EmbeddingMatrix values(rows, dim);
  Index row = 0;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    strip_cr(line);
    if (line.empty()) continue;
    if (row == rows) {
      throw ParseError(lineno, "more data rows than the " + std::to_string(rows) +
                                   " declared in the header");
    }
    const auto fields = split_whitespace(line);
    if (static_cast<long long>(fields.size()) != dim) {
      throw ParseError(lineno, "row " + std::to_string(row + 1) + " has " +
                                   std::to_string(fields.size()) + " values, expected " +
                                   std::to_string(dim));
    }
    for (Index col = 0; col < dim; ++col) {
      const auto& field = fields[static_cast<std::size_t>(col)];
      double v = 0.0;
      const char* end = field.data() + field.size();
      auto [ptr, ec] = std::from_chars(field.data(), end, v);
      if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ParseError(lineno, "row " + std::to_string(row + 1) + " column " +
                                     std::to_string(col + 1) + ": invalid value '" +
                                     field + "'");
      }
      values(row, col) = v;
    }
    ++row;
  }
  if (row != rows) {
    throw ParseError(0, "header declares " + std::to_string(rows) + " rows but " +
                            std::to_string(row) + " were found");
  }
  return values;
}

EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  auto in = open_or_throw(path);
  try {
    return parse_embeddings(in);
  } catch (const ParseError& e) {
    throw e.with_source(path.string());
  }
}

void validate_pair(const Corpus& corpus, const EmbeddingMatrix& embeddings) {
  if (embeddings.rows() != corpus.size()) {
    throw Error("corpus has " + std::to_string(corpus.size()) +
                " sentences but embeddings have " + std::to_string(embeddings.rows()) +
                " rows");
  }
}

}  // namespace datasel
