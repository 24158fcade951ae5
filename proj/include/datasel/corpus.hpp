#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "datasel/dense.hpp"

namespace datasel {

enum class CorpusFormat { kConllBio, kPlainLines };

CorpusFormat parse_corpus_format(std::string_view name);
std::string_view to_string(CorpusFormat format);

struct Sentence {
  Index index = 0;
  std::vector<std::string> tokens;
  // Absent for unlabeled pools.
  std::optional<std::vector<std::string>> tags;

  Index size() const { return static_cast<Index>(tokens.size()); }
  bool operator==(const Sentence&) const = default;
};

/// True for `O`, `B-<name>` and `I-<name>` with a non-empty name.
bool is_bio_tag(std::string_view tag);

// Throws std::invalid_argument when the sentence invariants do not hold.
Sentence make_sentence(Index index, std::vector<std::string> tokens,
                       std::optional<std::vector<std::string>> tags = {});

/// The ground set: sentences in file order, indices 0..n-1.
struct Corpus {
  std::string name;
  std::vector<Sentence> sentences;

  Index size() const { return static_cast<Index>(sentences.size()); }
  const Sentence& operator[](Index i) const { return sentences[static_cast<std::size_t>(i)]; }
  bool labeled() const;
  bool operator==(const Corpus&) const = default;
};

Corpus parse_corpus(std::istream& in, CorpusFormat format, std::string name = {});
Corpus load_corpus(const std::filesystem::path& path, CorpusFormat format);

// Both writers emit exactly what parse_corpus reads back. write_conll
// requires every sentence to carry tags.
void write_conll(std::ostream& out, std::span<const Sentence> sentences);
void write_plain_lines(std::ostream& out, std::span<const Sentence> sentences);

/// Embedding file: header `n d`, then n rows of d reals.
EmbeddingMatrix parse_embeddings(std::istream& in);
EmbeddingMatrix load_embeddings(const std::filesystem::path& path);

// Throws datasel::Error naming both counts on size mismatch.
void validate_pair(const Corpus& corpus, const EmbeddingMatrix& embeddings);

}  // namespace datasel
