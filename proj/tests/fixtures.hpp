#pragma once

#include <random>
#include <sstream>
#include <string>

#include "test_util.hpp"

namespace testing {

// Writes `n` tagged sentences and matching `d`-dimensional embeddings.
inline void write_dataset(const TempDir& dir, int n, int d, std::uint64_t seed,
                          const std::string& corpus_name = "train.conll",
                          const std::string& emb_name = "train.emb") {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  std::ostringstream corpus, emb;
  emb << n << ' ' << d << '\n';
  for (int i = 0; i < n; ++i) {
    if (i > 0) corpus << '\n';
    const int len = 2 + static_cast<int>(gen() % 10);
    for (int t = 0; t < len; ++t) {
      const char* tag = t == 1 ? "B-Cuisine" : (t == 2 && len > 3 ? "I-Cuisine" : "O");
      corpus << "tok" << (gen() % 500) << '\t' << tag << '\n';
    }
    for (int c = 0; c < d; ++c) {
      std::ostringstream v;
      v.precision(17);
      v << normal(gen);
      emb << (c > 0 ? " " : "") << v.str();
    }
    emb << '\n';
  }
  write_file(dir / corpus_name, corpus.str());
  write_file(dir / emb_name, emb.str());
}

}  // namespace testing
