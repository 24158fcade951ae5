#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "datasel/dense.hpp"
#include "datasel/errors.hpp"

namespace datasel {

// Embedding similarity sim(x, y) = exp(-beta * |e(x) - e(y)|), where beta is
// the inverse of the mean distance over all ordered pairs u != w. Scaling or
// translating every embedding leaves the model unchanged.

enum class SimilarityStorage {
  kDense,  // n x n matrix kept in memory
  kLean,   // only coverage totals; rows recomputed from the embeddings
};

namespace detail {

// Squares accumulated left to right, one square root. Written as a plain loop
// so that d(i, j) and d(j, i) are bitwise identical regardless of alignment.
template <typename Scalar>
Scalar row_distance(const RowMatrix<Scalar>& points, Index i, Index j) {
  const Scalar* a = points.row(i).data();
  const Scalar* b = points.row(j).data();
  Scalar acc(0);
  for (Index k = 0; k < points.cols(); ++k) {
    const Scalar diff = a[k] - b[k];
    acc += diff * diff;
  }
  return std::sqrt(acc);
}

// Sum of a row's entries in ascending order: rows that are permutations of
// each other get bitwise-equal totals, so symmetric instances tie exactly.
template <typename Scalar>
Scalar sorted_sum(std::vector<Scalar>& values) {
  std::sort(values.begin(), values.end());
  Scalar acc(0);
  for (const Scalar v : values) acc += v;
  return acc;
}

template <typename Scalar>
Scalar beta_from_distance_sum(Scalar unordered_sum, Index n) {
  // Ordered pairs count every unordered pair twice; the diagonal adds zero.
  const Scalar ordered_sum = Scalar(2) * unordered_sum;
  const Scalar mean = ordered_sum / (Scalar(n) * Scalar(n - 1));
  if (!(mean > Scalar(0))) throw Error("degenerate embedding cloud");
  return Scalar(1) / mean;
}

template <typename Derived>
RowMatrix<typename Derived::Scalar> to_points(const Eigen::MatrixBase<Derived>& emb) {
  RowMatrix<typename Derived::Scalar> points = emb;
  if (points.cols() < 1) throw std::invalid_argument("embedding dimension must be >= 1");
  if (!points.allFinite()) throw std::invalid_argument("embeddings must be finite");
  return points;
}

template <typename Scalar>
Scalar compute_beta_points(const RowMatrix<Scalar>& points) {
  const Index n = points.rows();
  if (n < 2) throw std::invalid_argument("beta needs at least two embeddings");
  Scalar sum(0);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) sum += row_distance(points, i, j);
  }
  return beta_from_distance_sum(sum, n);
}

}  // namespace detail

/// Concentration constant: inverse mean pairwise Euclidean distance.
/// Throws datasel::Error("degenerate embedding cloud") when all rows coincide.
template <typename Derived>
typename Derived::Scalar compute_beta(const Eigen::MatrixBase<Derived>& emb) {
  return detail::compute_beta_points(detail::to_points(emb));
}

template <typename Scalar_>
class SimilarityModel;

template <typename Derived>
SimilarityModel<typename Derived::Scalar> build_similarity(
    const Eigen::MatrixBase<Derived>& emb,
    SimilarityStorage storage = SimilarityStorage::kDense);

template <typename Scalar_>
class SimilarityModel {
 public:
  using Scalar = Scalar_;

  SimilarityModel() = default;

  Scalar beta() const { return beta_; }
  Index size() const { return coverage_.size(); }
  SimilarityStorage storage() const {
    return dense_.size() > 0 || size() == 0 ? SimilarityStorage::kDense
                                            : SimilarityStorage::kLean;
  }

  /// Entry s is the sum over the ground set of sim(s, y), self included.
  const Vector<Scalar>& coverage_totals() const { return coverage_; }

  Scalar operator()(Index i, Index j) const {
    if (storage() == SimilarityStorage::kDense) return dense_(i, j);
    if (i == j) return Scalar(1);
    return std::exp(-beta_ * detail::row_distance(points_, i, j));
  }

  /// Writes sim(i, .) into `out` (length n).
  template <typename OutDerived>
  void row(Index i, Eigen::MatrixBase<OutDerived>& out) const {
    if (storage() == SimilarityStorage::kDense) {
      out = dense_.row(i).transpose();
      return;
    }
    for (Index j = 0; j < size(); ++j) out(j) = (*this)(i, j);
  }

  Vector<Scalar> row(Index i) const {
    Vector<Scalar> out(size());
    row(i, out);
    return out;
  }

  /// Adds sim(., x) to `acc` elementwise.
  template <typename AccDerived>
  void accumulate_row(Index x, Eigen::MatrixBase<AccDerived>& acc) const {
    if (storage() == SimilarityStorage::kDense) {
      acc += dense_.row(x).transpose();
      return;
    }
    for (Index j = 0; j < size(); ++j) acc(j) += (*this)(x, j);
  }

  // Empty in lean mode.
  const RowMatrix<Scalar>& matrix() const { return dense_; }

  template <typename Derived>
  friend SimilarityModel<typename Derived::Scalar> build_similarity(
      const Eigen::MatrixBase<Derived>& emb, SimilarityStorage storage);

 private:
  Scalar beta_ = Scalar(0);
  Vector<Scalar> coverage_;
  RowMatrix<Scalar> dense_;
  RowMatrix<Scalar> points_;
};

/// Builds the similarity model over all rows of `emb`. A single embedding
/// gets beta = 0 and the 1 x 1 similarity [1].
template <typename Derived>
SimilarityModel<typename Derived::Scalar> build_similarity(
    const Eigen::MatrixBase<Derived>& emb, SimilarityStorage storage) {
  using Scalar = typename Derived::Scalar;
  SimilarityModel<Scalar> model;
  RowMatrix<Scalar> points = detail::to_points(emb);
  const Index n = points.rows();
  if (n < 1) throw std::invalid_argument("empty embedding matrix");
  model.coverage_.resize(n);

  if (n == 1) {
    model.dense_ = RowMatrix<Scalar>::Ones(1, 1);
    model.coverage_(0) = Scalar(1);
    return model;
  }

  std::vector<Scalar> scratch(static_cast<std::size_t>(n));
  if (storage == SimilarityStorage::kDense) {
    RowMatrix<Scalar>& sim = model.dense_;
    sim.resize(n, n);
    Scalar sum(0);
    for (Index i = 0; i < n; ++i) {
      sim(i, i) = Scalar(0);
      for (Index j = i + 1; j < n; ++j) {
        const Scalar d = detail::row_distance(points, i, j);
        sim(i, j) = d;
        sim(j, i) = d;
        sum += d;
      }
    }
    model.beta_ = detail::beta_from_distance_sum(sum, n);
    // std::exp everywhere: the lean path must reproduce these bits.
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        sim(i, j) = i == j ? Scalar(1) : std::exp(-model.beta_ * sim(i, j));
      }
    }
    for (Index i = 0; i < n; ++i) {
      std::copy(sim.row(i).data(), sim.row(i).data() + n, scratch.begin());
      model.coverage_(i) = detail::sorted_sum(scratch);
    }
  } else {
    model.beta_ = detail::compute_beta_points(points);
    model.points_ = std::move(points);
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) scratch[static_cast<std::size_t>(j)] = model(i, j);
      model.coverage_(i) = detail::sorted_sum(scratch);
    }
  }
  return model;
}

template <typename Scalar>
struct Neighbor {
  Index index;
  Scalar similarity;
};

/// The m most similar sentences to `s` (excluding s), sorted by descending
/// similarity then ascending index.
template <typename Scalar>
std::vector<Neighbor<Scalar>> nearest_neighbors(const SimilarityModel<Scalar>& model,
                                                Index s, Index m) {
  const Index n = model.size();
  if (s < 0 || s >= n) throw std::out_of_range("sentence index out of range");
  if (m < 1 || m > n - 1) {
    throw std::out_of_range("neighbor count must be in [1, " + std::to_string(n - 1) + "]");
  }
  const Vector<Scalar> sims = model.row(s);
  std::vector<Neighbor<Scalar>> all;
  all.reserve(static_cast<std::size_t>(n - 1));
  for (Index j = 0; j < n; ++j) {
    if (j != s) all.push_back({j, sims(j)});
  }
  const auto cmp = [](const Neighbor<Scalar>& a, const Neighbor<Scalar>& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.index < b.index;
  };
  std::partial_sort(all.begin(), all.begin() + m, all.end(), cmp);
  all.resize(static_cast<std::size_t>(m));
  return all;
}

}  // namespace datasel
