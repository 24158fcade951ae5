#pragma once

#include <Eigen/Dense>

namespace datasel {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

// Row-major so that one sentence embedding is contiguous.
template <typename Scalar>
using RowMatrix =
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// n x d sentence embeddings, row i belongs to sentence i.
using EmbeddingMatrix = RowMatrix<double>;

}  // namespace datasel
