#pragma once

#include <Eigen/Dense>

namespace rareq {

using Scalar = double;
using Index = Eigen::Index;

// Rows are points: an n x d matrix holds n points in R^d.
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
using RowVector = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;
using IndexVector = Eigen::Matrix<Index, Eigen::Dynamic, 1>;

template <class T>
using CRef = const Eigen::Ref<const T>&;

}  // namespace rareq
