#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <vector>

#define NEUCGC_VERSION_STRING "0.1.0"

namespace neucgc {

using Index = Eigen::Index;
using NodeId = std::int32_t;

using Matrix = Eigen::MatrixXd;
/// Row-major variant for kernels that stream whole rows (per-node math).
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

using IntVector = std::vector<std::int32_t>;

/// Per-node neighbor lists of an undirected graph; row i holds the sorted,
/// deduplicated neighbors of node i (no self loops).
using AdjacencyList = std::vector<std::vector<NodeId>>;

} // namespace neucgc
