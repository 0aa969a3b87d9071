#pragma once

#include <string>
#include <vector>

#include "gafs/data.hpp"
#include "gafs/types.hpp"

namespace gafs {

/// Symmetrized k-nearest-neighbor similarity graph over the samples of a
/// dataset, with its degree vector and unnormalized Laplacian L = D - A.
struct NeighborGraph {
    Matrix adjacency;  // n x n, symmetric, zero diagonal
    Vector degree;     // row sums of adjacency
    Matrix laplacian;  // diag(degree) - adjacency
    int k = 0;

    bool empty() const { return adjacency.size() == 0; }
};

/// Cosine similarity of two vectors, clamped to [-1, 1]. Throws NumericError
/// on a zero-norm vector and ShapeError on length mismatch.
double cosine_similarity(const Vector& u, const Vector& v);

/// For each sample, the k other samples with the largest cosine similarity
/// (0-based indices). Ties are broken toward the smaller sample index; each
/// list is ordered by decreasing similarity. Requires 1 <= k <= n - 1.
std::vector<std::vector<int>> knn_neighbors(const DataMatrix& x, int k);

/// Builds the union-symmetrized kNN graph: an edge (i, j) carries the cosine
/// similarity whenever either sample is in the other's neighborhood.
NeighborGraph build_graph(const DataMatrix& x, int k);

/// Writes the nonzero upper triangle as "i j weight" lines (1-based indices).
void write_graph_dump(const NeighborGraph& graph, const std::string& path);

}  // namespace gafs
