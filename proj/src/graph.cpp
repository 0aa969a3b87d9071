#include "gafs/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace gafs {
namespace {

// Pairwise cosine similarity table computed from the Gram matrix as
// dot / (norm_i * norm_j), clamped to [-1, 1]. Throws if any sample has zero
// norm, naming the sample (1-based).
Matrix similarity_table(const DataMatrix& x) {
    const Matrix gram = x.values.transpose() * x.values;
    const auto n = gram.rows();
    Vector norms(n);
    for (Index j = 0; j < n; ++j) {
        norms(j) = std::sqrt(gram(j, j));
        if (norms(j) == 0.0) {
            throw NumericError("sample " + std::to_string(j + 1) +
                               " has zero norm; cosine similarity undefined");
        }
    }
    Matrix sims(n, n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j)
            sims(i, j) = std::clamp(gram(i, j) / (norms(i) * norms(j)), -1.0, 1.0);
    return sims;
}

std::vector<std::vector<int>> neighbors_from_table(const Matrix& sims, int k) {
    const auto n = sims.rows();
    std::vector<std::vector<int>> neighborhoods(static_cast<std::size_t>(n));
    std::vector<int> order(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        order.clear();
        for (Index j = 0; j < n; ++j)
            if (j != i) order.push_back(static_cast<int>(j));
        auto better = [&](int a, int b) {
            const double sa = sims(i, a), sb = sims(i, b);
            return sa > sb || (sa == sb && a < b);
        };
        std::partial_sort(order.begin(), order.begin() + k, order.end(), better);
        neighborhoods[static_cast<std::size_t>(i)].assign(order.begin(), order.begin() + k);
    }
    return neighborhoods;
}

void validate_k(const DataMatrix& x, int k) {
    const auto n = x.samples();
    if (k < 1 || k > n - 1) {
        throw ConfigError("neighbor count must satisfy 1 <= k <= n-1, got k=" + std::to_string(k) +
                          " with n=" + std::to_string(n));
    }
}

}  // namespace

double cosine_similarity(const Vector& u, const Vector& v) {
    if (u.size() != v.size()) {
        throw ShapeError("cosine similarity requires equal-length vectors, got " +
                         std::to_string(u.size()) + " and " + std::to_string(v.size()));
    }
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) throw NumericError("cosine similarity undefined for a zero-norm vector");
    return std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
}

std::vector<std::vector<int>> knn_neighbors(const DataMatrix& x, int k) {
    validate_k(x, k);
    return neighbors_from_table(similarity_table(x), k);
}

NeighborGraph build_graph(const DataMatrix& x, int k) {
    validate_k(x, k);
    const auto n = x.samples();
    const Matrix sims = similarity_table(x);
    const auto neighborhoods = neighbors_from_table(sims, k);

    std::vector<char> is_neighbor(static_cast<std::size_t>(n * n), 0);
    for (Index i = 0; i < n; ++i)
        for (int j : neighborhoods[static_cast<std::size_t>(i)])
            is_neighbor[static_cast<std::size_t>(i * n + j)] = 1;

    NeighborGraph graph;
    graph.k = k;
    graph.adjacency = Matrix::Zero(n, n);
    // Assign both entries from the single upper-triangle similarity so the
    // adjacency is symmetric by construction.
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if (is_neighbor[static_cast<std::size_t>(i * n + j)] ||
                is_neighbor[static_cast<std::size_t>(j * n + i)]) {
                const double w = sims(i, j);
                graph.adjacency(i, j) = w;
                graph.adjacency(j, i) = w;
            }
        }
    }

    graph.degree = graph.adjacency.rowwise().sum();
    graph.laplacian = -graph.adjacency;
    graph.laplacian.diagonal() = graph.degree;
    return graph;
}

void write_graph_dump(const NeighborGraph& graph, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open graph dump for writing: " + path);
    char line[80];
    for (Index i = 0; i < graph.adjacency.rows(); ++i) {
        for (Index j = i + 1; j < graph.adjacency.cols(); ++j) {
            if (graph.adjacency(i, j) != 0.0) {
                std::snprintf(line, sizeof(line), "%lld %lld %.17g\n",
                              static_cast<long long>(i + 1), static_cast<long long>(j + 1),
                              graph.adjacency(i, j));
                out << line;
            }
        }
    }
    if (!out) throw IoError("failed writing graph dump: " + path);
}

}  // namespace gafs
