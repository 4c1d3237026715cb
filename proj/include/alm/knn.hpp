#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace alm {

/// Exact k-nearest-neighbor search in Euclidean distance over a fixed point
/// set (row-major, `dim` values per point). Ties in distance go to the lower
/// sample index, so results match a brute-force scan exactly.
class KdTree {
public:
    KdTree(std::span<const double> points, std::size_t dim, std::size_t leaf_size = 16);

    std::size_t size() const { return n_; }
    std::size_t dimension() const { return dim_; }

    /// Indices of the m nearest samples, nearest first.
    void query(const double* q, std::size_t m, std::vector<std::size_t>& out) const;

private:
    struct Node {
        std::size_t begin = 0, end = 0;
        std::size_t axis = 0;
        double split = 0.0;
        int left = -1, right = -1;
    };
    int build(std::size_t begin, std::size_t end);
    double dist2(const double* q, std::size_t index) const;

    std::span<const double> points_;
    std::size_t dim_;
    std::size_t n_;
    std::size_t leaf_;
    std::vector<std::size_t> perm_;
    std::vector<Node> nodes_;
};

/// Reference scan with the same tie-breaking.
std::vector<std::size_t> knn_brute_force(std::span<const double> samples, std::size_t dim,
                                         const double* q, std::size_t m);

/// Mean response of the m nearest samples for each query.
std::vector<double> knn_conditional_expectation(std::span<const double> queries,
                                                std::span<const double> samples,
                                                std::span<const double> responses, std::size_t dim,
                                                std::size_t m, unsigned threads = 0);

/// Neighbor lists for many queries: row i holds the m sample indices for query i.
std::vector<std::size_t> knn_neighbors(const KdTree& tree, std::span<const double> queries,
                                       std::size_t m, unsigned threads = 0);

}  // namespace alm
