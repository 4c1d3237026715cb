#include "alm/knn.hpp"

#include "alm/errors.hpp"
#include "parallel.hpp"

#include <algorithm>
#include <limits>
#include <utility>

namespace alm {

namespace {

// Candidate list ordered by (distance, index), at most m long.
struct Best {
    std::vector<std::pair<double, std::size_t>> items;
    std::size_t m;

    bool full() const { return items.size() == m; }
    double worst() const { return full() ? items.back().first : std::numeric_limits<double>::infinity(); }

    void offer(double d, std::size_t idx) {
        const std::pair<double, std::size_t> cand{d, idx};
        if (full() && !(cand < items.back())) return;
        auto pos = std::upper_bound(items.begin(), items.end(), cand);
        items.insert(pos, cand);
        if (items.size() > m) items.pop_back();
    }
};

}  // namespace

KdTree::KdTree(std::span<const double> points, std::size_t dim, std::size_t leaf_size)
    : points_(points), dim_(dim), n_(dim ? points.size() / dim : 0), leaf_(std::max<std::size_t>(leaf_size, 1)) {
    if (dim == 0 || points.size() % dim != 0) throw ArgumentError("point array does not match dimension");
    if (n_ == 0) throw ArgumentError("need at least one sample");
    perm_.resize(n_);
    for (std::size_t i = 0; i < n_; ++i) perm_[i] = i;
    nodes_.reserve(2 * (n_ / leaf_ + 1));
    build(0, n_);
}

int KdTree::build(std::size_t begin, std::size_t end) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back({begin, end, 0, 0.0, -1, -1});
    if (end - begin <= leaf_) return id;
    std::size_t axis = 0;
    double spread = -1.0;
    for (std::size_t a = 0; a < dim_; ++a) {
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (std::size_t i = begin; i < end; ++i) {
            const double v = points_[perm_[i] * dim_ + a];
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        if (hi - lo > spread) {
            spread = hi - lo;
            axis = a;
        }
    }
    if (!(spread > 0.0)) return id;  // all points coincide
    const std::size_t mid = begin + (end - begin) / 2;
    auto key = [&](std::size_t idx) { return points_[idx * dim_ + axis]; };
    std::nth_element(perm_.begin() + static_cast<std::ptrdiff_t>(begin),
                     perm_.begin() + static_cast<std::ptrdiff_t>(mid),
                     perm_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
    const double split = key(perm_[mid]);
    const int left = build(begin, mid);
    const int right = build(mid, end);
    nodes_[static_cast<std::size_t>(id)].axis = axis;
    nodes_[static_cast<std::size_t>(id)].split = split;
    nodes_[static_cast<std::size_t>(id)].left = left;
    nodes_[static_cast<std::size_t>(id)].right = right;
    return id;
}

double KdTree::dist2(const double* q, std::size_t index) const {
    const double* p = points_.data() + index * dim_;
    double s = 0.0;
    for (std::size_t a = 0; a < dim_; ++a) {
        const double d = q[a] - p[a];
        s += d * d;
    }
    return s;
}

void KdTree::query(const double* q, std::size_t m, std::vector<std::size_t>& out) const {
    if (m == 0) throw ArgumentError("neighbor count must be positive");
    if (m > n_) throw ArgumentError("neighbor count exceeds the number of samples");
    Best best{{}, m};
    best.items.reserve(m + 1);
    // Explicit stack of (node, lower bound on squared distance).
    std::vector<std::pair<int, double>> stack;
    stack.reserve(64);
    stack.emplace_back(0, 0.0);
    while (!stack.empty()) {
        const auto [id, bound] = stack.back();
        stack.pop_back();
        if (bound > best.worst()) continue;
        const Node& node = nodes_[static_cast<std::size_t>(id)];
        if (node.left < 0) {
            for (std::size_t i = node.begin; i < node.end; ++i) best.offer(dist2(q, perm_[i]), perm_[i]);
            continue;
        }
        const double diff = q[node.axis] - node.split;
        const int near = diff <= 0.0 ? node.left : node.right;
        const int far = diff <= 0.0 ? node.right : node.left;
        stack.emplace_back(far, std::max(bound, diff * diff));
        stack.emplace_back(near, bound);
    }
    out.resize(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = best.items[i].second;
}

std::vector<std::size_t> knn_brute_force(std::span<const double> samples, std::size_t dim,
                                         const double* q, std::size_t m) {
    const std::size_t n = samples.size() / dim;
    if (m == 0 || m > n) throw ArgumentError("neighbor count out of range");
    Best best{{}, m};
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        for (std::size_t a = 0; a < dim; ++a) {
            const double d = q[a] - samples[i * dim + a];
            s += d * d;
        }
        best.offer(s, i);
    }
    std::vector<std::size_t> out(m);
    for (std::size_t i = 0; i < m; ++i) out[i] = best.items[i].second;
    return out;
}

std::vector<std::size_t> knn_neighbors(const KdTree& tree, std::span<const double> queries,
                                       std::size_t m, unsigned threads) {
    const std::size_t dim = tree.dimension();
    if (queries.size() % dim != 0) throw ArgumentError("query array does not match dimension");
    if (m == 0 || m > tree.size()) throw ArgumentError("neighbor count out of range");
    const std::size_t nq = queries.size() / dim;
    std::vector<std::size_t> out(nq * m);
    detail::run_workers(nq, threads, [&](std::size_t lo, std::size_t hi) {
        std::vector<std::size_t> idx;
        for (std::size_t i = lo; i < hi; ++i) {
            tree.query(queries.data() + i * dim, m, idx);
            std::copy(idx.begin(), idx.end(), out.begin() + static_cast<std::ptrdiff_t>(i * m));
        }
    }, 256);
    return out;
}

std::vector<double> knn_conditional_expectation(std::span<const double> queries,
                                                std::span<const double> samples,
                                                std::span<const double> responses, std::size_t dim,
                                                std::size_t m, unsigned threads) {
    if (dim == 0 || samples.size() % dim != 0) throw ArgumentError("sample array does not match dimension");
    const std::size_t n = samples.size() / dim;
    if (responses.size() != n) throw ArgumentError("need one response per sample");
    if (m == 0) throw ArgumentError("neighbor count must be positive");
    if (m > n) throw ArgumentError("neighbor count exceeds the number of samples");
    const KdTree tree(samples, dim);
    const auto nb = knn_neighbors(tree, queries, m, threads);
    std::vector<double> out(nb.size() / m);
    for (std::size_t i = 0; i < out.size(); ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < m; ++j) s += responses[nb[i * m + j]];
        out[i] = s / static_cast<double>(m);
    }
    return out;
}

}  // namespace alm
