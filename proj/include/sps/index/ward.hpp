#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <utility>
#include <vector>

#include "sps/common.hpp"

namespace sps {

// One agglomeration step. Cluster ids follow the usual linkage convention:
// leaves are 0..n-1 and step t creates cluster n+t. `a` holds the side whose
// smallest contained leaf index is smaller.
struct WardMerge {
    size_t a;
    size_t b;
    double cost;
};

// Agglomerative clustering with Ward's minimum-variance linkage, computed by
// the Lance-Williams recursion over squared Euclidean distances. Equal-cost
// candidates are resolved toward the pair whose (smallest leaf, smallest
// leaf) index pair is lexicographically least, which makes the sequence
// deterministic.
inline std::vector<WardMerge> ward_cluster(const Eigen::MatrixXd& coords) {
    const size_t n = static_cast<size_t>(coords.rows());
    if (n == 0) throw Error(Errc::malformed_input, "no points to cluster");
    if (n == 1) return {};

    const size_t total = 2 * n - 1;
    std::vector<double> size(total, 0.0);
    std::vector<size_t> min_leaf(total, 0);
    std::vector<bool> alive(total, false);
    std::vector<std::vector<double>> d(total, std::vector<double>(total, 0.0));

    for (size_t i = 0; i < n; i++) {
        size[i] = 1.0;
        min_leaf[i] = i;
        alive[i] = true;
    }
    for (size_t i = 0; i < n; i++)
        for (size_t j = i + 1; j < n; j++) {
            double sq = (coords.row(Eigen::Index(i)) - coords.row(Eigen::Index(j))).squaredNorm();
            d[i][j] = d[j][i] = sq;
        }

    std::vector<WardMerge> merges;
    merges.reserve(n - 1);
    size_t next = n;
    for (size_t step = 0; step + 1 < n; step++) {
        double best = std::numeric_limits<double>::infinity();
        std::pair<size_t, size_t> best_key{0, 0};
        size_t bi = 0, bj = 0;
        bool found = false;
        for (size_t i = 0; i < next; i++) {
            if (!alive[i]) continue;
            for (size_t j = i + 1; j < next; j++) {
                if (!alive[j]) continue;
                std::pair<size_t, size_t> key = std::minmax(min_leaf[i], min_leaf[j]);
                if (!found || d[i][j] < best || (d[i][j] == best && key < best_key)) {
                    found = true;
                    best = d[i][j];
                    best_key = key;
                    bi = i;
                    bj = j;
                }
            }
        }

        size_t c = next++;
        size[c] = size[bi] + size[bj];
        min_leaf[c] = std::min(min_leaf[bi], min_leaf[bj]);
        alive[bi] = alive[bj] = false;
        alive[c] = true;
        for (size_t k = 0; k < c; k++) {
            if (!alive[k]) continue;
            double total_size = size[bi] + size[bj] + size[k];
            d[c][k] = d[k][c] = ((size[bi] + size[k]) * d[bi][k] + (size[bj] + size[k]) * d[bj][k] -
                                 size[k] * d[bi][bj]) /
                                total_size;
        }

        size_t a = min_leaf[bi] <= min_leaf[bj] ? bi : bj;
        size_t b = a == bi ? bj : bi;
        merges.push_back(WardMerge{a, b, best});
    }
    return merges;
}

}  // namespace sps
