#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sps/common.hpp"
#include "sps/index/index_gen.hpp"

namespace sps {

struct UpsilonEntry {
    Bytes pk;
    Bytes r;

    bool operator==(const UpsilonEntry&) const = default;
};

// Cross-hospital index. Leaf ids are pseudonym ∘ r (fixed widths, so the
// split back into parts is unambiguous); upsilon lists the (pk, r) provenance
// pairs of every contributing index.
struct MergedIndex {
    std::vector<UpsilonEntry> upsilon;  // sorted by r
    Dendrogram tree;
    CbfDictionary dict;
};

inline bool merge_heuristic(size_t index_count, size_t threshold = 50) {
    return index_count >= threshold;
}

inline std::pair<Bytes, Bytes> split_leaf_key(const Bytes& key) {
    if (key.size() != pseudonym_bytes + index_r_bytes)
        throw Error(Errc::malformed_input, "merged leaf key width");
    return {Bytes(key.begin(), key.begin() + pseudonym_bytes),
            Bytes(key.begin() + pseudonym_bytes, key.end())};
}

namespace detail {

inline void check_merge_inputs(const std::vector<HierarchicalIndex>& indices) {
    if (indices.size() < 2) throw Error(Errc::malformed_input, "merge needs at least two indices");
    uint64_t len = indices.front().dict.begin()->second.size();
    for (const auto& idx : indices) {
        if (idx.r.size() != index_r_bytes) throw Error(Errc::malformed_input, "index r width");
        for (const auto& [id, cbf] : idx.dict)
            if (cbf.size() != len) throw Error(Errc::length_mismatch, "filter length mismatch");
    }
}

inline std::vector<UpsilonEntry> collect_upsilon(const std::vector<HierarchicalIndex>& indices) {
    std::vector<UpsilonEntry> ups;
    ups.reserve(indices.size());
    for (const auto& idx : indices) ups.push_back(UpsilonEntry{idx.pk, idx.r});
    std::sort(ups.begin(), ups.end(),
              [](const UpsilonEntry& a, const UpsilonEntry& b) { return a.r < b.r; });
    for (size_t i = 1; i < ups.size(); i++)
        if (ups[i].r == ups[i - 1].r) throw Error(Errc::malformed_input, "duplicate index r");
    return ups;
}

}  // namespace detail

// Pool every leaf from every index under its composite key and re-cluster
// from scratch.
inline MergedIndex index_merge_full(const std::vector<HierarchicalIndex>& indices,
                                    int mds_dim = default_mds_dim) {
    detail::check_merge_inputs(indices);
    MergedIndex out;
    out.upsilon = detail::collect_upsilon(indices);

    CbfDictionary pooled;
    for (const auto& idx : indices)
        for (const auto& node : idx.tree.nodes) {
            if (!node.leaf) continue;
            pooled.emplace(concat(node.id, idx.r), idx.dict.at(node.id));
        }

    HcResult res = hc(pooled, mds_dim);
    out.tree = std::move(res.tree);
    out.dict = std::move(res.node_dict);
    return out;
}

// Cluster only the roots, then graft each original subtree beneath its spot.
// Grafted leaf ids are rewritten to the composite form and internal ids are
// renumbered, so both merge variants emit one uniform format.
inline MergedIndex index_merge_fast(const std::vector<HierarchicalIndex>& indices,
                                    int mds_dim = default_mds_dim) {
    detail::check_merge_inputs(indices);
    MergedIndex out;
    out.upsilon = detail::collect_upsilon(indices);

    const size_t n = indices.size();
    Dendrogram pool;
    std::vector<uint32_t> subtree_root(n);
    std::vector<const CustomizedBloomFilter*> root_cbf(n);
    std::vector<CustomizedBloomFilter> node_cbfs;

    for (size_t i = 0; i < n; i++) {
        const HierarchicalIndex& idx = indices[i];
        uint32_t base = uint32_t(pool.nodes.size());
        for (const auto& node : idx.tree.nodes) {
            DendrogramNode copy;
            copy.leaf = node.leaf;
            copy.id = node.leaf ? concat(node.id, idx.r) : Bytes{};
            copy.left = node.leaf ? no_child : base + node.left;
            copy.right = node.leaf ? no_child : base + node.right;
            pool.nodes.push_back(std::move(copy));
            node_cbfs.push_back(idx.dict.at(node.id));
        }
        subtree_root[i] = base + idx.tree.root;
    }
    for (size_t i = 0; i < n; i++) root_cbf[i] = &node_cbfs[subtree_root[i]];

    Eigen::MatrixXd s(n, n);
    for (size_t i = 0; i < n; i++) {
        s(Eigen::Index(i), Eigen::Index(i)) = 1.0;
        for (size_t j = i + 1; j < n; j++) {
            double v = cosine(*root_cbf[i], *root_cbf[j]);
            s(Eigen::Index(i), Eigen::Index(j)) = v;
            s(Eigen::Index(j), Eigen::Index(i)) = v;
        }
    }
    Eigen::MatrixXd dist(n, n);
    for (Eigen::Index i = 0; i < Eigen::Index(n); i++)
        for (Eigen::Index j = 0; j < Eigen::Index(n); j++)
            dist(i, j) = i == j ? 0.0 : std::max(0.0, 1.0 - s(i, j));
    Eigen::MatrixXd coords = classical_mds(dist, std::min<int>(int(n) - 1, mds_dim));
    std::vector<WardMerge> merges = ward_cluster(coords);

    std::vector<uint32_t> cluster_node(2 * n - 1);
    for (size_t i = 0; i < n; i++) cluster_node[i] = subtree_root[i];
    for (size_t t = 0; t < merges.size(); t++) {
        DendrogramNode node;
        node.leaf = false;
        node.left = cluster_node[merges[t].a];
        node.right = cluster_node[merges[t].b];
        CustomizedBloomFilter cbf = node_cbfs[node.left];
        cbf.or_with(node_cbfs[node.right]);
        cluster_node[n + t] = uint32_t(pool.nodes.size());
        pool.nodes.push_back(std::move(node));
        node_cbfs.push_back(std::move(cbf));
    }
    pool.root = uint32_t(pool.nodes.size() - 1);

    size_t counter = 0;
    for (auto& node : pool.nodes)
        if (!node.leaf) node.id = to_bytes("h:" + std::to_string(counter++));
    for (size_t i = 0; i < pool.nodes.size(); i++) {
        auto [it, fresh] = out.dict.emplace(pool.nodes[i].id, std::move(node_cbfs[i]));
        if (!fresh) throw Error(Errc::malformed_input, "duplicate node id in merge");
    }
    out.tree = std::move(pool);
    return out;
}

}  // namespace sps
