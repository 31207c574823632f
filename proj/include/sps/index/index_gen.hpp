#pragma once

#include <Eigen/Dense>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "sps/common.hpp"
#include "sps/crypto/hash.hpp"
#include "sps/crypto/sig.hpp"
#include "sps/filters/bloom.hpp"
#include "sps/filters/cbf.hpp"
#include "sps/filters/similarity.hpp"
#include "sps/index/dendrogram.hpp"
#include "sps/index/mds.hpp"
#include "sps/index/ward.hpp"

namespace sps {

inline constexpr size_t pseudonym_bytes = 16;
inline constexpr size_t index_r_bytes = 32;
inline constexpr int default_mds_dim = 8;

using CbfDictionary = std::map<Bytes, CustomizedBloomFilter>;

// Flat encrypted index: per-patient customized filters plus the material a
// searcher needs to verify provenance.
struct EncryptedIndex {
    CbfDictionary dict;
    Bytes pk;     // self-describing verification key
    Bytes r;      // per-index random string, also the second PRF key
    Bytes sigma;  // signature over h0(pk, r)
};

// Deterministic core of index generation: with (key, r) fixed the output is
// bit-identical. Each set bit position of a patient's Bloom filter is pushed
// through two PRF layers and lands in that patient's customized filter.
inline CbfDictionary index_cbfs(const crypto::PrfKey& key, const Bytes& r,
                                const std::map<Bytes, StandardBloomFilter>& dict_bf,
                                const CbfConfig& cfg) {
    CbfDictionary out;
    for (const auto& [pseudonym, bf] : dict_bf) {
        CustomizedBloomFilter cbf(cfg.length);
        for (uint64_t pos : bf.positions()) {
            Bytes pos_bytes;
            append_u64le(pos_bytes, pos);
            Bytes zeta1 = crypto::prf(key, pos_bytes);
            Bytes zeta2 = crypto::prf(r, zeta1);
            cbf.add(cfg.seed, zeta2);
        }
        out.emplace(pseudonym, std::move(cbf));
    }
    return out;
}

inline EncryptedIndex index_gen(const crypto::PrfKey& key,
                                const std::map<Bytes, StandardBloomFilter>& dict_bf,
                                const crypto::SignatureKeyPair& keys, const CbfConfig& cfg,
                                Rng& rng) {
    if (dict_bf.empty()) throw Error(Errc::malformed_input, "no patient filters");
    EncryptedIndex idx;
    idx.r = rng.bytes(index_r_bytes);
    idx.dict = index_cbfs(key, idx.r, dict_bf, cfg);
    idx.pk = crypto::vk_encode(keys);
    idx.sigma = crypto::sign(keys, crypto::h0(idx.pk, idx.r));
    return idx;
}

inline bool index_verify(const Bytes& pk, const Bytes& r, const Bytes& sigma) {
    return crypto::vk_verify(pk, crypto::h0(pk, r), sigma);
}

// Pairwise cosine matrix over the dictionary in key order.
inline Eigen::MatrixXd similarity_matrix(const CbfDictionary& dict) {
    const size_t n = dict.size();
    if (n < 2) throw Error(Errc::malformed_input, "similarity matrix needs at least two entries");
    std::vector<const CustomizedBloomFilter*> filters;
    filters.reserve(n);
    for (const auto& [id, cbf] : dict) filters.push_back(&cbf);
    Eigen::MatrixXd s(n, n);
    for (size_t i = 0; i < n; i++) {
        s(Eigen::Index(i), Eigen::Index(i)) = 1.0;
        for (size_t j = i + 1; j < n; j++) {
            double v = cosine(*filters[i], *filters[j]);
            s(Eigen::Index(i), Eigen::Index(j)) = v;
            s(Eigen::Index(j), Eigen::Index(i)) = v;
        }
    }
    return s;
}

struct HcResult {
    Dendrogram tree;
    CbfDictionary node_dict;
};

// Hierarchical clustering of a filter dictionary: cosine similarities →
// distances → classical MDS coordinates → Ward agglomeration. Internal nodes
// get fresh "h:<counter>" ids and the OR of their children's filters.
inline HcResult hc(const CbfDictionary& dict, int mds_dim = default_mds_dim) {
    if (dict.empty()) throw Error(Errc::malformed_input, "empty dictionary");
    HcResult out;
    out.node_dict = dict;

    const size_t n = dict.size();
    for (const auto& [id, cbf] : dict) {
        DendrogramNode leaf;
        leaf.id = id;
        out.tree.nodes.push_back(std::move(leaf));
    }
    if (n == 1) {
        out.tree.root = 0;
        return out;
    }

    Eigen::MatrixXd s = similarity_matrix(dict);
    Eigen::MatrixXd dist(n, n);
    for (Eigen::Index i = 0; i < Eigen::Index(n); i++)
        for (Eigen::Index j = 0; j < Eigen::Index(n); j++)
            dist(i, j) = i == j ? 0.0 : std::max(0.0, 1.0 - s(i, j));

    int dim = std::min<int>(int(n) - 1, mds_dim);
    Eigen::MatrixXd coords = classical_mds(dist, dim);
    std::vector<WardMerge> merges = ward_cluster(coords);

    for (size_t t = 0; t < merges.size(); t++) {
        DendrogramNode node;
        node.leaf = false;
        node.id = to_bytes("h:" + std::to_string(t));
        node.left = uint32_t(merges[t].a);
        node.right = uint32_t(merges[t].b);
        CustomizedBloomFilter cbf = out.node_dict.at(out.tree.nodes[node.left].id);
        cbf.or_with(out.node_dict.at(out.tree.nodes[node.right].id));
        out.node_dict.emplace(node.id, std::move(cbf));
        out.tree.nodes.push_back(std::move(node));
    }
    out.tree.root = uint32_t(out.tree.nodes.size() - 1);
    return out;
}

// Clustered index: the tree plus a dictionary covering every node.
struct HierarchicalIndex {
    Dendrogram tree;
    CbfDictionary dict;
    Bytes pk;
    Bytes r;
};

inline HierarchicalIndex build_hierarchical(const EncryptedIndex& idx,
                                            int mds_dim = default_mds_dim) {
    HcResult res = hc(idx.dict, mds_dim);
    return HierarchicalIndex{std::move(res.tree), std::move(res.node_dict), idx.pk, idx.r};
}

}  // namespace sps
