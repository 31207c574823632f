#pragma once

#include <deque>
#include <map>
#include <optional>
#include <set>
#include <vector>

#include "sps/client/client.hpp"
#include "sps/csp/result.hpp"
#include "sps/filters/similarity.hpp"
#include "sps/index/index_gen.hpp"
#include "sps/index/merge.hpp"

namespace sps {

// threshold_bits prunes on shared set bits (monotone up the OR-tree, so no
// eligible leaf is ever skipped); strict_cosine instead compares cosine to
// epsilon_bits/|E| at every node, trading soundness for a score-space gate.
enum class SearchMode : uint8_t { threshold_bits = 1, strict_cosine = 2 };

struct SearchConfig {
    CbfConfig cbf;
    SearchMode mode = SearchMode::threshold_bits;
};

// One hospital's view of the query: every PRF image in E pushed through that
// index's r layer.
inline CustomizedBloomFilter query_layer(const Bytes& r, const std::vector<Bytes>& e_set,
                                         const CbfConfig& cfg) {
    CustomizedBloomFilter out(cfg.length);
    for (const Bytes& zeta1 : e_set) out.add(cfg.seed, crypto::prf(r, zeta1));
    return out;
}

inline bool node_eligible(const CustomizedBloomFilter& query, const CustomizedBloomFilter& node,
                          uint64_t epsilon_bits, size_t e_size, SearchMode mode) {
    if (node.bits().popcount() == 0) return false;
    if (mode == SearchMode::threshold_bits) return dot_count(query, node) >= epsilon_bits;
    if (query.bits().popcount() == 0) return false;
    double threshold = e_size ? double(epsilon_bits) / double(e_size) : 0.0;
    return cosine(query, node) >= threshold;
}

inline void insert_conditionally(ResultDict& dict, const Bytes& composite_key,
                                 const std::set<Bytes>& authorized_r, double sim) {
    auto [pseudonym, r_star] = split_leaf_key(composite_key);
    (void)pseudonym;
    if (authorized_r.count(r_star)) dict.insert(composite_key, sim);
}

inline std::optional<ResultDict> search(const HierarchicalIndex& index, const Query& query,
                                        const SearchConfig& cfg) {
    bool verified = false;
    Bytes statement = crypto::h0(index.pk, index.r);
    for (const Bytes& sigma : query.sigmas)
        if (crypto::vk_verify(index.pk, statement, sigma)) {
            verified = true;
            break;
        }
    if (!verified) return std::nullopt;

    index.tree.validate();
    CustomizedBloomFilter cbf_c = query_layer(index.r, query.e_set, cfg.cbf);

    ResultDict dict(query.k_c);
    std::deque<uint32_t> frontier{index.tree.root};
    while (!frontier.empty()) {
        const DendrogramNode& node = index.tree.nodes.at(frontier.front());
        frontier.pop_front();
        const CustomizedBloomFilter& node_cbf = index.dict.at(node.id);
        if (!node_eligible(cbf_c, node_cbf, query.epsilon_bits, query.e_set.size(), cfg.mode))
            continue;
        if (node.leaf) {
            dict.insert(node.id, cosine(cbf_c, node_cbf));
        } else {
            frontier.push_back(node.left);
            frontier.push_back(node.right);
        }
    }
    return dict;
}

// Cross-hospital search. Traversal prunes against the union of all verified
// layers; each leaf is scored against its own hospital's layer, so results
// match what that hospital's index would have returned on its own.
inline std::optional<ResultDict> search_merged(const MergedIndex& merged, const Query& query,
                                               const SearchConfig& cfg) {
    // One verification pass over the whole signature set: a signature binds
    // h0(pk, r), so once it matches an entry it cannot match any other and is
    // dropped from later scans.
    std::map<Bytes, CustomizedBloomFilter> layers;
    std::vector<bool> used(query.sigmas.size(), false);
    for (const UpsilonEntry& entry : merged.upsilon) {
        if (layers.count(entry.r)) continue;
        Bytes statement = crypto::h0(entry.pk, entry.r);
        for (size_t i = 0; i < query.sigmas.size(); i++) {
            if (used[i]) continue;
            if (crypto::vk_verify(entry.pk, statement, query.sigmas[i])) {
                used[i] = true;
                layers.emplace(entry.r, query_layer(entry.r, query.e_set, cfg.cbf));
                break;
            }
        }
    }
    if (layers.empty()) return std::nullopt;

    merged.tree.validate();
    std::set<Bytes> authorized;
    CustomizedBloomFilter folded(cfg.cbf.length);
    for (const auto& [r, layer] : layers) {
        authorized.insert(r);
        folded.or_with(layer);
    }

    ResultDict dict(query.k_c);
    std::deque<uint32_t> frontier{merged.tree.root};
    while (!frontier.empty()) {
        const DendrogramNode& node = merged.tree.nodes.at(frontier.front());
        frontier.pop_front();
        const CustomizedBloomFilter& node_cbf = merged.dict.at(node.id);
        if (!node.leaf) {
            if (node_eligible(folded, node_cbf, query.epsilon_bits, query.e_set.size(), cfg.mode)) {
                frontier.push_back(node.left);
                frontier.push_back(node.right);
            }
            continue;
        }
        auto [pseudonym, r_star] = split_leaf_key(node.id);
        (void)pseudonym;
        auto it = layers.find(r_star);
        if (it == layers.end()) continue;
        if (!node_eligible(it->second, node_cbf, query.epsilon_bits, query.e_set.size(), cfg.mode))
            continue;
        insert_conditionally(dict, node.id, authorized, cosine(it->second, node_cbf));
    }
    return dict;
}

}  // namespace sps
