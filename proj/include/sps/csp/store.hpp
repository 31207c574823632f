#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "sps/csp/retrieval.hpp"
#include "sps/csp/search.hpp"
#include "sps/index/merge.hpp"

namespace sps {

struct MergePolicy {
    size_t threshold = 50;
    bool fast = true;
    int mds_dim = default_mds_dim;
};

// Everything the cloud holds. Plaintext SNPs, ASI text, and the keys K,
// k_beta, k_c, k_i never appear here by construction.
struct CspStore {
    std::map<std::string, HierarchicalIndex> hier_indices;
    std::map<std::string, Bytes> index_sigmas;
    std::optional<MergedIndex> merged;
    std::map<std::string, std::map<Bytes, std::vector<AsiCiphertext>>> asi_store;
    std::map<std::string, Bytes> snp_store;  // opaque genome ciphertext blobs
    std::map<std::pair<std::string, std::string>, SharedKey> shared_keys;
    std::map<std::string, AbeKeys> abe_master;
};

inline void upload_index(CspStore& store, const std::string& hospital_id, HierarchicalIndex index,
                         Bytes sigma) {
    if (!index_verify(index.pk, index.r, sigma))
        throw Error(Errc::denied, "index signature rejected");
    index.tree.validate();
    store.hier_indices.insert_or_assign(hospital_id, std::move(index));
    store.index_sigmas.insert_or_assign(hospital_id, std::move(sigma));
    store.merged.reset();  // provenance changed; any merged view is stale
}

inline void upload_ciphertexts(CspStore& store, const std::string& hospital_id, Bytes snp_blob,
                               std::map<Bytes, std::vector<AsiCiphertext>> asi, AbeKeys abe) {
    store.snp_store.insert_or_assign(hospital_id, std::move(snp_blob));
    store.asi_store.insert_or_assign(hospital_id, std::move(asi));
    store.abe_master.insert_or_assign(hospital_id, std::move(abe));
}

inline void register_shared_key(CspStore& store, const std::string& hospital_id,
                                const std::string& client_id, SharedKey key) {
    store.shared_keys.insert_or_assign({hospital_id, client_id}, std::move(key));
}

// Rebuild the cross-hospital index from the current uploads. Returns false
// when there are not yet two indices to merge.
inline bool build_merged(CspStore& store, const MergePolicy& policy) {
    if (store.hier_indices.size() < 2) return false;
    std::vector<HierarchicalIndex> indices;
    indices.reserve(store.hier_indices.size());
    for (const auto& [id, idx] : store.hier_indices) indices.push_back(idx);
    store.merged = policy.fast ? index_merge_fast(indices, policy.mds_dim)
                               : index_merge_full(indices, policy.mds_dim);
    return true;
}

struct MatchRow {
    std::string hospital_id;
    Bytes pseudonym;
    double score = 0.0;

    bool operator==(const MatchRow&) const = default;
};

struct QueryResponse {
    std::vector<MatchRow> matches;
    std::vector<Bytes> asi_ciphertexts;
};

// Full query pipeline: index search, early termination on an empty hit set,
// token adjustment per matched hospital, then policy-gated ASI retrieval.
inline QueryResponse handle_query(const CspStore& store, const std::string& client_id,
                                  const Query& query, const TokenSet& tokens,
                                  const SearchConfig& cfg, Rng& rng) {
    if (query.e_set.empty()) throw Error(Errc::malformed_input, "empty e_set");
    if (query.k_c < 1) throw Error(Errc::malformed_input, "k_c must be at least 1");

    std::map<Bytes, std::string> r_to_hospital;
    for (const auto& [hid, idx] : store.hier_indices) r_to_hospital.emplace(idx.r, hid);

    ResultDict dict(query.k_c);
    if (store.merged) {
        std::optional<ResultDict> res = search_merged(*store.merged, query, cfg);
        if (!res) throw Error(Errc::denied, "no valid signature");
        dict = std::move(*res);
    } else {
        bool any_verified = false;
        for (const auto& [hid, idx] : store.hier_indices) {
            std::optional<ResultDict> res = search(idx, query, cfg);
            if (!res) continue;
            any_verified = true;
            for (const ResultEntry& e : res->ranked()) dict.insert(concat(e.key, idx.r), e.score);
        }
        if (!any_verified) throw Error(Errc::denied, "no valid signature");
    }

    QueryResponse resp;
    if (dict.empty()) return resp;

    std::map<std::string, std::vector<Bytes>> hits_by_hospital;
    for (const ResultEntry& e : dict.ranked()) {
        auto [pseudonym, r] = split_leaf_key(e.key);
        auto hit = r_to_hospital.find(r);
        if (hit == r_to_hospital.end())
            throw Error(Errc::malformed_input, "result r not among stored indices");
        resp.matches.push_back(MatchRow{hit->second, pseudonym, e.score});
        hits_by_hospital[hit->second].push_back(pseudonym);
    }

    for (const auto& [hid, pseudonyms] : hits_by_hospital) {
        auto key_it = store.shared_keys.find({hid, client_id});
        if (key_it == store.shared_keys.end())
            throw Error(Errc::denied, "no shared key registered");
        std::vector<GtElement> adjusted = token_adjust(tokens, key_it->second, cfg.cbf);
        auto asi_it = store.asi_store.find(hid);
        auto mk_it = store.abe_master.find(hid);
        if (asi_it == store.asi_store.end() || mk_it == store.abe_master.end()) continue;
        for (Bytes& c1 : asi_search(adjusted, pseudonyms, asi_it->second, mk_it->second.mk, rng))
            resp.asi_ciphertexts.push_back(std::move(c1));
    }
    return resp;
}

}  // namespace sps
