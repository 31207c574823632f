#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "sps/client/client.hpp"
#include "sps/csp/result.hpp"
#include "sps/csp/search.hpp"
#include "sps/hospital/hospital.hpp"
#include "sps/index/index_gen.hpp"

namespace sps {

struct OracleParams {
    crypto::PrfKey key;
    Bytes r;
    uint64_t bf_capacity = 0;
    double bf_fp = 0;
    CbfConfig cbf;
};

// The per-patient filters are a pure function of (records, params); preparing
// them once lets many queries run against the same dataset.
struct OracleIndex {
    OracleParams params;
    CbfDictionary dict;
};

inline OracleIndex oracle_prepare(const std::vector<PatientRecord>& records,
                                  const OracleParams& params) {
    Preprocessed pre = preprocess(records, params.bf_capacity, params.bf_fp);
    return OracleIndex{params, index_cbfs(params.key, params.r, pre.dict_bf, params.cbf)};
}

inline std::vector<ResultEntry> oracle_topk(const OracleIndex& index,
                                            const std::vector<SnpPair>& query_snps,
                                            double epsilon_frac, uint32_t k_c) {
    const OracleParams& params = index.params;
    Query q = query_gen(params.key, query_snps, epsilon_frac, k_c, {}, params.bf_capacity,
                        params.bf_fp);
    CustomizedBloomFilter cbf_c = query_layer(params.r, q.e_set, params.cbf);

    ResultDict top(k_c);
    for (const auto& [pseudonym, cbf] : index.dict) {
        if (cbf.bits().popcount() == 0) continue;
        if (dot_count(cbf_c, cbf) < q.epsilon_bits) continue;
        top.insert(pseudonym, cosine(cbf_c, cbf));
    }
    return top.ranked();
}

// Plaintext ground truth: runs the identical deterministic filter pipeline on
// every patient directly, with no tree and no pruning.
inline std::vector<ResultEntry> oracle_topk(const std::vector<PatientRecord>& records,
                                            const std::vector<SnpPair>& query_snps,
                                            double epsilon_frac, uint32_t k_c,
                                            const OracleParams& params) {
    return oracle_topk(oracle_prepare(records, params), query_snps, epsilon_frac, k_c);
}

}  // namespace sps
