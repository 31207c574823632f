#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "sps/common.hpp"
#include "sps/crypto/group.hpp"
#include "sps/crypto/hash.hpp"
#include "sps/crypto/sym.hpp"
#include "sps/filters/bloom.hpp"
#include "sps/hospital/dataset.hpp"

namespace sps {

using crypto::G1Element;
using crypto::h1;
using crypto::PrfKey;
using crypto::Scalar;

struct Query {
    std::vector<Bytes> e_set;  // PRF images of the set bit positions, increasing position order
    uint64_t epsilon_bits = 0;
    uint32_t k_c = 1;  // max results
    std::vector<Bytes> sigmas;
};

inline Query query_gen(const PrfKey& k, const std::vector<SnpPair>& snps, double epsilon_frac,
                       uint32_t k_c, std::vector<Bytes> sigmas, uint64_t bf_capacity,
                       double bf_fp) {
    if (snps.empty()) throw Error(Errc::malformed_input, "empty snp set");
    if (!(epsilon_frac > 0.0) || epsilon_frac > 1.0)
        throw Error(Errc::malformed_input, "epsilon_frac out of (0,1]");
    if (k_c < 1) throw Error(Errc::malformed_input, "k_c must be at least 1");

    std::set<Bytes> items;
    for (const SnpPair& s : snps) items.insert(snp_item(s));

    StandardBloomFilter bf(bf_capacity, bf_fp);
    for (const Bytes& item : items) bf.add(item);

    Query q;
    for (uint64_t pos : bf.positions()) {
        Bytes msg;
        append_u64le(msg, pos);
        q.e_set.push_back(crypto::prf(k, msg));
    }

    uint64_t count = q.e_set.size();
    double n = double(items.size());
    // Nudge below the product before ceil: ties like 0.9 * 10 land a hair
    // above the integer in binary and would otherwise round up a full SNP.
    auto eps_snps = uint64_t(std::ceil(epsilon_frac * n - 1e-9));
    q.epsilon_bits = uint64_t(std::floor(double(count) / n * double(eps_snps) + 0.5));
    q.k_c = k_c;
    q.sigmas = std::move(sigmas);
    return q;
}

struct TokenSet {
    std::vector<G1Element> tokens;  // sorted by serialization, unique
};

inline TokenSet token_gen(const Scalar& k_c, const std::vector<SnpPair>& snps) {
    Scalar inv = k_c.inverse();
    std::set<Bytes> items;
    for (const SnpPair& s : snps) items.insert(snp_item(s));

    std::vector<std::pair<Bytes, G1Element>> keyed;
    keyed.reserve(items.size());
    for (const Bytes& item : items) {
        G1Element tk = h1(item).mul(inv);
        keyed.emplace_back(tk.serialize(), std::move(tk));
    }
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });

    TokenSet ts;
    for (auto& [ser, tk] : keyed) {
        if (!ts.tokens.empty() && ts.tokens.back().serialize() == ser) continue;
        ts.tokens.push_back(std::move(tk));
    }
    return ts;
}

struct AsiPlaintexts {
    std::set<Bytes> texts;
    size_t failures = 0;
};

inline AsiPlaintexts asi_decrypt(const Bytes& k_beta, const std::vector<Bytes>& ciphers) {
    AsiPlaintexts out;
    for (const Bytes& c : ciphers) {
        try {
            out.texts.insert(crypto::sym_decrypt(k_beta, c));
        } catch (const Error&) {
            out.failures++;
        }
    }
    return out;
}

}  // namespace sps
