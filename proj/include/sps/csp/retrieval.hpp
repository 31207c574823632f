#pragma once

#include <map>
#include <vector>

#include "sps/abe/abe.hpp"
#include "sps/client/client.hpp"
#include "sps/hospital/hospital.hpp"

namespace sps {

// Convert client tokens h1(v)^{1/k_c} into hospital-bound values
// e(h1(v), g2)^{1/k_i}. Tokens outside the shared key's scope filter are
// skipped, so the output may be smaller than the input.
inline std::vector<GtElement> token_adjust(const TokenSet& tokens, const SharedKey& shared,
                                           const CbfConfig& cfg) {
    std::vector<GtElement> out;
    for (const G1Element& tk : tokens.tokens) {
        if (!shared.cbf.contains(cfg.seed, tk.serialize())) continue;
        out.push_back(pair(tk, shared.delta));
    }
    return out;
}

// Try every stored ciphertext of every hit pseudonym: derive the candidate
// attribute set from the adjusted tokens under the ciphertext's tau, mint a
// key for it, and release the inner layer only when the AND policy is
// covered. Policy misses are expected and silent.
inline std::vector<Bytes> asi_search(const std::vector<GtElement>& tk_star,
                                     const std::vector<Bytes>& pseudonyms,
                                     const std::map<Bytes, std::vector<AsiCiphertext>>& asi_store,
                                     const AbeMasterKey& mk, Rng& rng) {
    if (tk_star.empty()) return {};
    std::vector<Bytes> tk_ser;
    tk_ser.reserve(tk_star.size());
    for (const GtElement& t : tk_star) tk_ser.push_back(t.serialize());

    std::vector<Bytes> out;
    for (const Bytes& pseudonym : pseudonyms) {
        auto it = asi_store.find(pseudonym);
        if (it == asi_store.end()) continue;
        for (const AsiCiphertext& ct : it->second) {
            std::vector<Bytes> theta;
            theta.reserve(tk_ser.size());
            for (const Bytes& ts : tk_ser) theta.push_back(crypto::h2(ct.tau, ts));
            AbeSecretKey sk = abe_keygen(mk, std::move(theta), rng);
            if (!sk.covers(ct.c3.policy)) continue;
            GtElement k_gamma = abe_decrypt(sk, ct.c3);
            out.push_back(crypto::sym_decrypt(crypto::kdf_gt(k_gamma.serialize()), ct.c2));
        }
    }
    return out;
}

}  // namespace sps
