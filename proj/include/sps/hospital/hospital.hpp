#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "sps/abe/abe.hpp"
#include "sps/common.hpp"
#include "sps/crypto/group.hpp"
#include "sps/crypto/hash.hpp"
#include "sps/crypto/sig.hpp"
#include "sps/crypto/sym.hpp"
#include "sps/filters/bloom.hpp"
#include "sps/filters/cbf.hpp"
#include "sps/hospital/dataset.hpp"
#include "sps/index/index_gen.hpp"

namespace sps {

using crypto::h1;
using crypto::PrfKey;
using crypto::SignatureKeyPair;
using crypto::SigScheme;

inline constexpr size_t sym_key_bytes = 32;
inline constexpr size_t tau_bytes = 32;

struct HospitalKeyBundle {
    std::string id;
    Bytes k_alpha;  // genome encryption, never leaves the hospital
    Bytes k_beta;   // ASI inner layer, released to approved clients
    Scalar k_i;     // shared-key exponent, never leaves the hospital
    SignatureKeyPair sig_keys;
    AbeKeys abe_keys;
};

inline HospitalKeyBundle hospital_setup(const std::string& id, Rng& rng,
                                        SigScheme scheme = SigScheme::ed25519) {
    HospitalKeyBundle b;
    b.id = id;
    b.k_alpha = rng.bytes(sym_key_bytes);
    b.k_beta = rng.bytes(sym_key_bytes);
    b.k_i = Scalar::random(rng);
    b.sig_keys = crypto::sig_keygen(scheme);
    b.abe_keys = abe_setup(rng);
    return b;
}

struct Preprocessed {
    std::map<Bytes, StandardBloomFilter> dict_bf;
    std::map<Bytes, std::vector<AsiGroup>> dict_asi;
};

inline Preprocessed preprocess(const std::vector<PatientRecord>& records, uint64_t bf_capacity,
                               double bf_fp) {
    Preprocessed out;
    for (const PatientRecord& rec : records) {
        validate_record(rec);
        StandardBloomFilter bf(bf_capacity, bf_fp);
        for (const SnpPair& s : rec.snps) bf.add(snp_item(s));
        if (!out.dict_bf.emplace(rec.pseudonym, std::move(bf)).second)
            throw Error(Errc::malformed_input, "duplicate pseudonym");
        out.dict_asi.emplace(rec.pseudonym, rec.asi_groups);
    }
    return out;
}

inline Bytes serialize_snps(const std::vector<SnpPair>& snps) {
    Bytes out;
    append_u32le(out, uint32_t(snps.size()));
    for (const SnpPair& s : snps) {
        append_field(out, to_bytes(s.rsid));
        out.push_back(s.value);
    }
    return out;
}

inline std::vector<SnpPair> parse_snps(const Bytes& b) {
    ByteReader r(b);
    uint32_t n = r.u32le();
    std::vector<SnpPair> out;
    out.reserve(n);
    for (uint32_t i = 0; i < n; i++) {
        std::string rsid = to_string(r.field());
        uint8_t v = r.u8();
        if (v > 2) throw Error(Errc::malformed_input, "snp value out of range");
        out.push_back(SnpPair{std::move(rsid), v});
    }
    if (!r.done()) throw Error(Errc::malformed_input, "snp list trailing bytes");
    return out;
}

// Per-patient authenticated encryption of the raw genotype list.
inline std::map<Bytes, Bytes> snp_encrypt(const Bytes& k_alpha,
                                          const std::vector<PatientRecord>& records, Rng& rng) {
    std::map<Bytes, Bytes> out;
    for (const PatientRecord& rec : records) {
        if (!out.emplace(rec.pseudonym, crypto::sym_encrypt(k_alpha, serialize_snps(rec.snps), rng))
                 .second)
            throw Error(Errc::malformed_input, "duplicate pseudonym");
    }
    return out;
}

inline std::vector<SnpPair> snp_decrypt(const Bytes& k_alpha, const Bytes& cipher) {
    return parse_snps(crypto::sym_decrypt(k_alpha, cipher));
}

struct AsiCiphertext {
    AbeCiphertext c3;  // policy-gated key wrap
    Bytes c2;          // outer symmetric layer
    Bytes tau;         // per-ASI nonce binding the policy attributes
};

using AsiDict = std::map<Bytes, std::vector<AsiCiphertext>>;

// e(h1(v), g2)^{1/k_i}, evaluated on the G1 side where inversion is cheap.
inline GtElement snp_attr_base(const SnpPair& v, const Scalar& k_i) {
    return pair(h1(snp_item(v)).mul(k_i.inverse()), G2Element::generator());
}

inline Bytes snp_attr(const Bytes& tau, const GtElement& base) {
    return crypto::h2(tau, base.serialize());
}

// Layered ASI encryption: the text under k_beta, that ciphertext under a
// fresh GT key, the GT key under an AND policy over per-SNP attributes. Only
// a searcher who can re-derive every attribute opens the chain.
inline AsiDict asi_encrypt(const Scalar& k_i, const Bytes& k_beta, const AbePublicKey& abe_pk,
                           const std::map<Bytes, std::vector<AsiGroup>>& dict_asi, Rng& rng) {
    AsiDict out;
    std::map<Bytes, GtElement> base_cache;
    for (const auto& [pseudonym, groups] : dict_asi) {
        std::vector<AsiCiphertext> cts;
        for (const AsiGroup& g : groups) {
            if (g.snps.empty()) throw Error(Errc::malformed_input, "asi with empty snp set");
            AsiCiphertext ct;
            ct.tau = rng.bytes(tau_bytes);
            std::vector<Bytes> theta;
            for (const SnpPair& v : g.snps) {
                Bytes item = snp_item(v);
                auto it = base_cache.find(item);
                if (it == base_cache.end())
                    it = base_cache.emplace(item, snp_attr_base(v, k_i)).first;
                theta.push_back(snp_attr(ct.tau, it->second));
            }
            Bytes c1 = crypto::sym_encrypt(k_beta, g.text, rng);
            GtElement k_gamma = gt_random(rng);
            ct.c2 = crypto::sym_encrypt(crypto::kdf_gt(k_gamma.serialize()), c1, rng);
            ct.c3 = abe_encrypt(abe_pk, k_gamma, AndPolicy::over(std::move(theta)), rng);
            cts.push_back(std::move(ct));
        }
        out.emplace(pseudonym, std::move(cts));
    }
    return out;
}

struct SharedKey {
    G2Element delta;  // g2^{k_c/k_i}
    CustomizedBloomFilter cbf;
};

// Token adjustment key: delta moves a client token from exponent 1/k_c to
// 1/k_i under the pairing; the filter scopes which tokens may be adjusted.
inline SharedKey shared_key_gen(const Scalar& k_i, const Scalar& k_c,
                                const std::vector<SnpPair>& authorized, const CbfConfig& cfg) {
    if (authorized.empty()) throw Error(Errc::malformed_input, "empty authorized snp set");
    SharedKey sk;
    sk.delta = G2Element::generator().mul(k_c * k_i.inverse());
    sk.cbf = CustomizedBloomFilter(cfg.length);
    Scalar inv_c = k_c.inverse();
    for (const SnpPair& v : authorized) sk.cbf.add(cfg.seed, h1(snp_item(v)).mul(inv_c).serialize());
    return sk;
}

struct AuthorizationRequest {
    std::string client_id;
    Scalar k_c;
    std::vector<SnpPair> snp_scope;
};

// Material an approved client receives: the global PRF key, the ASI inner
// key, and the hospital's index signature.
struct AuthorizationGrant {
    PrfKey k;
    Bytes k_beta;
    Bytes sigma;
};

struct AuthorizationOutcome {
    bool approved = false;
    SharedKey shared;
    AuthorizationGrant grant;
};

using ApprovalPredicate = std::function<bool(const std::string&)>;

inline AuthorizationOutcome authorize_client(const HospitalKeyBundle& bundle,
                                             const PrfKey& global_k, const Bytes& index_sigma,
                                             const AuthorizationRequest& req,
                                             const ApprovalPredicate& approve,
                                             const CbfConfig& cfg) {
    AuthorizationOutcome out;
    if (!approve || !approve(req.client_id)) return out;
    out.approved = true;
    out.shared = shared_key_gen(bundle.k_i, req.k_c, req.snp_scope, cfg);
    out.grant = AuthorizationGrant{global_k, bundle.k_beta, index_sigma};
    return out;
}

}  // namespace sps
