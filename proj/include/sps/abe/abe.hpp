#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "sps/common.hpp"
#include "sps/crypto/group.hpp"
#include "sps/crypto/hash.hpp"

namespace sps {

using crypto::G1Element;
using crypto::G2Element;
using crypto::GtElement;
using crypto::Scalar;
using crypto::g1_bytes;
using crypto::g2_bytes;
using crypto::gt_bytes;
using crypto::gt_generator;
using crypto::gt_random;
using crypto::hash_to_g1;
using crypto::pair;
namespace tag = crypto::tag;

// Ciphertext-policy attribute-based encryption for conjunctive policies.
// Messages live in GT. A ciphertext carries an AND policy over byte-string
// attributes; a secret key carries an attribute set and decrypts exactly
// when it covers the policy. Keys are issued with an independent blinding
// exponent, so shares from different keys do not combine.

struct AndPolicy {
    std::vector<Bytes> attrs;

    static AndPolicy over(std::vector<Bytes> a) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
        return AndPolicy{std::move(a)};
    }

    bool operator==(const AndPolicy& o) const { return attrs == o.attrs; }
};

inline std::vector<Bytes> normalize_attrs(std::vector<Bytes> a) {
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
}

inline G1Element abe_attr_point(const Bytes& attr) {
    return G1Element(hash_to_g1(tag::abe_attr, attr));
}

struct AbePublicKey {
    GtElement alpha_t;  // e(g1, g2)^alpha
    G1Element beta_1;   // g1^beta

    Bytes serialize() const {
        Bytes out{0x01};
        append(out, alpha_t.serialize());
        append(out, beta_1.serialize());
        return out;
    }
    static AbePublicKey deserialize(const Bytes& b) {
        ByteReader r(b);
        if (r.u8() != 0x01) throw Error(Errc::malformed_input, "abe pk version");
        AbePublicKey pk;
        pk.alpha_t = GtElement::deserialize(r.take(gt_bytes));
        pk.beta_1 = G1Element::deserialize(r.take(g1_bytes));
        if (!r.done()) throw Error(Errc::malformed_input, "abe pk trailing bytes");
        return pk;
    }
};

struct AbeMasterKey {
    Scalar alpha;
    Scalar beta;

    Bytes serialize() const {
        Bytes out{0x01};
        append(out, alpha.to_bytes());
        append(out, beta.to_bytes());
        return out;
    }
    static AbeMasterKey deserialize(const Bytes& b) {
        ByteReader r(b);
        if (r.u8() != 0x01) throw Error(Errc::malformed_input, "abe mk version");
        AbeMasterKey mk;
        mk.alpha = Scalar::from_bytes(r.take(32));
        mk.beta = Scalar::from_bytes(r.take(32));
        if (!r.done()) throw Error(Errc::malformed_input, "abe mk trailing bytes");
        return mk;
    }
};

struct AbeKeys {
    AbePublicKey pk;
    AbeMasterKey mk;
};

struct AbeKeyShare {
    G1Element d1;  // g1^rho * H(attr)^{r_j}
    G2Element d2;  // g2^{r_j}
};

struct AbeSecretKey {
    std::vector<Bytes> attrs;          // sorted, unique
    G2Element d;                       // g2^{(alpha+rho)/beta}
    std::vector<AbeKeyShare> shares;   // aligned with attrs

    bool covers(const AndPolicy& policy) const {
        for (const Bytes& a : policy.attrs)
            if (!std::binary_search(attrs.begin(), attrs.end(), a)) return false;
        return true;
    }

    Bytes serialize() const {
        Bytes out{0x01};
        append_u32le(out, static_cast<uint32_t>(attrs.size()));
        append(out, d.serialize());
        for (size_t i = 0; i < attrs.size(); i++) {
            append_field(out, attrs[i]);
            append(out, shares[i].d1.serialize());
            append(out, shares[i].d2.serialize());
        }
        return out;
    }
    static AbeSecretKey deserialize(const Bytes& b) {
        ByteReader r(b);
        if (r.u8() != 0x01) throw Error(Errc::malformed_input, "abe sk version");
        uint32_t n = r.u32le();
        AbeSecretKey sk;
        sk.d = G2Element::deserialize(r.take(g2_bytes));
        sk.attrs.reserve(n);
        sk.shares.reserve(n);
        for (uint32_t i = 0; i < n; i++) {
            Bytes a = r.field();
            if (!sk.attrs.empty() && a <= sk.attrs.back())
                throw Error(Errc::malformed_input, "abe sk attrs out of order");
            sk.attrs.push_back(std::move(a));
            AbeKeyShare sh;
            sh.d1 = G1Element::deserialize(r.take(g1_bytes));
            sh.d2 = G2Element::deserialize(r.take(g2_bytes));
            sk.shares.push_back(std::move(sh));
        }
        if (!r.done()) throw Error(Errc::malformed_input, "abe sk trailing bytes");
        return sk;
    }
};

struct AbeCtShare {
    G2Element c1;  // g2^{s_y}
    G1Element c2;  // H(attr)^{s_y}
};

struct AbeCiphertext {
    AndPolicy policy;
    GtElement c0;                    // m * e(g1, g2)^{alpha s}
    G1Element c;                     // g1^{beta s}
    std::vector<AbeCtShare> shares;  // aligned with policy.attrs

    Bytes serialize() const {
        Bytes out{0x01};
        append_u32le(out, static_cast<uint32_t>(policy.attrs.size()));
        append(out, c0.serialize());
        append(out, c.serialize());
        for (size_t i = 0; i < policy.attrs.size(); i++) {
            append_field(out, policy.attrs[i]);
            append(out, shares[i].c1.serialize());
            append(out, shares[i].c2.serialize());
        }
        return out;
    }
    static AbeCiphertext deserialize(const Bytes& b) {
        ByteReader r(b);
        if (r.u8() != 0x01) throw Error(Errc::malformed_input, "abe ct version");
        uint32_t n = r.u32le();
        AbeCiphertext ct;
        ct.c0 = GtElement::deserialize(r.take(gt_bytes));
        ct.c = G1Element::deserialize(r.take(g1_bytes));
        ct.policy.attrs.reserve(n);
        ct.shares.reserve(n);
        for (uint32_t i = 0; i < n; i++) {
            Bytes a = r.field();
            if (!ct.policy.attrs.empty() && a <= ct.policy.attrs.back())
                throw Error(Errc::malformed_input, "abe ct attrs out of order");
            ct.policy.attrs.push_back(std::move(a));
            AbeCtShare sh;
            sh.c1 = G2Element::deserialize(r.take(g2_bytes));
            sh.c2 = G1Element::deserialize(r.take(g1_bytes));
            ct.shares.push_back(std::move(sh));
        }
        if (!r.done()) throw Error(Errc::malformed_input, "abe ct trailing bytes");
        return ct;
    }
};

inline AbeKeys abe_setup(Rng& rng) {
    AbeKeys keys;
    keys.mk.alpha = Scalar::random(rng);
    keys.mk.beta = Scalar::random(rng);
    keys.pk.alpha_t = gt_generator().pow(keys.mk.alpha);
    keys.pk.beta_1 = G1Element::generator().mul(keys.mk.beta);
    return keys;
}

inline AbeSecretKey abe_keygen(const AbeMasterKey& mk, std::vector<Bytes> attrs, Rng& rng) {
    AbeSecretKey sk;
    sk.attrs = normalize_attrs(std::move(attrs));
    Scalar rho = Scalar::random(rng);
    sk.d = G2Element::generator().mul((mk.alpha + rho) * mk.beta.inverse());
    G1Element g1_rho = G1Element::generator().mul(rho);
    sk.shares.reserve(sk.attrs.size());
    for (const Bytes& a : sk.attrs) {
        Scalar rj = Scalar::random(rng);
        AbeKeyShare sh;
        sh.d1 = g1_rho.add(abe_attr_point(a).mul(rj));
        sh.d2 = G2Element::generator().mul(rj);
        sk.shares.push_back(std::move(sh));
    }
    return sk;
}

inline AbeCiphertext abe_encrypt(const AbePublicKey& pk, const GtElement& m,
                                 const AndPolicy& policy, Rng& rng) {
    size_t n = policy.attrs.size();
    if (n == 0) throw Error(Errc::malformed_input, "empty policy");
    Scalar s = Scalar::random(rng);
    std::vector<Scalar> shares_s;
    shares_s.reserve(n);
    Scalar acc = Scalar::from_u64(0);
    for (size_t i = 0; i + 1 < n; i++) {
        Scalar si = Scalar::random(rng);
        acc = acc + si;
        shares_s.push_back(si);
    }
    shares_s.push_back(s - acc);

    AbeCiphertext ct;
    ct.policy = policy;
    ct.c0 = m.mul(pk.alpha_t.pow(s));
    ct.c = pk.beta_1.mul(s);
    ct.shares.reserve(n);
    for (size_t i = 0; i < n; i++) {
        AbeCtShare sh;
        sh.c1 = G2Element::generator().mul(shares_s[i]);
        sh.c2 = abe_attr_point(policy.attrs[i]).mul(shares_s[i]);
        ct.shares.push_back(std::move(sh));
    }
    return ct;
}

// Throws Errc::policy_miss before any pairing work when the key does not
// cover the ciphertext policy.
inline GtElement abe_decrypt(const AbeSecretKey& sk, const AbeCiphertext& ct) {
    if (ct.policy.attrs.size() != ct.shares.size())
        throw Error(Errc::malformed_input, "abe ct shape");
    if (!sk.covers(ct.policy)) throw Error(Errc::policy_miss, "key does not satisfy policy");

    GtElement masked = GtElement::one();  // accumulates e(g1, g2)^{rho s}
    for (size_t i = 0; i < ct.policy.attrs.size(); i++) {
        auto it = std::lower_bound(sk.attrs.begin(), sk.attrs.end(), ct.policy.attrs[i]);
        const AbeKeyShare& ks = sk.shares[static_cast<size_t>(it - sk.attrs.begin())];
        masked = masked.mul(pair(ks.d1, ct.shares[i].c1))
                     .mul(pair(ct.shares[i].c2, ks.d2).inverse());
    }
    GtElement alpha_s = pair(ct.c, sk.d).mul(masked.inverse());
    return ct.c0.mul(alpha_s.inverse());
}

}  // namespace sps
