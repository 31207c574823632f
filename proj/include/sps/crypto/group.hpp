#pragma once

#include "sps/crypto/pairing.hpp"

namespace sps::crypto {

inline const mpz_class& group_order() { return curvectx().order; }

// Scalar modulo the group order. Zero is representable (it arises from share
// arithmetic) but has no inverse; random() never returns it.
class Scalar {
public:
    Scalar() = default;
    explicit Scalar(const mpz_class& v) : v_(mod(v)) {}

    static Scalar random(Rng& rng) {
        while (true) {
            Bytes b = rng.bytes(64);
            mpz_class v;
            mpz_import(v.get_mpz_t(), b.size(), 1, 1, 0, 0, b.data());
            Scalar s(v);
            if (!s.is_zero()) return s;
        }
    }

    static Scalar from_u64(uint64_t x) { return Scalar(detail::limbs_to_mpz(&x, 1)); }

    static Scalar from_bytes(const Bytes& b) {
        if (b.size() != 32) throw Error(Errc::malformed_input, "scalar must be 32 bytes");
        mpz_class v;
        mpz_import(v.get_mpz_t(), b.size(), 1, 1, 0, 0, b.data());
        if (v >= group_order()) throw Error(Errc::malformed_input, "scalar out of range");
        return Scalar(v);
    }

    Bytes to_bytes() const {
        Bytes out(32, 0);
        Bytes tmp(32);
        size_t count = 0;
        mpz_export(tmp.data(), &count, 1, 1, 0, 0, v_.get_mpz_t());
        std::copy(tmp.begin(), tmp.begin() + count, out.begin() + (32 - count));
        return out;
    }

    bool is_zero() const { return v_ == 0; }
    bool operator==(const Scalar& o) const { return v_ == o.v_; }

    Scalar operator+(const Scalar& o) const { return Scalar(v_ + o.v_); }
    Scalar operator-(const Scalar& o) const { return Scalar(v_ - o.v_); }
    Scalar operator*(const Scalar& o) const { return Scalar(v_ * o.v_); }
    Scalar operator-() const { return Scalar(-v_); }

    Scalar inverse() const {
        if (is_zero()) throw Error(Errc::not_invertible, "scalar zero has no inverse");
        mpz_class inv;
        mpz_invert(inv.get_mpz_t(), v_.get_mpz_t(), group_order().get_mpz_t());
        return Scalar(inv);
    }

    const mpz_class& value() const { return v_; }

private:
    static mpz_class mod(const mpz_class& v) {
        mpz_class m = v % group_order();
        if (m < 0) m += group_order();
        return m;
    }
    mpz_class v_;
};

inline Scalar scalar_inv(const Scalar& s) { return s.inverse(); }

class G1Element {
public:
    G1Element() : pt_(G1Point::infinity()) {}
    explicit G1Element(const G1Point& pt) : pt_(pt) {}

    static G1Element generator() { return G1Element(curvectx().g1); }

    G1Element mul(const Scalar& k) const { return G1Element(pt_.mul(k.value())); }
    G1Element add(const G1Element& o) const { return G1Element(pt_.add(o.pt_)); }
    bool is_infinity() const { return pt_.is_infinity(); }
    bool operator==(const G1Element& o) const { return pt_.equals(o.pt_); }

    Bytes serialize() const { return g1_serialize(pt_); }
    static G1Element deserialize(const Bytes& b) { return G1Element(g1_deserialize(b)); }

    const G1Point& point() const { return pt_; }

private:
    G1Point pt_;
};

class G2Element {
public:
    G2Element() : pt_(G2Point::infinity()) {}
    explicit G2Element(const G2Point& pt) : pt_(pt) {}

    static G2Element generator() { return G2Element(curvectx().g2); }

    G2Element mul(const Scalar& k) const { return G2Element(pt_.mul(k.value())); }
    G2Element add(const G2Element& o) const { return G2Element(pt_.add(o.pt_)); }
    bool is_infinity() const { return pt_.is_infinity(); }
    bool operator==(const G2Element& o) const { return pt_.equals(o.pt_); }

    Bytes serialize() const { return g2_serialize(pt_); }
    static G2Element deserialize(const Bytes& b) { return G2Element(g2_deserialize(b)); }

    const G2Point& point() const { return pt_; }

private:
    G2Point pt_;
};

class GtElement {
public:
    GtElement() : v_(Fp12::one()) {}
    explicit GtElement(const Fp12& v) : v_(v) {}

    static GtElement one() { return GtElement(); }

    GtElement pow(const Scalar& k) const { return GtElement(v_.pow(k.value())); }
    GtElement mul(const GtElement& o) const { return GtElement(v_ * o.v_); }
    GtElement inverse() const { return GtElement(v_.inverse()); }
    bool is_one() const { return v_.is_one(); }
    bool operator==(const GtElement& o) const { return v_ == o.v_; }

    Bytes serialize() const { return gt_serialize(v_); }
    static GtElement deserialize(const Bytes& b) { return GtElement(gt_deserialize(b)); }

    const Fp12& value() const { return v_; }

private:
    Fp12 v_;
};

inline GtElement pair(const G1Element& p, const G2Element& q) {
    return GtElement(pairing(p.point(), q.point()));
}

inline const GtElement& gt_generator() {
    static const GtElement g = pair(G1Element::generator(), G2Element::generator());
    return g;
}

// Uniform element of the pairing target group.
inline GtElement gt_random(Rng& rng) { return gt_generator().pow(Scalar::random(rng)); }

// h1: deterministic hash into the base group; never the identity.
inline G1Element h1(const Bytes& msg) { return G1Element(hash_to_g1(tag::h1, msg)); }

struct GroupParams {
    const char* curve = "bn254";
    G1Element g1 = G1Element::generator();
    G2Element g2 = G2Element::generator();
    mpz_class order = group_order();
};

inline const GroupParams& group_params() {
    static const GroupParams p;
    return p;
}

}  // namespace sps::crypto
