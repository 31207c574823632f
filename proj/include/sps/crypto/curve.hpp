#pragma once

#include "sps/crypto/fp_tower.hpp"
#include "sps/crypto/hash.hpp"

namespace sps::crypto {

// Jacobian coordinates on y^2 = x^3 + b with a = 0; Z = 0 marks infinity.
template <class F>
struct CurvePoint {
    F X, Y, Z;

    static CurvePoint infinity() { return {F::zero(), F::one(), F::zero()}; }

    static CurvePoint from_affine(const F& x, const F& y) { return {x, y, F::one()}; }

    bool is_infinity() const { return Z.is_zero(); }

    CurvePoint negate() const { return {X, -Y, Z}; }

    CurvePoint dbl() const {
        if (is_infinity()) return *this;
        F A = X.square();
        F B = Y.square();
        F C = B.square();
        F D = ((X + B).square() - A - C).dbl();
        F E = A.mul_small(3);
        F Fv = E.square();
        F X3 = Fv - D.dbl();
        F Y3 = E * (D - X3) - C.mul_small(8);
        F Z3 = (Y * Z).dbl();
        return {X3, Y3, Z3};
    }

    CurvePoint add(const CurvePoint& o) const {
        if (is_infinity()) return o;
        if (o.is_infinity()) return *this;
        F Z1Z1 = Z.square();
        F Z2Z2 = o.Z.square();
        F U1 = X * Z2Z2;
        F U2 = o.X * Z1Z1;
        F S1 = Y * o.Z * Z2Z2;
        F S2 = o.Y * Z * Z1Z1;
        F H = U2 - U1;
        if (H.is_zero()) {
            if (S1 == S2) return dbl();
            return infinity();
        }
        F I = H.dbl().square();
        F J = H * I;
        F rr = (S2 - S1).dbl();
        F V = U1 * I;
        F X3 = rr.square() - J - V.dbl();
        F Y3 = rr * (V - X3) - (S1 * J).dbl();
        F Z3 = ((Z + o.Z).square() - Z1Z1 - Z2Z2) * H;
        return {X3, Y3, Z3};
    }

    CurvePoint mul(const mpz_class& k) const {
        if (k == 0 || is_infinity()) return infinity();
        if (k < 0) return mul(-k).negate();
        CurvePoint acc = infinity();
        size_t bits = mpz_sizeinbase(k.get_mpz_t(), 2);
        for (size_t i = bits; i-- > 0;) {
            acc = acc.dbl();
            if (mpz_tstbit(k.get_mpz_t(), i)) acc = acc.add(*this);
        }
        return acc;
    }

    std::pair<F, F> affine() const {
        if (is_infinity()) throw Error(Errc::bad_point, "no affine form of infinity");
        F zi = Z.inverse();
        F zi2 = zi.square();
        return {X * zi2, Y * zi2 * zi};
    }

    bool equals(const CurvePoint& o) const {
        if (is_infinity() || o.is_infinity()) return is_infinity() == o.is_infinity();
        F Z1Z1 = Z.square();
        F Z2Z2 = o.Z.square();
        return X * Z2Z2 == o.X * Z1Z1 && Y * o.Z * Z2Z2 == o.Y * Z * Z1Z1;
    }
};

using G1Point = CurvePoint<Fp>;
using G2Point = CurvePoint<Fp2>;

struct CurveCtx {
    mpz_class order;   // prime subgroup order r
    Fp b;              // 3
    Fp2 b_twist;       // 3 / xi
    G1Point g1;
    G2Point g2;
};

namespace detail {

inline G2Point make_g2_generator() {
    // Standard generator of the order-r subgroup of the twist.
    Fp2 x(Fp::from_mpz(mpz_class(
              "10857046999023057135944570762232829481370756359578518086990519993285655852781")),
          Fp::from_mpz(mpz_class(
              "11559732032986387107991004021392285783925812861821192530917403151452391805634")));
    Fp2 y(Fp::from_mpz(mpz_class(
              "8495653923123431417604973247489272438418190587263600148770280649306958101930")),
          Fp::from_mpz(mpz_class(
              "4082367875863433681332203403145435568316851327593401208105741076214120093531")));
    return G2Point::from_affine(x, y);
}

}  // namespace detail

inline const CurveCtx& curvectx() {
    static const CurveCtx ctx = [] {
        CurveCtx c;
        c.order = mpz_class(bn254_group_order_dec);
        c.b = Fp::from_u64(3);
        c.b_twist = Fp2(Fp::from_u64(3), Fp::zero()) * Fp2::xi().inverse();
        c.g1 = G1Point::from_affine(Fp::one(), Fp::from_u64(2));
        c.g2 = detail::make_g2_generator();
        auto [x1, y1] = c.g1.affine();
        if (!(y1.square() == x1.square() * x1 + c.b)) throw Error(Errc::bad_point, "bad base generator");
        auto [x2, y2] = c.g2.affine();
        if (!(y2.square() == x2.square() * x2 + c.b_twist))
            throw Error(Errc::bad_point, "bad twist generator");
        if (!c.g2.mul(c.order).is_infinity()) throw Error(Errc::bad_point, "twist generator order");
        return c;
    }();
    return ctx;
}

inline bool g1_on_curve(const G1Point& pt) {
    if (pt.is_infinity()) return true;
    auto [x, y] = pt.affine();
    return y.square() == x.square() * x + curvectx().b;
}

inline bool g2_on_curve(const G2Point& pt) {
    if (pt.is_infinity()) return true;
    auto [x, y] = pt.affine();
    return y.square() == x.square() * x + curvectx().b_twist;
}

// Compressed encodings: a tag byte (0x00 infinity, 0x02 even y, 0x03 odd y)
// followed by the affine x coordinate, big-endian.
inline constexpr size_t g1_bytes = 1 + fp_bytes;
inline constexpr size_t g2_bytes = 1 + 2 * fp_bytes;
inline constexpr size_t gt_bytes = 12 * fp_bytes;

inline Bytes g1_serialize(const G1Point& pt) {
    Bytes out;
    out.reserve(g1_bytes);
    if (pt.is_infinity()) {
        out.assign(g1_bytes, 0);
        return out;
    }
    auto [x, y] = pt.affine();
    out.push_back(y.parity() ? 0x03 : 0x02);
    append(out, x.to_bytes_be());
    return out;
}

inline G1Point g1_deserialize(const Bytes& b) {
    if (b.size() != g1_bytes) throw Error(Errc::bad_point, "bad point length");
    if (b[0] == 0x00) {
        for (size_t i = 1; i < b.size(); i++)
            if (b[i]) throw Error(Errc::bad_point, "bad infinity encoding");
        return G1Point::infinity();
    }
    if (b[0] != 0x02 && b[0] != 0x03) throw Error(Errc::bad_point, "bad point tag");
    auto x = Fp::from_bytes_be(Bytes(b.begin() + 1, b.end()));
    if (!x) throw Error(Errc::bad_point, "x out of range");
    auto y = (x->square() * *x + curvectx().b).sqrt();
    if (!y) throw Error(Errc::bad_point, "x not on curve");
    Fp yv = *y;
    if (yv.parity() != (b[0] == 0x03)) yv = -yv;
    return G1Point::from_affine(*x, yv);
}

inline Bytes g2_serialize(const G2Point& pt) {
    Bytes out;
    out.reserve(g2_bytes);
    if (pt.is_infinity()) {
        out.assign(g2_bytes, 0);
        return out;
    }
    auto [x, y] = pt.affine();
    out.push_back(y.parity() ? 0x03 : 0x02);
    append(out, x.c0.to_bytes_be());
    append(out, x.c1.to_bytes_be());
    return out;
}

inline G2Point g2_deserialize(const Bytes& b, bool check_subgroup = true) {
    if (b.size() != g2_bytes) throw Error(Errc::bad_point, "bad point length");
    if (b[0] == 0x00) {
        for (size_t i = 1; i < b.size(); i++)
            if (b[i]) throw Error(Errc::bad_point, "bad infinity encoding");
        return G2Point::infinity();
    }
    if (b[0] != 0x02 && b[0] != 0x03) throw Error(Errc::bad_point, "bad point tag");
    auto xc0 = Fp::from_bytes_be(Bytes(b.begin() + 1, b.begin() + 1 + fp_bytes));
    auto xc1 = Fp::from_bytes_be(Bytes(b.begin() + 1 + fp_bytes, b.end()));
    if (!xc0 || !xc1) throw Error(Errc::bad_point, "x out of range");
    Fp2 x(*xc0, *xc1);
    auto y = (x.square() * x + curvectx().b_twist).sqrt();
    if (!y) throw Error(Errc::bad_point, "x not on twist");
    Fp2 yv = *y;
    if (yv.parity() != (b[0] == 0x03)) yv = -yv;
    G2Point pt = G2Point::from_affine(x, yv);
    if (check_subgroup && !pt.mul(curvectx().order).is_infinity())
        throw Error(Errc::bad_point, "point outside prime-order subgroup");
    return pt;
}

// Deterministic hash to the base curve group by counter increment; the curve
// has cofactor 1, so any affine point already lies in the prime-order group.
inline G1Point hash_to_g1(const char* domain, const Bytes& msg) {
    for (uint32_t ctr = 0; ctr < 1024; ctr++) {
        Bytes in;
        append_u32le(in, ctr);
        in.push_back(0x00);
        append(in, msg);
        Bytes half0 = sha256(tagged(domain, in));
        in[4] = 0x01;
        Bytes half1 = sha256(tagged(domain, in));
        mpz_class v;
        Bytes wide = concat(half0, half1);
        mpz_import(v.get_mpz_t(), wide.size(), 1, 1, 0, 0, wide.data());
        Fp x = Fp::from_mpz(v);
        auto y = (x.square() * x + curvectx().b).sqrt();
        if (!y) continue;
        Fp yv = y->is_high() ? -*y : *y;
        return G1Point::from_affine(x, yv);
    }
    throw Error(Errc::io_error, "hash-to-curve exhausted counters");
}

}  // namespace sps::crypto
