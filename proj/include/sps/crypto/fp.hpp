#pragma once

#include <gmp.h>
#include <gmpxx.h>

#include <array>
#include <cstdint>
#include <optional>

#include "sps/common.hpp"

namespace sps::crypto {

static_assert(sizeof(mp_limb_t) == 8, "64-bit limbs required");

inline constexpr size_t fp_limbs = 4;
inline constexpr size_t fp_bytes = 32;

// Base field prime of the BN254 curve y^2 = x^3 + 3 (the pairing-friendly
// curve this library is built on; ~100-bit security).
inline const char* bn254_field_prime_dec =
    "21888242871839275222246405745257275088696311157297823662689037894645226208583";
inline const char* bn254_group_order_dec =
    "21888242871839275222246405745257275088548364400416034343698204186575808495617";
inline constexpr uint64_t bn254_curve_seed = 4965661367192848881ULL;  // u; 6u+2 drives the Miller loop

namespace detail {

inline void mpz_to_limbs(mp_limb_t* out, size_t n, const mpz_class& v) {
    for (size_t i = 0; i < n; i++) out[i] = 0;
    size_t count = 0;
    mpz_export(out, &count, -1, 8, 0, 0, v.get_mpz_t());
    if (count > n) throw Error(Errc::malformed_input, "value too large for limb buffer");
}

inline mpz_class limbs_to_mpz(const mp_limb_t* in, size_t n) {
    mpz_class v;
    mpz_import(v.get_mpz_t(), n, -1, 8, 0, 0, in);
    return v;
}

}  // namespace detail

struct FpCtx {
    mp_limb_t p[fp_limbs];
    mp_limb_t r2[fp_limbs];       // R^2 mod p, R = 2^256
    mp_limb_t mont_one[fp_limbs]; // R mod p
    mp_limb_t n0inv;              // -p^{-1} mod 2^64
    mpz_class p_mpz;
    mpz_class sqrt_exp;  // (p+1)/4; valid because p = 3 mod 4
};

inline const FpCtx& fpctx() {
    static const FpCtx ctx = [] {
        FpCtx c;
        c.p_mpz = mpz_class(bn254_field_prime_dec);
        detail::mpz_to_limbs(c.p, fp_limbs, c.p_mpz);
        mpz_class R = mpz_class(1) << (64 * fp_limbs);
        detail::mpz_to_limbs(c.r2, fp_limbs, mpz_class((R * R) % c.p_mpz));
        detail::mpz_to_limbs(c.mont_one, fp_limbs, mpz_class(R % c.p_mpz));
        mpz_class inv, two64 = mpz_class(1) << 64;
        if (mpz_invert(inv.get_mpz_t(), c.p_mpz.get_mpz_t(), two64.get_mpz_t()) == 0)
            throw Error(Errc::io_error, "field setup failure");
        mpz_class neg = (two64 - inv) % two64;
        c.n0inv = mpz_get_ui(neg.get_mpz_t());
        c.sqrt_exp = (c.p_mpz + 1) / 4;
        return c;
    }();
    return ctx;
}

// Field element in Montgomery form; the representation in [0, p) is canonical,
// so limb comparison gives equality.
class Fp {
public:
    Fp() { v_.fill(0); }

    static Fp zero() { return Fp(); }

    static Fp one() {
        Fp r;
        std::copy(fpctx().mont_one, fpctx().mont_one + fp_limbs, r.v_.begin());
        return r;
    }

    static Fp from_mpz(const mpz_class& x) {
        const FpCtx& c = fpctx();
        mpz_class m = x % c.p_mpz;
        if (m < 0) m += c.p_mpz;
        Fp raw;
        detail::mpz_to_limbs(raw.v_.data(), fp_limbs, m);
        Fp r;
        mul_limbs(r.v_.data(), raw.v_.data(), c.r2);
        return r;
    }

    static Fp from_u64(uint64_t x) { return from_mpz(mpz_class(detail::limbs_to_mpz(&x, 1))); }

    mpz_class to_mpz() const {
        std::array<mp_limb_t, fp_limbs> c = canonical();
        return detail::limbs_to_mpz(c.data(), fp_limbs);
    }

    static std::optional<Fp> from_bytes_be(const Bytes& b) {
        if (b.size() != fp_bytes) return std::nullopt;
        mpz_class v;
        mpz_import(v.get_mpz_t(), b.size(), 1, 1, 0, 0, b.data());
        if (v >= fpctx().p_mpz) return std::nullopt;
        return from_mpz(v);
    }

    Bytes to_bytes_be() const {
        std::array<mp_limb_t, fp_limbs> c = canonical();
        Bytes out(fp_bytes, 0);
        Bytes tmp(fp_bytes);
        size_t count = 0;
        mpz_class v = detail::limbs_to_mpz(c.data(), fp_limbs);
        mpz_export(tmp.data(), &count, 1, 1, 0, 0, v.get_mpz_t());
        std::copy(tmp.begin(), tmp.begin() + count, out.begin() + (fp_bytes - count));
        return out;
    }

    static Fp random(Rng& rng) {
        Bytes b = rng.bytes(64);
        mpz_class v;
        mpz_import(v.get_mpz_t(), b.size(), 1, 1, 0, 0, b.data());
        return from_mpz(v);
    }

    bool is_zero() const {
        for (mp_limb_t l : v_)
            if (l) return false;
        return true;
    }

    bool operator==(const Fp& o) const { return v_ == o.v_; }

    Fp operator+(const Fp& o) const {
        const FpCtx& c = fpctx();
        Fp r;
        mp_limb_t carry = mpn_add_n(r.v_.data(), v_.data(), o.v_.data(), fp_limbs);
        if (carry || mpn_cmp(r.v_.data(), c.p, fp_limbs) >= 0)
            mpn_sub_n(r.v_.data(), r.v_.data(), c.p, fp_limbs);
        return r;
    }

    Fp operator-(const Fp& o) const {
        const FpCtx& c = fpctx();
        Fp r;
        mp_limb_t borrow = mpn_sub_n(r.v_.data(), v_.data(), o.v_.data(), fp_limbs);
        if (borrow) mpn_add_n(r.v_.data(), r.v_.data(), c.p, fp_limbs);
        return r;
    }

    Fp operator-() const {
        if (is_zero()) return *this;
        const FpCtx& c = fpctx();
        Fp r;
        mpn_sub_n(r.v_.data(), c.p, v_.data(), fp_limbs);
        return r;
    }

    Fp operator*(const Fp& o) const {
        Fp r;
        mul_limbs(r.v_.data(), v_.data(), o.v_.data());
        return r;
    }

    Fp square() const {
        const FpCtx& c = fpctx();
        mp_limb_t t[2 * fp_limbs];
        mpn_sqr(t, v_.data(), fp_limbs);
        Fp r;
        mont_reduce(r.v_.data(), t, c);
        return r;
    }

    Fp dbl() const { return *this + *this; }

    Fp mul_small(uint64_t k) const {
        // Used for the small constants in curve formulas (2, 3, 8, 9).
        Fp acc;
        Fp base = *this;
        while (k) {
            if (k & 1) acc = acc + base;
            base = base.dbl();
            k >>= 1;
        }
        return acc;
    }

    Fp inverse() const {
        if (is_zero()) throw Error(Errc::not_invertible, "inverse of zero");
        const FpCtx& c = fpctx();
        mpz_class inv;
        mpz_class self = to_mpz();
        if (mpz_invert(inv.get_mpz_t(), self.get_mpz_t(), c.p_mpz.get_mpz_t()) == 0)
            throw Error(Errc::not_invertible, "no field inverse");
        return from_mpz(inv);
    }

    Fp pow(const mpz_class& e) const {
        if (e < 0) throw Error(Errc::malformed_input, "negative exponent");
        Fp acc = Fp::one();
        size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
        if (e == 0) return acc;
        for (size_t i = bits; i-- > 0;) {
            acc = acc.square();
            if (mpz_tstbit(e.get_mpz_t(), i)) acc = acc * *this;
        }
        return acc;
    }

    // Square root for p = 3 mod 4; nullopt when no root exists.
    std::optional<Fp> sqrt() const {
        Fp s = pow(fpctx().sqrt_exp);
        if (s.square() == *this) return s;
        return std::nullopt;
    }

    bool parity() const { return canonical()[0] & 1; }

    // True if the canonical value is > (p-1)/2; gives a deterministic sign.
    bool is_high() const {
        const FpCtx& c = fpctx();
        std::array<mp_limb_t, fp_limbs> can = canonical();
        std::array<mp_limb_t, fp_limbs> twice;
        mp_limb_t carry = mpn_lshift(twice.data(), can.data(), fp_limbs, 1);
        return carry || mpn_cmp(twice.data(), c.p, fp_limbs) >= 0;
    }

private:
    static void mul_limbs(mp_limb_t* out, const mp_limb_t* a, const mp_limb_t* b) {
        const FpCtx& c = fpctx();
        mp_limb_t t[2 * fp_limbs];
        mpn_mul_n(t, a, b, fp_limbs);
        mont_reduce(out, t, c);
    }

    static void mont_reduce(mp_limb_t* out, mp_limb_t* t, const FpCtx& c) {
        for (size_t i = 0; i < fp_limbs; i++) {
            mp_limb_t m = t[i] * c.n0inv;
            mp_limb_t carry = mpn_addmul_1(t + i, c.p, fp_limbs, m);
            mpn_add_1(t + i + fp_limbs, t + i + fp_limbs, fp_limbs - i, carry);
        }
        if (mpn_cmp(t + fp_limbs, c.p, fp_limbs) >= 0)
            mpn_sub_n(out, t + fp_limbs, c.p, fp_limbs);
        else
            std::copy(t + fp_limbs, t + 2 * fp_limbs, out);
    }

    std::array<mp_limb_t, fp_limbs> canonical() const {
        // Montgomery reduction of the bare value recovers the integer form.
        mp_limb_t t[2 * fp_limbs] = {0};
        std::copy(v_.begin(), v_.end(), t);
        std::array<mp_limb_t, fp_limbs> out;
        mont_reduce(out.data(), t, fpctx());
        return out;
    }

    std::array<mp_limb_t, fp_limbs> v_;
};

}  // namespace sps::crypto
