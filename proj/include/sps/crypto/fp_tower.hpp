#pragma once

#include <optional>

#include "sps/crypto/fp.hpp"

namespace sps::crypto {

// Tower: Fp2 = Fp[i]/(i^2+1), Fp6 = Fp2[v]/(v^3 - xi) with xi = 9+i,
// Fp12 = Fp6[w]/(w^2 - v).
class Fp2 {
public:
    Fp c0, c1;

    Fp2() = default;
    Fp2(Fp a, Fp b) : c0(a), c1(b) {}

    static Fp2 zero() { return {}; }
    static Fp2 one() { return {Fp::one(), Fp::zero()}; }
    static Fp2 xi() { return {Fp::from_u64(9), Fp::one()}; }

    bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
    bool operator==(const Fp2& o) const = default;

    Fp2 operator+(const Fp2& o) const { return {c0 + o.c0, c1 + o.c1}; }
    Fp2 operator-(const Fp2& o) const { return {c0 - o.c0, c1 - o.c1}; }
    Fp2 operator-() const { return {-c0, -c1}; }
    Fp2 dbl() const { return {c0.dbl(), c1.dbl()}; }

    Fp2 operator*(const Fp2& o) const {
        Fp v0 = c0 * o.c0;
        Fp v1 = c1 * o.c1;
        Fp mid = (c0 + c1) * (o.c0 + o.c1);
        return {v0 - v1, mid - v0 - v1};
    }

    Fp2 square() const {
        Fp t0 = (c0 + c1) * (c0 - c1);
        Fp t1 = (c0 * c1).dbl();
        return {t0, t1};
    }

    Fp2 mul_fp(const Fp& s) const { return {c0 * s, c1 * s}; }

    Fp2 mul_small(uint64_t k) const { return {c0.mul_small(k), c1.mul_small(k)}; }

    // Multiply by xi = 9+i: (9 c0 - c1) + (c0 + 9 c1) i.
    Fp2 mul_xi() const { return {c0.mul_small(9) - c1, c0 + c1.mul_small(9)}; }

    Fp2 conjugate() const { return {c0, -c1}; }

    Fp2 inverse() const {
        Fp norm = c0.square() + c1.square();
        Fp t = norm.inverse();
        return {c0 * t, -(c1 * t)};
    }

    Fp2 pow(const mpz_class& e) const {
        Fp2 acc = one();
        if (e == 0) return acc;
        size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
        for (size_t i = bits; i-- > 0;) {
            acc = acc.square();
            if (mpz_tstbit(e.get_mpz_t(), i)) acc = acc * *this;
        }
        return acc;
    }

    static Fp2 random(Rng& rng) { return {Fp::random(rng), Fp::random(rng)}; }

    // Square root via the complex method; nullopt for non-residues.
    std::optional<Fp2> sqrt() const {
        if (c1.is_zero()) {
            if (auto s = c0.sqrt()) return Fp2(*s, Fp::zero());
            if (auto s = (-c0).sqrt()) return Fp2(Fp::zero(), *s);
            return std::nullopt;
        }
        Fp norm = c0.square() + c1.square();
        auto lambda = norm.sqrt();
        if (!lambda) return std::nullopt;
        Fp half = Fp::from_u64(2).inverse();
        for (Fp delta : {(c0 + *lambda) * half, (c0 - *lambda) * half}) {
            auto u = delta.sqrt();
            if (!u || u->is_zero()) continue;
            Fp v = c1 * u->dbl().inverse();
            Fp2 cand(*u, v);
            if (cand.square() == *this) return cand;
        }
        return std::nullopt;
    }

    bool parity() const { return c0.is_zero() ? c1.parity() : c0.parity(); }
};

class Fp6 {
public:
    Fp2 c0, c1, c2;

    Fp6() = default;
    Fp6(Fp2 a, Fp2 b, Fp2 c) : c0(a), c1(b), c2(c) {}

    static Fp6 zero() { return {}; }
    static Fp6 one() { return {Fp2::one(), Fp2::zero(), Fp2::zero()}; }

    bool is_zero() const { return c0.is_zero() && c1.is_zero() && c2.is_zero(); }
    bool operator==(const Fp6& o) const = default;

    Fp6 operator+(const Fp6& o) const { return {c0 + o.c0, c1 + o.c1, c2 + o.c2}; }
    Fp6 operator-(const Fp6& o) const { return {c0 - o.c0, c1 - o.c1, c2 - o.c2}; }
    Fp6 operator-() const { return {-c0, -c1, -c2}; }
    Fp6 dbl() const { return {c0.dbl(), c1.dbl(), c2.dbl()}; }

    Fp6 operator*(const Fp6& o) const {
        Fp2 v0 = c0 * o.c0;
        Fp2 v1 = c1 * o.c1;
        Fp2 v2 = c2 * o.c2;
        Fp2 t0 = v0 + ((c1 + c2) * (o.c1 + o.c2) - v1 - v2).mul_xi();
        Fp2 t1 = (c0 + c1) * (o.c0 + o.c1) - v0 - v1 + v2.mul_xi();
        Fp2 t2 = (c0 + c2) * (o.c0 + o.c2) - v0 + v1 - v2;
        return {t0, t1, t2};
    }

    Fp6 square() const { return *this * *this; }

    Fp6 mul_fp2(const Fp2& s) const { return {c0 * s, c1 * s, c2 * s}; }

    // Multiply by v: (c0, c1, c2) -> (xi*c2, c0, c1).
    Fp6 mul_by_v() const { return {c2.mul_xi(), c0, c1}; }

    Fp6 inverse() const {
        Fp2 t0 = c0.square() - (c1 * c2).mul_xi();
        Fp2 t1 = c2.square().mul_xi() - c0 * c1;
        Fp2 t2 = c1.square() - c0 * c2;
        Fp2 f = c0 * t0 + (c1 * t2 + c2 * t1).mul_xi();
        Fp2 finv = f.inverse();
        return {t0 * finv, t1 * finv, t2 * finv};
    }
};

class Fp12 {
public:
    Fp6 c0, c1;

    Fp12() = default;
    Fp12(Fp6 a, Fp6 b) : c0(a), c1(b) {}

    static Fp12 zero() { return {}; }
    static Fp12 one() { return {Fp6::one(), Fp6::zero()}; }

    bool is_zero() const { return c0.is_zero() && c1.is_zero(); }
    bool is_one() const { return *this == one(); }
    bool operator==(const Fp12& o) const = default;

    Fp12 operator+(const Fp12& o) const { return {c0 + o.c0, c1 + o.c1}; }
    Fp12 operator-(const Fp12& o) const { return {c0 - o.c0, c1 - o.c1}; }

    Fp12 operator*(const Fp12& o) const {
        Fp6 v0 = c0 * o.c0;
        Fp6 v1 = c1 * o.c1;
        Fp6 t0 = v0 + v1.mul_by_v();
        Fp6 t1 = (c0 + c1) * (o.c0 + o.c1) - v0 - v1;
        return {t0, t1};
    }

    Fp12 square() const {
        Fp6 v0 = c0 * c1;
        Fp6 t0 = (c0 + c1) * (c0 + c1.mul_by_v()) - v0 - v0.mul_by_v();
        Fp6 t1 = v0.dbl();
        return {t0, t1};
    }

    Fp12 inverse() const {
        Fp6 t = (c0.square() - c1.square().mul_by_v()).inverse();
        return {c0 * t, -(c1 * t)};
    }

    // x^{p^6}: inverts elements of the cyclotomic subgroup (pairing outputs).
    Fp12 conjugate() const { return {c0, -c1}; }

    Fp12 pow(const mpz_class& e) const {
        Fp12 acc = one();
        if (e == 0) return acc;
        size_t bits = mpz_sizeinbase(e.get_mpz_t(), 2);
        for (size_t i = bits; i-- > 0;) {
            acc = acc.square();
            if (mpz_tstbit(e.get_mpz_t(), i)) acc = acc * *this;
        }
        return acc;
    }

    Fp12 frobenius() const;
    Fp12 frobenius_p2() const;
};

struct TowerCtx {
    // g1[j-1] = xi^{j(p-1)/6}; g2[j-1] = g1[j-1] * conj(g1[j-1]) (lies in Fp).
    Fp2 g1[5];
    Fp2 g2[5];
};

inline const TowerCtx& towerctx() {
    static const TowerCtx ctx = [] {
        TowerCtx c;
        const mpz_class& p = fpctx().p_mpz;
        mpz_class e = (p - 1) / 6;
        Fp2 xi = Fp2::xi();
        for (int j = 1; j <= 5; j++) {
            c.g1[j - 1] = xi.pow(e * j);
            c.g2[j - 1] = c.g1[j - 1] * c.g1[j - 1].conjugate();
        }
        return c;
    }();
    return ctx;
}

inline Fp12 Fp12::frobenius() const {
    const TowerCtx& t = towerctx();
    Fp6 r0(c0.c0.conjugate(), c0.c1.conjugate() * t.g1[1], c0.c2.conjugate() * t.g1[3]);
    Fp6 r1(c1.c0.conjugate() * t.g1[0], c1.c1.conjugate() * t.g1[2], c1.c2.conjugate() * t.g1[4]);
    return {r0, r1};
}

inline Fp12 Fp12::frobenius_p2() const {
    const TowerCtx& t = towerctx();
    Fp6 r0(c0.c0, c0.c1 * t.g2[1], c0.c2 * t.g2[3]);
    Fp6 r1(c1.c0 * t.g2[0], c1.c1 * t.g2[2], c1.c2 * t.g2[4]);
    return {r0, r1};
}

}  // namespace sps::crypto
