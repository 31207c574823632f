#pragma once

#include <vector>

#include "sps/crypto/curve.hpp"

namespace sps::crypto {

namespace detail {

// Sparse multiplication of f by the line value a*v*w? + ... ; layout follows
// fp12e_mul_line with coefficients (a, b, c) from the line functions below.
inline Fp12 mul_line(const Fp12& f, const Fp2& a, const Fp2& b, const Fp2& c) {
    Fp6 t1(b, a, Fp2::zero());
    Fp6 t2(b + c, a, Fp2::zero());
    t1 = t1 * f.c1;
    Fp6 t3 = f.c0.mul_fp2(c);
    Fp6 hi = (f.c1 + f.c0) * t2 - t1 - t3;
    Fp6 lo = t3 + t1.mul_by_v();
    return {lo, hi};
}

struct AffineG1 {
    Fp x, y;
};
struct AffineG2 {
    Fp2 x, y;
};

inline void line_func_double(Fp12& f, G2Point& r, const AffineG1& q) {
    Fp2 r_t = r.Z.square();
    Fp2 A = r.X.square();
    Fp2 B = r.Y.square();
    Fp2 C = B.square();
    Fp2 D = ((r.X + B).square() - A - C).dbl();
    Fp2 E = A.mul_small(3);
    Fp2 G = E.square();

    Fp2 r_x = G - D.dbl();
    Fp2 r_y = E * (D - r_x) - C.mul_small(8);
    Fp2 r_z = (r.Y + r.Z).square() - B - r_t;

    Fp2 a = (r.X + E).square() - (A + G + B.mul_small(4));
    Fp2 b = (-(E * r_t).dbl()).mul_fp(q.x);
    Fp2 c = (r_z * r_t).dbl().mul_fp(q.y);

    r = {r_x, r_y, r_z};
    f = mul_line(f, a, b, c);
}

// p must be affine; r2 = p.y^2 is passed in so callers can cache it.
inline void line_func_add(Fp12& f, G2Point& r, const AffineG2& p, const AffineG1& q, const Fp2& r2) {
    Fp2 r_t = r.Z.square();
    Fp2 B = p.x * r_t;
    Fp2 D = (((p.y + r.Z).square() - r2 - r_t)) * r_t;
    Fp2 H = B - r.X;
    Fp2 I = H.square();
    Fp2 E = I.mul_small(4);
    Fp2 J = H * E;
    Fp2 L1 = D - r.Y.dbl();
    Fp2 V = r.X * E;

    Fp2 r_x = L1.square() - J - V.dbl();
    Fp2 r_z = (r.Z + H).square() - r_t - I;
    Fp2 r_y = (V - r_x) * L1 - (r.Y * J).dbl();

    Fp2 t = (p.y + r_z).square() - r2 - r_z.square();
    Fp2 a = (L1 * p.x).dbl() - t;
    Fp2 b = (-L1).dbl().mul_fp(q.x);
    Fp2 c = r_z.dbl().mul_fp(q.y);

    r = {r_x, r_y, r_z};
    f = mul_line(f, a, b, c);
}

// Non-adjacent form, least significant digit first.
inline std::vector<int8_t> naf_digits(mpz_class k) {
    std::vector<int8_t> out;
    while (k > 0) {
        if (mpz_odd_p(k.get_mpz_t())) {
            mpz_class rem = k % 4;
            int8_t d = rem == 1 ? 1 : -1;
            out.push_back(d);
            k -= d;
        } else {
            out.push_back(0);
        }
        k >>= 1;
    }
    return out;
}

inline const std::vector<int8_t>& miller_naf() {
    static const std::vector<int8_t> naf =
        naf_digits(mpz_class(6) * mpz_class(bn254_curve_seed) + 2);
    return naf;
}

}  // namespace detail

inline Fp12 miller_loop(const G1Point& p_in, const G2Point& q_in) {
    using namespace detail;
    auto [px, py] = p_in.affine();
    auto [qx, qy] = q_in.affine();
    AffineG1 P{px, py};
    AffineG2 Q{qx, qy};
    AffineG2 mQ{qx, -qy};
    Fp2 Qp = Q.y.square();

    Fp12 f = Fp12::one();
    G2Point T = G2Point::from_affine(Q.x, Q.y);

    const auto& naf = miller_naf();
    for (size_t i = naf.size() - 1; i-- > 0;) {
        f = f.square();
        line_func_double(f, T, P);
        if (naf[i] == 1)
            line_func_add(f, T, Q, P, Qp);
        else if (naf[i] == -1)
            line_func_add(f, T, mQ, P, Qp);
    }

    // Frobenius images of Q on the twist close out the optimal-ate loop.
    const TowerCtx& tw = towerctx();
    AffineG2 Q1{Q.x.conjugate() * tw.g1[1], Q.y.conjugate() * tw.g1[2]};
    AffineG2 Q2{Q.x * tw.g2[1], Q.y};
    line_func_add(f, T, Q1, P, Q1.y.square());
    line_func_add(f, T, Q2, P, Q2.y.square());
    return f;
}

inline Fp12 final_exp(const Fp12& inp) {
    // Hard-part chain from Devegili, Scott, Dahab (eprint 2010/354, Alg. 31).
    mpz_class u(bn254_curve_seed);

    Fp12 t1 = inp.conjugate();
    t1 = t1 * inp.inverse();
    t1 = t1 * t1.frobenius_p2();

    Fp12 fp1 = t1.frobenius();
    Fp12 fp2 = t1.frobenius_p2();
    Fp12 fp3 = fp2.frobenius();

    Fp12 fu1 = t1.pow(u);
    Fp12 fu2 = fu1.pow(u);
    Fp12 fu3 = fu2.pow(u);

    Fp12 y3 = fu1.frobenius().conjugate();
    Fp12 fu2p = fu2.frobenius();
    Fp12 fu3p = fu3.frobenius();
    Fp12 y2 = fu2.frobenius_p2();

    Fp12 y0 = fp1 * fp2 * fp3;
    Fp12 y1 = t1.conjugate();
    Fp12 y5 = fu2.conjugate();
    Fp12 y4 = (fu1 * fu2p).conjugate();
    Fp12 y6 = (fu3 * fu3p).conjugate();

    Fp12 t0 = y6.square() * y4 * y5;
    t1 = y3 * y5 * t0;
    t0 = t0 * y2;
    t1 = t1.square() * t0;
    t1 = t1.square();
    t0 = t1 * y1;
    t1 = t1 * y0;
    t0 = t0.square() * t1;
    return t0;
}

inline Fp12 pairing(const G1Point& p, const G2Point& q) {
    if (p.is_infinity() || q.is_infinity()) return Fp12::one();
    return final_exp(miller_loop(p, q));
}

inline Bytes gt_serialize(const Fp12& f) {
    Bytes out;
    out.reserve(gt_bytes);
    for (const Fp6* h : {&f.c0, &f.c1})
        for (const Fp2* q : {&h->c0, &h->c1, &h->c2}) {
            append(out, q->c0.to_bytes_be());
            append(out, q->c1.to_bytes_be());
        }
    return out;
}

inline Fp12 gt_deserialize(const Bytes& b) {
    if (b.size() != gt_bytes) throw Error(Errc::malformed_input, "bad target-group length");
    std::array<Fp, 12> parts;
    for (size_t i = 0; i < 12; i++) {
        auto fe = Fp::from_bytes_be(Bytes(b.begin() + i * fp_bytes, b.begin() + (i + 1) * fp_bytes));
        if (!fe) throw Error(Errc::malformed_input, "coordinate out of range");
        parts[i] = *fe;
    }
    return Fp12(Fp6(Fp2(parts[0], parts[1]), Fp2(parts[2], parts[3]), Fp2(parts[4], parts[5])),
                Fp6(Fp2(parts[6], parts[7]), Fp2(parts[8], parts[9]), Fp2(parts[10], parts[11])));
}

}  // namespace sps::crypto
