#pragma once

#include <cmath>
#include <cstdint>

#include "sps/bitvec.hpp"
#include "sps/common.hpp"
#include "sps/filters/cbf.hpp"

namespace sps {

enum class SimilarityMode { cosine, containment, dot_count };

inline uint64_t dot_count(const BitVec& a, const BitVec& b) { return a.and_popcount(b); }

inline double cosine(const BitVec& a, const BitVec& b) {
    uint64_t pa = a.popcount();
    uint64_t pb = b.popcount();
    if (pa == 0 || pb == 0) throw Error(Errc::zero_vector, "cosine of an all-zero filter");
    return double(a.and_popcount(b)) / (std::sqrt(double(pa)) * std::sqrt(double(pb)));
}

inline double containment(const BitVec& query, const BitVec& x) {
    uint64_t pq = query.popcount();
    if (pq == 0) throw Error(Errc::zero_vector, "containment of an all-zero query");
    return double(query.and_popcount(x)) / double(pq);
}

inline double similarity(const BitVec& a, const BitVec& b, SimilarityMode mode) {
    switch (mode) {
        case SimilarityMode::cosine: return cosine(a, b);
        case SimilarityMode::containment: return containment(a, b);
        case SimilarityMode::dot_count: return double(dot_count(a, b));
    }
    throw Error(Errc::unsupported, "unknown similarity mode");
}

inline uint64_t dot_count(const CustomizedBloomFilter& a, const CustomizedBloomFilter& b) {
    return dot_count(a.bits(), b.bits());
}
inline double cosine(const CustomizedBloomFilter& a, const CustomizedBloomFilter& b) {
    return cosine(a.bits(), b.bits());
}
inline double containment(const CustomizedBloomFilter& q, const CustomizedBloomFilter& x) {
    return containment(q.bits(), x.bits());
}

}  // namespace sps
