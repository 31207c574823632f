#pragma once

#include <cstdint>

#include "sps/bitvec.hpp"
#include "sps/common.hpp"
#include "sps/crypto/hash.hpp"
#include "sps/filters/bloom.hpp"

namespace sps {

// System-wide customized-filter parameters. Every party must hash with the
// same seed into the same length or filters stop being comparable.
struct CbfConfig {
    uint64_t length = 0;
    Bytes seed;
};

// Position of an item in a customized filter of m bits: one keyed 64-bit
// hash reduced mod m. The seed is fixed system-wide so filters built by
// different parties stay comparable and OR-able.
inline uint64_t cbf_index(const Bytes& seed, const Bytes& item, uint64_t m) {
    Bytes input;
    append_field(input, seed);
    append(input, item);
    Bytes h = crypto::sha256(crypto::tagged(crypto::tag::cbf, input));
    ByteReader r(h);
    return r.u64le() % m;
}

// Bloom filter variant that sets exactly one bit per item. Equal-length
// filters form a join-semilattice under bitwise OR.
class CustomizedBloomFilter {
public:
    CustomizedBloomFilter() = default;
    explicit CustomizedBloomFilter(uint64_t length_bits) : bits_(length_bits) {}
    explicit CustomizedBloomFilter(BitVec bits) : bits_(std::move(bits)) {}

    uint64_t size() const { return bits_.size(); }
    const BitVec& bits() const { return bits_; }
    uint64_t popcount() const { return bits_.popcount(); }

    void add(const Bytes& seed, const Bytes& item) { bits_.set(cbf_index(seed, item, bits_.size())); }

    bool contains(const Bytes& seed, const Bytes& item) const {
        return bits_.test(cbf_index(seed, item, bits_.size()));
    }

    void or_with(const CustomizedBloomFilter& other) { bits_.or_with(other.bits_); }

    bool operator==(const CustomizedBloomFilter&) const = default;

    Bytes serialize() const {
        Bytes out;
        filter_format::write_header(out, filter_format::type_customized, bits_.size(), 1);
        append(out, bits_.to_bytes());
        return out;
    }

    static CustomizedBloomFilter deserialize(const Bytes& b) {
        ByteReader r(b);
        auto h = filter_format::read_header(r);
        if (h.type != filter_format::type_customized)
            throw Error(Errc::malformed_input, "not a customized filter");
        if (h.k != 1) throw Error(Errc::malformed_input, "customized filter hash count");
        BitVec bits = BitVec::from_bytes(h.m, r.take((h.m + 7) / 8));
        if (!r.done()) throw Error(Errc::malformed_input, "filter trailing bytes");
        return CustomizedBloomFilter(std::move(bits));
    }

private:
    BitVec bits_;
};

inline CustomizedBloomFilter cbf_or(const CustomizedBloomFilter& a, const CustomizedBloomFilter& b) {
    CustomizedBloomFilter out = a;
    out.or_with(b);
    return out;
}

}  // namespace sps
