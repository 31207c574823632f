#pragma once

#include <bit>
#include <cstdint>
#include <vector>

#include "sps/common.hpp"

namespace sps {

// Fixed-length bit array. Bit i lives in word i/64 at position i%64, so the
// serialized byte stream is LSB-first.
class BitVec {
public:
    BitVec() = default;
    explicit BitVec(uint64_t nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

    uint64_t size() const { return nbits_; }

    void set(uint64_t i) { words_[i >> 6] |= uint64_t(1) << (i & 63); }

    bool test(uint64_t i) const { return words_[i >> 6] >> (i & 63) & 1; }

    uint64_t popcount() const {
        uint64_t n = 0;
        for (uint64_t w : words_) n += std::popcount(w);
        return n;
    }

    uint64_t and_popcount(const BitVec& other) const {
        if (nbits_ != other.nbits_) throw Error(Errc::length_mismatch, "bit length mismatch");
        uint64_t n = 0;
        for (size_t i = 0; i < words_.size(); i++) n += std::popcount(words_[i] & other.words_[i]);
        return n;
    }

    void or_with(const BitVec& other) {
        if (nbits_ != other.nbits_) throw Error(Errc::length_mismatch, "bit length mismatch");
        for (size_t i = 0; i < words_.size(); i++) words_[i] |= other.words_[i];
    }

    std::vector<uint64_t> set_positions() const {
        std::vector<uint64_t> out;
        for (size_t wi = 0; wi < words_.size(); wi++) {
            uint64_t w = words_[wi];
            while (w) {
                int b = std::countr_zero(w);
                out.push_back(uint64_t(wi) * 64 + uint64_t(b));
                w &= w - 1;
            }
        }
        return out;
    }

    bool operator==(const BitVec& other) const = default;

    Bytes to_bytes() const {
        Bytes out;
        out.reserve((nbits_ + 7) / 8);
        uint64_t nbytes = (nbits_ + 7) / 8;
        for (uint64_t i = 0; i < nbytes; i++) out.push_back(uint8_t(words_[i >> 3] >> ((i & 7) * 8)));
        return out;
    }

    static BitVec from_bytes(uint64_t nbits, const Bytes& b) {
        if (b.size() != (nbits + 7) / 8) throw Error(Errc::malformed_input, "bit payload size mismatch");
        BitVec v(nbits);
        for (uint64_t i = 0; i < b.size(); i++) v.words_[i >> 3] |= uint64_t(b[i]) << ((i & 7) * 8);
        uint64_t tail = nbits & 63;
        if (tail && (v.words_.back() >> tail) != 0)
            throw Error(Errc::malformed_input, "stray bits beyond declared length");
        return v;
    }

private:
    uint64_t nbits_ = 0;
    std::vector<uint64_t> words_;
};

}  // namespace sps
