#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "sps/bitvec.hpp"
#include "sps/common.hpp"
#include "sps/crypto/hash.hpp"

namespace sps {

namespace filter_format {
inline constexpr uint8_t magic[4] = {'S', 'P', 'S', 'F'};
inline constexpr uint8_t version = 1;
inline constexpr uint8_t type_standard = 1;
inline constexpr uint8_t type_customized = 2;

inline void write_header(Bytes& out, uint8_t type, uint64_t m, uint32_t k) {
    out.insert(out.end(), magic, magic + 4);
    out.push_back(version);
    out.push_back(type);
    append_u64le(out, m);
    append_u32le(out, k);
}

struct Header {
    uint8_t type;
    uint64_t m;
    uint32_t k;
};

inline Header read_header(ByteReader& r) {
    Bytes got = r.take(4);
    if (!std::equal(got.begin(), got.end(), magic))
        throw Error(Errc::malformed_input, "bad filter magic");
    if (r.u8() != version) throw Error(Errc::malformed_input, "bad filter version");
    Header h;
    h.type = r.u8();
    h.m = r.u64le();
    h.k = r.u32le();
    return h;
}
}  // namespace filter_format

struct BfParams {
    uint64_t m;  // bits
    uint32_t k;  // hash functions

    static BfParams derive(uint64_t capacity, double fp_target) {
        if (capacity < 1) throw Error(Errc::malformed_input, "filter capacity must be positive");
        if (!(fp_target > 0.0) || !(fp_target < 1.0))
            throw Error(Errc::malformed_input, "false positive target must lie in (0,1)");
        const double ln2 = std::log(2.0);
        double mbits = std::ceil(-double(capacity) * std::log(fp_target) / (ln2 * ln2));
        BfParams p;
        p.m = static_cast<uint64_t>(mbits);
        p.k = static_cast<uint32_t>(std::lround(mbits / double(capacity) * ln2));
        if (p.k < 1) p.k = 1;
        return p;
    }

    bool operator==(const BfParams&) const = default;
};

// Expected false positive rate of an (m, k) filter holding n elements.
inline double bf_false_positive_rate(uint64_t m, uint32_t k, uint64_t n) {
    double x = std::exp(-double(k) * double(n) / double(m));
    return std::pow(1.0 - x, double(k));
}

// Bloom filter with k positions per item, derived from one digest by double
// hashing.
class StandardBloomFilter {
public:
    StandardBloomFilter(uint64_t capacity, double fp_target)
        : params_(BfParams::derive(capacity, fp_target)),
          capacity_(capacity),
          fp_target_(fp_target),
          bits_(params_.m) {}

    StandardBloomFilter(BfParams params, BitVec bits)
        : params_(params), bits_(std::move(bits)) {
        if (bits_.size() != params_.m) throw Error(Errc::length_mismatch, "filter bit length");
    }

    const BfParams& params() const { return params_; }
    uint64_t capacity() const { return capacity_; }
    double fp_target() const { return fp_target_; }
    const BitVec& bits() const { return bits_; }
    uint64_t popcount() const { return bits_.popcount(); }

    void add(const Bytes& item) {
        auto [ha, hb] = base_hashes(item);
        for (uint32_t i = 0; i < params_.k; i++) bits_.set((ha + uint64_t(i) * hb) % params_.m);
    }

    bool contains(const Bytes& item) const {
        auto [ha, hb] = base_hashes(item);
        for (uint32_t i = 0; i < params_.k; i++)
            if (!bits_.test((ha + uint64_t(i) * hb) % params_.m)) return false;
        return true;
    }

    // Indices of set bits, strictly increasing.
    std::vector<uint64_t> positions() const { return bits_.set_positions(); }

    Bytes serialize() const {
        Bytes out;
        filter_format::write_header(out, filter_format::type_standard, params_.m, params_.k);
        append(out, bits_.to_bytes());
        return out;
    }

    static StandardBloomFilter deserialize(const Bytes& b) {
        ByteReader r(b);
        auto h = filter_format::read_header(r);
        if (h.type != filter_format::type_standard)
            throw Error(Errc::malformed_input, "not a standard filter");
        BitVec bits = BitVec::from_bytes(h.m, r.take((h.m + 7) / 8));
        if (!r.done()) throw Error(Errc::malformed_input, "filter trailing bytes");
        return StandardBloomFilter(BfParams{h.m, h.k}, std::move(bits));
    }

private:
    static std::pair<uint64_t, uint64_t> base_hashes(const Bytes& item) {
        Bytes h = crypto::sha256(crypto::tagged(crypto::tag::bf, item));
        ByteReader r(h);
        uint64_t ha = r.u64le();
        uint64_t hb = r.u64le();
        return {ha, hb};
    }

    BfParams params_;
    uint64_t capacity_ = 0;
    double fp_target_ = 0.0;
    BitVec bits_;
};

}  // namespace sps
