#pragma once

#include <openssl/rand.h>

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstring>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace sps {

using Bytes = std::vector<uint8_t>;

enum class Errc {
    config_mismatch,
    length_mismatch,
    zero_vector,
    policy_miss,
    malformed_input,
    decrypt_failed,
    not_invertible,
    bad_point,
    unsupported,
    io_error,
    denied,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const { return code_; }

private:
    Errc code_;
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::config_mismatch: return "config_mismatch";
        case Errc::length_mismatch: return "length_mismatch";
        case Errc::zero_vector: return "zero_vector";
        case Errc::policy_miss: return "policy_miss";
        case Errc::malformed_input: return "malformed_input";
        case Errc::decrypt_failed: return "decrypt_failed";
        case Errc::not_invertible: return "not_invertible";
        case Errc::bad_point: return "bad_point";
        case Errc::unsupported: return "unsupported";
        case Errc::io_error: return "io_error";
        case Errc::denied: return "denied";
    }
    return "unknown";
}

inline Bytes to_bytes(std::string_view s) { return Bytes(s.begin(), s.end()); }

inline std::string to_string(const Bytes& b) { return std::string(b.begin(), b.end()); }

inline Bytes concat(const Bytes& a, const Bytes& b) {
    Bytes out;
    out.reserve(a.size() + b.size());
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
    return out;
}

inline void append(Bytes& out, const Bytes& b) { out.insert(out.end(), b.begin(), b.end()); }

inline void append_u32le(Bytes& out, uint32_t v) {
    for (int i = 0; i < 4; i++) out.push_back(uint8_t(v >> (8 * i)));
}

inline void append_u64le(Bytes& out, uint64_t v) {
    for (int i = 0; i < 8; i++) out.push_back(uint8_t(v >> (8 * i)));
}

inline Bytes u64le_bytes(uint64_t v) {
    Bytes out;
    append_u64le(out, v);
    return out;
}

class ByteReader {
public:
    explicit ByteReader(const Bytes& b) : data_(b.data()), size_(b.size()) {}
    ByteReader(const uint8_t* p, size_t n) : data_(p), size_(n) {}

    size_t remaining() const { return size_ - pos_; }
    bool done() const { return pos_ == size_; }

    uint8_t u8() {
        need(1);
        return data_[pos_++];
    }
    uint32_t u32le() {
        need(4);
        uint32_t v = 0;
        for (int i = 0; i < 4; i++) v |= uint32_t(data_[pos_ + i]) << (8 * i);
        pos_ += 4;
        return v;
    }
    uint64_t u64le() {
        need(8);
        uint64_t v = 0;
        for (int i = 0; i < 8; i++) v |= uint64_t(data_[pos_ + i]) << (8 * i);
        pos_ += 8;
        return v;
    }
    Bytes take(size_t n) {
        need(n);
        Bytes out(data_ + pos_, data_ + pos_ + n);
        pos_ += n;
        return out;
    }
    // Length-delimited field with a 4-byte little-endian prefix.
    Bytes field() {
        uint32_t n = u32le();
        return take(n);
    }

private:
    void need(size_t n) const {
        if (size_ - pos_ < n) throw Error(Errc::malformed_input, "truncated input");
    }
    const uint8_t* data_;
    size_t size_;
    size_t pos_ = 0;
};

inline void append_field(Bytes& out, const Bytes& b) {
    append_u32le(out, uint32_t(b.size()));
    append(out, b);
}

inline std::string to_hex(const Bytes& b) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(b.size() * 2);
    for (uint8_t x : b) {
        s.push_back(digits[x >> 4]);
        s.push_back(digits[x & 15]);
    }
    return s;
}

inline Bytes from_hex(std::string_view s) {
    auto nib = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (s.size() % 2) throw Error(Errc::malformed_input, "odd hex length");
    Bytes out(s.size() / 2);
    for (size_t i = 0; i < out.size(); i++) {
        int hi = nib(s[2 * i]), lo = nib(s[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error(Errc::malformed_input, "bad hex digit");
        out[i] = uint8_t(hi << 4 | lo);
    }
    return out;
}

// RFC 4648 base64url without padding; used for binary fields in wire maps.
inline std::string base64url_encode(const Bytes& in) {
    static const char* tab = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789-_";
    std::string out;
    out.reserve((in.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= in.size(); i += 3) {
        uint32_t v = in[i] << 16 | in[i + 1] << 8 | in[i + 2];
        out.push_back(tab[v >> 18 & 63]);
        out.push_back(tab[v >> 12 & 63]);
        out.push_back(tab[v >> 6 & 63]);
        out.push_back(tab[v & 63]);
    }
    if (i + 1 == in.size()) {
        uint32_t v = in[i] << 16;
        out.push_back(tab[v >> 18 & 63]);
        out.push_back(tab[v >> 12 & 63]);
    } else if (i + 2 == in.size()) {
        uint32_t v = in[i] << 16 | in[i + 1] << 8;
        out.push_back(tab[v >> 18 & 63]);
        out.push_back(tab[v >> 12 & 63]);
        out.push_back(tab[v >> 6 & 63]);
    }
    return out;
}

inline Bytes base64url_decode(std::string_view s) {
    auto val = [](char c) -> int {
        if (c >= 'A' && c <= 'Z') return c - 'A';
        if (c >= 'a' && c <= 'z') return c - 'a' + 26;
        if (c >= '0' && c <= '9') return c - '0' + 52;
        if (c == '-') return 62;
        if (c == '_') return 63;
        return -1;
    };
    while (!s.empty() && s.back() == '=') s.remove_suffix(1);
    if (s.size() % 4 == 1) throw Error(Errc::malformed_input, "bad base64url length");
    Bytes out;
    out.reserve(s.size() * 3 / 4);
    uint32_t buf = 0;
    int nbits = 0;
    for (char c : s) {
        int v = val(c);
        if (v < 0) throw Error(Errc::malformed_input, "bad base64url digit");
        buf = buf << 6 | uint32_t(v);
        nbits += 6;
        if (nbits >= 8) {
            nbits -= 8;
            out.push_back(uint8_t(buf >> nbits));
        }
    }
    return out;
}

// Randomness sources. Protocol code takes Rng& so tests can pin seeds while
// production paths use the OS-backed source.
class Rng {
public:
    virtual ~Rng() = default;
    virtual void fill(uint8_t* p, size_t n) = 0;

    Bytes bytes(size_t n) {
        Bytes b(n);
        if (n) fill(b.data(), n);
        return b;
    }
    uint64_t u64() {
        uint8_t b[8];
        fill(b, 8);
        uint64_t v = 0;
        for (int i = 0; i < 8; i++) v |= uint64_t(b[i]) << (8 * i);
        return v;
    }
    // Uniform draw in [0, n) by rejection.
    uint64_t below(uint64_t n) {
        if (n == 0) throw Error(Errc::malformed_input, "below(0)");
        uint64_t lim = UINT64_MAX - UINT64_MAX % n;
        uint64_t v;
        do {
            v = u64();
        } while (v >= lim);
        return v % n;
    }
    uint64_t range(uint64_t lo, uint64_t hi) {  // inclusive bounds
        if (hi < lo) throw Error(Errc::malformed_input, "bad range");
        return lo + below(hi - lo + 1);
    }
    double unit() { return double(u64() >> 11) * 0x1p-53; }
};

// xoshiro256** with splitmix64 seeding; stable across platforms.
class SeededRng : public Rng {
public:
    explicit SeededRng(uint64_t seed) {
        uint64_t x = seed;
        for (auto& si : s_) {
            x += 0x9e3779b97f4a7c15ULL;
            uint64_t z = x;
            z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
            z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
            si = z ^ (z >> 31);
        }
    }
    void fill(uint8_t* p, size_t n) override {
        while (n >= 8) {
            uint64_t v = next();
            std::memcpy(p, &v, 8);
            p += 8;
            n -= 8;
        }
        if (n) {
            uint64_t v = next();
            std::memcpy(p, &v, n);
        }
    }

private:
    static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    uint64_t next() {
        uint64_t result = rotl(s_[1] * 5, 7) * 9;
        uint64_t t = s_[1] << 17;
        s_[2] ^= s_[0];
        s_[3] ^= s_[1];
        s_[1] ^= s_[2];
        s_[0] ^= s_[3];
        s_[2] ^= t;
        s_[3] = rotl(s_[3], 45);
        return result;
    }
    std::array<uint64_t, 4> s_;
};

class SystemRng : public Rng {
public:
    void fill(uint8_t* p, size_t n) override {
        if (n == 0) return;
        if (RAND_bytes(p, int(n)) != 1) throw Error(Errc::io_error, "system rng failure");
    }
};

inline SystemRng& system_rng() {
    static SystemRng r;
    return r;
}

}  // namespace sps
