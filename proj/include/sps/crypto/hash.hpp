#pragma once

#include <openssl/core_names.h>
#include <openssl/evp.h>
#include <openssl/params.h>

#include <cstring>
#include <memory>

#include "sps/common.hpp"

namespace sps::crypto {

inline Bytes sha256(const Bytes& data) {
    Bytes out(32);
    unsigned int n = 0;
    if (EVP_Digest(data.data(), data.size(), out.data(), &n, EVP_sha256(), nullptr) != 1 || n != 32)
        throw Error(Errc::io_error, "sha256 failure");
    return out;
}

namespace detail {

struct MacDeleter {
    void operator()(EVP_MAC* m) const { EVP_MAC_free(m); }
    void operator()(EVP_MAC_CTX* c) const { EVP_MAC_CTX_free(c); }
};

inline EVP_MAC* hmac_impl() {
    static std::unique_ptr<EVP_MAC, MacDeleter> mac(EVP_MAC_fetch(nullptr, "HMAC", nullptr));
    return mac.get();
}

}  // namespace detail

inline Bytes hmac_sha256(const Bytes& key, const Bytes& data) {
    std::unique_ptr<EVP_MAC_CTX, detail::MacDeleter> ctx(EVP_MAC_CTX_new(detail::hmac_impl()));
    char digest[] = "SHA256";
    OSSL_PARAM params[] = {
        OSSL_PARAM_construct_utf8_string(OSSL_MAC_PARAM_DIGEST, digest, 0),
        OSSL_PARAM_construct_end(),
    };
    Bytes out(32);
    size_t n = 0;
    if (!ctx || EVP_MAC_init(ctx.get(), key.data(), key.size(), params) != 1 ||
        EVP_MAC_update(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_MAC_final(ctx.get(), out.data(), &n, out.size()) != 1 || n != 32)
        throw Error(Errc::io_error, "hmac failure");
    return out;
}

// Domain-separation tags. Every hash use in the protocol goes through one of
// the tagged helpers below so inputs can never collide across roles.
namespace tag {
inline const char* h0 = "sps/h0";
inline const char* h1 = "sps/h1";
inline const char* h2 = "sps/h2";
inline const char* prf = "sps/prf";
inline const char* kdf_gt = "sps/kdf/gt";
inline const char* bf = "sps/bf";
inline const char* cbf = "sps/cbf";
inline const char* abe_attr = "sps/abe/attr";
inline const char* fingerprint = "sps/config";
}  // namespace tag

inline Bytes tagged(const char* tag, const Bytes& data) {
    Bytes in = to_bytes(tag);
    in.push_back(0);
    append(in, data);
    return in;
}

// h0(a, b): binds a signing public key to an index nonce.
inline Bytes h0(const Bytes& a, const Bytes& b) {
    Bytes in;
    append_field(in, a);
    append(in, b);
    return sha256(tagged(tag::h0, in));
}

// h2(t, m): maps a fresh nonce plus a pairing-derived value to an attribute id.
inline Bytes h2(const Bytes& t, const Bytes& m) {
    Bytes in;
    append_field(in, t);
    append(in, m);
    return sha256(tagged(tag::h2, in));
}

using PrfKey = Bytes;  // 32 bytes

inline constexpr size_t prf_key_len = 32;

inline PrfKey prf_keygen(Rng& rng) { return rng.bytes(prf_key_len); }

// Keyed PRF F(key, data) -> 32 bytes.
inline Bytes prf(const PrfKey& key, const Bytes& data) {
    if (key.size() != prf_key_len) throw Error(Errc::malformed_input, "prf key must be 32 bytes");
    return hmac_sha256(key, tagged(tag::prf, data));
}

// Derives a 32-byte symmetric key from a serialized target-group element.
inline Bytes kdf_gt(const Bytes& gt_bytes) { return sha256(tagged(tag::kdf_gt, gt_bytes)); }

inline Bytes fingerprint_hash(const Bytes& canonical) { return sha256(tagged(tag::fingerprint, canonical)); }

}  // namespace sps::crypto
