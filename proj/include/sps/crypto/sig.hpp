#pragma once

#include <openssl/evp.h>
#include <openssl/rsa.h>
#include <openssl/x509.h>

#include <memory>

#include "sps/common.hpp"

namespace sps::crypto {

enum class SigScheme : uint8_t { ed25519 = 1, rsa3096 = 2 };

inline const char* sig_scheme_name(SigScheme s) {
    return s == SigScheme::ed25519 ? "ed25519" : "rsa3096";
}

inline SigScheme sig_scheme_from_name(std::string_view name) {
    if (name == "ed25519") return SigScheme::ed25519;
    if (name == "rsa3096") return SigScheme::rsa3096;
    throw Error(Errc::unsupported, "unknown signature scheme");
}

struct SignatureKeyPair {
    SigScheme scheme = SigScheme::ed25519;
    Bytes public_key;   // ed25519: 32 raw bytes; rsa3096: DER SubjectPublicKeyInfo
    Bytes private_key;  // ed25519: 32 raw bytes; rsa3096: DER PKCS#8
};

namespace detail {

struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
    void operator()(EVP_PKEY_CTX* c) const { EVP_PKEY_CTX_free(c); }
    void operator()(EVP_MD_CTX* c) const { EVP_MD_CTX_free(c); }
};
template <class T>
using Ossl = std::unique_ptr<T, PkeyDeleter>;

inline Ossl<EVP_PKEY> load_private(const SignatureKeyPair& kp) {
    if (kp.scheme == SigScheme::ed25519) {
        EVP_PKEY* p = EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, kp.private_key.data(),
                                                   kp.private_key.size());
        if (!p) throw Error(Errc::malformed_input, "bad ed25519 private key");
        return Ossl<EVP_PKEY>(p);
    }
    const uint8_t* ptr = kp.private_key.data();
    EVP_PKEY* p = d2i_AutoPrivateKey(nullptr, &ptr, long(kp.private_key.size()));
    if (!p) throw Error(Errc::malformed_input, "bad rsa private key");
    return Ossl<EVP_PKEY>(p);
}

inline Ossl<EVP_PKEY> load_public(SigScheme scheme, const Bytes& pub) {
    if (scheme == SigScheme::ed25519) {
        EVP_PKEY* p = EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, pub.data(), pub.size());
        if (!p) throw Error(Errc::malformed_input, "bad ed25519 public key");
        return Ossl<EVP_PKEY>(p);
    }
    const uint8_t* ptr = pub.data();
    EVP_PKEY* p = d2i_PUBKEY(nullptr, &ptr, long(pub.size()));
    if (!p) throw Error(Errc::malformed_input, "bad rsa public key");
    return Ossl<EVP_PKEY>(p);
}

}  // namespace detail

inline SignatureKeyPair sig_keygen(SigScheme scheme) {
    using namespace detail;
    SignatureKeyPair kp;
    kp.scheme = scheme;
    if (scheme == SigScheme::ed25519) {
        Ossl<EVP_PKEY_CTX> ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_ED25519, nullptr));
        EVP_PKEY* raw = nullptr;
        if (!ctx || EVP_PKEY_keygen_init(ctx.get()) != 1 || EVP_PKEY_keygen(ctx.get(), &raw) != 1)
            throw Error(Errc::io_error, "ed25519 keygen failure");
        Ossl<EVP_PKEY> key(raw);
        size_t n = 32;
        kp.public_key.resize(n);
        kp.private_key.resize(n);
        if (EVP_PKEY_get_raw_public_key(key.get(), kp.public_key.data(), &n) != 1 || n != 32 ||
            EVP_PKEY_get_raw_private_key(key.get(), kp.private_key.data(), &n) != 1 || n != 32)
            throw Error(Errc::io_error, "ed25519 key export failure");
        return kp;
    }
    Ossl<EVP_PKEY_CTX> ctx(EVP_PKEY_CTX_new_id(EVP_PKEY_RSA, nullptr));
    EVP_PKEY* raw = nullptr;
    if (!ctx || EVP_PKEY_keygen_init(ctx.get()) != 1 ||
        EVP_PKEY_CTX_set_rsa_keygen_bits(ctx.get(), 3096) != 1 || EVP_PKEY_keygen(ctx.get(), &raw) != 1)
        throw Error(Errc::io_error, "rsa keygen failure");
    Ossl<EVP_PKEY> key(raw);
    int pub_len = i2d_PUBKEY(key.get(), nullptr);
    int priv_len = i2d_PrivateKey(key.get(), nullptr);
    if (pub_len <= 0 || priv_len <= 0) throw Error(Errc::io_error, "rsa key export failure");
    kp.public_key.resize(size_t(pub_len));
    kp.private_key.resize(size_t(priv_len));
    uint8_t* p = kp.public_key.data();
    i2d_PUBKEY(key.get(), &p);
    p = kp.private_key.data();
    i2d_PrivateKey(key.get(), &p);
    return kp;
}

inline Bytes sign(const SignatureKeyPair& kp, const Bytes& msg) {
    using namespace detail;
    auto key = load_private(kp);
    Ossl<EVP_MD_CTX> ctx(EVP_MD_CTX_new());
    const EVP_MD* md = kp.scheme == SigScheme::ed25519 ? nullptr : EVP_sha256();
    if (!ctx || EVP_DigestSignInit(ctx.get(), nullptr, md, nullptr, key.get()) != 1)
        throw Error(Errc::io_error, "sign init failure");
    size_t n = 0;
    if (EVP_DigestSign(ctx.get(), nullptr, &n, msg.data(), msg.size()) != 1)
        throw Error(Errc::io_error, "sign sizing failure");
    Bytes sig(n);
    if (EVP_DigestSign(ctx.get(), sig.data(), &n, msg.data(), msg.size()) != 1)
        throw Error(Errc::io_error, "sign failure");
    sig.resize(n);
    return sig;
}

// Self-describing verification key: one scheme byte followed by the raw
// public key. This is the form carried inside indices and messages.
inline Bytes vk_encode(const SignatureKeyPair& kp) {
    Bytes out{static_cast<uint8_t>(kp.scheme)};
    append(out, kp.public_key);
    return out;
}

// Returns false on any mismatch or malformed input; never throws on bad signatures.
inline bool verify(SigScheme scheme, const Bytes& pub, const Bytes& msg, const Bytes& sig) {
    using namespace detail;
    try {
        auto key = load_public(scheme, pub);
        Ossl<EVP_MD_CTX> ctx(EVP_MD_CTX_new());
        const EVP_MD* md = scheme == SigScheme::ed25519 ? nullptr : EVP_sha256();
        if (!ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, md, nullptr, key.get()) != 1) return false;
        return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), msg.data(), msg.size()) == 1;
    } catch (const Error&) {
        return false;
    }
}

inline bool vk_verify(const Bytes& vk, const Bytes& msg, const Bytes& sig) {
    if (vk.size() < 2) return false;
    if (vk[0] != static_cast<uint8_t>(SigScheme::ed25519) &&
        vk[0] != static_cast<uint8_t>(SigScheme::rsa3096))
        return false;
    return verify(static_cast<SigScheme>(vk[0]), Bytes(vk.begin() + 1, vk.end()), msg, sig);
}

}  // namespace sps::crypto
