#pragma once

#include <openssl/evp.h>

#include <memory>

#include "sps/common.hpp"

namespace sps::crypto {

inline constexpr size_t sym_key_len = 32;
inline constexpr size_t sym_nonce_len = 12;
inline constexpr size_t sym_tag_len = 16;

namespace detail {
struct CipherCtxDeleter {
    void operator()(EVP_CIPHER_CTX* c) const { EVP_CIPHER_CTX_free(c); }
};
using CipherCtx = std::unique_ptr<EVP_CIPHER_CTX, CipherCtxDeleter>;
}  // namespace detail

// AES-256-GCM. Output layout: nonce(12) || ciphertext || tag(16).
inline Bytes sym_encrypt(const Bytes& key, const Bytes& plaintext, Rng& rng) {
    if (key.size() != sym_key_len) throw Error(Errc::malformed_input, "symmetric key must be 32 bytes");
    Bytes nonce = rng.bytes(sym_nonce_len);
    detail::CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx || EVP_EncryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), nonce.data()) != 1)
        throw Error(Errc::io_error, "cipher init failure");
    Bytes out = nonce;
    out.resize(sym_nonce_len + plaintext.size() + sym_tag_len);
    int n = 0;
    if (EVP_EncryptUpdate(ctx.get(), out.data() + sym_nonce_len, &n, plaintext.data(), int(plaintext.size())) != 1)
        throw Error(Errc::io_error, "encrypt failure");
    int fin = 0;
    if (EVP_EncryptFinal_ex(ctx.get(), out.data() + sym_nonce_len + n, &fin) != 1)
        throw Error(Errc::io_error, "encrypt finalize failure");
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_GET_TAG, sym_tag_len,
                            out.data() + sym_nonce_len + plaintext.size()) != 1)
        throw Error(Errc::io_error, "tag extraction failure");
    return out;
}

inline Bytes sym_decrypt(const Bytes& key, const Bytes& blob) {
    if (key.size() != sym_key_len) throw Error(Errc::malformed_input, "symmetric key must be 32 bytes");
    if (blob.size() < sym_nonce_len + sym_tag_len) throw Error(Errc::malformed_input, "ciphertext too short");
    size_t ct_len = blob.size() - sym_nonce_len - sym_tag_len;
    detail::CipherCtx ctx(EVP_CIPHER_CTX_new());
    if (!ctx || EVP_DecryptInit_ex(ctx.get(), EVP_aes_256_gcm(), nullptr, key.data(), blob.data()) != 1)
        throw Error(Errc::io_error, "cipher init failure");
    Bytes out(ct_len);
    int n = 0;
    if (ct_len &&
        EVP_DecryptUpdate(ctx.get(), out.data(), &n, blob.data() + sym_nonce_len, int(ct_len)) != 1)
        throw Error(Errc::decrypt_failed, "decrypt failure");
    Bytes tagbuf(blob.end() - sym_tag_len, blob.end());
    if (EVP_CIPHER_CTX_ctrl(ctx.get(), EVP_CTRL_GCM_SET_TAG, sym_tag_len, tagbuf.data()) != 1)
        throw Error(Errc::io_error, "tag set failure");
    int fin = 0;
    if (EVP_DecryptFinal_ex(ctx.get(), out.data() + n, &fin) != 1)
        throw Error(Errc::decrypt_failed, "authentication failure");
    return out;
}

}  // namespace sps::crypto
