#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "sps/common.hpp"
#include "sps/hospital/hospital.hpp"

namespace sps {

inline void write_file(const std::string& path, const Bytes& data) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(Errc::io_error, "cannot write " + path);
    out.write(reinterpret_cast<const char*>(data.data()), std::streamsize(data.size()));
    if (!out) throw Error(Errc::io_error, "short write: " + path);
}

inline Bytes read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::io_error, "cannot read " + path);
    Bytes data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return data;
}

namespace detail {

inline void expect_magic(ByteReader& in, const char* magic, const char* kind) {
    Bytes got;
    for (int i = 0; i < 4; i++) got.push_back(in.u8());
    if (got != to_bytes(magic)) throw Error(Errc::malformed_input, std::string(kind) + ": bad magic");
}

}  // namespace detail

inline Bytes serialize_hospital_keys(const HospitalKeyBundle& b) {
    Bytes out = to_bytes("SPSK");
    out.push_back(1);
    append_field(out, to_bytes(b.id));
    append_field(out, b.k_alpha);
    append_field(out, b.k_beta);
    append_field(out, b.k_i.to_bytes());
    out.push_back(static_cast<uint8_t>(b.sig_keys.scheme));
    append_field(out, b.sig_keys.public_key);
    append_field(out, b.sig_keys.private_key);
    append_field(out, b.abe_keys.pk.serialize());
    append_field(out, b.abe_keys.mk.serialize());
    return out;
}

inline HospitalKeyBundle parse_hospital_keys(const Bytes& raw) {
    ByteReader in(raw);
    detail::expect_magic(in, "SPSK", "hospital key file");
    if (in.u8() != 1) throw Error(Errc::unsupported, "hospital key file: unknown version");
    HospitalKeyBundle b;
    b.id = to_string(in.field());
    b.k_alpha = in.field();
    b.k_beta = in.field();
    b.k_i = crypto::Scalar::from_bytes(in.field());
    uint8_t scheme = in.u8();
    if (scheme != 1 && scheme != 2)
        throw Error(Errc::malformed_input, "hospital key file: bad signature scheme");
    b.sig_keys.scheme = static_cast<crypto::SigScheme>(scheme);
    b.sig_keys.public_key = in.field();
    b.sig_keys.private_key = in.field();
    b.abe_keys.pk = AbePublicKey::deserialize(in.field());
    b.abe_keys.mk = AbeMasterKey::deserialize(in.field());
    if (!in.done()) throw Error(Errc::malformed_input, "hospital key file: trailing bytes");
    return b;
}

inline Bytes serialize_prf_key(const crypto::PrfKey& key) {
    Bytes out = to_bytes("SPSP");
    out.push_back(1);
    append_field(out, key);
    return out;
}

inline crypto::PrfKey parse_prf_key(const Bytes& raw) {
    ByteReader in(raw);
    detail::expect_magic(in, "SPSP", "prf key file");
    if (in.u8() != 1) throw Error(Errc::unsupported, "prf key file: unknown version");
    crypto::PrfKey key = in.field();
    if (!in.done()) throw Error(Errc::malformed_input, "prf key file: trailing bytes");
    return key;
}

// One authorization received by a client: the shared lookup key, the grantor's
// record key, and a signature usable against that grantor's index.
struct ClientGrant {
    std::string hospital_id;
    crypto::PrfKey k;
    Bytes k_beta;
    Bytes sigma;
};

struct ClientKeys {
    crypto::Scalar k_c;
    std::vector<ClientGrant> grants;
};

inline Bytes serialize_client_keys(const ClientKeys& c) {
    Bytes out = to_bytes("SPSC");
    out.push_back(1);
    append_field(out, c.k_c.to_bytes());
    append_u32le(out, uint32_t(c.grants.size()));
    for (const ClientGrant& g : c.grants) {
        append_field(out, to_bytes(g.hospital_id));
        append_field(out, g.k);
        append_field(out, g.k_beta);
        append_field(out, g.sigma);
    }
    return out;
}

inline ClientKeys parse_client_keys(const Bytes& raw) {
    ByteReader in(raw);
    detail::expect_magic(in, "SPSC", "client key file");
    if (in.u8() != 1) throw Error(Errc::unsupported, "client key file: unknown version");
    ClientKeys c;
    c.k_c = crypto::Scalar::from_bytes(in.field());
    uint32_t count = in.u32le();
    for (uint32_t i = 0; i < count; i++) {
        ClientGrant g;
        g.hospital_id = to_string(in.field());
        g.k = in.field();
        g.k_beta = in.field();
        g.sigma = in.field();
        c.grants.push_back(std::move(g));
    }
    if (!in.done()) throw Error(Errc::malformed_input, "client key file: trailing bytes");
    return c;
}

}  // namespace sps
