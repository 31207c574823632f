#pragma once

#include <utility>
#include <vector>

#include "sps/common.hpp"
#include "sps/index/index_gen.hpp"
#include "sps/index/merge.hpp"

namespace sps {

namespace index_format {
inline constexpr uint8_t magic[4] = {'S', 'P', 'S', 'I'};
inline constexpr uint8_t version = 1;
inline constexpr uint8_t type_plain = 1;
inline constexpr uint8_t type_hier = 2;
inline constexpr uint8_t type_merged = 3;
}  // namespace index_format

namespace detail {

inline void write_index_header(Bytes& out, uint8_t type) {
    out.insert(out.end(), index_format::magic, index_format::magic + 4);
    out.push_back(index_format::version);
    out.push_back(type);
}

inline uint8_t read_index_header(ByteReader& r) {
    Bytes got = r.take(4);
    if (!std::equal(got.begin(), got.end(), index_format::magic))
        throw Error(Errc::malformed_input, "bad index magic");
    if (r.u8() != index_format::version) throw Error(Errc::malformed_input, "bad index version");
    return r.u8();
}

inline void write_block(Bytes& out, const Bytes& pk, const Bytes& r, const Bytes& sigma) {
    append_field(out, pk);
    append_field(out, r);
    append_field(out, sigma);
}

inline void write_nodes(Bytes& out, const Dendrogram& tree, const CbfDictionary& dict) {
    append_u32le(out, uint32_t(tree.nodes.size()));
    append_u32le(out, tree.root);
    for (const auto& node : tree.nodes) {
        append_field(out, node.id);
        out.push_back(node.leaf ? 1 : 0);
        append_u32le(out, node.left);
        append_u32le(out, node.right);
    }
    for (const auto& node : tree.nodes) append_field(out, dict.at(node.id).serialize());
}

inline std::pair<Dendrogram, CbfDictionary> read_nodes(ByteReader& r) {
    Dendrogram tree;
    uint32_t count = r.u32le();
    tree.root = r.u32le();
    tree.nodes.reserve(count);
    for (uint32_t i = 0; i < count; i++) {
        DendrogramNode node;
        node.id = r.field();
        uint8_t leaf = r.u8();
        if (leaf > 1) throw Error(Errc::malformed_input, "bad leaf flag");
        node.leaf = leaf == 1;
        node.left = r.u32le();
        node.right = r.u32le();
        tree.nodes.push_back(std::move(node));
    }
    CbfDictionary dict;
    uint64_t len = 0;
    for (uint32_t i = 0; i < count; i++) {
        CustomizedBloomFilter cbf = CustomizedBloomFilter::deserialize(r.field());
        if (i == 0)
            len = cbf.size();
        else if (cbf.size() != len)
            throw Error(Errc::malformed_input, "mixed filter lengths in index");
        if (!dict.emplace(tree.nodes[i].id, std::move(cbf)).second)
            throw Error(Errc::malformed_input, "duplicate node id in index");
    }
    return {std::move(tree), std::move(dict)};
}

}  // namespace detail

inline Bytes serialize_plain(const EncryptedIndex& idx) {
    Bytes out;
    detail::write_index_header(out, index_format::type_plain);
    append_u32le(out, 1);
    detail::write_block(out, idx.pk, idx.r, idx.sigma);
    Dendrogram flat;
    for (const auto& [id, cbf] : idx.dict) {
        DendrogramNode node;
        node.id = id;
        flat.nodes.push_back(std::move(node));
    }
    flat.root = no_child;
    detail::write_nodes(out, flat, idx.dict);
    return out;
}

inline EncryptedIndex parse_plain(const Bytes& b) {
    ByteReader r(b);
    if (detail::read_index_header(r) != index_format::type_plain)
        throw Error(Errc::malformed_input, "not a plain index");
    if (r.u32le() != 1) throw Error(Errc::malformed_input, "plain index block count");
    EncryptedIndex idx;
    idx.pk = r.field();
    idx.r = r.field();
    idx.sigma = r.field();
    auto [tree, dict] = detail::read_nodes(r);
    if (!r.done()) throw Error(Errc::malformed_input, "index trailing bytes");
    for (const auto& node : tree.nodes)
        if (!node.leaf) throw Error(Errc::malformed_input, "plain index with internal nodes");
    idx.dict = std::move(dict);
    return idx;
}

inline Bytes serialize_hier(const HierarchicalIndex& idx, const Bytes& sigma) {
    Bytes out;
    detail::write_index_header(out, index_format::type_hier);
    append_u32le(out, 1);
    detail::write_block(out, idx.pk, idx.r, sigma);
    detail::write_nodes(out, idx.tree, idx.dict);
    return out;
}

inline std::pair<HierarchicalIndex, Bytes> parse_hier(const Bytes& b) {
    ByteReader r(b);
    if (detail::read_index_header(r) != index_format::type_hier)
        throw Error(Errc::malformed_input, "not a hierarchical index");
    if (r.u32le() != 1) throw Error(Errc::malformed_input, "hierarchical index block count");
    HierarchicalIndex idx;
    idx.pk = r.field();
    idx.r = r.field();
    Bytes sigma = r.field();
    auto [tree, dict] = detail::read_nodes(r);
    if (!r.done()) throw Error(Errc::malformed_input, "index trailing bytes");
    tree.validate();
    idx.tree = std::move(tree);
    idx.dict = std::move(dict);
    return {std::move(idx), std::move(sigma)};
}

inline Bytes serialize_merged(const MergedIndex& idx) {
    Bytes out;
    detail::write_index_header(out, index_format::type_merged);
    append_u32le(out, uint32_t(idx.upsilon.size()));
    for (const auto& entry : idx.upsilon) detail::write_block(out, entry.pk, entry.r, Bytes{});
    detail::write_nodes(out, idx.tree, idx.dict);
    return out;
}

inline MergedIndex parse_merged(const Bytes& b) {
    ByteReader r(b);
    if (detail::read_index_header(r) != index_format::type_merged)
        throw Error(Errc::malformed_input, "not a merged index");
    MergedIndex idx;
    uint32_t blocks = r.u32le();
    if (blocks == 0) throw Error(Errc::malformed_input, "merged index without provenance");
    for (uint32_t i = 0; i < blocks; i++) {
        UpsilonEntry entry;
        entry.pk = r.field();
        entry.r = r.field();
        r.field();
        idx.upsilon.push_back(std::move(entry));
    }
    auto [tree, dict] = detail::read_nodes(r);
    if (!r.done()) throw Error(Errc::malformed_input, "index trailing bytes");
    tree.validate();
    for (const auto& node : tree.nodes) {
        if (!node.leaf) continue;
        auto [pseudonym, rr] = split_leaf_key(node.id);
        bool known = false;
        for (const auto& entry : idx.upsilon) known = known || entry.r == rr;
        if (!known) throw Error(Errc::malformed_input, "leaf provenance missing from upsilon");
    }
    idx.tree = std::move(tree);
    idx.dict = std::move(dict);
    return idx;
}

}  // namespace sps
