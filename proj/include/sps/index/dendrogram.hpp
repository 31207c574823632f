#pragma once

#include <cstdint>
#include <vector>

#include "sps/common.hpp"

namespace sps {

inline constexpr uint32_t no_child = 0xffffffff;

struct DendrogramNode {
    Bytes id;
    bool leaf = true;
    uint32_t left = no_child;
    uint32_t right = no_child;
};

// Pool-backed full binary tree; `root` indexes into `nodes`.
struct Dendrogram {
    std::vector<DendrogramNode> nodes;
    uint32_t root = no_child;

    size_t leaf_count() const {
        size_t n = 0;
        for (const auto& node : nodes)
            if (node.leaf) n++;
        return n;
    }

    std::vector<Bytes> leaf_ids() const {
        std::vector<Bytes> out;
        for (const auto& node : nodes)
            if (node.leaf) out.push_back(node.id);
        return out;
    }

    void validate() const {
        if (nodes.empty() || root >= nodes.size())
            throw Error(Errc::malformed_input, "dendrogram root out of range");
        for (const auto& node : nodes) {
            if (node.leaf) {
                if (node.left != no_child || node.right != no_child)
                    throw Error(Errc::malformed_input, "leaf with children");
            } else {
                if (node.left >= nodes.size() || node.right >= nodes.size())
                    throw Error(Errc::malformed_input, "child index out of range");
            }
        }
    }
};

}  // namespace sps
