#pragma once

#include <algorithm>
#include <map>
#include <vector>

#include "sps/common.hpp"

namespace sps {

struct ResultEntry {
    Bytes key;
    double score = 0.0;

    bool operator==(const ResultEntry&) const = default;
};

// Bounded top-k score table. The replacement victim is the entry ranked last
// under (score descending, key ascending); replacement needs a strictly
// greater score, so equal-scored late arrivals never evict earlier ones.
class ResultDict {
   public:
    ResultDict() = default;
    explicit ResultDict(uint32_t k_c) : k_c_(k_c) {}

    void insert(const Bytes& key, double sim) {
        auto it = entries_.find(key);
        if (it != entries_.end()) {
            it->second = std::max(it->second, sim);
            return;
        }
        if (entries_.size() < k_c_) {
            entries_.emplace(key, sim);
            return;
        }
        if (entries_.empty()) return;
        auto worst = entries_.begin();
        for (auto i = std::next(entries_.begin()); i != entries_.end(); ++i)
            if (i->second <= worst->second) worst = i;  // ties fall to the largest key
        if (sim > worst->second) {
            entries_.erase(worst);
            entries_.emplace(key, sim);
        }
    }

    size_t size() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    uint32_t capacity() const { return k_c_; }
    const std::map<Bytes, double>& entries() const { return entries_; }

    std::vector<ResultEntry> ranked() const {
        std::vector<ResultEntry> out;
        out.reserve(entries_.size());
        for (const auto& [key, score] : entries_) out.push_back(ResultEntry{key, score});
        std::sort(out.begin(), out.end(), [](const ResultEntry& a, const ResultEntry& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.key < b.key;
        });
        return out;
    }

   private:
    uint32_t k_c_ = 1;
    std::map<Bytes, double> entries_;
};

}  // namespace sps
