#pragma once

#include <chrono>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "sps/config.hpp"
#include "sps/csp/search.hpp"
#include "sps/hospital/hospital.hpp"
#include "sps/index/merge.hpp"
#include "sps/tools/synth.hpp"

namespace sps {

struct BenchReport {
    size_t hospitals = 0;
    size_t patients_per_hospital = 0;
    size_t snp_universe = 0;
    size_t queries = 0;
    bool fast_merge = true;
    double index_build_ms = 0;
    double merge_build_ms = 0;
    double sequential_search_ms = 0;
    double merged_search_ms = 0;
    std::vector<std::string> annotations;

    std::string to_text() const {
        std::ostringstream out;
        out.precision(3);
        out << std::fixed;
        out << "bench: " << hospitals << " hospitals x " << patients_per_hospital
            << " patients, " << snp_universe << " snp universe, " << queries << " queries\n";
        out << "  index build (all hospitals): " << index_build_ms << " ms\n";
        out << "  merged index build (" << (fast_merge ? "fast" : "full")
            << "): " << merge_build_ms << " ms\n";
        out << "  per-index search, all queries: " << sequential_search_ms << " ms\n";
        out << "  merged search, all queries:    " << merged_search_ms << " ms\n";
        for (const std::string& note : annotations) out << "  note: " << note << "\n";
        return out.str();
    }
};

namespace detail {

class Stopwatch {
   public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double ms() const {
        auto d = std::chrono::steady_clock::now() - start_;
        return std::chrono::duration<double, std::milli>(d).count();
    }

   private:
    std::chrono::steady_clock::time_point start_;
};

}  // namespace detail

// Timing comparison of per-index search against merged search on synthetic
// cohorts. Numbers and trend notes are informational only.
inline BenchReport bench_run(size_t hospitals, size_t patients, size_t snp_universe,
                             size_t queries, uint64_t seed, const SystemConfig& cfg,
                             bool fast_merge = true) {
    if (hospitals < 2 || patients < 1 || snp_universe < 1 || queries < 1)
        throw Error(Errc::malformed_input, "bench needs >=2 hospitals and >=1 of everything else");

    BenchReport report;
    report.hospitals = hospitals;
    report.patients_per_hospital = patients;
    report.snp_universe = snp_universe;
    report.queries = queries;
    report.fast_merge = fast_merge;

    SnpStats stats = synthetic_stats(snp_universe, seed);
    SynthParams no_asi;
    no_asi.asi_groups_min = 0;
    no_asi.asi_groups_max = 0;

    SeededRng rng(seed ^ 0x62656e6368);
    crypto::PrfKey key = crypto::prf_keygen(rng);
    SearchConfig scfg = cfg.search();

    std::vector<std::vector<PatientRecord>> cohorts;
    std::vector<HierarchicalIndex> indices;
    std::vector<Bytes> sigmas;
    {
        detail::Stopwatch clock;
        for (size_t h = 0; h < hospitals; h++) {
            cohorts.push_back(gen_synthetic(stats, patients, seed + h + 1, no_asi));
            Preprocessed pre = preprocess(cohorts.back(), cfg.bf_capacity, cfg.bf_fp);
            crypto::SignatureKeyPair keys = crypto::sig_keygen(crypto::SigScheme::ed25519);
            EncryptedIndex enc = index_gen(key, pre.dict_bf, keys, cfg.cbf(), rng);
            sigmas.push_back(enc.sigma);
            indices.push_back(build_hierarchical(enc, cfg.mds_dim));
        }
        report.index_build_ms = clock.ms();
    }

    std::vector<Query> query_set;
    for (size_t i = 0; i < queries; i++) {
        const auto& cohort = cohorts[rng.below(hospitals)];
        const PatientRecord& rec = cohort[rng.below(cohort.size())];
        query_set.push_back(query_gen(key, rec.snps, 0.7, 5, sigmas, cfg.bf_capacity, cfg.bf_fp));
    }

    size_t sequential_hits = 0;
    {
        detail::Stopwatch clock;
        for (const Query& q : query_set) {
            ResultDict best(q.k_c);
            for (const HierarchicalIndex& idx : indices)
                if (auto res = search(idx, q, scfg))
                    for (const auto& [key, score] : res->entries())
                        best.insert(concat(key, idx.r), score);
            sequential_hits += best.size();
        }
        report.sequential_search_ms = clock.ms();
    }

    MergedIndex merged;
    {
        detail::Stopwatch clock;
        merged = fast_merge ? index_merge_fast(indices, cfg.mds_dim)
                            : index_merge_full(indices, cfg.mds_dim);
        report.merge_build_ms = clock.ms();
    }

    size_t merged_hits = 0;
    {
        detail::Stopwatch clock;
        for (const Query& q : query_set)
            if (auto res = search_merged(merged, q, scfg)) merged_hits += res->size();
        report.merged_search_ms = clock.ms();
    }

    {
        std::ostringstream note;
        note.precision(2);
        note << std::fixed;
        if (report.merged_search_ms < report.sequential_search_ms)
            note << "merged search ran " << report.sequential_search_ms / report.merged_search_ms
                 << "x faster than per-index search at " << hospitals << " indices";
        else
            note << "merged search did not beat per-index search at " << hospitals
                 << " indices (" << report.merged_search_ms / report.sequential_search_ms
                 << "x slower)";
        report.annotations.push_back(note.str());
    }
    if (sequential_hits != merged_hits)
        report.annotations.push_back("result volume differs: per-index " +
                                     std::to_string(sequential_hits) + " vs merged " +
                                     std::to_string(merged_hits));
    return report;
}

}  // namespace sps
