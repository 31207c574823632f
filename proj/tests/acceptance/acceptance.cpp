// End-to-end acceptance gate. Each criterion prints one PASS/FAIL line with
// its pinned tolerances; the process exits nonzero if any gating criterion
// fails. The final timing comparison is informational and never gates.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "sps/config.hpp"
#include "sps/csp/store.hpp"
#include "sps/tools/bench.hpp"
#include "sps/tools/oracle.hpp"
#include "sps/tools/synth.hpp"

using namespace sps;
using crypto::prf_keygen;
using crypto::PrfKey;
using crypto::sig_keygen;
using crypto::SigScheme;

namespace {

// Calibration check: filter sized for 2^21 items at 1% target.
constexpr uint64_t cal_capacity = uint64_t(1) << 21;
constexpr double cal_fp_target = 0.01;
constexpr size_t cal_probes = 100000;
constexpr double cal_fp_limit = 0.012;
constexpr size_t cal_overload_insertions = 3000000;
constexpr double cal_overload_center = 0.048;
constexpr double cal_overload_slack = 0.015;
constexpr double cal_time_limit_s = 120.0;

// Ranking agreement on a mid-sized cohort.
constexpr size_t rank_patients = 200;
constexpr size_t rank_snps = 2000;
constexpr size_t rank_queries = 50;
constexpr double rank_epsilon = 0.9;
constexpr uint32_t rank_k_c = 5;
constexpr double rank_min_agreement = 0.99;
constexpr double rank_time_limit_s = 300.0;

// Exact pruning soundness on small instances.
constexpr size_t small_instances = 500;
constexpr size_t small_max_patients = 32;
constexpr size_t small_snp_universe = 64;

// Token adjustment identity.
constexpr size_t algebra_trials = 100;
constexpr double algebra_time_limit_s = 30.0;

// Policy gate: exhaustive four-attribute sweep plus random large keysets.
constexpr size_t policy_universe = 4;
constexpr size_t policy_random_trials = 100;
constexpr size_t policy_max_keyset = 64;

// Layered annotation retrieval.
constexpr size_t asi_scenarios = 20;

// Merge equivalence.
constexpr size_t merge_hospitals = 5;
constexpr size_t merge_patients = 20;
constexpr size_t merge_queries = 50;

// Authorization gating.
constexpr size_t gate_trials = 1000;

// Timing note (non-gating).
constexpr size_t note_hospitals = 50;
constexpr size_t note_patients = 20;
constexpr size_t note_snps = 120;
constexpr size_t note_queries = 10;

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream out;
    out.precision(prec);
    out << std::fixed << v;
    return out.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    auto d = std::chrono::steady_clock::now() - t0;
    return std::chrono::duration<double>(d).count();
}

Bytes tagged_item(uint64_t tag, uint64_t i) {
    Bytes b;
    append_u64le(b, tag);
    append_u64le(b, i);
    return b;
}

std::vector<SnpPair> random_snp_set(size_t universe, size_t lo, size_t hi, Rng& rng) {
    size_t len = lo + rng.below(hi - lo + 1);
    std::set<int> picked;
    while (picked.size() < len) picked.insert(int(rng.below(universe)));
    std::vector<SnpPair> out;
    out.reserve(len);
    for (int n : picked) out.push_back(SnpPair{"rs" + std::to_string(n), uint8_t(n % 3)});
    return out;
}

std::vector<SnpPair> random_subset(std::vector<SnpPair> snps, size_t m, Rng& rng) {
    if (m < 1) m = 1;
    if (m > snps.size()) m = snps.size();
    for (size_t i = 0; i < m; i++) std::swap(snps[i], snps[i + rng.below(snps.size() - i)]);
    snps.resize(m);
    return snps;
}

std::vector<PatientRecord> random_cohort(size_t n, size_t universe, size_t lo, size_t hi,
                                         Rng& rng) {
    std::vector<PatientRecord> out;
    out.reserve(n);
    for (size_t p = 0; p < n; p++)
        out.push_back(PatientRecord{rng.bytes(pseudonym_bytes),
                                    random_snp_set(universe, lo, hi, rng),
                                    {}});
    return out;
}

struct BuiltIndex {
    PrfKey key;
    EncryptedIndex enc;
    HierarchicalIndex idx;
};

BuiltIndex build_index(const std::vector<PatientRecord>& records, const PrfKey& key,
                       uint64_t bf_capacity, double bf_fp, const CbfConfig& cbf, Rng& rng) {
    BuiltIndex b;
    b.key = key;
    Preprocessed pre = preprocess(records, bf_capacity, bf_fp);
    b.enc = index_gen(key, pre.dict_bf, sig_keygen(SigScheme::ed25519), cbf, rng);
    b.idx = build_hierarchical(b.enc);
    return b;
}

Outcome criterion_filter_calibration() {
    auto t0 = std::chrono::steady_clock::now();
    StandardBloomFilter bf(cal_capacity, cal_fp_target);
    for (uint64_t i = 0; i < cal_capacity; i++) bf.add(tagged_item(0, i));

    size_t hits = 0;
    for (size_t i = 0; i < cal_probes; i++) hits += bf.contains(tagged_item(1, i)) ? 1 : 0;
    double fp_at_capacity = double(hits) / double(cal_probes);

    for (uint64_t i = cal_capacity; i < cal_overload_insertions; i++) bf.add(tagged_item(0, i));
    hits = 0;
    for (size_t i = 0; i < cal_probes; i++) hits += bf.contains(tagged_item(2, i)) ? 1 : 0;
    double fp_overloaded = double(hits) / double(cal_probes);

    double elapsed = seconds_since(t0);
    bool pass = fp_at_capacity <= cal_fp_limit &&
                std::abs(fp_overloaded - cal_overload_center) <= cal_overload_slack &&
                elapsed < cal_time_limit_s;
    Outcome o;
    o.pass = pass;
    o.detail = "fp at 2^21 insertions " + fmt(fp_at_capacity) + " (limit " + fmt(cal_fp_limit) +
               "), fp at 3e6 insertions " + fmt(fp_overloaded) + " (window " +
               fmt(cal_overload_center - cal_overload_slack) + ".." +
               fmt(cal_overload_center + cal_overload_slack) + "), " + fmt(elapsed, 1) +
               "s (limit " + fmt(cal_time_limit_s, 0) + "s)";
    return o;
}

Outcome criterion_ranking_agreement() {
    auto t0 = std::chrono::steady_clock::now();
    SeededRng rng(1002);
    SynthParams no_asi;
    no_asi.asi_groups_min = 0;
    no_asi.asi_groups_max = 0;
    std::vector<PatientRecord> records =
        gen_synthetic(synthetic_stats(rank_snps, 9002), rank_patients, 9002, no_asi);

    // Rewrite three of every four patients as light perturbations of their
    // family base. Independent draws almost never clear a 0.9 similarity
    // threshold, so without families every query returns only its own
    // patient and the agreement measurement is vacuous.
    for (size_t i = 0; i < records.size(); i++) {
        if (i % 4 == 0) continue;
        std::vector<SnpPair> snps = records[i - (i % 4)].snps;
        std::vector<SnpPair> mutated;
        for (SnpPair& s : snps) {
            if (rng.below(100) < 3) continue;
            if (rng.below(100) < 5) s.value = uint8_t((s.value + 1 + rng.below(2)) % 3);
            mutated.push_back(std::move(s));
        }
        records[i].snps = std::move(mutated);
    }

    const uint64_t bf_capacity = uint64_t(1) << 15;
    const double bf_fp = 0.01;
    CbfConfig cbf{uint64_t(1) << 18, to_bytes("acceptance-rank")};
    SearchConfig cfg{cbf, SearchMode::threshold_bits};

    PrfKey key = prf_keygen(rng);
    BuiltIndex b = build_index(records, key, bf_capacity, bf_fp, cbf, rng);
    OracleIndex oracle = oracle_prepare(records, OracleParams{key, b.idx.r, bf_capacity, bf_fp, cbf});

    size_t decisions = 0, agreements = 0;
    for (size_t qn = 0; qn < rank_queries; qn++) {
        const PatientRecord& probe = records[rng.below(records.size())];
        size_t m = probe.snps.size() * (60 + rng.below(41)) / 100;
        std::vector<SnpPair> snps = random_subset(probe.snps, m, rng);

        Query q = query_gen(key, snps, rank_epsilon, rank_k_c, {b.enc.sigma}, bf_capacity, bf_fp);
        std::optional<ResultDict> res = search(b.idx, q, cfg);
        if (!res) return {false, "search rejected a validly signed query"};

        std::set<Bytes> tree_keys, oracle_keys;
        for (const ResultEntry& e : res->ranked()) tree_keys.insert(e.key);
        for (const ResultEntry& e : oracle_topk(oracle, snps, rank_epsilon, rank_k_c))
            oracle_keys.insert(e.key);

        std::set<Bytes> all = tree_keys;
        all.insert(oracle_keys.begin(), oracle_keys.end());
        for (const Bytes& k : all) {
            decisions++;
            if (tree_keys.count(k) == oracle_keys.count(k)) agreements++;
        }
    }

    double rate = decisions ? double(agreements) / double(decisions) : 1.0;
    double elapsed = seconds_since(t0);
    Outcome o;
    o.pass = rate >= rank_min_agreement && decisions > 0 && elapsed < rank_time_limit_s;
    o.detail = "agreement " + fmt(rate) + " (floor " + fmt(rank_min_agreement) + ") over " +
               std::to_string(decisions) + " returned-item decisions, " + fmt(elapsed, 1) +
               "s (limit " + fmt(rank_time_limit_s, 0) + "s)";
    return o;
}

// The bounded dictionary replaces its minimum only on a strictly greater
// score, so when several candidates share the exact cut score the survivor
// depends on arrival order. Entries above the cut are fully determined;
// differences at the cut are admissible only between verified candidates
// with identical scores.
Outcome criterion_pruning_soundness() {
    SeededRng rng(1003);
    const uint64_t bf_capacity = 256;
    const double bf_fp = 0.02;
    CbfConfig cbf{uint64_t(1) << 12, to_bytes("acceptance-small")};
    SearchConfig cfg{cbf, SearchMode::threshold_bits};

    size_t exact = 0, cut_ties = 0;
    for (size_t t = 0; t < small_instances; t++) {
        size_t n = 2 + rng.below(small_max_patients - 1);
        std::vector<PatientRecord> records = random_cohort(n, small_snp_universe, 3, 24, rng);
        PrfKey key = prf_keygen(rng);
        BuiltIndex b = build_index(records, key, bf_capacity, bf_fp, cbf, rng);
        OracleIndex oracle =
            oracle_prepare(records, OracleParams{key, b.idx.r, bf_capacity, bf_fp, cbf});

        const PatientRecord& probe = records[rng.below(records.size())];
        size_t m = probe.snps.size() * (50 + rng.below(51)) / 100;
        std::vector<SnpPair> snps = random_subset(probe.snps, m, rng);
        double eps = double(3 + rng.below(8)) / 10.0;
        uint32_t k_c = uint32_t(1 + rng.below(6));

        Query q = query_gen(key, snps, eps, k_c, {b.enc.sigma}, bf_capacity, bf_fp);
        std::optional<ResultDict> res = search(b.idx, q, cfg);
        if (!res) return {false, "search rejected a validly signed query"};
        std::vector<ResultEntry> tree_ranked = res->ranked();
        std::vector<ResultEntry> oracle_ranked = oracle_topk(oracle, snps, eps, k_c);

        if (tree_ranked == oracle_ranked) {
            exact++;
            continue;
        }
        if (tree_ranked.size() != oracle_ranked.size() || tree_ranked.size() < k_c) break;
        bool scores_match = true;
        for (size_t i = 0; i < tree_ranked.size(); i++)
            scores_match &= tree_ranked[i].score == oracle_ranked[i].score;
        if (!scores_match) break;

        double cut = tree_ranked.back().score;
        std::map<Bytes, double> above_a, above_b;
        for (const ResultEntry& e : tree_ranked)
            if (e.score > cut) above_a.emplace(e.key, e.score);
        for (const ResultEntry& e : oracle_ranked)
            if (e.score > cut) above_b.emplace(e.key, e.score);
        if (above_a != above_b) break;

        // Every returned entry, tied or not, must be a genuine candidate:
        // present in the dictionary, past the bit threshold, and carrying
        // exactly the recomputed score.
        CustomizedBloomFilter cbf_c = query_layer(b.idx.r, q.e_set, cbf);
        auto genuine = [&](const std::vector<ResultEntry>& entries) {
            for (const ResultEntry& e : entries) {
                auto it = oracle.dict.find(e.key);
                if (it == oracle.dict.end()) return false;
                if (it->second.bits().popcount() == 0) return false;
                if (dot_count(cbf_c, it->second) < q.epsilon_bits) return false;
                if (cosine(cbf_c, it->second) != e.score) return false;
            }
            return true;
        };
        if (!genuine(tree_ranked) || !genuine(oracle_ranked)) break;
        cut_ties++;
    }

    Outcome o;
    o.pass = exact + cut_ties == small_instances;
    o.detail = std::to_string(exact) + "/" + std::to_string(small_instances) + " identical, " +
               std::to_string(cut_ties) +
               " differing only among verified equal-scored candidates at the cut, " +
               std::to_string(small_instances - exact - cut_ties) +
               " strict mismatches (zero tolerance)";
    return o;
}

Outcome criterion_token_algebra() {
    auto t0 = std::chrono::steady_clock::now();
    SeededRng rng(1004);
    size_t ok = 0;
    for (size_t t = 0; t < algebra_trials; t++) {
        Bytes v = rng.bytes(16 + rng.below(17));
        Scalar k_c = Scalar::random(rng);
        Scalar k_i = Scalar::random(rng);

        G1Element token = crypto::h1(v).mul(k_c.inverse());
        G2Element delta = G2Element::generator().mul(k_c * k_i.inverse());
        GtElement adjusted = pair(token, delta);
        GtElement direct = pair(crypto::h1(v), G2Element::generator()).pow(k_i.inverse());
        if (adjusted.serialize() == direct.serialize()) ok++;
    }
    double elapsed = seconds_since(t0);
    Outcome o;
    o.pass = ok == algebra_trials && elapsed < algebra_time_limit_s;
    o.detail = std::to_string(ok) + "/" + std::to_string(algebra_trials) +
               " adjusted tokens serialize identically to the direct value (zero tolerance), " +
               fmt(elapsed, 1) + "s (limit " + fmt(algebra_time_limit_s, 0) + "s)";
    return o;
}

Outcome criterion_policy_gate() {
    SeededRng rng(1005);
    AbeKeys keys = abe_setup(rng);

    std::vector<Bytes> universe;
    for (size_t i = 0; i < policy_universe; i++)
        universe.push_back(to_bytes("attr-" + std::to_string(i)));

    auto attrs_for = [&](unsigned mask) {
        std::vector<Bytes> out;
        for (size_t i = 0; i < policy_universe; i++)
            if (mask & (1u << i)) out.push_back(universe[i]);
        return out;
    };

    size_t ok = 0, total = 0;
    for (unsigned pmask = 0; pmask < 16; pmask++) {
        for (unsigned kmask = 0; kmask < 16; kmask++) {
            total++;
            GtElement m = gt_random(rng);
            AbeSecretKey sk = abe_keygen(keys.mk, attrs_for(kmask), rng);
            if (pmask == 0) {
                // The AND of zero attributes is rejected at encryption time;
                // that typed refusal is the correct outcome for every keyset.
                try {
                    abe_encrypt(keys.pk, m, AndPolicy::over({}), rng);
                } catch (const Error& e) {
                    if (e.code() == Errc::malformed_input) ok++;
                }
                continue;
            }
            AbeCiphertext ct = abe_encrypt(keys.pk, m, AndPolicy::over(attrs_for(pmask)), rng);
            bool superset = (kmask & pmask) == pmask;
            try {
                GtElement got = abe_decrypt(sk, ct);
                if (superset && got.serialize() == m.serialize()) ok++;
            } catch (const Error& e) {
                if (!superset && e.code() == Errc::policy_miss) ok++;
            }
        }
    }
    size_t exhaustive_ok = ok;
    size_t exhaustive_total = total;

    size_t rok = 0;
    for (size_t t = 0; t < policy_random_trials; t++) {
        size_t n_theta = 1 + rng.below(policy_max_keyset);
        std::set<Bytes> theta_set;
        while (theta_set.size() < n_theta) theta_set.insert(rng.bytes(8 + rng.below(25)));
        std::vector<Bytes> theta(theta_set.begin(), theta_set.end());

        size_t psize = 1 + rng.below(std::min<size_t>(n_theta, 8));
        std::vector<Bytes> policy;
        {
            std::vector<Bytes> pool = theta;
            for (size_t i = 0; i < psize; i++) std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
            policy.assign(pool.begin(), pool.begin() + psize);
        }
        bool covered = (t % 2) == 0;
        if (!covered) {
            Bytes outside = rng.bytes(32);
            while (theta_set.count(outside)) outside = rng.bytes(32);
            policy[rng.below(policy.size())] = outside;
        }

        GtElement m = gt_random(rng);
        AbeSecretKey sk = abe_keygen(keys.mk, theta, rng);
        AbeCiphertext ct = abe_encrypt(keys.pk, m, AndPolicy::over(policy), rng);
        try {
            GtElement got = abe_decrypt(sk, ct);
            if (covered && got.serialize() == m.serialize()) rok++;
        } catch (const Error& e) {
            if (!covered && e.code() == Errc::policy_miss) rok++;
        }
    }

    Outcome o;
    o.pass = exhaustive_ok == exhaustive_total && rok == policy_random_trials;
    o.detail = std::to_string(exhaustive_ok) + "/" + std::to_string(exhaustive_total) +
               " exhaustive 4-attribute (policy, keyset) pairs and " + std::to_string(rok) + "/" +
               std::to_string(policy_random_trials) +
               " random keysets up to 64 attributes decrypt exactly when covered (zero tolerance)";
    return o;
}

Outcome criterion_annotation_retrieval() {
    SeededRng rng(1006);
    const uint64_t bf_capacity = 2048;
    const double bf_fp = 0.01;
    CbfConfig cbf{uint64_t(1) << 16, to_bytes("acceptance-asi")};
    SearchConfig cfg{cbf, SearchMode::threshold_bits};
    PrfKey k = prf_keygen(rng);

    size_t ok = 0;
    for (size_t t = 0; t < asi_scenarios; t++) {
        HospitalKeyBundle h = hospital_setup("H", rng);
        std::vector<PatientRecord> records = random_cohort(3, 80, 12, 16, rng);
        PatientRecord& target = records[0];
        size_t gsize = 3 + rng.below(4);
        AsiGroup group{to_bytes("finding " + std::to_string(t)),
                       random_subset(target.snps, gsize, rng)};
        target.asi_groups.push_back(group);

        Preprocessed pre = preprocess(records, bf_capacity, bf_fp);
        EncryptedIndex enc = index_gen(k, pre.dict_bf, h.sig_keys, cbf, rng);
        HierarchicalIndex idx = build_hierarchical(enc);

        CspStore store;
        upload_index(store, h.id, idx, enc.sigma);
        upload_ciphertexts(store, h.id, {},
                           asi_encrypt(h.k_i, h.k_beta, h.abe_keys.pk, pre.dict_asi, rng),
                           h.abe_keys);

        AuthorizationRequest req{"client", Scalar::random(rng), target.snps};
        AuthorizationOutcome auth = authorize_client(
            h, k, enc.sigma, req, [](const std::string&) { return true; }, cbf);
        if (!auth.approved) return {false, "authorization unexpectedly refused"};
        register_shared_key(store, h.id, req.client_id, auth.shared);

        Query q = query_gen(k, target.snps, 0.9, 3, {enc.sigma}, bf_capacity, bf_fp);

        bool scenario_ok = true;
        {
            QueryResponse resp =
                handle_query(store, req.client_id, q, token_gen(req.k_c, target.snps), cfg, rng);
            bool hit = false;
            for (const MatchRow& mr : resp.matches) hit |= mr.pseudonym == target.pseudonym;
            AsiPlaintexts texts = asi_decrypt(h.k_beta, resp.asi_ciphertexts);
            scenario_ok &= hit && resp.asi_ciphertexts.size() == 1 && texts.failures == 0 &&
                           texts.texts.count(group.text) == 1;
        }
        for (const SnpPair& dropped : group.snps) {
            std::vector<SnpPair> reduced;
            for (const SnpPair& s : target.snps)
                if (!(s == dropped)) reduced.push_back(s);
            QueryResponse resp =
                handle_query(store, req.client_id, q, token_gen(req.k_c, reduced), cfg, rng);
            bool hit = false;
            for (const MatchRow& mr : resp.matches) hit |= mr.pseudonym == target.pseudonym;
            scenario_ok &= hit && resp.asi_ciphertexts.empty();
        }
        if (scenario_ok) ok++;
    }

    Outcome o;
    o.pass = ok == asi_scenarios;
    o.detail = std::to_string(ok) + "/" + std::to_string(asi_scenarios) +
               " scenarios: full token coverage releases the annotation, dropping any single "
               "required token releases none (zero tolerance)";
    return o;
}

bool equivalent_up_to_boundary_ties(const ResultDict& a, const ResultDict& b) {
    if (a.entries() == b.entries()) return true;
    // Differences are only admissible among entries tied at the cut score of
    // a full dictionary; everything above the cut must agree exactly.
    if (a.capacity() != b.capacity() || a.size() != b.size() || a.size() < a.capacity())
        return false;
    std::vector<double> sa, sb;
    for (const auto& [key, score] : a.entries()) sa.push_back(score);
    for (const auto& [key, score] : b.entries()) sb.push_back(score);
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa != sb) return false;
    double cut = sa.front();
    std::map<Bytes, double> above_a, above_b;
    for (const auto& [key, score] : a.entries())
        if (score > cut) above_a.emplace(key, score);
    for (const auto& [key, score] : b.entries())
        if (score > cut) above_b.emplace(key, score);
    return above_a == above_b;
}

Outcome criterion_merge_equivalence() {
    SeededRng rng(1007);
    const uint64_t bf_capacity = 2048;
    const double bf_fp = 0.01;
    CbfConfig cbf{uint64_t(1) << 16, to_bytes("acceptance-merge")};
    SearchConfig cfg{cbf, SearchMode::threshold_bits};
    PrfKey k = prf_keygen(rng);

    std::vector<std::vector<PatientRecord>> cohorts;
    std::vector<BuiltIndex> built;
    std::vector<HierarchicalIndex> indices;
    for (size_t hnum = 0; hnum < merge_hospitals; hnum++) {
        cohorts.push_back(random_cohort(merge_patients, 120, 15, 30, rng));
        built.push_back(build_index(cohorts.back(), k, bf_capacity, bf_fp, cbf, rng));
        indices.push_back(built.back().idx);
    }
    MergedIndex merged_full = index_merge_full(indices, default_mds_dim);
    MergedIndex merged_fast = index_merge_fast(indices, default_mds_dim);

    size_t agree = 0;
    for (size_t qn = 0; qn < merge_queries; qn++) {
        unsigned mask = 1 + unsigned(rng.below((1u << merge_hospitals) - 1));
        std::vector<Bytes> sigmas;
        for (size_t hnum = 0; hnum < merge_hospitals; hnum++)
            if (mask & (1u << hnum)) sigmas.push_back(built[hnum].enc.sigma);
        for (size_t i = 0; i + 1 < sigmas.size(); i++)
            std::swap(sigmas[i], sigmas[i + rng.below(sigmas.size() - i)]);

        const auto& cohort = cohorts[rng.below(merge_hospitals)];
        const PatientRecord& probe = cohort[rng.below(cohort.size())];
        size_t m = probe.snps.size() * (50 + rng.below(51)) / 100;
        std::vector<SnpPair> snps = random_subset(probe.snps, m, rng);
        double eps = double(5 + rng.below(6)) / 10.0;
        uint32_t k_c = uint32_t(1 + rng.below(8));

        Query q = query_gen(k, snps, eps, k_c, sigmas, bf_capacity, bf_fp);
        std::optional<ResultDict> full = search_merged(merged_full, q, cfg);
        std::optional<ResultDict> fast = search_merged(merged_fast, q, cfg);
        if (!full || !fast) return {false, "merged search rejected a validly signed query"};

        ResultDict unioned(q.k_c);
        for (size_t hnum = 0; hnum < merge_hospitals; hnum++) {
            std::optional<ResultDict> per = search(built[hnum].idx, q, cfg);
            if (!per) continue;
            for (const ResultEntry& e : per->ranked())
                unioned.insert(concat(e.key, built[hnum].idx.r), e.score);
        }

        if (equivalent_up_to_boundary_ties(*full, unioned) &&
            equivalent_up_to_boundary_ties(*fast, unioned) &&
            equivalent_up_to_boundary_ties(*full, *fast))
            agree++;
    }

    Outcome o;
    o.pass = agree == merge_queries;
    o.detail = std::to_string(agree) + "/" + std::to_string(merge_queries) +
               " queries: full merge, fast merge, and the re-ranked per-hospital union return "
               "the same (key, score) set up to cut-score ties (zero tolerance)";
    return o;
}

Outcome criterion_authorization_gate() {
    SeededRng rng(1008);
    const uint64_t bf_capacity = 1024;
    const double bf_fp = 0.01;
    CbfConfig cbf{uint64_t(1) << 14, to_bytes("acceptance-gate")};
    SearchConfig cfg{cbf, SearchMode::threshold_bits};
    PrfKey k = prf_keygen(rng);

    const size_t hospitals = 4;
    std::vector<std::vector<PatientRecord>> cohorts;
    std::vector<BuiltIndex> built;
    std::vector<HierarchicalIndex> indices;
    for (size_t hnum = 0; hnum < hospitals; hnum++) {
        cohorts.push_back(random_cohort(8, 60, 10, 20, rng));
        built.push_back(build_index(cohorts.back(), k, bf_capacity, bf_fp, cbf, rng));
        indices.push_back(built.back().idx);
    }
    MergedIndex merged = index_merge_fast(indices, default_mds_dim);

    size_t violations = 0;
    for (size_t t = 0; t < gate_trials; t++) {
        unsigned mask = unsigned(rng.below(1u << hospitals));
        std::set<Bytes> authorized_r;
        std::vector<Bytes> sigmas;
        for (size_t hnum = 0; hnum < hospitals; hnum++) {
            if (!(mask & (1u << hnum))) continue;
            sigmas.push_back(built[hnum].enc.sigma);
            authorized_r.insert(built[hnum].idx.r);
        }
        if (rng.below(2) == 0) {
            Bytes corrupt = built[rng.below(hospitals)].enc.sigma;
            corrupt.back() ^= 0x01;
            sigmas.push_back(std::move(corrupt));
        }

        const auto& cohort = cohorts[rng.below(hospitals)];
        const PatientRecord& probe = cohort[rng.below(cohort.size())];
        size_t m = probe.snps.size() * (50 + rng.below(51)) / 100;
        std::vector<SnpPair> snps = random_subset(probe.snps, m, rng);
        double eps = double(5 + rng.below(6)) / 10.0;
        uint32_t k_c = uint32_t(1 + rng.below(6));
        Query q = query_gen(k, snps, eps, k_c, sigmas, bf_capacity, bf_fp);

        std::optional<ResultDict> res = search_merged(merged, q, cfg);
        if (mask == 0) {
            if (res.has_value()) violations++;
        } else {
            if (!res.has_value()) {
                violations++;
            } else {
                for (const auto& [key, score] : res->entries()) {
                    auto [pseudonym, r_star] = split_leaf_key(key);
                    (void)pseudonym;
                    if (!authorized_r.count(r_star)) violations++;
                }
            }
        }

        std::optional<ResultDict> single = search(built[0].idx, q, cfg);
        if (single.has_value() != bool(mask & 1u)) violations++;
    }

    Outcome o;
    o.pass = violations == 0;
    o.detail = std::to_string(violations) + " violations in " + std::to_string(gate_trials) +
               " trials: no-valid-signature queries return nothing, and no merged result leaf "
               "lies outside the authorized provenance set (zero tolerance)";
    return o;
}

void timing_note() {
    try {
        SystemConfig cfg;
        cfg.bf_capacity = 4096;
        cfg.bf_fp = 0.01;
        cfg.cbf_length = uint64_t(1) << 17;
        cfg.cbf_seed = "acceptance-bench";
        BenchReport report =
            bench_run(note_hospitals, note_patients, note_snps, note_queries, 1009, cfg, true);
        std::cout << "NOTE  timing (non-gating): per-index " << fmt(report.sequential_search_ms, 0)
                  << "ms vs merged " << fmt(report.merged_search_ms, 0) << "ms over "
                  << note_queries << " queries at " << note_hospitals << " indices\n";
        for (const std::string& note : report.annotations)
            std::cout << "NOTE  timing (non-gating): " << note << "\n";
    } catch (const std::exception& e) {
        std::cout << "NOTE  timing (non-gating): benchmark failed to run: " << e.what() << "\n";
    }
}

}  // namespace

int main() {
    struct Row {
        int num;
        const char* name;
        std::function<Outcome()> fn;
    };
    const std::vector<Row> rows = {
        {1, "bloom filter calibration", criterion_filter_calibration},
        {2, "tree search vs exhaustive ranking", criterion_ranking_agreement},
        {3, "pruning soundness on small instances", criterion_pruning_soundness},
        {4, "token adjustment algebra", criterion_token_algebra},
        {5, "policy-gated decryption", criterion_policy_gate},
        {6, "layered annotation retrieval", criterion_annotation_retrieval},
        {7, "merged search equivalence", criterion_merge_equivalence},
        {8, "authorization gating", criterion_authorization_gate},
    };

    int failed = 0;
    for (const Row& row : rows) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = row.fn();
        } catch (const std::exception& e) {
            o = Outcome{false, std::string("unexpected error: ") + e.what()};
        }
        std::cout << (o.pass ? "PASS" : "FAIL") << "  " << row.num << ". " << row.name << ": "
                  << o.detail << " [" << fmt(seconds_since(t0), 1) << "s]" << std::endl;
        if (!o.pass) failed++;
    }

    timing_note();

    std::cout << "acceptance: " << (rows.size() - size_t(failed)) << "/" << rows.size()
              << " gating criteria passed" << std::endl;
    return failed ? 1 : 0;
}
