#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <set>

#include "sps/csp/store.hpp"

using namespace sps;
using namespace sps::crypto;

namespace {

CbfConfig test_cbf() { return CbfConfig{uint64_t(1) << 18, to_bytes("cbf-seed")}; }
SearchConfig test_cfg() { return SearchConfig{test_cbf(), SearchMode::threshold_bits}; }

constexpr uint64_t kBfCapacity = 4096;
constexpr double kBfFp = 0.01;

Bytes pseudo(int i) { return Bytes(pseudonym_bytes, uint8_t('A' + i)); }

std::vector<SnpPair> snp_range(int lo, int hi) {
    std::vector<SnpPair> out;
    for (int i = lo; i < hi; i++) out.push_back(SnpPair{"rs" + std::to_string(i), uint8_t(i % 3)});
    return out;
}

struct World {
    HospitalKeyBundle h;
    std::vector<PatientRecord> records;
    HierarchicalIndex idx;
    Bytes sigma;
};

World make_world(const std::string& id, const std::vector<std::vector<SnpPair>>& patients,
                 const PrfKey& k, Rng& rng,
                 std::vector<std::vector<AsiGroup>> asi_groups = {}) {
    World w;
    w.h = hospital_setup(id, rng);
    for (size_t i = 0; i < patients.size(); i++) {
        PatientRecord rec{pseudo(int(i)), patients[i], {}};
        if (i < asi_groups.size()) rec.asi_groups = asi_groups[i];
        w.records.push_back(std::move(rec));
    }
    Preprocessed pre = preprocess(w.records, kBfCapacity, kBfFp);
    EncryptedIndex enc = index_gen(k, pre.dict_bf, w.h.sig_keys, test_cbf(), rng);
    w.sigma = enc.sigma;
    w.idx = build_hierarchical(enc);
    return w;
}

Query make_query(const PrfKey& k, const std::vector<SnpPair>& snps, double eps, uint32_t k_c,
                 std::vector<Bytes> sigmas) {
    return query_gen(k, snps, eps, k_c, std::move(sigmas), kBfCapacity, kBfFp);
}

// Tree-free ground truth: score every leaf directly.
ResultDict leaf_oracle(const HierarchicalIndex& idx, const Query& q, const SearchConfig& cfg) {
    CustomizedBloomFilter cbf_c = query_layer(idx.r, q.e_set, cfg.cbf);
    ResultDict dict(q.k_c);
    for (const auto& node : idx.tree.nodes) {
        if (!node.leaf) continue;
        const CustomizedBloomFilter& leaf = idx.dict.at(node.id);
        if (leaf.bits().popcount() == 0) continue;
        if (dot_count(cbf_c, leaf) < q.epsilon_bits) continue;
        dict.insert(node.id, cosine(cbf_c, leaf));
    }
    return dict;
}

std::vector<std::vector<SnpPair>> random_cohort(size_t n, Rng& rng) {
    std::vector<std::vector<SnpPair>> out;
    for (size_t p = 0; p < n; p++) {
        std::vector<SnpPair> snps;
        size_t len = 15 + rng.below(16);
        while (snps.size() < len) {
            int rsnum = int(rng.below(60));
            SnpPair s{"rs" + std::to_string(rsnum), uint8_t(rsnum % 3)};
            if (std::find(snps.begin(), snps.end(), s) == snps.end()) snps.push_back(s);
        }
        out.push_back(std::move(snps));
    }
    return out;
}

}  // namespace

TEST_CASE("result dict keeps the top scores", "[csp]") {
    ResultDict dict(2);
    dict.insert(to_bytes("A"), 0.9);
    dict.insert(to_bytes("B"), 0.8);

    SECTION("strictly better score replaces the minimum") {
        dict.insert(to_bytes("C"), 0.85);
        REQUIRE(dict.entries() == std::map<Bytes, double>{{to_bytes("A"), 0.9}, {to_bytes("C"), 0.85}});
    }
    SECTION("equal score does not replace") {
        dict.insert(to_bytes("C"), 0.8);
        REQUIRE(dict.entries() == std::map<Bytes, double>{{to_bytes("A"), 0.9}, {to_bytes("B"), 0.8}});
    }
    SECTION("non-full dict always inserts") {
        ResultDict open(3);
        open.insert(to_bytes("A"), 0.1);
        open.insert(to_bytes("B"), 0.05);
        open.insert(to_bytes("C"), 0.01);
        REQUIRE(open.size() == 3);
    }
    SECTION("score ties evict the largest key") {
        ResultDict tied(2);
        tied.insert(to_bytes("A"), 0.5);
        tied.insert(to_bytes("B"), 0.5);
        tied.insert(to_bytes("C"), 0.6);
        REQUIRE(tied.entries() == std::map<Bytes, double>{{to_bytes("A"), 0.5}, {to_bytes("C"), 0.6}});
    }
    SECTION("ranked output sorts by score then key") {
        ResultDict r(3);
        r.insert(to_bytes("B"), 0.7);
        r.insert(to_bytes("A"), 0.7);
        r.insert(to_bytes("C"), 0.9);
        std::vector<ResultEntry> ranked = r.ranked();
        REQUIRE(ranked[0].key == to_bytes("C"));
        REQUIRE(ranked[1].key == to_bytes("A"));
        REQUIRE(ranked[2].key == to_bytes("B"));
    }
    SECTION("re-inserting a key keeps the best score") {
        dict.insert(to_bytes("B"), 0.95);
        REQUIRE(dict.entries().at(to_bytes("B")) == 0.95);
        dict.insert(to_bytes("B"), 0.2);
        REQUIRE(dict.entries().at(to_bytes("B")) == 0.95);
    }
}

TEST_CASE("single index search finds the planted patient", "[csp]") {
    SeededRng rng(51);
    PrfKey k = prf_keygen(rng);
    std::vector<std::vector<SnpPair>> cohort = {snp_range(0, 20),  snp_range(15, 35),
                                                snp_range(30, 50), snp_range(45, 65),
                                                snp_range(60, 80), snp_range(75, 95)};
    World w = make_world("H1", cohort, k, rng);

    Query q = make_query(k, cohort[2], 0.9, 3, {w.sigma});
    std::optional<ResultDict> res = search(w.idx, q, test_cfg());
    REQUIRE(res.has_value());
    REQUIRE(!res->empty());
    std::vector<ResultEntry> ranked = res->ranked();
    REQUIRE(ranked[0].key == pseudo(2));
    REQUIRE(ranked[0].score > 0.999);

    SECTION("unsatisfiable threshold yields an empty dict") {
        Query hard = q;
        hard.epsilon_bits = hard.e_set.size() + 1;
        std::optional<ResultDict> none = search(w.idx, hard, test_cfg());
        REQUIRE(none.has_value());
        REQUIRE(none->empty());
    }
    SECTION("bad signature returns nothing at all") {
        Query forged = q;
        forged.sigmas = {Bytes(64, 0xab)};
        REQUIRE(!search(w.idx, forged, test_cfg()).has_value());
        Query unsigned_q = q;
        unsigned_q.sigmas.clear();
        REQUIRE(!search(w.idx, unsigned_q, test_cfg()).has_value());
    }
    SECTION("structural corruption is an error, not a miss") {
        HierarchicalIndex broken = w.idx;
        broken.tree.root = uint32_t(broken.tree.nodes.size());
        REQUIRE_THROWS_AS(search(broken, q, test_cfg()), Error);
    }
    SECTION("strict cosine mode gates internal nodes too") {
        SearchConfig strict{test_cbf(), SearchMode::strict_cosine};

        // On a multi-patient tree the root ORs everything, its cosine sits
        // far below 1, and a full-match threshold prunes at the root.
        Query full = make_query(k, cohort[2], 1.0, 3, {w.sigma});
        std::optional<ResultDict> pruned = search(w.idx, full, strict);
        REQUIRE(pruned.has_value());
        REQUIRE(pruned->empty());

        // With a single leaf the root is the match itself.
        World solo = make_world("H2", {cohort[2]}, k, rng);
        std::optional<ResultDict> sres = search(solo.idx, full, strict);
        REQUIRE(!sres.has_value());  // sigma belongs to the other index
        Query own = make_query(k, cohort[2], 1.0, 3, {solo.sigma});
        sres = search(solo.idx, own, strict);
        REQUIRE(sres.has_value());
        REQUIRE(sres->size() == 1);
        REQUIRE(sres->ranked()[0].key == pseudo(0));
        REQUIRE(sres->ranked()[0].score > 0.999);
    }
}

TEST_CASE("search equals brute force over leaves", "[csp]") {
    SeededRng rng(52);
    PrfKey k = prf_keygen(rng);
    World w = make_world("H1", random_cohort(20, rng), k, rng);

    for (int trial = 0; trial < 10; trial++) {
        std::vector<SnpPair> probe = random_cohort(1, rng)[0];
        Query q = make_query(k, probe, 0.8, 5, {w.sigma});
        std::optional<ResultDict> res = search(w.idx, q, test_cfg());
        REQUIRE(res.has_value());
        REQUIRE(res->entries() == leaf_oracle(w.idx, q, test_cfg()).entries());
    }

    SECTION("strict cosine mode returns only leaves passing its own gate") {
        SearchConfig strict{test_cbf(), SearchMode::strict_cosine};
        for (int trial = 0; trial < 5; trial++) {
            std::vector<SnpPair> probe = random_cohort(1, rng)[0];
            Query q = make_query(k, probe, 0.6, 5, {w.sigma});
            std::optional<ResultDict> res = search(w.idx, q, strict);
            REQUIRE(res.has_value());
            CustomizedBloomFilter cbf_c = query_layer(w.idx.r, q.e_set, test_cbf());
            double threshold = double(q.epsilon_bits) / double(q.e_set.size());
            for (const ResultEntry& e : res->ranked()) {
                REQUIRE(e.score >= threshold);
                REQUIRE(e.score == cosine(cbf_c, w.idx.dict.at(e.key)));
            }
        }
    }
}

TEST_CASE("conditional insert honors provenance", "[csp]") {
    Bytes r1(index_r_bytes, 1), r2(index_r_bytes, 2);
    std::set<Bytes> authorized = {r1};
    ResultDict dict(4);

    insert_conditionally(dict, concat(pseudo(0), r1), authorized, 0.9);
    REQUIRE(dict.size() == 1);
    insert_conditionally(dict, concat(pseudo(1), r2), authorized, 0.95);
    REQUIRE(dict.size() == 1);
    REQUIRE(dict.entries().count(concat(pseudo(0), r1)) == 1);

    REQUIRE_THROWS_AS(insert_conditionally(dict, to_bytes("short"), authorized, 0.5), Error);

    ResultDict empty(4);
    insert_conditionally(empty, concat(pseudo(0), r2), authorized, 0.99);
    REQUIRE(empty.empty());
}

TEST_CASE("merged search unions authorized hospitals", "[csp]") {
    SeededRng rng(53);
    PrfKey k = prf_keygen(rng);
    std::vector<World> worlds;
    for (int h = 0; h < 3; h++)
        worlds.push_back(make_world("H" + std::to_string(h + 1),
                                    {snp_range(h * 90, h * 90 + 20), snp_range(h * 90 + 15, h * 90 + 35),
                                     snp_range(h * 90 + 30, h * 90 + 50), snp_range(h * 90 + 45, h * 90 + 65),
                                     snp_range(h * 90 + 60, h * 90 + 80), snp_range(h * 90 + 75, h * 90 + 95)},
                                    k, rng));
    std::vector<HierarchicalIndex> indices = {worlds[0].idx, worlds[1].idx, worlds[2].idx};
    MergedIndex full = index_merge_full(indices);
    MergedIndex fast = index_merge_fast(indices);

    auto union_oracle = [&](const Query& q, const std::vector<size_t>& hs) {
        ResultDict dict(q.k_c);
        for (size_t h : hs) {
            std::optional<ResultDict> res = search(worlds[h].idx, q, test_cfg());
            REQUIRE(res.has_value());
            for (const ResultEntry& e : res->ranked())
                dict.insert(concat(e.key, worlds[h].idx.r), e.score);
        }
        return dict;
    };

    SECTION("authorized subset bounds the result keys") {
        for (int probe_h = 0; probe_h < 3; probe_h++) {
            Query q = make_query(k, snp_range(probe_h * 90 + 15, probe_h * 90 + 35), 0.7, 6,
                                 {worlds[0].sigma, worlds[1].sigma});
            for (const MergedIndex* m : {&full, &fast}) {
                std::optional<ResultDict> res = search_merged(*m, q, test_cfg());
                REQUIRE(res.has_value());
                for (const ResultEntry& e : res->ranked()) {
                    auto [pseudonym, r_star] = split_leaf_key(e.key);
                    REQUIRE((r_star == worlds[0].idx.r || r_star == worlds[1].idx.r));
                }
                REQUIRE(res->entries() == union_oracle(q, {0, 1}).entries());
            }
        }
    }
    SECTION("full and fast merges answer identically") {
        for (int trial = 0; trial < 5; trial++) {
            int lo = int(rng.below(200));
            std::vector<SnpPair> probe = snp_range(lo, lo + 25);
            Query q = make_query(k, probe, 0.5, 4,
                                 {worlds[0].sigma, worlds[1].sigma, worlds[2].sigma});
            std::optional<ResultDict> a = search_merged(full, q, test_cfg());
            std::optional<ResultDict> b = search_merged(fast, q, test_cfg());
            REQUIRE(a.has_value());
            REQUIRE(b.has_value());
            REQUIRE(a->entries() == b->entries());
            REQUIRE(a->entries() == union_oracle(q, {0, 1, 2}).entries());
        }
    }
    SECTION("one signature reduces to that hospital's own search") {
        Query q = make_query(k, snp_range(105, 125), 0.7, 5, {worlds[1].sigma});
        std::optional<ResultDict> merged_res = search_merged(full, q, test_cfg());
        std::optional<ResultDict> single = search(worlds[1].idx, q, test_cfg());
        REQUIRE(merged_res.has_value());
        REQUIRE(single.has_value());
        std::map<Bytes, double> rekeyed;
        for (const auto& [key, score] : single->entries())
            rekeyed.emplace(concat(key, worlds[1].idx.r), score);
        REQUIRE(merged_res->entries() == rekeyed);
    }
    SECTION("zero valid signatures returns nothing") {
        Query q = make_query(k, snp_range(0, 20), 0.7, 5, {Bytes(64, 0x11)});
        REQUIRE(!search_merged(full, q, test_cfg()).has_value());
        Query empty_sig = make_query(k, snp_range(0, 20), 0.7, 5, {});
        REQUIRE(!search_merged(fast, empty_sig, test_cfg()).has_value());
    }
}

TEST_CASE("token adjustment drops out-of-scope tokens", "[csp]") {
    SeededRng rng(54);
    SnpPair va{"rs1", 1}, vb{"rs2", 2}, vc{"rs3", 0};
    Scalar k_i = Scalar::random(rng), k_c = Scalar::random(rng);
    SharedKey shared = shared_key_gen(k_i, k_c, {va, vb}, test_cbf());

    TokenSet tokens = token_gen(k_c, {va, vb, vc});
    std::vector<GtElement> adjusted = token_adjust(tokens, shared, test_cbf());
    REQUIRE(adjusted.size() == 2);

    std::set<Bytes> expect = {snp_attr_base(va, k_i).serialize(), snp_attr_base(vb, k_i).serialize()};
    std::set<Bytes> got;
    for (const GtElement& t : adjusted) got.insert(t.serialize());
    REQUIRE(got == expect);

    REQUIRE(token_adjust(TokenSet{}, shared, test_cbf()).empty());
}

TEST_CASE("asi retrieval gates on full policy coverage", "[csp]") {
    SeededRng rng(55);
    HospitalKeyBundle h = hospital_setup("H", rng);
    SnpPair va{"rs1", 1}, vb{"rs2", 2}, vc{"rs3", 0};
    Bytes text = to_bytes("compound heterozygous finding");

    std::map<Bytes, std::vector<AsiGroup>> dict_asi;
    dict_asi[pseudo(0)] = {AsiGroup{text, {va, vb}}};
    AsiDict store = asi_encrypt(h.k_i, h.k_beta, h.abe_keys.pk, dict_asi, rng);

    Scalar k_c = Scalar::random(rng);
    SharedKey shared = shared_key_gen(h.k_i, k_c, {va, vb, vc}, test_cbf());

    auto adjusted_for = [&](const std::vector<SnpPair>& snps) {
        return token_adjust(token_gen(k_c, snps), shared, test_cbf());
    };

    std::vector<Bytes> hit = asi_search(adjusted_for({va, vb}), {pseudo(0)}, store,
                                        h.abe_keys.mk, rng);
    REQUIRE(hit.size() == 1);
    REQUIRE(sym_decrypt(h.k_beta, hit[0]) == text);

    REQUIRE(asi_search(adjusted_for({va}), {pseudo(0)}, store, h.abe_keys.mk, rng).empty());
    REQUIRE(asi_search(adjusted_for({va, vb}), {}, store, h.abe_keys.mk, rng).empty());
    REQUIRE(asi_search(adjusted_for({va, vb}), {pseudo(7)}, store, h.abe_keys.mk, rng).empty());

    std::vector<Bytes> superset = asi_search(adjusted_for({va, vb, vc}), {pseudo(0)}, store,
                                             h.abe_keys.mk, rng);
    REQUIRE(superset.size() == 1);
    REQUIRE(sym_decrypt(h.k_beta, superset[0]) == text);
}

TEST_CASE("query pipeline retrieves asi end to end", "[csp]") {
    SeededRng rng(56);
    PrfKey k = prf_keygen(rng);
    std::vector<SnpPair> target = snp_range(30, 42);
    std::vector<AsiGroup> target_asi = {AsiGroup{to_bytes("stage two finding"), snp_range(32, 35)}};

    World w1 = make_world("H1",
                          {snp_range(0, 12), snp_range(10, 22), target, snp_range(50, 62)}, k, rng,
                          {{}, {}, target_asi, {}});
    World w2 = make_world("H2", {snp_range(100, 112), snp_range(110, 122)}, k, rng);

    CspStore store;
    upload_index(store, "H1", w1.idx, w1.sigma);
    upload_index(store, "H2", w2.idx, w2.sigma);
    Preprocessed pre1 = preprocess(w1.records, kBfCapacity, kBfFp);
    upload_ciphertexts(store, "H1", to_bytes("blob1"),
                       asi_encrypt(w1.h.k_i, w1.h.k_beta, w1.h.abe_keys.pk, pre1.dict_asi, rng),
                       w1.h.abe_keys);
    upload_ciphertexts(store, "H2", to_bytes("blob2"), {}, w2.h.abe_keys);

    Scalar k_c1 = Scalar::random(rng), k_c2 = Scalar::random(rng);
    register_shared_key(store, "H1", "alice", shared_key_gen(w1.h.k_i, k_c1, target, test_cbf()));
    register_shared_key(store, "H2", "alice",
                        shared_key_gen(w2.h.k_i, k_c2, snp_range(100, 112), test_cbf()));

    Query q = make_query(k, target, 0.9, 3, {w1.sigma, w2.sigma});
    TokenSet tokens = token_gen(k_c1, target);

    QueryResponse resp = handle_query(store, "alice", q, tokens, test_cfg(), rng);
    REQUIRE(!resp.matches.empty());
    REQUIRE(resp.matches[0].hospital_id == "H1");
    REQUIRE(resp.matches[0].pseudonym == pseudo(2));
    REQUIRE(resp.matches[0].score > 0.999);
    REQUIRE(resp.asi_ciphertexts.size() == 1);
    AsiPlaintexts texts = asi_decrypt(w1.h.k_beta, resp.asi_ciphertexts);
    REQUIRE(texts.failures == 0);
    REQUIRE(texts.texts == std::set<Bytes>{to_bytes("stage two finding")});

    SECTION("no index match terminates before the asi stage") {
        Query miss = make_query(k, snp_range(900, 912), 1.0, 3, {w1.sigma});
        QueryResponse empty = handle_query(store, "alice", miss, tokens, test_cfg(), rng);
        REQUIRE(empty.matches.empty());
        REQUIRE(empty.asi_ciphertexts.empty());
    }
    SECTION("missing tokens keep scores but release nothing") {
        std::vector<SnpPair> partial = target;
        partial.erase(std::find(partial.begin(), partial.end(), SnpPair{"rs33", 0}));
        TokenSet fewer = token_gen(k_c1, partial);
        QueryResponse resp2 = handle_query(store, "alice", q, fewer, test_cfg(), rng);
        REQUIRE(!resp2.matches.empty());
        REQUIRE(resp2.asi_ciphertexts.empty());
    }
    SECTION("missing shared key is a hard denial") {
        CspStore copy = store;
        copy.shared_keys.erase({"H1", "alice"});
        try {
            handle_query(copy, "alice", q, tokens, test_cfg(), rng);
            FAIL("expected denial");
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::denied);
        }
    }
    SECTION("merged store answers the same query") {
        CspStore copy = store;
        REQUIRE(build_merged(copy, MergePolicy{2, true, default_mds_dim}));
        QueryResponse merged_resp = handle_query(copy, "alice", q, tokens, test_cfg(), rng);
        REQUIRE(!merged_resp.matches.empty());
        REQUIRE(merged_resp.matches[0].hospital_id == "H1");
        REQUIRE(merged_resp.matches[0].pseudonym == pseudo(2));
        REQUIRE(merged_resp.asi_ciphertexts.size() == 1);
    }
    SECTION("malformed queries are rejected up front") {
        Query hollow = q;
        hollow.e_set.clear();
        REQUIRE_THROWS_AS(handle_query(store, "alice", hollow, tokens, test_cfg(), rng), Error);
        Query zero_k = q;
        zero_k.k_c = 0;
        REQUIRE_THROWS_AS(handle_query(store, "alice", zero_k, tokens, test_cfg(), rng), Error);
    }
    SECTION("no verifiable signature is a denial") {
        Query forged = q;
        forged.sigmas = {Bytes(64, 0x5a)};
        try {
            handle_query(store, "alice", forged, tokens, test_cfg(), rng);
            FAIL("expected denial");
        } catch (const Error& e) {
            REQUIRE(e.code() == Errc::denied);
        }
    }
    SECTION("upload rejects a bad index signature") {
        CspStore fresh;
        REQUIRE_THROWS_AS(upload_index(fresh, "HX", w1.idx, Bytes(64, 0x00)), Error);
    }
}
