// Command line front end: key management, synthetic data, index and
// ciphertext preparation, the search service, and client-side querying.

#include "sps/config.hpp"
#include "sps/csp/service.hpp"
#include "sps/tools/bench.hpp"
#include "sps/tools/keyfiles.hpp"
#include "sps/tools/oracle.hpp"
#include "sps/tools/synth.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <csignal>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace sps;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};
void handle_signal(int) { g_stop = true; }

SystemConfig load_or_default(const std::string& path) {
    if (path.empty()) return SystemConfig{};
    return load_config(path);
}

json post_json(const std::string& server, const std::string& path, const json& body) {
    httplib::Client cli(server);
    cli.set_connection_timeout(10);
    cli.set_read_timeout(120);
    auto res = cli.Post(path, body.dump(), "application/json");
    if (!res) throw Error(Errc::io_error, "cannot reach " + server + path);
    json out = json::parse(res->body, nullptr, false);
    if (out.is_discarded())
        throw Error(Errc::io_error, "non-json reply from " + server + path);
    if (res->status != 200) {
        std::string code = out.value("error_code", "unknown");
        std::string msg = out.value("message", res->body);
        throw Error(code == "denied" ? Errc::denied : Errc::io_error,
                    "server refused " + path + ": " + code + " (" + msg + ")");
    }
    return out;
}

std::vector<PatientRecord> records_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot read " + path);
    SystemRng rng;
    return read_records(in, rng);
}

std::vector<SnpPair> dedup_snps(std::vector<SnpPair> snps) {
    std::set<SnpPair> uniq(snps.begin(), snps.end());
    return {uniq.begin(), uniq.end()};
}

struct SnpInput {
    std::string inline_refs;
    std::string refs_file;
    std::string record_file;
    int64_t record_number = -1;

    std::vector<SnpPair> resolve() const {
        int sources = int(!inline_refs.empty()) + int(!refs_file.empty()) +
                      int(!record_file.empty());
        if (sources != 1)
            throw Error(Errc::malformed_input,
                        "give exactly one of --snps, --snps-file, --from-record");
        std::vector<SnpPair> out;
        if (!inline_refs.empty()) {
            std::stringstream ss(inline_refs);
            std::string ref;
            while (std::getline(ss, ref, ',')) out.push_back(snp_from_ref(ref));
        } else if (!refs_file.empty()) {
            std::ifstream in(refs_file);
            if (!in) throw Error(Errc::io_error, "cannot read " + refs_file);
            std::string line;
            while (std::getline(in, line)) {
                if (!line.empty() && line.back() == '\r') line.pop_back();
                if (line.empty() || line[0] == '#') continue;
                out.push_back(snp_from_ref(line));
            }
        } else {
            auto records = records_from_file(record_file);
            if (record_number < 0 || size_t(record_number) >= records.size())
                throw Error(Errc::malformed_input, "--record out of range");
            out = records[size_t(record_number)].snps;
        }
        return dedup_snps(std::move(out));
    }
};

json index_upload_message(const std::string& hospital_id, const Bytes& blob, const Bytes& sigma) {
    return {{"hospital_id", hospital_id},
            {"index_blob", base64url_encode(blob)},
            {"sigma", base64url_encode(sigma)}};
}

int run(int argc, char** argv) {
    CLI::App app{"similar patient search over encrypted genomic indices"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "system parameters file")->capture_default_str();

    // keygen
    auto* keygen = app.add_subcommand("keygen", "create key material");
    std::string kg_hospital, kg_out, kg_scheme = "ed25519";
    bool kg_global = false, kg_client = false;
    keygen->add_option("--hospital", kg_hospital, "hospital id; writes a hospital key bundle");
    keygen->add_flag("--global", kg_global, "write the shared record-indexing key");
    keygen->add_flag("--client", kg_client, "write a fresh client key file");
    keygen->add_option("--sig-scheme", kg_scheme, "ed25519 or rsa3096")->capture_default_str();
    keygen->add_option("--out", kg_out, "output path")->required();

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "generate a synthetic patient cohort");
    std::string gd_stats, gd_out;
    uint64_t gd_patients = 100, gd_seed = 1;
    SynthParams gd_params;
    gen->add_option("--stats", gd_stats, "per-rsid stats file")->required();
    gen->add_option("--patients", gd_patients, "number of records")->capture_default_str();
    gen->add_option("--seed", gd_seed, "generator seed")->capture_default_str();
    gen->add_option("--asi-groups-min", gd_params.asi_groups_min)->capture_default_str();
    gen->add_option("--asi-groups-max", gd_params.asi_groups_max)->capture_default_str();
    gen->add_option("--asi-snps-min", gd_params.asi_snps_min)->capture_default_str();
    gen->add_option("--asi-snps-max", gd_params.asi_snps_max)->capture_default_str();
    gen->add_option("--out", gd_out, "records file (json lines)")->required();

    // ingest
    auto* ingest = app.add_subcommand("ingest", "validate and normalize a records file");
    std::string in_records, in_out;
    ingest->add_option("--records", in_records, "records file")->required();
    ingest->add_option("--out", in_out, "normalized output file")->required();

    // index
    auto* index = app.add_subcommand("index", "build the searchable index for a cohort");
    std::string ix_keys, ix_global, ix_records, ix_out, ix_server;
    index->add_option("--keys", ix_keys, "hospital key bundle")->required();
    index->add_option("--global-key", ix_global, "shared record-indexing key")->required();
    index->add_option("--records", ix_records, "records file")->required();
    index->add_option("--out", ix_out, "index blob output")->required();
    index->add_option("--server", ix_server, "also upload to this service");

    // encrypt
    auto* encrypt = app.add_subcommand("encrypt", "encrypt records and annotations for upload");
    std::string en_keys, en_records, en_out, en_server;
    encrypt->add_option("--keys", en_keys, "hospital key bundle")->required();
    encrypt->add_option("--records", en_records, "records file")->required();
    encrypt->add_option("--out", en_out, "write the upload message to this file");
    encrypt->add_option("--server", en_server, "upload to this service");

    // serve
    auto* serve = app.add_subcommand("serve", "run the search service");
    std::string sv_host = "127.0.0.1", sv_mode;
    int sv_port = 8470;
    int64_t sv_threshold = -1;
    bool sv_full_merge = false;
    serve->add_option("--host", sv_host)->capture_default_str();
    serve->add_option("--port", sv_port, "0 picks an ephemeral port")->capture_default_str();
    serve->add_option("--mode", sv_mode, "default or strict-cosine (overrides config)");
    serve->add_option("--merge-threshold", sv_threshold, "indices needed before auto-merge");
    serve->add_flag("--full-merge", sv_full_merge, "recluster during merges (default: fast)");

    // authorize
    auto* authorize = app.add_subcommand("authorize", "grant a client access to a cohort");
    std::string au_keys, au_global, au_index, au_client_key, au_client_id, au_scope, au_server;
    bool au_deny = false;
    authorize->add_option("--keys", au_keys, "hospital key bundle")->required();
    authorize->add_option("--global-key", au_global, "shared record-indexing key")->required();
    authorize->add_option("--index", au_index, "index blob built for this cohort")->required();
    authorize->add_option("--client-key", au_client_key, "client key file to extend")->required();
    authorize->add_option("--client-id", au_client_id, "client name")->required();
    authorize->add_option("--scope-records", au_scope, "records whose snps the client may probe")
        ->required();
    authorize->add_option("--server", au_server, "service to register the shared key with")
        ->required();
    authorize->add_flag("--deny", au_deny, "simulate a refused request");

    // query
    auto* query = app.add_subcommand("query", "search for similar patients");
    std::string qu_client_key, qu_server, qu_client_id;
    SnpInput qu_snps;
    double qu_eps = 0.9;
    uint32_t qu_k = 5;
    query->add_option("--client-key", qu_client_key, "client key file")->required();
    query->add_option("--client-id", qu_client_id, "client name used during authorization")
        ->required();
    query->add_option("--server", qu_server, "service url")->required();
    query->add_option("--snps", qu_snps.inline_refs, "comma separated rsid:value refs");
    query->add_option("--snps-file", qu_snps.refs_file, "file with one rsid:value per line");
    query->add_option("--from-record", qu_snps.record_file, "records file to take snps from");
    query->add_option("--record", qu_snps.record_number, "record number inside --from-record");
    query->add_option("--epsilon", qu_eps, "similarity threshold in (0,1]")->capture_default_str();
    query->add_option("--k", qu_k, "result list size")->capture_default_str();

    // merge
    auto* merge = app.add_subcommand("merge", "merge all uploaded indices now");
    std::string mg_server;
    merge->add_option("--server", mg_server, "service url")->required();

    // bench
    auto* bench = app.add_subcommand("bench", "compare per-index and merged search timings");
    uint64_t be_hospitals = 10, be_patients = 100, be_snps = 120, be_queries = 5, be_seed = 1;
    bool be_full_merge = false;
    bench->add_option("--hospitals", be_hospitals)->capture_default_str();
    bench->add_option("--patients", be_patients, "patients per hospital")->capture_default_str();
    bench->add_option("--snps", be_snps, "snp universe size")->capture_default_str();
    bench->add_option("--queries", be_queries)->capture_default_str();
    bench->add_option("--seed", be_seed)->capture_default_str();
    bench->add_flag("--full-merge", be_full_merge, "recluster instead of fast structural merge");

    CLI11_PARSE(app, argc, argv);

    if (keygen->parsed()) {
        int kinds = int(!kg_hospital.empty()) + int(kg_global) + int(kg_client);
        if (kinds != 1)
            throw Error(Errc::malformed_input,
                        "give exactly one of --hospital <id>, --global, --client");
        SystemRng rng;
        if (!kg_hospital.empty()) {
            HospitalKeyBundle b =
                hospital_setup(kg_hospital, rng, crypto::sig_scheme_from_name(kg_scheme));
            write_file(kg_out, serialize_hospital_keys(b));
            std::cout << "hospital key bundle for " << kg_hospital << " -> " << kg_out << "\n";
        } else if (kg_global) {
            write_file(kg_out, serialize_prf_key(crypto::prf_keygen(rng)));
            std::cout << "shared record-indexing key -> " << kg_out << "\n";
        } else {
            ClientKeys c;
            c.k_c = crypto::Scalar::random(rng);
            write_file(kg_out, serialize_client_keys(c));
            std::cout << "client key file -> " << kg_out << "\n";
        }
        return 0;
    }

    if (gen->parsed()) {
        SnpStats stats = load_stats(gd_stats);
        auto records = gen_synthetic(stats, gd_patients, gd_seed, gd_params);
        std::ofstream out(gd_out, std::ios::trunc);
        if (!out) throw Error(Errc::io_error, "cannot write " + gd_out);
        write_records(out, records);
        std::cout << records.size() << " records -> " << gd_out << "\n";
        return 0;
    }

    if (ingest->parsed()) {
        auto records = records_from_file(in_records);
        std::set<SnpPair> universe;
        size_t groups = 0;
        for (const PatientRecord& rec : records) {
            universe.insert(rec.snps.begin(), rec.snps.end());
            groups += rec.asi_groups.size();
        }
        std::ofstream out(in_out, std::ios::trunc);
        if (!out) throw Error(Errc::io_error, "cannot write " + in_out);
        write_records(out, records);
        std::cout << records.size() << " records, " << universe.size() << " distinct snps, "
                  << groups << " annotation groups -> " << in_out << "\n";
        return 0;
    }

    if (index->parsed()) {
        SystemConfig cfg = load_or_default(config_path);
        HospitalKeyBundle keys = parse_hospital_keys(read_file(ix_keys));
        crypto::PrfKey k = parse_prf_key(read_file(ix_global));
        auto records = records_from_file(ix_records);
        Preprocessed pre = preprocess(records, cfg.bf_capacity, cfg.bf_fp);
        SystemRng rng;
        EncryptedIndex enc = index_gen(k, pre.dict_bf, keys.sig_keys, cfg.cbf(), rng);
        HierarchicalIndex idx = build_hierarchical(enc, cfg.mds_dim);
        Bytes blob = serialize_hier(idx, enc.sigma);
        write_file(ix_out, blob);
        std::cout << "index over " << records.size() << " records -> " << ix_out << "\n";
        if (!ix_server.empty()) {
            post_json(ix_server, "/v1/upload_index", index_upload_message(keys.id, blob, enc.sigma));
            std::cout << "uploaded to " << ix_server << "\n";
        }
        return 0;
    }

    if (encrypt->parsed()) {
        if (en_out.empty() && en_server.empty())
            throw Error(Errc::malformed_input, "give --out, --server, or both");
        HospitalKeyBundle keys = parse_hospital_keys(read_file(en_keys));
        auto records = records_from_file(en_records);
        SystemRng rng;
        std::map<Bytes, Bytes> snp_ct = snp_encrypt(keys.k_alpha, records, rng);
        Bytes snp_blob;
        for (const auto& [p, ct] : snp_ct) {
            append_field(snp_blob, p);
            append_field(snp_blob, ct);
        }
        std::map<Bytes, std::vector<AsiGroup>> dict_asi;
        for (const PatientRecord& rec : records)
            if (!rec.asi_groups.empty()) dict_asi[rec.pseudonym] = rec.asi_groups;
        AsiDict asi = asi_encrypt(keys.k_i, keys.k_beta, keys.abe_keys.pk, dict_asi, rng);
        json entries = json::array();
        size_t n_cts = 0;
        for (const auto& [p, cts] : asi)
            for (const AsiCiphertext& ct : cts) {
                entries.push_back({{"pseudonym", base64url_encode(p)},
                                   {"c3", base64url_encode(ct.c3.serialize())},
                                   {"c2", base64url_encode(ct.c2)},
                                   {"tau", base64url_encode(ct.tau)}});
                n_cts++;
            }
        json msg = {{"hospital_id", keys.id},
                    {"snp_blob", base64url_encode(snp_blob)},
                    {"abe_pk", base64url_encode(keys.abe_keys.pk.serialize())},
                    {"abe_mk", base64url_encode(keys.abe_keys.mk.serialize())},
                    {"asi_entries", std::move(entries)}};
        std::cout << snp_ct.size() << " record ciphertexts, " << n_cts
                  << " annotation ciphertexts\n";
        if (!en_out.empty()) {
            write_file(en_out, to_bytes(msg.dump()));
            std::cout << "upload message -> " << en_out << "\n";
        }
        if (!en_server.empty()) {
            post_json(en_server, "/v1/upload_ciphertexts", msg);
            std::cout << "uploaded to " << en_server << "\n";
        }
        return 0;
    }

    if (serve->parsed()) {
        SystemConfig cfg = load_or_default(config_path);
        if (!sv_mode.empty()) cfg.mode = sv_mode;
        if (sv_threshold >= 0) cfg.merge_threshold = uint64_t(sv_threshold);
        cfg.validate();
        CspService service(cfg, !sv_full_merge);
        int port = service.start(sv_host, sv_port);
        std::cout << "listening on " << sv_host << ":" << port << std::endl;
        std::signal(SIGINT, handle_signal);
        std::signal(SIGTERM, handle_signal);
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        service.stop();
        return 0;
    }

    if (authorize->parsed()) {
        SystemConfig cfg = load_or_default(config_path);
        HospitalKeyBundle keys = parse_hospital_keys(read_file(au_keys));
        crypto::PrfKey k = parse_prf_key(read_file(au_global));
        auto [idx, sigma] = parse_hier(read_file(au_index));
        ClientKeys client = parse_client_keys(read_file(au_client_key));

        AuthorizationRequest req;
        req.client_id = au_client_id;
        req.k_c = client.k_c;
        for (const PatientRecord& rec : records_from_file(au_scope))
            for (const SnpPair& s : rec.snps) req.snp_scope.push_back(s);
        req.snp_scope = dedup_snps(std::move(req.snp_scope));

        ApprovalPredicate approve = [&](const std::string&) { return !au_deny; };
        AuthorizationOutcome outcome = authorize_client(keys, k, sigma, req, approve, cfg.cbf());
        if (!outcome.approved) {
            std::cout << "request for " << au_client_id << " refused\n";
            return 1;
        }
        json msg = {{"hospital_id", keys.id},
                    {"client_id", au_client_id},
                    {"delta", base64url_encode(outcome.shared.delta.serialize())},
                    {"cbf_blob", base64url_encode(outcome.shared.cbf.serialize())}};
        post_json(au_server, "/v1/register_shared_key", msg);

        ClientGrant grant;
        grant.hospital_id = keys.id;
        grant.k = outcome.grant.k;
        grant.k_beta = outcome.grant.k_beta;
        grant.sigma = outcome.grant.sigma;
        std::erase_if(client.grants,
                      [&](const ClientGrant& g) { return g.hospital_id == keys.id; });
        client.grants.push_back(std::move(grant));
        write_file(au_client_key, serialize_client_keys(client));
        std::cout << au_client_id << " authorized at " << keys.id << " for "
                  << req.snp_scope.size() << " snps\n";
        return 0;
    }

    if (query->parsed()) {
        SystemConfig cfg = load_or_default(config_path);
        ClientKeys client = parse_client_keys(read_file(qu_client_key));
        if (client.grants.empty()) {
            std::cout << "no authorizations in " << qu_client_key << "\n0 matches\n";
            return 0;
        }
        std::vector<SnpPair> snps = qu_snps.resolve();
        std::vector<Bytes> sigmas;
        for (const ClientGrant& g : client.grants) sigmas.push_back(g.sigma);
        Query q = query_gen(client.grants[0].k, snps, qu_eps, qu_k, sigmas, cfg.bf_capacity,
                            cfg.bf_fp);
        TokenSet tokens = token_gen(client.k_c, snps);

        json e_set = json::array(), sig_list = json::array(), tok_list = json::array();
        for (const Bytes& e : q.e_set) e_set.push_back(base64url_encode(e));
        for (const Bytes& s : q.sigmas) sig_list.push_back(base64url_encode(s));
        for (const crypto::G1Element& t : tokens.tokens)
            tok_list.push_back(base64url_encode(t.serialize()));
        json msg = {{"client_id", qu_client_id},
                    {"config_fingerprint", base64url_encode(cfg.fingerprint())},
                    {"e_set", std::move(e_set)},
                    {"epsilon_bits", q.epsilon_bits},
                    {"k_c", q.k_c},
                    {"sigmas", std::move(sig_list)},
                    {"tokens", std::move(tok_list)}};
        json resp = post_json(qu_server, "/v1/query", msg);

        const json& matches = resp["matches"];
        std::cout << matches.size() << " matches\n";
        for (const json& m : matches)
            std::cout << "  " << m["hospital_id"].get<std::string>() << " "
                      << to_hex(base64url_decode(m["pseudonym"].get<std::string>())) << " score "
                      << m["score"].get<double>() << "\n";

        std::vector<Bytes> cts;
        for (const json& c : resp["asi_ciphertexts"])
            cts.push_back(base64url_decode(c.get<std::string>()));
        std::set<Bytes> texts;
        for (const ClientGrant& g : client.grants) {
            AsiPlaintexts got = asi_decrypt(g.k_beta, cts);
            texts.insert(got.texts.begin(), got.texts.end());
        }
        std::cout << texts.size() << " annotations\n";
        for (const Bytes& t : texts) std::cout << "  asi: " << to_string(t) << "\n";
        return 0;
    }

    if (merge->parsed()) {
        post_json(mg_server, "/v1/merge_now", json::object());
        std::cout << "merged\n";
        return 0;
    }

    if (bench->parsed()) {
        SystemConfig cfg;
        if (!config_path.empty()) {
            cfg = load_config(config_path);
        } else {
            cfg.bf_capacity = 4096;
            cfg.cbf_length = uint64_t(1) << 17;
        }
        BenchReport report = bench_run(be_hospitals, be_patients, be_snps, be_queries, be_seed,
                                       cfg, !be_full_merge);
        std::cout << report.to_text();
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
