#pragma once

// Project headers come first: httplib drags in <resolv.h>, whose _res macro
// mangles identifiers inside Eigen if Eigen is parsed afterwards.
#include "sps/config.hpp"
#include "sps/csp/store.hpp"
#include "sps/index/io.hpp"

#include <httplib.h>
#ifdef _res
#undef _res
#endif
#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <shared_mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace sps {

namespace wire {

inline const nlohmann::json& require_field(const nlohmann::json& j, const char* field) {
    auto it = j.find(field);
    if (it == j.end())
        throw Error(Errc::malformed_input, std::string("missing field: ") + field);
    return *it;
}

inline std::string require_string(const nlohmann::json& j, const char* field) {
    const nlohmann::json& v = require_field(j, field);
    if (!v.is_string())
        throw Error(Errc::malformed_input, std::string("field must be a string: ") + field);
    return v.get<std::string>();
}

inline uint64_t require_uint(const nlohmann::json& j, const char* field) {
    const nlohmann::json& v = require_field(j, field);
    if (!v.is_number_integer() && !v.is_number_unsigned())
        throw Error(Errc::malformed_input, std::string("field must be an integer: ") + field);
    if (v.is_number_integer() && v.get<int64_t>() < 0)
        throw Error(Errc::malformed_input, std::string("field must be non-negative: ") + field);
    return v.get<uint64_t>();
}

inline const nlohmann::json& require_array(const nlohmann::json& j, const char* field) {
    const nlohmann::json& v = require_field(j, field);
    if (!v.is_array())
        throw Error(Errc::malformed_input, std::string("field must be an array: ") + field);
    return v;
}

inline Bytes require_bytes(const nlohmann::json& j, const char* field) {
    return base64url_decode(require_string(j, field));
}

inline std::vector<Bytes> require_bytes_list(const nlohmann::json& j, const char* field) {
    std::vector<Bytes> out;
    for (const nlohmann::json& item : require_array(j, field)) {
        if (!item.is_string())
            throw Error(Errc::malformed_input, std::string("array of strings expected: ") + field);
        out.push_back(base64url_decode(item.get<std::string>()));
    }
    return out;
}

}  // namespace wire

// HTTP front end for the store. Reads run against an immutable snapshot
// grabbed under a shared lock; writes copy the store, mutate the copy, and
// swap the snapshot pointer, so no request ever sees a half-applied change.
class CspService {
   public:
    explicit CspService(SystemConfig cfg, bool fast_merge = true)
        : cfg_(std::move(cfg)),
          search_cfg_(cfg_.search()),
          fingerprint_(cfg_.fingerprint()),
          fast_merge_(fast_merge),
          snapshot_(std::make_shared<const CspStore>()) {
        route();
    }

    CspService(const CspService&) = delete;
    CspService& operator=(const CspService&) = delete;
    ~CspService() { stop(); }

    // Binds (an ephemeral port when port == 0), then serves on a background
    // thread. Returns the bound port.
    int start(const std::string& host = "127.0.0.1", int port = 0) {
        if (server_thread_.joinable()) throw Error(Errc::io_error, "service already running");
        int bound = port;
        if (port == 0) {
            bound = server_.bind_to_any_port(host);
            if (bound < 0) throw Error(Errc::io_error, "cannot bind " + host);
        } else if (!server_.bind_to_port(host, port)) {
            throw Error(Errc::io_error, "cannot bind " + host + ":" + std::to_string(port));
        }
        port_ = bound;
        stopping_ = false;
        merge_worker_ = std::thread([this] { merge_loop(); });
        server_thread_ = std::thread([this] { server_.listen_after_bind(); });
        server_.wait_until_ready();
        return bound;
    }

    void stop() {
        if (server_thread_.joinable()) {
            server_.stop();
            server_thread_.join();
        }
        {
            std::lock_guard<std::mutex> lock(merge_mutex_);
            stopping_ = true;
        }
        merge_cv_.notify_all();
        if (merge_worker_.joinable()) merge_worker_.join();
    }

    int port() const { return port_; }
    const SystemConfig& config() const { return cfg_; }
    Bytes fingerprint() const { return fingerprint_; }

    std::shared_ptr<const CspStore> snapshot() const {
        std::shared_lock lock(snapshot_mutex_);
        return snapshot_;
    }

    // Waits until a merged index built from at least `min_indices` uploads is
    // visible; false on timeout. Test and tooling hook.
    bool wait_for_merge(std::chrono::milliseconds timeout) const {
        auto deadline = std::chrono::steady_clock::now() + timeout;
        while (std::chrono::steady_clock::now() < deadline) {
            if (snapshot()->merged.has_value()) return true;
            std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        return snapshot()->merged.has_value();
    }

   private:
    void swap_in(std::shared_ptr<const CspStore> next) {
        std::unique_lock lock(snapshot_mutex_);
        snapshot_ = std::move(next);
    }

    void route() {
        server_.Post("/v1/upload_index", wrap([this](const nlohmann::json& in) {
                         return on_upload_index(in);
                     }));
        server_.Post("/v1/upload_ciphertexts", wrap([this](const nlohmann::json& in) {
                         return on_upload_ciphertexts(in);
                     }));
        server_.Post("/v1/register_shared_key", wrap([this](const nlohmann::json& in) {
                         return on_register_shared_key(in);
                     }));
        server_.Post("/v1/query",
                     wrap([this](const nlohmann::json& in) { return on_query(in); }));
        server_.Post("/v1/merge_now",
                     wrap([this](const nlohmann::json& in) { return on_merge_now(in); }));
    }

    httplib::Server::Handler wrap(std::function<nlohmann::json(const nlohmann::json&)> fn) {
        return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
            nlohmann::json out;
            int status = 200;
            try {
                nlohmann::json in = nlohmann::json::parse(req.body, nullptr, false);
                if (in.is_discarded())
                    throw Error(Errc::malformed_input, "request body is not JSON");
                out = fn(in);
            } catch (const Error& e) {
                out = {{"error_code", errc_name(e.code())}, {"message", e.what()}};
                status = e.code() == Errc::denied ? 403 : 400;
            } catch (const std::exception& e) {
                out = {{"error_code", "io_error"}, {"message", e.what()}};
                status = 500;
            }
            res.status = status;
            res.set_content(out.dump(), "application/json");
        };
    }

    nlohmann::json on_upload_index(const nlohmann::json& in) {
        std::string hospital_id = wire::require_string(in, "hospital_id");
        Bytes blob = wire::require_bytes(in, "index_blob");
        Bytes sigma = wire::require_bytes(in, "sigma");
        auto [index, embedded_sigma] = parse_hier(blob);
        (void)embedded_sigma;  // the message field is authoritative
        if (!index.dict.empty() &&
            index.dict.begin()->second.size() != cfg_.effective_cbf_length())
            throw Error(Errc::config_mismatch, "filter length differs from system config");

        size_t count = 0;
        {
            std::unique_lock wl(write_mutex_);
            auto next = std::make_shared<CspStore>(*snapshot());
            upload_index(*next, hospital_id, std::move(index), std::move(sigma));
            count = next->hier_indices.size();
            index_version_++;
            swap_in(std::move(next));
        }
        if (merge_heuristic(count, cfg_.merge_threshold)) request_merge();
        return {{"ok", true}};
    }

    nlohmann::json on_upload_ciphertexts(const nlohmann::json& in) {
        std::string hospital_id = wire::require_string(in, "hospital_id");
        Bytes snp_blob = wire::require_bytes(in, "snp_blob");
        AbeKeys abe;
        abe.pk = AbePublicKey::deserialize(wire::require_bytes(in, "abe_pk"));
        abe.mk = AbeMasterKey::deserialize(wire::require_bytes(in, "abe_mk"));

        std::map<Bytes, std::vector<AsiCiphertext>> asi;
        for (const nlohmann::json& entry : wire::require_array(in, "asi_entries")) {
            Bytes pseudonym = wire::require_bytes(entry, "pseudonym");
            if (pseudonym.size() != pseudonym_bytes)
                throw Error(Errc::malformed_input, "pseudonym must be 16 bytes");
            AsiCiphertext ct;
            ct.c3 = AbeCiphertext::deserialize(wire::require_bytes(entry, "c3"));
            ct.c2 = wire::require_bytes(entry, "c2");
            ct.tau = wire::require_bytes(entry, "tau");
            if (ct.tau.size() != tau_bytes)
                throw Error(Errc::malformed_input, "tau must be 32 bytes");
            asi[pseudonym].push_back(std::move(ct));
        }

        std::unique_lock wl(write_mutex_);
        auto next = std::make_shared<CspStore>(*snapshot());
        upload_ciphertexts(*next, hospital_id, std::move(snp_blob), std::move(asi),
                           std::move(abe));
        swap_in(std::move(next));
        return {{"ok", true}};
    }

    nlohmann::json on_register_shared_key(const nlohmann::json& in) {
        std::string hospital_id = wire::require_string(in, "hospital_id");
        std::string client_id = wire::require_string(in, "client_id");
        SharedKey key;
        key.delta = G2Element::deserialize(wire::require_bytes(in, "delta"));
        key.cbf = CustomizedBloomFilter::deserialize(wire::require_bytes(in, "cbf_blob"));
        if (key.cbf.size() != cfg_.effective_cbf_length())
            throw Error(Errc::config_mismatch, "shared key filter length differs from config");

        std::unique_lock wl(write_mutex_);
        auto next = std::make_shared<CspStore>(*snapshot());
        register_shared_key(*next, hospital_id, client_id, std::move(key));
        swap_in(std::move(next));
        return {{"ok", true}};
    }

    nlohmann::json on_query(const nlohmann::json& in) {
        std::string client_id = wire::require_string(in, "client_id");
        if (wire::require_bytes(in, "config_fingerprint") != fingerprint_)
            throw Error(Errc::config_mismatch, "client and service configs differ");

        Query query;
        query.e_set = wire::require_bytes_list(in, "e_set");
        query.epsilon_bits = wire::require_uint(in, "epsilon_bits");
        query.k_c = uint32_t(wire::require_uint(in, "k_c"));
        query.sigmas = wire::require_bytes_list(in, "sigmas");

        TokenSet tokens;
        for (const Bytes& raw : wire::require_bytes_list(in, "tokens"))
            tokens.tokens.push_back(G1Element::deserialize(raw));

        SystemRng rng;
        QueryResponse resp =
            handle_query(*snapshot(), client_id, query, tokens, search_cfg_, rng);

        nlohmann::json matches = nlohmann::json::array();
        for (const MatchRow& m : resp.matches)
            matches.push_back({{"hospital_id", m.hospital_id},
                               {"pseudonym", base64url_encode(m.pseudonym)},
                               {"score", m.score}});
        nlohmann::json asi = nlohmann::json::array();
        for (const Bytes& c1 : resp.asi_ciphertexts) asi.push_back(base64url_encode(c1));
        return {{"matches", std::move(matches)}, {"asi_ciphertexts", std::move(asi)}};
    }

    nlohmann::json on_merge_now(const nlohmann::json&) {
        std::unique_lock wl(write_mutex_);
        auto cur = snapshot();
        if (cur->hier_indices.size() < 2)
            throw Error(Errc::malformed_input, "need at least two indices to merge");
        auto next = std::make_shared<CspStore>(*cur);
        build_merged(*next, merge_policy());
        swap_in(std::move(next));
        return {{"ok", true}};
    }

    MergePolicy merge_policy() const {
        return MergePolicy{cfg_.merge_threshold, fast_merge_, cfg_.mds_dim};
    }

    void request_merge() {
        {
            std::lock_guard<std::mutex> lock(merge_mutex_);
            merge_requested_ = true;
        }
        merge_cv_.notify_one();
    }

    void merge_loop() {
        std::unique_lock<std::mutex> lock(merge_mutex_);
        while (true) {
            merge_cv_.wait(lock, [&] { return merge_requested_ || stopping_; });
            if (stopping_) return;
            merge_requested_ = false;
            lock.unlock();
            background_merge();
            lock.lock();
        }
    }

    // Build from a snapshot without blocking writers; install only if no new
    // index arrived meanwhile (a newer upload re-requests the merge anyway).
    void background_merge() {
        uint64_t version = index_version_.load();
        std::vector<HierarchicalIndex> indices;
        {
            auto s = snapshot();
            if (s->hier_indices.size() < 2) return;
            indices.reserve(s->hier_indices.size());
            for (const auto& [id, idx] : s->hier_indices) indices.push_back(idx);
        }
        MergePolicy policy = merge_policy();
        MergedIndex merged = policy.fast ? index_merge_fast(indices, policy.mds_dim)
                                         : index_merge_full(indices, policy.mds_dim);
        std::unique_lock wl(write_mutex_);
        if (index_version_.load() != version) return;
        auto next = std::make_shared<CspStore>(*snapshot());
        next->merged = std::move(merged);
        swap_in(std::move(next));
    }

    SystemConfig cfg_;
    SearchConfig search_cfg_;
    Bytes fingerprint_;
    bool fast_merge_ = true;

    mutable std::shared_mutex snapshot_mutex_;
    std::shared_ptr<const CspStore> snapshot_;
    std::mutex write_mutex_;
    std::atomic<uint64_t> index_version_{0};

    std::mutex merge_mutex_;
    std::condition_variable merge_cv_;
    bool merge_requested_ = false;
    bool stopping_ = false;
    std::thread merge_worker_;

    httplib::Server server_;
    std::thread server_thread_;
    int port_ = 0;
};

}  // namespace sps
