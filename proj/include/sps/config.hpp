#pragma once

#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "sps/common.hpp"
#include "sps/crypto/hash.hpp"
#include "sps/csp/search.hpp"
#include "sps/filters/bloom.hpp"
#include "sps/filters/cbf.hpp"

namespace sps {

// System-wide parameters every party must agree on. The fingerprint of the
// canonical form travels inside query envelopes so mismatched deployments
// fail loudly instead of returning garbage similarity scores.
struct SystemConfig {
    uint64_t bf_capacity = uint64_t(1) << 21;
    double bf_fp = 0.01;
    uint64_t cbf_length = 0;  // 0 means: use the derived Bloom filter length
    std::string cbf_seed = "sps-cbf-seed";
    int mds_dim = 8;
    size_t merge_threshold = 50;
    std::string curve = "bn254";
    std::string mode = "default";  // default | strict-cosine

    uint64_t effective_cbf_length() const {
        return cbf_length ? cbf_length : BfParams::derive(bf_capacity, bf_fp).m;
    }

    CbfConfig cbf() const { return CbfConfig{effective_cbf_length(), to_bytes(cbf_seed)}; }

    SearchMode search_mode() const {
        if (mode == "default") return SearchMode::threshold_bits;
        if (mode == "strict-cosine") return SearchMode::strict_cosine;
        throw Error(Errc::unsupported, "unknown mode: " + mode);
    }

    SearchConfig search() const { return SearchConfig{cbf(), search_mode()}; }

    void validate() const {
        if (bf_capacity < 1) throw Error(Errc::malformed_input, "bf_capacity must be positive");
        if (!(bf_fp > 0.0) || !(bf_fp < 1.0))
            throw Error(Errc::malformed_input, "bf_fp out of (0,1)");
        if (mds_dim < 1) throw Error(Errc::malformed_input, "mds_dim must be positive");
        if (curve != "bn254") throw Error(Errc::unsupported, "unknown curve: " + curve);
        search_mode();
    }

    std::string canonical() const {
        std::ostringstream out;
        out.precision(std::numeric_limits<double>::max_digits10);
        out << "bf_capacity = " << bf_capacity << "\n";
        out << "bf_fp = " << bf_fp << "\n";
        out << "cbf_length = " << effective_cbf_length() << "\n";
        out << "cbf_seed = " << cbf_seed << "\n";
        out << "curve = " << curve << "\n";
        out << "mds_dim = " << mds_dim << "\n";
        out << "merge_threshold = " << merge_threshold << "\n";
        out << "mode = " << mode << "\n";
        return out.str();
    }

    Bytes fingerprint() const { return crypto::fingerprint_hash(to_bytes(canonical())); }
};

// Text map format: one "key = value" per line, '#' starts a comment.
inline SystemConfig config_from_text(const std::string& text) {
    SystemConfig cfg;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (size_t hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        size_t eq = line.find('=');
        std::string key, value;
        if (eq != std::string::npos) {
            key = line.substr(0, eq);
            value = line.substr(eq + 1);
        } else {
            std::istringstream pair(line);
            pair >> key >> value;
        }
        auto trim = [](std::string& s) {
            size_t a = s.find_first_not_of(" \t\r");
            size_t b = s.find_last_not_of(" \t\r");
            s = (a == std::string::npos) ? "" : s.substr(a, b - a + 1);
        };
        trim(key);
        trim(value);
        if (key.empty()) continue;
        try {
            if (key == "bf_capacity") cfg.bf_capacity = std::stoull(value);
            else if (key == "bf_fp") cfg.bf_fp = std::stod(value);
            else if (key == "cbf_length") cfg.cbf_length = std::stoull(value);
            else if (key == "cbf_seed") cfg.cbf_seed = value;
            else if (key == "mds_dim") cfg.mds_dim = std::stoi(value);
            else if (key == "merge_threshold") cfg.merge_threshold = std::stoull(value);
            else if (key == "curve") cfg.curve = value;
            else if (key == "mode") cfg.mode = value;
            else throw Error(Errc::malformed_input,
                             "unknown config key '" + key + "' at line " + std::to_string(lineno));
        } catch (const std::invalid_argument&) {
            throw Error(Errc::malformed_input,
                        "bad value for '" + key + "' at line " + std::to_string(lineno));
        } catch (const std::out_of_range&) {
            throw Error(Errc::malformed_input,
                        "value out of range for '" + key + "' at line " + std::to_string(lineno));
        }
    }
    cfg.validate();
    return cfg;
}

inline SystemConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_text(buf.str());
}

}  // namespace sps
