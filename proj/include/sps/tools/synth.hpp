#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "sps/common.hpp"
#include "sps/hospital/dataset.hpp"

namespace sps {

struct SnpRow {
    std::string rsid;
    double p_present = 0;
    std::array<double, 3> p_value{};
};

struct SnpStats {
    std::vector<SnpRow> rows;

    void validate() const {
        if (rows.empty()) throw Error(Errc::malformed_input, "stats table is empty");
        for (const SnpRow& row : rows) {
            if (row.rsid.empty()) throw Error(Errc::malformed_input, "stats row without rsid");
            if (row.p_present < 0 || row.p_present > 1)
                throw Error(Errc::malformed_input, "presence probability out of range: " + row.rsid);
            double sum = 0;
            for (double p : row.p_value) {
                if (p < 0 || p > 1)
                    throw Error(Errc::malformed_input, "value probability out of range: " + row.rsid);
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-6)
                throw Error(Errc::malformed_input, "value probabilities do not sum to 1: " + row.rsid);
        }
    }
};

// Row format: "rsid p_present p0 p1 p2". Blank lines and '#' comments allowed.
inline SnpStats stats_from_text(const std::string& text) {
    SnpStats stats;
    std::istringstream in(text);
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::istringstream fields(line);
        SnpRow row;
        if (!(fields >> row.rsid >> row.p_present >> row.p_value[0] >> row.p_value[1] >>
              row.p_value[2]))
            throw Error(Errc::malformed_input, "stats line " + std::to_string(lineno) +
                                                   ": expected 'rsid p_present p0 p1 p2'");
        std::string extra;
        if (fields >> extra)
            throw Error(Errc::malformed_input,
                        "stats line " + std::to_string(lineno) + ": trailing field '" + extra + "'");
        stats.rows.push_back(std::move(row));
    }
    stats.validate();
    return stats;
}

inline std::string stats_to_text(const SnpStats& stats) {
    std::ostringstream out;
    out.precision(std::numeric_limits<double>::max_digits10);
    for (const SnpRow& row : stats.rows)
        out << row.rsid << ' ' << row.p_present << ' ' << row.p_value[0] << ' ' << row.p_value[1]
            << ' ' << row.p_value[2] << '\n';
    return out.str();
}

inline SnpStats load_stats(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(Errc::io_error, "cannot open stats file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return stats_from_text(buf.str());
}

// Deterministic table of plausible rows: allele frequency q drives the value
// split (1-q)^2 : 2q(1-q) : q^2.
inline SnpStats synthetic_stats(size_t n_rsids, uint64_t seed) {
    SeededRng rng(seed);
    SnpStats stats;
    for (size_t i = 0; i < n_rsids; i++) {
        SnpRow row;
        row.rsid = "rs" + std::to_string(1000 + i);
        row.p_present = 0.55 + 0.43 * rng.unit();
        double q = 0.05 + 0.45 * rng.unit();
        row.p_value = {(1 - q) * (1 - q), 2 * q * (1 - q), q * q};
        double sum = row.p_value[0] + row.p_value[1] + row.p_value[2];
        for (double& p : row.p_value) p /= sum;
        stats.rows.push_back(std::move(row));
    }
    stats.validate();
    return stats;
}

struct SynthParams {
    size_t asi_groups_min = 1;
    size_t asi_groups_max = 5;
    size_t asi_snps_min = 20;
    size_t asi_snps_max = 2000;
};

inline std::vector<PatientRecord> gen_synthetic(const SnpStats& stats, size_t n_patients,
                                                uint64_t seed, const SynthParams& params = {}) {
    stats.validate();
    if (params.asi_groups_min > params.asi_groups_max ||
        params.asi_snps_min > params.asi_snps_max || params.asi_snps_min == 0)
        throw Error(Errc::malformed_input, "bad synthetic data parameters");

    SeededRng rng(seed);
    std::vector<PatientRecord> out;
    out.reserve(n_patients);
    for (size_t i = 0; i < n_patients; i++) {
        PatientRecord rec;
        rec.pseudonym = rng.bytes(pseudonym_bytes);
        for (const SnpRow& row : stats.rows) {
            if (rng.unit() >= row.p_present) continue;
            double u = rng.unit();
            uint8_t value = u < row.p_value[0] ? 0 : (u < row.p_value[0] + row.p_value[1] ? 1 : 2);
            rec.snps.push_back(SnpPair{row.rsid, value});
        }
        if (!rec.snps.empty()) {
            size_t groups = params.asi_groups_min +
                            rng.below(params.asi_groups_max - params.asi_groups_min + 1);
            size_t lo = std::min(params.asi_snps_min, rec.snps.size());
            size_t hi = std::min(params.asi_snps_max, rec.snps.size());
            for (size_t g = 0; g < groups; g++) {
                AsiGroup group;
                group.text = to_bytes("asi " + std::to_string(i) + "/" + std::to_string(g) + " " +
                                      to_hex(rng.bytes(8)));
                size_t take = lo + rng.below(hi - lo + 1);
                std::vector<size_t> pick(rec.snps.size());
                for (size_t j = 0; j < pick.size(); j++) pick[j] = j;
                for (size_t j = 0; j < take; j++)
                    std::swap(pick[j], pick[j + rng.below(pick.size() - j)]);
                for (size_t j = 0; j < take; j++) group.snps.push_back(rec.snps[pick[j]]);
                rec.asi_groups.push_back(std::move(group));
            }
        }
        validate_record(rec);
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace sps
