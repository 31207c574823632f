#pragma once

#include <json.hpp>
#include <istream>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "sps/common.hpp"
#include "sps/index/index_gen.hpp"

namespace sps {

struct SnpPair {
    std::string rsid;
    uint8_t value = 0;  // 0, 1, or 2 minor alleles

    auto operator<=>(const SnpPair&) const = default;
};

// Canonical byte form of a SNP pair: length-prefixed rsid followed by the
// value byte. The prefix keeps (rs1, 12) and (rs11, 2) distinct.
inline Bytes snp_item(const SnpPair& s) {
    Bytes out;
    append_u64le(out, s.rsid.size());
    append(out, to_bytes(s.rsid));
    out.push_back(s.value);
    return out;
}

struct AsiGroup {
    Bytes text;
    std::vector<SnpPair> snps;
};

struct PatientRecord {
    Bytes pseudonym;  // 16 bytes
    std::vector<SnpPair> snps;
    std::vector<AsiGroup> asi_groups;
};

inline void validate_record(const PatientRecord& rec) {
    if (rec.pseudonym.size() != pseudonym_bytes)
        throw Error(Errc::malformed_input, "pseudonym must be 16 bytes");
    std::set<SnpPair> have;
    for (const SnpPair& s : rec.snps) {
        if (s.value > 2) throw Error(Errc::malformed_input, "snp value out of range");
        if (s.rsid.empty()) throw Error(Errc::malformed_input, "empty rsid");
        have.insert(s);
    }
    for (const AsiGroup& g : rec.asi_groups)
        for (const SnpPair& s : g.snps)
            if (!have.count(s))
                throw Error(Errc::malformed_input, "asi snp set not contained in record snps");
}

inline SnpPair snp_from_ref(const std::string& ref) {
    size_t colon = ref.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 2 != ref.size())
        throw Error(Errc::malformed_input, "snp reference must be rsid:value");
    char v = ref[colon + 1];
    if (v < '0' || v > '2') throw Error(Errc::malformed_input, "snp value out of range");
    return SnpPair{ref.substr(0, colon), uint8_t(v - '0')};
}

inline std::string snp_to_ref(const SnpPair& s) {
    return s.rsid + ":" + std::to_string(int(s.value));
}

inline PatientRecord record_from_json(const nlohmann::json& j, Rng& rng) {
    PatientRecord rec;
    try {
        if (j.contains("pseudonym"))
            rec.pseudonym = from_hex(j.at("pseudonym").get<std::string>());
        else
            rec.pseudonym = rng.bytes(pseudonym_bytes);
        for (const auto& s : j.at("snps")) {
            int v = s.at("val").get<int>();
            if (v < 0 || v > 2) throw Error(Errc::malformed_input, "snp value out of range");
            rec.snps.push_back(SnpPair{s.at("id").get<std::string>(), uint8_t(v)});
        }
        if (j.contains("asi"))
            for (const auto& g : j.at("asi")) {
                AsiGroup group;
                group.text = to_bytes(g.at("text").get<std::string>());
                for (const auto& ref : g.at("snps"))
                    group.snps.push_back(snp_from_ref(ref.get<std::string>()));
                rec.asi_groups.push_back(std::move(group));
            }
    } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::malformed_input, std::string("record parse: ") + e.what());
    }
    validate_record(rec);
    return rec;
}

inline nlohmann::json record_to_json(const PatientRecord& rec) {
    nlohmann::json j;
    j["pseudonym"] = to_hex(rec.pseudonym);
    j["snps"] = nlohmann::json::array();
    for (const SnpPair& s : rec.snps) j["snps"].push_back({{"id", s.rsid}, {"val", int(s.value)}});
    j["asi"] = nlohmann::json::array();
    for (const AsiGroup& g : rec.asi_groups) {
        nlohmann::json gj;
        gj["text"] = to_string(g.text);
        gj["snps"] = nlohmann::json::array();
        for (const SnpPair& s : g.snps) gj["snps"].push_back(snp_to_ref(s));
        j["asi"].push_back(std::move(gj));
    }
    return j;
}

// One JSON object per line; blank lines skipped.
inline std::vector<PatientRecord> read_records(std::istream& in, Rng& rng) {
    std::vector<PatientRecord> out;
    std::string line;
    size_t lineno = 0;
    while (std::getline(in, line)) {
        lineno++;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded())
            throw Error(Errc::malformed_input, "bad json on line " + std::to_string(lineno));
        out.push_back(record_from_json(j, rng));
    }
    return out;
}

inline void write_records(std::ostream& out, const std::vector<PatientRecord>& records) {
    for (const PatientRecord& rec : records) out << record_to_json(rec).dump() << "\n";
}

}  // namespace sps
