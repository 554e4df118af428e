#include "sqz/io.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace sqz::io {

std::string format_double(double v) {
    char buf[40];
    // shortest representation that round-trips
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

namespace {

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

// header = axes of the first record, then the union of payload keys in
// first-seen order, then the error column
struct Columns {
    std::vector<std::string> coords;
    std::vector<std::string> payload;
};

Columns collect_columns(const std::vector<sweep::RunRecord>& records) {
    Columns cols;
    if (records.empty()) return cols;
    for (const auto& [name, _] : records.front().coords) cols.coords.push_back(name);
    for (const auto& rec : records) {
        for (const auto& [name, _] : rec.payload) {
            if (std::find(cols.payload.begin(), cols.payload.end(), name) ==
                cols.payload.end()) {
                cols.payload.push_back(name);
            }
        }
    }
    return cols;
}

} // namespace

std::string to_csv(const std::vector<sweep::RunRecord>& records) {
    const Columns cols = collect_columns(records);
    std::string out;
    for (const auto& name : cols.coords) {
        out += csv_quote(name);
        out += ',';
    }
    for (const auto& name : cols.payload) {
        out += csv_quote(name);
        out += ',';
    }
    out += "error\n";

    for (const auto& rec : records) {
        std::string line;
        for (std::size_t i = 0; i < cols.coords.size(); ++i) {
            line += format_double(rec.coords[i].second);
            line += ',';
        }
        for (const auto& name : cols.payload) {
            for (const auto& [k, v] : rec.payload) {
                if (k == name) {
                    line += format_double(v);
                    break;
                }
            }
            line += ',';
        }
        line += csv_quote(rec.error);
        line += '\n';
        out += line;
    }
    return out;
}

void write_csv(const std::string& path, const std::vector<sweep::RunRecord>& records) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("write_csv: cannot open " + path);
    f << to_csv(records);
    if (!f) throw ConfigError("write_csv: write failed for " + path);
}

nlohmann::json to_json(const std::vector<sweep::RunRecord>& records) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& rec : records) {
        nlohmann::json obj = nlohmann::json::object();
        nlohmann::json coords = nlohmann::json::object();
        nlohmann::json payload = nlohmann::json::object();
        for (const auto& [k, v] : rec.coords) coords[k] = v;
        for (const auto& [k, v] : rec.payload) payload[k] = v;
        obj["coords"] = coords;
        obj["payload"] = payload;
        if (!rec.error.empty()) obj["error"] = rec.error;
        arr.push_back(obj);
    }
    return arr;
}

void write_json(const std::string& path, const std::vector<sweep::RunRecord>& records) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("write_json: cannot open " + path);
    f << to_json(records).dump(2) << '\n';
    if (!f) throw ConfigError("write_json: write failed for " + path);
}

std::vector<sweep::RunRecord> records_from_json(const nlohmann::json& j) {
    std::vector<sweep::RunRecord> records;
    for (const auto& obj : j) {
        sweep::RunRecord rec;
        for (const auto& [k, v] : obj.at("coords").items()) {
            rec.coords.emplace_back(k, v.get<double>());
        }
        for (const auto& [k, v] : obj.at("payload").items()) {
            rec.payload.emplace_back(k, v.get<double>());
        }
        if (obj.contains("error")) rec.error = obj["error"].get<std::string>();
        records.push_back(std::move(rec));
    }
    return records;
}

void write_metadata(const std::string& data_path, const Metadata& meta) {
    nlohmann::json j;
    j["version"] = meta.version;
    j["seed"] = meta.seed;
    j["sign_convention"] = meta.sign_convention;
    j["solver"] = meta.solver;
    j["diagnostics"] = meta.diagnostics;
    std::ofstream f(data_path + ".meta.json", std::ios::binary);
    if (!f) throw ConfigError("write_metadata: cannot open " + data_path + ".meta.json");
    f << j.dump(2) << '\n';
}

} // namespace sqz::io
