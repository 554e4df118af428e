// io.hpp — CSV/JSON emission of sweep records plus the sidecar metadata file.
#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "sqz/sweep.hpp"

namespace sqz::io {

// CSV with a header row naming axes then payload fields, RFC-4180 quoting.
std::string to_csv(const std::vector<sweep::RunRecord>& records);
void write_csv(const std::string& path, const std::vector<sweep::RunRecord>& records);

// JSON as an array of flat objects (coords and payload merged per record).
nlohmann::json to_json(const std::vector<sweep::RunRecord>& records);
void write_json(const std::string& path, const std::vector<sweep::RunRecord>& records);

// Lossless round trip of coords + payload.
std::vector<sweep::RunRecord> records_from_json(const nlohmann::json& j);

struct Metadata {
    std::string version;
    std::uint64_t seed = 0;
    std::string sign_convention;
    std::string solver;
    std::map<std::string, double> diagnostics;
};

// "<out>.meta.json" next to the data file.
void write_metadata(const std::string& data_path, const Metadata& meta);

std::string format_double(double v); // shortest round-trip decimal

} // namespace sqz::io
