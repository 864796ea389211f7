// Flat-file persistence: JSON configs (strict keys), append-only JSONL
// transcripts, CSV results, and run manifests.
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <unistd.h>

#include "econlab/core.hpp"

namespace econlab::storage {

struct ConfigParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct UnknownKeyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainViolationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Experiment configuration

struct ExperimentConfig {
    ExperimentKind experiment = ExperimentKind::SocialPreference;
    json condition = json::object();  // engine-specific parameters
    json agent = json::object();      // backend spec: {"kind": "scripted"|"remote", ...}
    int replicates = 1;
    std::uint64_t seed = 0;
    std::string template_version = "v1";
    std::string out_dir = ".";

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

inline json to_json_config(const ExperimentConfig& c) {
    return json{{"experiment", to_string(c.experiment)},
                {"condition", c.condition},
                {"agent", c.agent},
                {"replicates", c.replicates},
                {"seed", c.seed},
                {"template_version", c.template_version},
                {"out_dir", c.out_dir}};
}

inline void validate(const ExperimentConfig& c) {
    if (c.replicates < 1)
        throw DomainViolationError("replicates must be >= 1");
    if (c.condition.contains("cost")) {
        if (!c.condition["cost"].is_number_integer() ||
            c.condition["cost"].get<int>() < 0)
            throw DomainViolationError("cost must be a non-negative integer");
    }
    if (c.agent.contains("kind")) {
        const auto kind = c.agent["kind"].get<std::string>();
        if (kind != "scripted" && kind != "remote")
            throw DomainViolationError("agent.kind must be scripted or remote");
    }
}

inline ExperimentConfig parse_config(const json& doc) {
    static const std::set<std::string> known{"experiment", "condition",   "agent",
                                             "replicates", "seed",        "template_version",
                                             "out_dir"};
    if (!doc.is_object()) throw ConfigParseError("config root must be a JSON object");
    for (const auto& [key, _] : doc.items())
        if (!known.count(key)) throw UnknownKeyError("unknown config key: " + key);
    if (!doc.contains("experiment")) throw UnknownKeyError("missing config key: experiment");
    if (!doc.contains("seed")) throw UnknownKeyError("missing config key: seed");

    ExperimentConfig c;
    try {
        c.experiment = experiment_kind_from_string(doc["experiment"].get<std::string>());
    } catch (const std::invalid_argument& e) {
        throw DomainViolationError(e.what());
    }
    if (doc.contains("condition")) c.condition = doc["condition"];
    if (doc.contains("agent")) c.agent = doc["agent"];
    if (doc.contains("replicates")) c.replicates = doc["replicates"].get<int>();
    c.seed = doc["seed"].get<std::uint64_t>();
    if (doc.contains("template_version"))
        c.template_version = doc["template_version"].get<std::string>();
    if (doc.contains("out_dir")) c.out_dir = doc["out_dir"].get<std::string>();
    validate(c);
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigParseError(path.string() + ": " + e.what());
    }
    return parse_config(doc);
}

inline void write_config(const ExperimentConfig& c, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write config: " + path.string());
    out << to_json_config(c).dump(2) << "\n";
}

// ---------------------------------------------------------------------------
// Transcripts (JSONL, append-only)

inline int write_transcripts(const std::vector<SessionRecord>& records,
                             const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.c_str(), "a");
    if (!f) throw IoError("cannot open transcript file for append: " + path.string());
    int written = 0;
    for (const auto& rec : records) {
        const std::string line = json(rec).dump() + "\n";
        if (std::fwrite(line.data(), 1, line.size(), f) != line.size()) {
            std::fclose(f);
            throw IoError("short write to transcript file: " + path.string());
        }
        ++written;
    }
    if (std::fflush(f) != 0 || ::fsync(::fileno(f)) != 0) {
        std::fclose(f);
        throw IoError("cannot flush transcript file: " + path.string());
    }
    std::fclose(f);
    return written;
}

inline std::vector<SessionRecord> read_transcripts(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open transcript file: " + path.string());
    std::vector<SessionRecord> out;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.push_back(json::parse(line).get<SessionRecord>());
        } catch (const json::exception& e) {
            throw ConfigParseError(path.string() + ":" + std::to_string(line_no) + ": " +
                                   e.what());
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Results and manifests

inline void write_text_file(const std::string& content, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << content;
    if (!out) throw IoError("write failed: " + path.string());
}

inline void write_manifest(const ExperimentConfig& config, const json& overrides,
                           const std::string& started_at, const std::string& finished_at,
                           const std::filesystem::path& path,
                           const std::string& code_version = "0.1.0") {
    json manifest{{"config", to_json_config(config)},
                  {"overrides", overrides},
                  {"code_version", code_version},
                  {"template_version", config.template_version},
                  {"started_at", started_at},
                  {"finished_at", finished_at}};
    write_text_file(manifest.dump(2) + "\n", path);
}

}  // namespace econlab::storage
