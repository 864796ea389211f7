#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "econlab/storage.hpp"

using namespace econlab;
using namespace econlab::storage;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto dir = fs::temp_directory_path() / "econlab_storage_test";
    fs::create_directories(dir);
    return dir;
}

SessionRecord sample_record(const std::string& id) {
    SessionRecord rec;
    rec.session_id = id;
    rec.experiment = ExperimentKind::SocialPreference;
    rec.condition = json{{"group", "no_group"}, {"invalid", false}};
    rec.seed = 99;
    rec.created_at = "2026-01-01T00:00:00Z";
    DecisionEvent ev;
    ev.agent_id = "agent_0";
    ev.role_or_position = "B";
    ev.prompt_text = "p";
    ev.raw_response = "<reason>r</reason><answer>B1</answer>";
    ev.parsed_choice = "B1";
    ev.reason_text = "r";
    rec.events.push_back(ev);
    return rec;
}

}  // namespace

TEST_CASE("config round-trips through JSON and disk") {
    ExperimentConfig c;
    c.experiment = ExperimentKind::SocialLearning;
    c.condition = json{{"cost", 4}};
    c.agent = json{{"kind", "scripted"}, {"policy", "bayes_urn"}};
    c.replicates = 25;
    c.seed = 777;
    c.template_version = "v1";
    c.out_dir = "runs/urn";
    CHECK(parse_config(to_json_config(c)) == c);

    auto path = temp_dir() / "config.json";
    write_config(c, path);
    CHECK(load_config(path) == c);
}

TEST_CASE("parse_config applies defaults for optional keys") {
    auto c = parse_config(json{{"experiment", "upstream"}, {"seed", 5}});
    CHECK(c.experiment == ExperimentKind::Upstream);
    CHECK(c.seed == 5);
    CHECK(c.replicates == 1);
    CHECK(c.template_version == "v1");
    CHECK(c.out_dir == ".");
    CHECK(c.condition == json::object());
}

TEST_CASE("misspelled and missing keys are rejected loudly") {
    json doc{{"experiment", "social_preference"}, {"seed", 1}, {"replicats", 3}};
    CHECK_THROWS_AS(parse_config(doc), UnknownKeyError);
    CHECK_THROWS_AS(parse_config(json{{"seed", 1}}), UnknownKeyError);
    CHECK_THROWS_AS(parse_config(json{{"experiment", "social_preference"}}),
                    UnknownKeyError);
    CHECK_THROWS_AS(parse_config(json::array()), ConfigParseError);
}

TEST_CASE("domain violations: bad experiment, replicates, cost, agent kind") {
    json base{{"experiment", "social_learning"}, {"seed", 1}};
    auto with = [&](const std::string& key, json value) {
        json doc = base;
        doc[key] = std::move(value);
        return doc;
    };
    CHECK_THROWS_AS(parse_config(with("experiment", "lottery")), DomainViolationError);
    CHECK_THROWS_AS(parse_config(with("replicates", 0)), DomainViolationError);
    CHECK_THROWS_AS(parse_config(with("condition", json{{"cost", -1}})),
                    DomainViolationError);
    CHECK_THROWS_AS(parse_config(with("condition", json{{"cost", 2.5}})),
                    DomainViolationError);
    CHECK_THROWS_AS(parse_config(with("agent", json{{"kind", "psychic"}})),
                    DomainViolationError);
    CHECK_NOTHROW(parse_config(with("condition", json{{"cost", 0}})));
}

TEST_CASE("malformed JSON raises ConfigParseError; missing file raises IoError") {
    auto path = temp_dir() / "broken.json";
    std::ofstream(path) << "{ not json";
    CHECK_THROWS_AS(load_config(path), ConfigParseError);
    CHECK_THROWS_AS(load_config(temp_dir() / "does_not_exist.json"), IoError);
}

TEST_CASE("transcripts append and round-trip") {
    auto path = temp_dir() / "transcripts.jsonl";
    fs::remove(path);
    CHECK(write_transcripts({sample_record("s1"), sample_record("s2")}, path) == 2);
    CHECK(write_transcripts({sample_record("s3")}, path) == 1);

    auto records = read_transcripts(path);
    REQUIRE(records.size() == 3);
    CHECK(records[0].session_id == "s1");
    CHECK(records[2].session_id == "s3");
    CHECK(records[0] == sample_record("s1"));

    // each record occupies exactly one line
    std::ifstream in(path);
    std::string line;
    int lines = 0;
    while (std::getline(in, line)) {
        ++lines;
        CHECK_NOTHROW(json::parse(line));
    }
    CHECK(lines == 3);
}

TEST_CASE("transcript IO errors surface as IoError") {
    CHECK_THROWS_AS(write_transcripts({sample_record("x")},
                                      "/nonexistent_dir/transcripts.jsonl"),
                    IoError);
    CHECK_THROWS_AS(read_transcripts(temp_dir() / "missing.jsonl"), IoError);

    auto path = temp_dir() / "corrupt.jsonl";
    std::ofstream(path) << "{\"not\": \"a record\"\n";
    CHECK_THROWS_AS(read_transcripts(path), ConfigParseError);
}

TEST_CASE("manifest captures config, overrides, and timestamps") {
    ExperimentConfig c;
    c.experiment = ExperimentKind::Downstream;
    c.seed = 3;
    auto path = temp_dir() / "manifest.json";
    write_manifest(c, json{{"seed", 12}}, "2026-01-01T00:00:00Z", "2026-01-01T00:01:00Z",
                   path);
    std::ifstream in(path);
    auto doc = json::parse(in);
    CHECK(doc.at("config").at("experiment") == "downstream");
    CHECK(doc.at("overrides").at("seed") == 12);
    CHECK(doc.at("template_version") == "v1");
    CHECK(doc.at("code_version") == "0.1.0");
    CHECK(doc.at("started_at") == "2026-01-01T00:00:00Z");
    CHECK(doc.at("finished_at") == "2026-01-01T00:01:00Z");
}
