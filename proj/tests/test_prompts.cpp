#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "econlab/prompts.hpp"

using namespace econlab::prompts;

TEST_CASE("render substitutes placeholders and rejects unknown ones") {
    CHECK(render("a {x} c", {{"x", "b"}}) == "a b c");
    CHECK(render("{x}{x}", {{"x", "z"}}) == "zz");
    CHECK(render("no placeholders", {}) == "no placeholders");
    CHECK_THROWS_AS(render("a {y} c", {{"x", "b"}}), std::invalid_argument);
    CHECK_THROWS_AS(render("a {unterminated", {}), std::invalid_argument);
}

TEST_CASE("build_prompt composes system, instructions, and the directive") {
    auto templates = default_templates();
    auto bundle = build_prompt(templates, "Pick a door.", {"Left", "Right"});
    CHECK(bundle.system_text ==
          "Imagine you are a participant in a laboratory experiment.");
    CHECK(bundle.user_text.find("Pick a door.") == 0);
    // reasoning directive comes before the tag instructions and lists options
    CHECK(bundle.user_text.find("reason step-by-step") != std::string::npos);
    CHECK(bundle.user_text.find("Left, Right") != std::string::npos);
    CHECK(bundle.user_text.find("<reason></reason>") != std::string::npos);
    CHECK(bundle.option_set == std::vector<std::string>{"Left", "Right"});

    CHECK_THROWS_AS(build_prompt(templates, "x", {}), std::invalid_argument);
    CHECK_THROWS_AS(build_prompt(templates, "x", {"A", "A"}), std::invalid_argument);
}

TEST_CASE("parse_response accepts well-formed tagged answers") {
    auto r = parse_response("<reason> because </reason><answer>B1</answer>", {"B1", "B2"});
    REQUIRE(ok(r));
    auto parsed = std::get<ParsedResponse>(r);
    CHECK(parsed.reason == "because");
    CHECK(parsed.answer == "B1");
}

TEST_CASE("parse_response trims and matches options case-insensitively") {
    auto r = parse_response("<reason>x</reason><answer>  b1\n</answer>", {"B1", "B2"});
    REQUIRE(ok(r));
    // the canonical option spelling is returned, not the raw answer text
    CHECK(std::get<ParsedResponse>(r).answer == "B1");
}

TEST_CASE("parse_response error taxonomy") {
    auto no_reason = parse_response("<answer>B1</answer>", {"B1"});
    REQUIRE_FALSE(ok(no_reason));
    CHECK(std::get<ParseError>(no_reason).kind == ParseErrorKind::MissingReasonTag);

    auto no_answer = parse_response("<reason>x</reason>", {"B1"});
    REQUIRE_FALSE(ok(no_answer));
    CHECK(std::get<ParseError>(no_answer).kind == ParseErrorKind::MissingAnswerTag);

    auto bad_option = parse_response("<reason>x</reason><answer>B3</answer>", {"B1", "B2"});
    REQUIRE_FALSE(ok(bad_option));
    CHECK(std::get<ParseError>(bad_option).kind == ParseErrorKind::AnswerNotInOptionSet);
    // raw text is preserved for diagnostics
    CHECK(std::get<ParseError>(bad_option).raw ==
          "<reason>x</reason><answer>B3</answer>");
}

TEST_CASE("tag names are case-sensitive") {
    auto r = parse_response("<Reason>x</Reason><Answer>B1</Answer>", {"B1"});
    REQUIRE_FALSE(ok(r));
    CHECK(std::get<ParseError>(r).kind == ParseErrorKind::MissingReasonTag);
}

TEST_CASE("parse_numeric_response enforces range and digits") {
    auto r = parse_numeric_response("<reason>half</reason><answer>15</answer>", 0, 30);
    REQUIRE(ok(r));
    CHECK(std::get<ParsedNumericResponse>(r).amount == 15);

    auto out_of_range = parse_numeric_response("<reason>x</reason><answer>31</answer>", 0, 30);
    REQUIRE_FALSE(ok(out_of_range));
    CHECK(std::get<ParseError>(out_of_range).kind == ParseErrorKind::NumericParseFailure);

    auto not_number = parse_numeric_response("<reason>x</reason><answer>ten</answer>", 0, 30);
    REQUIRE_FALSE(ok(not_number));

    auto negative = parse_numeric_response("<reason>x</reason><answer>-1</answer>", 0, 30);
    REQUIRE_FALSE(ok(negative));
}

TEST_CASE("format_templated_response round-trips through the parser") {
    auto raw = format_templated_response("my reasoning", "Yes");
    auto r = parse_response(raw, {"Yes", "No"});
    REQUIRE(ok(r));
    CHECK(std::get<ParsedResponse>(r).reason == "my reasoning");
    CHECK(std::get<ParsedResponse>(r).answer == "Yes");
}

TEST_CASE("templates directory mirrors the embedded set") {
    const std::filesystem::path dir = ECONLAB_TEMPLATES_DIR;
    REQUIRE(std::filesystem::is_directory(dir));
    auto loaded = load_templates(dir);
    auto embedded = default_templates();
    CHECK(loaded.version == embedded.version);
    CHECK(loaded.texts.size() == embedded.texts.size());
    for (const auto& [name, text] : embedded.texts) {
        INFO("template ", name);
        REQUIRE(loaded.texts.count(name) == 1);
        CHECK(loaded.texts.at(name) == text);
    }
}

TEST_CASE("load_templates rejects empty directories") {
    auto tmp = std::filesystem::temp_directory_path() / "econlab_empty_templates";
    std::filesystem::create_directories(tmp);
    CHECK_THROWS_AS(load_templates(tmp), std::invalid_argument);
}
