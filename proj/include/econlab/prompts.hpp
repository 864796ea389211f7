// Prompt construction (participant framing, neutral zero-shot instructions,
// step-by-step directive, reason/answer tag template) and templated-response
// parsing.
#pragma once

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace econlab::prompts {

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::vector<std::string> option_set;
};

struct ParsedResponse {
    std::string reason;
    std::string answer;  // member of the originating option set
};

enum class ParseErrorKind {
    MissingReasonTag,
    MissingAnswerTag,
    AnswerNotInOptionSet,
    NumericParseFailure,
};

inline std::string to_string(ParseErrorKind k) {
    switch (k) {
        case ParseErrorKind::MissingReasonTag: return "MissingReasonTag";
        case ParseErrorKind::MissingAnswerTag: return "MissingAnswerTag";
        case ParseErrorKind::AnswerNotInOptionSet: return "AnswerNotInOptionSet";
        case ParseErrorKind::NumericParseFailure: return "NumericParseFailure";
    }
    return "?";
}

// Carries the raw text so failed sessions can still log the full response.
struct ParseError {
    ParseErrorKind kind;
    std::string raw;
};

template <typename T>
using ParseResult = std::variant<T, ParseError>;

template <typename T>
bool ok(const ParseResult<T>& r) {
    return std::holds_alternative<T>(r);
}

// ---------------------------------------------------------------------------
// Templates
//
// Prompt wording is a research variable: the texts live in versioned template
// files with {placeholder} substitution, and the active version string is
// recorded in every session. The embedded set below mirrors templates/ in the
// repository (a test keeps them in sync).

struct TemplateSet {
    std::string version;
    std::map<std::string, std::string> texts;

    const std::string& get(const std::string& name) const {
        auto it = texts.find(name);
        if (it == texts.end())
            throw std::invalid_argument("unknown prompt template: " + name);
        return it->second;
    }
};

namespace detail {

inline const std::map<std::string, std::string>& embedded_templates() {
    static const std::map<std::string, std::string> t{
        {"system", "Imagine you are a participant in a laboratory experiment."},
        {"answer_directive",
         "You will need to first reason step-by-step, and then give your answer. "
         "Encapsulate your reasoning within <reason></reason> tags, followed by your "
         "decision within <answer></answer> tags. Your answer must be exactly one of "
         "the following options: {options}."},
        {"dictator_game",
         "You are participant B, matched with another participant A. {group_sentence}"
         "Only you make a decision in this game, and it determines both participants' "
         "payoffs in points. If you choose B1, you receive {b1_b} points and A receives "
         "{b1_a} points. If you choose B2, you receive {b2_b} points and A receives "
         "{b2_a} points."},
        {"response_game",
         "You are participant B, matched with another participant A. {group_sentence}"
         "A moved first. A could have chosen A1, which would have given A {a1_a} points "
         "and you {a1_b} points, ending the game. Instead, A chose A2, leaving the "
         "decision to you. Your choice determines both participants' payoffs in points. "
         "If you choose B1, you receive {b1_b} points and A receives {b1_a} points. If "
         "you choose B2, you receive {b2_b} points and A receives {b2_a} points."},
        {"group_ingroup", "You are matched with a participant from your own group. "},
        {"group_outgroup", "You are matched with a participant from the other group. "},
        {"urn_guess",
         "There are two urns. Urn A contains 2/3 A balls and 1/3 B balls; urn B contains "
         "2/3 B balls and 1/3 A balls. One urn was selected with equal probability, and "
         "every ball in this game is drawn from that same urn. You are participant "
         "{position} of 4, acting in sequence. You drew one ball and observed its color: "
         "{draw}. {observations}A correct guess of the urn earns 100 points "
         "(15 points = $1). Which urn do you guess the balls were drawn from?"},
        {"urn_link",
         "There are two urns. Urn A contains 2/3 A balls and 1/3 B balls; urn B contains "
         "2/3 B balls and 1/3 A balls. One urn was selected with equal probability, and "
         "every ball in this game is drawn from that same urn. You are participant "
         "{position} of 4, acting in sequence. You drew one ball and observed its color: "
         "{draw}. You may form a link with participant {target} at a cost of {cost} "
         "points. Forming the link reveals participant {target}'s urn guess, together "
         "with any earlier guesses participant {target} could see. A correct guess of "
         "the urn earns 100 points (15 points = $1). Do you form the link?"},
        {"urn_observations", "Through your links you can see these guesses: {guesses}. "},
        {"transfer_return",
         "You are participant {role}. Participant {sender} was given an endowment of 10 "
         "points and chose to send some points {relation}. The amount sent was tripled, "
         "so you received {received} points. You may now return any whole number of "
         "points between 0 and {received} to participant {beneficiary}. Points you "
         "return are not tripled. How many points do you return?"},
        {"image_donor",
         "You are playing a donation game with anonymous participants. You will never "
         "be paired with the same participant twice. Your current balance is {balance} "
         "{currency}. This round you are the donor, paired with an anonymous receiver. "
         "The receiver's past donor record: gave {gave} times, withheld {withheld} "
         "times. If you choose Give, it costs you {cost} {currency} and the receiver "
         "gains {benefit} {currency}. If you choose Withhold, balances are unchanged. "
         "What do you choose?"},
        {"motivation_classify",
         "A participant in an experiment gave the following reasoning for a decision:\n"
         "\"{reason}\"\n"
         "Which of the following motivations does the reasoning express? Multiple "
         "letters may apply.\n{taxonomy}\nAnswer with the applicable letters only, "
         "separated by commas."},
    };
    return t;
}

}  // namespace detail

inline TemplateSet default_templates() {
    return TemplateSet{"v1", detail::embedded_templates()};
}

// Loads *.txt files from a directory; the version is read from a VERSION file
// when present, otherwise the directory name is used.
inline TemplateSet load_templates(const std::filesystem::path& dir) {
    TemplateSet set;
    set.version = dir.filename().string();
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.path().extension() != ".txt") continue;
        std::ifstream in(entry.path());
        std::stringstream ss;
        ss << in.rdbuf();
        std::string text = ss.str();
        while (!text.empty() && (text.back() == '\n' || text.back() == '\r'))
            text.pop_back();
        set.texts[entry.path().stem().string()] = text;
    }
    std::ifstream ver(dir / "VERSION");
    if (ver) std::getline(ver, set.version);
    if (set.texts.empty())
        throw std::invalid_argument("no templates found in " + dir.string());
    return set;
}

// {placeholder} substitution; unknown placeholders are hard errors.
inline std::string render(const std::string& tmpl,
                          const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    for (std::size_t i = 0; i < tmpl.size();) {
        if (tmpl[i] == '{') {
            auto end = tmpl.find('}', i);
            if (end == std::string::npos)
                throw std::invalid_argument("unterminated placeholder in template");
            std::string key = tmpl.substr(i + 1, end - i - 1);
            auto it = vars.find(key);
            if (it == vars.end())
                throw std::invalid_argument("no value for placeholder {" + key + "}");
            out += it->second;
            i = end + 1;
        } else {
            out += tmpl[i++];
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prompt assembly

inline std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) {
        if (i) out += sep;
        out += items[i];
    }
    return out;
}

// Assembles instructions + reasoning directive + tag template. The directive
// precedes the answer request so the model reasons before deciding.
inline PromptBundle build_prompt(const TemplateSet& templates,
                                 const std::string& instructions,
                                 const std::vector<std::string>& option_set) {
    if (option_set.empty())
        throw std::invalid_argument("build_prompt: empty option set");
    for (std::size_t i = 0; i < option_set.size(); ++i)
        for (std::size_t j = i + 1; j < option_set.size(); ++j)
            if (option_set[i] == option_set[j])
                throw std::invalid_argument("build_prompt: duplicate option " + option_set[i]);
    PromptBundle bundle;
    bundle.system_text = templates.get("system");
    bundle.user_text = instructions + "\n\n" +
                       render(templates.get("answer_directive"),
                              {{"options", join(option_set, ", ")}});
    bundle.option_set = option_set;
    return bundle;
}

// ---------------------------------------------------------------------------
// Response parsing

namespace detail {

inline std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline bool iequals(const std::string& a, const std::string& b) {
    return a.size() == b.size() &&
           std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
               return std::tolower(static_cast<unsigned char>(x)) ==
                      std::tolower(static_cast<unsigned char>(y));
           });
}

// First <tag>...</tag> span; tag names are case-sensitive.
inline std::optional<std::string> first_tag_span(const std::string& raw,
                                                 const std::string& tag) {
    const std::string open = "<" + tag + ">", close = "</" + tag + ">";
    auto b = raw.find(open);
    if (b == std::string::npos) return std::nullopt;
    auto e = raw.find(close, b + open.size());
    if (e == std::string::npos) return std::nullopt;
    return raw.substr(b + open.size(), e - b - open.size());
}

}  // namespace detail

inline ParseResult<ParsedResponse> parse_response(const std::string& raw,
                                                  const std::vector<std::string>& option_set) {
    auto reason = detail::first_tag_span(raw, "reason");
    if (!reason) return ParseError{ParseErrorKind::MissingReasonTag, raw};
    auto answer = detail::first_tag_span(raw, "answer");
    if (!answer) return ParseError{ParseErrorKind::MissingAnswerTag, raw};
    const std::string trimmed = detail::trim(*answer);
    for (const auto& opt : option_set)
        if (detail::iequals(trimmed, opt)) return ParsedResponse{detail::trim(*reason), opt};
    return ParseError{ParseErrorKind::AnswerNotInOptionSet, raw};
}

// Numeric-answer variant for amount decisions: non-negative integer within
// [lo, hi] inside the first <answer> tag.
struct ParsedNumericResponse {
    std::string reason;
    int amount = 0;
};

inline ParseResult<ParsedNumericResponse> parse_numeric_response(const std::string& raw,
                                                                 int lo, int hi) {
    auto reason = detail::first_tag_span(raw, "reason");
    if (!reason) return ParseError{ParseErrorKind::MissingReasonTag, raw};
    auto answer = detail::first_tag_span(raw, "answer");
    if (!answer) return ParseError{ParseErrorKind::MissingAnswerTag, raw};
    const std::string trimmed = detail::trim(*answer);
    if (trimmed.empty() ||
        !std::all_of(trimmed.begin(), trimmed.end(),
                     [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }))
        return ParseError{ParseErrorKind::NumericParseFailure, raw};
    long value = 0;
    try {
        value = std::stol(trimmed);
    } catch (const std::exception&) {
        return ParseError{ParseErrorKind::NumericParseFailure, raw};
    }
    if (value < lo || value > hi)
        return ParseError{ParseErrorKind::NumericParseFailure, raw};
    return ParsedNumericResponse{detail::trim(*reason), int(value)};
}

// Embeds (reason, answer) into the canonical tag template; scripted agents use
// this so the full parse path is exercised without an LLM.
inline std::string format_templated_response(const std::string& reason,
                                             const std::string& answer) {
    return "<reason>" + reason + "</reason><answer>" + answer + "</answer>";
}

}  // namespace econlab::prompts
