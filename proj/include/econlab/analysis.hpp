// Motivation classification of free-text reasons against the two fixed
// taxonomies, with a deterministic keyword baseline and an LLM-backed
// classifier behind one interface.
#pragma once

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "econlab/agents.hpp"
#include "econlab/prompts.hpp"

namespace econlab::analysis {

// ---------------------------------------------------------------------------
// Taxonomies

enum class TaxonomyId { SocialLearning, Upstream };

struct TaxonomyOption {
    char letter = 'A';
    std::string label;
    std::string description;
};

struct MotivationTaxonomy {
    TaxonomyId taxonomy_id = TaxonomyId::SocialLearning;
    std::vector<TaxonomyOption> options;  // ordered A..E

    bool has_letter(char c) const {
        for (const auto& o : options)
            if (o.letter == c) return true;
        return false;
    }
};

inline MotivationTaxonomy taxonomy(TaxonomyId id) {
    if (id == TaxonomyId::SocialLearning)
        return {id,
                {{'A', "Private signal integrity", "Preference for one's own draw."},
                 {'B', "Majority influence", "Following the majority of observed guesses."},
                 {'C', "Probability weighing",
                  "Weighing the two-thirds draw probabilities explicitly."},
                 {'D', "Bayesian reasoning",
                  "Combining own draw and observations by posterior updating."},
                 {'E', "Independent assessment",
                  "Deciding without regard to others' guesses."}}};
    return {id,
            {{'A', "Trust and Reciprocity",
              "Returning points because points were received or entrusted."},
             {'B', "Financial Incentive", "Maximizing own point earnings."},
             {'C', "One-time Interaction",
              "No future encounters, so no strategic reason to return."},
             {'D', "Principle of Fairness", "Returning to keep the split fair."},
             {'E', "No Tripling on Return",
              "Returned points are not tripled, so returning destroys surplus."}}};
}

// ---------------------------------------------------------------------------
// Labelings

struct ReasonRef {
    std::string session_id;
    int event_index = 0;
    std::string reason;
};

struct MotivationLabeling {
    ReasonRef ref;
    std::set<char> selected;  // subset of taxonomy letters; empty = none matched
    std::string classifier_id;
    bool abstained = false;  // empty reason or unparseable classifier output
};

// ---------------------------------------------------------------------------
// Keyword baseline: curated stem lists per option, case-insensitive,
// deterministic.

namespace detail {

inline std::string lowercase(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return char(std::tolower(c)); });
    return out;
}

inline const std::map<char, std::vector<std::string>>& stems(TaxonomyId id) {
    static const std::map<char, std::vector<std::string>> social_learning{
        {'A', {"own draw", "my draw", "my own ball", "own signal", "private signal",
               "what i drew", "drew myself"}},
        {'B', {"majority", "most of the", "most guesses", "others guessed",
               "follow the crowd", "consensus"}},
        {'C', {"2/3", "two-thirds", "two thirds", "1/3", "one-third", "one third",
               "probability of drawing", "chance of drawing"}},
        {'D', {"bayes", "posterior", "update my belief", "updating", "prior",
               "likelihood", "combine the evidence", "combining my draw"}},
        {'E', {"independent", "on my own", "regardless of others", "ignore the others",
               "without considering others", "my own assessment"}},
    };
    static const std::map<char, std::vector<std::string>> upstream{
        {'A', {"trust", "reciproc", "they sent", "received points from", "entrusted",
               "give back", "pay it forward", "pay back"}},
        {'B', {"maximize my", "keep more", "my earnings", "my payoff", "financial",
               "more points for me", "self-interest"}},
        {'C', {"one-time", "one time", "never interact again", "no future",
               "will not meet", "won't meet", "single interaction"}},
        {'D', {"fair", "equal split", "even split", "equitable", "half of what"}},
        {'E', {"not tripled", "no tripling", "aren't tripled", "are not tripled",
               "returning is not tripled", "tripling does not apply"}},
    };
    return id == TaxonomyId::SocialLearning ? social_learning : upstream;
}

inline bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c); });
}

}  // namespace detail

inline MotivationLabeling classify_keyword(const ReasonRef& ref,
                                           const MotivationTaxonomy& tax) {
    MotivationLabeling out{ref, {}, "keyword_v1", false};
    if (detail::is_blank(ref.reason)) {
        out.abstained = true;
        return out;
    }
    const std::string text = detail::lowercase(ref.reason);
    for (const auto& [letter, needles] : detail::stems(tax.taxonomy_id)) {
        if (!tax.has_letter(letter)) continue;
        for (const auto& needle : needles) {
            if (text.find(needle) != std::string::npos) {
                out.selected.insert(letter);
                break;
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// LLM classifier: one classification prompt per reason; parse failures are
// recorded as abstentions, never guessed.

namespace detail {

inline std::string taxonomy_block(const MotivationTaxonomy& tax) {
    std::string out;
    for (const auto& o : tax.options) {
        out += std::string(1, o.letter) + ". " + o.label + ": " + o.description + "\n";
    }
    if (!out.empty()) out.pop_back();
    return out;
}

// Letters-only answer: comma/semicolon/space separated letters from the
// taxonomy; "none" (any case) yields the empty set.
inline std::optional<std::set<char>> parse_letters(const std::string& answer,
                                                   const MotivationTaxonomy& tax) {
    const std::string trimmed = prompts::detail::trim(answer);
    if (prompts::detail::iequals(trimmed, "none")) return std::set<char>{};
    std::set<char> out;
    for (char c : trimmed) {
        if (c == ',' || c == ';' || std::isspace(static_cast<unsigned char>(c))) continue;
        const char upper = char(std::toupper(static_cast<unsigned char>(c)));
        if (!tax.has_letter(upper)) return std::nullopt;
        out.insert(upper);
    }
    if (out.empty()) return std::nullopt;
    return out;
}

}  // namespace detail

inline MotivationLabeling classify_llm(const ReasonRef& ref, const MotivationTaxonomy& tax,
                                       agents::AgentBackend& classifier,
                                       const prompts::TemplateSet& templates) {
    MotivationLabeling out{ref, {}, classifier.agent_id(), false};
    if (detail::is_blank(ref.reason)) {
        out.abstained = true;
        return out;
    }
    auto instructions =
        prompts::render(templates.get("motivation_classify"),
                        {{"reason", ref.reason}, {"taxonomy", detail::taxonomy_block(tax)}});
    std::vector<std::string> letters;
    for (const auto& o : tax.options) letters.emplace_back(1, o.letter);
    prompts::PromptBundle bundle{templates.get("system"), instructions, letters};
    json context{{"decision", "classify"}, {"reason", ref.reason}};
    std::string raw = classifier.decide(bundle, context);
    auto span = prompts::detail::first_tag_span(raw, "answer");
    // tolerate tag-free letters-only replies, per the classification prompt
    auto parsed = detail::parse_letters(span ? *span : raw, tax);
    if (!parsed) {
        out.abstained = true;
        return out;
    }
    out.selected = *parsed;
    return out;
}

enum class ClassifierKind { Keyword, Llm };

inline std::vector<MotivationLabeling> classify_motivations(
    const std::vector<ReasonRef>& reasons, const MotivationTaxonomy& tax,
    ClassifierKind kind, agents::AgentBackend* classifier = nullptr,
    const prompts::TemplateSet* templates = nullptr) {
    if (kind == ClassifierKind::Llm && (!classifier || !templates))
        throw std::invalid_argument("LLM classifier requires a backend and templates");
    std::vector<MotivationLabeling> out;
    out.reserve(reasons.size());
    for (const auto& ref : reasons) {
        out.push_back(kind == ClassifierKind::Keyword
                          ? classify_keyword(ref, tax)
                          : classify_llm(ref, tax, *classifier, *templates));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Aggregation

struct MotivationDistribution {
    std::map<char, double> frequency;  // fraction of non-abstaining labelings
    int n_labeled = 0;
    int n_abstained = 0;
};

inline MotivationDistribution motivation_distribution(
    const std::vector<MotivationLabeling>& labelings, const MotivationTaxonomy& tax) {
    if (labelings.empty())
        throw std::invalid_argument("motivation_distribution: empty input");
    MotivationDistribution out;
    for (const auto& o : tax.options) out.frequency[o.letter] = 0.0;
    for (const auto& l : labelings) {
        if (l.abstained) {
            ++out.n_abstained;
            continue;
        }
        ++out.n_labeled;
        for (char c : l.selected) out.frequency.at(c) += 1.0;
    }
    if (out.n_labeled == 0)
        throw std::invalid_argument("motivation_distribution: all labelings abstained");
    for (auto& [_, v] : out.frequency) v /= out.n_labeled;
    return out;
}

inline std::string labelings_csv(const std::vector<MotivationLabeling>& labelings) {
    std::string out = "session_id,event_index,letters,classifier_id\n";
    for (const auto& l : labelings) {
        std::string letters;
        if (l.abstained) {
            letters = "abstained";
        } else {
            for (char c : l.selected) {
                if (!letters.empty()) letters += ';';
                letters += c;
            }
        }
        out += l.ref.session_id + "," + std::to_string(l.ref.event_index) + "," + letters +
               "," + l.classifier_id + "\n";
    }
    return out;
}

inline std::string distribution_csv(const MotivationDistribution& dist) {
    std::string out = "letter,frequency,n_labeled,n_abstained\n";
    for (const auto& [letter, freq] : dist.frequency) {
        char buf[96];
        std::snprintf(buf, sizeof(buf), "%c,%.6f,%d,%d\n", letter, freq, dist.n_labeled,
                      dist.n_abstained);
        out += buf;
    }
    return out;
}

}  // namespace econlab::analysis
