// Sequential urn-guessing game with costly link formation: visibility rules,
// scoring, and per-run metrics.
#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <variant>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "econlab/agents.hpp"
#include "econlab/core.hpp"
#include "econlab/prompts.hpp"

namespace econlab::social_learning {

inline constexpr int kPositions = 4;
inline constexpr int kCorrectGuessPoints = 100;

struct UrnWorld {
    char true_urn = 'A';                    // sampled 1/2 each
    std::array<char, kPositions> draws{};   // each matches true_urn w.p. 2/3
    int link_cost = 0;
    std::uint64_t rng_seed = 0;
};

inline UrnWorld sample_world(Rng& rng, int link_cost, std::uint64_t seed) {
    UrnWorld w;
    w.link_cost = link_cost;
    w.rng_seed = seed;
    w.true_urn = rng.bernoulli(0.5) ? 'A' : 'B';
    const char other = w.true_urn == 'A' ? 'B' : 'A';
    for (auto& d : w.draws) d = rng.bernoulli(2.0 / 3.0) ? w.true_urn : other;
    return w;
}

// Links point from later to strictly earlier positions (1-based).
using LinkSet = std::set<std::pair<int, int>>;

struct LearningState {
    LinkSet links;
    std::map<int, char> guesses;  // position -> 'A'/'B'
    std::map<int, int> points;
};

// Guesses of all positions reachable from the observer by following links
// transitively. Link topology itself is never revealed, only guesses.
inline std::set<std::pair<int, char>> visible_guesses(const LinkSet& links,
                                                      const std::map<int, char>& guesses,
                                                      int observer) {
    std::set<int> reachable;
    std::vector<int> frontier{observer};
    while (!frontier.empty()) {
        int from = frontier.back();
        frontier.pop_back();
        for (const auto& [f, t] : links) {
            if (f != from) continue;
            if (reachable.insert(t).second) frontier.push_back(t);
        }
    }
    std::set<std::pair<int, char>> out;
    for (int p : reachable) {
        auto it = guesses.find(p);
        if (it != guesses.end()) out.insert({p, it->second});
    }
    return out;
}

struct UrnSessionResult {
    SessionRecord record;
    LearningState state;
    UrnWorld world;
};

inline void finalize(UrnSessionResult& out, const prompts::TemplateSet&);

// One four-position session. Position 1 only guesses; positions 2..4 first
// decide, one earlier position at a time in descending order, whether to form
// a link at link_cost per link, then observe the visible guess set, then
// guess. Agent parse failures mark the session invalid instead of dropping it.
inline UrnSessionResult run_urn_session(const std::vector<agents::AgentBackend*>& session_agents,
                                        int link_cost, std::uint64_t seed,
                                        const prompts::TemplateSet& templates,
                                        const std::string& session_id = "urn") {
    if (session_agents.size() != kPositions)
        throw std::invalid_argument("run_urn_session requires exactly 4 agents");
    if (link_cost < 0) throw std::invalid_argument("link_cost must be non-negative");

    Rng rng(seed);
    UrnSessionResult out;
    out.world = sample_world(rng, link_cost, seed);
    out.record.session_id = session_id;
    out.record.experiment = ExperimentKind::SocialLearning;
    out.record.seed = seed;
    out.record.created_at = rfc3339_now();
    out.record.condition = {{"link_cost", link_cost},
                            {"template_version", templates.version}};

    auto fail = [&](const std::string& position, const prompts::ParseError& err) {
        out.record.mark_invalid(position + ": " + prompts::to_string(err.kind));
        finalize(out, templates);
        return out;
    };

    for (int pos = 1; pos <= kPositions; ++pos) {
        auto* agent = session_agents[std::size_t(pos - 1)];
        const char own_draw = out.world.draws[std::size_t(pos - 1)];
        int links_formed = 0;

        // link elicitation, immediate predecessor first
        for (int target = pos - 1; target >= 1; --target) {
            auto visible = visible_guesses(out.state.links, out.state.guesses, pos);
            int visible_up_to = 0;
            for (const auto& [p, g] : visible) visible_up_to = std::max(visible_up_to, p);
            auto instructions = prompts::render(
                templates.get("urn_link"),
                {{"position", std::to_string(pos)},
                 {"draw", std::string(1, own_draw)},
                 {"target", std::to_string(target)},
                 {"cost", std::to_string(link_cost)}});
            auto bundle = prompts::build_prompt(templates, instructions, {"Yes", "No"});
            json context{{"decision", "link"},
                         {"own_draw", std::string(1, own_draw)},
                         {"position", pos},
                         {"target_position", target},
                         {"cost", link_cost},
                         {"already_visible_up_to", visible_up_to}};
            std::string raw = agent->decide(bundle, context);
            auto parsed = prompts::parse_response(raw, bundle.option_set);
            DecisionEvent event{agent->agent_id(),
                                "position " + std::to_string(pos) + " link to " +
                                    std::to_string(target),
                                bundle.user_text, raw, "", ""};
            if (auto* err = std::get_if<prompts::ParseError>(&parsed)) {
                out.record.events.push_back(std::move(event));
                return fail(event.role_or_position, *err);
            }
            const auto& ok = std::get<prompts::ParsedResponse>(parsed);
            event.parsed_choice = ok.answer;
            event.reason_text = ok.reason;
            out.record.events.push_back(std::move(event));
            if (ok.answer == "Yes") {
                out.state.links.insert({pos, target});
                ++links_formed;
            }
        }

        // guess
        auto visible = visible_guesses(out.state.links, out.state.guesses, pos);
        std::string observed_sentence;
        std::vector<std::string> visible_strs;
        if (!visible.empty()) {
            std::vector<std::string> parts;
            for (const auto& [p, g] : visible) {
                parts.push_back("participant " + std::to_string(p) + " guessed " + g);
                visible_strs.push_back(std::string(1, g));
            }
            observed_sentence = prompts::render(templates.get("urn_observations"),
                                                {{"guesses", prompts::join(parts, "; ")}});
        }
        auto instructions =
            prompts::render(templates.get("urn_guess"),
                            {{"position", std::to_string(pos)},
                             {"draw", std::string(1, own_draw)},
                             {"observations", observed_sentence}});
        auto bundle = prompts::build_prompt(templates, instructions, {"A", "B"});
        json context{{"decision", "guess"},
                     {"own_draw", std::string(1, own_draw)},
                     {"visible_guesses", visible_strs}};
        std::string raw = agent->decide(bundle, context);
        auto parsed = prompts::parse_response(raw, bundle.option_set);
        DecisionEvent event{agent->agent_id(), "position " + std::to_string(pos) + " guess",
                            bundle.user_text, raw, "", ""};
        if (auto* err = std::get_if<prompts::ParseError>(&parsed)) {
            out.record.events.push_back(std::move(event));
            return fail(event.role_or_position, *err);
        }
        const auto& ok = std::get<prompts::ParsedResponse>(parsed);
        event.parsed_choice = ok.answer;
        event.reason_text = ok.reason;
        out.record.events.push_back(std::move(event));
        out.state.guesses[pos] = ok.answer[0];
        out.state.points[pos] =
            (ok.answer[0] == out.world.true_urn ? kCorrectGuessPoints : 0) -
            link_cost * links_formed;
    }

    finalize(out, templates);
    return out;
}

// Structured outcome stored in the session's condition block so metrics can
// be recomputed from transcripts alone.
inline void finalize(UrnSessionResult& out, const prompts::TemplateSet&) {
    json links = json::array();
    for (const auto& [f, t] : out.state.links) links.push_back({f, t});
    json guesses = json::object(), points = json::object();
    for (const auto& [p, g] : out.state.guesses)
        guesses[std::to_string(p)] = std::string(1, g);
    for (const auto& [p, pts] : out.state.points) points[std::to_string(p)] = pts;
    std::string draws;
    for (char d : out.world.draws) draws += d;
    out.record.condition["outcome"] = {{"true_urn", std::string(1, out.world.true_urn)},
                                       {"draws", draws},
                                       {"links", links},
                                       {"guesses", guesses},
                                       {"points", points}};
}

// ---------------------------------------------------------------------------
// Metrics

struct LearningMetrics {
    std::array<double, kPositions> accuracy{};
    std::array<double, kPositions> accuracy_se{};
    std::array<int, kPositions> n_by_position{};
    // link_prob[from-1][to-1], from > to
    std::array<std::array<double, kPositions>, kPositions> link_prob{};
    // (position, number of visible guesses differing from own draw)
    //   -> (followed own draw, total)
    std::map<std::pair<int, int>, std::pair<int, int>> follow_own_draw;
    double mean_earnings = 0.0;
    int total_links = 0;
    int n_sessions = 0;
};

inline LearningMetrics learning_metrics(const std::vector<SessionRecord>& records) {
    LearningMetrics m;
    std::array<int, kPositions> correct{};
    std::array<std::array<int, kPositions>, kPositions> link_count{};
    double earnings_sum = 0;
    int earnings_n = 0;
    for (const auto& rec : records) {
        if (rec.experiment != ExperimentKind::SocialLearning)
            throw std::invalid_argument("learning_metrics: not a social-learning record");
        if (!rec.valid()) continue;
        const auto& outcome = rec.condition.at("outcome");
        const char true_urn = outcome.at("true_urn").get<std::string>()[0];
        const std::string draws = outcome.at("draws").get<std::string>();
        LinkSet links;
        for (const auto& l : outcome.at("links"))
            links.insert({l.at(0).get<int>(), l.at(1).get<int>()});
        std::map<int, char> guesses;
        for (const auto& [k, v] : outcome.at("guesses").items())
            guesses[std::stoi(k)] = v.get<std::string>()[0];
        ++m.n_sessions;
        m.total_links += int(links.size());
        for (const auto& [f, t] : links) ++link_count[std::size_t(f - 1)][std::size_t(t - 1)];
        for (const auto& [pos, guess] : guesses) {
            ++m.n_by_position[std::size_t(pos - 1)];
            if (guess == true_urn) ++correct[std::size_t(pos - 1)];
            const char own = draws[std::size_t(pos - 1)];
            int differing = 0;
            for (const auto& [p, g] : visible_guesses(links, guesses, pos))
                if (g != own) ++differing;
            auto& cell = m.follow_own_draw[{pos, differing}];
            if (guess == own) ++cell.first;
            ++cell.second;
        }
        for (const auto& [pos, pts] : outcome.at("points").items()) {
            (void)pos;
            earnings_sum += pts.get<int>();
            ++earnings_n;
        }
    }
    if (m.n_sessions == 0) throw std::invalid_argument("learning_metrics: no valid records");
    for (int p = 0; p < kPositions; ++p) {
        const int n = m.n_by_position[std::size_t(p)];
        if (n == 0) continue;
        const double acc = double(correct[std::size_t(p)]) / n;
        m.accuracy[std::size_t(p)] = acc;
        m.accuracy_se[std::size_t(p)] = std::sqrt(acc * (1 - acc) / n);
        for (int t = 0; t < kPositions; ++t)
            m.link_prob[std::size_t(p)][std::size_t(t)] =
                double(link_count[std::size_t(p)][std::size_t(t)]) / m.n_sessions;
    }
    m.mean_earnings = earnings_n ? earnings_sum / earnings_n : 0.0;
    return m;
}

// ---------------------------------------------------------------------------
// CSV exports (explicit headers, external plotting)

inline std::string accuracy_csv(const LearningMetrics& m) {
    std::string out = "position,accuracy,std_error,n\n";
    for (int p = 0; p < kPositions; ++p) {
        char line[96];
        std::snprintf(line, sizeof(line), "%d,%.6f,%.6f,%d\n", p + 1,
                      m.accuracy[std::size_t(p)], m.accuracy_se[std::size_t(p)],
                      m.n_by_position[std::size_t(p)]);
        out += line;
    }
    return out;
}

inline std::string link_matrix_csv(const LearningMetrics& m) {
    std::string out = "from_position,to_position,link_probability\n";
    for (int f = 2; f <= kPositions; ++f)
        for (int t = 1; t < f; ++t) {
            char line[64];
            std::snprintf(line, sizeof(line), "%d,%d,%.6f\n", f, t,
                          m.link_prob[std::size_t(f - 1)][std::size_t(t - 1)]);
            out += line;
        }
    return out;
}

inline std::string decision_rule_csv(const LearningMetrics& m) {
    std::string out = "position,differing_guesses,p_follow_own_draw,n\n";
    for (const auto& [key, cell] : m.follow_own_draw) {
        char line[96];
        std::snprintf(line, sizeof(line), "%d,%d,%.6f,%d\n", key.first, key.second,
                      cell.second ? double(cell.first) / cell.second : 0.0, cell.second);
        out += line;
    }
    return out;
}

}  // namespace econlab::social_learning
