// Dictator and response games over the fixture set under three group
// conditions: battery runner, SWM classification, and reciprocity contrasts.
#pragma once

#include <cmath>
#include <cstdio>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "econlab/agents.hpp"
#include "econlab/core.hpp"
#include "econlab/estimation.hpp"
#include "econlab/prompts.hpp"

namespace econlab::social_preference {

struct PreferenceObservation {
    std::string game_id;
    GroupCondition condition = GroupCondition::NoGroup;
    BinaryChoice choice = BinaryChoice::B1;
    GameSpec game;  // payoffs as presented
    std::string reason_text;
};

struct BatteryResult {
    std::vector<PreferenceObservation> observations;
    std::vector<SessionRecord> sessions;
    int invalid_count = 0;  // parse failures, excluded from rates
};

inline std::string group_sentence(const prompts::TemplateSet& templates, GroupCondition c) {
    switch (c) {
        case GroupCondition::NoGroup: return "";
        case GroupCondition::Ingroup: return templates.get("group_ingroup");
        case GroupCondition::Outgroup: return templates.get("group_outgroup");
    }
    return "";
}

inline prompts::PromptBundle preference_prompt(const prompts::TemplateSet& templates,
                                               const GameSpec& game, GroupCondition cond) {
    std::map<std::string, std::string> vars{
        {"group_sentence", group_sentence(templates, cond)},
        {"b1_a", std::to_string(game.payoff_b1.a)},
        {"b1_b", std::to_string(game.payoff_b1.b)},
        {"b2_a", std::to_string(game.payoff_b2.a)},
        {"b2_b", std::to_string(game.payoff_b2.b)}};
    std::string instructions;
    if (game.kind == GameKind::Dictator) {
        instructions = prompts::render(templates.get("dictator_game"), vars);
    } else {
        vars["a1_a"] = std::to_string(game.payoff_a1->a);
        vars["a1_b"] = std::to_string(game.payoff_a1->b);
        instructions = prompts::render(templates.get("response_game"), vars);
    }
    return prompts::build_prompt(templates, instructions, {"B1", "B2"});
}

// For each game x replicate, instantiates a fresh agent (no memory across
// games), elicits B's choice, and records the session. Parse failures are
// tallied and the session marked invalid, never silently dropped.
inline BatteryResult run_preference_battery(const agents::AgentFactory& agent_factory,
                                            const std::vector<GameSpec>& games,
                                            GroupCondition condition, int replicates,
                                            std::uint64_t seed,
                                            const prompts::TemplateSet& templates) {
    if (replicates < 1) throw std::invalid_argument("replicates must be >= 1");
    BatteryResult out;
    int index = 0;
    for (const auto& game : games) {
        for (int rep = 0; rep < replicates; ++rep, ++index) {
            auto agent = agent_factory(index);
            auto bundle = preference_prompt(templates, game, condition);
            json context{{"decision", "choice"},
                         {"payoff_b1", {game.payoff_b1.a, game.payoff_b1.b}},
                         {"payoff_b2", {game.payoff_b2.a, game.payoff_b2.b}},
                         {"group_condition", to_string(condition)}};
            std::string raw = agent->decide(bundle, context);
            auto parsed = prompts::parse_response(raw, bundle.option_set);

            SessionRecord rec;
            rec.session_id = game.game_id + "/" + to_string(condition) + "/rep" +
                             std::to_string(rep);
            rec.experiment = ExperimentKind::SocialPreference;
            rec.seed = seed;
            rec.created_at = rfc3339_now();
            rec.condition = {{"game_id", game.game_id},
                             {"group_condition", to_string(condition)},
                             {"replicate", rep},
                             {"template_version", templates.version}};
            DecisionEvent event{agent->agent_id(), "B", bundle.user_text, raw, "", ""};
            if (auto* err = std::get_if<prompts::ParseError>(&parsed)) {
                rec.mark_invalid("B: " + prompts::to_string(err->kind));
                ++out.invalid_count;
            } else {
                const auto& ok = std::get<prompts::ParsedResponse>(parsed);
                event.parsed_choice = ok.answer;
                event.reason_text = ok.reason;
                out.observations.push_back({game.game_id, condition,
                                            binary_choice_from_string(ok.answer), game,
                                            ok.reason});
            }
            rec.events.push_back(std::move(event));
            out.sessions.push_back(std::move(rec));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Social welfare maximization

enum class SwmOption { B1, B2, Tie };

inline SwmOption swm_option(const GameSpec& game) {
    const int sum1 = game.payoff_b1.a + game.payoff_b1.b;
    const int sum2 = game.payoff_b2.a + game.payoff_b2.b;
    if (sum1 > sum2) return SwmOption::B1;
    if (sum2 > sum1) return SwmOption::B2;
    return SwmOption::Tie;
}

struct RateWithSe {
    double rate = 0;
    double std_error = 0;
    int n = 0;
};

// Fraction of observations choosing the welfare-maximizing option; tie games
// are excluded.
inline RateWithSe swm_rate(const std::vector<PreferenceObservation>& observations) {
    int n = 0, hits = 0;
    for (const auto& obs : observations) {
        const SwmOption best = swm_option(obs.game);
        if (best == SwmOption::Tie) continue;
        ++n;
        const bool chose_swm = (best == SwmOption::B1) == (obs.choice == BinaryChoice::B1);
        if (chose_swm) ++hits;
    }
    if (n == 0)
        throw std::invalid_argument("swm_rate: no observations after tie exclusion");
    RateWithSe out;
    out.n = n;
    out.rate = double(hits) / n;
    out.std_error = std::sqrt(out.rate * (1 - out.rate) / n);
    return out;
}

// ---------------------------------------------------------------------------
// Reciprocity contrast: same B payoff structure under three A framings.

struct ContrastTriple {
    std::string dictator_id;
    std::string good_intention_id;
    std::string misbehave_id;
};

inline std::vector<ContrastTriple> builtin_contrast_triples() {
    return {{"Dict 1", "Resp 1a", "Resp 1b"},
            {"Dict 2", "Resp 2a", "Resp 2b"},
            {"Dict 5", "Resp 5a", "Resp 5b"}};
}

struct TripleRates {
    ContrastTriple triple;
    RateWithSe dictator;
    RateWithSe good_intention;
    RateWithSe misbehave;
};

inline RateWithSe b1_rate_for(const std::vector<PreferenceObservation>& observations,
                              const std::string& game_id) {
    int n = 0, b1 = 0;
    for (const auto& obs : observations) {
        if (obs.game_id != game_id) continue;
        ++n;
        if (obs.choice == BinaryChoice::B1) ++b1;
    }
    RateWithSe out;
    out.n = n;
    out.rate = n ? double(b1) / n : 0.0;
    out.std_error = n ? std::sqrt(out.rate * (1 - out.rate) / n) : 0.0;
    return out;
}

inline std::vector<TripleRates> reciprocity_contrast(
    const std::vector<ContrastTriple>& triples,
    const std::vector<PreferenceObservation>& observations,
    const std::vector<GameSpec>& games) {
    auto find = [&](const std::string& id) -> const GameSpec& {
        for (const auto& g : games)
            if (g.game_id == id) return g;
        throw std::invalid_argument("unknown game_id: " + id);
    };
    std::vector<TripleRates> out;
    for (const auto& triple : triples) {
        const auto& d = find(triple.dictator_id);
        const auto& good = find(triple.good_intention_id);
        const auto& bad = find(triple.misbehave_id);
        if (d.payoff_b1 != good.payoff_b1 || d.payoff_b2 != good.payoff_b2 ||
            d.payoff_b1 != bad.payoff_b1 || d.payoff_b2 != bad.payoff_b2)
            throw std::invalid_argument("contrast triple has mismatched B payoffs: " +
                                        triple.dictator_id);
        out.push_back({triple, b1_rate_for(observations, triple.dictator_id),
                       b1_rate_for(observations, triple.good_intention_id),
                       b1_rate_for(observations, triple.misbehave_id)});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Conversions and CSV

inline estimation::PreferenceDataset to_dataset(
    const std::vector<PreferenceObservation>& observations) {
    estimation::PreferenceDataset data;
    for (const auto& obs : observations)
        data.rows.push_back({obs.game_id, obs.condition, obs.choice, obs.game.payoff_b1,
                             obs.game.payoff_b2});
    return data;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

inline std::string observations_csv(const std::vector<PreferenceObservation>& observations) {
    std::string out =
        "game_id,condition,choice,pi_a_b1,pi_b_b1,pi_a_b2,pi_b_b2,pi_a_a1,pi_b_a1,"
        "swm_choice_flag,reason_text\n";
    for (const auto& obs : observations) {
        const SwmOption best = swm_option(obs.game);
        const bool chose_swm =
            best != SwmOption::Tie &&
            (best == SwmOption::B1) == (obs.choice == BinaryChoice::B1);
        char buf[160];
        std::snprintf(buf, sizeof(buf), ",%d,%d,%d,%d,", obs.game.payoff_b1.a,
                      obs.game.payoff_b1.b, obs.game.payoff_b2.a, obs.game.payoff_b2.b);
        out += csv_escape(obs.game_id) + "," + to_string(obs.condition) + "," +
               to_string(obs.choice) + buf;
        if (obs.game.payoff_a1)
            out += std::to_string(obs.game.payoff_a1->a) + "," +
                   std::to_string(obs.game.payoff_a1->b);
        else
            out += ",";
        out += "," + std::to_string(chose_swm ? 1 : 0) + "," + csv_escape(obs.reason_text) +
               "\n";
    }
    return out;
}

}  // namespace econlab::social_preference
