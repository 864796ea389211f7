// Upstream (pay-it-forward) transfer game and downstream (image-scoring)
// donation game: session runners, accounting, and metrics.
#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "econlab/agents.hpp"
#include "econlab/core.hpp"
#include "econlab/prompts.hpp"

namespace econlab::indirect_reciprocity {

// ---------------------------------------------------------------------------
// Upstream transfer game

enum class TransferMode { Direct, Indirect };

inline std::string to_string(TransferMode m) {
    return m == TransferMode::Direct ? "Direct" : "Indirect";
}

struct TransferSession {
    TransferMode mode = TransferMode::Direct;
    int endowment = 10;
    int multiplier = 3;
    int sent_by_a = 0;       // in [0, endowment]
    int returned_by_b = 0;   // in [0, multiplier * sent_by_a]
};

struct TransferSessionResult {
    SessionRecord record;
    TransferSession b_session;        // B responding to what A sent
    TransferSession b_prime_session;  // B' responding to what A' sent
};

struct TransferAgents {
    agents::AgentBackend* b = nullptr;
    agents::AgentBackend* b_prime = nullptr;
};

namespace detail {

// Elicits one return decision; returns nullopt on parse failure (the caller
// marks the session invalid).
inline std::optional<int> elicit_return(agents::AgentBackend& agent,
                                        const prompts::TemplateSet& templates,
                                        TransferMode mode, const std::string& role,
                                        const std::string& sender,
                                        const std::string& beneficiary, int received,
                                        SessionRecord& rec) {
    if (received == 0) {
        // empty range: nothing to decide
        rec.events.push_back({agent.agent_id(), role, "", "", "0", "received 0 points"});
        return 0;
    }
    auto instructions = prompts::render(
        templates.get("transfer_return"),
        {{"role", role},
         {"sender", sender},
         {"relation", mode == TransferMode::Direct ? "to you" : "forward to you"},
         {"received", std::to_string(received)},
         {"beneficiary", beneficiary}});
    prompts::PromptBundle bundle{templates.get("system"), instructions, {}};
    bundle.user_text +=
        "\n\n" + prompts::render(templates.get("answer_directive"),
                                 {{"options", "a whole number between 0 and " +
                                                  std::to_string(received)}});
    json context{{"decision", "return"}, {"received", received}};
    std::string raw = agent.decide(bundle, context);
    auto parsed = prompts::parse_numeric_response(raw, 0, received);
    DecisionEvent event{agent.agent_id(), role, bundle.user_text, raw, "", ""};
    if (auto* err = std::get_if<prompts::ParseError>(&parsed)) {
        rec.events.push_back(std::move(event));
        rec.mark_invalid(role + ": " + prompts::to_string(err->kind));
        return std::nullopt;
    }
    const auto& ok = std::get<prompts::ParsedNumericResponse>(parsed);
    event.parsed_choice = std::to_string(ok.amount);
    event.reason_text = ok.reason;
    rec.events.push_back(std::move(event));
    return ok.amount;
}

}  // namespace detail

// Two sender/receiver pairs (A to B, A' to B'). Sent amounts are randomized
// uniformly on {0..10} unless overridden; only the return decisions are
// elicited. In Direct mode returns go back to the own sender; in Indirect
// mode B returns toward A' and B' toward A.
inline TransferSessionResult run_transfer_session(
    const TransferAgents& transfer_agents, TransferMode mode, std::uint64_t seed,
    const prompts::TemplateSet& templates,
    std::optional<std::pair<int, int>> sent_amounts = std::nullopt,
    const std::string& session_id = "transfer") {
    if (!transfer_agents.b || !transfer_agents.b_prime)
        throw std::invalid_argument("run_transfer_session: both receivers required");
    if (transfer_agents.b == transfer_agents.b_prime)
        throw std::invalid_argument("run_transfer_session: receivers must be distinct");
    Rng rng(seed);
    TransferSessionResult out;
    out.b_session.mode = out.b_prime_session.mode = mode;
    out.b_session.sent_by_a =
        sent_amounts ? sent_amounts->first : int(rng.below(11));
    out.b_prime_session.sent_by_a =
        sent_amounts ? sent_amounts->second : int(rng.below(11));
    if (out.b_session.sent_by_a < 0 || out.b_session.sent_by_a > 10 ||
        out.b_prime_session.sent_by_a < 0 || out.b_prime_session.sent_by_a > 10)
        throw std::invalid_argument("sent amount out of [0, 10]");

    SessionRecord& rec = out.record;
    rec.session_id = session_id;
    rec.experiment = ExperimentKind::Upstream;
    rec.seed = seed;
    rec.created_at = rfc3339_now();
    rec.condition = {{"game", "transfer"},
                     {"mode", to_string(mode)},
                     {"template_version", templates.version}};

    const std::string b_beneficiary = mode == TransferMode::Direct ? "A" : "A'";
    const std::string bp_beneficiary = mode == TransferMode::Direct ? "A'" : "A";
    auto ret_b = detail::elicit_return(*transfer_agents.b, templates, mode, "B", "A",
                                       b_beneficiary,
                                       3 * out.b_session.sent_by_a, rec);
    if (!ret_b) return out;
    out.b_session.returned_by_b = *ret_b;
    auto ret_bp = detail::elicit_return(*transfer_agents.b_prime, templates, mode, "B'",
                                        "A'", bp_beneficiary,
                                        3 * out.b_prime_session.sent_by_a, rec);
    if (!ret_bp) return out;
    out.b_prime_session.returned_by_b = *ret_bp;
    rec.condition["outcome"] = {
        {"sent", {out.b_session.sent_by_a, out.b_prime_session.sent_by_a}},
        {"returned", {out.b_session.returned_by_b, out.b_prime_session.returned_by_b}}};
    return out;
}

inline std::string transfers_csv(const std::vector<TransferSessionResult>& results) {
    std::string out = "mode,sent,received,returned\n";
    for (const auto& r : results) {
        if (!r.record.valid()) continue;
        for (const auto* s : {&r.b_session, &r.b_prime_session}) {
            out += to_string(s->mode) + "," + std::to_string(s->sent_by_a) + "," +
                   std::to_string(s->multiplier * s->sent_by_a) + "," +
                   std::to_string(s->returned_by_b) + "\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Downstream image-scoring donation game

struct ImageGameState {
    int n_agents = 10;
    int rounds = 6;
    int endowment_per_agent = 7;
    int donor_cost = 2;
    int benefit = 4;
    std::vector<int> balances;       // by agent index
    std::vector<int> gave_count;     // donor history
    std::vector<int> withheld_count;

    int image_score(int agent) const { return gave_count[agent] - withheld_count[agent]; }
};

// One donor decision with the information the donor saw.
struct DonationObservation {
    int donor = 0;
    int receiver = 0;
    int round = 0;
    int receiver_gave = 0;      // counts before this decision
    int receiver_withheld = 0;
    int donor_cost = 0;
    int endowment = 0;
    bool gave = false;
    std::string reason_text;
};

struct ImageSessionResult {
    SessionRecord record;
    ImageGameState state;
    std::vector<DonationObservation> observations;
};

inline void validate_image_condition(int endowment, int cost) {
    const bool baseline_endowment = endowment == 7 && cost >= 1 && cost <= 4;
    const bool endowment_arm = cost == 2 && (endowment == 4 || endowment == 7 || endowment == 13);
    if (!baseline_endowment && !endowment_arm)
        throw std::invalid_argument("unsupported image-game condition cell");
}

namespace detail {

// Random perfect matching of donors to receivers avoiding previously used
// (donor, receiver) pairs, by rejection sampling over shuffles.
inline std::vector<int> fresh_matching(const std::vector<int>& donors,
                                       const std::vector<int>& receivers,
                                       const std::set<std::pair<int, int>>& used,
                                       Rng& rng) {
    std::vector<int> perm(receivers.size());
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = int(i);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        for (std::size_t i = perm.size(); i > 1; --i)
            std::swap(perm[i - 1], perm[rng.below(i)]);
        bool clean = true;
        for (std::size_t i = 0; i < donors.size() && clean; ++i)
            if (used.count({donors[i], receivers[perm[i]]})) clean = false;
        if (clean) {
            std::vector<int> matched(donors.size());
            for (std::size_t i = 0; i < donors.size(); ++i) matched[i] = receivers[perm[i]];
            return matched;
        }
    }
    throw std::runtime_error("fresh_matching: no repeat-free matching found");
}

}  // namespace detail

// Ten agents, six rounds; agents 0-4 and 5-9 alternate the donor role by
// round. Donors see only the receiver's give/withhold counts.
inline ImageSessionResult run_image_game(const std::vector<agents::AgentPtr>& players,
                                         int endowment, int donor_cost, std::uint64_t seed,
                                         const prompts::TemplateSet& templates,
                                         const std::string& session_id = "image") {
    if (players.size() != 10)
        throw std::invalid_argument("run_image_game: exactly 10 agents required");
    validate_image_condition(endowment, donor_cost);

    ImageSessionResult out;
    ImageGameState& st = out.state;
    st.endowment_per_agent = endowment;
    st.donor_cost = donor_cost;
    st.balances.assign(st.n_agents, endowment);
    st.gave_count.assign(st.n_agents, 0);
    st.withheld_count.assign(st.n_agents, 0);

    SessionRecord& rec = out.record;
    rec.session_id = session_id;
    rec.experiment = ExperimentKind::Downstream;
    rec.seed = seed;
    rec.created_at = rfc3339_now();
    rec.condition = {{"game", "image"},
                     {"endowment", endowment},
                     {"cost", donor_cost},
                     {"template_version", templates.version}};

    Rng rng(seed);
    std::set<std::pair<int, int>> used_pairs;
    for (int round = 0; round < st.rounds; ++round) {
        std::vector<int> donors, receivers;
        for (int i = 0; i < st.n_agents; ++i)
            ((round % 2 == 0) == (i < 5) ? donors : receivers).push_back(i);
        auto matched = detail::fresh_matching(donors, receivers, used_pairs, rng);
        for (std::size_t i = 0; i < donors.size(); ++i) {
            const int donor = donors[i];
            const int receiver = matched[i];
            used_pairs.insert({donor, receiver});

            const int gave = st.gave_count[receiver];
            const int withheld = st.withheld_count[receiver];
            auto instructions = prompts::render(
                templates.get("image_donor"),
                {{"balance", std::to_string(st.balances[donor])},
                 {"currency", "Swiss Francs"},
                 {"gave", std::to_string(gave)},
                 {"withheld", std::to_string(withheld)},
                 {"cost", std::to_string(donor_cost)},
                 {"benefit", std::to_string(st.benefit)}});
            auto bundle = prompts::build_prompt(templates, instructions, {"Give", "Withhold"});
            json context{{"decision", "donate"},   {"receiver_gave", gave},
                         {"receiver_withheld", withheld}, {"cost", donor_cost},
                         {"benefit", st.benefit},  {"balance", st.balances[donor]}};
            std::string raw = players[donor]->decide(bundle, context);
            auto parsed = prompts::parse_response(raw, bundle.option_set);
            DecisionEvent event{players[donor]->agent_id(),
                                "donor" + std::to_string(donor), bundle.user_text, raw, "",
                                ""};
            if (auto* err = std::get_if<prompts::ParseError>(&parsed)) {
                rec.events.push_back(std::move(event));
                rec.mark_invalid("donor " + std::to_string(donor) + " round " +
                                 std::to_string(round) + ": " +
                                 prompts::to_string(err->kind));
                return out;
            }
            const auto& ok = std::get<prompts::ParsedResponse>(parsed);
            event.parsed_choice = ok.answer;
            event.reason_text = ok.reason;
            rec.events.push_back(std::move(event));

            const bool give = ok.answer == "Give";
            if (give) {
                st.balances[donor] -= donor_cost;
                st.balances[receiver] += st.benefit;
                ++st.gave_count[donor];
            } else {
                ++st.withheld_count[donor];
            }
            out.observations.push_back({donor, receiver, round, gave, withheld, donor_cost,
                                        endowment, give, ok.reason});
        }
    }
    json scores = json::array();
    for (int i = 0; i < st.n_agents; ++i) scores.push_back(st.image_score(i));
    json observed = json::array();
    for (const auto& o : out.observations)
        observed.push_back({{"gave", o.receiver_gave},
                            {"withheld", o.receiver_withheld},
                            {"cost", o.donor_cost},
                            {"endowment", o.endowment},
                            {"give", o.gave}});
    rec.condition["outcome"] = {{"balances", st.balances},
                                {"image_scores", scores},
                                {"observations", observed}};
    return out;
}

// ---------------------------------------------------------------------------
// Metrics

struct DonationRate {
    int n = 0;
    int gave = 0;
    double rate() const { return n ? double(gave) / n : 0.0; }
};

struct ImageMetrics {
    std::map<int, DonationRate> by_score;                       // receiver image score
    std::map<std::pair<int, int>, DonationRate> by_grid;        // (#gave, #withheld)
    std::map<int, DonationRate> by_cost;
    std::map<int, DonationRate> by_endowment;
    int n_observations = 0;
};

inline ImageMetrics image_metrics(const std::vector<DonationObservation>& observations) {
    if (observations.empty())
        throw std::invalid_argument("image_metrics: no observations");
    ImageMetrics m;
    for (const auto& obs : observations) {
        const int score = obs.receiver_gave - obs.receiver_withheld;
        for (auto* cell : {&m.by_score[score], &m.by_grid[{obs.receiver_gave, obs.receiver_withheld}],
                           &m.by_cost[obs.donor_cost], &m.by_endowment[obs.endowment]}) {
            ++cell->n;
            if (obs.gave) ++cell->gave;
        }
        ++m.n_observations;
    }
    return m;
}

inline std::string image_metrics_csv(const ImageMetrics& m) {
    std::string out = "facet,key,n,gave,rate\n";
    auto emit = [&](const std::string& facet, const std::string& key,
                    const DonationRate& r) {
        char buf[64];
        std::snprintf(buf, sizeof(buf), "%d,%d,%.6f\n", r.n, r.gave, r.rate());
        out += facet + "," + key + "," + buf;
    };
    for (const auto& [k, v] : m.by_score) emit("score", std::to_string(k), v);
    for (const auto& [k, v] : m.by_grid)
        emit("grid", std::to_string(k.first) + "g" + std::to_string(k.second) + "w", v);
    for (const auto& [k, v] : m.by_cost) emit("cost", std::to_string(k), v);
    for (const auto& [k, v] : m.by_endowment) emit("endowment", std::to_string(k), v);
    return out;
}

}  // namespace econlab::indirect_reciprocity
