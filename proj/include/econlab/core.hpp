// Core domain types shared by every experiment engine: games, conditions,
// decisions, sessions, and seed plumbing.
#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

namespace econlab {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Payoffs and games

struct Payoff {
    int a = 0;  // points for player A
    int b = 0;  // points for player B

    friend bool operator==(const Payoff&, const Payoff&) = default;
};

enum class GameKind { Dictator, ResponseGoodIntention, ResponseMisbehave };

inline std::string to_string(GameKind k) {
    switch (k) {
        case GameKind::Dictator: return "dictator";
        case GameKind::ResponseGoodIntention: return "response_good_intention";
        case GameKind::ResponseMisbehave: return "response_misbehave";
    }
    throw std::logic_error("bad GameKind");
}

// One dictator or response game: B chooses between B1 and B2; response games
// additionally carry the A1 outside option that A declined.
struct GameSpec {
    std::string game_id;
    GameKind kind = GameKind::Dictator;
    std::optional<Payoff> payoff_a1;  // absent iff kind == Dictator
    Payoff payoff_b1;
    Payoff payoff_b2;

    friend bool operator==(const GameSpec&, const GameSpec&) = default;
};

inline void validate(const GameSpec& g) {
    if ((g.kind == GameKind::Dictator) == g.payoff_a1.has_value())
        throw std::invalid_argument("GameSpec " + g.game_id +
                                    ": payoff_a1 present iff response game");
    auto nonneg = [](const Payoff& p) { return p.a >= 0 && p.b >= 0; };
    if (!nonneg(g.payoff_b1) || !nonneg(g.payoff_b2) ||
        (g.payoff_a1 && !nonneg(*g.payoff_a1)))
        throw std::invalid_argument("GameSpec " + g.game_id + ": negative payoff");
}

// ---------------------------------------------------------------------------
// Conditions and choices

enum class GroupCondition { NoGroup, Ingroup, Outgroup };

inline std::string to_string(GroupCondition c) {
    switch (c) {
        case GroupCondition::NoGroup: return "no_group";
        case GroupCondition::Ingroup: return "ingroup";
        case GroupCondition::Outgroup: return "outgroup";
    }
    throw std::logic_error("bad GroupCondition");
}

inline GroupCondition group_condition_from_string(const std::string& s) {
    if (s == "no_group") return GroupCondition::NoGroup;
    if (s == "ingroup") return GroupCondition::Ingroup;
    if (s == "outgroup") return GroupCondition::Outgroup;
    throw std::invalid_argument("unknown group condition: " + s);
}

enum class BinaryChoice { B1, B2 };

inline std::string to_string(BinaryChoice c) {
    return c == BinaryChoice::B1 ? "B1" : "B2";
}

inline BinaryChoice binary_choice_from_string(const std::string& s) {
    if (s == "B1") return BinaryChoice::B1;
    if (s == "B2") return BinaryChoice::B2;
    throw std::invalid_argument("unknown binary choice: " + s);
}

// ---------------------------------------------------------------------------
// Sessions

enum class ExperimentKind { SocialLearning, SocialPreference, Upstream, Downstream };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
        case ExperimentKind::SocialLearning: return "social_learning";
        case ExperimentKind::SocialPreference: return "social_preference";
        case ExperimentKind::Upstream: return "upstream";
        case ExperimentKind::Downstream: return "downstream";
    }
    throw std::logic_error("bad ExperimentKind");
}

inline ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "social_learning") return ExperimentKind::SocialLearning;
    if (s == "social_preference") return ExperimentKind::SocialPreference;
    if (s == "upstream") return ExperimentKind::Upstream;
    if (s == "downstream") return ExperimentKind::Downstream;
    throw std::invalid_argument("unknown experiment kind: " + s);
}

// One elicited decision: the prompt shown, the raw agent output, and what was
// parsed out of it.
struct DecisionEvent {
    std::string agent_id;
    std::string role_or_position;
    std::string prompt_text;
    std::string raw_response;
    std::string parsed_choice;
    std::string reason_text;

    friend bool operator==(const DecisionEvent&, const DecisionEvent&) = default;
};

// One complete play-through of an experiment. `condition` is a free-form JSON
// object holding the condition parameters, the template_version, and (for
// analysis convenience) the structured outcome of the session.
struct SessionRecord {
    std::string session_id;
    ExperimentKind experiment = ExperimentKind::SocialPreference;
    json condition = json::object();
    std::uint64_t seed = 0;
    std::vector<DecisionEvent> events;
    std::string created_at;  // RFC 3339

    bool valid() const {
        return !(condition.contains("invalid") && condition["invalid"].get<bool>());
    }
    void mark_invalid(const std::string& diagnostic) {
        condition["invalid"] = true;
        condition["diagnostic"] = diagnostic;
    }

    friend bool operator==(const SessionRecord&, const SessionRecord&) = default;
};

inline std::string rfc3339_now() {
    auto now = std::chrono::system_clock::now();
    std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

// ---------------------------------------------------------------------------
// JSON serialization (JSONL transcript schema)

inline void to_json(json& j, const DecisionEvent& e) {
    j = json{{"agent_id", e.agent_id},
             {"role_or_position", e.role_or_position},
             {"prompt_text", e.prompt_text},
             {"raw_response", e.raw_response},
             {"parsed_choice", e.parsed_choice},
             {"reason_text", e.reason_text}};
}

inline void from_json(const json& j, DecisionEvent& e) {
    j.at("agent_id").get_to(e.agent_id);
    j.at("role_or_position").get_to(e.role_or_position);
    j.at("prompt_text").get_to(e.prompt_text);
    j.at("raw_response").get_to(e.raw_response);
    j.at("parsed_choice").get_to(e.parsed_choice);
    j.at("reason_text").get_to(e.reason_text);
}

inline void to_json(json& j, const SessionRecord& r) {
    j = json{{"session_id", r.session_id},
             {"experiment", to_string(r.experiment)},
             {"condition", r.condition},
             {"seed", r.seed},
             {"events", r.events},
             {"created_at", r.created_at}};
}

inline void from_json(const json& j, SessionRecord& r) {
    j.at("session_id").get_to(r.session_id);
    r.experiment = experiment_kind_from_string(j.at("experiment").get<std::string>());
    r.condition = j.at("condition");
    j.at("seed").get_to(r.seed);
    j.at("events").get_to(r.events);
    j.at("created_at").get_to(r.created_at);
}

// ---------------------------------------------------------------------------
// Deterministic RNG helpers
//
// std::uniform_int_distribution is implementation-defined, so replay
// determinism uses only raw mt19937_64 output plus the helpers below.

class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        // splitmix64; passes through the full 64-bit state deterministically
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    // uniform in [0, n)
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw std::invalid_argument("Rng::below(0)");
        // rejection sampling keeps the draw exactly uniform
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v;
        do {
            v = next_u64();
        } while (v >= limit);
        return v % n;
    }

    // uniform in [0, 1)
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // derive an independent stream, e.g. one per session
    Rng fork(std::uint64_t salt) {
        return Rng(next_u64() ^ (salt * 0x9e3779b97f4a7c15ULL));
    }

  private:
    std::uint64_t state_;
};

}  // namespace econlab
