// Built-in payoff structures and observed B1 rates for the 22 dictator and
// response games, plus the 15-replicate binary-dataset reconstruction used by
// the preference estimators.
#pragma once

#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "econlab/core.hpp"
#include "econlab/estimation.hpp"

namespace econlab::fixtures {

// Every observed percentage is an exact multiple of 1/15, so the binary data
// behind the rate table is reconstructed with this replicate count.
inline constexpr int kReplicatesPerCell = 15;

inline const std::vector<GameSpec>& builtin_game_fixtures() {
    static const std::vector<GameSpec> games = [] {
        using K = GameKind;
        auto dict = [](std::string id, Payoff b1, Payoff b2) {
            return GameSpec{std::move(id), K::Dictator, std::nullopt, b1, b2};
        };
        auto resp = [](std::string id, K kind, Payoff a1, Payoff b1, Payoff b2) {
            return GameSpec{std::move(id), kind, a1, b1, b2};
        };
        std::vector<GameSpec> v{
            dict("Dict 1", {400, 400}, {750, 400}),
            dict("Dict 2", {400, 400}, {750, 375}),
            dict("Dict 3", {300, 600}, {700, 500}),
            dict("Dict 4", {200, 700}, {600, 600}),
            dict("Dict 5", {0, 800}, {400, 400}),
            resp("Resp 1a", K::ResponseGoodIntention, {750, 0}, {400, 400}, {750, 400}),
            resp("Resp 2a", K::ResponseGoodIntention, {750, 0}, {400, 400}, {750, 375}),
            resp("Resp 3", K::ResponseGoodIntention, {750, 100}, {300, 600}, {700, 500}),
            resp("Resp 4", K::ResponseGoodIntention, {700, 200}, {200, 700}, {600, 600}),
            resp("Resp 5a", K::ResponseGoodIntention, {800, 0}, {0, 800}, {400, 400}),
            resp("Resp 8", K::ResponseGoodIntention, {725, 0}, {400, 400}, {750, 375}),
            resp("Resp 9", K::ResponseGoodIntention, {450, 0}, {350, 450}, {450, 350}),
            resp("Resp 12", K::ResponseMisbehave, {375, 1000}, {400, 400}, {250, 350}),
            resp("Resp 13a", K::ResponseMisbehave, {750, 750}, {800, 200}, {0, 0}),
            resp("Resp 13b", K::ResponseMisbehave, {750, 750}, {800, 200}, {0, 50}),
            resp("Resp 13c", K::ResponseMisbehave, {750, 750}, {800, 200}, {0, 100}),
            resp("Resp 13d", K::ResponseMisbehave, {750, 750}, {800, 200}, {0, 150}),
            resp("Resp 1b", K::ResponseMisbehave, {550, 550}, {400, 400}, {750, 400}),
            resp("Resp 2b", K::ResponseMisbehave, {550, 550}, {400, 400}, {750, 375}),
            resp("Resp 5b", K::ResponseMisbehave, {0, 800}, {0, 800}, {400, 400}),
            resp("Resp 6", K::ResponseMisbehave, {100, 1000}, {75, 125}, {125, 125}),
            resp("Resp 7", K::ResponseMisbehave, {450, 900}, {200, 400}, {400, 400}),
        };
        for (const auto& g : v) validate(g);
        return v;
    }();
    return games;
}

inline const GameSpec& game_by_id(const std::string& game_id) {
    for (const auto& g : builtin_game_fixtures())
        if (g.game_id == game_id) return g;
    throw std::invalid_argument("unknown game_id: " + game_id);
}

// Observed fraction choosing B1 per (game, condition).
inline const std::map<std::pair<std::string, GroupCondition>, double>&
builtin_observed_b1_rates() {
    static const std::map<std::pair<std::string, GroupCondition>, double> rates = [] {
        // percentages as published: no-group, ingroup, outgroup
        const std::vector<std::tuple<std::string, double, double, double>> table{
            {"Dict 1", 13.3, 20.0, 100.0},   {"Dict 2", 93.3, 53.3, 93.3},
            {"Dict 3", 80.0, 0.0, 100.0},    {"Dict 4", 20.0, 0.0, 40.0},
            {"Dict 5", 13.3, 6.7, 46.7},     {"Resp 1a", 53.3, 86.7, 100.0},
            {"Resp 2a", 100.0, 100.0, 100.0}, {"Resp 3", 100.0, 66.7, 100.0},
            {"Resp 4", 100.0, 33.3, 80.0},   {"Resp 5a", 80.0, 0.0, 60.0},
            {"Resp 8", 93.3, 93.3, 100.0},   {"Resp 9", 100.0, 33.3, 100.0},
            {"Resp 12", 100.0, 100.0, 93.3}, {"Resp 13a", 100.0, 100.0, 100.0},
            {"Resp 13b", 100.0, 100.0, 40.0}, {"Resp 13c", 100.0, 100.0, 53.3},
            {"Resp 13d", 100.0, 100.0, 33.3}, {"Resp 1b", 66.7, 40.0, 93.3},
            {"Resp 2b", 100.0, 80.0, 100.0}, {"Resp 5b", 93.3, 20.0, 93.3},
            {"Resp 6", 53.3, 0.0, 80.0},     {"Resp 7", 13.3, 13.3, 66.7},
        };
        std::map<std::pair<std::string, GroupCondition>, double> m;
        for (const auto& [id, no, in, out] : table) {
            m[{id, GroupCondition::NoGroup}] = no / 100.0;
            m[{id, GroupCondition::Ingroup}] = in / 100.0;
            m[{id, GroupCondition::Outgroup}] = out / 100.0;
        }
        return m;
    }();
    return rates;
}

inline double observed_b1_rate(const std::string& game_id, GroupCondition cond) {
    return builtin_observed_b1_rates().at({game_id, cond});
}

// Number of B1 choices implied by the published rate at 15 replicates.
inline int b1_count(const std::string& game_id, GroupCondition cond) {
    return int(std::lround(observed_b1_rate(game_id, cond) * kReplicatesPerCell));
}

// Reconstruct the per-observation binary dataset behind the rate table:
// round(rate * 15) B1 rows and the remainder B2 rows per (game, condition).
inline estimation::PreferenceDataset reconstruct_dataset(
    const std::vector<GroupCondition>& conditions) {
    estimation::PreferenceDataset data;
    for (const auto& g : builtin_game_fixtures()) {
        for (auto cond : conditions) {
            const int k = b1_count(g.game_id, cond);
            for (int i = 0; i < kReplicatesPerCell; ++i) {
                data.rows.push_back({g.game_id, cond,
                                     i < k ? BinaryChoice::B1 : BinaryChoice::B2,
                                     g.payoff_b1, g.payoff_b2});
            }
        }
    }
    return data;
}

}  // namespace econlab::fixtures
