#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <memory>
#include <vector>

#include "econlab/agents.hpp"
#include "econlab/game_social_learning.hpp"

using namespace econlab;
using namespace econlab::social_learning;

namespace {

// Deterministic urn player for bookkeeping tests: links whenever asked to,
// always guesses its own draw.
class AlwaysLinkOwnDrawAgent final : public agents::AgentBackend {
  public:
    explicit AlwaysLinkOwnDrawAgent(bool link)
        : AgentBackend("always", Kind::Scripted), link_(link) {}
    std::string decide(const prompts::PromptBundle&, const json& context) override {
        const std::string decision = context.at("decision").get<std::string>();
        if (decision == "link")
            return prompts::format_templated_response("r", link_ ? "Yes" : "No");
        return prompts::format_templated_response("r",
                                                  context.at("own_draw").get<std::string>());
    }

  private:
    bool link_;
};

class GarbageAgent final : public agents::AgentBackend {
  public:
    GarbageAgent() : AgentBackend("garbage", Kind::Scripted) {}
    std::string decide(const prompts::PromptBundle&, const json&) override {
        return "no tags here";
    }
};

std::vector<agents::AgentBackend*> raw(const std::vector<agents::AgentPtr>& owned) {
    std::vector<agents::AgentBackend*> out;
    for (const auto& p : owned) out.push_back(p.get());
    return out;
}

}  // namespace

TEST_CASE("sample_world draws match the true urn about two thirds of the time") {
    Rng rng(5);
    int matches = 0, total = 0, urn_a = 0;
    for (int i = 0; i < 3000; ++i) {
        auto w = sample_world(rng, 0, i);
        if (w.true_urn == 'A') ++urn_a;
        for (char d : w.draws) {
            ++total;
            if (d == w.true_urn) ++matches;
        }
    }
    CHECK(double(matches) / total == doctest::Approx(2.0 / 3.0).epsilon(0.03));
    CHECK(double(urn_a) / 3000 == doctest::Approx(0.5).epsilon(0.06));
}

TEST_CASE("visible_guesses follows links transitively without revealing topology") {
    LinkSet links{{3, 2}, {2, 1}};
    std::map<int, char> guesses{{1, 'A'}, {2, 'B'}};
    auto seen = visible_guesses(links, guesses, 3);
    CHECK(seen == std::set<std::pair<int, char>>{{1, 'A'}, {2, 'B'}});
    // no link from 4: nothing visible
    CHECK(visible_guesses(links, guesses, 4).empty());
    // direct link only
    CHECK(visible_guesses({{4, 1}}, guesses, 4) ==
          std::set<std::pair<int, char>>{{1, 'A'}});
}

TEST_CASE("run_urn_session validates inputs") {
    std::vector<agents::AgentPtr> three;
    for (int i = 0; i < 3; ++i) three.push_back(std::make_unique<AlwaysLinkOwnDrawAgent>(false));
    auto templates = prompts::default_templates();
    CHECK_THROWS_AS(run_urn_session(raw(three), 0, 1, templates), std::invalid_argument);
    std::vector<agents::AgentPtr> four;
    for (int i = 0; i < 4; ++i) four.push_back(std::make_unique<AlwaysLinkOwnDrawAgent>(false));
    CHECK_THROWS_AS(run_urn_session(raw(four), -1, 1, templates), std::invalid_argument);
}

TEST_CASE("session bookkeeping: points equal 100 x correct minus link costs") {
    auto templates = prompts::default_templates();
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL, 4ULL, 5ULL}) {
        std::vector<agents::AgentPtr> players;
        for (int i = 0; i < 4; ++i)
            players.push_back(std::make_unique<AlwaysLinkOwnDrawAgent>(true));
        auto result = run_urn_session(raw(players), 4, seed, templates);
        REQUIRE(result.record.valid());
        // everyone links to every predecessor
        CHECK(result.state.links.size() == 6);
        for (int pos = 1; pos <= 4; ++pos) {
            const char own = result.world.draws[std::size_t(pos - 1)];
            CHECK(result.state.guesses.at(pos) == own);
            const int links_formed = pos - 1;
            const int expected = (own == result.world.true_urn ? 100 : 0) - 4 * links_formed;
            CHECK(result.state.points.at(pos) == expected);
        }
        // events: (pos-1) link prompts + 1 guess prompt per position
        CHECK(result.record.events.size() == 6 + 4);
        // outcome block is recomputable
        const auto& outcome = result.record.condition.at("outcome");
        CHECK(outcome.at("draws").get<std::string>().size() == 4);
        CHECK(outcome.at("links").size() == 6);
    }
}

TEST_CASE("link prompts offer the immediate predecessor first") {
    auto templates = prompts::default_templates();
    std::vector<agents::AgentPtr> players;
    for (int i = 0; i < 4; ++i)
        players.push_back(std::make_unique<AlwaysLinkOwnDrawAgent>(false));
    auto result = run_urn_session(raw(players), 4, 9, templates);
    REQUIRE(result.record.valid());
    // position 4's three link events come in target order 3, 2, 1
    std::vector<std::string> roles;
    for (const auto& e : result.record.events)
        if (e.role_or_position.rfind("position 4 link", 0) == 0)
            roles.push_back(e.role_or_position);
    CHECK(roles == std::vector<std::string>{"position 4 link to 3", "position 4 link to 2",
                                            "position 4 link to 1"});
}

TEST_CASE("parse failure marks the session invalid and keeps the raw response") {
    auto templates = prompts::default_templates();
    std::vector<agents::AgentPtr> players;
    players.push_back(std::make_unique<AlwaysLinkOwnDrawAgent>(false));
    players.push_back(std::make_unique<GarbageAgent>());
    players.push_back(std::make_unique<AlwaysLinkOwnDrawAgent>(false));
    players.push_back(std::make_unique<AlwaysLinkOwnDrawAgent>(false));
    auto result = run_urn_session(raw(players), 0, 3, templates);
    CHECK_FALSE(result.record.valid());
    CHECK(result.record.condition.at("diagnostic").get<std::string>().find(
              "MissingReasonTag") != std::string::npos);
    CHECK(result.record.events.back().raw_response == "no tags here");
}

TEST_CASE("learning_metrics matches a hand computation") {
    auto templates = prompts::default_templates();
    std::vector<SessionRecord> records;
    // two Bayesian sessions at cost 0 with fixed seeds
    for (std::uint64_t seed : {11ULL, 12ULL, 13ULL, 14ULL}) {
        std::vector<agents::AgentPtr> players;
        for (int i = 0; i < 4; ++i)
            players.push_back(agents::scripted_bayesian_urn_agent({1.0, 0}));
        records.push_back(run_urn_session(raw(players), 0, seed, templates).record);
    }
    auto metrics = learning_metrics(records);
    CHECK(metrics.n_sessions == 4);
    // recompute position-1 accuracy by hand from the stored outcomes
    int correct1 = 0;
    for (const auto& rec : records) {
        const auto& outcome = rec.condition.at("outcome");
        if (outcome.at("guesses").at("1").get<std::string>()[0] ==
            outcome.at("true_urn").get<std::string>()[0])
            ++correct1;
    }
    CHECK(metrics.accuracy[0] == doctest::Approx(correct1 / 4.0));
    CHECK(metrics.n_by_position[0] == 4);
    // free chain links: every position links exactly to its predecessor
    CHECK(metrics.link_prob[1][0] == doctest::Approx(1.0));
    CHECK(metrics.link_prob[2][1] == doctest::Approx(1.0));
    CHECK(metrics.link_prob[3][2] == doctest::Approx(1.0));
    CHECK(metrics.link_prob[3][0] == doctest::Approx(0.0));
    CHECK(metrics.total_links == 4 * 3);
}

TEST_CASE("learning_metrics skips invalid sessions and rejects wrong kinds") {
    auto templates = prompts::default_templates();
    std::vector<agents::AgentPtr> players;
    for (int i = 0; i < 4; ++i)
        players.push_back(std::make_unique<AlwaysLinkOwnDrawAgent>(false));
    auto good = run_urn_session(raw(players), 0, 21, templates).record;
    SessionRecord bad = good;
    bad.mark_invalid("synthetic");
    auto metrics = learning_metrics({good, bad});
    CHECK(metrics.n_sessions == 1);

    SessionRecord wrong;
    wrong.experiment = ExperimentKind::Upstream;
    CHECK_THROWS_AS(learning_metrics({wrong}), std::invalid_argument);
    CHECK_THROWS_AS(learning_metrics({bad}), std::invalid_argument);  // none valid
}

TEST_CASE("CSV exports carry headers and rows") {
    auto templates = prompts::default_templates();
    std::vector<agents::AgentPtr> players;
    for (int i = 0; i < 4; ++i)
        players.push_back(agents::scripted_bayesian_urn_agent({1.0, 0}));
    auto metrics =
        learning_metrics({run_urn_session(raw(players), 4, 2, templates).record});
    CHECK(accuracy_csv(metrics).rfind("position,accuracy,std_error,n\n", 0) == 0);
    CHECK(link_matrix_csv(metrics).rfind("from_position,to_position,link_probability\n", 0) ==
          0);
    CHECK(decision_rule_csv(metrics).rfind("position,differing_guesses,", 0) == 0);
}
