// Decision-maker abstraction plus the scripted oracle policies used for
// testing and parameter-recovery runs.
//
// Engines pass a structured context alongside the rendered prompt so scripted
// agents can act without natural-language understanding. Conventions:
//   context["decision"] == "choice"  -> {"payoff_b1":[a,b], "payoff_b2":[a,b]}
//   context["decision"] == "guess"   -> {"own_draw":"A"|"B", "visible_guesses":[...]}
//   context["decision"] == "link"    -> {"own_draw", "position", "target_position",
//                                        "cost", "already_visible_up_to"}
//   context["decision"] == "return"  -> {"received": int}
//   context["decision"] == "donate"  -> {"receiver_gave", "receiver_withheld",
//                                        "cost", "benefit", "balance"}
#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "econlab/core.hpp"
#include "econlab/estimation.hpp"
#include "econlab/llm_client.hpp"
#include "econlab/prompts.hpp"

namespace econlab::agents {

class AgentBackend {
  public:
    enum class Kind { Scripted, Remote };

    AgentBackend(std::string agent_id, Kind kind)
        : agent_id_(std::move(agent_id)), kind_(kind) {}
    virtual ~AgentBackend() = default;

    // Returns the raw (templated) response text.
    virtual std::string decide(const prompts::PromptBundle& bundle, const json& context) = 0;

    const std::string& agent_id() const { return agent_id_; }
    Kind kind() const { return kind_; }

  private:
    std::string agent_id_;
    Kind kind_;
};

using AgentPtr = std::unique_ptr<AgentBackend>;
using AgentFactory = std::function<AgentPtr(int index)>;

// ---------------------------------------------------------------------------
// Charness-Rabin logit policy: samples B1 with the model's choice probability.

struct CRLogitPolicy {
    double rho = 0.0;
    double sigma = 0.0;
    double gamma = 0.0;
    std::uint64_t rng_seed = 0;
};

class CRLogitAgent final : public AgentBackend {
  public:
    CRLogitAgent(CRLogitPolicy policy, std::string agent_id = "cr_logit")
        : AgentBackend(std::move(agent_id), Kind::Scripted),
          policy_(policy),
          rng_(policy.rng_seed) {}

    std::string decide(const prompts::PromptBundle&, const json& context) override {
        if (!context.contains("payoff_b1") || !context.contains("payoff_b2"))
            throw std::invalid_argument("CRLogitAgent: context missing payoffs");
        auto u_of = [&](const json& p) {
            return estimation::cr_utility(p.at(0).get<double>(), p.at(1).get<double>(),
                                          policy_.rho, policy_.sigma);
        };
        const double u1 = u_of(context["payoff_b1"]);
        const double u2 = u_of(context["payoff_b2"]);
        const double p1 = estimation::logit_choice_prob(u1, u2, policy_.gamma);
        const bool pick_b1 = rng_.bernoulli(p1);
        return prompts::format_templated_response(
            "Weighing my own payoff against my match's payoff under each option.",
            pick_b1 ? "B1" : "B2");
    }

    double prob_b1(const Payoff& b1, const Payoff& b2) const {
        const double u1 = estimation::cr_utility(b1.a, b1.b, policy_.rho, policy_.sigma);
        const double u2 = estimation::cr_utility(b2.a, b2.b, policy_.rho, policy_.sigma);
        return estimation::logit_choice_prob(u1, u2, policy_.gamma);
    }

  private:
    CRLogitPolicy policy_;
    Rng rng_;
};

inline AgentPtr scripted_cr_agent(CRLogitPolicy policy, std::string agent_id = "cr_logit") {
    return std::make_unique<CRLogitAgent>(policy, std::move(agent_id));
}

// ---------------------------------------------------------------------------
// Bayesian urn policy.
//
// Observed predecessor guesses are modeled as conditionally independent
// signals of accuracy 2/3; the own draw enters the log-odds scaled by
// self_weight (1.0 = exact Bayes).

struct BayesianUrnPolicy {
    double self_weight = 1.0;  // in (0, 1]
    std::uint64_t rng_seed = 0;
};

namespace detail {

inline const double kLog2 = std::log(2.0);  // log-likelihood ratio of a 2/3 signal

// P(urn A | own draw, observed guesses) under the independent-signal model.
inline double urn_posterior_a(char own_draw, const std::vector<char>& observed,
                              double self_weight) {
    double log_odds = self_weight * (own_draw == 'A' ? kLog2 : -kLog2);
    for (char g : observed) log_odds += g == 'A' ? kLog2 : -kLog2;
    return 1.0 / (1.0 + std::exp(-log_odds));
}

// Guess rule: argmax posterior, ties broken toward the own draw.
inline char urn_guess(char own_draw, const std::vector<char>& observed, double self_weight) {
    const double pa = urn_posterior_a(own_draw, observed, self_weight);
    if (std::abs(pa - 0.5) < 1e-12) return own_draw;
    return pa > 0.5 ? 'A' : 'B';
}

// Expected probability of guessing the urn correctly with the own draw plus
// `extra_signals` independent 2/3 signals, by exhaustive enumeration.
inline double expected_urn_accuracy(int extra_signals, double self_weight) {
    // condition on urn A; symmetric in the urn
    double acc = 0.0;
    const int n = extra_signals + 1;  // own draw + signals
    for (int mask = 0; mask < (1 << n); ++mask) {
        double prob = 1.0;
        char own = (mask & 1) ? 'A' : 'B';
        prob *= (mask & 1) ? 2.0 / 3.0 : 1.0 / 3.0;
        std::vector<char> obs;
        for (int i = 1; i < n; ++i) {
            bool correct = mask & (1 << i);
            obs.push_back(correct ? 'A' : 'B');
            prob *= correct ? 2.0 / 3.0 : 1.0 / 3.0;
        }
        if (urn_guess(own, obs, self_weight) == 'A') acc += prob;
    }
    return acc;
}

}  // namespace detail

class BayesianUrnAgent final : public AgentBackend {
  public:
    BayesianUrnAgent(BayesianUrnPolicy policy, std::string agent_id = "bayes_urn")
        : AgentBackend(std::move(agent_id), Kind::Scripted), policy_(policy) {
        if (!(policy.self_weight > 0.0 && policy.self_weight <= 1.0))
            throw std::invalid_argument("self_weight must be in (0, 1]");
    }

    std::string decide(const prompts::PromptBundle&, const json& context) override {
        const std::string decision = context.at("decision").get<std::string>();
        if (decision == "guess") return decide_guess(context);
        if (decision == "link") return decide_link(context);
        throw std::invalid_argument("BayesianUrnAgent: unsupported decision " + decision);
    }

    double posterior_a(char own_draw, const std::vector<char>& observed) const {
        return detail::urn_posterior_a(own_draw, observed, policy_.self_weight);
    }

  private:
    std::string decide_guess(const json& context) const {
        const char own = context.at("own_draw").get<std::string>().at(0);
        std::vector<char> observed;
        for (const auto& g : context.at("visible_guesses"))
            observed.push_back(g.get<std::string>().at(0));
        const char guess = detail::urn_guess(own, observed, policy_.self_weight);
        const double pa = posterior_a(own, observed);
        char reason[128];
        std::snprintf(reason, sizeof(reason),
                      "My posterior probability of urn A is %.4f given my draw and %zu "
                      "observed guesses.",
                      pa, observed.size());
        return prompts::format_templated_response(reason, std::string(1, guess));
    }

    // Linking to the target is modeled as revealing the guesses of every
    // position up to the target (the zero-cost chain makes that set visible).
    std::string decide_link(const json& context) const {
        const int position = context.at("position").get<int>();
        const int target = context.at("target_position").get<int>();
        const int cost = context.at("cost").get<int>();
        const int visible_up_to = context.at("already_visible_up_to").get<int>();
        bool form = false;
        if (target > visible_up_to) {
            if (cost == 0) {
                // free information: take the immediate predecessor, which
                // already reveals the whole visible chain
                form = target == position - 1;
            } else {
                const double gain =
                    100.0 * (detail::expected_urn_accuracy(target, policy_.self_weight) -
                             detail::expected_urn_accuracy(visible_up_to,
                                                           policy_.self_weight));
                form = gain > double(cost);
            }
        }
        return prompts::format_templated_response(
            form ? "The expected point gain from observing earlier guesses exceeds the cost."
                 : "The expected point gain from this link does not justify its cost.",
            form ? "Yes" : "No");
    }

    BayesianUrnPolicy policy_;
};

inline AgentPtr scripted_bayesian_urn_agent(BayesianUrnPolicy policy,
                                            std::string agent_id = "bayes_urn") {
    return std::make_unique<BayesianUrnAgent>(policy, std::move(agent_id));
}

// ---------------------------------------------------------------------------
// Simple scripted policies

// Always answers the option at the given index of the presented option set.
class FixedOptionAgent final : public AgentBackend {
  public:
    explicit FixedOptionAgent(std::size_t option_index, std::string agent_id = "fixed")
        : AgentBackend(std::move(agent_id), Kind::Scripted), index_(option_index) {}

    std::string decide(const prompts::PromptBundle& bundle, const json&) override {
        return prompts::format_templated_response("I always pick this option.",
                                                  bundle.option_set.at(index_));
    }

  private:
    std::size_t index_;
};

// Transfer-game receiver returning floor(received / 2).
class FairSplitAgent final : public AgentBackend {
  public:
    explicit FairSplitAgent(std::string agent_id = "fair_split")
        : AgentBackend(std::move(agent_id), Kind::Scripted) {}

    std::string decide(const prompts::PromptBundle&, const json& context) override {
        const int received = context.at("received").get<int>();
        return prompts::format_templated_response(
            "Returning half of what I received keeps the outcome fair.",
            std::to_string(received / 2));
    }
};

// Transfer-game receiver keeping everything.
class SelfishTransferAgent final : public AgentBackend {
  public:
    explicit SelfishTransferAgent(std::string agent_id = "selfish")
        : AgentBackend(std::move(agent_id), Kind::Scripted) {}

    std::string decide(const prompts::PromptBundle&, const json&) override {
        return prompts::format_templated_response(
            "Returned points are not tripled, so keeping them maximizes my payoff.", "0");
    }
};

// Image-game donor: give iff the receiver's image score is at least the
// threshold.
class ScoreThresholdDonorAgent final : public AgentBackend {
  public:
    explicit ScoreThresholdDonorAgent(int min_score, std::string agent_id = "threshold_donor")
        : AgentBackend(std::move(agent_id), Kind::Scripted), min_score_(min_score) {}

    std::string decide(const prompts::PromptBundle&, const json& context) override {
        const int score = context.at("receiver_gave").get<int>() -
                          context.at("receiver_withheld").get<int>();
        const bool give = score >= min_score_;
        return prompts::format_templated_response(
            give ? "The receiver's giving record earns my donation."
                 : "The receiver's record does not justify the cost.",
            give ? "Give" : "Withhold");
    }

  private:
    int min_score_;
};

// Uniform random choice over the presented options; used for bookkeeping
// property tests.
class RandomOptionAgent final : public AgentBackend {
  public:
    explicit RandomOptionAgent(std::uint64_t seed, std::string agent_id = "random")
        : AgentBackend(std::move(agent_id), Kind::Scripted), rng_(seed) {}

    std::string decide(const prompts::PromptBundle& bundle, const json& context) override {
        if (context.contains("decision") && context["decision"] == "return") {
            const int received = context.at("received").get<int>();
            return prompts::format_templated_response(
                "Picking an arbitrary return.",
                std::to_string(int(rng_.below(std::uint64_t(received) + 1))));
        }
        const auto& opts = bundle.option_set;
        return prompts::format_templated_response("Picking at random.",
                                                  opts.at(rng_.below(opts.size())));
    }

  private:
    Rng rng_;
};

// ---------------------------------------------------------------------------
// Remote LLM agent: accumulates the session conversation so multi-round games
// reuse one dialog.

class RemoteLlmAgent final : public AgentBackend {
  public:
    RemoteLlmAgent(std::shared_ptr<llm::ChatClient> client, std::string agent_id = "remote")
        : AgentBackend(std::move(agent_id), Kind::Remote), client_(std::move(client)) {}

    std::string decide(const prompts::PromptBundle& bundle, const json&) override {
        user_turns_.push_back(bundle.user_text);
        std::string response =
            client_->chat(bundle.system_text, user_turns_, assistant_turns_);
        assistant_turns_.push_back(response);
        return response;
    }

  private:
    std::shared_ptr<llm::ChatClient> client_;
    std::vector<std::string> user_turns_;
    std::vector<std::string> assistant_turns_;
};

inline AgentPtr remote_llm_agent(std::shared_ptr<llm::ChatClient> client,
                                 std::string agent_id = "remote") {
    return std::make_unique<RemoteLlmAgent>(std::move(client), std::move(agent_id));
}

}  // namespace econlab::agents
