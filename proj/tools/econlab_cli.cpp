// Command-line entry point: run experiments from configs, fit models on
// transcripts or the built-in fixtures, compute metrics, and dump fixtures.
//
// Exit codes: 0 success, 2 config error, 3 backend error, 4 estimation error.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "econlab/agents.hpp"
#include "econlab/analysis.hpp"
#include "econlab/core.hpp"
#include "econlab/estimation.hpp"
#include "econlab/fixtures.hpp"
#include "econlab/game_indirect_reciprocity.hpp"
#include "econlab/game_social_learning.hpp"
#include "econlab/game_social_preference.hpp"
#include "econlab/llm_client.hpp"
#include "econlab/prompts.hpp"
#include "econlab/storage.hpp"

namespace {

using namespace econlab;

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitEstimation = 4;

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out_dir;
    std::optional<double> temperature;
    std::optional<int> replicates;
    bool dry_run = false;
    int parallel = 1;
};

json overrides_json(const Overrides& o) {
    json j = json::object();
    if (o.seed) j["seed"] = *o.seed;
    if (o.out_dir) j["out_dir"] = *o.out_dir;
    if (o.temperature) j["temperature"] = *o.temperature;
    if (o.replicates) j["replicates"] = *o.replicates;
    if (o.dry_run) j["dry_run"] = true;
    return j;
}

prompts::TemplateSet resolve_templates(const std::string& version) {
    if (version == "v1") return prompts::default_templates();
#ifdef ECONLAB_TEMPLATES_DIR
    const std::filesystem::path dir = ECONLAB_TEMPLATES_DIR;
    if (std::filesystem::is_directory(dir)) {
        auto set = prompts::load_templates(dir);
        if (set.version == version) return set;
    }
#endif
    throw storage::DomainViolationError("unknown template_version: " + version);
}

// Builds one agent per (config, index) according to the agent spec.
agents::AgentFactory make_agent_factory(const storage::ExperimentConfig& config,
                                        const Overrides& ov) {
    const json& spec = config.agent;
    const std::string kind = spec.value("kind", "scripted");
    const std::uint64_t seed = ov.seed.value_or(config.seed);
    if (kind == "remote") {
        llm::ModelConfig mc;
        if (spec.contains("base_url")) mc.base_url = spec["base_url"].get<std::string>();
        if (spec.contains("model_name"))
            mc.model_name = spec["model_name"].get<std::string>();
        if (spec.contains("temperature")) mc.temperature = spec["temperature"].get<double>();
        if (ov.temperature) mc.temperature = *ov.temperature;
        if (spec.contains("max_in_flight"))
            mc.max_in_flight = spec["max_in_flight"].get<int>();
        llm::validate(mc);
        auto client = std::make_shared<llm::ChatClient>(mc);
        return [client](int index) {
            return agents::remote_llm_agent(client, "remote" + std::to_string(index));
        };
    }
    if (kind != "scripted")
        throw storage::DomainViolationError("agent.kind must be scripted or remote");
    const std::string policy = spec.value("policy", "cr_logit");
    if (policy == "cr_logit") {
        agents::CRLogitPolicy p;
        p.rho = spec.value("rho", 0.4);
        p.sigma = spec.value("sigma", -0.1);
        p.gamma = spec.value("gamma", 0.01);
        return [p, seed](int index) mutable {
            auto policy_i = p;
            policy_i.rng_seed = Rng(seed).fork(std::uint64_t(index)).next_u64();
            return agents::scripted_cr_agent(policy_i);
        };
    }
    if (policy == "bayes_urn") {
        agents::BayesianUrnPolicy p;
        p.self_weight = spec.value("self_weight", 1.0);
        return [p](int) { return agents::scripted_bayesian_urn_agent(p); };
    }
    if (policy == "fair_split")
        return [](int) { return std::make_unique<agents::FairSplitAgent>(); };
    if (policy == "selfish")
        return [](int) { return std::make_unique<agents::SelfishTransferAgent>(); };
    if (policy == "score_threshold") {
        const int threshold = spec.value("min_score", 0);
        return [threshold](int) {
            return std::make_unique<agents::ScoreThresholdDonorAgent>(threshold);
        };
    }
    if (policy == "random") {
        return [seed](int index) {
            return std::make_unique<agents::RandomOptionAgent>(
                Rng(seed).fork(900 + std::uint64_t(index)).next_u64());
        };
    }
    throw storage::DomainViolationError("unknown scripted policy: " + policy);
}

// ---------------------------------------------------------------------------
// run

std::vector<SessionRecord> run_social_learning(const storage::ExperimentConfig& config,
                                               const agents::AgentFactory& factory,
                                               const prompts::TemplateSet& templates,
                                               std::uint64_t seed, int replicates) {
    const int cost = config.condition.value("cost", 0);
    std::vector<SessionRecord> records;
    Rng root(seed);
    for (int rep = 0; rep < replicates; ++rep) {
        std::vector<agents::AgentPtr> players;
        std::vector<agents::AgentBackend*> raw;
        for (int i = 0; i < 4; ++i) {
            players.push_back(factory(rep * 4 + i));
            raw.push_back(players.back().get());
        }
        auto result = social_learning::run_urn_session(
            raw, cost, root.fork(std::uint64_t(rep)).next_u64(), templates,
            "urn/" + std::to_string(rep));
        records.push_back(std::move(result.record));
        std::fprintf(stderr, "\rsession %d/%d", rep + 1, replicates);
    }
    std::fprintf(stderr, "\n");
    return records;
}

std::vector<SessionRecord> run_social_preference(const storage::ExperimentConfig& config,
                                                 const agents::AgentFactory& factory,
                                                 const prompts::TemplateSet& templates,
                                                 std::uint64_t seed, int replicates) {
    const auto condition =
        group_condition_from_string(config.condition.value("group_condition", "no_group"));
    auto battery = social_preference::run_preference_battery(
        factory, fixtures::builtin_game_fixtures(), condition, replicates, seed, templates);
    std::fprintf(stderr, "battery: %zu sessions, %d invalid\n", battery.sessions.size(),
                 battery.invalid_count);
    return battery.sessions;
}

std::vector<SessionRecord> run_upstream(const storage::ExperimentConfig& config,
                                        const agents::AgentFactory& factory,
                                        const prompts::TemplateSet& templates,
                                        std::uint64_t seed, int replicates) {
    const auto mode = config.condition.value("mode", "indirect") == "direct"
                          ? indirect_reciprocity::TransferMode::Direct
                          : indirect_reciprocity::TransferMode::Indirect;
    std::vector<SessionRecord> records;
    Rng root(seed);
    for (int rep = 0; rep < replicates; ++rep) {
        auto b = factory(rep * 2);
        auto bp = factory(rep * 2 + 1);
        indirect_reciprocity::TransferAgents ta{b.get(), bp.get()};
        auto result = indirect_reciprocity::run_transfer_session(
            ta, mode, root.fork(std::uint64_t(rep)).next_u64(), templates, std::nullopt,
            "transfer/" + std::to_string(rep));
        records.push_back(std::move(result.record));
        std::fprintf(stderr, "\rsession %d/%d", rep + 1, replicates);
    }
    std::fprintf(stderr, "\n");
    return records;
}

std::vector<SessionRecord> run_downstream(const storage::ExperimentConfig& config,
                                          const agents::AgentFactory& factory,
                                          const prompts::TemplateSet& templates,
                                          std::uint64_t seed, int replicates) {
    const int endowment = config.condition.value("endowment", 7);
    const int cost = config.condition.value("cost", 2);
    std::vector<SessionRecord> records;
    Rng root(seed);
    for (int rep = 0; rep < replicates; ++rep) {
        std::vector<agents::AgentPtr> players;
        for (int i = 0; i < 10; ++i) players.push_back(factory(rep * 10 + i));
        auto result = indirect_reciprocity::run_image_game(
            players, endowment, cost, root.fork(std::uint64_t(rep)).next_u64(), templates,
            "image/" + std::to_string(rep));
        records.push_back(std::move(result.record));
        std::fprintf(stderr, "\rsession %d/%d", rep + 1, replicates);
    }
    std::fprintf(stderr, "\n");
    return records;
}

std::string first_prompt_preview(const storage::ExperimentConfig& config,
                                 const prompts::TemplateSet& templates) {
    switch (config.experiment) {
        case ExperimentKind::SocialPreference: {
            const auto condition = group_condition_from_string(
                config.condition.value("group_condition", "no_group"));
            return social_preference::preference_prompt(
                       templates, fixtures::builtin_game_fixtures().front(), condition)
                .user_text;
        }
        case ExperimentKind::SocialLearning:
            return prompts::render(
                templates.get("urn_guess"),
                {{"position", "1"}, {"draw", "A"}, {"observations", ""}});
        case ExperimentKind::Upstream:
            return prompts::render(templates.get("transfer_return"),
                                   {{"role", "B"},
                                    {"sender", "A"},
                                    {"relation", "forward to you"},
                                    {"received", "15"},
                                    {"beneficiary", "A'"}});
        case ExperimentKind::Downstream:
            return prompts::render(templates.get("image_donor"),
                                   {{"balance", "7"},
                                    {"currency", "Swiss Francs"},
                                    {"gave", "0"},
                                    {"withheld", "0"},
                                    {"cost", "2"},
                                    {"benefit", "4"}});
    }
    return "";
}

int cmd_run(const std::string& config_path, const Overrides& ov) {
    storage::ExperimentConfig config;
    prompts::TemplateSet templates;
    try {
        config = storage::load_config(config_path);
        if (ov.replicates) config.replicates = *ov.replicates;
        if (ov.seed) config.seed = *ov.seed;
        if (ov.out_dir) config.out_dir = *ov.out_dir;
        templates = resolve_templates(config.template_version);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    }

    if (ov.dry_run) {
        std::printf("config ok: experiment=%s replicates=%d seed=%llu\n",
                    to_string(config.experiment).c_str(), config.replicates,
                    static_cast<unsigned long long>(config.seed));
        std::printf("first prompt:\n%s\n",
                    first_prompt_preview(config, templates).c_str());
        return kExitOk;
    }

    const std::string started = rfc3339_now();
    std::vector<SessionRecord> records;
    try {
        auto factory = make_agent_factory(config, ov);
        switch (config.experiment) {
            case ExperimentKind::SocialLearning:
                records = run_social_learning(config, factory, templates, config.seed,
                                              config.replicates);
                break;
            case ExperimentKind::SocialPreference:
                records = run_social_preference(config, factory, templates, config.seed,
                                                config.replicates);
                break;
            case ExperimentKind::Upstream:
                records = run_upstream(config, factory, templates, config.seed,
                                       config.replicates);
                break;
            case ExperimentKind::Downstream:
                records = run_downstream(config, factory, templates, config.seed,
                                         config.replicates);
                break;
        }
    } catch (const storage::DomainViolationError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "backend error: %s\n", e.what());
        return kExitBackend;
    }

    try {
        std::filesystem::create_directories(config.out_dir);
        const auto transcript_path =
            std::filesystem::path(config.out_dir) / "transcripts.jsonl";
        const int written = storage::write_transcripts(records, transcript_path);
        storage::write_manifest(config, overrides_json(ov), started, rfc3339_now(),
                                std::filesystem::path(config.out_dir) / "manifest.json");
        int invalid = 0;
        for (const auto& r : records)
            if (!r.valid()) ++invalid;
        std::printf("experiment=%s sessions=%d invalid=%d transcripts=%s\n",
                    to_string(config.experiment).c_str(), written, invalid,
                    transcript_path.c_str());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "io error: %s\n", e.what());
        return kExitBackend;
    }
    return kExitOk;
}

// ---------------------------------------------------------------------------
// estimate

std::vector<social_preference::PreferenceObservation> observations_from_records(
    const std::vector<SessionRecord>& records) {
    std::vector<social_preference::PreferenceObservation> out;
    for (const auto& rec : records) {
        if (rec.experiment != ExperimentKind::SocialPreference || !rec.valid()) continue;
        const auto game = fixtures::game_by_id(rec.condition.at("game_id"));
        const auto condition = group_condition_from_string(
            rec.condition.at("group_condition").get<std::string>());
        for (const auto& event : rec.events) {
            if (event.parsed_choice != "B1" && event.parsed_choice != "B2") continue;
            out.push_back({game.game_id, condition,
                           binary_choice_from_string(event.parsed_choice), game,
                           event.reason_text});
        }
    }
    return out;
}

estimation::PreferenceDataset dataset_from_source(const std::string& source,
                                                  const std::vector<GroupCondition>& conds) {
    if (source == "table2") return fixtures::reconstruct_dataset(conds);
    auto records = storage::read_transcripts(source);
    auto observations = observations_from_records(records);
    std::vector<social_preference::PreferenceObservation> kept;
    for (const auto& obs : observations)
        if (std::find(conds.begin(), conds.end(), obs.condition) != conds.end())
            kept.push_back(obs);
    return social_preference::to_dataset(kept);
}

void print_estimate_row(const std::string& name, double value, double se) {
    std::printf("%-12s %10.4f  (se %.4f)\n", name.c_str(), value, se);
}

int cmd_estimate(const std::string& source, const std::string& model,
                 const std::string& out_dir) {
    try {
        std::filesystem::create_directories(out_dir);
        if (model == "cr") {
            auto data = dataset_from_source(source, {GroupCondition::NoGroup});
            auto est = estimation::fit_cr(data);
            print_estimate_row("rho", est.rho, est.std_errors[0]);
            print_estimate_row("sigma", est.sigma, est.std_errors[1]);
            print_estimate_row("gamma", est.gamma, est.std_errors[2]);
            std::printf("loglik       %10.4f  n=%zu converged=%d\n", est.loglik,
                        data.rows.size(), est.converged ? 1 : 0);
            std::string csv = "parameter,estimate,std_error\n";
            char buf[128];
            std::snprintf(buf, sizeof(buf), "rho,%.6f,%.6f\nsigma,%.6f,%.6f\ngamma,%.6f,%.6f\nloglik,%.6f,\n",
                          est.rho, est.std_errors[0], est.sigma, est.std_errors[1],
                          est.gamma, est.std_errors[2], est.loglik);
            storage::write_text_file(csv + buf,
                                     std::filesystem::path(out_dir) / "estimate_cr.csv");
            return kExitOk;
        }
        if (model == "cr_group") {
            auto data = dataset_from_source(
                source, {GroupCondition::Ingroup, GroupCondition::Outgroup});
            auto est = estimation::fit_cr_group(data);
            print_estimate_row("rho_out", est.rho_out, est.std_errors[0]);
            print_estimate_row("sigma_out", est.sigma_out, est.std_errors[1]);
            print_estimate_row("rho_in", est.rho_in, est.std_errors[2]);
            print_estimate_row("sigma_in", est.sigma_in, est.std_errors[3]);
            print_estimate_row("gamma", est.gamma, est.std_errors[4]);
            std::printf("a            %10.4f\nb            %10.4f\n", est.a, est.b);
            std::printf("loglik       %10.4f  n=%zu converged=%d\n", est.loglik,
                        data.rows.size(), est.converged ? 1 : 0);
            char buf[256];
            std::snprintf(buf, sizeof(buf),
                          "parameter,estimate,std_error\nrho_out,%.6f,%.6f\nsigma_out,%.6f,%.6f\n"
                          "rho_in,%.6f,%.6f\nsigma_in,%.6f,%.6f\ngamma,%.6f,%.6f\n"
                          "a,%.6f,\nb,%.6f,\nloglik,%.6f,\n",
                          est.rho_out, est.std_errors[0], est.sigma_out, est.std_errors[1],
                          est.rho_in, est.std_errors[2], est.sigma_in, est.std_errors[3],
                          est.gamma, est.std_errors[4], est.a, est.b, est.loglik);
            storage::write_text_file(
                buf, std::filesystem::path(out_dir) / "estimate_cr_group.csv");
            return kExitOk;
        }
        if (model == "pos_recip" || model == "neg_recip") {
            std::vector<social_preference::PreferenceObservation> observations;
            if (source == "table2") {
                auto dataset = fixtures::reconstruct_dataset(
                    {GroupCondition::NoGroup, GroupCondition::Ingroup,
                     GroupCondition::Outgroup});
                for (const auto& row : dataset.rows)
                    observations.push_back({row.game_id, row.condition, row.choice,
                                            fixtures::game_by_id(row.game_id), ""});
            } else {
                observations =
                    observations_from_records(storage::read_transcripts(source));
            }
            auto data = social_preference::to_dataset(observations);
            const auto& games = fixtures::builtin_game_fixtures();
            auto bundle = model == "pos_recip"
                              ? estimation::build_positive_reciprocity_design(data, games)
                              : estimation::build_negative_reciprocity_design(data, games);
            auto fit = estimation::fit_logit_regression(bundle.design, bundle.names,
                                                        bundle.outcomes);
            std::string csv = "coefficient,estimate,std_error,separation_flag\n";
            for (std::size_t i = 0; i < fit.coefficients.size(); ++i) {
                std::printf("%-24s %10.4f  (se %.4f)%s\n", fit.names[i].c_str(),
                            fit.coefficients[i], fit.std_errors[i],
                            fit.separation_flags[i] ? "  [separation]" : "");
                char buf[160];
                std::snprintf(buf, sizeof(buf), "%s,%.6f,%.6f,%d\n", fit.names[i].c_str(),
                              fit.coefficients[i], fit.std_errors[i],
                              fit.separation_flags[i] ? 1 : 0);
                csv += buf;
            }
            std::printf("loglik %.4f  aic %.4f  n=%d\n", fit.loglik, fit.aic, fit.n_obs);
            storage::write_text_file(
                csv, std::filesystem::path(out_dir) / ("estimate_" + model + ".csv"));
            return kExitOk;
        }
        std::fprintf(stderr, "unknown model: %s\n", model.c_str());
        return kExitConfig;
    } catch (const estimation::DegenerateDatasetError& e) {
        std::fprintf(stderr, "estimation error (degenerate dataset): %s\n", e.what());
        return kExitEstimation;
    } catch (const estimation::NonConvergenceError& e) {
        std::fprintf(stderr, "estimation error (non-convergence): %s\n", e.what());
        return kExitEstimation;
    } catch (const estimation::RankDeficientDesignError& e) {
        std::fprintf(stderr, "estimation error (rank-deficient design): %s\n", e.what());
        return kExitEstimation;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}

// ---------------------------------------------------------------------------
// analyze

int cmd_analyze(const std::string& transcripts, const std::string& what,
                const std::string& out_dir) {
    try {
        std::filesystem::create_directories(out_dir);
        auto records = storage::read_transcripts(transcripts);
        if (what == "learning_metrics") {
            auto metrics = social_learning::learning_metrics(records);
            storage::write_text_file(social_learning::accuracy_csv(metrics),
                                     std::filesystem::path(out_dir) / "accuracy.csv");
            storage::write_text_file(social_learning::link_matrix_csv(metrics),
                                     std::filesystem::path(out_dir) / "links.csv");
            storage::write_text_file(social_learning::decision_rule_csv(metrics),
                                     std::filesystem::path(out_dir) / "decision_rule.csv");
            std::printf("sessions=%d mean_earnings=%.2f total_links=%d\n",
                        metrics.n_sessions, metrics.mean_earnings, metrics.total_links);
            for (int p = 0; p < 4; ++p)
                std::printf("position %d accuracy %.4f (se %.4f, n=%d)\n", p + 1,
                            metrics.accuracy[p], metrics.accuracy_se[p],
                            metrics.n_by_position[p]);
            return kExitOk;
        }
        if (what == "image_metrics") {
            std::vector<indirect_reciprocity::DonationObservation> observations;
            for (const auto& rec : records) {
                if (rec.experiment != ExperimentKind::Downstream || !rec.valid()) continue;
                for (const auto& o : rec.condition.at("outcome").at("observations")) {
                    indirect_reciprocity::DonationObservation obs;
                    obs.receiver_gave = o.at("gave").get<int>();
                    obs.receiver_withheld = o.at("withheld").get<int>();
                    obs.donor_cost = o.at("cost").get<int>();
                    obs.endowment = o.at("endowment").get<int>();
                    obs.gave = o.at("give").get<bool>();
                    observations.push_back(obs);
                }
            }
            auto metrics = indirect_reciprocity::image_metrics(observations);
            storage::write_text_file(indirect_reciprocity::image_metrics_csv(metrics),
                                     std::filesystem::path(out_dir) / "image_metrics.csv");
            for (const auto& [score, cell] : metrics.by_score)
                std::printf("score %+d donation rate %.4f (n=%d)\n", score, cell.rate(),
                            cell.n);
            return kExitOk;
        }
        if (what == "swm") {
            auto observations = observations_from_records(records);
            auto rate = social_preference::swm_rate(observations);
            std::printf("swm_rate %.4f (se %.4f, n=%d)\n", rate.rate, rate.std_error,
                        rate.n);
            char buf[96];
            std::snprintf(buf, sizeof(buf), "swm_rate,std_error,n\n%.6f,%.6f,%d\n",
                          rate.rate, rate.std_error, rate.n);
            storage::write_text_file(buf, std::filesystem::path(out_dir) / "swm.csv");
            return kExitOk;
        }
        if (what == "reciprocity_contrast") {
            auto observations = observations_from_records(records);
            auto contrasts = social_preference::reciprocity_contrast(
                social_preference::builtin_contrast_triples(), observations,
                fixtures::builtin_game_fixtures());
            std::string csv =
                "dictator_id,dictator_b1,good_intention_id,good_b1,misbehave_id,misbehave_b1\n";
            for (const auto& c : contrasts) {
                std::printf("%s %.3f | %s %.3f | %s %.3f\n", c.triple.dictator_id.c_str(),
                            c.dictator.rate, c.triple.good_intention_id.c_str(),
                            c.good_intention.rate, c.triple.misbehave_id.c_str(),
                            c.misbehave.rate);
                char buf[192];
                std::snprintf(buf, sizeof(buf), "%s,%.6f,%s,%.6f,%s,%.6f\n",
                              c.triple.dictator_id.c_str(), c.dictator.rate,
                              c.triple.good_intention_id.c_str(), c.good_intention.rate,
                              c.triple.misbehave_id.c_str(), c.misbehave.rate);
                csv += buf;
            }
            storage::write_text_file(csv, std::filesystem::path(out_dir) /
                                              "reciprocity_contrast.csv");
            return kExitOk;
        }
        if (what == "motivations") {
            std::vector<analysis::ReasonRef> reasons;
            bool upstream = false;
            for (const auto& rec : records) {
                if (!rec.valid()) continue;
                if (rec.experiment == ExperimentKind::Upstream) upstream = true;
                for (std::size_t i = 0; i < rec.events.size(); ++i)
                    if (!rec.events[i].reason_text.empty())
                        reasons.push_back({rec.session_id, int(i), rec.events[i].reason_text});
            }
            auto tax = analysis::taxonomy(upstream ? analysis::TaxonomyId::Upstream
                                                   : analysis::TaxonomyId::SocialLearning);
            auto labelings = analysis::classify_motivations(
                reasons, tax, analysis::ClassifierKind::Keyword);
            auto dist = analysis::motivation_distribution(labelings, tax);
            storage::write_text_file(analysis::labelings_csv(labelings),
                                     std::filesystem::path(out_dir) / "labelings.csv");
            storage::write_text_file(analysis::distribution_csv(dist),
                                     std::filesystem::path(out_dir) / "motivations.csv");
            for (const auto& [letter, freq] : dist.frequency)
                std::printf("%c %.4f\n", letter, freq);
            return kExitOk;
        }
        std::fprintf(stderr, "unknown analysis: %s\n", what.c_str());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}

// ---------------------------------------------------------------------------
// fixtures

int cmd_fixtures(const std::string& what, const std::string& out_dir) {
    try {
        std::filesystem::create_directories(out_dir);
        if (what == "games") {
            std::string csv = "game_id,kind,pi_a_a1,pi_b_a1,pi_a_b1,pi_b_b1,pi_a_b2,pi_b_b2\n";
            for (const auto& g : fixtures::builtin_game_fixtures()) {
                csv += g.game_id + "," + to_string(g.kind) + ",";
                if (g.payoff_a1)
                    csv += std::to_string(g.payoff_a1->a) + "," +
                           std::to_string(g.payoff_a1->b);
                else
                    csv += ",";
                csv += "," + std::to_string(g.payoff_b1.a) + "," +
                       std::to_string(g.payoff_b1.b) + "," + std::to_string(g.payoff_b2.a) +
                       "," + std::to_string(g.payoff_b2.b) + "\n";
            }
            std::fputs(csv.c_str(), stdout);
            storage::write_text_file(csv, std::filesystem::path(out_dir) / "games.csv");
            return kExitOk;
        }
        if (what == "rates") {
            std::string csv = "game_id,condition,b1_rate\n";
            for (const auto& g : fixtures::builtin_game_fixtures()) {
                for (auto cond : {GroupCondition::NoGroup, GroupCondition::Ingroup,
                                  GroupCondition::Outgroup}) {
                    char buf[96];
                    std::snprintf(buf, sizeof(buf), "%s,%s,%.6f\n", g.game_id.c_str(),
                                  to_string(cond).c_str(),
                                  fixtures::observed_b1_rate(g.game_id, cond));
                    csv += buf;
                }
            }
            std::fputs(csv.c_str(), stdout);
            storage::write_text_file(csv, std::filesystem::path(out_dir) / "rates.csv");
            return kExitOk;
        }
        if (what == "reconstructed") {
            auto data = fixtures::reconstruct_dataset(
                {GroupCondition::NoGroup, GroupCondition::Ingroup,
                 GroupCondition::Outgroup});
            std::string csv = "game_id,condition,choice\n";
            for (const auto& row : data.rows)
                csv += row.game_id + "," + to_string(row.condition) + "," +
                       to_string(row.choice) + "\n";
            std::printf("%zu rows\n", data.rows.size());
            storage::write_text_file(csv,
                                     std::filesystem::path(out_dir) / "reconstructed.csv");
            return kExitOk;
        }
        std::fprintf(stderr, "unknown fixture set: %s\n", what.c_str());
        return kExitConfig;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitConfig;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"behavioral experiment harness for scripted and LLM agents"};
    app.require_subcommand(1);

    Overrides ov;
    std::string config_path, out_dir = "out";
    std::string source, model, transcripts, what;

    auto* run = app.add_subcommand("run", "run a configured experiment");
    run->add_option("--config", config_path, "experiment config JSON")->required();
    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--out-dir", out_dir, "output directory");
        cmd->add_option("--parallel", ov.parallel, "concurrent session bound");
    };
    run->add_option("--seed", ov.seed, "seed override");
    run->add_option("--temperature", ov.temperature, "temperature override");
    run->add_option("--replicates", ov.replicates, "replicates override");
    run->add_flag("--dry-run", ov.dry_run, "validate config and print the first prompt");
    add_common(run);

    auto* estimate = app.add_subcommand("estimate", "fit a model");
    estimate->add_option("source", source, "transcripts path or 'table2'")->required();
    estimate->add_option("model", model, "cr | cr_group | pos_recip | neg_recip")
        ->required();
    add_common(estimate);

    auto* analyze = app.add_subcommand("analyze", "compute metrics from transcripts");
    analyze->add_option("transcripts", transcripts, "transcripts JSONL path")->required();
    analyze
        ->add_option("what", what,
                     "learning_metrics | image_metrics | swm | reciprocity_contrast | "
                     "motivations")
        ->required();
    add_common(analyze);

    auto* fixtures_cmd = app.add_subcommand("fixtures", "print built-in fixtures");
    fixtures_cmd->add_option("what", what, "games | rates | reconstructed")->required();
    add_common(fixtures_cmd);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (run->parsed()) {
        if (run->count("--out-dir")) ov.out_dir = out_dir;
        return cmd_run(config_path, ov);
    }
    if (estimate->parsed()) return cmd_estimate(source, model, out_dir);
    if (analyze->parsed()) return cmd_analyze(transcripts, what, out_dir);
    return cmd_fixtures(what, out_dir);
}
