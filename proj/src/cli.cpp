#include "plantwin/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "plantwin/adversary.hpp"
#include "plantwin/corpus.hpp"
#include "plantwin/io.hpp"
#include "plantwin/metrics.hpp"
#include "plantwin/orchestrator.hpp"
#include "plantwin/planner.hpp"
#include "plantwin/rng.hpp"

namespace plantwin {

namespace {

namespace fs = std::filesystem;

std::vector<RawArtifact> read_directory_env(const std::string& dir) {
    std::vector<RawArtifact> env;
    fs::path root(dir);
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (!entry.is_regular_file()) continue;
        RawArtifact artifact;
        artifact.path = fs::relative(entry.path(), root).generic_string();
        artifact.bytes = read_file(entry.path().string());
        auto mtime = fs::last_write_time(entry.path());
        artifact.mtime = std::chrono::duration_cast<std::chrono::seconds>(
                             mtime.time_since_epoch())
                             .count();
        env.push_back(std::move(artifact));
    }
    return env;
}

FieldSet parse_field_list(const std::string& csv) {
    FieldSet fields;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        auto colon = item.find(':');
        std::string head = colon == std::string::npos ? item : item.substr(0, colon);
        std::string qualifier = colon == std::string::npos ? "" : item.substr(colon + 1);
        if (head == "kind") fields.insert(FieldId::scalar(FieldKey::kind));
        else if (head == "semantic_class") fields.insert(FieldId::scalar(FieldKey::semantic_class));
        else if (head == "sensitivity") fields.insert(FieldId::scalar(FieldKey::sensitivity));
        else if (head == "freshness") fields.insert(FieldId::scalar(FieldKey::freshness));
        else if (head == "size_bucket") fields.insert(FieldId::scalar(FieldKey::size_bucket));
        else if (head == "contains" && !qualifier.empty()) fields.insert(FieldId::contains(qualifier));
        else if (head == "usable_for" && !qualifier.empty()) fields.insert(FieldId::usable(qualifier));
        else if (head == "contains") {
            for (const auto& tag : vocab::contains_tags()) fields.insert(FieldId::contains(tag));
        } else {
            throw CLI::ValidationError("--fields", "unknown field " + item);
        }
    }
    return fields;
}

RunSettings make_settings(double alpha, std::uint64_t seed, const std::string& approval,
                          bool disclose_edges, int rate_limit, int repetitions) {
    RunSettings settings;
    settings.policy.alpha = alpha;
    settings.policy.disclose_edges = disclose_edges;
    settings.policy.rate_limit = rate_limit;
    if (approval == "auto_approve") settings.policy.approval_mode = ApprovalMode::auto_approve;
    else if (approval == "auto_deny") settings.policy.approval_mode = ApprovalMode::auto_deny;
    else settings.policy.approval_mode = ApprovalMode::interactive;
    settings.seed = seed;
    settings.repetitions = repetitions;
    if (settings.policy.approval_mode == ApprovalMode::interactive) {
        settings.approval_hook = [](const PlanStep& step, const Capability& cap) {
            std::cout << "approve " << cap.name << " on";
            for (const auto& id : step.inputs) std::cout << " " << id;
            std::cout << "? [y/N] " << std::flush;
            std::string line;
            std::getline(std::cin, line);
            return !line.empty() && (line[0] == 'y' || line[0] == 'Y');
        };
    }
    return settings;
}

void write_session_outputs(const SessionReport& report, const std::string& out_dir) {
    atomic_write_file(out_dir + "/report.json", report.to_json().dump(2) + "\n");
    atomic_write_file(out_dir + "/report.tsv", report.metrics.to_tsv());
    std::string audit;
    for (const auto& line : report.audit_lines) audit += line + "\n";
    atomic_write_file(out_dir + "/audit.jsonl", audit);
    std::string events;
    for (const auto& line : report.budget_event_lines) events += line + "\n";
    atomic_write_file(out_dir + "/budget_events.jsonl", events);
    if (!report.budget_state.empty())
        atomic_write_file(out_dir + "/budget.json", report.budget_state + "\n");
}

int cmd_budget_report(const std::string& run_dir) {
    nlohmann::json state = nlohmann::json::parse(read_file(run_dir + "/budget.json"));
    std::cout << "profile=" << state.at("profile").get<std::string>()
              << " alpha=" << state.at("alpha").get<double>() << "\n";
    std::cout << std::left << std::setw(24) << "object" << std::right << std::setw(12) << "spent"
              << std::setw(12) << "cap" << std::setw(10) << "used%" << std::setw(10) << "fields"
              << "\n";
    for (const auto& obj : state.at("objects")) {
        double spent = obj.at("spent_micro").get<double>() / kMicro;
        double cap = obj.at("cap_micro").get<double>() / kMicro;
        std::string key = obj.at("key").get<std::string>();
        if (key.size() > 22) key = key.substr(0, 22);
        std::cout << std::left << std::setw(24) << key << std::right << std::fixed
                  << std::setprecision(2) << std::setw(12) << spent << std::setw(12) << cap
                  << std::setw(9) << (cap > 0 ? 100.0 * spent / cap : 0.0) << "%" << std::setw(10)
                  << obj.at("disclosed").size() << "\n";
    }
    return 0;
}

}  // namespace

int run_command(const std::vector<std::string>& args) {
    CLI::App app{"privacy-preserving planning middleware"};
    app.require_subcommand(1);
    app.fallthrough();

    std::uint64_t seed = 0;
    app.add_option("--seed", seed, "global random seed")->capture_default_str();

    // --- corpus ---------------------------------------------------------
    auto* corpus_cmd = app.add_subcommand("corpus", "synthetic task corpus management");
    auto* corpus_gen = corpus_cmd->add_subcommand("gen", "generate a task corpus");
    std::string corpus_out = "corpus";
    int corpus_tasks = 40;
    corpus_gen->add_option("out_dir", corpus_out, "output directory")->required();
    corpus_gen->add_option("--tasks", corpus_tasks, "number of tasks")->capture_default_str();

    // --- project ---------------------------------------------------------
    auto* project_cmd = app.add_subcommand("project", "project a directory into a twin document");
    std::string project_dir;
    std::string project_out = "twin.json";
    std::int64_t project_now = 0;
    project_cmd->add_option("dir", project_dir, "environment directory")->required();
    project_cmd->add_option("-o,--out", project_out, "twin document path")->capture_default_str();
    project_cmd->add_option("--now", project_now, "reference unix time (default: wall clock)");

    // --- plan ------------------------------------------------------------
    auto* plan_cmd = app.add_subcommand("plan", "produce a plan for a twin document");
    std::string plan_twin;
    std::string plan_request;
    std::string plan_out = "plan.json";
    plan_cmd->add_option("twin", plan_twin, "twin document path")->required();
    plan_cmd->add_option("request", plan_request, "task request text")->required();
    plan_cmd->add_option("-o,--out", plan_out, "plan document path")->capture_default_str();

    // --- run ---------------------------------------------------------------
    auto* run_cmd = app.add_subcommand("run", "run a corpus through the full cycle");
    std::string run_corpus;
    std::string run_out = "out";
    std::string run_planner = "heuristic";
    std::string run_approval = "auto_approve";
    std::string run_endpoint;
    double run_alpha = 1.0;
    bool run_multi = false;
    bool run_edges = false;
    int run_rate_limit = 32;
    int run_repeat = 1;
    run_cmd->add_option("corpus", run_corpus, "corpus directory")->required();
    run_cmd->add_option("--out", run_out, "output directory")->capture_default_str();
    run_cmd->add_option("--planner", run_planner, "heuristic|remote")->capture_default_str();
    run_cmd->add_option("--endpoint", run_endpoint, "remote planner endpoint (or PLANTWIN_ENDPOINT)");
    run_cmd->add_option("--alpha", run_alpha, "budget scale factor")->capture_default_str();
    run_cmd->add_flag("--multi-turn", run_multi, "persistent ledger across tasks");
    run_cmd->add_flag("--disclose-edges", run_edges, "charge and disclose graph edges");
    run_cmd->add_option("--approval", run_approval, "auto_approve|auto_deny|interactive")
        ->capture_default_str();
    run_cmd->add_option("--rate-limit", run_rate_limit, "max steps per cycle")->capture_default_str();
    run_cmd->add_option("--repeat", run_repeat, "times to replay the corpus (multi-turn)")
        ->capture_default_str();

    // --- attack ------------------------------------------------------------
    auto* attack_cmd = app.add_subcommand("attack", "re-identification games");
    auto* reid_cmd = attack_cmd->add_subcommand("reid", "single pool-size game");
    int reid_k = 15;
    int reid_trials = 500;
    int reid_targets = 5;
    std::string reid_strategy = "random";
    std::string reid_out;
    reid_cmd->add_option("--k", reid_k, "pool size")->capture_default_str();
    reid_cmd->add_option("--trials", reid_trials, "number of trials")->capture_default_str();
    reid_cmd->add_option("--targets", reid_targets, "targets per trial")->capture_default_str();
    reid_cmd->add_option("--strategy", reid_strategy,
                         "random|kind_only|kind_semantic|full_fingerprint")
        ->capture_default_str();
    reid_cmd->add_option("-o,--out", reid_out, "report path");

    auto* scaling_cmd = attack_cmd->add_subcommand("scaling", "accuracy vs pool size");
    std::vector<int> scaling_ks = {5, 10, 15, 20, 25, 30};
    int scaling_trials = 150;
    int scaling_targets = 5;
    std::string scaling_out;
    scaling_cmd->add_option("--pool-sizes", scaling_ks, "pool sizes")->capture_default_str();
    scaling_cmd->add_option("--trials", scaling_trials, "trials per pool size")->capture_default_str();
    scaling_cmd->add_option("--targets", scaling_targets, "targets per trial")->capture_default_str();
    scaling_cmd->add_option("-o,--out", scaling_out, "report path");

    // --- verify --------------------------------------------------------------
    auto* verify_cmd = app.add_subcommand("verify", "empirical theorem verifiers");
    auto* anon_cmd = verify_cmd->add_subcommand("anonymity", "re-identification bound");
    int anon_k = 20;
    double anon_eta = 1.0;
    int anon_trials = 20000;
    std::string anon_fields = "kind";
    std::string anon_out;
    anon_cmd->add_option("--k", anon_k, "pool size")->capture_default_str();
    anon_cmd->add_option("--eta", anon_eta, "side-information bound")->capture_default_str();
    anon_cmd->add_option("--trials", anon_trials, "trials")->capture_default_str();
    anon_cmd->add_option("--fields", anon_fields, "disclosed fields (csv)")->capture_default_str();
    anon_cmd->add_option("-o,--out", anon_out, "report path");

    auto* unlink_cmd = verify_cmd->add_subcommand("unlinkability", "cross-session linkage bound");
    int unlink_k = 20;
    int unlink_trials = 20000;
    std::string unlink_fields = "sensitivity";
    std::string unlink_out;
    unlink_cmd->add_option("--k", unlink_k, "pool size")->capture_default_str();
    unlink_cmd->add_option("--trials", unlink_trials, "trials")->capture_default_str();
    unlink_cmd->add_option("--fields", unlink_fields, "overlap fields (csv; empty for none)")
        ->capture_default_str();
    unlink_cmd->add_option("-o,--out", unlink_out, "report path");

    auto* comp_cmd = verify_cmd->add_subcommand("composition", "sequential composition bound");
    int comp_instances = 1000;
    std::string comp_profile = "calibrated";
    std::string comp_out;
    comp_cmd->add_option("--instances", comp_instances, "random (pool, sequence) instances")
        ->capture_default_str();
    comp_cmd->add_option("--profile", comp_profile, "calibrated|paper_default")
        ->capture_default_str();
    comp_cmd->add_option("-o,--out", comp_out, "report path");

    // --- eval ------------------------------------------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "metrics report across budget scales");
    std::string eval_corpus;
    std::string eval_out = "eval_out";
    std::vector<double> eval_alphas = {0.25, 0.75, 1.0, 1.5};
    eval_cmd->add_option("corpus", eval_corpus, "corpus directory")->required();
    eval_cmd->add_option("--out", eval_out, "output directory")->capture_default_str();
    eval_cmd->add_option("--alphas", eval_alphas, "budget scale factors")->capture_default_str();

    // --- budget -----------------------------------------------------------------
    auto* budget_cmd = app.add_subcommand("budget", "budget inspection");
    auto* budget_report_cmd = budget_cmd->add_subcommand("report", "per-object utilization");
    std::string budget_dir;
    budget_report_cmd->add_option("run_dir", budget_dir, "run output directory")->required();

    std::vector<const char*> argv;
    argv.push_back("plantwin");
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }

    try {
        if (corpus_gen->parsed()) {
            auto tasks = generate_tasks(corpus_tasks, seed);
            save_corpus(tasks, corpus_out);
            std::cout << "wrote " << tasks.size() << " tasks to " << corpus_out << "\n";
            return 0;
        }
        if (project_cmd->parsed()) {
            ProjectionConfig config;
            config.now = project_now ? project_now
                                     : static_cast<std::int64_t>(std::time(nullptr));
            auto env = read_directory_env(project_dir);
            TwinGraph graph = project_environment(env, config, seed);
            atomic_write_file(project_out, serialize_view(full_view(graph)) + "\n");
            std::cout << "projected " << env.size() << " artifacts into " << graph.objects.size()
                      << " objects, " << graph.edges.size() << " edges -> " << project_out << "\n";
            return 0;
        }
        if (plan_cmd->parsed()) {
            PlannerView view = parse_view(read_file(plan_twin));
            Catalog catalog = Catalog::default_catalog();
            Plan plan = heuristic_plan(view, catalog, plan_request);
            atomic_write_file(plan_out, plan.to_document() + "\n");
            std::cout << "planned " << plan.steps.size() << " steps -> " << plan_out << "\n";
            return 0;
        }
        if (run_cmd->parsed() || eval_cmd->parsed()) {
            const std::string corpus_dir = run_cmd->parsed() ? run_corpus : eval_corpus;
            auto tasks = load_corpus(corpus_dir);
            Catalog catalog = Catalog::default_catalog();
            if (run_cmd->parsed()) {
                RunSettings settings = make_settings(run_alpha, seed, run_approval, run_edges,
                                                     run_rate_limit, run_repeat);
                std::unique_ptr<Planner> planner;
                if (run_planner == "remote") {
                    std::string endpoint = run_endpoint;
                    if (endpoint.empty()) {
                        const char* env_endpoint = std::getenv("PLANTWIN_ENDPOINT");
                        endpoint = env_endpoint ? env_endpoint : "";
                    }
                    const char* key = std::getenv("PLANTWIN_API_KEY");
                    planner = std::make_unique<RemotePlanner>(endpoint, key ? key : "");
                } else {
                    planner = std::make_unique<HeuristicPlanner>();
                }
                SessionReport report = run_session(
                    tasks, settings, run_multi ? SessionMode::multi_turn : SessionMode::single_turn,
                    *planner, catalog);
                write_session_outputs(report, run_out);
                std::cout << report.metrics.to_table();
                std::cout << "grain=" << std::fixed << std::setprecision(3) << report.grain_mean
                          << " final_nl=" << report.final_nl
                          << " excluded=" << report.total_excluded_objects
                          << (report.any_planner_fallback ? " (heuristic fallback engaged)" : "")
                          << "\n";
                return 0;
            }
            // eval: single-turn sweep over budget scales
            nlohmann::json sweep = nlohmann::json::object();
            HeuristicPlanner planner;
            for (double alpha : eval_alphas) {
                RunSettings settings = make_settings(alpha, seed, "auto_approve", false, 32, 1);
                SessionReport report =
                    run_session(tasks, settings, SessionMode::single_turn, planner, catalog);
                std::ostringstream key;
                key << "alpha_" << alpha;
                sweep[key.str()] = report.to_json();
                atomic_write_file(eval_out + "/" + key.str() + ".tsv", report.metrics.to_tsv());
                std::cout << "alpha=" << alpha << "\n" << report.metrics.to_table() << "\n";
            }
            atomic_write_file(eval_out + "/eval.json", sweep.dump(2) + "\n");
            return 0;
        }
        if (reid_cmd->parsed()) {
            auto strategy = strategy_from_name(reid_strategy);
            if (!strategy) throw CLI::ValidationError("--strategy", "unknown strategy");
            ReidReport report = run_reid_game(reid_k, reid_trials, reid_targets, *strategy, seed);
            std::string doc = report.to_json().dump(2) + "\n";
            if (!reid_out.empty()) atomic_write_file(reid_out, doc);
            std::cout << doc;
            return 0;
        }
        if (scaling_cmd->parsed()) {
            std::vector<ReidStrategy> strategies = {
                ReidStrategy::random, ReidStrategy::kind_only, ReidStrategy::kind_semantic,
                ReidStrategy::full_fingerprint};
            ScalingReport report =
                run_scaling(scaling_ks, scaling_trials, scaling_targets, strategies, seed);
            std::string doc = report.to_json().dump(2) + "\n";
            if (!scaling_out.empty()) atomic_write_file(scaling_out, doc);
            std::cout << doc;
            return 0;
        }
        if (anon_cmd->parsed()) {
            CandidatePool pool = make_pool(anon_k, seed);
            AnonymityReport report =
                verify_anonymity(pool, parse_field_list(anon_fields), anon_eta, anon_trials, seed);
            std::string doc = report.to_json().dump(2) + "\n";
            if (!anon_out.empty()) atomic_write_file(anon_out, doc);
            std::cout << doc;
            return report.holds ? 0 : 1;
        }
        if (unlink_cmd->parsed()) {
            CandidatePool pool = make_pool(unlink_k, seed);
            UnlinkReport report =
                run_unlinkability(pool, parse_field_list(unlink_fields), unlink_trials, seed);
            std::string doc = report.to_json().dump(2) + "\n";
            if (!unlink_out.empty()) atomic_write_file(unlink_out, doc);
            std::cout << doc;
            return report.holds ? 0 : 1;
        }
        if (comp_cmd->parsed()) {
            if (comp_profile != "calibrated") {
                // Show the refusal path: the bound's assumption fails here.
                auto rng = make_rng(seed);
                std::vector<TwinObject> pool = {random_attribute_twin(rng, "obj_0")};
                CompositionReport refusal = verify_composition(
                    pool, pool[0], {FieldId::scalar(FieldKey::kind)}, WeightProfile::paper_default());
                std::cout << refusal.to_json().dump(2) << "\n";
                return 1;
            }
            CompositionSweep sweep = verify_composition_random(comp_instances, seed);
            std::string doc = sweep.to_json().dump(2) + "\n";
            if (!comp_out.empty()) atomic_write_file(comp_out, doc);
            std::cout << doc;
            return sweep.violations == 0 ? 0 : 1;
        }
        if (budget_report_cmd->parsed()) {
            return cmd_budget_report(budget_dir);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cerr << "no subcommand\n";
    return 2;
}

}  // namespace plantwin
