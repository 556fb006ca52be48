#include "plantwin/corpus.hpp"

#include <algorithm>
#include <filesystem>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "plantwin/io.hpp"
#include "plantwin/rng.hpp"
#include "plantwin/templates.hpp"

namespace plantwin {

namespace {

namespace fs = std::filesystem;

// Fixed corpus clock; artifact ages are stored relative to it.
constexpr std::int64_t kCorpusClock = 1900000000;

struct RequestVariant {
    const char* text;
    std::vector<const char*> expected;
};

struct DomainSpec {
    const char* name;
    std::vector<const char*> env_templates;
    std::vector<const char*> plant_templates;  // receive forced secret sections
    std::vector<RequestVariant> requests;
    std::vector<DeclaredRelation> declared;
};

const std::vector<DomainSpec>& domain_specs() {
    static const std::vector<DomainSpec> v = {
        {"coding_assistant",
         {"login_flow", "billing_handler", "dotenv", "spec_checks"},
         {"dotenv"},
         {{"Review the authentication module for security issues and compare it with the payment "
           "module.",
           {"security_audit", "compare", "summarize"}},
          {"Audit the login code for vulnerabilities and scan the service modules for leaked "
           "credentials.",
           {"security_audit", "scan_credentials", "summarize"}},
          // No audit keyword on purpose: recall miss for the keyword planner.
          {"Look over the session handling module and propose a fix outline for the weak spots.",
           {"security_audit", "propose_fix_outline", "summarize"}}},
         {}},
        {"document_review",
         {"intake_brief", "rollout_plan", "team_roster"},
         {"team_roster"},
         {{"Extract the requirements and constraints from the intake documents and summarize them.",
           {"extract_constraints", "summarize"}},
          // "differences" also fires the diff rule: precision miss by design.
          {"Compare the rollout document with the intake brief and summarize the differences.",
           {"compare", "summarize"}},
          {"Classify the open issues in the planning documents and extract the hard constraints.",
           {"classify_issues", "extract_constraints", "summarize"}}},
         {}},
        {"debugging",
         {"gateway_errors", "worker_crashes", "spec_checks"},
         {"gateway_errors"},
         {{"Classify the issues in the crash logs and propose a fix outline.",
           {"classify_issues", "propose_fix_outline", "summarize"}},
          {"Triage the gateway error logs, group them by type, and summarize.",
           {"classify_issues", "summarize"}},
          {"Summarize the worker crash logs and propose a remediation outline.",
           {"summarize", "propose_fix_outline"}}},
         {}},
        {"devops",
         {"deploy_web", "rollout_api", "build_all", "deploy_secrets"},
         {"deploy_secrets"},
         {{"Audit the deployment configuration for security problems and scan for leaked "
           "credentials.",
           {"security_audit", "scan_credentials", "summarize"}},
          {"Compare the two rollout configurations and validate their schema.",
           {"compare", "validate_schema", "summarize"}},
          {"Scan the build configuration for exposed secrets and summarize the findings.",
           {"scan_credentials", "summarize"}}},
         {{"infra/build_all.sh", "infra/deploy_web.yaml", "blocks"}}},
        {"data_pipeline",
         {"pipeline_stages", "orders_sample", "shipments_window", "dotenv"},
         {"dotenv"},
         {{"Validate the schema of the shipment records and extract the load constraints.",
           {"validate_schema", "extract_constraints", "summarize"}},
          {"Summarize the staged records and validate the incoming data.",
           {"summarize", "validate_schema"}},
          {"Extract the constraints from the batch records and compare the two data feeds.",
           {"extract_constraints", "compare", "summarize"}}},
         {}},
        {"security_incident",
         {"access_audit", "incident_recap", "svc_keys"},
         {"access_audit", "svc_keys"},
         {{"Triage the incident: classify the audit log issues and scan for exposed secrets.",
           {"classify_issues", "scan_credentials", "summarize"}},
          {"Audit the incident trail for security gaps and summarize the breach window.",
           {"security_audit", "summarize"}},
          {"Classify the unauthorized access records and propose a remediation outline.",
           {"classify_issues", "propose_fix_outline", "summarize"}}},
         {}},
        {"mlops",
         {"train_loop", "model_params", "trainer_steps", "runner_options"},
         {"runner_options"},
         {{"Compare the training code with the model configuration and summarize the drift.",
           {"compare", "summarize"}},
          {"Summarize the trainer logs and classify any recurring issues.",
           {"summarize", "classify_issues"}},
          {"Validate the model configuration schema and scan the runner settings for tokens.",
           {"validate_schema", "scan_credentials", "summarize"}}},
         {{"mlrun/train_loop.py", "mlrun/model_params.yaml", "requires_capability"}}},
        {"frontend",
         {"render_cart", "retry_wrapper", "api_surface", "fetch_client"},
         {"fetch_client"},
         {{"Diff the frontend component code and list its dependencies.",
           {"diff_objects", "list_dependencies", "summarize"}},
          {"Compare the cart component with the retry wrapper code and summarize.",
           {"compare", "summarize"}},
          {"List the client code dependencies and summarize the component structure.",
           {"list_dependencies", "summarize"}}},
         {}},
        {"database_admin",
         {"schema_upgrade", "fields_catalog", "queries_bench"},
         {"schema_upgrade"},
         {{"Validate the field catalog records and audit the migration code for security issues.",
           {"validate_schema", "security_audit", "summarize"}},
          {"Audit the migration code and scan it for embedded credentials.",
           {"security_audit", "scan_credentials", "summarize"}},
          {"Summarize the benchmark records and validate the catalog data.",
           {"summarize", "validate_schema"}}},
         {}},
        {"api_integration",
         {"fetch_client", "api_surface", "lockfile_pins"},
         {"fetch_client"},
         {{"List the dependencies of the client code and compare it with the published spec.",
           {"list_dependencies", "compare", "summarize"}},
          {"Validate the interface manifest and summarize the client behavior.",
           {"validate_schema", "summarize"}},
          {"Compare the client code with the spec document and extract the interface constraints.",
           {"compare", "extract_constraints", "summarize"}}},
         {}},
    };
    return v;
}

}  // namespace

const std::vector<std::string>& corpus_domains() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> out;
        for (const auto& d : domain_specs()) out.emplace_back(d.name);
        return out;
    }();
    return names;
}

std::vector<Task> generate_tasks(int count, std::uint64_t seed) {
    if (count < 1) throw std::invalid_argument("generate_tasks: count must be >= 1");
    const auto& domains = domain_specs();
    std::vector<Task> tasks;
    tasks.reserve(count);
    for (int i = 0; i < count; ++i) {
        const DomainSpec& spec = domains[i % domains.size()];
        auto rng = make_rng(derive_seed(seed, 0xc0de0000ULL + static_cast<std::uint64_t>(i)));

        Task task;
        task.id = "task_" + std::string(i < 10 ? "0" : "") + std::to_string(i);
        task.domain = spec.name;
        task.now = kCorpusClock;
        const RequestVariant& variant =
            spec.requests[(static_cast<std::size_t>(i) / domains.size()) % spec.requests.size()];
        task.request = variant.text;
        for (const char* cap : variant.expected) task.expected_capabilities.insert(cap);

        std::set<std::string> seen_content;
        for (const char* template_id : spec.env_templates) {
            bool plant = std::find_if(spec.plant_templates.begin(), spec.plant_templates.end(),
                                      [&](const char* p) { return std::string(p) == template_id; }) !=
                         spec.plant_templates.end();
            TemplateInstance instance;
            for (int attempt = 0; attempt < 8; ++attempt) {
                instance = instantiate_template(template_index(template_id), rng, plant);
                if (seen_content.insert(instance.artifact.bytes).second) break;
            }
            instance.artifact.mtime += task.now;  // rebase relative age
            task.environment.push_back(instance.artifact);
            for (auto& s : instance.planted) task.sensitive_items.push_back(std::move(s));
        }
        task.declared_edges = spec.declared;
        tasks.push_back(std::move(task));
    }
    return tasks;
}

void save_corpus(const std::vector<Task>& tasks, const std::string& directory) {
    fs::create_directories(directory);
    for (const auto& task : tasks) {
        fs::path task_dir = fs::path(directory) / task.id;
        fs::create_directories(task_dir / "env");
        nlohmann::json meta;
        meta["id"] = task.id;
        meta["domain"] = task.domain;
        meta["request"] = task.request;
        meta["expected_capabilities"] =
            std::vector<std::string>(task.expected_capabilities.begin(),
                                     task.expected_capabilities.end());
        meta["sensitive_items"] = task.sensitive_items;
        meta["now_unix"] = task.now;
        nlohmann::json files = nlohmann::json::array();
        for (const auto& artifact : task.environment) {
            nlohmann::json f;
            f["path"] = artifact.path;
            f["age_seconds"] = task.now - artifact.mtime;
            files.push_back(f);
            atomic_write_file((task_dir / "env" / artifact.path).string(), artifact.bytes);
        }
        meta["artifacts"] = files;
        nlohmann::json edges = nlohmann::json::array();
        for (const auto& e : task.declared_edges) {
            nlohmann::json j;
            j["src"] = e.src_path;
            j["dst"] = e.dst_path;
            j["relation"] = e.relation;
            edges.push_back(j);
        }
        meta["declared_edges"] = edges;
        atomic_write_file((task_dir / "task.meta").string(), meta.dump(2));
    }
}

std::vector<Task> load_corpus(const std::string& directory) {
    std::vector<Task> tasks;
    std::vector<fs::path> task_dirs;
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (entry.is_directory() && fs::exists(entry.path() / "task.meta"))
            task_dirs.push_back(entry.path());
    }
    std::sort(task_dirs.begin(), task_dirs.end());
    for (const auto& dir : task_dirs) {
        nlohmann::json meta = nlohmann::json::parse(read_file((dir / "task.meta").string()));
        Task task;
        task.id = meta.at("id").get<std::string>();
        task.domain = meta.at("domain").get<std::string>();
        task.request = meta.at("request").get<std::string>();
        for (const auto& c : meta.at("expected_capabilities"))
            task.expected_capabilities.insert(c.get<std::string>());
        task.sensitive_items = meta.at("sensitive_items").get<std::vector<std::string>>();
        task.now = meta.at("now_unix").get<std::int64_t>();
        for (const auto& f : meta.at("artifacts")) {
            RawArtifact artifact;
            artifact.path = f.at("path").get<std::string>();
            artifact.bytes = read_file((dir / "env" / artifact.path).string());
            artifact.mtime = task.now - f.at("age_seconds").get<std::int64_t>();
            task.environment.push_back(std::move(artifact));
        }
        if (meta.contains("declared_edges")) {
            for (const auto& e : meta.at("declared_edges")) {
                task.declared_edges.push_back(DeclaredRelation{e.at("src").get<std::string>(),
                                                               e.at("dst").get<std::string>(),
                                                               e.at("relation").get<std::string>()});
            }
        }
        tasks.push_back(std::move(task));
    }
    return tasks;
}

}  // namespace plantwin
