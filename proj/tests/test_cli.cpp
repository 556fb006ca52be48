#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include <nlohmann/json.hpp>

#include "plantwin/cli.hpp"
#include "plantwin/io.hpp"

using namespace plantwin;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("plantwin_cli_" + std::to_string(::getpid()) + "_" +
                                            std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string sub(const std::string& name) const { return (path / name).string(); }
    static int& counter() {
        static int c = 0;
        return c;
    }
};

bool no_tmp_files(const fs::path& root) {
    for (const auto& entry : fs::recursive_directory_iterator(root)) {
        if (entry.path().extension() == ".tmp") return false;
    }
    return true;
}

}  // namespace

TEST_CASE("cli: bad flags exit nonzero") {
    CHECK(run_command({"definitely-not-a-subcommand"}) != 0);
    CHECK(run_command({}) != 0);
    CHECK(run_command({"attack", "reid", "--strategy", "psychic"}) != 0);
}

TEST_CASE("cli: corpus gen + run are deterministic and leave no partial files") {
    TempDir tmp;
    std::string corpus = tmp.sub("corpus");
    REQUIRE(run_command({"corpus", "gen", corpus, "--tasks", "6", "--seed", "11"}) == 0);
    REQUIRE(fs::exists(fs::path(corpus) / "task_00" / "task.meta"));

    REQUIRE(run_command({"run", corpus, "--out", tmp.sub("o1"), "--seed", "11"}) == 0);
    REQUIRE(run_command({"run", corpus, "--out", tmp.sub("o2"), "--seed", "11"}) == 0);
    CHECK(read_file(tmp.sub("o1") + "/report.json") == read_file(tmp.sub("o2") + "/report.json"));
    CHECK(read_file(tmp.sub("o1") + "/report.tsv") == read_file(tmp.sub("o2") + "/report.tsv"));
    CHECK(read_file(tmp.sub("o1") + "/budget.json") == read_file(tmp.sub("o2") + "/budget.json"));
    CHECK(no_tmp_files(tmp.path));

    // Same corpus generated twice is byte-identical on disk.
    std::string corpus2 = tmp.sub("corpus2");
    REQUIRE(run_command({"corpus", "gen", corpus2, "--tasks", "6", "--seed", "11"}) == 0);
    CHECK(read_file(corpus + "/task_03/task.meta") == read_file(corpus2 + "/task_03/task.meta"));
}

TEST_CASE("cli: project then plan round-trip") {
    TempDir tmp;
    std::string envdir = tmp.sub("env");
    fs::create_directories(fs::path(envdir) / "app");
    {
        std::ofstream f(fs::path(envdir) / "app" / "login_gate.py");
        f << "import base\ndef login(user, password):\n    return session_token(user)\n";
    }
    std::string twin = tmp.sub("twin.json");
    REQUIRE(run_command({"project", envdir, "-o", twin, "--seed", "3", "--now", "1900000000"}) == 0);
    auto doc = nlohmann::json::parse(read_file(twin));
    REQUIRE(doc.at("objects").size() == 1);
    CHECK(doc.at("objects")[0].at("kind") == "code_file");
    CHECK(read_file(twin).find("login_gate") == std::string::npos);

    std::string plan = tmp.sub("plan.json");
    REQUIRE(run_command({"plan", twin, "audit the login module for security issues", "-o", plan}) ==
            0);
    auto plan_doc = nlohmann::json::parse(read_file(plan));
    REQUIRE(!plan_doc.at("steps").empty());
    CHECK(plan_doc.at("steps")[0].at("capability") == "security_audit");
}

TEST_CASE("cli: attack reid emits a calibrated report") {
    TempDir tmp;
    std::string out = tmp.sub("reid.json");
    REQUIRE(run_command({"attack", "reid", "--k", "15", "--trials", "60", "--strategy", "random",
                         "--seed", "1", "-o", out}) == 0);
    auto doc = nlohmann::json::parse(read_file(out));
    CHECK(doc.at("k") == 15);
    double accuracy = doc.at("accuracy").get<double>();
    CHECK(accuracy > 0.0);
    CHECK(accuracy < 0.2);
}

TEST_CASE("cli: verify subcommands gate on their bounds") {
    TempDir tmp;
    CHECK(run_command({"verify", "composition", "--instances", "50", "--seed", "2", "-o",
                       tmp.sub("comp.json")}) == 0);
    CHECK(run_command({"verify", "composition", "--profile", "paper_default", "--seed", "2"}) == 1);
    CHECK(run_command({"verify", "anonymity", "--k", "12", "--eta", "1.0", "--trials", "4000",
                       "--fields", "kind", "--seed", "2", "-o", tmp.sub("anon.json")}) == 0);
    CHECK(run_command({"verify", "unlinkability", "--k", "12", "--trials", "4000", "--fields",
                       "sensitivity", "--seed", "2", "-o", tmp.sub("unlink.json")}) == 0);
    CHECK(no_tmp_files(tmp.path));
}

TEST_CASE("cli: budget report renders utilization") {
    TempDir tmp;
    std::string corpus = tmp.sub("corpus");
    REQUIRE(run_command({"corpus", "gen", corpus, "--tasks", "3", "--seed", "4"}) == 0);
    REQUIRE(run_command({"run", corpus, "--out", tmp.sub("out"), "--seed", "4", "--multi-turn"}) ==
            0);
    CHECK(run_command({"budget", "report", tmp.sub("out")}) == 0);
}

TEST_CASE("cli: remote planner degrades to the heuristic fallback") {
    TempDir tmp;
    std::string corpus = tmp.sub("corpus");
    REQUIRE(run_command({"corpus", "gen", corpus, "--tasks", "2", "--seed", "5"}) == 0);
    REQUIRE(run_command({"run", corpus, "--out", tmp.sub("out"), "--seed", "5", "--planner",
                         "remote", "--endpoint", "http://127.0.0.1:9/plan"}) == 0);
    auto doc = nlohmann::json::parse(read_file(tmp.sub("out") + "/report.json"));
    CHECK(doc.at("any_planner_fallback") == true);
    // Fallback still produces plans and full non-disclosure.
    CHECK(doc.at("metrics").at("combined").at("snd") == 1.0);
}
