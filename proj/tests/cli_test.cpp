#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct CliResult {
    int exit_code = -1;
    json output;
};

CliResult run_cli(const std::string& args) {
    std::string cmd = std::string(FF_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buf[4096];
    while (std::size_t got = fread(buf, 1, sizeof(buf), pipe))
        out.append(buf, got);
    int status = pclose(pipe);
    CliResult result;
    result.exit_code = WEXITSTATUS(status);
    if (!out.empty())
        result.output = json::parse(out, nullptr, false);
    return result;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

std::string write_config(const fs::path& dir) {
    fs::path cfg = dir / "config.json";
    std::ofstream f(cfg);
    f << json{{"backend", "toy"},
              {"backend_options", {{"output_size", 64}}},
              {"output_root", (dir / "out").string()},
              {"dataset_seed", 4242},
              {"workers", 2}}
             .dump();
    return cfg.string();
}

} // namespace

TEST_CASE("plan-totals prints the published composition") {
    CliResult r = run_cli("plan-totals --preset paper");
    CHECK(r.exit_code == 0);
    CHECK(r.output.at("total") == 324000);
    CHECK(r.output.at("categories").at("base") == 20000);
    CHECK(r.output.at("categories").at("relight") == 80000);

    CliResult scaled = run_cli("plan-totals --preset paper --scale 1/1000");
    CHECK(scaled.output.at("total") == 324);
}

TEST_CASE("edit with zero coefficient reproduces the unedited render") {
    TempDir dir("ff_cli_edit");
    std::string cfg = write_config(dir.path);
    CliResult r = run_cli("--config " + cfg + " edit --subject-seed 7 --direction happy --coeff 0");
    CHECK(r.exit_code == 0);
    CHECK(r.output.at("frames").size() == 1);
    CHECK(r.output.at("frames")[0].at("digest") == r.output.at("base_digest"));

    CliResult moved =
        run_cli("--config " + cfg + " edit --subject-seed 7 --direction happy --coeff 2.5");
    CHECK(moved.output.at("frames")[0].at("digest") != moved.output.at("base_digest"));
}

TEST_CASE("fid of a set against itself is zero") {
    TempDir dir("ff_cli_fid");
    std::string cfg = write_config(dir.path);
    CHECK(run_cli("--config " + cfg +
                  " edit --subject-seed 3 --direction happy --coeff 2 --frames 4 --out " +
                  (dir.path / "set").string())
              .exit_code == 0);
    CliResult r = run_cli("--config " + cfg + " fid --set-a " + (dir.path / "set").string() +
                          " --set-b " + (dir.path / "set").string());
    CHECK(r.exit_code == 0);
    CHECK(std::abs(r.output.at("fid").get<double>()) <= 1e-8);
}

TEST_CASE("render and verify a tiny dataset through the CLI") {
    TempDir dir("ff_cli_render");
    std::string cfg = write_config(dir.path);
    std::string out = (dir.path / "ds").string();
    CliResult r = run_cli("--config " + cfg + " render-dataset --scale 1/1000 --out " + out);
    CHECK(r.exit_code == 0);
    CHECK(r.output.at("rendered") == 324);
    CliResult v = run_cli("verify-manifest --root " + out);
    CHECK(v.exit_code == 0);
    CHECK(v.output.at("passed") == true);
}

TEST_CASE("usage, config and runtime errors use distinct exit codes") {
    CHECK(run_cli("plan-totals --preset selfies").exit_code == 2);
    CHECK(run_cli("no-such-command").exit_code == 2);

    TempDir dir("ff_cli_err");
    std::ofstream bad(dir.path / "bad.json");
    bad << "{\"no_such_key\": 1}";
    bad.close();
    CHECK(run_cli("--config " + (dir.path / "bad.json").string() + " plan-totals").exit_code ==
          3);

    CliResult missing = run_cli("verify-manifest --root /nonexistent/root");
    CHECK(missing.exit_code == 4);
    CHECK(missing.output.at("error") == "state");
}

TEST_CASE("FACEFORGE_OUTPUT_ROOT overrides the output path") {
    TempDir dir("ff_cli_env");
    std::string env_root = (dir.path / "env_out").string();
    std::string cmd = "FACEFORGE_OUTPUT_ROOT=" + env_root + " " + FF_CLI_PATH +
                      " --backend toy edit --subject-seed 3 --direction happy --coeff 1 "
                      "2>/dev/null >/dev/null";
    CHECK(std::system(cmd.c_str()) == 0);
    CHECK(fs::exists(env_root + "/edits"));
}
