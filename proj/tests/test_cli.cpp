#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path work = fs::temp_directory_path() / "dce_cli_test";

int run(const std::string& args, const std::string& stderr_file = "/dev/null") {
    const std::string cmd = std::string(DCESIM_PATH) + " " + args + " > " + (work / "stdout.txt").string() +
                            " 2> " + stderr_file;
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path write_config(const std::string& name, const nlohmann::json& j) {
    const fs::path p = work / name;
    std::ofstream(p) << j.dump(2);
    return p;
}

nlohmann::json small_config() {
    return nlohmann::json::parse(R"({
      "system": {"omega_c1": 4, "omega_c2": 5, "omega_q1": 4, "omega_q2": 5,
                 "g1": 0.2, "g2": 0.2, "g0": 0.004, "omega_d": 9},
      "hilbert": {"n_fock": 3},
      "trajectories": [{"type": "static", "u0": 0}, {"type": "static", "u0": 0}],
      "grid": {"t_end_ns": 10, "n_samples": 51}
    })");
}

struct Workspace {
    Workspace() {
        fs::remove_all(work);
        fs::create_directories(work);
    }
};

} // namespace

TEST_SUITE("cli") {

TEST_CASE_FIXTURE(Workspace, "run writes the series and summary") {
    const fs::path cfg = write_config("ok.json", small_config());
    CHECK(run("run --config " + cfg.string() + " --out " + (work / "out").string()) == 0);
    CHECK(fs::exists(work / "out" / "timeseries.csv"));
    const auto summary = nlohmann::json::parse(slurp(work / "out" / "summary.json"));
    CHECK(summary["n_fock_used"] == 3);
    CHECK(summary["C_max"].get<double>() > 0.0);
}

TEST_CASE_FIXTURE(Workspace, "config errors exit with 2 and name the field") {
    auto j = small_config();
    j["system"].erase("omega_d");
    const fs::path cfg = write_config("missing.json", j);
    const fs::path err = work / "err.txt";
    CHECK(run("run --config " + cfg.string() + " --out " + (work / "x").string(), err.string()) == 2);
    CHECK(slurp(err).find("system.omega_d") != std::string::npos);

    CHECK(run("run --config " + (work / "absent.json").string() + " --out " + (work / "x").string()) == 2);
    std::ofstream(work / "garbage.json") << "{ not json";
    CHECK(run("run --config " + (work / "garbage.json").string() + " --out " + (work / "x").string()) == 2);
    CHECK(run("preset --name fig42 --out " + (work / "x").string()) == 2);
    CHECK(run("run --out " + (work / "x").string()) == 2);
    CHECK(run("") == 2);
}

TEST_CASE_FIXTURE(Workspace, "numerical failures exit with 3") {
    auto j = small_config();
    j["hilbert"] = nlohmann::json::parse(R"({"n_fock": "auto", "start": 2, "max": 4})");
    j["grid"] = nlohmann::json::parse(R"({"t_end_ns": 150, "n_samples": 151})");
    const fs::path cfg = write_config("ladder.json", j);
    CHECK(run("run --config " + cfg.string() + " --out " + (work / "x").string()) == 3);
}

TEST_CASE_FIXTURE(Workspace, "presets") {
    CHECK(run("preset --name fig2 --out " + (work / "fig2").string()) == 0);
    int csv = 0, other = 0;
    for (const auto& e : fs::directory_iterator(work / "fig2")) (e.path().extension() == ".csv" ? csv : other)++;
    CHECK(csv == 5);
    CHECK(other == 0);

    CHECK(run("preset --name fig4 --out " + (work / "fig4").string()) == 0);
    const auto echo = nlohmann::json::parse(slurp(work / "fig4" / "fig4-static.json"));
    CHECK(echo["system"]["g1"].get<double>() == doctest::Approx(0.2));
    CHECK(echo["system"]["g0"].get<double>() == doctest::Approx(0.004));
    CHECK(fs::exists(work / "fig4" / "fig4-mirror.json"));
    CHECK_FALSE(fs::exists(work / "fig4" / "fig4-static"));
}

TEST_CASE_FIXTURE(Workspace, "sweep output does not depend on the job count") {
    nlohmann::json s;
    s["base"] = small_config();
    s["axes"] = nlohmann::json::parse(R"([{"path": "trajectories.1.u0", "values": [0, 0.25, 0.5]},
                                          {"path": "system.g0", "values": [0.004, 0.001]}])");
    const fs::path cfg = write_config("sweep.json", s);
    CHECK(run("sweep --config " + cfg.string() + " --out " + (work / "s1").string() + " --jobs 1") == 0);
    CHECK(run("sweep --config " + cfg.string() + " --out " + (work / "s8").string() + " --jobs 8") == 0);
    const std::string a = slurp(work / "s1" / "sweep.csv");
    CHECK(a == slurp(work / "s8" / "sweep.csv"));
    CHECK(std::count(a.begin(), a.end(), '\n') == 7);

    s["axes"] = nlohmann::json::parse(R"([{"path": "system.g0", "values": [-1, -2]}])");
    const fs::path bad = write_config("sweep_bad.json", s);
    CHECK(run("sweep --config " + bad.string() + " --out " + (work / "sb").string() + " --jobs 2") == 3);
    const std::string failed = slurp(work / "sb" / "sweep.csv");
    CHECK(failed.find("g0") != std::string::npos);

    s["axes"] = nlohmann::json::parse(R"([{"path": "system.g0", "values": [-1, 0.004]}])");
    const fs::path mixed = write_config("sweep_mixed.json", s);
    CHECK(run("sweep --config " + mixed.string() + " --out " + (work / "sm").string() + " --jobs 2") == 0);
}

TEST_CASE_FIXTURE(Workspace, "perturbative subcommand") {
    const fs::path cfg = write_config("p.json", small_config());
    CHECK(run("perturbative --config " + cfg.string() + " --t ''") == 0);
    CHECK(slurp(work / "stdout.txt") == "t_ns,C_oracle,C_closed_form,rel_diff\n");
    CHECK(run("perturbative --config " + cfg.string() + " --t 0:10:2.5") == 0);
    const std::string out = slurp(work / "stdout.txt");
    CHECK(std::count(out.begin(), out.end(), '\n') == 6);
    CHECK(out.find("\n0,0,0,\n") != std::string::npos);
    CHECK(run("perturbative --config " + cfg.string() + " --t 1,x") == 2);
}

}
