#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "cli_commands.hpp"
#include "cli_config.hpp"
#include "kinkscan/errors.hpp"
#include "kinkscan/io.hpp"
#include "kinkscan/parallel.hpp"

using namespace kinkscan;
using namespace kinkscan::cli;

namespace {

int run(const std::vector<std::string>& args) {
    std::vector<const char*> argv;
    argv.push_back("kinkscan");
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data());
}

std::filesystem::path temp_dir() {
    auto dir = std::filesystem::temp_directory_path() / "kinkscan_cli_test";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string write_temp(const std::string& name, const std::string& content) {
    auto path = temp_dir() / name;
    atomic_write_file(path.string(), content);
    return path.string();
}

const char* kSingleKinkConfig =
    "scenario.kinks = 0.5:3.0\n"
    "scenario.sigma_value = 0.05\n"
    "design.assumption = A\n"
    "design.alpha_eps = 0.6\n"
    "sim.n = 4096\n"
    "sim.seed = 11\n";

std::string error_message_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    FAIL("expected an Error");
    return "";
}

} // namespace

TEST_CASE("config round trip is the identity on effective values") {
    ConfigMap a = ConfigMap::parse(kSingleKinkConfig);
    Scenario s1 = scenario_from_config(a);
    SimSection sim1 = sim_from_config(a);
    a.reject_unconsumed();

    std::string canonical = scenario_to_config(s1) + sim_to_config(sim1);
    ConfigMap b = ConfigMap::parse(canonical);
    Scenario s2 = scenario_from_config(b);
    SimSection sim2 = sim_from_config(b);
    b.reject_unconsumed();
    std::string canonical2 = scenario_to_config(s2) + sim_to_config(sim2);
    CHECK(canonical == canonical2);

    EstimatorConfig e1;
    e1.bandwidth_detect = 0.09;
    e1.threshold_inflation = 1.25;
    ConfigMap c = ConfigMap::parse(estimator_to_config(e1));
    EstimatorConfig e2 = estimator_from_config(c);
    c.reject_unconsumed();
    CHECK(estimator_to_config(e2) == estimator_to_config(e1));
}

TEST_CASE("strict parsing") {
    SUBCASE("unknown keys are rejected with the key name and line") {
        ConfigMap config = ConfigMap::parse("design.assumption = A\nscenario.bogus = 1\n");
        (void)scenario_from_config(config);
        std::string msg = error_message_of([&] { config.reject_unconsumed(); });
        CHECK(msg.find("scenario.bogus") != std::string::npos);
        CHECK(msg.find("line 2") != std::string::npos);
    }
    SUBCASE("missing required key is named") {
        ConfigMap config = ConfigMap::parse("scenario.kinks = 0.5:1.0\n");
        std::string msg = error_message_of([&] { scenario_from_config(config); });
        CHECK(msg.find("design.assumption") != std::string::npos);
    }
    SUBCASE("duplicate keys are rejected") {
        CHECK_THROWS_AS(ConfigMap::parse("sim.n = 2\nsim.n = 3\n"), Error);
    }
    SUBCASE("malformed lines carry line numbers") {
        std::string msg = error_message_of([] { ConfigMap::parse("sim.n 4\n"); });
        CHECK(msg.find("line 1") != std::string::npos);
    }
}

TEST_CASE("kernel command exit codes") {
    CHECK(run({"kernel", "--order", "1", "--verify"}) == 0);
    CHECK(run({"kernel", "--order", "0"}) == 2);
    CHECK(run({"kernel"}) == 2); // missing required option
    auto report = (temp_dir() / "kernel.json").string();
    CHECK(run({"kernel", "--order", "2", "--verify", "--out", report}) == 0);
    CHECK(read_file(report).find("\"pass\": true") != std::string::npos);
}

TEST_CASE("simulate: determinism and noiseless content") {
    auto config_path = write_temp("sim.cfg", kSingleKinkConfig);
    auto out1 = (temp_dir() / "d1.csv").string();
    auto out2 = (temp_dir() / "d2.csv").string();
    CHECK(run({"simulate", "--config", config_path, "--out", out1}) == 0);
    CHECK(run({"simulate", "--config", config_path, "--out", out2}) == 0);
    CHECK(read_file(out1) == read_file(out2));

    auto out3 = (temp_dir() / "d3.csv").string();
    CHECK(run({"simulate", "--config", config_path, "--out", out3, "--seed", "12"}) == 0);
    CHECK(read_file(out1) != read_file(out3));

    SUBCASE("sigma = 0 gives y = mu(x) row by row") {
        std::string noiseless = std::string(kSingleKinkConfig);
        noiseless.replace(noiseless.find("0.05"), 4, "0.00");
        auto cfg = write_temp("noiseless.cfg", noiseless);
        auto out = (temp_dir() / "noiseless.csv").string();
        CHECK(run({"simulate", "--config", cfg, "--out", out}) == 0);
        Dataset d = read_dataset_csv(out);
        for (std::size_t i = 0; i < d.n(); ++i)
            CHECK(d.y[i] == doctest::Approx(1.5 * std::abs(d.x[i] - 0.5)).epsilon(1e-12));
    }
    SUBCASE("missing design.assumption fails with exit 2") {
        auto cfg = write_temp("bad.cfg", "sim.n = 128\n");
        CHECK(run({"simulate", "--config", cfg, "--out",
                   (temp_dir() / "never.csv").string()}) == 2);
    }
    SUBCASE("series export writes the xi column") {
        auto series = (temp_dir() / "xi.csv").string();
        auto out = (temp_dir() / "d4.csv").string();
        CHECK(run({"simulate", "--config", config_path, "--out", out, "--series-out",
                   series}) == 0);
        std::string content = read_file(series);
        CHECK(content.rfind("xi\n", 0) == 0);
        CHECK(std::count(content.begin(), content.end(), '\n') == 4096 + 1);
    }
}

TEST_CASE("estimate command exit codes and output") {
    auto config_path = write_temp("sim.cfg", kSingleKinkConfig);
    auto data_path = (temp_dir() / "est_data.csv").string();
    REQUIRE(run({"simulate", "--config", config_path, "--out", data_path}) == 0);

    SUBCASE("kink found: exit 0 and one kink in the JSON") {
        auto out = (temp_dir() / "est.json").string();
        CHECK(run({"estimate", "--data", data_path, "--out", out}) == 0);
        std::string json = read_file(out);
        CHECK(json.find("\"lambda_hat\"") != std::string::npos);
        CHECK(json.find("\"f_mode\": \"ranks\"") != std::string::npos);
    }
    SUBCASE("pure noise: exit 1 and an empty kink list") {
        std::string noise_cfg =
            "scenario.sigma_value = 1.0\n"
            "design.assumption = A\n"
            "design.alpha_eps = 0.6\n"
            "sim.n = 2048\n"
            "sim.seed = 6\n"; // seed chosen to stay below the threshold
        auto cfg = write_temp("noise.cfg", noise_cfg);
        auto data = (temp_dir() / "noise.csv").string();
        REQUIRE(run({"simulate", "--config", cfg, "--out", data}) == 0);
        auto out = (temp_dir() / "noise.json").string();
        CHECK(run({"estimate", "--data", data, "--out", out}) == 1);
        CHECK(read_file(out).find("\"kinks\": []") != std::string::npos);
    }
    SUBCASE("malformed CSV row: exit 2") {
        auto bad = write_temp("bad.csv", "x,y\n0.1,0.2\n0.3,oops\n");
        CHECK(run({"estimate", "--data", bad, "--out",
                   (temp_dir() / "never.json").string()}) == 2);
    }
    SUBCASE("svg profile plot") {
        auto out = (temp_dir() / "est2.json").string();
        auto svg = (temp_dir() / "profile.svg").string();
        CHECK(run({"estimate", "--data", data_path, "--out", out, "--svg", svg}) == 0);
        CHECK(read_file(svg).find("<svg") != std::string::npos);
    }
}

TEST_CASE("worker cap follows KINKSCAN_THREADS") {
    setenv("KINKSCAN_THREADS", "3", 1);
    CHECK(worker_count() == 3);
    setenv("KINKSCAN_THREADS", "0", 1);
    CHECK(worker_count() >= 1); // 0 means auto
    setenv("KINKSCAN_THREADS", "junk", 1);
    CHECK(worker_count() >= 1);
    unsetenv("KINKSCAN_THREADS");
    CHECK(worker_count() >= 1);
}

TEST_CASE("csv parse error cites the row number") {
    std::string msg =
        error_message_of([] { dataset_from_csv("x,y\n0.1,0.2\nbroken\n"); });
    CHECK(msg.find("row 2") != std::string::npos);
}

TEST_CASE("estimate with oracle F from a latent-bearing CSV") {
    std::string cfg_text = std::string(kSingleKinkConfig) + "sim.keep_latents = true\n";
    auto cfg = write_temp("latent.cfg", cfg_text);
    auto data = (temp_dir() / "latent.csv").string();
    REQUIRE(run({"simulate", "--config", cfg, "--out", data}) == 0);
    CHECK(read_file(data).rfind("x,y,eps,F", 0) == 0);
    auto out = (temp_dir() / "latent.json").string();
    CHECK(run({"estimate", "--data", data, "--out", out, "--f-mode", "oracle"}) == 0);
    CHECK(read_file(out).find("\"f_mode\": \"oracle\"") != std::string::npos);
}

TEST_CASE("mc null and mc clt commands" * doctest::timeout(600)) {
    std::string base =
        "scenario.sigma_value = 1.0\n"
        "design.assumption = A\n"
        "design.alpha_eps = 0.6\n"
        "estimator.bandwidth_detect = 0.05\n"
        "estimator.f_mode = oracle\n"
        "estimator.upsilon_mode = oracle\n";
    SUBCASE("null calibration") {
        auto cfg = write_temp("null.cfg", base + "mc.seed = 5\nmc.reps = 60\nmc.n = 1024\n");
        auto dir = (temp_dir() / "null_out").string();
        CHECK(run({"mc", "null", "--config", cfg, "--out-dir", dir}) == 0);
        std::string summary = read_file(dir + "/null_summary.json");
        CHECK(summary.find("\"false_alarm_rate\"") != std::string::npos);
        CHECK(summary.find("\"calibration\"") != std::string::npos);
        CHECK(read_file(dir + "/null.csv").rfind("# seed=5", 0) == 0);
    }
    SUBCASE("clt study") {
        auto cfg = write_temp("clt.cfg", base + "mc.seed = 7\nmc.reps = 100\nmc.n = 1024\n" +
                                             "mc.t = 0.5\nmc.regime = A1\nmc.ks_max = 0.3\n");
        auto dir = (temp_dir() / "clt_out").string();
        CHECK(run({"mc", "clt", "--config", cfg, "--out-dir", dir}) == 0);
        std::string summary = read_file(dir + "/clt_summary.json");
        CHECK(summary.find("\"ks_distance\"") != std::string::npos);
        CHECK(summary.find("\"target_provenance\": \"upsilon_sq\"") != std::string::npos);
    }
}

TEST_CASE("mc rate command is byte deterministic" * doctest::timeout(300)) {
    std::string cfg_text =
        "scenario.kinks = 0.5:3.0\n"
        "scenario.sigma_value = 0.02\n"
        "design.assumption = A\n"
        "design.alpha_eps = 0.6\n"
        "estimator.bandwidth_detect = 0.12\n"
        "estimator.upsilon_mode = oracle\n"
        "mc.seed = 21\n"
        "mc.reps = 100\n"
        "mc.n_list = 512,1024,2048,4096\n";
    auto cfg = write_temp("rate.cfg", cfg_text);
    auto dir1 = (temp_dir() / "rate1").string();
    auto dir2 = (temp_dir() / "rate2").string();
    CHECK(run({"mc", "rate", "--config", cfg, "--out-dir", dir1}) == 0);
    CHECK(run({"mc", "rate", "--config", cfg, "--out-dir", dir2}) == 0);
    CHECK(read_file(dir1 + "/rate.csv") == read_file(dir2 + "/rate.csv"));
    CHECK(read_file(dir1 + "/rate_summary.json") == read_file(dir2 + "/rate_summary.json"));
    CHECK(read_file(dir1 + "/rate.csv").rfind("# seed=21", 0) == 0);

    // write-then-rename leaves no temp droppings behind
    for (const auto& entry : std::filesystem::directory_iterator(dir1))
        CHECK(entry.path().extension() != ".tmp");

    SUBCASE("unknown mc key is rejected") {
        auto bad = write_temp("rate_bad.cfg", cfg_text + "mc.bogus = 1\n");
        CHECK(run({"mc", "rate", "--config", bad, "--out-dir",
                   (temp_dir() / "never").string()}) == 2);
    }
}
