#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <string>

#include "wigsolve.h"

namespace {
const char* kTinyTrain = R"({
  "run": {"horizon": 0.5, "batch_size": 32, "num_test": 2, "n_adv": 1,
           "epochs": 2, "seed": 99},
  "constants": {"hbar": 1.0, "mass": 1.0, "dim": 1},
  "potential": {"name": "harmonic", "params": {"omega": 1.0}},
  "initial": {"name": "gaussian-coherent",
               "params": {"x0": 0.5, "omega": 1.0}, "freeze_alpha": true},
  "network": {"hidden_layers": 1, "hidden_width": 4, "d_base": 2},
  "training": {"checkpoint_every": 1, "heldout_every": 1},
  "output_dir": "capi_out"
})";
}

TEST_CASE("version and null handling") {
    CHECK(std::string(wig_version()) == "0.1.0");
    CHECK(wig_config_load(nullptr, nullptr) == WIG_ERR);
}

TEST_CASE("missing config file reports a config error with a message") {
    wig_config_t* cfg = nullptr;
    CHECK(wig_config_load("no_such_file.json", &cfg) == WIG_ERR_CONFIG);
    CHECK(std::string(wig_last_error()).find("no_such_file") !=
          std::string::npos);
}

TEST_CASE("parse, override, dump") {
    wig_config_t* cfg = nullptr;
    REQUIRE(wig_config_parse(kTinyTrain, &cfg) == WIG_OK);
    CHECK(wig_config_set_seed(cfg, 123) == WIG_OK);
    CHECK(wig_config_set_threads(cfg, 0) == WIG_ERR_CONFIG);
    CHECK(wig_config_set_threads(cfg, 1) == WIG_OK);
    CHECK(wig_config_set_output_dir(cfg, "capi_out") == WIG_OK);
    char* text = nullptr;
    REQUIRE(wig_config_dump(cfg, &text) == WIG_OK);
    CHECK(std::string(text).find("\"seed\": 123") != std::string::npos);
    wig_string_free(text);
    wig_config_free(cfg);
}

TEST_CASE("bad json is a config error") {
    wig_config_t* cfg = nullptr;
    CHECK(wig_config_parse("{ not json", &cfg) == WIG_ERR_CONFIG);
    CHECK(wig_config_parse(R"({"unknown_key": 1})", &cfg) == WIG_ERR_CONFIG);
}

TEST_CASE("train, load the checkpoint, sample through the handle") {
    std::filesystem::remove_all("capi_out");
    wig_config_t* cfg = nullptr;
    REQUIRE(wig_config_parse(kTinyTrain, &cfg) == WIG_OK);
    REQUIRE(wig_cmd_train(cfg, nullptr) == WIG_OK);
    REQUIRE(std::filesystem::exists("capi_out/checkpoint.bin"));
    REQUIRE(std::filesystem::exists("capi_out/metrics.csv"));

    wig_model_t* model = nullptr;
    REQUIRE(wig_model_load("capi_out/checkpoint.bin", &model) == WIG_OK);
    CHECK(wig_model_dim(model) == 1);
    CHECK(wig_model_alpha(model) == 0.0);
    CHECK(wig_model_has_minus(model) == 0);
    CHECK(wig_model_horizon(model) == 0.5);

    const uint64_t n = 64;
    std::vector<double> xp(n * 2);
    double ap = 0, am = 0;
    REQUIRE(wig_model_sample(model, 0.0, n, 4321, xp.data(), nullptr, &ap,
                             &am) == WIG_OK);
    CHECK(ap == 1.0);
    CHECK(am == 0.0);
    // t = 0 samples follow the initial coherent state around x0 = 0.5
    double mean = 0.0;
    for (uint64_t i = 0; i < n; ++i) mean += xp[2 * i];
    mean /= n;
    CHECK(std::abs(mean - 0.5) < 0.5);

    // deterministic under the seed
    std::vector<double> xp2(n * 2);
    REQUIRE(wig_model_sample(model, 0.0, n, 4321, xp2.data(), nullptr, nullptr,
                             nullptr) == WIG_OK);
    CHECK(xp == xp2);

    // out-of-range time
    CHECK(wig_model_sample(model, 2.0, n, 1, xp.data(), nullptr, nullptr,
                           nullptr) == WIG_ERR_CONFIG);
    wig_model_free(model);

    // evaluate through the command surface
    const double times[2] = {0.0, 0.5};
    REQUIRE(wig_cmd_evaluate(cfg, "capi_out/checkpoint.bin", times, 2, 128) ==
            WIG_OK);
    CHECK(std::filesystem::exists("capi_out/samples.csv"));
    CHECK(std::filesystem::exists("capi_out/marginals.csv"));
    CHECK(std::filesystem::exists("capi_out/negativity.csv"));
    CHECK(std::filesystem::exists("capi_out/moments.csv"));

    wig_config_free(cfg);
    std::filesystem::remove_all("capi_out");
}

TEST_CASE("unreadable checkpoint is reported") {
    wig_model_t* model = nullptr;
    CHECK(wig_model_load("missing_checkpoint.bin", &model) == WIG_ERR);
}
