// Copyright 2026 The dfe Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "dfe/bench.hpp"
#include "dfe/state_io.hpp"

using namespace dfe;
namespace fs = std::filesystem;

namespace {

struct RunResult {
    int code;
    std::string out;
};

RunResult run(const std::string &args) {
    const std::string cmd = std::string(DFE_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE *pipe = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t got = std::fread(buf, 1, sizeof(buf), pipe)) {
        out.append(buf, got);
    }
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

class Cli : public ::testing::Test {
   protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("dfe_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override {
        fs::remove_all(dir_);
    }
    std::string path(const std::string &name) const {
        return (dir_ / name).string();
    }
    fs::path dir_;
};

std::string slurp(const std::string &p) {
    std::ifstream f(p);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

}  // namespace

TEST_F(Cli, gen_state_hits_fidelity) {
    const auto r = run("gen-state --target ghz --n 3 --fidelity 0.8 --seed 1 --out " + path("r.json"));
    ASSERT_EQ(r.code, 0);
    const auto rho = read_state_file(path("r.json"));
    EXPECT_NEAR(fidelity(rho, Ghz{3}), 0.8, 1e-10);
}

TEST_F(Cli, gen_state_fidelity_one_is_exact_dicke) {
    ASSERT_EQ(run("gen-state --target dicke --n 4 --k 2 --fidelity 1 --seed 0 --out " + path("d.json")).code, 0);
    const auto rho = read_state_file(path("d.json"));
    EXPECT_EQ(rho.matrix(), target_density(Dicke{4, 2}).matrix());
}

TEST_F(Cli, usage_errors) {
    EXPECT_EQ(run("gen-state --target dicke --n 4 --fidelity 1 --seed 0 --out " + path("x.json")).code, 2);
    EXPECT_EQ(run("gen-state --target ghz --n 4 --k 2 --fidelity 1 --seed 0 --out " + path("x.json")).code, 2);
    EXPECT_EQ(run("gen-state --target ghz --n 4 --fidelity 1.5 --seed 0 --out " + path("x.json")).code, 2);
    EXPECT_EQ(run("gen-state --target bogus --n 4 --fidelity 1 --seed 0 --out " + path("x.json")).code, 2);
    EXPECT_EQ(run("").code, 2);
    EXPECT_EQ(run("coeffs --n 3 --k 4").code, 2);
    EXPECT_EQ(run("bench --target ghz --n-range 2..3 --epsilon 0.1 --delta 0.1 --trials 0 --seed 1 --out-dir " +
                  path("b"))
                  .code,
              2);
    EXPECT_EQ(run("gen-state --target ghz --n 20 --fidelity 1 --seed 0 --out " + path("x.json")).code, 2);
}

TEST_F(Cli, estimate_json_and_override) {
    ASSERT_EQ(run("gen-state --target ghz --n 3 --fidelity 1 --seed 0 --out " + path("s.json")).code, 0);
    auto r = run("estimate --state " + path("s.json") +
                 " --target ghz --epsilon 0.1 --delta 0.1 --method shadow --seed 3");
    ASSERT_EQ(r.code, 0);
    auto j = nlohmann::json::parse(r.out);
    EXPECT_EQ(j["method"], "shadow");
    EXPECT_EQ(j["plan_n"], plan(Ghz{3}, {0.1, 0.1}).samples);
    EXPECT_EQ(j["measurements"], j["plan_n"]);
    EXPECT_NEAR(j["estimate"].get<double>(), 1.0, 0.1);

    r = run("estimate --state " + path("s.json") +
            " --target ghz --epsilon 0.1 --delta 0.1 --method shadow --seed 3 --n-samples 10");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out)["measurements"], 10);

    r = run("estimate --state " + path("s.json") +
            " --target ghz --epsilon 0.1 --delta 0.1 --method vanilla --seed 3 --n-samples 10");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(nlohmann::json::parse(r.out)["measurements"], 10);
}

TEST_F(Cli, estimate_is_deterministic) {
    ASSERT_EQ(run("gen-state --target w --n 3 --fidelity 0.4 --seed 2 --out " + path("s.json")).code, 0);
    const std::string args = "estimate --state " + path("s.json") + " --target w --epsilon 0.1 --delta 0.1 --seed 9";
    const auto a = run(args + " --threads 1");
    const auto b = run(args + " --threads 3");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST_F(Cli, baseline_w3_within_leading_order_count) {
    ASSERT_EQ(run("gen-state --target w --n 3 --fidelity 0.6 --seed 4 --out " + path("s.json")).code, 0);
    const auto r = run("estimate --state " + path("s.json") +
                       " --target w --epsilon 0.1 --delta 0.1 --method baseline --seed 1");
    ASSERT_EQ(r.code, 0);
    const auto j = nlohmann::json::parse(r.out);
    EXPECT_LE(j["measurements"].get<double>(), 8.0 * std::log(40.0) / 0.01 * 9.0);
    EXPECT_EQ(run("estimate --state " + path("s.json") +
                  " --target w --epsilon 0.1 --delta 0.1 --method baseline --seed 1 --n-samples 5")
                  .code,
              2);
}

TEST_F(Cli, estimate_errors) {
    ASSERT_EQ(run("gen-state --target ghz --n 3 --fidelity 0.5 --seed 0 --out " + path("s.json")).code, 0);
    EXPECT_EQ(run("estimate --state " + path("s.json") + " --target ghz --n 4 --epsilon 0.1 --delta 0.1 --seed 1").code,
              3);
    EXPECT_EQ(run("estimate --state " + path("s.json") + " --target basis --b 01 --epsilon 0.1 --delta 0.1 --seed 1")
                  .code,
              3);
    EXPECT_EQ(run("estimate --state " + path("missing.json") + " --target ghz --epsilon 0.1 --delta 0.1 --seed 1").code,
              4);
    {
        std::ofstream f(path("garbage.json"));
        f << "{";
    }
    EXPECT_EQ(run("estimate --state " + path("garbage.json") + " --target ghz --epsilon 0.1 --delta 0.1 --seed 1").code,
              4);
}

TEST_F(Cli, coeffs_tables) {
    auto j = nlohmann::json::parse(run("coeffs --n 4 --k 2").out);
    EXPECT_EQ(j["c"]["0"], 3);
    EXPECT_EQ(j["c"]["1"], 12);
    EXPECT_EQ(j["S"], 15.5);
    j = nlohmann::json::parse(run("coeffs --n 3 --k 1").out);
    EXPECT_EQ(j["c"].size(), 1u);
    EXPECT_EQ(j["c"]["0"], 3);
    EXPECT_EQ(j["S"], 3.5);
    j = nlohmann::json::parse(run("coeffs --n 2 --k 2").out);
    EXPECT_TRUE(j["c"].empty());
    EXPECT_EQ(j["S"], 0.5);
    j = nlohmann::json::parse(run("coeffs --n 4 --k 2 --epsilon 0.1 --delta 0.1").out);
    EXPECT_EQ(j["plan_n_for"]["n"], plan(Dicke{4, 2}, {0.1, 0.1}).samples);
}

TEST_F(Cli, bench_outputs) {
    const std::string args = "bench --target ghz --n-range 2..4 --epsilon 0.2 --delta 0.2 --trials 50 --seed 3 "
                             "--grid-step 0.25 --out-dir ";
    ASSERT_EQ(run(args + path("a")).code, 0);
    const auto summary = nlohmann::json::parse(slurp(path("a/summary.json")));
    std::map<std::string, int> per_method;
    for (const auto &g : summary["groups"]) {
        ++per_method[g["method"].get<std::string>()];
    }
    EXPECT_EQ(per_method["baseline"], 3);
    EXPECT_EQ(per_method["shadow"], 3);
    EXPECT_EQ(per_method["vanilla"], 3);

    std::ifstream csv(path("a/results.csv"));
    const auto records = read_csv(csv);
    EXPECT_EQ(records.size(), 3u * 5 * 50 * 3);
    EXPECT_TRUE(fs::exists(path("a/by_fidelity.csv")));

    ASSERT_EQ(run(args + path("b")).code, 0);
    EXPECT_EQ(slurp(path("a/results.csv")), slurp(path("b/results.csv")));
    EXPECT_EQ(slurp(path("a/summary.json")), slurp(path("b/summary.json")));
}
