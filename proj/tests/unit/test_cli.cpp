#include <gtest/gtest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sys/wait.h>

#include "tvl/absorption.hpp"
#include "tvl/constructions.hpp"
#include "tvl/json_io.hpp"

using namespace tvl;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

Run run_tvl(const std::string& args, const std::string& env = "") {
    const char* bin = std::getenv("TVL_BIN");
    if (!bin) return {};
    std::string cmd = env + (env.empty() ? "" : " ") + bin + " " + args + " 2>/dev/null";
    Run r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    char buf[4096];
    for (std::size_t k; (k = fread(buf, 1, sizeof buf, p)) > 0;) r.out.append(buf, k);
    int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

Json parse(const Run& r) { return Json::parse(r.out); }

std::string tmp(const std::string& name) { return ::testing::TempDir() + name; }

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        if (!std::getenv("TVL_BIN")) GTEST_SKIP() << "TVL_BIN not set";
    }
};

}  // namespace

TEST_F(Cli, GenCyclicFour) {
    auto r = run_tvl("gen --family cyclic --n 4");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(latin_from_json(parse(r)), group_table(FiniteAbelianGroup::cyclic(4)));
    auto a = run_tvl("gen --family abelian:2x2");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(parse(a)["n"], 4);
    auto m = run_tvl("gen --family maillet:3:2:5");
    ASSERT_EQ(m.code, 0);
    EXPECT_TRUE(latin_from_json(parse(m)).is_latin_square());
    EXPECT_EQ(run_tvl("gen --family random:3:200 --n 6").code, 0);
}

TEST_F(Cli, SolveExactCyclicSix) {
    auto r = run_tvl("solve --exact --family cyclic --n 6");
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(r.out, "{\"size\":5,\"optimal\":true}\n");
    auto w = parse(run_tvl("solve --n 7 --witness"));
    EXPECT_EQ(w["size"], 7);
    EXPECT_EQ(w["cells"].size(), 7u);
    auto csv = run_tvl("solve --n 6 --format csv");
    EXPECT_EQ(csv.out, "size,optimal\n5,true\n");
}

TEST_F(Cli, SolveHeuristicsAndGraphInput) {
    auto g = latin_to_graph(random_latin_square(8, 1, 300));
    std::string path = tmp("tvl_graph.json");
    std::ofstream(path) << to_json(g).dump();
    auto n = parse(run_tvl("solve --nibble --in " + path + " --seed 2"));
    auto a = parse(run_tvl("solve --augment --in " + path + " --seed 2"));
    EXPECT_FALSE(n["optimal"].get<bool>());
    EXPECT_GE(a["size"].get<int>(), n["size"].get<int>());
    EXPECT_LE(a["size"].get<int>(), 8);
}

TEST_F(Cli, ExitCodes) {
    EXPECT_EQ(run_tvl("").code, 64);
    EXPECT_EQ(run_tvl("frobnicate").code, 64);
    EXPECT_EQ(run_tvl("solve --no-such-flag").code, 64);
    EXPECT_EQ(run_tvl("solve --exact --nibble --n 5").code, 64);
    EXPECT_EQ(run_tvl("gen --format xml --n 3").code, 64);
    EXPECT_EQ(run_tvl("gen --n 0").code, 1);
    EXPECT_EQ(run_tvl("gen --family nope").code, 1);
    EXPECT_EQ(run_tvl("sts --m 4").code, 1);
    EXPECT_EQ(run_tvl("solve --in /nonexistent/file.json").code, 1);
    EXPECT_EQ(run_tvl("absorb --demo --targets 0").code, 1);
    // no edge switcher has order below 3
    EXPECT_EQ(run_tvl("absorb --demo --targets 5 --max-order 2").code, 2);
    EXPECT_EQ(run_tvl("addstep --demo --id-edges 3 --rb-edges 20 --steps 1").code, 2);
    EXPECT_EQ(run_tvl("gen --help").code, 0);
}

TEST_F(Cli, SeedEnvAndDeterminism) {
    auto a = run_tvl("sts --reduce --m 5 --seed 7");
    auto b = run_tvl("sts --reduce --m 5", "TVL_SEED=7");
    auto c = run_tvl("sts --reduce --m 5 --seed 8");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_NE(a.out, c.out);
    EXPECT_EQ(parse(a)["seed"], 7);
    // flag beats the environment
    EXPECT_EQ(run_tvl("sts --reduce --m 5 --seed 7", "TVL_SEED=8").out, a.out);
    EXPECT_EQ(run_tvl("classes --family random:2:300 --n 8 --seed 3").out,
              run_tvl("classes --family random:2:300 --n 8 --seed 3").out);
}

TEST_F(Cli, OutFileAndPretty) {
    std::string path = tmp("tvl_out.json");
    std::remove(path.c_str());
    auto r = run_tvl("gen --n 3 --out " + path);
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream f(path);
    Json j = Json::parse(f);
    EXPECT_EQ(j["n"], 3);
    auto p = run_tvl("gen --n 3 --pretty");
    EXPECT_NE(p.out.find("\n  "), std::string::npos);
    EXPECT_EQ(Json::parse(p.out), j);
}

TEST_F(Cli, SwitchersViews) {
    std::string fam = "--family random:1:500 --n 7";
    auto m = run_tvl("switchers --matrix --format csv " + fam);
    ASSERT_EQ(m.code, 0);
    EXPECT_EQ(m.out.substr(0, 9), "c,d,w_cd\n");
    auto j = parse(run_tvl("switchers " + fam));
    ASSERT_FALSE(j["weights"].empty());
    auto first = j["weights"][0];
    auto pair = parse(run_tvl("switchers --pair " + std::to_string(first[0].get<int>()) + "," +
                          std::to_string(first[1].get<int>()) + " " + fam));
    EXPECT_EQ(pair["count"], first[2]);
    auto bounds = parse(run_tvl("switchers --bounds " + fam));
    EXPECT_TRUE(bounds["ok"].get<bool>());
    EXPECT_EQ(bounds["keys"].size(), 5u);
    // abelian tables have none
    EXPECT_EQ(parse(run_tvl("switchers --n 7"))["total"], 0);
}

TEST_F(Cli, ClassesAndExchange) {
    auto j = parse(run_tvl("classes --quantiles --family random:1:500 --n 9"));
    EXPECT_FALSE(j["classes"].empty());
    auto t = parse(run_tvl("classes --test-pair 0,1 --trials 4 --epsilon 0 --family random:1:500 --n 9"));
    EXPECT_EQ(t["trials"].size(), 4u);
    EXPECT_EQ(t["forbidden_size"], 0);
}

TEST_F(Cli, ExpanderExtractAndVerify) {
    auto j = parse(run_tvl("expander --extract --graph er:50:0.3 --seed 1"));
    double d = j["d"], dh = j["h"]["d"];
    EXPECT_GE(dh, d / 2);
    EXPECT_GE(j["h"]["min_degree"].get<double>(), dh / 2);
    auto v = parse(run_tvl("expander --verify --graph complete:8 --mode exact --alpha 0.5"));
    EXPECT_TRUE(v["passed"].get<bool>());
    auto c = parse(run_tvl("expander --verify --graph cycle:10 --alpha 0.5"));
    EXPECT_FALSE(c["passed"].get<bool>());
    EXPECT_FALSE(c["witness"]["u"].empty());
}

TEST_F(Cli, AuditGroupTable) {
    auto j = parse(run_tvl("audit --n 7 --p 1 --epsilon 0.5 --alpha 1e-4 --properties 1-7 --mode exact"));
    EXPECT_TRUE(j["passed"].get<bool>());
    EXPECT_EQ(j["properties"].size(), 7u);
    auto part = parse(run_tvl("audit --n 7 --properties 1,3"));
    EXPECT_TRUE(part["properties"][0]["checked"].get<bool>());
    EXPECT_FALSE(part["properties"][1]["checked"].get<bool>());
    EXPECT_EQ(run_tvl("audit --n 7 --properties 0-9").code, 1);
}

TEST_F(Cli, AbsorbTemplateAddstep) {
    auto a = parse(run_tvl("absorb --targets 5 --demo"));
    EXPECT_TRUE(a["valid"].get<bool>());
    EXPECT_EQ(a["targets"].size(), 5u);
    EXPECT_EQ(a["vertices"].size(), 2 * a["colours"].size() - 2);

    auto d = parse(run_tvl("absorb --demo --targets 3 --m0 2 --seed 4"));
    EXPECT_TRUE(d["valid"].get<bool>());

    auto k = parse(run_tvl("template --h 9 --seed 1"));
    EXPECT_TRUE(k["valid"].get<bool>());
    EXPECT_EQ(k["y"], 6);

    auto s = parse(run_tvl("addstep --demo --seed 3"));
    ASSERT_EQ(s["steps"].size(), 5u);
    for (const auto& st : s["steps"]) EXPECT_TRUE(st["balanced"].get<bool>());
    EXPECT_EQ(s["final"]["m_id"].size(), 25u);

    // replay the first demo pair from a file
    Json spec;
    spec["state"] = s["initial"];
    spec["pairs"] = Json::array({s["steps"][0]["pair"]});
    std::string path = tmp("tvl_pairs.json");
    std::ofstream(path) << spec.dump();
    auto r = run_tvl("addstep --n 101 --seed 3 --pairs " + path);
    ASSERT_EQ(r.code, 0);
    EXPECT_EQ(parse(r)["final"], s["steps"][0]["state"]);
}

TEST_F(Cli, SteinerViews) {
    auto s = parse(run_tvl("sts --construct bose --m 3"));
    EXPECT_EQ(s["n"], 9);
    EXPECT_EQ(s["triples"].size(), 12u);
    auto b = parse(run_tvl("sts --brouwer --seeds 50 --m 5"));
    EXPECT_GE(b["best"].get<int>(), 4);
    EXPECT_TRUE(b["achieved"].get<bool>());
    std::string path = tmp("tvl_sts.json");
    std::ofstream(path) << s.dump();
    auto again = parse(run_tvl("sts --brouwer --seeds 10 --in " + path));
    EXPECT_EQ(again["best"], 3);
    auto par = parse(run_tvl("sts --brouwer --seeds 20 --m 5 --threads 3"));
    auto ser = parse(run_tvl("sts --brouwer --seeds 20 --m 5 --threads 1"));
    EXPECT_EQ(par["size_per_seed"], ser["size_per_seed"]);
}

TEST_F(Cli, ReportTable) {
    auto r = run_tvl("report --from 2 --to 7 --format csv");
    ASSERT_EQ(r.code, 0);
    EXPECT_NE(r.out.find("6,5,true,0,false,false,true"), std::string::npos);
    EXPECT_NE(r.out.find("7,7,true,133,true,true,true"), std::string::npos);
    EXPECT_EQ(run_tvl("report --to 40").code, 1);
}
