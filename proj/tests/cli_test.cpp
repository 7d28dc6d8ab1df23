#include <gtest/gtest.h>

#include <filesystem>
#include <set>
#include <sstream>

#include <bayesclust/cli.hpp>

using namespace bayesclust;
using json = nlohmann::ordered_json;

namespace {

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = std::filesystem::temp_directory_path() /
               ("bclust_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        std::filesystem::remove_all(dir_);
        std::filesystem::create_directories(dir_);
    }
    void TearDown() override { std::filesystem::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string write(const std::string& name, const std::string& content) const {
        io::write_file_atomic(dir_ / name, content);
        return path(name);
    }

    int run(std::vector<std::string> args) {
        out_.str("");
        err_.str("");
        return cli::run(args, out_, err_);
    }

    json result() const { return json::parse(out_.str())["result"]; }

    std::filesystem::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

// {A x6, B x3, C x1}
std::string abc_file() {
    std::string s;
    for (int i = 0; i < 6; ++i) s += "1,1,2,2\n";
    for (int i = 0; i < 3; ++i) s += "1,2,2,2\n";
    s += "1,2,3,4\n";
    return s;
}

std::set<std::vector<int>> hpd_labels(const json& r) {
    std::set<std::vector<int>> out;
    for (const auto& m : r["hpd"]["members"]) out.insert(m["labels"].get<std::vector<int>>());
    return out;
}

} // namespace

TEST_F(CliTest, SummariseReportsPartitionAndEpl) {
    const auto draws = write("d.csv", "1,1,2,2\n1,2,1,2\n2,2,1,1\n");
    ASSERT_EQ(run({"summarise", draws, "--loss", "vi", "--restarts", "10", "--seed", "1"}), 0) << err_.str();
    const auto r = result();
    EXPECT_EQ(r["partition"].get<std::vector<int>>(), (std::vector<int>{1, 1, 2, 2}));
    EXPECT_EQ(r["K"], 2);
    EXPECT_NEAR(r["epl"].get<double>(), 2 * std::log(2.0) / 3, 1e-12);
    const auto report = json::parse(out_.str());
    EXPECT_EQ(report["seed"], 1);
    EXPECT_EQ(report["inputs"][0]["path"], draws);
}

TEST_F(CliTest, SummariseDegenerateAndExhaustiveGuard) {
    const auto same = write("same.csv", "3,3,1,2\n3,3,1,2\n3,3,1,2\n");
    ASSERT_EQ(run({"summarise", same, "--partition-out", path("center.csv")}), 0);
    EXPECT_EQ(result()["epl"].get<double>(), 0.0);
    EXPECT_EQ(result()["partition"].get<std::vector<int>>(), (std::vector<int>{1, 1, 2, 3}));
    EXPECT_EQ(io::read_file(path("center.csv")), "1,1,2,3\n");

    ASSERT_EQ(run({"summarise", same, "--exhaustive"}), 0);
    EXPECT_EQ(result()["method"], "exhaustive");

    const auto wide = write("wide.csv", "1,1,1,1,2,2,2,2,3,3,3,3\n1,2,1,2,1,2,1,2,1,2,1,2\n");
    EXPECT_EQ(run({"summarise", wide, "--exhaustive"}), cli::exit_refused);
    EXPECT_NE(err_.str().find("exhaustive search refused"), std::string::npos);
}

TEST_F(CliTest, ParseAndUsageErrors) {
    const auto ragged = write("r.csv", "1,2,3\n1,2\n");
    EXPECT_EQ(run({"summarise", ragged}), cli::exit_parse);
    EXPECT_NE(err_.str().find("row 2"), std::string::npos);
    const auto ok = write("ok.csv", "1,2\n");
    EXPECT_EQ(run({"summarise", ok, "--loss", "rand"}), cli::exit_usage);
    EXPECT_EQ(run({"summarise", path("absent.csv")}), cli::exit_parse);
    EXPECT_EQ(run({"frobnicate"}), cli::exit_usage);
    EXPECT_EQ(run({"--help"}), 0);
}

TEST_F(CliTest, BallDegenerateAndAlphaGuard) {
    const auto same = write("same.csv", "1,2,2\n1,2,2\n");
    ASSERT_EQ(run({"ball", same, "--distances", path("dist.csv")}), 0) << err_.str();
    const auto r = result();
    EXPECT_EQ(r["radius"].get<double>(), 0.0);
    for (const char* key : {"horizontal", "vertical_upper", "vertical_lower"}) {
        ASSERT_EQ(r["bounds"][key].size(), 1u);
        EXPECT_EQ(r["bounds"][key][0]["labels"].get<std::vector<int>>(), (std::vector<int>{1, 2, 2}));
    }
    EXPECT_EQ(io::read_file(path("dist.csv")), "draw_index,distance\n0,0\n1,0\n");

    for (const char* bad : {"0", "1"}) EXPECT_EQ(run({"ball", same, "--alpha", bad}), cli::exit_usage);
}

TEST_F(CliTest, BallWithCenterFileContainsAnchors) {
    const auto anchors = write("anchors.csv", "1,1,1,1,2,2,2,2,3,3,3,3\n1,2,3,1,2,3,1,2,3,1,2,3\n1,1,2,2,3,3,4,4,5,5,6,6\n");
    ASSERT_EQ(run({"simulate", "multimodal", "--anchors", anchors, "--weights", "0.5,0.3,0.2", "--flips", "2",
                   "--noise-fraction", "0.05", "--draws", "300", "--seed", "4", "-o", path("draws.csv")}),
              0)
        << err_.str();
    ASSERT_EQ(run({"ball", path("draws.csv"), "--alpha", "0.05"}), 0) << err_.str();
    std::set<std::vector<int>> members;
    const auto ball = result();
    for (const auto& m : ball["members"]) members.insert(m["labels"].get<std::vector<int>>());
    const auto anchor_rows = io::read_label_matrix(anchors);
    for (const auto& a : anchor_rows.draws()) EXPECT_TRUE(members.count(a.labels()));

    const auto center = write("center.csv", "1,1,1,1,2,2,2,2,3,3,3,3\n");
    ASSERT_EQ(run({"ball", path("draws.csv"), "--center", center}), 0);
    EXPECT_EQ(result()["center_source"], center);
    const auto short_center = write("short.csv", "1,1,2\n");
    EXPECT_EQ(run({"ball", path("draws.csv"), "--center", short_center}), cli::exit_usage);
}

TEST_F(CliTest, HpdModes) {
    const auto abc = write("abc.csv", abc_file());
    const std::set<std::vector<int>> ab{{1, 1, 2, 2}, {1, 2, 2, 2}};
    ASSERT_EQ(run({"hpd", abc, "--gamma", "0.25"}), 0) << err_.str();
    EXPECT_EQ(hpd_labels(result()), ab);
    ASSERT_EQ(run({"hpd", abc, "--mass", "0.9"}), 0);
    EXPECT_EQ(hpd_labels(result()), ab);
    EXPECT_EQ(result()["hpd"]["mode"], "mass");
    EXPECT_EQ(run({"hpd", abc, "--gamma", "1.5"}), cli::exit_usage);
    EXPECT_EQ(run({"hpd", abc}), cli::exit_usage);
    EXPECT_EQ(run({"hpd", abc, "--gamma", "0.2", "--mass", "0.5"}), cli::exit_usage);
}

TEST_F(CliTest, PsmExportAndLowerBoundOptimizer) {
    const auto two = write("two.csv", "1,1,2,2\n1,2,1,2\n");
    ASSERT_EQ(run({"psm", two, "-o", path("psm.csv")}), 0) << err_.str();
    EXPECT_EQ(io::read_file(path("psm.csv")), "1,0.5,0.5,0\n0.5,1,0,0.5\n0.5,0,1,0.5\n0,0.5,0.5,1\n");

    const auto same = write("same.csv", "1,2,1,3\n1,2,1,3\n");
    ASSERT_EQ(run({"psm", same, "-o", path("psm2.csv"), "--vi-lb-optimize"}), 0);
    EXPECT_EQ(io::read_file(path("psm2.csv")), "1,0,1,0\n0,1,0,0\n1,0,1,0\n0,0,0,1\n");
    EXPECT_EQ(result()["vi_lower_bound"]["partition"].get<std::vector<int>>(), (std::vector<int>{1, 2, 1, 3}));

    EXPECT_EQ(run({"psm", two, "-o", path("no/such/dir/psm.csv")}), cli::exit_io);
}

TEST_F(CliTest, CompareLossesTabulatesEveryLoss) {
    const auto abc = write("abc.csv", abc_file());
    ASSERT_EQ(run({"compare-losses", abc, "--seed", "2"}), 0);
    const auto rows = result()["rows"];
    ASSERT_EQ(rows.size(), 4u);
    std::set<std::string> names;
    for (const auto& r : rows) {
        names.insert(r["loss"].get<std::string>());
        EXPECT_GE(r["K"].get<int>(), 1);
        EXPECT_GE(r["epl"].get<double>(), 0.0);
    }
    EXPECT_EQ(names, (std::set<std::string>{"binder", "vi", "nvi", "nid"}));
}

TEST_F(CliTest, SimulateUniformSquareAndGmm) {
    ASSERT_EQ(run({"simulate", "uniform-square", "-n", "200", "--seed", "7", "-o", path("data.csv")}), 0);
    const auto data = io::read_dataset(path("data.csv"));
    EXPECT_EQ(data.rows(), 200u);
    EXPECT_EQ(data.cols(), 2u);
    for (double v : data.values()) EXPECT_LE(std::abs(v), 1.0);
    EXPECT_EQ(data, gen_uniform_square(200, 7));

    ASSERT_EQ(run({"simulate", "gmm", "-n", "150", "--centers", "-5,0 0,0 5,0", "--sd", "0.5", "--seed", "3", "-o",
                   path("gmm.csv"), "--labels-out", path("truth.csv")}),
              0)
        << err_.str();
    EXPECT_EQ(result()["true_K"], 3);
    EXPECT_EQ(io::read_label_matrix(path("truth.csv")).items(), 150u);
}

TEST_F(CliTest, SimulateMultimodalWithoutFlipsEmitsAnchors) {
    const auto anchors = write("anchors.csv", "1,1,2,2\n1,2,1,2\n1,1,1,2\n");
    ASSERT_EQ(run({"simulate", "multimodal", "--anchors", anchors, "--flips", "0", "--draws", "200", "-o",
                   path("draws.csv")}),
              0);
    std::set<std::vector<int>> distinct;
    const auto sample = io::read_label_matrix(path("draws.csv"));
    for (const auto& d : sample.draws()) distinct.insert(d.labels());
    EXPECT_EQ(distinct, (std::set<std::vector<int>>{{1, 1, 2, 2}, {1, 2, 1, 2}, {1, 1, 1, 2}}));
}

TEST_F(CliTest, SimulateGibbsIsByteDeterministic) {
    const std::vector<std::string> base{"simulate", "gibbs", "-n", "30", "--iters", "120", "--burnin", "20",
                                        "--thin", "5", "--seed", "7"};
    auto a = base;
    a.insert(a.end(), {"-o", path("a.csv"), "--data-out", path("data.csv")});
    auto b = base;
    b.insert(b.end(), {"-o", path("b.csv")});
    ASSERT_EQ(run(a), 0) << err_.str();
    const auto first = result();
    ASSERT_EQ(run(b), 0);
    EXPECT_EQ(io::read_file(path("a.csv")), io::read_file(path("b.csv")));
    EXPECT_EQ(io::read_label_matrix(path("a.csv")).size(), 20u);
    EXPECT_EQ(first["occupied_K_per_draw"], result()["occupied_K_per_draw"]);

    // Re-running on the exported dataset gives the same chain.
    ASSERT_EQ(run({"simulate", "gibbs", "--data", path("data.csv"), "--iters", "120", "--burnin", "20", "--thin", "5",
                   "--seed", "7", "-o", path("c.csv")}),
              0);
    EXPECT_EQ(io::read_file(path("a.csv")), io::read_file(path("c.csv")));
}

TEST_F(CliTest, InvalidHyperparametersLeaveNoOutput) {
    EXPECT_EQ(run({"simulate", "gibbs", "-n", "10", "--kappa0", "-1", "-o", path("x.csv")}), cli::exit_usage);
    EXPECT_EQ(run({"simulate", "gibbs", "-n", "10", "--iters", "5", "--burnin", "10", "-o", path("x.csv")}),
              cli::exit_usage);
    EXPECT_FALSE(std::filesystem::exists(path("x.csv")));
    EXPECT_EQ(run({"simulate", "uniform-square", "-n", "0", "-o", path("y.csv")}), cli::exit_usage);
    EXPECT_FALSE(std::filesystem::exists(path("y.csv")));
}

TEST_F(CliTest, ReportPayloadIsReproducible) {
    const auto abc = write("abc.csv", abc_file());
    ASSERT_EQ(run({"ball", abc, "--seed", "3", "-o", path("r1.json")}), 0);
    ASSERT_EQ(run({"ball", abc, "--seed", "3", "-o", path("r2.json")}), 0);
    const auto r1 = json::parse(io::read_file(path("r1.json")));
    const auto r2 = json::parse(io::read_file(path("r2.json")));
    EXPECT_EQ(r1["result"].dump(), r2["result"].dump());
    EXPECT_TRUE(r1.contains("timing_ms"));
}
