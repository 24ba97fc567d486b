#include <gtest/gtest.h>

#include <csignal>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "mtmc/cli.hpp"
#include "oracles.hpp"
#include "test_server.hpp"

extern char** environ;

namespace fs = std::filesystem;
using mtmc::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(const std::vector<std::string>& args) {
    std::ostringstream out, err;
    const int code = mtmc::run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() /
               ("mtmc_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    void write(const std::string& name, const std::string& text) const { mtmc::write_file(path(name), text); }

    /// Writes a matrix file for rows via the library serializer.
    std::string matrix_file(const std::vector<std::vector<double>>& rows, const std::string& name = "m.json") const {
        write(name, mtmc::serialize_matrix(mtmc::testing::matrix_from_rows(rows)));
        return path(name);
    }

    std::string synth_matrix(int combinations = 100) const {
        EXPECT_EQ(run({"synth", "--combinations", std::to_string(combinations), "--out-runs", path("runs.csv"),
                       "--out-combos", path("combos.json")})
                      .code,
                  0);
        EXPECT_EQ(
            run({"criteria", "--runs", path("runs.csv"), "--combos", path("combos.json"), "--out", path("synth.json")})
                .code,
            0);
        return path("synth.json");
    }

    fs::path dir_;
};

} // namespace

TEST_F(CliTest, UsageErrors) {
    EXPECT_EQ(run({}).code, 2);
    EXPECT_EQ(run({"bogus"}).code, 2);
    EXPECT_EQ(run({"pareto", "--matrix", "x", "--unknown", "1"}).code, 2);
    EXPECT_EQ(run({"pareto"}).code, 2);
    EXPECT_EQ(run({"pareto", "--matrix", "x", "--format", "xml"}).code, 2);
    const auto help = run({"--help"});
    EXPECT_EQ(help.code, 0);
    EXPECT_NE(help.out.find("sweep"), std::string::npos);
}

TEST_F(CliTest, SynthAndCriteriaPaperScale) {
    const auto s = run({"synth", "--out-runs", path("runs.csv"), "--out-combos", path("combos.json")});
    ASSERT_EQ(s.code, 0) << s.err;
    std::ifstream in(path("runs.csv"));
    std::size_t lines = 0;
    for (std::string line; std::getline(in, line);) ++lines;
    EXPECT_EQ(lines, 75001u);

    const auto c = run({"criteria", "--runs", path("runs.csv"), "--combos", path("combos.json"), "--out", path("m.json")});
    ASSERT_EQ(c.code, 0) << c.err;
    EXPECT_NE(c.out.find("combinations: 100"), std::string::npos);
    EXPECT_NE(c.out.find("tasks: 5"), std::string::npos);
    EXPECT_NE(c.out.find("criteria: 4"), std::string::npos);
    EXPECT_EQ(mtmc::load_matrix(path("m.json")).size(), 100u);
}

TEST_F(CliTest, SynthSameSeedSameFiles) {
    for (const char* tag : {"a", "b"}) {
        ASSERT_EQ(run({"synth", "--combinations", "10", "--seed", "5", "--out-runs", path(std::string(tag) + ".csv"),
                       "--out-combos", path(std::string(tag) + ".json")})
                      .code,
                  0);
    }
    EXPECT_EQ(mtmc::read_file(path("a.csv")), mtmc::read_file(path("b.csv")));
    EXPECT_EQ(mtmc::read_file(path("a.json")), mtmc::read_file(path("b.json")));
}

TEST_F(CliTest, SynthRejectsOneFold) {
    const auto r = run({"synth", "--folds", "1", "--out-runs", path("r.csv"), "--out-combos", path("c.json")});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("n_folds"), std::string::npos);
}

TEST_F(CliTest, CriteriaErrors) {
    write("combos.json", R"([{"combination_id":"c1","hyperparameters":{}}])");
    write("bad.csv", std::string(mtmc::run_log_header) + "\nc1,t1,f1,1,0.5\nc1,t1,f2,1,1.3\n");
    const auto bad = run({"criteria", "--runs", path("bad.csv"), "--combos", path("combos.json"), "--out", path("m.json")});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("line 3"), std::string::npos) << bad.err;

    write("empty.csv", std::string(mtmc::run_log_header) + "\n");
    const auto empty =
        run({"criteria", "--runs", path("empty.csv"), "--combos", path("combos.json"), "--out", path("m.json")});
    EXPECT_EQ(empty.code, 1);
    EXPECT_NE(empty.err.find("empty input"), std::string::npos) << empty.err;

    const auto missing =
        run({"criteria", "--runs", path("nope.csv"), "--combos", path("combos.json"), "--out", path("m.json")});
    EXPECT_EQ(missing.code, 1);
    EXPECT_NE(missing.err.find("nope.csv"), std::string::npos);
}

TEST_F(CliTest, ParetoTableAndJson) {
    const auto m = matrix_file({{1, 2}, {2, 1}, {2, 2}});
    const auto table = run({"pareto", "--matrix", m});
    ASSERT_EQ(table.code, 0) << table.err;
    EXPECT_NE(table.out.find("c0"), std::string::npos);
    EXPECT_NE(table.out.find("c1"), std::string::npos);
    EXPECT_EQ(table.out.find("c2 "), std::string::npos);
    EXPECT_NE(table.out.find("2 of 3"), std::string::npos);

    const auto js = run({"pareto", "--matrix", m, "--format", "json"});
    ASSERT_EQ(js.code, 0);
    const auto j = json::parse(js.out);
    ASSERT_EQ(j["members"].size(), 2u);
    EXPECT_EQ(j["members"][0]["raw"], (std::vector<double>{1, 2}));

    write("broken.json", "{\"criteria_names\":");
    EXPECT_EQ(run({"pareto", "--matrix", path("broken.json")}).code, 1);
}

TEST_F(CliTest, ParetoJsonMatchesService) {
    const auto file = synth_matrix(30);
    const auto cli = json::parse(run({"pareto", "--matrix", file, "--format", "json"}).out);
    mtmc::testing::TestServer server(mtmc::load_matrix(file));
    const auto api = json::parse(server.client().Get("/api/pareto")->body);
    EXPECT_EQ(cli, api);
}

TEST_F(CliTest, SelectOutputs) {
    const auto m = matrix_file({{0, 4, 1, 1}, {2, 2, 1, 1}, {4, 0, 1, 1}});
    const auto zero = run({"select", "--matrix", m, "--phi", "0,0,0,0", "--json"});
    ASSERT_EQ(zero.code, 0) << zero.err;
    EXPECT_EQ(json::parse(zero.out)["resolved_phi"], (std::vector<double>{0.5, 0.5, 0.5, 0.5}));

    const auto text = run({"select", "--matrix", m, "--phi", "0,1,0,0"});
    ASSERT_EQ(text.code, 0);
    EXPECT_NE(text.out.find("selected: c2"), std::string::npos) << text.out;
    EXPECT_NE(text.out.find("resolved phi: (0,1,0,0)"), std::string::npos) << text.out;

    const auto arity = run({"select", "--matrix", m, "--phi", "0.5,0.5"});
    EXPECT_EQ(arity.code, 1);
    EXPECT_NE(arity.err.find("expected 4"), std::string::npos);

    const auto range = run({"select", "--matrix", m, "--phi", "0.5,1.5,0.5,0.5"});
    EXPECT_EQ(range.code, 1);
    EXPECT_NE(range.err.find("component 1"), std::string::npos);

    const auto garbage = run({"select", "--matrix", m, "--phi", "0.5,x,0.5,0.5"});
    EXPECT_EQ(garbage.code, 1);
    EXPECT_NE(garbage.err.find("component 1"), std::string::npos);
}

TEST_F(CliTest, SelectSingleCriterionIsScaledErrorMeanArgmin) {
    const auto file = synth_matrix();
    const auto out = run({"select", "--matrix", file, "--phi", "1,0,0,0", "--json"});
    ASSERT_EQ(out.code, 0);
    const auto pareto = json::parse(run({"pareto", "--matrix", file, "--format", "json"}).out);
    std::string best;
    double best_value = 2.0;
    for (const auto& member : pareto["members"]) {
        const double s = member["scaled"][0];
        if (s < best_value) {
            best_value = s;
            best = member["combination_id"];
        }
    }
    EXPECT_EQ(json::parse(out.out)["selected_id"], best);
}

TEST_F(CliTest, SweepDefaultTableFile) {
    const auto file = synth_matrix();
    const auto out = run({"sweep", "--matrix", file, "--phi-file", PROJECT_DATA_DIR "/table3_phi.csv", "--out",
                          path("sweep.csv")});
    ASSERT_EQ(out.code, 0) << out.err;
    std::ifstream in(path("sweep.csv"));
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    ASSERT_EQ(lines.size(), 18u);
    EXPECT_EQ(lines[0], "phi_0,phi_1,phi_2,phi_3,selected_id,base_lr,cyclic_mode,max_lr");
    EXPECT_EQ(lines[1].rfind("0.5,0.5,0.5,0.5,", 0), 0u);
    EXPECT_EQ(lines[14].rfind("1,0,0,0,", 0), 0u);

    // built-in rows are the same table
    const auto builtin = run({"sweep", "--matrix", file});
    EXPECT_EQ(builtin.out, mtmc::read_file(path("sweep.csv")));
    EXPECT_EQ(mtmc::parse_phi_csv(mtmc::read_file(PROJECT_DATA_DIR "/table3_phi.csv")), mtmc::reference_phi_rows());
}

TEST_F(CliTest, SweepEdgeCases) {
    const auto m = matrix_file({{0, 4}, {2, 2}, {4, 0}});
    write("empty.csv", "");
    const auto empty = run({"sweep", "--matrix", m, "--phi-file", path("empty.csv")});
    ASSERT_EQ(empty.code, 0);
    EXPECT_EQ(empty.out, "phi_0,phi_1,selected_id,row\n");

    write("rep.csv", "0.3,0.7\n0.3,0.7\n");
    const auto rep = run({"sweep", "--matrix", m, "--phi-file", path("rep.csv")});
    ASSERT_EQ(rep.code, 0);
    std::istringstream lines(rep.out);
    std::string header, a, b;
    std::getline(lines, header);
    std::getline(lines, a);
    std::getline(lines, b);
    EXPECT_EQ(a, b);

    write("bad.csv", "phi_0,phi_1\n0.5,0.5\n0.5,-1\n");
    const auto bad = run({"sweep", "--matrix", m, "--phi-file", path("bad.csv")});
    EXPECT_EQ(bad.code, 1);
    EXPECT_NE(bad.err.find("phi row 1"), std::string::npos) << bad.err;
}

TEST_F(CliTest, ServeMissingMatrix) {
    const auto r = run({"serve", "--matrix", path("absent.json"), "--port", "0"});
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.err.find("absent.json"), std::string::npos);
}

namespace {

struct Child {
    pid_t pid = -1;
    int err_fd = -1;
};

Child spawn(const std::vector<std::string>& args) {
    std::vector<char*> argv;
    argv.push_back(const_cast<char*>(MTMC_BINARY));
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    int fds[2];
    if (::pipe(fds) != 0) return {};
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, fds[1], STDERR_FILENO);
    posix_spawn_file_actions_addclose(&actions, fds[0]);
    Child child;
    posix_spawn(&child.pid, MTMC_BINARY, &actions, nullptr, argv.data(), environ);
    posix_spawn_file_actions_destroy(&actions);
    ::close(fds[1]);
    child.err_fd = fds[0];
    return child;
}

std::string read_line(int fd) {
    std::string line;
    char c;
    while (::read(fd, &c, 1) == 1 && c != '\n') line += c;
    return line;
}

int wait_exit(pid_t pid) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -WTERMSIG(status);
}

} // namespace

TEST_F(CliTest, ServeAnswersHealth) {
    const auto m = matrix_file({{1, 2}, {2, 1}});
    const auto child = spawn({"serve", "--matrix", m, "--port", "0"});
    ASSERT_GT(child.pid, 0);
    const auto banner = read_line(child.err_fd);
    const auto colon = banner.rfind(':');
    ASSERT_NE(colon, std::string::npos) << banner;
    const int port = std::stoi(banner.substr(colon + 1));

    httplib::Client cli("127.0.0.1", port);
    const auto res = cli.Get("/api/health");
    ASSERT_TRUE(res);
    EXPECT_EQ(json::parse(res->body)["combinations"], 2);

    ::kill(child.pid, SIGTERM);
    wait_exit(child.pid);
    ::close(child.err_fd);
}

TEST_F(CliTest, ServeOccupiedPortExitsImmediately) {
    const auto m = matrix_file({{1, 2}, {2, 1}});
    mtmc::testing::TestServer occupant(mtmc::testing::matrix_from_rows({{1}}));
    const auto child = spawn({"serve", "--matrix", m, "--port", std::to_string(occupant.port())});
    ASSERT_GT(child.pid, 0);
    EXPECT_EQ(wait_exit(child.pid), 1);
    ::close(child.err_fd);
}
