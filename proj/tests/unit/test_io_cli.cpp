#include "kylehft/io.hpp"
#include "kylehft/solver.hpp"
#include "kylehft/sweeps.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace kylehft;
namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / ("kylehft_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult cli(const std::string& args, const std::string& env = "") {
    static int n = 0;
    const fs::path out = scratch() / ("out" + std::to_string(n) + ".txt");
    const fs::path err = scratch() / ("err" + std::to_string(n++) + ".txt");
    const std::string cmd = env + " \"" KYLEHFT_CLI "\" " + args + " >" + out.string() + " 2>" + err.string();
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

} // namespace

TEST(Io, CsvHeaderAndRoundTrip) {
    SweepRow row;
    row.params.theta_eps = 0.1;
    row.params.Gamma = 1.0 / 3.0;
    std::ostringstream os;
    io::write_csv(os, {io::row_record(row)});
    std::string header;
    for (const auto& c : io::row_columns()) header += (header.empty() ? "" : ",") + c;
    EXPECT_EQ(first_line(os.str()), header);
    EXPECT_EQ(io::row_columns().size(), 26u);
    for (double x : {1.0 / 3.0, 1e-300, -2.5e17, 0.1}) EXPECT_EQ(std::strtod(io::format_double(x).c_str(), nullptr), x);
    EXPECT_EQ(io::format_double(0.0), "0");
    EXPECT_EQ(io::format_double(std::nan("")), "nan");
}

TEST(Io, EquilibriumJsonRoundTrip) {
    ModelParams p;
    p.theta1 = 0.5;
    p.theta_eps = 2.0;
    p.Gamma = 0.7;
    const Equilibrium e = solve_robust(p).best();
    const SweepRow row = make_row(p, RowStatus::Found, e);
    const fs::path f = scratch() / "eq.json";
    {
        std::ofstream out(f);
        io::write_json(out, {io::row_record(row)});
    }
    const auto [q, g] = io::read_equilibrium_json(f.string());
    EXPECT_EQ(q.theta1, p.theta1);
    EXPECT_EQ(q.Gamma, p.Gamma);
    EXPECT_EQ(g.beta1, e.beta1);
    EXPECT_EQ(g.Lambda22, e.Lambda22);
    EXPECT_EQ(g.A, e.A);
}

TEST(Cli, ExitCodes) {
    EXPECT_EQ(cli("solve --theta1 1 --theta-eps 1 --gamma 1").code, 0);
    EXPECT_EQ(cli("solve --theta1 0 --theta-eps 1 --gamma 1").code, 1);
    EXPECT_EQ(cli("solve --theta1 1 --theta-eps 1 --gamma -1").code, 1);
    EXPECT_EQ(cli("no-such-command").code, 1);
    const CliResult r = cli("solve --theta1 1 --theta-eps 0 --gamma 0");
    EXPECT_EQ(r.code, 2);
    EXPECT_NE(r.err.find("duopoly"), std::string::npos);
}

TEST(Cli, SolveJsonFeedsVerify) {
    const fs::path f = scratch() / "solve.json";
    ASSERT_EQ(cli("solve --theta1 1 --theta-eps 1 --gamma 1 --format json -o " + f.string()).code, 0);
    EXPECT_EQ(cli("verify --equilibrium " + f.string() + " -n 20000").code, 0);
    EXPECT_EQ(cli("verify --equilibrium " + f.string() + " -n 1000").code, 1);

    auto j = nlohmann::json::parse(slurp(f));
    if (j.is_array()) j = j.front();
    j["beta1"] = j["beta1"].get<double>() * 1.2;
    const fs::path t = scratch() / "tampered.json";
    std::ofstream(t) << j.dump();
    EXPECT_EQ(cli("verify --equilibrium " + t.string() + " -n 20000").code, 3);
}

TEST(Cli, SweepIsByteReproducible) {
    const std::string args = "sweep --theta1 1 --theta-eps-min 0.01 --theta-eps-max 10 --theta-eps-points 7 --gamma-grid 0,0.5,5";
    const CliResult a = cli(args + " --jobs 1");
    const CliResult b = cli(args + " --jobs 3");
    ASSERT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    std::string header;
    for (const auto& c : io::row_columns()) header += (header.empty() ? "" : ",") + c;
    EXPECT_EQ(first_line(a.out), header);
    EXPECT_EQ(std::count(a.out.begin(), a.out.end(), '\n'), 1 + 7 * 3);
}

TEST(Cli, OutputDirectoryFromEnvironment) {
    const fs::path dir = scratch() / "envout";
    const CliResult r = cli("solve --theta1 1 --theta-eps 1 --gamma 1", "KYLEHFT_OUTPUT_DIR=" + dir.string());
    ASSERT_EQ(r.code, 0);
    EXPECT_TRUE(r.out.empty());
    bool found = false;
    for (const auto& entry : fs::directory_iterator(dir)) found |= entry.path().extension() == ".csv";
    EXPECT_TRUE(found);
}

TEST(Cli, ConfigFileSuppliesOptions) {
    const fs::path cfg = scratch() / "run.toml";
    std::ofstream(cfg) << "[solve]\ntheta1 = 1\ntheta-eps = 1\ngamma = 1\n";
    const CliResult a = cli("--config " + cfg.string() + " solve");
    const CliResult b = cli("solve --theta1 1 --theta-eps 1 --gamma 1");
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
}

TEST(Cli, MultiSpilloverRoles) {
    const CliResult r = cli("multi spillover --gamma-grid 0,0.3 --format json");
    ASSERT_EQ(r.code, 0) << r.err;
    const auto j = nlohmann::json::parse(r.out);
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[0]["role_asset1"], "SmallIT");
    EXPECT_EQ(j[1]["role_asset1"], "RoundTripper");
    EXPECT_EQ(j[0]["role_asset2"], "SmallIT");
    EXPECT_EQ(j[1]["role_asset2"], "SmallIT");
    EXPECT_EQ(j[1]["status"], "found");
}

TEST(Cli, LimitsCommands) {
    const CliResult t = cli("limits theta1-zero --theta-eps 1 --gamma 1 --format json");
    ASSERT_EQ(t.code, 0) << t.err;
    EXPECT_EQ(cli("limits gamma-tilde --theta1 0.1").code, 0);
    EXPECT_EQ(cli("limits duopoly --theta1 0.1 --gamma 0.01").code, 0);
    EXPECT_EQ(cli("limits gamma-inf --theta1 1 --theta-eps 1").code, 0);
    EXPECT_EQ(cli("thresholds --theta1 1 --theta-eps-points 40 --gamma 0.3").code, 0);
}
