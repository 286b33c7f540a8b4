#include <filesystem>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <gtest/gtest.h>

#include "magnon/config.hpp"
#include "magnon/io.hpp"

using namespace magnon;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
protected:
    void SetUp() override {
        dir = fs::temp_directory_path() / ("magnon_cfg_" + std::to_string(::getpid()) + "_" +
                                           ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::create_directories(dir);
        std::ofstream(dir / "nn.csv") << "dz1,J,J3\n1,1,1\n";
    }
    void TearDown() override { fs::remove_all(dir); }

    RunConfig parse(const std::string& text) {
        std::istringstream is(text);
        return parse_run_config(is, dir);
    }

    fs::path dir;
};

} // namespace

TEST(CouplingCsv, ParsesAndSymmetrizes) {
    std::istringstream is("# nearest neighbours\ndz1,dz2,J,J3\n1,0,1,0.5\n0,1,1,0.5\n\n-1,0,1,0.5\n");
    const auto c = io::read_couplings_csv(is, 2, 0.3);
    EXPECT_EQ(c.entries().size(), 4u);
    EXPECT_EQ(c.entries().at({0, -1}).j3, 0.5);
    EXPECT_EQ(c.field(), 0.3);
}

TEST(CouplingCsv, RejectsMalformedInput) {
    auto read = [](const std::string& s, int dim = 1) {
        std::istringstream is(s);
        return io::read_couplings_csv(is, dim, 0.0);
    };
    EXPECT_THROW(read("dz,J,J3\n1,1,1\n"), InputError);
    EXPECT_THROW(read("dz1,J,J3\n1,1\n"), InputError);
    EXPECT_THROW(read("dz1,J,J3\n1,x,1\n"), InputError);
    EXPECT_THROW(read("dz1,J,J3\n1,1,1\n1,2,1\n"), InputError);
    EXPECT_THROW(read("dz1,J,J3\n1,1,1\n-1,1,2\n"), InputError);
    EXPECT_THROW(read("dz1,J,J3\n0,1,0\n"), InputError);
    EXPECT_NO_THROW(read("dz1,J,J3\n1,1,1\n1,1,1\n"));
}

TEST(FormatDouble, RoundTrips) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23}) EXPECT_EQ(std::stod(io::format_double(v)), v);
    std::ostringstream os;
    io::write_json(os, io::json{{"a", 0.1}, {"b", std::vector<double>{1.0, 2.0}}});
    EXPECT_EQ(os.str(), "{\n  \"a\": 0.10000000000000001,\n  \"b\": [1, 2]\n}\n");
}

TEST_F(TempDir, DefaultsAndEffectiveConfig) {
    const auto c = parse("lattice.L = 8\ncouplings.path = nn.csv\nthermal.h = 0.5  # field\n");
    EXPECT_EQ(c.dim, 1);
    EXPECT_EQ(c.linear_size, 8);
    EXPECT_EQ(c.beta, 1.0);
    EXPECT_EQ(c.couplings_path, dir / "nn.csv");
    EXPECT_EQ(c.oracle_copies, (std::vector<int>{1, 3, 5, 7}));
    EXPECT_EQ(c.oracle_q, (IntVec{0}));
    EXPECT_FALSE(c.dynamics_m.has_value());
    EXPECT_TRUE(c.dynamics_times.empty());
    EXPECT_EQ(c.effective.at("thermal.beta"), "1");
    EXPECT_EQ(c.effective.at("couplings.path"), "nn.csv");
    EXPECT_EQ(c.effective.at("oracle.q"), "0");
    EXPECT_EQ(c.couplings().entries().size(), 2u);
}

TEST_F(TempDir, ParsesEveryBlock) {
    const auto c = parse(
        "lattice.dim = 1\nlattice.L = 2\ncouplings.path = nn.csv\nthermal.beta = 1\nthermal.h = 2.5\n"
        "oracle.n = 1,3\noracle.q = 1\noracle.crosscheck = 1\noracle.monotone_tol = 1e-15\n"
        "dynamics.m = -0.5\ndynamics.initial = packet\ndynamics.times = 0, 0.5, 1\n"
        "dynamics.packet.center = 1\ndynamics.packet.k = 0.3\nsectors.n = 9\n");
    EXPECT_EQ(c.oracle_copies, (std::vector<int>{1, 3}));
    EXPECT_EQ(c.oracle_q, (IntVec{1}));
    EXPECT_EQ(c.oracle_crosscheck, (std::vector<int>{1}));
    EXPECT_EQ(*c.dynamics_m, -0.5);
    EXPECT_EQ(c.dynamics_times, (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_EQ(c.packet_k, (std::vector<double>{0.3}));
    EXPECT_EQ(c.sectors_n, 9);
}

TEST_F(TempDir, RejectsBadConfigs) {
    const std::string base = "lattice.L = 8\ncouplings.path = nn.csv\nthermal.h = 0.5\n";
    EXPECT_THROW(parse(base + "bogus.key = 1\n"), InputError);
    EXPECT_THROW(parse(base + "lattice.L = 9\n"), InputError);
    EXPECT_THROW(parse(base + "thermal.beta = 0\n"), InputError);
    EXPECT_THROW(parse(base + "oracle.n = 1,2\n"), InputError);
    EXPECT_THROW(parse(base + "oracle.q = 1,1\n"), InputError);
    EXPECT_THROW(parse(base + "dynamics.m = 0.5\n"), InputError);
    EXPECT_THROW(parse(base + "dynamics.initial = random\n"), InputError);
    EXPECT_THROW(parse(base + "oracle.max_full_dim = 65536\n"), InputError);
    EXPECT_THROW(parse(base + "just text\n"), InputError);
    EXPECT_THROW(parse("lattice.L = 8\ncouplings.path = missing.csv\nthermal.h = 0.5\n"), InputError);
    EXPECT_THROW(parse("lattice.L = 8\ncouplings.path = nn.csv\n"), InputError);
    EXPECT_THROW(load_run_config(dir / "nope.cfg"), InputError);
}
