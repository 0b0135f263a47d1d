// Drives the built CLI binary end to end through std::system.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "helpers.hpp"
#include "lrfd/lrfd.hpp"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(LRFD_BENCH_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / "lrfd_cli_test") {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string first_line(const std::string& path) {
    std::ifstream f(path);
    std::string line;
    std::getline(f, line);
    return line;
}

} // namespace

TEST_CASE("cli completes a matrix end to end") {
    TempDir dir;
    lrfd::Rng rng(61);
    const lrfd::Matrix basis =
        lrfd::orthonormalize_columns(lrfd::Matrix::gaussian(20, 2, rng));
    const lrfd::Matrix l0 = basis * lrfd::Matrix::gaussian(2, 20, rng);
    const lrfd::ObservationSet omega =
        lrfd::sample_observations(20, 20, lrfd::BernoulliRho{0.8}, 62);
    lrfd::write_matrix_csv(l0, dir.file("x.csv"));
    lrfd::write_mask(omega, dir.file("mask.csv"));

    REQUIRE(run("complete --input " + dir.file("x.csv") + " --mask " +
                dir.file("mask.csv") + " --algorithm cono --lambda 1e5 --out " +
                dir.file("out.csv")) == 0);
    REQUIRE(fs::exists(dir.file("out.csv")));
    REQUIRE(fs::exists(dir.file("out.csv") + ".report.csv"));
    const lrfd::Matrix completed = lrfd::read_matrix_csv_file(dir.file("out.csv"));
    REQUIRE(lrfd::recovery_error(completed, l0) < 0.05);
}

TEST_CASE("cli complete accepts a config file in place of flags") {
    TempDir dir;
    lrfd::Rng rng(63);
    const lrfd::Matrix basis =
        lrfd::orthonormalize_columns(lrfd::Matrix::gaussian(15, 2, rng));
    const lrfd::Matrix l0 = basis * lrfd::Matrix::gaussian(2, 15, rng);
    const lrfd::ObservationSet omega =
        lrfd::sample_observations(15, 15, lrfd::BernoulliRho{0.85}, 64);
    lrfd::write_matrix_csv(l0, dir.file("x.csv"));
    lrfd::write_mask(omega, dir.file("mask.csv"));
    {
        std::ofstream cfg(dir.file("complete.cfg"));
        cfg << "input = " << dir.file("x.csv") << "\n"
            << "mask = " << dir.file("mask.csv") << "\n"
            << "algorithm = cono\n"
            << "lambda = 1e5\n";
    }
    REQUIRE(run("complete --config " + dir.file("complete.cfg") + " --out " +
                dir.file("out.csv")) == 0);
    REQUIRE(fs::exists(dir.file("out.csv")));
}

TEST_CASE("cli fails with nonzero status on missing inputs and bad config") {
    TempDir dir;
    REQUIRE(run("complete --input nope.csv --mask nope2.csv --out " +
                dir.file("out.csv")) != 0);
    REQUIRE(run("complete --out " + dir.file("out.csv")) != 0);
    {
        std::ofstream cfg(dir.file("bad.cfg"));
        cfg << "bogus_key = 1\n";
    }
    REQUIRE(run("coherence-sweep --config " + dir.file("bad.cfg") + " --out " +
                dir.file("out.csv")) != 0);
    REQUIRE(run("coherence-sweep") != 0); // --out is required
    REQUIRE(run("no-such-subcommand") != 0);
}

TEST_CASE("cli runs a tiny dictionary-rank sweep from a config file") {
    TempDir dir;
    {
        std::ofstream cfg(dir.file("fig3.cfg"));
        cfg << "n = 40\ndict_ranks = 1,2\nmissing_fraction = 0.5\ntrials = 1\n";
    }
    REQUIRE(run("fig3-sweep --config " + dir.file("fig3.cfg") + " --seed 9 --out " +
                dir.file("fig3.csv")) == 0);
    REQUIRE(first_line(dir.file("fig3.csv")) == lrfd::dict_rank_sweep_csv_header());
}

TEST_CASE("cli runs a tiny lemma check with workers") {
    TempDir dir;
    {
        std::ofstream cfg(dir.file("lemma.cfg"));
        cfg << "n = 16\nranks = 2\nrhos = 0.5,1.0\ntrials = 3\n";
    }
    REQUIRE(run("lemma-check --config " + dir.file("lemma.cfg") +
                " --seed 4 --workers 2 --out " + dir.file("lemma.csv")) == 0);
    REQUIRE(first_line(dir.file("lemma.csv")) == lrfd::lemma_check_csv_header());
}

TEST_CASE("cli runs a tiny phase diagram") {
    TempDir dir;
    {
        std::ofstream cfg(dir.file("phase.cfg"));
        cfg << "rows = 20\ncols = 30\nsubspaces = 1\nranks = 2\n"
            << "fractions = 0.8\ntrials = 1\n";
    }
    REQUIRE(run("phase-diagram --config " + dir.file("phase.cfg") + " --seed 8 --out " +
                dir.file("phase.csv")) == 0);
    REQUIRE(first_line(dir.file("phase.csv")) == lrfd::phase_diagram_csv_header());
}
