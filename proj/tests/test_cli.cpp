#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>
#include <unistd.h>

#include "comprate/report.hpp"

namespace fs = std::filesystem;
using namespace comprate;

namespace {

std::string binary_path() {
    const char* bin = std::getenv("COMPRATE_BIN");
    REQUIRE_MESSAGE(bin != nullptr, "COMPRATE_BIN must point at the comprate binary");
    return bin;
}

int run(const std::string& command) {
    const int status = std::system(command.c_str());
    REQUIRE(status != -1);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -2;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), "missing file: " << path.string());
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

std::size_t count_lines_starting_with(const std::string& text, const std::string& prefix) {
    std::size_t count = 0;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.rfind(prefix, 0) == 0) ++count;
    }
    return count;
}

double parse_key(const std::string& text, const std::string& key) {
    const std::string needle = key + "=";
    const std::size_t pos = text.find(needle);
    REQUIRE_MESSAGE(pos != std::string::npos, "missing key " << key << " in: " << text);
    return std::stod(text.substr(pos + needle.size()));
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("comprate_cli_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

}  // namespace

TEST_CASE("simulate writes the schema row and is reproducible") {
    TempDir dir;
    const std::string out = dir.file("sim.csv");
    const std::string cmd = binary_path() +
                            " simulate --variant oi --measure ag --n 32 --k 2 --trials 50"
                            " --seed 7 --out " +
                            out + " > " + dir.file("sim.stdout");
    REQUIRE(run(cmd) == 0);

    const std::string first = read_file(out);
    const std::string manifest_first = read_file(manifest_path_for(out));
    CHECK(first.rfind(std::string(kCsvHeader) + "\n", 0) == 0);
    CHECK(first.find("oi,ag,32,2,16,0.5,50,") != std::string::npos);
    CHECK(manifest_first.find("tool=comprate\n") != std::string::npos);
    CHECK(manifest_first.find("seed=7\n") != std::string::npos);

    REQUIRE(run(cmd) == 0);
    CHECK(read_file(out) == first);
    CHECK(read_file(manifest_path_for(out)) == manifest_first);

    // stdout carries the same row
    const std::string printed = read_file(dir.file("sim.stdout"));
    CHECK(printed == first);
}

TEST_CASE("simulate rejects invalid geometry with exit 1 and the constraint name") {
    TempDir dir;
    const std::string cmd = binary_path() + " simulate --variant oi --n 4 --k 4 2> " +
                            dir.file("err.txt") + " > /dev/null";
    CHECK(run(cmd) == 1);
    CHECK(read_file(dir.file("err.txt")).find("n >= 2k") != std::string::npos);
}

TEST_CASE("sweep writes one row per valid grid point and skips invalid ones") {
    TempDir dir;
    const std::string out = dir.file("sweep.csv");
    const std::string cmd = binary_path() +
                            " sweep --variant oi --measure ag --n-list 6,256,1024 --k-list 4"
                            " --trials 10 --seed 3 --out " +
                            out + " 2> " + dir.file("err.txt") + " > /dev/null";
    REQUIRE(run(cmd) == 0);
    const std::string csv = read_file(out);
    CHECK(count_lines_starting_with(csv, "oi,ag,256,4,") == 1);
    CHECK(count_lines_starting_with(csv, "oi,ag,1024,4,") == 1);
    CHECK(count_lines_starting_with(csv, "oi,ag,6,") == 0);
    CHECK(read_file(dir.file("err.txt")).find("skipping n=6") != std::string::npos);

    const auto rows = read_result_csv_file(out);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].n == 256);
    CHECK(rows[1].n == 1024);

    // byte-identical rerun
    REQUIRE(run(cmd) == 0);
    CHECK(read_file(out) == csv);
}

TEST_CASE("fit recovers the synthetic logarithmic law from a result file") {
    TempDir dir;
    const std::string path = dir.file("rates.csv");
    {
        std::ofstream out(path, std::ios::binary);
        out << kCsvHeader << '\n';
        for (std::uint64_t n : {256, 1024, 4096, 16384}) {
            RateEstimate e;
            e.variant = Variant::order_independent;
            e.measure = Measure::agnostic_excess;
            e.n = n;
            e.k = 4;
            e.m = n / 4;
            e.epsilon = 0.1;
            e.trials = 1000;
            e.mean = std::sqrt(4.0 * std::log2(double(n) / 4.0) / double(n));
            e.std_error = 0.001;
            e.seed = 1;
            out << csv_row(e) << '\n';
        }
    }
    const std::string fit_out = dir.file("fit.txt");
    REQUIRE(run(binary_path() + " fit " + path + " --variant oi > " + fit_out) == 0);
    const std::string printed = read_file(fit_out);
    CHECK(std::abs(parse_key(printed, "slope") - 1.0) <= 1e-9);
    CHECK(std::abs(parse_key(printed, "intercept")) <= 1e-9);
    CHECK(std::abs(parse_key(printed, "r_squared") - 1.0) <= 1e-9);
}

TEST_CASE("fit rejects short and mixed-k inputs") {
    TempDir dir;
    const std::string path = dir.file("bad.csv");
    auto write_rows = [&](bool mixed_k) {
        std::ofstream out(path, std::ios::binary);
        out << kCsvHeader << '\n';
        int i = 0;
        for (std::uint64_t n : {256, 1024, 4096}) {
            RateEstimate e;
            e.variant = Variant::order_independent;
            e.measure = Measure::agnostic_excess;
            e.n = n;
            e.k = mixed_k && (i++ == 2) ? 2 : 4;
            e.m = 64;
            e.epsilon = 0.1;
            e.trials = 10;
            e.mean = 0.05;
            e.std_error = 0.001;
            e.seed = 1;
            out << csv_row(e) << '\n';
            if (!mixed_k && n == 1024) break;  // leaves only 2 rows
        }
    };
    write_rows(false);
    CHECK(run(binary_path() + " fit " + path + " 2> " + dir.file("e1.txt") + " > /dev/null") == 1);
    CHECK(read_file(dir.file("e1.txt")).find("at least 3") != std::string::npos);

    write_rows(true);
    CHECK(run(binary_path() + " fit " + path + " 2> " + dir.file("e2.txt") + " > /dev/null") == 1);
    CHECK(read_file(dir.file("e2.txt")).find("single k") != std::string::npos);
}

TEST_CASE("bounds prints envelopes with lower below upper") {
    TempDir dir;
    const std::string out = dir.file("bounds.txt");
    REQUIRE(run(binary_path() + " bounds --variant oi --k 2 --n-list 2,8,16,32 > " + out +
                " 2> " + dir.file("warn.txt")) == 0);
    const std::string text = read_file(out);
    std::istringstream in(text);
    std::string header;
    std::getline(in, header);
    CHECK(header.find("lower_envelope") != std::string::npos);
    std::uint64_t n = 0;
    double eps = 0.0, lower = 0.0, upper = 0.0;
    int rows = 0;
    while (in >> n >> eps >> lower >> upper) {
        ++rows;
        CHECK(lower <= upper);
        CHECK(n > 2);  // n=2 fails n > k and is skipped
        if (n == 32) {
            CHECK(eps == doctest::Approx(0.5).epsilon(1e-9));
            CHECK(upper == doctest::Approx(0.7176).epsilon(1e-3));
        }
    }
    CHECK(rows == 3);
    CHECK(read_file(dir.file("warn.txt")).find("skipping n=2") != std::string::npos);
}

TEST_CASE("validate reports its suites and honors fault injection") {
    TempDir dir;
    const std::string out = dir.file("validate.txt");
    REQUIRE(run(binary_path() + " validate > " + out) == 0);
    const std::string text = read_file(out);
    CHECK(count_lines_starting_with(text, "suite ") >= 6);
    CHECK(text.find("all passed") != std::string::npos);

    CHECK(run(binary_path() + " validate --inject-fault > " + dir.file("fault.txt")) == 2);
    CHECK(read_file(dir.file("fault.txt")).find("FAIL") != std::string::npos);
}

TEST_CASE("a sweep feeds fit, and each row is reproducible via simulate") {
    TempDir dir;
    const std::string out = dir.file("pipeline.csv");
    REQUIRE(run(binary_path() +
                " sweep --variant oi --measure ag --n-list 64,256,1024,4096 --k-list 2"
                " --trials 200 --seed 5 --out " +
                out + " > /dev/null 2> /dev/null") == 0);
    const auto rows = read_result_csv_file(out);
    REQUIRE(rows.size() == 4);

    const std::string fit_out = dir.file("fit.txt");
    REQUIRE(run(binary_path() + " fit " + out + " > " + fit_out) == 0);
    CHECK(parse_key(read_file(fit_out), "slope") > 0.0);

    // the recorded per-row seed regenerates the row through simulate
    const RateEstimate& row = rows[2];
    const std::string sim_csv = dir.file("row.csv");
    REQUIRE(run(binary_path() + " simulate --variant oi --measure ag --n " +
                std::to_string(row.n) + " --k " + std::to_string(row.k) + " --trials " +
                std::to_string(row.trials) + " --seed " + std::to_string(row.seed) + " --out " +
                sim_csv + " > /dev/null") == 0);
    const auto reproduced = read_result_csv_file(sim_csv);
    REQUIRE(reproduced.size() == 1);
    CHECK(reproduced[0].mean == row.mean);
    CHECK(reproduced[0].std_error == row.std_error);
    CHECK(reproduced[0].epsilon == row.epsilon);
}

TEST_CASE("csv rows round-trip through the parser") {
    RateEstimate e;
    e.variant = Variant::order_dependent;
    e.measure = Measure::uniform_convergence;
    e.n = 16384;
    e.k = 2;
    e.m = 16384;
    e.epsilon = 0.041351914886603413;
    e.trials = 2000;
    e.mean = 0.016390493924950723;
    e.std_error = 6.601711940517026e-05;
    e.seed = 18446744073709551615ULL;
    const RateEstimate back = parse_csv_row(csv_row(e));
    CHECK(back.variant == e.variant);
    CHECK(back.measure == e.measure);
    CHECK(back.n == e.n);
    CHECK(back.k == e.k);
    CHECK(back.m == e.m);
    CHECK(back.epsilon == e.epsilon);
    CHECK(back.trials == e.trials);
    CHECK(back.mean == e.mean);
    CHECK(back.std_error == e.std_error);
    CHECK(back.seed == e.seed);

    CHECK_THROWS_AS(parse_csv_row("oi,ag,1,2,3"), std::invalid_argument);
    CHECK_THROWS_AS(parse_csv_row("xx,ag,256,4,64,0.1,10,0.05,0.001,1"), std::invalid_argument);
    CHECK(manifest_path_for("results.csv") == "results.manifest");
    CHECK(manifest_path_for("dir.v1/results.csv") == "dir.v1/results.manifest");
    CHECK(manifest_path_for("dir.v1/results") == "dir.v1/results.manifest");
}

TEST_CASE("usage errors exit with status 1") {
    CHECK(run(binary_path() + " simulate --variant zz --n 32 --k 2 2> /dev/null > /dev/null") == 1);
    CHECK(run(binary_path() + " nonsense 2> /dev/null > /dev/null") == 1);
}
