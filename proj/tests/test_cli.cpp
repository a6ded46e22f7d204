// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "rough/kernels.hpp"
#include "rough/parallel.hpp"
#include "rough/version.hpp"

using doctest::Approx;
using nlohmann::json;

namespace {

constexpr double pi = std::numbers::pi;

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "rough-billiards");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out;
    std::ostringstream err;
    const int code = rough::cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::stringstream ss(s);
    std::string line;
    while (std::getline(ss, line)) v.push_back(line);
    return v;
}

std::vector<std::string> fields(const std::string& line) {
    std::vector<std::string> v;
    std::stringstream ss(line);
    std::string f;
    while (std::getline(ss, f, ',')) v.push_back(f);
    return v;
}

const std::string flat_wall = R"({"family": "flat", "scale": 0.5})";
const std::string rect_wall = R"({"family": "rect_teeth", "params": {"r": 1.0}})";

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("rough_cli_test_" + name)).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Every float column in the CSV body is printed with 17 significant digits.
void check_csv(const std::string& text, std::size_t columns) {
    REQUIRE(text.find('\r') == std::string::npos);
    REQUIRE(!text.empty());
    CHECK(text.back() == '\n');
    const auto ls = lines(text);
    REQUIRE(ls.size() >= 2);
    CHECK(std::regex_match(ls[0], std::regex(R"(# tool=rough-billiards version=\d+\.\d+\.\d+ seed=(\d+|none) config_hash=[0-9a-f]{16})")));
    CHECK(fields(ls[1]).size() == columns);
    for (std::size_t i = 2; i < ls.size(); ++i) {
        const auto f = fields(ls[i]);
        REQUIRE(f.size() == columns);
        for (const auto& x : f) CHECK(x.find(';') == std::string::npos);
    }
}

}  // namespace

TEST_CASE("exit codes") {
    CHECK(run({}).code == rough::cli::usage);
    CHECK(run({"nonsense"}).code == rough::cli::usage);
    CHECK(run({"reflect", "--theta", "1.0", "--seed", "1"}).code == rough::cli::usage);
    CHECK(run({"reflect", "--wall", flat_wall, "--theta", "abc", "--seed", "1"}).code == rough::cli::usage);
    CHECK(run({"verify"}).code == rough::cli::usage);
    CHECK(run({"--help"}).code == rough::cli::ok);
    const Result v = run({"--version"});
    CHECK(v.code == rough::cli::ok);
    CHECK(v.out == std::string(rough::version) + "\n");

    const Result bad = run({"reflect", "--wall", R"({"family": "rect_teeth", "params": {"r": -1}})", "--theta", "1", "--seed", "1"});
    CHECK(bad.code == rough::cli::runtime);
    CHECK(bad.err.rfind("InvalidParam", 0) == 0);
    const Result missing = run({"reflect", "--wall", "/nonexistent/wall.json", "--theta", "1", "--seed", "1"});
    CHECK(missing.code == rough::cli::runtime);
    const Result garbled = run({"reflect", "--wall", "{not json", "--theta", "1", "--seed", "1"});
    CHECK(garbled.code == rough::cli::runtime);
    const Result circ = run({"kernel", "--family", "circ"});
    CHECK(circ.code == rough::cli::runtime);
    CHECK(circ.err.rfind("InvalidParam", 0) == 0);
}

TEST_CASE("reflect off a flat wall") {
    const Result r = run({"reflect", "--wall", flat_wall, "--theta", "1.0", "--samples", "10", "--seed", "1"});
    REQUIRE(r.code == 0);
    check_csv(r.out, 6);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 12);
    CHECK(ls[1] == "x,theta,x_out,theta_out,bounces,status");
    for (std::size_t i = 2; i < ls.size(); ++i) {
        const auto f = fields(ls[i]);
        CHECK(std::stod(f[3]) == Approx(pi - 1.0).epsilon(1e-15));
        CHECK(std::stod(f[2]) == Approx(std::stod(f[0])).epsilon(1e-15));
        CHECK(f[4] == "1");
        CHECK(f[5] == "returned");
    }
}

TEST_CASE("reflect reports non-returned rows as nan") {
    const Result r = run({"reflect", "--wall", R"({"family": "rect_teeth", "params": {"r": 5.0}})", "--theta", "0.2", "--samples",
                          "50", "--seed", "3", "--max-bounces", "2"});
    REQUIRE(r.code == 0);
    bool saw_capped = false;
    for (const auto& l : lines(r.out)) {
        if (l.find(",capped") != std::string::npos) {
            saw_capped = true;
            CHECK(fields(l)[2] == "nan");
        }
    }
    CHECK(saw_capped);
}

TEST_CASE("kernel atoms for rect teeth") {
    const Result r = run({"kernel", "--family", "rect", "--r", "0.3", "--theta-grid", "4"});
    REQUIRE(r.code == 0);
    check_csv(r.out, 3);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 2 + 8);
    CHECK(ls[1] == "theta,atom_angle,atom_prob");
    for (std::size_t i = 2; i < ls.size(); ++i) {
        const auto f = fields(ls[i]);
        const double theta = std::stod(f[0]);
        const double angle = std::stod(f[1]);
        const double p = rough::rect_specular_prob(theta, 0.3);
        if (std::abs(angle - (pi - theta)) < 1e-12) {
            CHECK(std::stod(f[2]) == Approx(p).epsilon(1e-15));
        } else {
            CHECK(angle == Approx(theta).epsilon(1e-15));
            CHECK(std::stod(f[2]) == Approx(1 - p).epsilon(1e-15));
        }
    }
    const Result same = run({"kernel", "--family", "rect", "--params", "0.3", "--theta-grid", "4"});
    CHECK(same.out == r.out);
    const Result tri = run({"kernel", "--family", "tri", "--psi", "1.5707963267948966", "--theta-grid", "3"});
    REQUIRE(tri.code == 0);
    check_csv(tri.out, 3);
}

TEST_CASE("floats are printed with 17 significant digits") {
    const Result r = run({"kernel", "--family", "specular", "--theta-grid", "3"});
    REQUIRE(r.code == 0);
    const auto f = fields(lines(r.out)[2]);
    CHECK(f[0] == "0.52359877559829882");
    CHECK(std::stod(f[0]) == pi / 6);
    CHECK(f[2] == "1");
}

TEST_CASE("wall output") {
    const Result j = run({"wall", "--wall", rect_wall});
    REQUIRE(j.code == 0);
    const json doc = json::parse(j.out);
    CHECK(doc.at("segments").size() == 4);
    CHECK(doc.at("period").get<double>() == 2.0);
    CHECK(doc.at("meta").at("seed").is_null());
    CHECK(doc.at("meta").at("version") == rough::version);
    CHECK(doc.at("meta").at("config_hash").get<std::string>().size() == 16);

    const Result c = run({"wall", "--wall", rect_wall, "--format", "csv", "--samples-per-period", "8"});
    REQUIRE(c.code == 0);
    check_csv(c.out, 2);
    CHECK(lines(c.out)[0].find("seed=none") != std::string::npos);
    CHECK(run({"wall", "--wall", rect_wall, "--format", "xml"}).code == rough::cli::usage);
}

TEST_CASE("config hash changes with the configuration") {
    const auto hash_of = [](const Result& r) { return lines(r.out)[0].substr(lines(r.out)[0].find("config_hash=")); };
    const Result a = run({"reflect", "--wall", flat_wall, "--theta", "1.0", "--samples", "3", "--seed", "1"});
    const Result b = run({"reflect", "--wall", flat_wall, "--theta", "1.1", "--samples", "3", "--seed", "1"});
    const Result c = run({"reflect", "--wall", flat_wall, "--theta", "1.0", "--samples", "3", "--seed", "1"});
    CHECK(hash_of(a) != hash_of(b));
    CHECK(hash_of(a) == hash_of(c));
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const unsigned char ch : std::string("{}")) h = (h ^ ch) * 0x100000001b3ULL;
    CHECK(rough::cli::config_hash(json::object()) == fmt::format("{:016x}", h));
}

TEST_CASE("collide output") {
    const std::vector<std::string> args{"collide", "--wall", rect_wall, "--eps", "0.01", "--theta", "1.2",
                                        "--psi", "1.27", "--samples", "40", "--seed", "4"};
    const Result r = run(args);
    REQUIRE(r.code == 0);
    check_csv(r.out, 10);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 42);
    CHECK(ls[1] == "y1,y3,theta,psi,y1',y3',theta',psi',bounces,status");
    for (std::size_t i = 2; i < ls.size(); ++i) {
        const auto f = fields(ls[i]);
        CHECK(std::stod(f[2]) == Approx(1.2));
        CHECK(std::stod(f[3]) == Approx(1.27));
    }
    auto cyl_args = args;
    cyl_args.push_back("--cyl");
    const Result c = run(cyl_args);
    REQUIRE(c.code == 0);
    for (std::size_t i = 2; i < lines(c.out).size(); ++i) {
        const auto f = fields(lines(c.out)[i]);
        if (f[9] != "returned") continue;
        CHECK(std::stod(f[7]) == Approx(pi - 1.27).epsilon(1e-10));
    }
    CHECK(run(args).out == r.out);
}

TEST_CASE("converge output") {
    const Result r = run({"converge", "--wall", rect_wall, "--eps-list", "0.1,0.01", "--samples", "200", "--seed", "5"});
    REQUIRE(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc.at("rows").size() == 2);
    CHECK(doc.at("meta").at("seed") == 5);
    for (const auto& row : doc.at("rows")) {
        for (const char* key : {"eps", "ks_theta", "median_psi_err", "singular_frac"}) CHECK(row.contains(key));
    }
    CHECK(run({"converge", "--wall", rect_wall, "--eps-list", "0.01,0.1", "--samples", "10", "--seed", "5"}).code ==
          rough::cli::runtime);
    CHECK(run({"converge", "--wall", rect_wall, "--eps-list", "0.1,x", "--samples", "10", "--seed", "5"}).code ==
          rough::cli::runtime);
}

TEST_CASE("knudsen output") {
    const Result r = run({"knudsen", "--kernel", "specular", "--L", "10", "--theta0", "2.0", "--runs", "5", "--seed", "6"});
    REQUIRE(r.code == 0);
    check_csv(r.out, 4);
    const auto ls = lines(r.out);
    REQUIRE(ls.size() == 7);
    for (std::size_t i = 2; i < ls.size(); ++i) {
        CHECK(std::stod(fields(ls[i])[1]) == Approx(10.0 / std::cos(pi - 2.0)).epsilon(1e-12));
    }
    CHECK(run({"knudsen", "--kernel", "lambertian", "--L", "-1", "--seed", "1"}).code == rough::cli::runtime);
    CHECK(run({"knudsen", "--kernel", "bogus", "--L", "1", "--seed", "1"}).code == rough::cli::runtime);
}

TEST_CASE("verify passes and is byte-reproducible") {
    const std::string a = temp_path("verify_a.json");
    const std::string b = temp_path("verify_b.json");
    const Result ra = run({"verify", "--seed", "7", "--out", a});
    const Result rb = run({"verify", "--seed", "7", "--out", b});
    CHECK(ra.code == 0);
    CHECK(rb.code == 0);
    CHECK(ra.out.empty());
    const std::string ta = slurp(a);
    CHECK(!ta.empty());
    CHECK(ta == slurp(b));
    const json doc = json::parse(ta);
    CHECK(doc.at("verdict") == "pass");
    CHECK(doc.at("meta").at("seed") == 7);
    for (const auto& t : doc.at("tests")) {
        INFO(t.dump());
        CHECK(t.at("verdict") == "pass");
    }
    std::filesystem::remove(a);
    std::filesystem::remove(b);
}

TEST_CASE("thread cap does not change results") {
    const std::vector<std::string> args{"reflect", "--wall", rect_wall, "--theta", "0.7", "--samples", "2000", "--seed", "9"};
    ::unsetenv("ROUGH_BILLIARDS_THREADS");
    const std::size_t hw = rough::thread_count();
    const Result free_run = run(args);
    ::setenv("ROUGH_BILLIARDS_THREADS", "1", 1);
    CHECK(rough::thread_count() == 1);
    const Result capped = run(args);
    ::setenv("ROUGH_BILLIARDS_THREADS", "0", 1);
    CHECK(rough::thread_count() == hw);
    ::setenv("ROUGH_BILLIARDS_THREADS", "2x", 1);
    CHECK(rough::thread_count() == hw);
    ::unsetenv("ROUGH_BILLIARDS_THREADS");
    REQUIRE(free_run.code == 0);
    CHECK(free_run.out == capped.out);
}
