#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cbias/series_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

const fs::path& scratch() {
    static const fs::path p = [] {
        auto d = fs::temp_directory_path() / ("cbias_cli_" + std::to_string(::getpid()));
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return p;
}

struct Result {
    int code;
    std::string out, err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

Result run_cli(const std::string& args) {
    const auto out = scratch() / "stdout.txt", err = scratch() / "stderr.txt";
    const std::string cmd = std::string("\"") + CBIAS_EXE + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(out), slurp(err)};
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> v;
    std::istringstream is(s);
    for (std::string l; std::getline(is, l);) v.push_back(l);
    return v;
}

std::string dir(const std::string& name) { return (scratch() / name).string(); }

}  // namespace

TEST_CASE("dirichlet-bias q=4 writes CSVs and a manifest") {
    const auto r = run_cli("dirichlet-bias --q 4 --limit 1e6 --x-min 100 --out " + dir("q4"));
    REQUIRE(r.code == 0);
    const auto pair = lines(slurp(scratch() / "q4" / "pair_1_3.csv"));
    REQUIRE(!pair.empty());
    CHECK(pair[0] == "x,class:1,class:3,excluded,total,prediction,difference,residual");

    const auto manifest = nlohmann::json::parse(slurp(scratch() / "q4" / "manifest.json"));
    CHECK(manifest["schema"] == 1);
    CHECK(manifest["version"] == "1.0.0");
    CHECK(manifest["spec"]["kind"] == "dirichlet-bias");
    CHECK(manifest["sieve"]["limit"] == 1000000);
    for (const auto& o : manifest["outputs"]) {
        const auto file = scratch() / "q4" / o["file"].get<std::string>();
        CHECK(o["fnv1a64"] == cbias::io::hex64(cbias::io::fnv1a64_file(file)));
        CHECK(lines(slurp(file)).size() == o["rows"].get<std::size_t>() + 1);
    }
    // every row: x then one value per column; last row at the limit
    const auto last = pair.back();
    CHECK(last.rfind("1000000,", 0) == 0);
    CHECK(std::count(last.begin(), last.end(), ',') == 7);
}

TEST_CASE("q=60 classes produce one file per class") {
    const auto r = run_cli("dirichlet-bias --q 60 --classes 1,7 --limit 2e6 --out " + dir("q60"));
    REQUIRE(r.code == 0);
    CHECK(fs::exists(scratch() / "q60" / "class_1.csv"));
    CHECK(fs::exists(scratch() / "q60" / "class_7.csv"));
    CHECK(lines(slurp(scratch() / "q60" / "class_7.csv"))[0] == "x,total,class:7,prediction,S,residual");
}

TEST_CASE("density for the cubic subfield mod 7") {
    const auto r = run_cli("density --q 7 --subgroup 6 --limit 1e6 --out " + dir("d7"));
    REQUIRE(r.code == 0);
    const auto header = lines(slurp(scratch() / "d7" / "bias.csv"))[0];
    for (const char* c : {"residual:1", "residual:2", "residual:3"}) CHECK(header.find(c) != std::string::npos);
}

TEST_CASE("threads 1 and 8 give byte-identical CSVs") {
    REQUIRE(run_cli("dirichlet-bias --q 60 --classes all --limit 3e6 --threads 1 --out " + dir("t1")).code == 0);
    REQUIRE(run_cli("dirichlet-bias --q 60 --classes all --limit 3e6 --threads 8 --out " + dir("t8")).code == 0);
    REQUIRE(run_cli("dirichlet-bias --q 60 --classes all --limit 3e6 --threads 8 --segment-size 4096 --out " +
                  dir("t8s"))
                .code == 0);
    std::size_t n = 0;
    for (const auto& e : fs::directory_iterator(scratch() / "t1")) {
        if (e.path().extension() != ".csv") continue;
        ++n;
        const auto name = e.path().filename();
        CHECK(slurp(e.path()) == slurp(scratch() / "t8" / name));
        CHECK(slurp(e.path()) == slurp(scratch() / "t8s" / name));
    }
    CHECK(n == 17);
}

TEST_CASE("resume from the journal reproduces the uninterrupted run") {
    REQUIRE(run_cli("dirichlet-bias --q 8 --limit 2e6 --segment-size 4096 --journal-every 5 --out " + dir("full"))
                .code == 0);
    // truncate the journal to an early entry, as if the run had been killed
    const auto journal = scratch() / "full" / "journal_classes.jsonl";
    const auto entries = lines(slurp(journal));
    REQUIRE(entries.size() > 10);
    fs::create_directories(scratch() / "part");
    {
        std::ofstream out(scratch() / "part" / "journal_classes.jsonl");
        for (int i = 0; i < 7; ++i) out << entries[i] << "\n";
        out << entries[7].substr(0, entries[7].size() / 2);  // torn line
    }
    REQUIRE(run_cli("dirichlet-bias --q 8 --limit 2e6 --segment-size 4096 --journal-every 5 --resume --out " +
                  dir("part"))
                .code == 0);
    CHECK(slurp(scratch() / "part" / "classes.csv") == slurp(scratch() / "full" / "classes.csv"));
    CHECK(slurp(scratch() / "part" / "pair_1_3.csv") == slurp(scratch() / "full" / "pair_1_3.csv"));
}

TEST_CASE("config file with command-line override") {
    {
        std::ofstream cfg(scratch() / "run.cfg");
        cfg << "# mod 4 run\nkind = dirichlet-bias\nq = 4\nlimit = 100000\nx-min = 100\n";
    }
    const auto r = run_cli("run --config " + (scratch() / "run.cfg").string() + " --limit 200000 --out " + dir("cfg"));
    REQUIRE(r.code == 0);
    const auto manifest = nlohmann::json::parse(slurp(scratch() / "cfg" / "manifest.json"));
    CHECK(manifest["spec"]["limit"] == 200000);
    CHECK(manifest["spec"]["grid"]["x_min"] == 100);

    {
        std::ofstream cfg(scratch() / "bad.cfg");
        cfg << "q = 4\nmodulus = 9\n";
    }
    const auto bad = run_cli("dirichlet-bias --config " + (scratch() / "bad.cfg").string() + " --out " + dir("bad"));
    CHECK(bad.code == 2);
    CHECK(bad.err.find("modulus") != std::string::npos);
}

TEST_CASE("invalid specs name the offending key") {
    auto r = run_cli("dirichlet-bias --limit 1e5 --out " + dir("x"));
    CHECK(r.code == 2);
    CHECK(r.err.find("key: q") != std::string::npos);

    r = run_cli("dirichlet-bias --q 4 --limit abc --out " + dir("x"));
    CHECK(r.code == 2);
    CHECK(r.err.find("key: limit") != std::string::npos);

    r = run_cli("dirichlet-bias --q 4 --a 2 --b 3 --out " + dir("x"));
    CHECK(r.code == 2);
    CHECK(r.err.find("key: a") != std::string::npos);

    r = run_cli("split-bias --D -16 --out " + dir("x"));
    CHECK(r.code == 2);
    CHECK(r.err.find("key: D") != std::string::npos);

    r = run_cli("ff-bias --q 4 --M \"0 1\" --n 3 --out " + dir("x"));
    CHECK(r.code == 2);
    CHECK(r.err.find("key: q") != std::string::npos);

    r = run_cli("dirichlet-bias --q 4 --grid-ratio 1 --out " + dir("x"));
    CHECK(r.code == 2);
    CHECK(r.err.find("key: grid-ratio") != std::string::npos);

    r = run_cli("euler-product --character 4:0 --out " + dir("x"));
    CHECK(r.code == 2);
    CHECK(r.err.find("key: character") != std::string::npos);
    CHECK_FALSE(fs::exists(scratch() / "x" / "manifest.json"));
}

TEST_CASE("other kinds run end to end") {
    CHECK(run_cli("euler-product --character 4:1 --limit 1e6 --out " + dir("e4")).code == 0);
    const auto euler = lines(slurp(scratch() / "e4" / "euler.csv"));
    CHECK(euler[0].find("residual_re") != std::string::npos);

    CHECK(run_cli("split-bias --D -20 --limit 1e6 --out " + dir("s20")).code == 0);
    CHECK(run_cli("class-bias --D -20 --limit 1e6 --out " + dir("c20")).code == 0);
    CHECK(lines(slurp(scratch() / "c20" / "class.csv"))[0].find("\"class:1,0,5\"") != std::string::npos);

    CHECK(run_cli("ff-bias --q 2 --M \"0 0 1\" --n 10 --out " + dir("ff")).code == 0);
    const auto ff = lines(slurp(scratch() / "ff" / "ff_bias.csv"));
    CHECK(ff.size() == 11);
    CHECK(ff[0].rfind("n,", 0) == 0);

    CHECK(run_cli("ff-euler --q 3 --M \"0 1\" --character 1 --n 10 --out " + dir("ffe")).code == 0);
    const auto cache = (scratch() / "tau.bin").string();
    CHECK(run_cli("tau-bias --N 5000 --cache " + cache + " --out " + dir("tau1")).code == 0);
    CHECK(fs::exists(cache));
    CHECK(run_cli("tau-bias --N 5000 --cache " + cache + " --out " + dir("tau2")).code == 0);
    CHECK(slurp(scratch() / "tau1" / "tau.csv") == slurp(scratch() / "tau2" / "tau.csv"));
}

TEST_CASE("verify subcommand") {
    auto r = run_cli("verify crossing-26861");
    CHECK(r.code == 0);
    const auto j = nlohmann::json::parse(lines(r.out).at(0));
    CHECK(j["pass"] == true);
    bool found = false;
    for (const auto& m : j["measured"])
        if (m["name"] == "first_violation") found = m["value"] == 26861;
    CHECK(found);

    r = run_cli("verify ff-drh-q3");
    CHECK(r.code == 0);
    CHECK(r.out.find("final_deviation") != std::string::npos);

    r = run_cli("verify no-such-check");
    CHECK(r.code == 2);
    CHECK(r.err.find("no-such-check") != std::string::npos);

    r = run_cli("verify --list");
    CHECK(r.code == 0);
    CHECK(lines(r.out).size() == 11);
}

TEST_CASE("cleanup") { fs::remove_all(scratch()); }
