#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "spamsift/cli.hpp"
#include "spamsift/dataset.hpp"

using namespace spamsift;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = SPAMSIFT_SOURCE_DIR;
const fs::path kFixtures = kSource / "tests" / "fixtures";

struct Result {
    int code = 0;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    args.insert(args.begin(), "spamsift");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

std::size_t line_count(const std::string& s) {
    std::size_t n = 0;
    for (const char c : s) n += c == '\n';
    return n;
}

/// Fresh scratch directory, removed on scope exit.
struct Scratch {
    fs::path dir;
    explicit Scratch(const std::string& name) : dir(fs::temp_directory_path() / ("spamsift_cli_" + name)) {
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Scratch() { fs::remove_all(dir); }
    std::string operator/(const std::string& leaf) const { return (dir / leaf).string(); }
};

}  // namespace

TEST_CASE("extract") {
    Scratch s("extract");
    const auto r = run({"extract", "--corpus", (kFixtures / "mini_corpus").string(), "--config",
                        (kFixtures / "config.json").string(), "--out", s / "mini.csv"});
    CHECK(r.code == 0);
    CHECK(r.out.find("extracted 3 records (spam=1, non-spam=1, unlabeled=1)") != std::string::npos);
    CHECK(line_count(slurp(s / "mini.csv")) == 4);
    const auto d = load_csv(s / "mini.csv");
    CHECK(d.records[0].url == "http://cheap-pills.example/casino-offers");
    CHECK(d.records[2].black_list);

    // Unreadable and invalid entries warn but do not fail the run.
    const auto big = run({"extract", "--corpus", (kFixtures / "corpus").string(), "--config",
                          (kFixtures / "config.json").string(), "--out", s / "big.csv", "--jobs", "3"});
    CHECK(big.code == 0);
    CHECK(load_csv(s / "big.csv").size() == 41);
    CHECK(big.err.find("041.html") != std::string::npos);

    // Keyword lists are mandatory for extraction.
    const auto bare = run({"extract", "--corpus", (kFixtures / "mini_corpus").string(), "--out", s / "x.csv"});
    CHECK(bare.code == 2);
}

TEST_CASE("SPAMSIFT_CONFIG stands in for --config") {
    Scratch s("env");
    ::setenv("SPAMSIFT_CONFIG", (kFixtures / "config.json").c_str(), 1);
    const auto r = run({"extract", "--corpus", (kFixtures / "mini_corpus").string(), "--out", s / "mini.csv"});
    ::unsetenv("SPAMSIFT_CONFIG");
    CHECK(r.code == 0);
    CHECK(load_csv(s / "mini.csv").size() == 3);
}

TEST_CASE("synth, train, rules, predict") {
    Scratch s("train");
    {
        std::ofstream c(s / "config.json");
        c << R"({"chaid": {"max_depth": 2}, "seed": 3})";
    }
    const auto gen = run({"synth", "--spec", (kSource / "data" / "pattern_a.json").string(), "--out", s / "a.csv",
                          "--seed", "1"});
    REQUIRE(gen.code == 0);
    CHECK(gen.out.find("generated 4272 records (spam=1073, non-spam=3199, unlabeled=0)") != std::string::npos);

    const auto train = run({"train", "--data", s / "a.csv", "--config", s / "config.json", "--out", s / "a.model"});
    REQUIRE(train.code == 0);
    CHECK(train.out.rfind("trained on 4272 records:", 0) == 0);

    const auto rules = run({"rules", "--model", s / "a.model", "--dot", s / "a.dot"});
    REQUIRE(rules.code == 0);
    CHECK(rules.out.rfind("1. spam 8", 0) == 0);
    CHECK(rules.out.find("key_word_special in {max} and key_word_public in {very-max}") != std::string::npos);
    CHECK(slurp(s / "a.dot").rfind("digraph", 0) == 0);

    const auto held = run({"train", "--data", s / "a.csv", "--config", s / "config.json", "--out", s / "h.model",
                           "--train-fraction", "0.7", "--stratify"});
    CHECK(held.code == 0);
    CHECK(held.out.find("holdout (1282 records): precision=") != std::string::npos);

    const auto batch = run({"predict", "--model", s / "a.model", "--data", s / "a.csv"});
    CHECK(batch.code == 0);
    CHECK(batch.out.rfind("url,predicted,probability,leaf\n", 0) == 0);
    CHECK(line_count(batch.out) == 4273);

    // A pure leaf prints probability one.
    {
        std::ofstream d(s / "pure.csv");
        d << csv_header() << '\n';
        for (int i = 0; i < 10; ++i) d << "http://p" << i << ".test/,no,min,min,min,min,min,min,min,spam\n";
    }
    REQUIRE(run({"train", "--data", s / "pure.csv", "--out", s / "pure.model"}).code == 0);
    const auto page = run({"predict", "--model", s / "pure.model", "--page",
                           (kFixtures / "mini_corpus" / "002.html").string(), "--url", "http://library.example/",
                           "--config", (kFixtures / "config.json").string()});
    CHECK(page.code == 0);
    CHECK(page.out == "spam 1.000000 leaf=0\n");
}

TEST_CASE("evaluate") {
    Scratch s("evaluate");
    {
        std::ofstream d(s / "sep.csv");
        d << csv_header() << '\n';
        for (int i = 0; i < 60; ++i) {
            const bool spam = i % 3 == 0;
            d << "http://e" << i << ".test/,no,min,min,min,min,min,min," << (spam ? "max" : "min") << ','
              << (spam ? "spam" : "nonspam") << '\n';
        }
    }
    const auto r = run({"evaluate", "--data", s / "sep.csv", "--folds", "5", "--seed", "2"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("fold,precision,recall,f_measure,tp,fp,tn,fn\n", 0) == 0);
    CHECK(line_count(r.out) == 7);
    CHECK(r.out.find("mean,1.000000,1.000000,1.000000,20,0,40,0") != std::string::npos);
    CHECK(r.err.find("k=5 mean precision=1.0000") != std::string::npos);
    CHECK(r.err.find("F=1.0000") != std::string::npos);

    const auto to_file = run({"evaluate", "--data", s / "sep.csv", "--folds", "5", "--seed", "2", "--out", s / "m.csv"});
    CHECK(to_file.code == 0);
    CHECK(to_file.out.rfind("k=5 ", 0) == 0);
    CHECK(slurp(s / "m.csv") == r.out);
}

TEST_CASE("exit codes") {
    Scratch s("codes");
    CHECK(run({}).code == 1);
    CHECK(run({"train", "--bogus"}).code == 1);
    CHECK(run({"train", "--data", "x.csv"}).code == 1);
    CHECK(run({"evaluate", "--data", "x.csv", "--folds", "1"}).code == 1);

    const auto help = run({"train", "--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("--train-fraction") != std::string::npos);
    CHECK(help.out.find("--stratify") != std::string::npos);

    CHECK(run({"train", "--data", "/nonexistent/x.csv", "--out", s / "m.json"}).code == 2);
    CHECK(run({"evaluate", "--data", "/nonexistent/x.csv"}).code == 2);
    CHECK(run({"train", "--data", (kFixtures / "config.json").string(), "--out", s / "m.json"}).code == 2);
    {
        std::ofstream bad(s / "bad.model");
        bad << R"({"version": 1, "nodes": [)";
    }
    const auto model = run({"rules", "--model", s / "bad.model"});
    CHECK(model.code == 3);
    CHECK(model.err.find("model error") != std::string::npos);
    CHECK(run({"rules", "--model", s / "missing.model"}).code == 3);
    CHECK(run({"predict", "--model", s / "bad.model", "--data", "x.csv"}).code == 3);
    CHECK(run({"predict", "--model", s / "bad.model", "--page", "a.html", "--data", "x.csv"}).code == 1);
}
