#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "fixtures.hpp"
#include "lexiphylo/pipeline.hpp"

using namespace lexiphylo;
using fixture::code;
using fixture::code_of;
namespace fs = std::filesystem;

namespace {

const std::string kMini = LEXIPHYLO_DATA_DIR "/mini";

fs::path scratch(const std::string& name) {
    const auto p = fs::temp_directory_path() / ("lexiphylo_test_" + name);
    fs::remove_all(p);
    return p;
}

PipelineConfig mini(const fs::path& out) {
    std::ifstream in(kMini + "/pipeline.cfg");
    auto c = parse_pipeline_config(in, kMini);
    c.output_dir = out.string();
    c.cache_dir = (out / "cache").string();
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

}  // namespace

TEST_CASE("SHA-256 known answers") {
    CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("config parsing") {
    std::istringstream in("# comment\ncorpus = words.csv  # trailing\nseed=7\nthreads = 2\ntheta = 5.5\n"
                          "stage.chars = false\noutput_dir=/abs/out\n");
    const auto c = parse_pipeline_config(in, "/base");
    CHECK(c.corpus == "/base/words.csv");
    CHECK(c.output_dir == "/abs/out");
    CHECK(*c.seed == 7);
    CHECK(c.threads == 2);
    CHECK(c.theta == 5.5);
    CHECK(c.gap_open == -2.330);
    CHECK_FALSE(c.stages.at("chars"));
    CHECK(c.stages.at("trees"));

    std::istringstream unknown("colour = red\n");
    CHECK(code_of([&] { parse_pipeline_config(unknown); }) == code(ErrorCode::InvalidArgument));
    std::istringstream bad_stage("stage.ml = true\n");
    CHECK(code_of([&] { parse_pipeline_config(bad_stage); }) == code(ErrorCode::InvalidArgument));
    std::istringstream bad_bool("optimize = maybe\n");
    CHECK(code_of([&] { parse_pipeline_config(bad_bool); }) == code(ErrorCode::InvalidArgument));
    std::istringstream bad_seed("seed = -3\n");
    CHECK(code_of([&] { parse_pipeline_config(bad_seed); }) == code(ErrorCode::InvalidArgument));
    std::istringstream no_eq("corpus\n");
    CHECK(code_of([&] { parse_pipeline_config(no_eq); }) == code(ErrorCode::InvalidArgument));
}

TEST_CASE("seed is mandatory") {
    auto c = mini(scratch("noseed"));
    c.seed.reset();
    CHECK(code_of([&] { run_pipeline(c); }) == code(ErrorCode::InvalidArgument));
}

TEST_CASE("mini corpus run, cache hits and rebuilds") {
    const auto out = scratch("run");
    const auto c = mini(out);
    const auto first = run_pipeline(c);
    CHECK(first.artifacts.size() == 8);
    for (const auto& s : first.stages) CHECK((s.status == "computed" || s.status == "skipped"));
    for (const auto& a : first.artifacts) CHECK(sha256_file((out / a.path).string()) == a.sha256);
    CHECK(fs::exists(out / "manifest.json"));
    CHECK(slurp(out / "manifest.json") == first.json());

    const auto second = run_pipeline(c);
    for (const auto& s : second.stages)
        if (s.name != "validation") CHECK(s.status == "cached");
    CHECK(second.artifacts.size() == first.artifacts.size());
    for (std::size_t i = 0; i < first.artifacts.size(); ++i) CHECK(second.artifacts[i].sha256 == first.artifacts[i].sha256);

    // damage one cached file
    const auto entry = fs::path(c.cache_dir) / "trees" / second.stages[4].key / "bionj.tre";
    REQUIRE(fs::exists(entry));
    { std::ofstream(entry, std::ios::app) << "junk"; }
    const auto third = run_pipeline(c);
    CHECK(third.stages[4].status == "rebuilt");
    CHECK(third.stages[3].status == "cached");
    CHECK(sha256_file((out / "bionj.tre").string()) == first.artifacts[7].sha256);

    // a changed parameter only invalidates the stages it reaches
    auto changed = c;
    changed.cluster_threshold = 0.3;
    const auto fourth = run_pipeline(changed);
    CHECK(fourth.stages[0].status == "cached");
    CHECK(fourth.stages[1].status == "cached");
    CHECK(fourth.stages[2].status == "computed");
}

TEST_CASE("artifacts do not depend on thread count") {
    const auto a = scratch("t1"), b = scratch("t8");
    auto ca = mini(a), cb = mini(b);
    ca.threads = 1;
    cb.threads = 8;
    run_pipeline(ca);
    run_pipeline(cb);
    CHECK(slurp(a / "manifest.json") == slurp(b / "manifest.json"));
    for (const char* f : {"model.csv", "distances.csv", "cognates.csv", "cc_sc.phy", "bionj.tre"})
        CHECK(slurp(a / f) == slurp(b / f));
}

TEST_CASE("validation stage and disabled stages") {
    const auto out = scratch("val");
    auto c = mini(out);
    c.expert_tree = kMini + "/expert.tre";
    c.stages["chars"] = false;
    const auto m = run_pipeline(c);
    CHECK(m.stages[3].status == "disabled");
    CHECK(m.stages[5].status == "computed");
    CHECK(m.artifacts.size() == 7);
    CHECK(m.artifacts.back().path == "gqd.csv");
    CHECK(slurp(out / "gqd.csv").rfind("gqd,standard_error", 0) == 0);
}

TEST_CASE("a failing stage stops the run") {
    const auto out = scratch("fail");
    auto c = mini(out);
    c.gold.clear();
    std::string message;
    try {
        run_pipeline(c);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::StageFailure);
        message = e.what();
    }
    CHECK(message.find("stage cluster") != std::string::npos);
    const auto manifest = slurp(out / "manifest.json");
    CHECK(manifest.find("\"failed\"") != std::string::npos);
    CHECK(manifest.find("bionj.tre") == std::string::npos);
    CHECK_FALSE(fs::exists(out / "bionj.tre"));
}
