#include "lexiphylo/pipeline.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "lexiphylo/chars.hpp"
#include "lexiphylo/cogclust.hpp"
#include "lexiphylo/error.hpp"
#include "lexiphylo/lexdist.hpp"
#include "lexiphylo/numfmt.hpp"
#include "lexiphylo/parallel.hpp"
#include "lexiphylo/phylo.hpp"
#include "lexiphylo/pmi_train.hpp"
#include "lexiphylo/rng.hpp"

namespace fs = std::filesystem;

namespace lexiphylo {

namespace {

constexpr const char* kCacheVersion = "lexiphylo-cache-1";

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return {};
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    fail(ErrorCode::InvalidArgument, "config " + key + ": expected a boolean, got '" + v + "'");
}

std::uint64_t parse_uint(const std::string& v, const std::string& key) {
    try {
        std::size_t used = 0;
        const auto x = std::stoull(v, &used);
        if (used != v.size() || v.front() == '-') throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        fail(ErrorCode::InvalidArgument, "config " + key + ": expected a non-negative integer, got '" + v + "'");
    }
}

std::string read_bytes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        fail(ErrorCode::Io, "SHA-256 failed");
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 15];
    }
    return out;
}

std::string sha256_file(const std::string& path) { return sha256_hex(read_bytes(path)); }

PipelineConfig parse_pipeline_config(std::istream& in, const std::string& base_dir) {
    PipelineConfig c;
    auto path = [&](const std::string& v) {
        if (v.empty()) return v;
        const fs::path p(v);
        return (p.is_absolute() ? p : fs::path(base_dir) / p).lexically_normal().string();
    };
    auto real = [](const std::string& v, const std::string& key) { return parse_double(v, "config " + key); };
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            fail(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), v = trim(line.substr(eq + 1));
        if (key == "corpus") c.corpus = path(v);
        else if (key == "gold") c.gold = path(v);
        else if (key == "classifier") c.classifier = path(v);
        else if (key == "expert_tree") c.expert_tree = path(v);
        else if (key == "output_dir") c.output_dir = path(v);
        else if (key == "cache_dir") c.cache_dir = path(v);
        else if (key == "seed") c.seed = parse_uint(v, key);
        else if (key == "threads") c.threads = static_cast<unsigned>(parse_uint(v, key));
        else if (key == "gap_open") c.gap_open = real(v, key);
        else if (key == "gap_extend") c.gap_extend = real(v, key);
        else if (key == "theta") c.theta = real(v, key);
        else if (key == "optimize") c.optimize = parse_bool(v, key);
        else if (key == "refine_iterations") c.refine_iterations = static_cast<int>(parse_uint(v, key));
        else if (key == "ldn_threshold") c.ldn_threshold = real(v, key);
        else if (key == "smoothing") c.smoothing = real(v, key);
        else if (key == "cluster_threshold") c.cluster_threshold = real(v, key);
        else if (key == "training_pairs") c.training_pairs = parse_uint(v, key);
        else if (key == "classifier_kind") {
            if (v != "svm" && v != "logistic")
                fail(ErrorCode::InvalidArgument, "config classifier_kind: expected svm or logistic");
            c.classifier_kind = v;
        } else if (key.rfind("stage.", 0) == 0 && c.stages.count(key.substr(6))) {
            c.stages[key.substr(6)] = parse_bool(v, key);
        } else {
            fail(ErrorCode::InvalidArgument, "config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
    }
    return c;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::Io, "cannot open " + path);
    return parse_pipeline_config(in, fs::path(path).parent_path().string().empty()
                                         ? std::string(".")
                                         : fs::path(path).parent_path().string());
}

std::string RunManifest::json() const {
    nlohmann::ordered_json j;
    j["format"] = "lexiphylo-manifest-1";
    j["stages"] = nlohmann::ordered_json::array();
    for (const auto& s : stages) j["stages"].push_back({{"name", s.name}, {"status", s.status}, {"key", s.key}});
    j["artifacts"] = nlohmann::ordered_json::array();
    for (const auto& a : artifacts) j["artifacts"].push_back({{"path", a.path}, {"sha256", a.sha256}, {"stage", a.stage}});
    return j.dump(2) + "\n";
}

namespace {

struct Stage {
    std::string name;
    std::vector<std::string> outputs;                        // file names in output_dir
    std::vector<std::string> inputs;                         // files whose bytes feed the key
    std::vector<std::pair<std::string, std::string>> params; // config values that matter
    std::function<void(const fs::path& dir)> run;            // writes outputs into dir
};

std::string stage_key(const Stage& s) {
    std::string text = std::string(kCacheVersion) + "\nstage " + s.name + "\n";
    for (const auto& [k, v] : s.params) text += "param " + k + "=" + v + "\n";
    for (const auto& f : s.inputs) text += "input " + sha256_file(f) + "\n";
    for (const auto& o : s.outputs) text += "output " + o + "\n";
    return sha256_hex(text);
}

// Listing "<sha256> <name>" per output; entry valid iff every hash matches.
bool cache_valid(const fs::path& entry, const Stage& s) {
    std::ifstream in(entry / "ENTRY");
    if (!in) return false;
    std::map<std::string, std::string> listed;
    std::string hash, name;
    while (in >> hash >> name) listed[name] = hash;
    if (listed.size() != s.outputs.size()) return false;
    for (const auto& o : s.outputs) {
        const auto it = listed.find(o);
        if (it == listed.end() || !fs::exists(entry / o)) return false;
        if (sha256_file((entry / o).string()) != it->second) return false;
    }
    return true;
}

void write_manifest(const RunManifest& m, const fs::path& out) {
    std::ofstream f(out / "manifest.json", std::ios::binary);
    if (!f) fail(ErrorCode::Io, "cannot write manifest");
    f << m.json();
}

}  // namespace

RunManifest run_pipeline(const PipelineConfig& config) {
    if (config.corpus.empty()) fail(ErrorCode::InvalidArgument, "config: corpus is required");
    if (config.output_dir.empty()) fail(ErrorCode::InvalidArgument, "config: output_dir is required");
    if (!config.seed) fail(ErrorCode::InvalidArgument, "config: seed is required");
    const std::uint64_t seed = *config.seed;
    set_thread_count(config.threads);

    const fs::path out(config.output_dir);
    const fs::path cache = config.cache_dir.empty() ? out / ".cache" : fs::path(config.cache_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + out.string() + ": " + ec.message());
    fs::create_directories(cache, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + cache.string() + ": " + ec.message());

    const auto f = [](double v) { return format_double(v); };
    auto at = [&](const std::string& name) { return (out / name).string(); };

    std::vector<Stage> stages;
    stages.push_back({"train",
                      {"model.csv", "model.gaps.csv"},
                      {config.corpus},
                      {{"gap_open", f(config.gap_open)},
                       {"gap_extend", f(config.gap_extend)},
                       {"theta", f(config.theta)},
                       {"optimize", config.optimize ? "1" : "0"},
                       {"refine_iterations", std::to_string(config.refine_iterations)},
                       {"ldn_threshold", f(config.ldn_threshold)},
                       {"smoothing", f(config.smoothing)},
                       {"seed", std::to_string(derive_seed(seed, "train"))}},
                      [&](const fs::path& dir) {
                          const auto corpus = load_corpus(config.corpus);
                          TrainingConfig t;
                          t.gap_open = config.gap_open;
                          t.gap_extend = config.gap_extend;
                          t.theta = config.theta;
                          t.refine_iterations = config.refine_iterations;
                          t.ldn_related_threshold = config.ldn_threshold;
                          t.smoothing = config.smoothing;
                          t.seed = derive_seed(seed, "train");
                          save_model(train_pmi(corpus, t, config.optimize).model, (dir / "model.csv").string());
                      }});
    stages.push_back({"distances",
                      {"distances.csv", "distances.nex"},
                      {config.corpus, at("model.csv"), at("model.gaps.csv")},
                      {},
                      [&](const fs::path& dir) {
                          const auto corpus = load_corpus(config.corpus);
                          const auto d = distance_matrix(corpus, load_model(at("model.csv")));
                          save_distance_csv(d, (dir / "distances.csv").string());
                          save_distance_nexus(d, (dir / "distances.nex").string());
                      }});
    {
        Stage s{"cluster",
                {"cognates.csv"},
                {config.corpus, at("model.csv"), at("model.gaps.csv"), at("distances.csv")},
                {{"threshold", f(config.cluster_threshold)},
                 {"training_pairs", std::to_string(config.training_pairs)},
                 {"classifier_kind", config.classifier_kind},
                 {"seed", std::to_string(derive_seed(seed, "cluster"))}},
                [&](const fs::path& dir) {
                    const auto corpus = load_corpus(config.corpus);
                    const auto model = load_model(at("model.csv"));
                    ClassifierModel cls;
                    if (!config.classifier.empty()) {
                        std::ifstream in(config.classifier);
                        if (!in) fail(ErrorCode::Io, "cannot open " + config.classifier);
                        cls = read_classifier(in);
                    } else if (!config.gold.empty()) {
                        const auto gold = index_gold(load_gold(config.gold));
                        const auto gd = distance_matrix(gold.corpus, model);
                        const FeatureContext gctx(gold.corpus, model, gd);
                        cls = train_on_gold(selection_data(gold, gctx), kSelectedFeatures,
                                            derive_seed(seed, "classifier"), config.training_pairs,
                                            config.classifier_kind == "svm" ? ClassifierKind::Svm
                                                                            : ClassifierKind::Logistic);
                    } else {
                        fail(ErrorCode::InvalidArgument, "clustering needs gold or classifier in the config");
                    }
                    const auto d = load_distance_csv(at("distances.csv"));
                    ClusterOptions co;
                    co.threshold = config.cluster_threshold;
                    co.seed = derive_seed(seed, "cluster");
                    save_cognates(cluster_corpus(corpus, model, d, cls, co), (dir / "cognates.csv").string());
                }};
        if (!config.classifier.empty()) s.inputs.push_back(config.classifier);
        else if (!config.gold.empty()) s.inputs.push_back(config.gold);
        stages.push_back(std::move(s));
    }
    stages.push_back({"chars",
                      {"cc_sc.phy", "part.txt"},
                      {config.corpus, at("cognates.csv")},
                      {},
                      [&](const fs::path& dir) {
                          const auto corpus = load_corpus(config.corpus);
                          const auto cc = filter_variable(build_cognate_chars(corpus, load_cognates(at("cognates.csv"))));
                          const auto sc = filter_variable(build_soundclass_chars(corpus));
                          const auto combined = combine_and_partition(cc, sc);
                          save_phylip(combined.matrix, (dir / "cc_sc.phy").string());
                          save_partition(combined.partition, (dir / "part.txt").string());
                      }});
    stages.push_back({"trees",
                      {"bionj.tre"},
                      {at("distances.csv")},
                      {},
                      [&](const fs::path& dir) {
                          save_newick(bionj(load_distance_csv(at("distances.csv"))), (dir / "bionj.tre").string());
                      }});
    if (!config.expert_tree.empty())
        stages.push_back({"validation",
                          {"gqd.csv"},
                          {at("bionj.tre"), config.expert_tree},
                          {{"seed", std::to_string(derive_seed(seed, "validation"))}},
                          [&](const fs::path& dir) {
                              GqdOptions g;
                              g.seed = derive_seed(seed, "validation");
                              const auto r = gqd(read_newick_file(at("bionj.tre")), read_newick_file(config.expert_tree), g);
                              std::ofstream o(dir / "gqd.csv", std::ios::binary);
                              o << "gqd,standard_error,resolved_quartets,shared_leaves,exact\n"
                                << format_double(r.value) << ',' << format_double(r.standard_error) << ','
                                << r.resolved_quartets << ',' << r.shared_leaves << ',' << (r.exact ? 1 : 0) << '\n';
                              if (!o) fail(ErrorCode::Io, "cannot write gqd.csv");
                          }});

    RunManifest manifest;
    for (const auto& s : stages) {
        ManifestStage ms{s.name, "disabled", ""};
        const auto toggle = config.stages.find(s.name);
        if (toggle != config.stages.end() && !toggle->second) {
            manifest.stages.push_back(ms);
            continue;
        }
        try {
            ms.key = stage_key(s);
            const fs::path entry = cache / s.name / ms.key;
            if (fs::exists(entry) && cache_valid(entry, s)) {
                ms.status = "cached";
            } else {
                ms.status = fs::exists(entry) ? "rebuilt" : "computed";
                const fs::path staging = cache / s.name / (ms.key + ".tmp");
                fs::remove_all(staging);
                fs::remove_all(entry);
                fs::create_directories(staging);
                s.run(staging);
                std::ofstream listing(staging / "ENTRY", std::ios::binary);
                for (const auto& o : s.outputs) {
                    if (!fs::exists(staging / o)) fail(ErrorCode::Io, "stage did not produce " + o);
                    listing << sha256_file((staging / o).string()) << ' ' << o << '\n';
                }
                listing.close();
                fs::rename(staging, entry);
            }
            for (const auto& o : s.outputs) {
                fs::copy_file(entry / o, out / o, fs::copy_options::overwrite_existing);
                manifest.artifacts.push_back({o, sha256_file((out / o).string()), s.name});
            }
        } catch (const std::exception& e) {
            ms.status = "failed";
            manifest.stages.push_back(ms);
            write_manifest(manifest, out);
            fail(ErrorCode::StageFailure, "stage " + s.name + ": " + e.what());
        }
        manifest.stages.push_back(ms);
    }
    if (config.expert_tree.empty()) manifest.stages.push_back({"validation", "skipped", ""});
    write_manifest(manifest, out);
    return manifest;
}

}  // namespace lexiphylo
