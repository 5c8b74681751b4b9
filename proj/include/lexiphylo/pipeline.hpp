#pragma once
// End-to-end run: train -> distances -> cluster -> chars -> trees ->
// validation, with a content-addressed cache per stage and a manifest of
// every artifact's SHA-256.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace lexiphylo {

struct PipelineConfig {
    std::string corpus;
    std::string gold;         // needed by the cluster stage unless classifier is set
    std::string classifier;   // pre-trained classifier file
    std::string expert_tree;  // enables validation
    std::string output_dir;
    std::string cache_dir;    // default <output_dir>/.cache
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;

    double gap_open = -2.330;
    double gap_extend = -1.276;
    double theta = 4.401;
    bool optimize = false;
    int refine_iterations = 10;
    double ldn_threshold = 0.7;
    double smoothing = 1.0;
    double cluster_threshold = 0.25;
    std::size_t training_pairs = 7000;
    std::string classifier_kind = "svm";

    std::map<std::string, bool> stages = {{"train", true},  {"distances", true}, {"cluster", true},
                                          {"chars", true},  {"trees", true},     {"validation", true}};
};

// key = value lines, '#' comments. Relative paths resolve against base_dir.
PipelineConfig parse_pipeline_config(std::istream& in, const std::string& base_dir = ".");
PipelineConfig load_pipeline_config(const std::string& path);

struct ManifestArtifact {
    std::string path;  // relative to output_dir
    std::string sha256;
    std::string stage;
};

struct ManifestStage {
    std::string name;
    std::string status;  // computed, cached, rebuilt, disabled, skipped, failed
    std::string key;
};

struct RunManifest {
    std::vector<ManifestStage> stages;
    std::vector<ManifestArtifact> artifacts;
    std::string json() const;
};

// Throws StageFailure naming the stage; the manifest written so far is kept.
RunManifest run_pipeline(const PipelineConfig& config);

std::string sha256_hex(const std::string& bytes);
std::string sha256_file(const std::string& path);

}  // namespace lexiphylo
