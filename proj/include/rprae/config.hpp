#pragma once

#include <cstdint>
#include <string>

#include "rprae/evalkit.hpp"
#include "rprae/model.hpp"
#include "rprae/simdata.hpp"
#include "rprae/trainer.hpp"

namespace rprae {

// One flat bag of knobs for a whole run. A JSON snapshot of the merged
// config (file + flag overrides) is written next to every command's outputs
// so any artifact can be regenerated bit-identically.
struct RunConfig {
    std::string command;         // which subcommand the snapshot replays
    std::string scale = "desk";  // "desk" | "full"
    int fold = 1;                // 1..5; fold i holds out word set i
    std::uint64_t seed = 0;
    std::string out = "out";
    int threads = 1;
    std::string embeddings = "synthetic";  // or a word2vec text file path
    bool prae = false;                     // identity-retrofit ablation

    // Training schedule; preset() fills scale-appropriate values.
    long long N = 5000;
    int n_ini = 1;
    int n_ch = 100;
    double lr = 0.001;
    int batch = 16;
    double margin = 1.0;
    long long checkpoint_every = 0;  // 0 = final checkpoint only
    int hold_tail = 3;

    // Artifact paths; empty means "under the output directory".
    std::string dataset;     // default <out>/dataset.jsonl
    std::string checkpoint;  // default <out>/checkpoint.json
    std::string resume;      // train: checkpoint to continue from
    std::string mode = "act2dsc";  // eval: act2dsc | dsc2act

    static RunConfig preset(const std::string& scale);  // UsageError on unknown name

    void validate() const;  // UsageError on any out-of-range field

    DataConfig data_config() const;
    ModelConfig model_config() const;
    TrainConfig train_config() const;
    EvalConfig eval_config() const;

    std::string dataset_path() const;
    std::string checkpoint_path() const;

    bool operator==(const RunConfig&) const = default;
};

// Strict JSON round trip: unknown keys are errors, doubles survive exactly.
RunConfig run_config_from_json(const std::string& text);
std::string run_config_to_json(const RunConfig& cfg);

RunConfig load_run_config(const std::string& path);  // ParseError names the path
void save_run_config(const RunConfig& cfg, const std::string& path);

}  // namespace rprae
