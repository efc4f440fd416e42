#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "rprae/model.hpp"

namespace rprae {

enum class UpdateTarget { AE, RET };
const char* to_string(UpdateTarget t);

// The alternating schedule: AE iff (i < n_ini) or int((i - n_ini)/n_ch) is
// odd. Iteration 0 with the stock settings is the warm-start AE step; after
// that the schedule flips every n_ch iterations starting with a RET block.
UpdateTarget update_target(long long i, long long n_ini, long long n_ch);

struct TrainConfig {
    long long N = 17300;
    long long n_ini = 1;
    long long n_ch = 100;
    double lr = 0.001;
    int batch = 120;
    double margin = 1.0;
    std::uint64_t seed = 0;
    long long checkpoint_every = 0;  // 0: only at the end
    int hold_tail = 3;
    long long start = 0;  // first iteration to run (resume cursor)

    static TrainConfig full_scale();
    static TrainConfig desk_scale();
};

struct TrainRecord {
    long long iter = 0;
    UpdateTarget target = UpdateTarget::AE;
    double dsc = 0, act = 0, shr = 0, all = 0;
};

struct TrainLog {
    std::vector<TrainRecord> records;
};

// Invoked on the checkpoint cadence and once after the final iteration;
// `next_iter` is the resume cursor (iterations completed so far).
using CheckpointFn = std::function<void(long long next_iter, const ModelParams& m, const TrainLog& log)>;

// Algorithm core: per iteration draw `batch` training samples uniformly
// with replacement (stateless RNG keyed by seed and iteration), build the
// three losses, backpropagate, and Adam-update exactly the parameter set
// the schedule names. RET iterations leave an identity-retrofit model
// untouched, preserving the wall-clock schedule of the ablation.
// Deterministic per (model, cfg); a non-finite loss aborts with the
// offending record appended.
TrainLog train(ModelParams& m, const EmbeddingTable& table, const SynonymLexicon& lex,
               const PairedDataset& data, const std::vector<int>& train_indices,
               const TrainConfig& cfg, const CheckpointFn& on_checkpoint = {});

// CSV with header iter,target,L_dsc,L_act,L_shr,L_all.
void write_train_log_csv(const TrainLog& log, const std::string& path);

// JSON checkpoint: {"version":1, "config":{...}, "params":{name:{"shape","data"}},
// "adam":{name:{"m","v","step"}}}, keys sorted, numbers round-tripping
// exactly. load(save(m)) == m bitwise, Adam state included.
void save_checkpoint(const ModelParams& m, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

// Resume cursor sidecar ("<ckpt>.meta.json"): the checkpoint schema itself
// carries no iteration, so exact resume stores it next door.
void save_train_meta(const std::string& ckpt_path, long long next_iteration);
long long load_train_meta(const std::string& ckpt_path);

// The ablation: same dimensions, no retrofit stack.
ModelConfig ablate_prae(ModelConfig cfg);

}  // namespace rprae
