#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "rprae/adam.hpp"
#include "rprae/embedding.hpp"
#include "rprae/graph.hpp"
#include "rprae/lexicon.hpp"
#include "rprae/simdata.hpp"

namespace rprae {

struct ModelConfig {
    int embed_dim = 16;
    int hidden = 64;          // LSTM units per direction, encoder and decoder
    int z_dim = 64;
    int retrofit_hidden = 24;
    int vocab = 42;
    int joint_dim = 10;
    int visual_dim = 10;
    bool identity_retrofit = false;  // ablation: no retrofit layer at all

    int action_input() const { return joint_dim + visual_dim; }

    static ModelConfig desk();
    static ModelConfig full();

    bool operator==(const ModelConfig&) const = default;
};

struct Param {
    Tensor value;
    ParamState state;
    Param(Tensor v, ParamState s) : value(std::move(v)), state(std::move(s)) {}
};

// All learnable parameters, addressed by name. "ret.*" is the retrofit
// stack; everything else belongs to the two autoencoders. The alternating
// schedule updates exactly one of the two sets per iteration, so the split
// is part of the contract, not a convention.
class ModelParams {
  public:
    static ModelParams init(const ModelConfig& cfg, std::uint64_t seed);

    const ModelConfig& config() const { return cfg_; }

    Tensor& value(const std::string& name);
    const Tensor& value(const std::string& name) const;
    ParamState& state(const std::string& name);
    const ParamState& state(const std::string& name) const;

    const std::vector<std::string>& names() const { return names_; }  // sorted
    static bool is_retrofit(const std::string& name) { return name.rfind("ret.", 0) == 0; }

    // Replace every parameter value in name order; used by checkpoint load
    // and the finite-difference harness.
    void set_values(const std::vector<Tensor>& values);

  private:
    ModelConfig cfg_;
    std::vector<std::string> names_;
    std::unordered_map<std::string, Param> params_;
};

// One model bound onto one tape: parameter leaves are created in name order
// so gradients can be read back per parameter.
struct BoundModel {
    Tape* tape = nullptr;
    const ModelParams* model = nullptr;
    const EmbeddingTable* table = nullptr;
    const SynonymLexicon* lex = nullptr;
    std::unordered_map<std::string, int> ids;

    int id(const std::string& name) const;
};

BoundModel bind_model(Tape& tape, const ModelParams& m, const EmbeddingTable& table,
                      const SynonymLexicon& lex);

// tanh(W3 tanh(W2 tanh(W1 e + b1) + b2) + b3); the identity ablation passes
// the input through untouched.
int retrofit_forward(const BoundModel& bm, int x);

// Embedding lookup (through the lexicon so merged symbols resolve) plus
// retrofit. Unknown tokens throw VocabError.
int embed_token(const BoundModel& bm, const std::string& token);

// biLSTM over retrofitted token embeddings, tanh projection of the two
// final states to z.
int encode_description(const BoundModel& bm, const std::vector<std::string>& tokens);

// biLSTM over [joints_t, visual] rows, same projection shape.
int encode_action(const BoundModel& bm, const ActionSequence& seq);

// Teacher-forced decoder passes used in training: consume the ground truth
// prefix, return the per-step prediction nodes for positions 1..T-1.
std::vector<int> teacher_force_description(const BoundModel& bm, int z,
                                           const std::vector<std::string>& tokens);
std::vector<int> teacher_force_action(const BoundModel& bm, int z, const ActionSequence& seq);

// Closed-loop greedy generation (inference only; runs its own tape).
struct DecodedDescription {
    std::vector<std::string> tokens;  // emitted tokens, BOS prime excluded
    std::vector<Tensor> dists;        // per-step vocabulary distributions
};
DecodedDescription decode_description(const ModelParams& m, const EmbeddingTable& table,
                                      const SynonymLexicon& lex, const Tensor& z, int max_len = 5);

struct StopConfig {
    double eps = 0.01;
    int patience = 3;
    int T_max = 28;
};
// Closed-loop joint generation: frame 0 is initial_joints, each output is
// clamped to [-0.8, 0.8] and fed back; stops after `patience` consecutive
// steps whose largest joint delta is below eps, or at T_max frames.
Tensor decode_action(const ModelParams& m, const Tensor& z, const std::vector<double>& initial_joints,
                     const std::vector<double>& visual, const StopConfig& stop);

// The three losses, built on the tape (ids of scalar nodes).
int loss_dsc(const BoundModel& bm, const std::vector<int>& dists, const std::vector<std::string>& tokens);
int loss_act(const BoundModel& bm, const std::vector<int>& preds, const ActionSequence& seq);
int loss_shr(Tape& tape, const std::vector<int>& z_act, const std::vector<int>& z_dsc, double margin);

// The sequence extended by `frames` copies of its final row. Training the
// action decoder on held tails is what lets the closed-loop stop rule fire:
// the raw trajectories end mid-settle, with too few sub-eps deltas for the
// patience window, so the decoder must learn that the final pose is a fixed
// point.
ActionSequence with_hold_tail(const ActionSequence& seq, int frames);

struct BatchLosses {
    int dsc = -1;
    int act = -1;
    int shr = -1;
    int all = -1;  // unweighted sum
};
// Full paired-batch forward: encode and teacher-force both modalities for
// every sample, mean per-sample reconstruction losses, batch binding loss.
// Encoders read the raw sequences (matching evaluation); the action decoder
// is supervised on a hold_tail-padded copy.
BatchLosses batch_losses(const BoundModel& bm, const PairedDataset& data,
                         const std::vector<int>& sample_indices, double margin, int hold_tail = 3);

}  // namespace rprae
