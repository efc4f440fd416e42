#pragma once

#include <map>
#include <string>
#include <vector>

#include "rprae/model.hpp"
#include "rprae/simdata.hpp"
#include "rprae/tensor.hpp"

namespace rprae {

// Alignment cost between two [T,d] trajectories: Euclidean local cost,
// D(i,j) = d(a_i,b_j) + min(D(i-1,j), D(i,j-1), D(i-1,j-1)). Raw cost by
// default; normalize divides by |a|+|b|.
double dtw(const Tensor& a, const Tensor& b, bool normalize = false);

// A generated description counts iff it is exactly one word from the verb,
// adjective and adverb groups the spec calls for, in that order, then EOS.
// `tokens` is the decoder output with the BOS prime already excluded.
bool description_success(const std::vector<std::string>& tokens, const ActionSpec& spec,
                         const SynonymLexicon& lex);

// FAST wants T <= threshold, SLOWLY wants T > threshold (strict).
bool speed_success(int T, Speed speed, int threshold);

struct TaskThresholds {
    double d_min = 0.36;      // required net displacement along the motion axis
    int speed_threshold = 16; // desk scale; 30 at full scale
};
// Simulator-space task check: the acting arm moves most, the motion axis
// moves the right way far enough, and the speed condition holds.
bool task_success(const Tensor& joints, const ActionSpec& spec, const TaskThresholds& th);

struct Agg {
    int n = 0;
    double mean = 0.0;
    double stdev = 0.0;  // population
};
Agg aggregate(const std::vector<double>& xs);

// Flat keyed report; keys sort so serialization is deterministic.
// act2dsc keys:  success:all, success:split:{train,test}, success:cell:<cell>
// dsc2act keys:  dtw:{all,cell:<cell>,unseen:<0-3>,pos:<grouping>},
//                speed:... and task:... with the same suffixes (rates in %).
struct EvalReport {
    std::string mode;
    std::map<std::string, Agg> metrics;
};

enum class EvalMode { ActToDsc, DscToAct };

struct EvalConfig {
    int test_word_set = 1;  // the fold's held-out set
    TaskThresholds task;
    StopConfig stop;
    int max_len = 5;
    bool normalize_dtw = false;
    int threads = 1;  // worker bound; the report is thread-count invariant
};

// Walk the whole dataset in one direction. act2dsc: encode each action,
// greedy-decode a description, score it. dsc2act: encode each description,
// generate joints from the rest pose in that sample's scene, score DTW vs
// the paired trajectory plus the speed and task checks.
EvalReport evaluate(const ModelParams& m, const EmbeddingTable& table, const SynonymLexicon& lex,
                    const BuiltDataset& built, EvalMode mode, const EvalConfig& cfg);

// The 8 columns of the per-POS breakdown ("none", "verb", ..., "verb+adj+adv").
std::string pos_grouping(bool verb_unseen, bool adj_unseen, bool adv_unseen);

void write_report_json(const EvalReport& report, const std::string& path);
void write_report_csv(const EvalReport& report, const std::string& path);

// Every vocabulary word pushed through the retrofit stack, lexicon order.
// The identity ablation returns the raw table rows.
Tensor retrofit_all(const ModelParams& m, const EmbeddingTable& table, const SynonymLexicon& lex);

struct EmbeddingAnalysis {
    Tensor cosine_input;   // [V,V], lexicon order
    Tensor cosine_retro;
    Tensor pca_input;      // [V,3]
    Tensor pca_retro;
    double intra_before = 0, inter_before = 0;   // mean member-pair cosines
    double intra_after = 0, inter_after = 0;
    double antonym_before = 0, antonym_after = 0;  // slowly vs fast group centroids
};
EmbeddingAnalysis analyze_embeddings(const ModelParams& m, const EmbeddingTable& table,
                                     const SynonymLexicon& lex);

void write_analysis_json(const EmbeddingAnalysis& a, const std::string& path);
std::string svg_heatmap(const Tensor& m, const std::vector<std::string>& labels);
std::string svg_scatter(const Tensor& coords, const std::vector<std::string>& labels, int cx, int cy);

}  // namespace rprae
