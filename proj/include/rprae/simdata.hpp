#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "rprae/lexicon.hpp"
#include "rprae/tensor.hpp"

namespace rprae {

enum class Motion { Pull, Push, Slide };
enum class Hand { Left, Right };
enum class Speed { Slowly, Fast };
enum class Color { Red, Green, Yellow };

struct Arrangement {
    Color left = Color::Red;
    Color right = Color::Green;
    bool operator==(const Arrangement&) const = default;
};

struct ActionSpec {
    Motion motion = Motion::Pull;
    Hand hand = Hand::Left;
    Speed speed = Speed::Slowly;
    Arrangement arr;
    bool operator==(const ActionSpec&) const = default;
};

const char* to_string(Motion m);
const char* to_string(Hand h);
const char* to_string(Speed s);
const char* to_string(Color c);
Motion motion_from_string(const std::string& s);
Hand hand_from_string(const std::string& s);
Speed speed_from_string(const std::string& s);
Color color_from_string(const std::string& s);

// Canonical compact key, e.g. "PUSH-RIGHT-FAST-gr". Doubles as the RNG label
// for everything derived per pattern.
std::string spec_key(const ActionSpec& spec);

// All 6 ordered pairs of distinct cube colors, canonical order.
std::vector<Arrangement> enumerate_arrangements();

// 6 arrangements x (3 motions x 2 hands x 2 speeds) = 72 patterns,
// enumerated arrangement-major in a fixed canonical order.
std::vector<ActionSpec> enumerate_action_specs();

// One executed action: joint trajectory plus the visual feature vector of
// the scene it happened in.
struct ActionSequence {
    Tensor joints;               // [T, 10], all values in [-0.8, 0.8]
    std::vector<double> visual;  // length 10
    int length = 0;
};

struct TrajectoryConfig {
    int T_slow = 39;
    int T_fast = 26;
    double sigma = 0.01;  // control-point noise, per repetition
    bool jitter = true;   // +-1 step length jitter, per (seed, spec)
};

// Minimum-jerk trajectory for the acting arm; the other arm holds its rest
// pose. Deterministic in (seed, spec, repetition); with sigma = 0 every
// repetition of a pattern is identical, length included.
ActionSequence synth_trajectory(const ActionSpec& spec, const TrajectoryConfig& cfg, std::uint64_t seed,
                                int repetition);

// Scene encoding: one-hot left color (dims 0-2), one-hot right color
// (dims 3-5), Gaussian(0, 0.05) nuisance noise (dims 6-9).
std::vector<double> visual_features(const Arrangement& arr, std::uint64_t seed);

struct Description {
    std::vector<std::string> tokens;  // exactly [BOS, verb, adjective, adverb, EOS]
};

// Description of a spec with every slot drawn from word set k (1-based).
Description describe(const ActionSpec& spec, int k, const SynonymLexicon& lexicon);

// Per-slot word sets: verb from set kv, adjective from ka, adverb from kd.
Description describe_mixed(const ActionSpec& spec, int kv, int ka, int kd, const SynonymLexicon& lexicon);

// Group indices a correct description of this spec must use, in slot order
// verb, adjective, adverb.
std::array<int, 3> expected_groups(const ActionSpec& spec);

struct Fold {
    int test_set = 1;             // 1-based word set held out
    std::vector<int> train_sets;  // the other four, ascending
};

// Five-fold cross-validation over word sets: fold i tests on set i.
std::vector<Fold> make_folds();

enum class Cell : int {
    TrainActTrainDsc = 0,  // the only training cell
    TrainActUnseenDsc = 1,
    TestActTrainDsc = 2,
    TestActUnseenDsc = 3,
};
const char* to_string(Cell c);
Cell cell_from_string(const std::string& s);

struct PairedSample {
    std::string id;
    ActionSpec spec;
    int seq_index = -1;             // into PairedDataset::sequences
    Description description;
    std::array<int, 3> word_set{};  // per-slot sets (verb, adjective, adverb), 1-based
    int repetition = 1;             // 1-based
    Cell cell = Cell::TrainActTrainDsc;
};

struct PairedDataset {
    std::vector<ActionSequence> sequences;
    std::vector<PairedSample> samples;

    const ActionSequence& seq_of(const PairedSample& s) const {
        return sequences[static_cast<size_t>(s.seq_index)];
    }
};

struct DatasetSplit {
    std::array<std::vector<int>, 4> cells;  // sample indices per cell
    int repetitions = 1;

    const std::vector<int>& cell(Cell c) const { return cells[static_cast<size_t>(c)]; }
    // Table-style pattern count: action x description combinations, repetitions folded out.
    int pattern_count(Cell c) const {
        return static_cast<int>(cells[static_cast<size_t>(c)].size()) / repetitions;
    }
};

struct DataConfig {
    std::uint64_t seed = 0;
    int fold = 1;            // 1..5
    int repetitions = 6;
    int train_sets = 4;      // word sets trained on (rest of the fold ignored at desk scale)
    int train_patterns = 54; // action patterns in the training cells, of 72
    TrajectoryConfig traj;

    static DataConfig full_scale();
    static DataConfig desk_scale();
};

struct BuiltDataset {
    PairedDataset data;
    DatasetSplit split;
    std::vector<int> train_pattern_ids;  // canonical indices of training actions
    std::vector<int> test_pattern_ids;
};

// The whole data division: seeded 54/18 action split, descriptions expanded
// over per-slot word-set combinations, trajectories repeated with noise.
BuiltDataset build_dataset(const DataConfig& cfg, const SynonymLexicon& lexicon);

// Cell pattern counts by pure combinatorics, without materializing anything.
std::array<long long, 4> cell_pattern_counts(const DataConfig& cfg);

// JSON Lines round trip. Field order is fixed; doubles round-trip exactly.
void save_dataset_jsonl(const std::string& path, const BuiltDataset& built);
BuiltDataset load_dataset_jsonl(const std::string& path);

}  // namespace rprae
