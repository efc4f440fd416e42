#include "rprae/simdata.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include <json.hpp>

#include "rprae/rng.hpp"

namespace rprae {

namespace {

constexpr double kAmp = 0.6;
constexpr double kJointLimit = 0.8;
constexpr int kJointDims = 10;
constexpr int kArmDims = 5;

int color_index(Color c) { return static_cast<int>(c); }

double clamp_joint(double v) { return std::min(kJointLimit, std::max(-kJointLimit, v)); }

}  // namespace

const char* to_string(Motion m) {
    switch (m) {
        case Motion::Pull: return "PULL";
        case Motion::Push: return "PUSH";
        case Motion::Slide: return "SLIDE";
    }
    return "?";
}

const char* to_string(Hand h) { return h == Hand::Left ? "LEFT" : "RIGHT"; }

const char* to_string(Speed s) { return s == Speed::Slowly ? "SLOWLY" : "FAST"; }

const char* to_string(Color c) {
    switch (c) {
        case Color::Red: return "red";
        case Color::Green: return "green";
        case Color::Yellow: return "yellow";
    }
    return "?";
}

Motion motion_from_string(const std::string& s) {
    if (s == "PULL") return Motion::Pull;
    if (s == "PUSH") return Motion::Push;
    if (s == "SLIDE") return Motion::Slide;
    throw ParseError("unknown motion '" + s + "'");
}

Hand hand_from_string(const std::string& s) {
    if (s == "LEFT") return Hand::Left;
    if (s == "RIGHT") return Hand::Right;
    throw ParseError("unknown hand '" + s + "'");
}

Speed speed_from_string(const std::string& s) {
    if (s == "SLOWLY") return Speed::Slowly;
    if (s == "FAST") return Speed::Fast;
    throw ParseError("unknown speed '" + s + "'");
}

Color color_from_string(const std::string& s) {
    if (s == "red") return Color::Red;
    if (s == "green") return Color::Green;
    if (s == "yellow") return Color::Yellow;
    throw ParseError("unknown color '" + s + "'");
}

std::string spec_key(const ActionSpec& spec) {
    std::string key = to_string(spec.motion);
    key += '-';
    key += to_string(spec.hand);
    key += '-';
    key += to_string(spec.speed);
    key += '-';
    key += to_string(spec.arr.left)[0];
    key += to_string(spec.arr.right)[0];
    return key;
}

std::vector<Arrangement> enumerate_arrangements() {
    std::vector<Arrangement> out;
    for (Color l : {Color::Red, Color::Green, Color::Yellow})
        for (Color r : {Color::Red, Color::Green, Color::Yellow})
            if (l != r) out.push_back({l, r});
    return out;
}

std::vector<ActionSpec> enumerate_action_specs() {
    std::vector<ActionSpec> out;
    for (const auto& arr : enumerate_arrangements())
        for (Motion m : {Motion::Pull, Motion::Push, Motion::Slide})
            for (Hand h : {Hand::Left, Hand::Right})
                for (Speed s : {Speed::Slowly, Speed::Fast})
                    out.push_back({m, h, s, arr});
    return out;
}

ActionSequence synth_trajectory(const ActionSpec& spec, const TrajectoryConfig& cfg, std::uint64_t seed,
                                int repetition) {
    if (!(cfg.T_slow > cfg.T_fast && cfg.T_fast >= 4))
        throw UsageError("synth_trajectory: need T_slow > T_fast >= 4, got " + std::to_string(cfg.T_slow) +
                         "/" + std::to_string(cfg.T_fast));
    if (repetition < 1) throw UsageError("synth_trajectory: repetition is 1-based");
    if (cfg.sigma < 0) throw UsageError("synth_trajectory: negative sigma");

    const std::string key = spec_key(spec);
    Rng base(seed);

    // Length jitter belongs to the pattern, not the repetition: with sigma=0
    // all repetitions of a pattern must come out identical.
    int T = spec.speed == Speed::Slowly ? cfg.T_slow : cfg.T_fast;
    if (cfg.jitter) {
        Rng lrng = base.split("len:" + key);
        T += static_cast<int>(lrng.next_below(3)) - 1;
    }

    // Per-joint displacement pattern of the acting arm, local dims 0..4.
    // Dim 1 is the reach axis (pull back / push forward), dim 0 the lateral
    // axis used by slide; the rest are small coordinated support motions.
    std::array<double, kArmDims> amp{};
    switch (spec.motion) {
        case Motion::Pull:
            amp = {0.0, -kAmp, 0.3 * kAmp, -0.2 * kAmp, 0.1 * kAmp};
            break;
        case Motion::Push:
            amp = {0.0, kAmp, -0.3 * kAmp, 0.2 * kAmp, -0.1 * kAmp};
            break;
        case Motion::Slide: {
            const double lateral = spec.hand == Hand::Left ? kAmp : -kAmp;
            amp = {lateral, 0.0, 0.15 * kAmp, 0.1 * kAmp, -0.1 * kAmp};
            break;
        }
    }

    Rng nrng = base.split("traj:" + key).split(static_cast<std::uint64_t>(repetition));
    std::array<double, kJointDims> rest{};
    for (auto& r : rest) r += cfg.sigma * nrng.gaussian();
    for (auto& a : amp) a += cfg.sigma * nrng.gaussian();

    const int arm0 = spec.hand == Hand::Left ? 0 : kArmDims;
    Tensor joints = Tensor::zeros({T, kJointDims});
    for (int t = 0; t < T; ++t) {
        const double tau = T > 1 ? static_cast<double>(t) / (T - 1) : 0.0;
        const double m = ((10.0 + (-15.0 + 6.0 * tau) * tau) * tau) * tau * tau;  // 10t^3-15t^4+6t^5
        for (int d = 0; d < kJointDims; ++d) {
            double v = rest[static_cast<size_t>(d)];
            if (d >= arm0 && d < arm0 + kArmDims) v += amp[static_cast<size_t>(d - arm0)] * m;
            joints.data()[static_cast<size_t>(t) * kJointDims + d] = clamp_joint(v);
        }
    }

    ActionSequence seq;
    seq.joints = std::move(joints);
    seq.visual.assign(kJointDims, 0.0);
    seq.length = T;
    return seq;
}

std::vector<double> visual_features(const Arrangement& arr, std::uint64_t seed) {
    std::vector<double> v(kJointDims, 0.0);
    v[static_cast<size_t>(color_index(arr.left))] = 1.0;
    v[static_cast<size_t>(3 + color_index(arr.right))] = 1.0;
    Rng rng = Rng(seed).split("visual");
    for (int d = 6; d < kJointDims; ++d) v[static_cast<size_t>(d)] = rng.gaussian(0.0, 0.05);
    return v;
}

std::array<int, 3> expected_groups(const ActionSpec& spec) {
    const int verb_group = static_cast<int>(spec.motion);
    const Color c = spec.hand == Hand::Left ? spec.arr.left : spec.arr.right;
    const int adj_group = 3 + color_index(c);
    const int adv_group = spec.speed == Speed::Slowly ? 6 : 7;
    return {verb_group, adj_group, adv_group};
}

Description describe_mixed(const ActionSpec& spec, int kv, int ka, int kd, const SynonymLexicon& lexicon) {
    for (int k : {kv, ka, kd})
        if (k < 1 || k > 5) throw UsageError("describe: word set index must be 1..5");
    const auto groups = expected_groups(spec);
    Description d;
    d.tokens = {SynonymLexicon::bos_token(),
                lexicon.group(groups[0]).members[static_cast<size_t>(kv - 1)],
                lexicon.group(groups[1]).members[static_cast<size_t>(ka - 1)],
                lexicon.group(groups[2]).members[static_cast<size_t>(kd - 1)],
                SynonymLexicon::eos_token()};
    return d;
}

Description describe(const ActionSpec& spec, int k, const SynonymLexicon& lexicon) {
    return describe_mixed(spec, k, k, k, lexicon);
}

std::vector<Fold> make_folds() {
    std::vector<Fold> folds;
    for (int i = 1; i <= 5; ++i) {
        Fold f;
        f.test_set = i;
        for (int k = 1; k <= 5; ++k)
            if (k != i) f.train_sets.push_back(k);
        folds.push_back(std::move(f));
    }
    return folds;
}

const char* to_string(Cell c) {
    switch (c) {
        case Cell::TrainActTrainDsc: return "train_trained";
        case Cell::TrainActUnseenDsc: return "train_unseen";
        case Cell::TestActTrainDsc: return "test_trained";
        case Cell::TestActUnseenDsc: return "test_unseen";
    }
    return "?";
}

Cell cell_from_string(const std::string& s) {
    if (s == "train_trained") return Cell::TrainActTrainDsc;
    if (s == "train_unseen") return Cell::TrainActUnseenDsc;
    if (s == "test_trained") return Cell::TestActTrainDsc;
    if (s == "test_unseen") return Cell::TestActUnseenDsc;
    throw ParseError("unknown cell '" + s + "'");
}

DataConfig DataConfig::full_scale() {
    DataConfig cfg;
    cfg.repetitions = 6;
    cfg.train_sets = 4;
    cfg.traj.T_slow = 39;
    cfg.traj.T_fast = 26;
    return cfg;
}

DataConfig DataConfig::desk_scale() {
    DataConfig cfg;
    cfg.repetitions = 1;
    cfg.train_sets = 2;
    cfg.traj.T_slow = 20;
    cfg.traj.T_fast = 12;
    return cfg;
}

namespace {

void validate_config(const DataConfig& cfg) {
    if (cfg.fold < 1 || cfg.fold > 5) throw UsageError("fold must be 1..5");
    if (cfg.train_sets < 1 || cfg.train_sets > 4) throw UsageError("train_sets must be 1..4");
    if (cfg.train_patterns < 1 || cfg.train_patterns > 71)
        throw UsageError("train_patterns must be 1..71");
    if (cfg.repetitions < 1) throw UsageError("repetitions must be positive");
}

// Word sets in play for a fold, ascending: the first `train_sets` training
// sets plus the held-out set.
void fold_sets(const DataConfig& cfg, std::vector<int>& in_play, std::vector<int>& train) {
    const Fold fold = make_folds()[static_cast<size_t>(cfg.fold - 1)];
    train.assign(fold.train_sets.begin(), fold.train_sets.begin() + cfg.train_sets);
    in_play = train;
    in_play.push_back(fold.test_set);
    std::sort(in_play.begin(), in_play.end());
}

}  // namespace

std::array<long long, 4> cell_pattern_counts(const DataConfig& cfg) {
    validate_config(cfg);
    const long long P = cfg.train_patterns;
    const long long Q = 72 - P;
    const long long s = cfg.train_sets;
    const long long all = (s + 1) * (s + 1) * (s + 1);
    const long long trained = s * s * s;
    return {P * trained, P * (all - trained), Q * trained, Q * (all - trained)};
}

BuiltDataset build_dataset(const DataConfig& cfg, const SynonymLexicon& lexicon) {
    validate_config(cfg);

    std::vector<int> in_play, train_sets;
    fold_sets(cfg, in_play, train_sets);
    auto is_train_set = [&](int k) {
        return std::find(train_sets.begin(), train_sets.end(), k) != train_sets.end();
    };

    const auto specs = enumerate_action_specs();
    const int n = static_cast<int>(specs.size());

    // Seeded action split: shuffle the canonical pattern indices, the first
    // train_patterns become training actions.
    std::vector<int> perm(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<size_t>(i)] = i;
    Rng prng = Rng(cfg.seed).split("action-split");
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(prng.next_below(static_cast<std::uint64_t>(i + 1)));
        std::swap(perm[static_cast<size_t>(i)], perm[static_cast<size_t>(j)]);
    }
    std::vector<char> is_train_pattern(static_cast<size_t>(n), 0);
    BuiltDataset built;
    for (int i = 0; i < n; ++i) {
        if (i < cfg.train_patterns) {
            is_train_pattern[static_cast<size_t>(perm[static_cast<size_t>(i)])] = 1;
            built.train_pattern_ids.push_back(perm[static_cast<size_t>(i)]);
        } else {
            built.test_pattern_ids.push_back(perm[static_cast<size_t>(i)]);
        }
    }
    std::sort(built.train_pattern_ids.begin(), built.train_pattern_ids.end());
    std::sort(built.test_pattern_ids.begin(), built.test_pattern_ids.end());

    // One executed sequence per (pattern, repetition), shared by every
    // description of that execution.
    built.data.sequences.reserve(static_cast<size_t>(n) * cfg.repetitions);
    for (int p = 0; p < n; ++p) {
        const auto& spec = specs[static_cast<size_t>(p)];
        for (int r = 1; r <= cfg.repetitions; ++r) {
            ActionSequence seq = synth_trajectory(spec, cfg.traj, cfg.seed, r);
            const std::uint64_t vseed =
                Rng(cfg.seed).split("vis:" + spec_key(spec)).split(static_cast<std::uint64_t>(r)).seed();
            seq.visual = visual_features(spec.arr, vseed);
            built.data.sequences.push_back(std::move(seq));
        }
    }

    built.split.repetitions = cfg.repetitions;
    for (int p = 0; p < n; ++p) {
        const auto& spec = specs[static_cast<size_t>(p)];
        const std::string key = spec_key(spec);
        for (int kv : in_play)
            for (int ka : in_play)
                for (int kd : in_play) {
                    const bool trained_dsc = is_train_set(kv) && is_train_set(ka) && is_train_set(kd);
                    Cell cell;
                    if (is_train_pattern[static_cast<size_t>(p)])
                        cell = trained_dsc ? Cell::TrainActTrainDsc : Cell::TrainActUnseenDsc;
                    else
                        cell = trained_dsc ? Cell::TestActTrainDsc : Cell::TestActUnseenDsc;
                    for (int r = 1; r <= cfg.repetitions; ++r) {
                        PairedSample s;
                        s.id = key + "-w" + std::to_string(kv) + std::to_string(ka) + std::to_string(kd) +
                               "-r" + std::to_string(r);
                        s.spec = spec;
                        s.seq_index = p * cfg.repetitions + (r - 1);
                        s.description = describe_mixed(spec, kv, ka, kd, lexicon);
                        s.word_set = {kv, ka, kd};
                        s.repetition = r;
                        s.cell = cell;
                        built.split.cells[static_cast<size_t>(cell)].push_back(
                            static_cast<int>(built.data.samples.size()));
                        built.data.samples.push_back(std::move(s));
                    }
                }
    }
    return built;
}

void save_dataset_jsonl(const std::string& path, const BuiltDataset& built) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ParseError("cannot open '" + path + "' for writing");
    for (const auto& s : built.data.samples) {
        const auto& seq = built.data.seq_of(s);
        nlohmann::ordered_json j;
        j["id"] = s.id;
        j["spec"] = {{"motion", to_string(s.spec.motion)},
                     {"hand", to_string(s.spec.hand)},
                     {"speed", to_string(s.spec.speed)},
                     {"arrangement", {to_string(s.spec.arr.left), to_string(s.spec.arr.right)}}};
        nlohmann::ordered_json joints = nlohmann::ordered_json::array();
        for (int t = 0; t < seq.length; ++t) {
            nlohmann::ordered_json row = nlohmann::ordered_json::array();
            for (int d = 0; d < seq.joints.dim(1); ++d) row.push_back(seq.joints.at2(t, d));
            joints.push_back(std::move(row));
        }
        j["joints"] = std::move(joints);
        j["visual"] = seq.visual;
        j["tokens"] = s.description.tokens;
        j["word_set"] = s.word_set;
        j["repetition"] = s.repetition;
        j["cell"] = to_string(s.cell);
        out << j.dump() << '\n';
    }
    if (!out) throw ParseError("write to '" + path + "' failed");
}

BuiltDataset load_dataset_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open dataset '" + path + "'");
    BuiltDataset built;
    const auto specs = enumerate_action_specs();
    std::vector<char> seen_train(specs.size(), 0), seen_test(specs.size(), 0);

    std::string line;
    int lineno = 0;
    int max_rep = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + " line " + std::to_string(lineno) + ": " + e.what());
        }
        try {
            PairedSample s;
            s.id = j.at("id").get<std::string>();
            const auto& js = j.at("spec");
            s.spec.motion = motion_from_string(js.at("motion").get<std::string>());
            s.spec.hand = hand_from_string(js.at("hand").get<std::string>());
            s.spec.speed = speed_from_string(js.at("speed").get<std::string>());
            const auto& ja = js.at("arrangement");
            if (ja.size() != 2) throw ParseError("arrangement needs 2 colors");
            s.spec.arr.left = color_from_string(ja.at(0).get<std::string>());
            s.spec.arr.right = color_from_string(ja.at(1).get<std::string>());

            ActionSequence seq;
            const auto& jj = j.at("joints");
            const int T = static_cast<int>(jj.size());
            if (T < 1) throw ParseError("empty joints");
            seq.joints = Tensor::zeros({T, 10});
            for (int t = 0; t < T; ++t) {
                const auto& row = jj.at(static_cast<size_t>(t));
                if (row.size() != 10) throw ParseError("joint row needs 10 values");
                for (int d = 0; d < 10; ++d) {
                    const double v = row.at(static_cast<size_t>(d)).get<double>();
                    if (!std::isfinite(v) || std::fabs(v) > kJointLimit + 1e-12)
                        throw ParseError("joint value out of range");
                    seq.joints.data()[static_cast<size_t>(t) * 10 + d] = v;
                }
            }
            seq.length = T;
            seq.visual = j.at("visual").get<std::vector<double>>();
            if (seq.visual.size() != 10) throw ParseError("visual needs 10 values");

            s.description.tokens = j.at("tokens").get<std::vector<std::string>>();
            if (s.description.tokens.size() != 5) throw ParseError("tokens needs 5 entries");
            const auto ws = j.at("word_set").get<std::vector<int>>();
            if (ws.size() != 3) throw ParseError("word_set needs 3 entries");
            s.word_set = {ws[0], ws[1], ws[2]};
            s.repetition = j.at("repetition").get<int>();
            s.cell = cell_from_string(j.at("cell").get<std::string>());

            max_rep = std::max(max_rep, s.repetition);
            s.seq_index = static_cast<int>(built.data.sequences.size());
            built.data.sequences.push_back(std::move(seq));
            built.split.cells[static_cast<size_t>(s.cell)].push_back(
                static_cast<int>(built.data.samples.size()));

            for (size_t p = 0; p < specs.size(); ++p)
                if (specs[p] == s.spec) {
                    const bool train = s.cell == Cell::TrainActTrainDsc || s.cell == Cell::TrainActUnseenDsc;
                    (train ? seen_train : seen_test)[p] = 1;
                    break;
                }
            built.data.samples.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(path + " line " + std::to_string(lineno) + ": " + e.what());
        } catch (const ParseError& e) {
            throw ParseError(path + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (built.data.samples.empty()) throw ParseError(path + ": no samples");
    built.split.repetitions = max_rep;
    for (size_t p = 0; p < specs.size(); ++p) {
        if (seen_train[p]) built.train_pattern_ids.push_back(static_cast<int>(p));
        if (seen_test[p]) built.test_pattern_ids.push_back(static_cast<int>(p));
    }
    return built;
}

}  // namespace rprae
