#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "rprae/simdata.hpp"

using namespace rprae;

namespace {

double displacement(const ActionSequence& seq, int dim) {
    return seq.joints.at2(seq.length - 1, dim) - seq.joints.at2(0, dim);
}

bool has_any_word(const std::vector<std::string>& tokens, const std::set<std::string>& words) {
    for (const auto& t : tokens)
        if (words.count(t)) return true;
    return false;
}

}  // namespace

TEST_SUITE("simdata") {

TEST_CASE("action enumeration") {
    auto arrs = enumerate_arrangements();
    CHECK(arrs.size() == 6);
    for (const auto& a : arrs) CHECK(a.left != a.right);

    auto specs = enumerate_action_specs();
    CHECK(specs.size() == 72);

    std::set<std::string> keys;
    std::map<std::string, int> per_arr;
    for (const auto& s : specs) {
        keys.insert(spec_key(s));
        per_arr[std::string(to_string(s.arr.left)) + to_string(s.arr.right)]++;
    }
    CHECK(keys.size() == 72);  // all distinct
    CHECK(per_arr.size() == 6);
    for (const auto& [k, n] : per_arr) CHECK(n == 12);
}

TEST_CASE("trajectory zero noise repetitions identical") {
    TrajectoryConfig cfg;
    cfg.T_slow = 20;
    cfg.T_fast = 12;
    cfg.sigma = 0.0;
    auto specs = enumerate_action_specs();
    for (int p : {0, 17, 44}) {
        auto r1 = synth_trajectory(specs[static_cast<size_t>(p)], cfg, 9, 1);
        auto r2 = synth_trajectory(specs[static_cast<size_t>(p)], cfg, 9, 2);
        CHECK(r1.length == r2.length);
        CHECK(r1.joints.bit_equal(r2.joints));
    }
}

TEST_CASE("trajectory push pull symmetry") {
    TrajectoryConfig cfg;
    cfg.T_slow = 20;
    cfg.T_fast = 12;
    cfg.sigma = 0.0;
    Arrangement arr{Color::Green, Color::Red};
    ActionSpec push{Motion::Push, Hand::Left, Speed::Slowly, arr};
    ActionSpec pull{Motion::Pull, Hand::Left, Speed::Slowly, arr};
    auto sp = synth_trajectory(push, cfg, 3, 1);
    auto sl = synth_trajectory(pull, cfg, 3, 1);
    const double dp = displacement(sp, 1);  // left-arm reach axis
    const double dl = displacement(sl, 1);
    CHECK(std::fabs(dp + dl) < 1e-12);
    CHECK(std::fabs(dp - 0.6) < 1e-12);
}

TEST_CASE("trajectory lengths around nominals") {
    TrajectoryConfig full;
    auto specs = enumerate_action_specs();
    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        for (const auto& spec : specs) {
            auto seq = synth_trajectory(spec, full, seed, 1);
            if (spec.speed == Speed::Slowly) {
                CHECK(seq.length >= 38);
                CHECK(seq.length <= 40);
            } else {
                CHECK(seq.length >= 25);
                CHECK(seq.length <= 27);
            }
            CHECK(seq.joints.dim(0) == seq.length);
            CHECK(seq.joints.dim(1) == 10);
        }
    }
}

TEST_CASE("trajectory stays within joint limits") {
    TrajectoryConfig cfg;
    cfg.T_slow = 20;
    cfg.T_fast = 12;
    cfg.sigma = 0.3;  // exaggerated noise to force clamping
    auto specs = enumerate_action_specs();
    for (const auto& spec : specs) {
        auto seq = synth_trajectory(spec, cfg, 5, 2);
        for (int i = 0; i < seq.joints.size(); ++i) {
            CHECK(seq.joints[i] <= 0.8);
            CHECK(seq.joints[i] >= -0.8);
        }
    }
}

TEST_CASE("trajectory shape and idle arm") {
    TrajectoryConfig cfg;
    cfg.T_slow = 21;  // odd so tau = 0.5 lands on a step
    cfg.T_fast = 12;
    cfg.sigma = 0.0;
    cfg.jitter = false;
    ActionSpec spec{Motion::Push, Hand::Left, Speed::Slowly, {Color::Red, Color::Green}};
    auto seq = synth_trajectory(spec, cfg, 1, 1);
    REQUIRE(seq.length == 21);
    // Minimum-jerk midpoint: s(1/2) = A/2.
    CHECK(std::fabs(seq.joints.at2(10, 1) - 0.3) < 1e-12);
    CHECK(seq.joints.at2(0, 1) == 0.0);
    CHECK(std::fabs(seq.joints.at2(20, 1) - 0.6) < 1e-12);
    // Monotone reach profile.
    for (int t = 1; t < 21; ++t) CHECK(seq.joints.at2(t, 1) >= seq.joints.at2(t - 1, 1));
    // Right arm never moves with sigma 0.
    for (int t = 0; t < 21; ++t)
        for (int d = 5; d < 10; ++d) CHECK(seq.joints.at2(t, d) == 0.0);
}

TEST_CASE("trajectory determinism and noise") {
    TrajectoryConfig cfg;
    cfg.T_slow = 20;
    cfg.T_fast = 12;
    ActionSpec spec{Motion::Slide, Hand::Right, Speed::Fast, {Color::Yellow, Color::Red}};
    auto a = synth_trajectory(spec, cfg, 7, 3);
    auto b = synth_trajectory(spec, cfg, 7, 3);
    CHECK(a.joints.bit_equal(b.joints));
    auto c = synth_trajectory(spec, cfg, 7, 4);
    CHECK_FALSE(a.joints.bit_equal(c.joints));
    auto d = synth_trajectory(spec, cfg, 8, 3);
    CHECK_FALSE(a.joints.bit_equal(d.joints));

    TrajectoryConfig bad;
    bad.T_slow = 10;
    bad.T_fast = 12;
    CHECK_THROWS_AS(synth_trajectory(spec, bad, 1, 1), UsageError);
    TrajectoryConfig tiny;
    tiny.T_slow = 5;
    tiny.T_fast = 3;
    CHECK_THROWS_AS(synth_trajectory(spec, tiny, 1, 1), UsageError);
}

TEST_CASE("visual features") {
    auto v = visual_features({Color::Green, Color::Red}, 1);
    CHECK(v.size() == 10);
    CHECK(v[0] == 0.0);
    CHECK(v[1] == 1.0);
    CHECK(v[2] == 0.0);
    CHECK(v[3] == 1.0);
    CHECK(v[4] == 0.0);
    CHECK(v[5] == 0.0);
    for (int d = 6; d < 10; ++d) CHECK(std::fabs(v[static_cast<size_t>(d)]) < 0.5);

    auto v2 = visual_features({Color::Green, Color::Red}, 1);
    CHECK(v == v2);

    auto w = visual_features({Color::Yellow, Color::Red}, 1);
    // Same seed, different left color: only the left one-hot changes.
    CHECK(w[1] == 0.0);
    CHECK(w[2] == 1.0);
    for (int d = 3; d < 10; ++d) CHECK(w[static_cast<size_t>(d)] == v[static_cast<size_t>(d)]);
}

TEST_CASE("describe hand values") {
    auto lex = SynonymLexicon::builtin();
    ActionSpec spec{Motion::Slide, Hand::Right, Speed::Slowly, {Color::Green, Color::Red}};
    auto d1 = describe(spec, 1, lex);
    CHECK(d1.tokens == std::vector<std::string>{"BOS", "slide", "red", "slowly", "EOS"});
    auto d3 = describe(spec, 3, lex);
    CHECK(d3.tokens == std::vector<std::string>{"BOS", "slip", "cardinal", "gradually", "EOS"});

    ActionSpec push{Motion::Push, Hand::Right, Speed::Slowly, {Color::Green, Color::Red}};
    CHECK(describe(push, 1, lex).tokens ==
          std::vector<std::string>{"BOS", "push", "red", "slowly", "EOS"});

    // Left hand reads the left cube.
    ActionSpec left{Motion::Push, Hand::Left, Speed::Fast, {Color::Green, Color::Red}};
    CHECK(describe(left, 1, lex).tokens ==
          std::vector<std::string>{"BOS", "push", "green", "fast", "EOS"});

    auto mixed = describe_mixed(spec, 1, 3, 2, lex);
    CHECK(mixed.tokens == std::vector<std::string>{"BOS", "slide", "cardinal", "leisurely", "EOS"});

    CHECK_THROWS_AS(describe(spec, 0, lex), UsageError);
    CHECK_THROWS_AS(describe(spec, 6, lex), UsageError);
}

TEST_CASE("describe matches expected groups for every spec") {
    auto lex = SynonymLexicon::builtin();
    for (const auto& spec : enumerate_action_specs()) {
        auto groups = expected_groups(spec);
        for (int k = 1; k <= 5; ++k) {
            auto d = describe(spec, k, lex);
            REQUIRE(d.tokens.size() == 5);
            CHECK(d.tokens.front() == "BOS");
            CHECK(d.tokens.back() == "EOS");
            CHECK(lex.group_of(d.tokens[1]) == groups[0]);
            CHECK(lex.group_of(d.tokens[2]) == groups[1]);
            CHECK(lex.group_of(d.tokens[3]) == groups[2]);
            CHECK(lex.group(groups[0]).pos == Pos::Verb);
            CHECK(lex.group(groups[1]).pos == Pos::Adjective);
            CHECK(lex.group(groups[2]).pos == Pos::Adverb);
        }
    }
}

TEST_CASE("folds") {
    auto folds = make_folds();
    REQUIRE(folds.size() == 5);
    CHECK(folds[0].test_set == 1);
    CHECK(folds[0].train_sets == std::vector<int>{2, 3, 4, 5});
    for (const auto& f : folds) {
        std::set<int> all(f.train_sets.begin(), f.train_sets.end());
        CHECK(all.size() == 4);
        CHECK(all.count(f.test_set) == 0);
        all.insert(f.test_set);
        CHECK(all == std::set<int>{1, 2, 3, 4, 5});
    }
}

TEST_CASE("cell pattern counts full scale") {
    auto counts = cell_pattern_counts(DataConfig::full_scale());
    CHECK(counts[0] == 3456);
    CHECK(counts[1] == 3294);
    CHECK(counts[2] == 1152);
    CHECK(counts[3] == 1098);
    // Training sequences once repetitions are included.
    CHECK(counts[0] * 6 == 20736);
}

TEST_CASE("cell pattern counts desk scale") {
    auto counts = cell_pattern_counts(DataConfig::desk_scale());
    CHECK(counts[0] == 54 * 8);
    CHECK(counts[1] == 54 * 19);
    CHECK(counts[2] == 18 * 8);
    CHECK(counts[3] == 18 * 19);
}

TEST_CASE("build dataset desk scale") {
    auto lex = SynonymLexicon::builtin();
    auto cfg = DataConfig::desk_scale();
    cfg.seed = 11;
    cfg.fold = 1;
    auto built = build_dataset(cfg, lex);

    // Action split: 54 + 18 disjoint patterns covering all 72.
    CHECK(built.train_pattern_ids.size() == 54);
    CHECK(built.test_pattern_ids.size() == 18);
    std::set<int> all(built.train_pattern_ids.begin(), built.train_pattern_ids.end());
    all.insert(built.test_pattern_ids.begin(), built.test_pattern_ids.end());
    CHECK(all.size() == 72);

    auto expected = cell_pattern_counts(cfg);
    for (int c = 0; c < 4; ++c)
        CHECK(built.split.pattern_count(static_cast<Cell>(c)) == expected[static_cast<size_t>(c)]);
    CHECK(built.data.samples.size() == 72u * 27u);
    CHECK(built.data.sequences.size() == 72u);

    // Exhaustive independent reclassification of every sample.
    std::set<int> train_patterns(built.train_pattern_ids.begin(), built.train_pattern_ids.end());
    auto specs = enumerate_action_specs();
    const std::set<int> train_sets = {2, 3};  // fold 1 desk scale
    for (const auto& s : built.data.samples) {
        int pattern = -1;
        for (size_t p = 0; p < specs.size(); ++p)
            if (specs[p] == s.spec) pattern = static_cast<int>(p);
        REQUIRE(pattern >= 0);
        const bool ta = train_patterns.count(pattern) != 0;
        bool td = true;
        for (int k : s.word_set) {
            CHECK((k == 1 || train_sets.count(k) != 0));
            if (train_sets.count(k) == 0) td = false;
        }
        Cell want = ta ? (td ? Cell::TrainActTrainDsc : Cell::TrainActUnseenDsc)
                       : (td ? Cell::TestActTrainDsc : Cell::TestActUnseenDsc);
        CHECK(s.cell == want);
        // Description must match the spec and the per-slot sets.
        auto d = describe_mixed(s.spec, s.word_set[0], s.word_set[1], s.word_set[2], lex);
        CHECK(s.description.tokens == d.tokens);
        // Sequence consistency.
        const auto& seq = built.data.seq_of(s);
        CHECK(seq.length == seq.joints.dim(0));
        CHECK(seq.visual.size() == 10);
    }

    // No test-fold word in the training cell; at least one in every unseen description.
    std::set<std::string> held_out;
    for (const auto& g : lex.groups()) held_out.insert(g.members[0]);  // word set 1
    for (int idx : built.split.cell(Cell::TrainActTrainDsc))
        CHECK_FALSE(has_any_word(built.data.samples[static_cast<size_t>(idx)].description.tokens, held_out));
    for (Cell c : {Cell::TrainActUnseenDsc, Cell::TestActUnseenDsc})
        for (int idx : built.split.cell(c))
            CHECK(has_any_word(built.data.samples[static_cast<size_t>(idx)].description.tokens, held_out));
}

TEST_CASE("build dataset reproducible") {
    auto lex = SynonymLexicon::builtin();
    auto cfg = DataConfig::desk_scale();
    cfg.seed = 4;
    auto b1 = build_dataset(cfg, lex);
    auto b2 = build_dataset(cfg, lex);
    REQUIRE(b1.data.samples.size() == b2.data.samples.size());
    for (size_t i = 0; i < b1.data.sequences.size(); ++i) {
        CHECK(b1.data.sequences[i].joints.bit_equal(b2.data.sequences[i].joints));
        CHECK(b1.data.sequences[i].visual == b2.data.sequences[i].visual);
    }
    for (size_t i = 0; i < b1.data.samples.size(); ++i)
        CHECK(b1.data.samples[i].id == b2.data.samples[i].id);

    cfg.seed = 5;
    auto b3 = build_dataset(cfg, lex);
    CHECK(b3.train_pattern_ids != b1.train_pattern_ids);
}

TEST_CASE("dataset repetitions share executions across descriptions") {
    auto lex = SynonymLexicon::builtin();
    auto cfg = DataConfig::desk_scale();
    cfg.repetitions = 2;
    cfg.seed = 2;
    auto built = build_dataset(cfg, lex);
    CHECK(built.data.sequences.size() == 72u * 2u);
    std::map<std::pair<std::string, int>, std::set<int>> seqs_by_exec;
    for (const auto& s : built.data.samples)
        seqs_by_exec[{spec_key(s.spec), s.repetition}].insert(s.seq_index);
    for (const auto& [exec, ids] : seqs_by_exec) CHECK(ids.size() == 1);
    CHECK(built.split.pattern_count(Cell::TrainActTrainDsc) == 54 * 8);
    CHECK(static_cast<int>(built.split.cell(Cell::TrainActTrainDsc).size()) == 54 * 8 * 2);
}

TEST_CASE("dataset jsonl round trip") {
    auto lex = SynonymLexicon::builtin();
    DataConfig cfg;
    cfg.seed = 6;
    cfg.fold = 2;
    cfg.repetitions = 1;
    cfg.train_sets = 1;
    cfg.traj.T_slow = 6;
    cfg.traj.T_fast = 4;
    auto built = build_dataset(cfg, lex);

    auto path = (std::filesystem::temp_directory_path() / "ds_roundtrip.jsonl").string();
    save_dataset_jsonl(path, built);
    auto loaded = load_dataset_jsonl(path);

    REQUIRE(loaded.data.samples.size() == built.data.samples.size());
    for (size_t i = 0; i < built.data.samples.size(); ++i) {
        const auto& a = built.data.samples[i];
        const auto& b = loaded.data.samples[i];
        CHECK(a.id == b.id);
        CHECK(a.spec == b.spec);
        CHECK(a.description.tokens == b.description.tokens);
        CHECK(a.word_set == b.word_set);
        CHECK(a.repetition == b.repetition);
        CHECK(a.cell == b.cell);
        CHECK(built.data.seq_of(a).joints.bit_equal(loaded.data.seq_of(b).joints));
        CHECK(built.data.seq_of(a).visual == loaded.data.seq_of(b).visual);
    }
    for (int c = 0; c < 4; ++c)
        CHECK(built.split.cell(static_cast<Cell>(c)).size() ==
              loaded.split.cell(static_cast<Cell>(c)).size());
    CHECK(loaded.train_pattern_ids == built.train_pattern_ids);
    CHECK(loaded.test_pattern_ids == built.test_pattern_ids);
    std::filesystem::remove(path);
}

TEST_CASE("dataset jsonl field order and parse errors") {
    auto lex = SynonymLexicon::builtin();
    DataConfig cfg;
    cfg.seed = 1;
    cfg.repetitions = 1;
    cfg.train_sets = 1;
    cfg.traj.T_slow = 6;
    cfg.traj.T_fast = 4;
    auto built = build_dataset(cfg, lex);
    auto path = (std::filesystem::temp_directory_path() / "ds_order.jsonl").string();
    save_dataset_jsonl(path, built);

    std::ifstream in(path);
    std::string first;
    REQUIRE(std::getline(in, first));
    auto pos = [&](const char* k) { return first.find(std::string("\"") + k + "\""); };
    CHECK(pos("id") < pos("spec"));
    CHECK(pos("spec") < pos("joints"));
    CHECK(pos("joints") < pos("visual"));
    CHECK(pos("visual") < pos("tokens"));
    CHECK(pos("tokens") < pos("word_set"));
    CHECK(pos("word_set") < pos("repetition"));
    CHECK(pos("repetition") < pos("cell"));
    in.close();

    {
        std::ofstream out(path, std::ios::app);
        out << "{ not json\n";
    }
    bool threw = false;
    try {
        load_dataset_jsonl(path);
    } catch (const ParseError& e) {
        threw = true;
        CHECK(std::string(e.what()).find("line") != std::string::npos);
    }
    CHECK(threw);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_dataset_jsonl("/nonexistent/ds.jsonl"), ParseError);
}

}  // TEST_SUITE
