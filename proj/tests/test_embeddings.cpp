#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "rprae/analysis.hpp"
#include "rprae/embedding.hpp"
#include "rprae/rng.hpp"

using namespace rprae;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
    auto path = std::filesystem::temp_directory_path() / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0, na = 0, nb = 0;
    for (size_t i = 0; i < a.size(); ++i) {
        d += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return d / std::sqrt(na * nb);
}

std::vector<double> group_centroid(const EmbeddingTable& table, const SynonymGroup& g) {
    std::vector<double> c(static_cast<size_t>(table.dim()), 0.0);
    for (const auto& m : g.members) {
        const auto& v = table.at(m);
        for (size_t i = 0; i < c.size(); ++i) c[i] += v[i] / 5.0;
    }
    return c;
}

}  // namespace

TEST_SUITE("embeddings") {

TEST_CASE("builtin lexicon shape") {
    auto lex = SynonymLexicon::builtin();
    REQUIRE(lex.group_count() == 8);
    int verbs = 0, adjs = 0, advs = 0;
    std::set<std::string> all;
    for (const auto& g : lex.groups()) {
        if (g.pos == Pos::Verb) ++verbs;
        if (g.pos == Pos::Adjective) ++adjs;
        if (g.pos == Pos::Adverb) ++advs;
        for (const auto& m : g.members) all.insert(m);
    }
    CHECK(verbs == 3);
    CHECK(adjs == 3);
    CHECK(advs == 2);
    CHECK(all.size() == 40);  // members unique across the lexicon
    CHECK(lex.vocab_size() == 42);
    CHECK(lex.bos_index() == 40);
    CHECK(lex.eos_index() == 41);
    CHECK(lex.token_at(40) == "BOS");
    CHECK(lex.token_at(41) == "EOS");

    // Groups contiguous in vocabulary order.
    for (int g = 0; g < 8; ++g)
        for (int m = 0; m < 5; ++m)
            CHECK(lex.vocab()[static_cast<size_t>(g * 5 + m)] == lex.group(g).members[static_cast<size_t>(m)]);
}

TEST_CASE("builtin lexicon word sets") {
    auto lex = SynonymLexicon::builtin();
    // Set k = k-th member of every group.
    CHECK(lex.group(0).members[0] == "pull");
    CHECK(lex.group(0).members[2] == "tug");
    CHECK(lex.group(2).members[2] == "slip");
    CHECK(lex.group(3).members[2] == "cardinal");
    CHECK(lex.group(6).members[0] == "slowly");
    CHECK(lex.group(6).members[2] == "gradually");
    CHECK(lex.group(7).members[0] == "fast");
    CHECK(lex.group(7).members[4] == "quickly");

    CHECK(lex.group_of("shove") == 1);
    CHECK(lex.group_of("chartreuse") == 4);
    CHECK(lex.group_of("BOS") == -1);
    CHECK(lex.group_of("banana") == -1);

    CHECK(lex.index_of("pull") == 0);
    CHECK(lex.index_of("skid") == 14);
    CHECK(lex.index_of("quickly") == 39);
    CHECK_THROWS_AS(lex.index_of("banana"), VocabError);
    CHECK(lex.contains("amber"));
    CHECK_FALSE(lex.contains("banana"));
}

TEST_CASE("merged symbol lexicon") {
    auto lex = SynonymLexicon::builtin(true);
    CHECK(lex.vocab_size() == 41);
    CHECK(lex.bos_index() == lex.eos_index());
    CHECK(lex.index_of("BOS") == lex.index_of("EOS"));
    CHECK(lex.token_at(40) == "EOS");
}

TEST_CASE("embedding file round trip") {
    auto p = write_temp("emb_ok.txt", "2 3\na 1 2 3\nb 0 0 1\n");
    auto table = load_embedding_file(p.string());
    CHECK(table.dim() == 3);
    CHECK(table.size() == 2);
    CHECK(table.at("a") == std::vector<double>{1, 2, 3});
    CHECK(table.at("b") == std::vector<double>{0, 0, 1});
    CHECK(table.word_at(0) == "a");
    CHECK_THROWS_AS(table.at("c"), VocabError);
    std::filesystem::remove(p);
}

TEST_CASE("embedding file accepts crlf") {
    auto p = write_temp("emb_crlf.txt", "2 2\r\na 1 2\r\nb 3 4\r\n");
    auto table = load_embedding_file(p.string());
    CHECK(table.at("b") == std::vector<double>{3, 4});
    std::filesystem::remove(p);
}

TEST_CASE("embedding file errors name the line") {
    auto check_throws_with = [](const std::string& name, const std::string& content,
                                const std::string& needle) {
        auto p = write_temp(name, content);
        bool threw = false;
        try {
            load_embedding_file(p.string());
        } catch (const ParseError& e) {
            threw = true;
            CHECK(std::string(e.what()).find(needle) != std::string::npos);
        }
        CHECK(threw);
        std::filesystem::remove(p);
    };
    check_throws_with("emb_short.txt", "2 3\na 1 2 3\nb 0 1\n", "line 3");
    check_throws_with("emb_empty.txt", "", "missing header");
    check_throws_with("emb_badhdr.txt", "two three\na 1 2 3\n", "header");
    check_throws_with("emb_dup.txt", "2 2\na 1 2\na 3 4\n", "line 3");
    check_throws_with("emb_badval.txt", "1 3\na 1 x 3\n", "line 2");
    check_throws_with("emb_count.txt", "3 2\na 1 2\nb 3 4\n", "promises 3");
    CHECK_THROWS_AS(load_embedding_file("/nonexistent/path/emb.txt"), ParseError);
}

TEST_CASE("synth zero noise collapses groups") {
    auto lex = SynonymLexicon::builtin();
    SynthConfig cfg;
    cfg.intra_noise = 0.0;
    auto table = synth_pretrained(lex, 16, 5, cfg);
    for (const auto& g : lex.groups()) {
        const auto& first = table.at(g.members[0]);
        for (const auto& m : g.members) CHECK(table.at(m) == first);
    }
}

TEST_CASE("synth places the speed antonym clusters together") {
    auto lex = SynonymLexicon::builtin();
    for (std::uint64_t seed : {1ull, 7ull, 123ull}) {
        auto table = synth_pretrained(lex, 16, seed);
        auto slow_c = group_centroid(table, lex.group(6));
        auto fast_c = group_centroid(table, lex.group(7));
        CHECK(cosine(slow_c, fast_c) >= 0.9);
    }
}

TEST_CASE("synth intra beats inter cosine") {
    auto lex = SynonymLexicon::builtin();
    SynthConfig cfg;
    cfg.intra_noise = 0.2;
    for (std::uint64_t seed : {2ull, 9ull}) {
        auto table = synth_pretrained(lex, 16, seed, cfg);
        double intra = 0, inter = 0;
        int n_intra = 0, n_inter = 0;
        for (int ga = 0; ga < 8; ++ga)
            for (int gb = 0; gb < 8; ++gb)
                for (int ma = 0; ma < 5; ++ma)
                    for (int mb = 0; mb < 5; ++mb) {
                        if (ga == gb && ma >= mb) continue;
                        if (ga > gb) continue;
                        double c = cosine(table.at(lex.group(ga).members[static_cast<size_t>(ma)]),
                                          table.at(lex.group(gb).members[static_cast<size_t>(mb)]));
                        if (ga == gb) {
                            intra += c;
                            ++n_intra;
                        } else {
                            inter += c;
                            ++n_inter;
                        }
                    }
        CHECK(intra / n_intra > inter / n_inter);
    }
}

TEST_CASE("synth unit norms and determinism") {
    auto lex = SynonymLexicon::builtin();
    auto t1 = synth_pretrained(lex, 16, 42);
    auto t2 = synth_pretrained(lex, 16, 42);
    auto t3 = synth_pretrained(lex, 16, 43);
    REQUIRE(t1.size() == 42);
    bool any_diff = false;
    for (int i = 0; i < t1.size(); ++i) {
        CHECK(t1.at_index(i) == t2.at_index(i));
        if (t1.at_index(i) != t3.at_index(i)) any_diff = true;
        double norm = 0;
        for (double x : t1.at_index(i)) norm += x * x;
        CHECK(std::fabs(std::sqrt(norm) - 1.0) < 1e-12);
    }
    CHECK(any_diff);
    CHECK_THROWS_AS(synth_pretrained(lex, 4, 1), UsageError);
}

TEST_CASE("cosine matrix hand values") {
    EmbeddingTable table(2);
    table.add("x", {1, 1});
    table.add("y", {1, 0});
    table.add("z", {0, 1});
    auto M = cosine_matrix(table, {"x", "y", "z"});
    CHECK(M.at2(0, 0) == 1.0);
    CHECK(std::fabs(M.at2(0, 1) - 1.0 / std::sqrt(2.0)) < 1e-12);
    CHECK(M.at2(1, 2) == 0.0);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) CHECK(std::fabs(M.at2(i, j) - M.at2(j, i)) < 1e-12);

    CHECK_THROWS_AS(cosine_matrix(table, {"x", "missing"}), VocabError);
    EmbeddingTable zt(2);
    zt.add("zero", {0, 0});
    CHECK_THROWS_AS(cosine_matrix(zt, {"zero"}), NumericError);
}

TEST_CASE("cosine matrix on synth table") {
    auto lex = SynonymLexicon::builtin();
    auto table = synth_pretrained(lex, 16, 11);
    auto M = cosine_matrix(table, lex.vocab());
    REQUIRE(M.dim(0) == 42);
    for (int i = 0; i < 42; ++i) {
        CHECK(M.at2(i, i) == 1.0);
        for (int j = 0; j < 42; ++j) {
            CHECK(std::fabs(M.at2(i, j) - M.at2(j, i)) < 1e-12);
            CHECK(M.at2(i, j) <= 1.0 + 1e-12);
            CHECK(M.at2(i, j) >= -1.0 - 1e-12);
        }
    }
}

TEST_CASE("pca collinear points") {
    EmbeddingTable table(3);
    // Five points on a line through (1,2,3) with direction (2,-1,2)/3.
    std::vector<double> ts = {-2.0, -0.5, 0.0, 1.0, 3.0};
    for (size_t i = 0; i < ts.size(); ++i)
        table.add("p" + std::to_string(i),
                  {1 + 2 * ts[i] / 3.0, 2 - ts[i] / 3.0, 3 + 2 * ts[i] / 3.0});
    auto res = pca_project(table, table.words(), 2);
    REQUIRE(res.variance.size() == 2);
    CHECK(res.variance[0] > 0.0);
    CHECK(res.variance[1] < 1e-18);
    CHECK(res.variance[0] / (res.variance[0] + res.variance[1] + 1e-30) ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("pca two points") {
    EmbeddingTable table(4);
    table.add("a", {0, 0, 0, 0});
    table.add("b", {2, 0, 2, 1});
    const double dist = 3.0;
    auto res = pca_project(table, table.words(), 1);
    CHECK(std::fabs(std::fabs(res.coords[0]) - dist / 2.0) < 1e-9);
    CHECK(std::fabs(res.coords[0] + res.coords[1]) < 1e-9);
}

TEST_CASE("pca reconstruction round trip") {
    Rng rng(314);
    EmbeddingTable table(6);
    const int n = 10, d = 6;
    for (int i = 0; i < n; ++i) {
        std::vector<double> v(d);
        for (auto& x : v) x = rng.uniform(-2.0, 2.0);
        table.add("w" + std::to_string(i), v);
    }
    auto res = pca_project(table, table.words(), d);

    // Recompute the centered data and compare with coords * components^T.
    std::vector<double> mean(d, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) mean[static_cast<size_t>(j)] += table.at_index(i)[static_cast<size_t>(j)] / n;
    double worst = 0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) {
            double recon = 0;
            for (int c = 0; c < d; ++c)
                recon += res.coords.at2(i, c) * res.components.at2(j, c);
            double centered = table.at_index(i)[static_cast<size_t>(j)] - mean[static_cast<size_t>(j)];
            worst = std::max(worst, std::fabs(recon - centered));
        }
    CHECK(worst < 1e-9);

    // Components orthonormal, variances non-increasing.
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double dot = 0;
            for (int r = 0; r < d; ++r) dot += res.components.at2(r, a) * res.components.at2(r, b);
            CHECK(std::fabs(dot - (a == b ? 1.0 : 0.0)) < 1e-9);
        }
    for (size_t c = 1; c < res.variance.size(); ++c) CHECK(res.variance[c] <= res.variance[c - 1] + 1e-12);

    CHECK_THROWS_AS(pca_project(table, table.words(), 7), ShapeError);
}

TEST_CASE("pca sign convention is deterministic") {
    auto lex = SynonymLexicon::builtin();
    auto table = synth_pretrained(lex, 16, 21);
    auto r1 = pca_project(table, lex.vocab(), 3);
    auto r2 = pca_project(table, lex.vocab(), 3);
    CHECK(r1.coords.bit_equal(r2.coords));
    CHECK(r1.components.bit_equal(r2.components));
    for (int c = 0; c < 3; ++c) {
        int arg = 0;
        double best = 0;
        for (int r = 0; r < 16; ++r)
            if (std::fabs(r1.components.at2(r, c)) > best) {
                best = std::fabs(r1.components.at2(r, c));
                arg = r;
            }
        CHECK(r1.components.at2(arg, c) > 0.0);
    }
}

}  // TEST_SUITE
