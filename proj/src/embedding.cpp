#include "rprae/embedding.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "rprae/rng.hpp"

namespace rprae {

EmbeddingTable::EmbeddingTable(int dim) : dim_(dim) {
    if (dim <= 0) throw ShapeError("EmbeddingTable: dim must be positive");
}

void EmbeddingTable::add(const std::string& word, std::vector<double> vec) {
    if (static_cast<int>(vec.size()) != dim_)
        throw ShapeError("EmbeddingTable::add: vector for '" + word + "' has length " +
                         std::to_string(vec.size()) + ", table dim is " + std::to_string(dim_));
    for (double v : vec)
        if (!std::isfinite(v)) throw NumericError("EmbeddingTable::add: non-finite value for '" + word + "'");
    if (contains(word)) throw VocabError("EmbeddingTable::add: duplicate word '" + word + "'");
    index_[word] = static_cast<int>(words_.size());
    words_.push_back(word);
    vecs_.push_back(std::move(vec));
}

const std::vector<double>& EmbeddingTable::at(const std::string& word) const {
    auto it = index_.find(word);
    if (it == index_.end()) throw VocabError("embedding table has no entry for '" + word + "'");
    return vecs_[static_cast<size_t>(it->second)];
}

namespace {

std::string strip_cr(std::string line) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
}

}  // namespace

EmbeddingTable load_embedding_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open embedding file '" + path + "'");

    std::string line;
    int lineno = 0;
    if (!std::getline(in, line)) throw ParseError(path + ": missing header");
    ++lineno;
    long long count = 0, dim = 0;
    {
        std::istringstream hs(strip_cr(line));
        std::string extra;
        if (!(hs >> count >> dim) || (hs >> extra) || count <= 0 || dim <= 0)
            throw ParseError(path + " line 1: malformed header '" + line + "'");
    }

    EmbeddingTable table(static_cast<int>(dim));
    while (std::getline(in, line)) {
        ++lineno;
        line = strip_cr(line);
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string word;
        ls >> word;
        std::vector<double> vec;
        vec.reserve(static_cast<size_t>(dim));
        double v;
        while (ls >> v) vec.push_back(v);
        if (!ls.eof())
            throw ParseError(path + " line " + std::to_string(lineno) + ": unparsable value");
        if (static_cast<long long>(vec.size()) != dim)
            throw ParseError(path + " line " + std::to_string(lineno) + ": expected " + std::to_string(dim) +
                             " values, got " + std::to_string(vec.size()));
        for (double x : vec)
            if (!std::isfinite(x))
                throw ParseError(path + " line " + std::to_string(lineno) + ": non-finite value");
        if (table.contains(word))
            throw ParseError(path + " line " + std::to_string(lineno) + ": duplicate word '" + word + "'");
        table.add(word, std::move(vec));
    }
    if (table.size() != count)
        throw ParseError(path + ": header promises " + std::to_string(count) + " entries, file has " +
                         std::to_string(table.size()));
    return table;
}

namespace {

std::vector<double> random_unit(Rng& rng, int dim) {
    std::vector<double> v(static_cast<size_t>(dim));
    double norm;
    do {
        norm = 0;
        for (auto& x : v) {
            x = rng.gaussian();
            norm += x * x;
        }
        norm = std::sqrt(norm);
    } while (norm < 1e-12);
    for (auto& x : v) x /= norm;
    return v;
}

void normalize(std::vector<double>& v) {
    double norm = 0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm < 1e-12) throw NumericError("synth_pretrained: degenerate vector");
    for (auto& x : v) x /= norm;
}

}  // namespace

EmbeddingTable synth_pretrained(const SynonymLexicon& lexicon, int dim, std::uint64_t seed,
                                const SynthConfig& cfg) {
    if (dim < 8) throw UsageError("synth_pretrained: dim must be at least 8, got " + std::to_string(dim));
    if (cfg.intra_noise < 0 || cfg.antonym_gap < 0 || cfg.antonym_gap > 1)
        throw UsageError("synth_pretrained: bad noise/gap configuration");

    Rng rng(seed);

    // Group centroids. The second adverb group is rotated off the first at a
    // fixed angle instead of drawn independently, so the two speed clusters
    // sit close together the way corpus statistics put them. The target
    // cosine leaves half the gap as margin so that measured member centroids
    // stay above 1 - antonym_gap under intra-group noise.
    const int ng = lexicon.group_count();
    std::vector<std::vector<double>> centroids(static_cast<size_t>(ng));
    int first_adverb = -1;
    for (int g = 0; g < ng; ++g) {
        const auto& grp = lexicon.group(g);
        if (grp.pos == Pos::Adverb && first_adverb >= 0) {
            const auto& base = centroids[static_cast<size_t>(first_adverb)];
            Rng crng = rng.split("centroid:" + grp.label);
            std::vector<double> w = random_unit(crng, dim);
            double proj = 0;
            for (int i = 0; i < dim; ++i) proj += w[static_cast<size_t>(i)] * base[static_cast<size_t>(i)];
            for (int i = 0; i < dim; ++i) w[static_cast<size_t>(i)] -= proj * base[static_cast<size_t>(i)];
            normalize(w);
            const double ct = 1.0 - 0.5 * cfg.antonym_gap;
            const double st = std::sqrt(std::max(0.0, 1.0 - ct * ct));
            std::vector<double> c(static_cast<size_t>(dim));
            for (int i = 0; i < dim; ++i)
                c[static_cast<size_t>(i)] = ct * base[static_cast<size_t>(i)] + st * w[static_cast<size_t>(i)];
            centroids[static_cast<size_t>(g)] = std::move(c);
        } else {
            Rng crng = rng.split("centroid:" + grp.label);
            centroids[static_cast<size_t>(g)] = random_unit(crng, dim);
            if (grp.pos == Pos::Adverb) first_adverb = g;
        }
    }

    EmbeddingTable table(dim);
    for (const auto& word : lexicon.vocab()) {
        int g = lexicon.group_of(word);
        if (g < 0) {
            Rng srng = rng.split("symbol:" + word);
            table.add(word, random_unit(srng, dim));
            continue;
        }
        Rng wrng = rng.split("member:" + word);
        std::vector<double> v = centroids[static_cast<size_t>(g)];
        for (auto& x : v) x += cfg.intra_noise * wrng.gaussian();
        normalize(v);
        table.add(word, std::move(v));
    }
    return table;
}

}  // namespace rprae
