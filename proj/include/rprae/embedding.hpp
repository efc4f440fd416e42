#pragma once

#include <string>
#include <unordered_map>
#include <vector>

#include "rprae/lexicon.hpp"
#include "rprae/tensor.hpp"

namespace rprae {

// Ordered word -> vector table. Order matters: similarity matrices and
// model vocabularies follow insertion order.
class EmbeddingTable {
  public:
    explicit EmbeddingTable(int dim);

    int dim() const { return dim_; }
    int size() const { return static_cast<int>(words_.size()); }

    void add(const std::string& word, std::vector<double> vec);
    bool contains(const std::string& word) const { return index_.count(word) != 0; }
    const std::vector<double>& at(const std::string& word) const;
    const std::vector<double>& at_index(int i) const { return vecs_[static_cast<size_t>(i)]; }
    const std::string& word_at(int i) const { return words_[static_cast<size_t>(i)]; }
    const std::vector<std::string>& words() const { return words_; }

  private:
    int dim_;
    std::vector<std::string> words_;
    std::vector<std::vector<double>> vecs_;
    std::unordered_map<std::string, int> index_;
};

// word2vec text format: header "<count> <dim>", then one word per line with
// dim decimals. LF or CRLF. Errors carry 1-based line numbers.
EmbeddingTable load_embedding_file(const std::string& path);

struct SynthConfig {
    double intra_noise = 0.05;
    double antonym_gap = 0.1;
};

// Synthetic pre-trained embeddings with the geometry distributional training
// tends to produce: tight synonym clusters, and the two speed-adverb
// clusters placed close together (cosine >= 1 - antonym_gap) even though the
// words are antonyms. One unit centroid per group; members are noisy copies,
// renormalized; BOS/EOS are independent unit vectors.
EmbeddingTable synth_pretrained(const SynonymLexicon& lexicon, int dim, std::uint64_t seed,
                                const SynthConfig& cfg = {});

}  // namespace rprae
