#pragma once

#include <array>
#include <string>
#include <vector>

#include "rprae/errors.hpp"

namespace rprae {

enum class Pos { Verb, Adjective, Adverb };

// One synonym group: a canonical label plus its five members, ordered by
// word set (set k uses member k-1 of every group).
struct SynonymGroup {
    std::string label;
    Pos pos;
    std::array<std::string, 5> members;
};

// The task lexicon: 3 verb groups, 3 adjective groups, 2 adverb groups,
// plus the sequence symbols. Vocabulary order is groups contiguous in
// declaration order, then symbols last. With merged_symbols the two
// sentinels share one vocabulary slot (41 entries instead of 42); token
// strings stay "BOS"/"EOS" either way.
class SynonymLexicon {
  public:
    static SynonymLexicon builtin(bool merged_symbols = false);

    const std::vector<SynonymGroup>& groups() const { return groups_; }
    bool merged_symbols() const { return merged_; }

    int vocab_size() const { return static_cast<int>(vocab_.size()); }
    const std::vector<std::string>& vocab() const { return vocab_; }
    const std::string& token_at(int index) const;

    // Token -> vocabulary index; BOS and EOS collapse to one slot when
    // merged. Unknown token -> VocabError.
    int index_of(const std::string& token) const;
    bool contains(const std::string& token) const;

    int bos_index() const { return bos_index_; }
    int eos_index() const { return eos_index_; }
    static const std::string& bos_token();
    static const std::string& eos_token();

    // Group index of a word (0..7), or -1 for symbols/unknown.
    int group_of(const std::string& word) const;
    const SynonymGroup& group(int g) const { return groups_[static_cast<size_t>(g)]; }
    int group_count() const { return static_cast<int>(groups_.size()); }

  private:
    std::vector<SynonymGroup> groups_;
    std::vector<std::string> vocab_;
    bool merged_ = false;
    int bos_index_ = -1;
    int eos_index_ = -1;
};

}  // namespace rprae
