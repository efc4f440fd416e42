#include "rprae/lexicon.hpp"

namespace rprae {

SynonymLexicon SynonymLexicon::builtin(bool merged_symbols) {
    SynonymLexicon lex;
    lex.merged_ = merged_symbols;
    lex.groups_ = {
        {"pull", Pos::Verb, {"pull", "drag", "tug", "yank", "lug"}},
        {"push", Pos::Verb, {"push", "shove", "thrust", "jostle", "hustle"}},
        {"slide", Pos::Verb, {"slide", "glide", "slip", "shift", "skid"}},
        {"red", Pos::Adjective, {"red", "reddish", "cardinal", "coral", "flaming"}},
        {"green", Pos::Adjective, {"green", "greenish", "olive", "emerald", "chartreuse"}},
        {"yellow", Pos::Adjective, {"yellow", "yellowish", "cream", "amber", "tawny"}},
        {"slowly", Pos::Adverb, {"slowly", "leisurely", "gradually", "tardily", "steadily"}},
        {"fast", Pos::Adverb, {"fast", "speedily", "swiftly", "rapidly", "quickly"}},
    };
    for (const auto& g : lex.groups_)
        for (const auto& w : g.members) lex.vocab_.push_back(w);
    if (merged_symbols) {
        // One shared sentinel slot; keep "EOS" as its surface form so decoded
        // sequences still terminate on a printable stop token.
        lex.vocab_.push_back(eos_token());
        lex.bos_index_ = lex.eos_index_ = static_cast<int>(lex.vocab_.size()) - 1;
    } else {
        lex.vocab_.push_back(bos_token());
        lex.vocab_.push_back(eos_token());
        lex.bos_index_ = static_cast<int>(lex.vocab_.size()) - 2;
        lex.eos_index_ = static_cast<int>(lex.vocab_.size()) - 1;
    }
    return lex;
}

const std::string& SynonymLexicon::bos_token() {
    static const std::string t = "BOS";
    return t;
}

const std::string& SynonymLexicon::eos_token() {
    static const std::string t = "EOS";
    return t;
}

const std::string& SynonymLexicon::token_at(int index) const {
    if (index < 0 || index >= vocab_size()) throw VocabError("token_at: index out of range");
    return vocab_[static_cast<size_t>(index)];
}

int SynonymLexicon::index_of(const std::string& token) const {
    if (token == bos_token()) return bos_index_;
    if (token == eos_token()) return eos_index_;
    for (size_t g = 0; g < groups_.size(); ++g)
        for (size_t m = 0; m < 5; ++m)
            if (groups_[g].members[m] == token) return static_cast<int>(g * 5 + m);
    throw VocabError("unknown token '" + token + "'");
}

bool SynonymLexicon::contains(const std::string& token) const {
    if (token == bos_token() || token == eos_token()) return true;
    return group_of(token) >= 0;
}

int SynonymLexicon::group_of(const std::string& word) const {
    for (size_t g = 0; g < groups_.size(); ++g)
        for (const auto& m : groups_[g].members)
            if (m == word) return static_cast<int>(g);
    return -1;
}

}  // namespace rprae
