#include "inkcheck/alphabet.hpp"

namespace inkcheck {

Alphabet::Alphabet(std::string symbols) : symbols_(std::move(symbols)) {
    for (auto& v : index_table_) v = -1;
    for (std::size_t i = 0; i < symbols_.size(); ++i) {
        const auto c = static_cast<unsigned char>(symbols_[i]);
        if (index_table_[c] >= 0) throw ArgumentError("alphabet: duplicate symbol");
        index_table_[c] = static_cast<int>(i);
    }
    // The mistake generator substitutes lowercase letters; they must all be
    // representable.
    for (char c = 'a'; c <= 'z'; ++c) {
        if (!contains(c)) throw ArgumentError("alphabet: lowercase a-z must be present");
    }
}

Alphabet Alphabet::lowercase() { return Alphabet("abcdefghijklmnopqrstuvwxyz"); }

int Alphabet::index_of(char c) const {
    const int idx = index_table_[static_cast<unsigned char>(c)];
    if (idx < 0) throw EncodingError(std::string("symbol '") + c + "' not in alphabet");
    return idx;
}

char Alphabet::symbol(int index) const {
    if (index < 0 || index >= size()) throw ArgumentError("alphabet: symbol index out of range");
    return symbols_[static_cast<std::size_t>(index)];
}

}  // namespace inkcheck
