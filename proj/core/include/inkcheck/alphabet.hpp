#pragma once

#include <string>

#include "inkcheck/errors.hpp"

namespace inkcheck {

// Ordered symbol set. Index `size()` is reserved for the CTC blank, so a
// recognizer over this alphabet emits size()+1 classes.
class Alphabet {
public:
    explicit Alphabet(std::string symbols);

    static Alphabet lowercase();  // a..z

    int size() const { return static_cast<int>(symbols_.size()); }
    int blank_index() const { return size(); }
    const std::string& symbols() const { return symbols_; }

    bool contains(char c) const { return index_table_[static_cast<unsigned char>(c)] >= 0; }
    // Throws EncodingError for symbols outside the alphabet.
    int index_of(char c) const;
    char symbol(int index) const;

    bool operator==(const Alphabet& other) const { return symbols_ == other.symbols_; }

private:
    std::string symbols_;
    int index_table_[256];
};

}  // namespace inkcheck
