#pragma once

#include <string>
#include <vector>

#include "inkcheck/errors.hpp"

namespace inkcheck::metrics {

// Edit operations that turn the reference (truth) into the prediction:
// deletions remove reference units, insertions add spurious predicted units.
struct EditCounts {
    int substitutions = 0;
    int insertions = 0;
    int deletions = 0;
    int reference_length = 0;

    int total() const { return substitutions + insertions + deletions; }
};

// Unit-cost Levenshtein with backtrace. Ties prefer substitution, then
// deletion, then insertion, so the split is deterministic.
EditCounts levenshtein_counts(const std::vector<std::string>& predicted,
                              const std::vector<std::string>& truth);
EditCounts levenshtein_counts(const std::string& predicted, const std::string& truth);

// (S+I+D)/|truth| at character level; may exceed 1.
double cer(const std::string& predicted, const std::string& truth);

// Levenshtein over whitespace-delimited tokens divided by the truth token
// count.
double wer(const std::string& predicted, const std::string& truth);

std::vector<std::string> split_words(const std::string& text);

}  // namespace inkcheck::metrics
