#include "inkcheck/metrics.hpp"

#include <algorithm>

namespace inkcheck::metrics {

namespace {

template <typename Seq>
EditCounts edit_counts(const Seq& predicted, const Seq& truth) {
    if (truth.empty()) throw ArgumentError("levenshtein: empty truth");
    const std::size_t n = truth.size(), m = predicted.size();
    // d[i][j]: distance between truth[0..i) and predicted[0..j).
    std::vector<int> d((n + 1) * (m + 1));
    auto cell = [&](std::size_t i, std::size_t j) -> int& { return d[i * (m + 1) + j]; };
    for (std::size_t i = 0; i <= n; ++i) cell(i, 0) = static_cast<int>(i);
    for (std::size_t j = 0; j <= m; ++j) cell(0, j) = static_cast<int>(j);
    for (std::size_t i = 1; i <= n; ++i)
        for (std::size_t j = 1; j <= m; ++j) {
            const int sub = cell(i - 1, j - 1) + (truth[i - 1] == predicted[j - 1] ? 0 : 1);
            cell(i, j) = std::min({sub, cell(i - 1, j) + 1, cell(i, j - 1) + 1});
        }

    EditCounts counts;
    counts.reference_length = static_cast<int>(n);
    std::size_t i = n, j = m;
    while (i > 0 || j > 0) {
        if (i > 0 && j > 0) {
            const int sub_cost = truth[i - 1] == predicted[j - 1] ? 0 : 1;
            if (cell(i, j) == cell(i - 1, j - 1) + sub_cost) {
                counts.substitutions += sub_cost;
                --i;
                --j;
                continue;
            }
        }
        if (i > 0 && cell(i, j) == cell(i - 1, j) + 1) {
            ++counts.deletions;
            --i;
            continue;
        }
        ++counts.insertions;
        --j;
    }
    return counts;
}

}  // namespace

EditCounts levenshtein_counts(const std::vector<std::string>& predicted,
                              const std::vector<std::string>& truth) {
    return edit_counts(predicted, truth);
}

EditCounts levenshtein_counts(const std::string& predicted, const std::string& truth) {
    return edit_counts(predicted, truth);
}

double cer(const std::string& predicted, const std::string& truth) {
    const auto counts = levenshtein_counts(predicted, truth);
    return static_cast<double>(counts.total()) / static_cast<double>(truth.size());
}

std::vector<std::string> split_words(const std::string& text) {
    std::vector<std::string> words;
    std::string current;
    for (char c : text) {
        if (c == ' ' || c == '\t' || c == '\n') {
            if (!current.empty()) words.push_back(std::move(current));
            current.clear();
        } else {
            current.push_back(c);
        }
    }
    if (!current.empty()) words.push_back(std::move(current));
    return words;
}

double wer(const std::string& predicted, const std::string& truth) {
    const auto truth_words = split_words(truth);
    if (truth_words.empty()) throw ArgumentError("wer: truth has no words");
    const auto counts = levenshtein_counts(split_words(predicted), truth_words);
    return static_cast<double>(counts.total()) / static_cast<double>(truth_words.size());
}

}  // namespace inkcheck::metrics
