#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "inkcheck/alphabet.hpp"
#include "inkcheck/dataset.hpp"
#include "inkcheck/rng.hpp"

namespace inkcheck::textgen {

// Substitutes exactly one character of `word` with a uniformly random
// lowercase letter. The position is drawn from the half-open range
// [0, |word|) and the replacement is resampled until it differs from the
// original character, so the result is always at Hamming distance 1.
template <class R>
std::string generate_mistake(const std::string& word, R& rng) {
    if (word.empty()) throw ArgumentError("generate_mistake: empty word");
    const auto pos = static_cast<std::size_t>(rng.uniform_index(word.size()));
    char replacement;
    do {
        replacement = static_cast<char>('a' + rng.uniform_index(26));
    } while (replacement == word[pos]);
    std::string out = word;
    out[pos] = replacement;
    return out;
}

// `level` recursive substitutions. Later substitutions may land on an
// already-altered position, so the final Hamming distance is in [1, level];
// if the composition happens to restore the original word it is regenerated,
// since such a sample would be mislabeled.
template <class R>
std::string apply_severity(const std::string& word, int level, R& rng) {
    if (level < 1) throw ArgumentError("apply_severity: level must be >= 1");
    if (word.empty()) throw ArgumentError("apply_severity: empty word");
    std::string out;
    do {
        out = word;
        for (int i = 0; i < level; ++i) out = generate_mistake(out, rng);
    } while (out == word);
    return out;
}

// n uniform draws with replacement.
template <class R>
std::vector<std::string> sample_words(const std::vector<std::string>& wordlist, int n, R& rng) {
    if (wordlist.empty()) throw ArgumentError("sample_words: empty wordlist");
    if (n < 0) throw ArgumentError("sample_words: negative count");
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
        out.push_back(wordlist[static_cast<std::size_t>(rng.uniform_index(wordlist.size()))]);
    return out;
}

// Loads one word per line, keeping only words made of alphabet symbols with
// length in [min_len, max_len].
std::vector<std::string> load_wordlist(const std::filesystem::path& path,
                                       const Alphabet& alphabet, int min_len, int max_len);

// Renders one example per word, per the balanced-noise scheme: with
// probability `incorrect_fraction` the rendered text is the severity-noised
// word and the example is labeled incorrect; the stored label is always the
// original word. When severity_max > severity, each incorrect example draws
// its severity uniformly from [severity, severity_max]. Deterministic in
// (words, parameters, seed); every example derives its own seed from
// (seed, index).
data::Dataset build_dataset(const std::vector<std::string>& words, double incorrect_fraction,
                            int severity, std::uint64_t seed,
                            const render::CanvasConfig& canvas = {}, int severity_max = 0);

}  // namespace inkcheck::textgen
