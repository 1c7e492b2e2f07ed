#include "inkcheck/textgen.hpp"

#include <fstream>

namespace inkcheck::textgen {

std::vector<std::string> load_wordlist(const std::filesystem::path& path,
                                       const Alphabet& alphabet, int min_len, int max_len) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open wordlist: " + path.string());
    std::vector<std::string> words;
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (line.empty()) continue;
        const int len = static_cast<int>(line.size());
        if (len < min_len || len > max_len) continue;
        bool ok = true;
        for (char c : line) ok = ok && alphabet.contains(c);
        if (ok) words.push_back(line);
    }
    return words;
}

data::Dataset build_dataset(const std::vector<std::string>& words, double incorrect_fraction,
                            int severity, std::uint64_t seed,
                            const render::CanvasConfig& canvas, int severity_max) {
    if (incorrect_fraction < 0.0 || incorrect_fraction > 1.0)
        throw ArgumentError("build_dataset: incorrect_fraction must be in [0,1]");
    if (incorrect_fraction > 0.0 && severity < 1)
        throw ArgumentError("build_dataset: severity must be >= 1 when noise is injected");
    if (severity_max != 0 && severity_max < severity)
        throw ArgumentError("build_dataset: severity_max must be >= severity");
    const int high = severity_max == 0 ? severity : severity_max;

    data::Dataset ds;
    ds.manifest.seed = seed;
    ds.manifest.examples.reserve(words.size());
    ds.images.reserve(words.size());
    for (std::size_t i = 0; i < words.size(); ++i) {
        const std::uint64_t example_seed = derive_seed(seed, i);
        Rng rng(example_seed);
        data::Example e;
        e.text = words[i];
        e.seed = example_seed;
        e.misspelled = rng.bernoulli(incorrect_fraction);
        if (e.misspelled) {
            e.severity = severity + static_cast<int>(rng.uniform_index(
                                        static_cast<std::uint64_t>(high - severity + 1)));
            e.rendered_text = apply_severity(e.text, e.severity, rng);
        } else {
            e.rendered_text = e.text;
        }
        const auto style = render::sample_style(rng);
        ds.images.push_back(render::render_word(e.rendered_text, style, derive_seed(example_seed, 1), canvas));

        char name[32];
        std::snprintf(name, sizeof name, "images/%08zu.pgm", i);
        e.image_path = name;
        ds.manifest.examples.push_back(std::move(e));
    }
    return ds;
}

}  // namespace inkcheck::textgen
