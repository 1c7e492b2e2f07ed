#include "inkcheck/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "inkcheck/pgm.hpp"

namespace inkcheck::data {

using nlohmann::json;

double DatasetManifest::incorrect_fraction() const {
    if (examples.empty()) return 0.0;
    std::size_t bad = 0;
    for (const auto& e : examples) bad += e.misspelled ? 1 : 0;
    return static_cast<double>(bad) / static_cast<double>(examples.size());
}

std::map<int, int> DatasetManifest::severity_histogram() const {
    std::map<int, int> hist;
    for (const auto& e : examples) ++hist[e.severity];
    return hist;
}

void save_dataset(const Dataset& dataset, const std::filesystem::path& dir) {
    if (dataset.images.size() != dataset.manifest.examples.size())
        throw ArgumentError("save_dataset: image/example count mismatch");
    std::filesystem::create_directories(dir / "images");

    std::ofstream mf(dir / "manifest.jsonl", std::ios::binary);
    if (!mf) throw IoError("cannot write manifest in " + dir.string());
    for (std::size_t i = 0; i < dataset.manifest.examples.size(); ++i) {
        const Example& e = dataset.manifest.examples[i];
        render::write_pgm(dataset.images[i], dir / e.image_path);
        json rec{{"image", e.image_path},
                 {"text", e.text},
                 {"truth", e.misspelled ? "incorrect" : "correct"},
                 {"severity", e.severity},
                 {"rendered", e.rendered_text},
                 {"seed", e.seed}};
        mf << rec.dump() << "\n";
    }

    json meta{{"seed", dataset.manifest.seed},
              {"count", dataset.manifest.examples.size()},
              {"incorrect_fraction", dataset.manifest.incorrect_fraction()}};
    json sev = json::object();
    for (const auto& [level, count] : dataset.manifest.severity_histogram())
        sev[std::to_string(level)] = count;
    meta["severity_histogram"] = sev;
    for (const auto& [k, v] : dataset.manifest.meta) meta[k] = v;
    std::ofstream meta_out(dir / "meta.json", std::ios::binary);
    meta_out << meta.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::filesystem::path& dir) {
    std::ifstream mf(dir / "manifest.jsonl");
    if (!mf) throw IoError("no manifest.jsonl in " + dir.string());
    DatasetManifest manifest;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(mf, line)) {
        ++line_no;
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded())
            throw IoError("bad manifest record at line " + std::to_string(line_no));
        Example e;
        e.image_path = rec.at("image").get<std::string>();
        e.text = rec.at("text").get<std::string>();
        e.misspelled = rec.at("truth").get<std::string>() == "incorrect";
        e.severity = rec.at("severity").get<int>();
        e.rendered_text = rec.at("rendered").get<std::string>();
        e.seed = rec.at("seed").get<std::uint64_t>();
        if (!e.consistent())
            throw IoError("inconsistent example at line " + std::to_string(line_no));
        manifest.examples.push_back(std::move(e));
    }

    std::ifstream meta_in(dir / "meta.json");
    if (meta_in) {
        json meta = json::parse(meta_in, nullptr, false);
        if (!meta.is_discarded()) {
            if (meta.contains("seed")) manifest.seed = meta["seed"].get<std::uint64_t>();
            if (meta.contains("count") &&
                meta["count"].get<std::size_t>() != manifest.examples.size())
                throw IoError("meta.json count disagrees with manifest in " + dir.string());
            for (auto& [k, v] : meta.items())
                if (v.is_string()) manifest.meta[k] = v.get<std::string>();
        }
    }
    return manifest;
}

Dataset load_dataset(const std::filesystem::path& dir) {
    Dataset ds;
    ds.manifest = load_manifest(dir);
    ds.images.reserve(ds.manifest.examples.size());
    for (const auto& e : ds.manifest.examples) ds.images.push_back(render::read_pgm(dir / e.image_path));
    return ds;
}

}  // namespace inkcheck::data
