#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "inkcheck/render.hpp"

namespace inkcheck::data {

// One classification sample. `text` is what the writer was supposed to
// write; `rendered_text` is what actually went onto the image.
struct Example {
    std::string text;
    std::string rendered_text;
    bool misspelled = false;
    int severity = 0;  // 0 for correct examples
    std::uint64_t seed = 0;
    std::string image_path;  // relative to the dataset directory

    bool consistent() const {
        return (misspelled ? (rendered_text != text && severity >= 1)
                           : (rendered_text == text && severity == 0)) &&
               rendered_text.size() == text.size();
    }
};

struct DatasetManifest {
    std::vector<Example> examples;
    std::uint64_t seed = 0;
    // Free-form provenance (kind, scenario, severity, ...) persisted to meta.json.
    std::map<std::string, std::string> meta;

    double incorrect_fraction() const;
    std::map<int, int> severity_histogram() const;
};

// Manifest plus decoded images, index-aligned with manifest.examples.
struct Dataset {
    DatasetManifest manifest;
    std::vector<render::WordImage> images;
};

// Layout on disk: <dir>/manifest.jsonl (one record per example),
// <dir>/meta.json, <dir>/images/NNNNNNNN.pgm. Serialization is
// byte-deterministic for a fixed dataset.
void save_dataset(const Dataset& dataset, const std::filesystem::path& dir);
DatasetManifest load_manifest(const std::filesystem::path& dir);
Dataset load_dataset(const std::filesystem::path& dir);

}  // namespace inkcheck::data
