#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "inkcheck/desk.hpp"

namespace inkcheck::cli {

// Flat key-value config with [sections]. '#' starts a comment; values keep
// inner spaces. Keys are addressed as "section.key" and every one of them
// can be overridden from the command line with --set.
class KvConfig {
public:
    static KvConfig parse_file(const std::filesystem::path& path);
    void apply_override(const std::string& assignment);  // "section.key=value"

    bool has(const std::string& key) const { return values_.count(key) > 0; }
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
    std::vector<int> get_int_list(const std::string& key, std::vector<int> fallback) const;
    std::vector<std::string> get_string_list(const std::string& key,
                                             std::vector<std::string> fallback) const;

private:
    std::map<std::string, std::string> values_;
};

// Everything one pipeline run needs, resolved from the config file plus
// command-line overrides. The seed is mandatory: runs must not depend on
// the wall clock.
struct RunConfig {
    std::uint64_t seed = 0;
    std::filesystem::path wordlist;
    std::filesystem::path output_dir;
    std::filesystem::path checkpoint_dir;

    int min_word_len = 3;
    int max_word_len = 10;

    hwr::HwrConfig hwr_config;
    classifier::HeadConfig head_config;
    nn::TrainSchedule hwr_schedule;
    nn::TrainSchedule head_schedule;
    int hwr_train_count = 2000;
    int hwr_val_count = 400;
    int classifier_train_count = 4096;
    int classifier_val_count = 1024;
    double train_incorrect_fraction = 0.5;
    int train_severity = 1;
    int train_severity_max = 3;

    double min_recall = 0.99;
    int test_count = 1500;
    std::vector<std::string> scenarios{"difficult", "moderate"};
    std::vector<int> severities{1, 2, 3};

    static RunConfig load(const std::filesystem::path& config_path,
                          const std::vector<std::string>& overrides);
};

}  // namespace inkcheck::cli
