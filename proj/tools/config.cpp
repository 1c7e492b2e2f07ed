#include "config.hpp"

#include <fstream>

namespace inkcheck::cli {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

}  // namespace

KvConfig KvConfig::parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path.string());
    KvConfig cfg;
    std::string line, section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[' && line.back() == ']') {
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path.string() + ":" + std::to_string(line_no) +
                              ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError(path.string() + ": empty key");
        cfg.values_[section.empty() ? key : section + "." + key] = value;
    }
    return cfg;
}

void KvConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0)
        throw ArgumentError("--set expects section.key=value, got '" + assignment + "'");
    values_[trim(assignment.substr(0, eq))] = trim(assignment.substr(eq + 1));
}

std::string KvConfig::get_string(const std::string& key, const std::string& fallback) const {
    const auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double KvConfig::get_double(const std::string& key, double fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stod(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config value '" + key + "' is not a number: " + it->second);
    }
}

int KvConfig::get_int(const std::string& key, int fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoi(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config value '" + key + "' is not an integer: " + it->second);
    }
}

std::uint64_t KvConfig::get_u64(const std::string& key, std::uint64_t fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    try {
        return std::stoull(it->second);
    } catch (const std::exception&) {
        throw ConfigError("config value '" + key + "' is not an integer: " + it->second);
    }
}

std::vector<int> KvConfig::get_int_list(const std::string& key, std::vector<int> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<int> out;
    std::string token;
    for (char c : it->second + ",") {
        if (c == ',') {
            token = trim(token);
            if (!token.empty()) out.push_back(std::stoi(token));
            token.clear();
        } else {
            token.push_back(c);
        }
    }
    return out;
}

std::vector<std::string> KvConfig::get_string_list(const std::string& key,
                                                   std::vector<std::string> fallback) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<std::string> out;
    std::string token;
    for (char c : it->second + ",") {
        if (c == ',') {
            token = trim(token);
            if (!token.empty()) out.push_back(token);
            token.clear();
        } else {
            token.push_back(c);
        }
    }
    return out;
}

RunConfig RunConfig::load(const std::filesystem::path& config_path,
                          const std::vector<std::string>& overrides) {
    KvConfig kv = KvConfig::parse_file(config_path);
    for (const auto& o : overrides) kv.apply_override(o);

    if (!kv.has("run.seed")) throw ConfigError("run.seed is mandatory; runs never default to the clock");

    const desk::PipelineDefaults d;
    RunConfig rc;
    rc.seed = kv.get_u64("run.seed", 0);
    rc.wordlist = kv.get_string("paths.wordlist", "");
    rc.output_dir = kv.get_string("paths.output_dir", "out");
    rc.checkpoint_dir = kv.get_string("paths.checkpoint_dir",
                                      (rc.output_dir / "checkpoints").string());
    if (rc.wordlist.empty()) throw ConfigError("paths.wordlist is required");

    rc.min_word_len = kv.get_int("words.min_len", d.min_word_len);
    rc.max_word_len = kv.get_int("words.max_len", d.max_word_len);

    rc.hwr_config = d.hwr_config;
    rc.hwr_config.image_height = kv.get_int("model.canvas_height", rc.hwr_config.image_height);
    rc.hwr_config.image_width = kv.get_int("model.canvas_width", rc.hwr_config.image_width);
    rc.hwr_config.recurrent_hidden = kv.get_int("model.hidden", rc.hwr_config.recurrent_hidden);
    {
        std::vector<int> filters{8, 16};
        filters = kv.get_int_list("model.conv_filters", filters);
        rc.hwr_config.conv_blocks.clear();
        for (int f : filters) rc.hwr_config.conv_blocks.push_back({f, true});
    }
    rc.hwr_config.validate();

    rc.head_config = d.head_config;
    rc.head_config.time_steps = rc.hwr_config.time_steps();
    rc.head_config.feature_dim = rc.hwr_config.feature_dim();
    rc.head_config.alphabet_size = rc.hwr_config.alphabet.size();
    {
        auto filters = kv.get_int_list("model.head_filters", {8, 8, 16, 16});
        if (filters.size() != 4) throw ConfigError("model.head_filters needs four entries");
        for (int i = 0; i < 4; ++i) rc.head_config.conv_filters[static_cast<std::size_t>(i)] = filters[static_cast<std::size_t>(i)];
    }
    rc.head_config.dropout_rate = kv.get_double("model.dropout", rc.head_config.dropout_rate);
    rc.head_config.validate();

    rc.hwr_schedule = d.hwr_schedule;
    rc.hwr_schedule.epochs = kv.get_int("hwr.epochs", rc.hwr_schedule.epochs);
    rc.hwr_schedule.batch_size = kv.get_int("hwr.batch_size", rc.hwr_schedule.batch_size);
    rc.hwr_schedule.lr_start = kv.get_double("hwr.lr_start", rc.hwr_schedule.lr_start);
    rc.hwr_schedule.lr_end = kv.get_double("hwr.lr_end", rc.hwr_schedule.lr_end);
    rc.hwr_schedule.patience = kv.get_int("hwr.patience", rc.hwr_schedule.patience);
    rc.hwr_schedule.seed = derive_seed(rc.seed, 0x687772);
    rc.hwr_train_count = kv.get_int("hwr.train_count", d.hwr_train_count);
    rc.hwr_val_count = kv.get_int("hwr.val_count", d.hwr_val_count);

    rc.head_schedule = d.head_schedule;
    rc.head_schedule.epochs = kv.get_int("classifier.epochs", rc.head_schedule.epochs);
    rc.head_schedule.batch_size = kv.get_int("classifier.batch_size", rc.head_schedule.batch_size);
    rc.head_schedule.lr_start = kv.get_double("classifier.lr_start", rc.head_schedule.lr_start);
    rc.head_schedule.lr_end = kv.get_double("classifier.lr_end", rc.head_schedule.lr_end);
    rc.head_schedule.patience = kv.get_int("classifier.patience", rc.head_schedule.patience);
    rc.head_schedule.seed = derive_seed(rc.seed, 0x636c73);
    rc.classifier_train_count = kv.get_int("classifier.train_count", d.classifier_train_count);
    rc.classifier_val_count = kv.get_int("classifier.val_count", d.classifier_val_count);
    rc.train_incorrect_fraction =
        kv.get_double("classifier.incorrect_fraction", d.train_incorrect_fraction);
    rc.train_severity = kv.get_int("classifier.severity", d.train_severity);
    rc.train_severity_max = kv.get_int("classifier.severity_max", d.train_severity_max);
    if (rc.train_severity_max != 0 && rc.train_severity_max < rc.train_severity)
        throw ConfigError("classifier.severity_max must be >= classifier.severity");

    rc.min_recall = kv.get_double("eval.min_recall", d.min_recall);
    rc.test_count = kv.get_int("eval.test_count", d.test_count);
    rc.scenarios = kv.get_string_list("eval.scenarios", rc.scenarios);
    rc.severities = kv.get_int_list("eval.severities", rc.severities);
    return rc;
}

}  // namespace inkcheck::cli
