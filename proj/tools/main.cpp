#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "inkcheck/evaluate.hpp"
#include "inkcheck/textgen.hpp"
#include "config.hpp"

using namespace inkcheck;
using nlohmann::json;

namespace {

// Exit codes: 0 success, 1 user error, 2 internal error. Diagnostics go to
// stderr; result data goes to files; stdout carries one-line summaries.

std::vector<std::string> load_words(const cli::RunConfig& rc) {
    auto words = textgen::load_wordlist(rc.wordlist, rc.hwr_config.alphabet, rc.min_word_len,
                                        rc.max_word_len);
    if (words.empty()) throw ArgumentError("wordlist has no usable words: " + rc.wordlist.string());
    return words;
}

data::Dataset generate_split(const cli::RunConfig& rc, const std::vector<std::string>& words,
                             int count, double incorrect_fraction, int severity, int severity_max,
                             std::uint64_t seed) {
    Rng rng(derive_seed(seed, 0x73616d70));
    const auto sampled = textgen::sample_words(words, count, rng);
    render::CanvasConfig canvas{rc.hwr_config.image_height, rc.hwr_config.image_width};
    return textgen::build_dataset(sampled, incorrect_fraction, severity,
                                  derive_seed(seed, 0x67656e64), canvas, severity_max);
}

eval::ScenarioSpec scenario_by_name(const std::string& name, int severity, double min_recall) {
    eval::ScenarioSpec spec;
    if (name == "difficult")
        spec = eval::ScenarioSpec::difficult(severity);
    else if (name == "moderate")
        spec = eval::ScenarioSpec::moderate(severity);
    else
        throw ArgumentError("unknown scenario '" + name + "' (expected difficult|moderate)");
    spec.min_recall = min_recall;
    return spec;
}

void write_train_log(const std::filesystem::path& path, const json& lines) {
    std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write log: " + path.string());
    for (const auto& rec : lines) out << rec.dump() << "\n";
}

int cmd_gen_data(const cli::RunConfig& rc, const std::string& split, const std::string& scenario,
                 int severity, int severity_max, int count, double incorrect_fraction,
                 std::string name) {
    const auto words = load_words(rc);
    data::Dataset ds;
    if (split == "test") {
        const auto spec = scenario_by_name(scenario, severity > 0 ? severity : 1, rc.min_recall);
        const int total = count > 0 ? count : rc.test_count;
        ds = eval::build_test_set(spec, total, words, derive_seed(rc.seed, 0x74657374),
                                  {rc.hwr_config.image_height, rc.hwr_config.image_width});
        if (name.empty()) name = "test_" + scenario + "_s" + std::to_string(severity);
    } else if (split == "train" || split == "val") {
        const int fallback = split == "train" ? rc.classifier_train_count : rc.classifier_val_count;
        const int total = count > 0 ? count : fallback;
        const double frac =
            incorrect_fraction >= 0.0 ? incorrect_fraction : rc.train_incorrect_fraction;
        const std::uint64_t split_seed = derive_seed(
            rc.seed, split == "train" ? 0x7472 : 0x766c, static_cast<std::uint64_t>(frac * 1e6));
        const int sev_lo = severity > 0 ? severity : rc.train_severity;
        const int sev_hi = severity > 0 ? (severity_max > 0 ? severity_max : severity)
                                        : rc.train_severity_max;
        ds = generate_split(rc, words, total, frac, sev_lo, sev_hi, split_seed);
        ds.manifest.meta["kind"] = split;
        if (name.empty()) name = split;
    } else {
        throw ArgumentError("--split must be train, val or test");
    }
    const auto dir = rc.output_dir / "data" / name;
    data::save_dataset(ds, dir);
    const auto hist = ds.manifest.severity_histogram();
    const long correct = hist.count(0) ? hist.at(0) : 0;
    std::cout << "wrote " << ds.manifest.examples.size() << " examples to " << dir.string()
              << " (incorrect " << static_cast<long>(ds.manifest.examples.size()) - correct
              << ", correct " << correct << ")\n";
    return 0;
}

int cmd_train_hwr(const cli::RunConfig& rc, std::string train_dir, std::string val_dir,
                  std::string out_file) {
    if (train_dir.empty()) train_dir = (rc.output_dir / "data" / "hwr_train").string();
    if (val_dir.empty()) val_dir = (rc.output_dir / "data" / "hwr_val").string();
    if (out_file.empty()) out_file = (rc.checkpoint_dir / "hwr.ckpt").string();

    const auto train = data::load_dataset(train_dir);
    const auto val = data::load_dataset(val_dir);
    hwr::HwrModel model(rc.hwr_config, derive_seed(rc.seed, 0x696e6974));

    json log_lines = json::array();
    const auto result =
        hwr::train_hwr(model, train, val, rc.hwr_schedule, [&](const hwr::EpochLog& e) {
            std::cerr << "epoch " << e.epoch << " lr " << e.learning_rate << " loss "
                      << e.train_loss << " val_cer " << e.val_cer << " val_word_acc "
                      << e.val_word_accuracy << "\n";
            log_lines.push_back({{"epoch", e.epoch},
                                 {"learning_rate", e.learning_rate},
                                 {"train_loss", e.train_loss},
                                 {"val_cer", e.val_cer},
                                 {"val_word_accuracy", e.val_word_accuracy},
                                 {"improved", e.improved}});
        });
    if (result.skipped_infeasible > 0)
        std::cerr << "warning: skipped " << result.skipped_infeasible
                  << " labels that cannot fit the time axis\n";

    std::filesystem::create_directories(std::filesystem::path(out_file).parent_path());
    io::save_checkpoint(model.to_checkpoint(), out_file);
    write_train_log(rc.output_dir / "logs" / "train_hwr.jsonl", log_lines);
    std::cout << "wrote " << out_file << " (best epoch " << result.best_epoch << ", val_cer "
              << result.best_val_cer << ", val_word_acc " << result.best_val_word_accuracy
              << ")\n";
    return 0;
}

int cmd_train_classifier(const cli::RunConfig& rc, std::string train_dir, std::string val_dir,
                         std::string extractor_file, std::string out_file) {
    if (train_dir.empty()) train_dir = (rc.output_dir / "data" / "train").string();
    if (val_dir.empty()) val_dir = (rc.output_dir / "data" / "val").string();
    if (extractor_file.empty()) extractor_file = (rc.checkpoint_dir / "hwr.ckpt").string();
    if (out_file.empty()) out_file = (rc.checkpoint_dir / "classifier.ckpt").string();

    const auto train = data::load_dataset(train_dir);
    const auto val = data::load_dataset(val_dir);
    auto extractor =
        hwr::HwrModel::from_checkpoint(io::load_checkpoint(extractor_file), rc.hwr_config);
    extractor.set_trainable(false);

    classifier::ClassifierModel model(rc.head_config, derive_seed(rc.seed, 0x68656164));
    json log_lines = json::array();
    const auto result = classifier::train_classifier(
        model, extractor, train, val, rc.head_schedule,
        [&](const classifier::ClassifierEpochLog& e) {
            std::cerr << "epoch " << e.epoch << " lr " << e.learning_rate << " loss "
                      << e.train_loss << " val_loss " << e.val_loss << " val_acc "
                      << e.val_accuracy << "\n";
            log_lines.push_back({{"epoch", e.epoch},
                                 {"learning_rate", e.learning_rate},
                                 {"train_loss", e.train_loss},
                                 {"val_loss", e.val_loss},
                                 {"val_accuracy", e.val_accuracy},
                                 {"improved", e.improved}});
        });
    if (result.val_balance_warning)
        std::cerr << "warning: validation split is unbalanced beyond 60/40\n";

    std::filesystem::create_directories(std::filesystem::path(out_file).parent_path());
    io::save_checkpoint(model.to_checkpoint(rc.hwr_config.digest()), out_file);
    write_train_log(rc.output_dir / "logs" / "train_classifier.jsonl", log_lines);
    std::cout << "wrote " << out_file << " (best epoch " << result.best_epoch << ", val_loss "
              << result.best_val_loss << ", val_acc " << result.best_val_accuracy << ")\n";
    return 0;
}

void print_comparison(const eval::EvalReport& report) {
    char line[160];
    std::cout << "scenario    severity  precision  recall    baseline  improvement\n";
    for (const auto& sr : report.sets) {
        std::snprintf(line, sizeof line, "%-10s  %8d  %9.4f  %8.4f  %8.4f  %+10.1f%%\n",
                      sr.scenario.c_str(), sr.severity, sr.precision, sr.recall,
                      sr.baseline_precision, sr.improvement * 100.0);
        std::cout << line;
    }
    for (const auto& s : report.scenarios) {
        std::snprintf(line, sizeof line,
                      "%-10s  severity-avg precision %.4f vs baseline %.4f (%+.1f%%)\n",
                      s.scenario.c_str(), s.mean_precision, s.mean_baseline_precision,
                      s.improvement * 100.0);
        std::cout << line;
    }
}

int cmd_evaluate(const cli::RunConfig& rc, std::string hwr_file, std::string classifier_file,
                 std::string data_dir, std::string out_dir, double min_recall) {
    if (hwr_file.empty()) hwr_file = (rc.checkpoint_dir / "hwr.ckpt").string();
    if (classifier_file.empty()) classifier_file = (rc.checkpoint_dir / "classifier.ckpt").string();
    if (data_dir.empty()) data_dir = (rc.output_dir / "data").string();
    if (out_dir.empty()) out_dir = (rc.output_dir / "reports").string();
    if (min_recall < 0.0) min_recall = rc.min_recall;

    auto recognizer = hwr::HwrModel::from_checkpoint(io::load_checkpoint(hwr_file), rc.hwr_config);
    recognizer.set_trainable(false);
    auto head = classifier::ClassifierModel::from_checkpoint(
        io::load_checkpoint(classifier_file), rc.head_config, rc.hwr_config.digest());

    std::vector<data::Dataset> datasets;
    std::vector<eval::TestSet> sets;
    for (const auto& scenario : rc.scenarios)
        for (int severity : rc.severities) {
            const std::string name = "test_" + scenario + "_s" + std::to_string(severity);
            const auto dir = std::filesystem::path(data_dir) / name;
            if (!std::filesystem::exists(dir / "manifest.jsonl"))
                throw IoError("missing test set " + dir.string() + " (run gen-data first)");
            std::cerr << "loading " << name << "\n";
            datasets.push_back(data::load_dataset(dir));
            sets.push_back({scenario_by_name(scenario, severity, min_recall), name, nullptr});
        }
    for (std::size_t i = 0; i < sets.size(); ++i) sets[i].dataset = &datasets[i];

    std::cerr << "scoring " << sets.size() << " test sets\n";
    const auto report = eval::evaluate(recognizer, head, sets, min_recall);

    const auto out = std::filesystem::path(out_dir);
    std::filesystem::create_directories(out);
    eval::write_report_json(report, out / "report.json");
    eval::write_report_csv(report, out / "report.csv");
    for (const auto& sr : report.sets)
        eval::write_pr_svg(sr.curve, sr.scenario + " severity " + std::to_string(sr.severity),
                           out / ("pr_" + sr.name + ".svg"));
    print_comparison(report);
    std::cout << "wrote " << (out / "report.json").string() << ", report.csv and "
              << report.sets.size() << " pr_*.svg\n";
    return 0;
}

int cmd_calibrate(const std::string& scores_file, double min_recall, const std::string& out_file) {
    const auto [scores, labels] = eval::read_scores_jsonl(scores_file);
    const auto curve = eval::pr_curve(scores, labels);
    const auto cal = eval::calibrate(curve, min_recall);
    double precision = 0.0, recall = 0.0;
    for (const auto& p : curve)
        if (p.threshold == cal.threshold) {
            precision = p.precision;
            recall = p.recall;
        }
    json doc{{"threshold", cal.threshold},
             {"recall_met", cal.recall_met},
             {"precision", precision},
             {"recall", recall},
             {"min_recall", min_recall}};
    if (!out_file.empty()) {
        std::ofstream out(out_file, std::ios::binary);
        if (!out) throw IoError("cannot write " + out_file);
        out << doc.dump(2) << "\n";
    }
    if (!cal.recall_met)
        std::cerr << "warning: no threshold reaches recall " << min_recall << "\n";
    std::cout << doc.dump() << "\n";
    return 0;
}

int cmd_report(const std::string& report_file, std::string out_dir) {
    const auto report = eval::read_report_json(report_file);
    if (out_dir.empty()) out_dir = std::filesystem::path(report_file).parent_path().string();
    const auto out = std::filesystem::path(out_dir);
    std::filesystem::create_directories(out);
    eval::write_report_csv(report, out / "report.csv");
    for (const auto& sr : report.sets)
        eval::write_pr_svg(sr.curve, sr.scenario + " severity " + std::to_string(sr.severity),
                           out / ("pr_" + sr.name + ".svg"));
    print_comparison(report);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"one-step misspelled-handwriting detector pipeline"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    app.add_option("-c,--config", config_path, "run config file");
    app.add_option("--set", overrides, "override a config value, section.key=value");

    auto* gen = app.add_subcommand("gen-data", "render a dataset split to disk");
    std::string split, scenario = "difficult", name;
    int severity = 0, severity_max = 0, count = 0;
    double incorrect_fraction = -1.0;
    gen->add_option("--split", split, "train|val|test")->required();
    gen->add_option("--scenario", scenario, "difficult|moderate (test split)");
    gen->add_option("--severity", severity, "mistake severity (test split; train/val default from config)");
    gen->add_option("--severity-max", severity_max, "upper severity for mixed train/val splits");
    gen->add_option("--count", count, "example count (default from config)");
    gen->add_option("--incorrect-fraction", incorrect_fraction,
                    "fraction of misspelled examples (train/val)");
    gen->add_option("--name", name, "output directory name under <output_dir>/data");

    auto* thwr = app.add_subcommand("train-hwr", "train the recognizer on correct examples");
    std::string train_dir, val_dir, out_file;
    thwr->add_option("--train", train_dir, "training dataset directory");
    thwr->add_option("--val", val_dir, "validation dataset directory");
    thwr->add_option("--out", out_file, "checkpoint output path");

    auto* tcls = app.add_subcommand("train-classifier", "train the misspelling head");
    std::string cls_train_dir, cls_val_dir, extractor_file, cls_out_file;
    tcls->add_option("--train", cls_train_dir, "training dataset directory");
    tcls->add_option("--val", cls_val_dir, "validation dataset directory");
    tcls->add_option("--extractor", extractor_file, "recognizer checkpoint");
    tcls->add_option("--out", cls_out_file, "checkpoint output path");

    auto* evalc = app.add_subcommand("evaluate", "score test sets and emit reports");
    std::string hwr_file, classifier_file, data_dir, report_dir;
    double min_recall = -1.0;
    evalc->add_option("--hwr", hwr_file, "recognizer checkpoint");
    evalc->add_option("--classifier", classifier_file, "classifier checkpoint");
    evalc->add_option("--data-dir", data_dir, "directory holding test_* sets");
    evalc->add_option("--out-dir", report_dir, "report output directory");
    evalc->add_option("--min-recall", min_recall, "recall requirement for calibration");

    auto* cal = app.add_subcommand("calibrate", "pick a threshold from a scores file");
    std::string scores_file, cal_out;
    double cal_min_recall = 0.99;
    cal->add_option("--scores", scores_file, "scores jsonl (score,label per line)")->required();
    cal->add_option("--min-recall", cal_min_recall, "recall requirement");
    cal->add_option("--out", cal_out, "write the calibration as json");

    auto* rep = app.add_subcommand("report", "re-emit csv/svg from a stored report");
    std::string report_file, rep_out_dir;
    rep->add_option("--report", report_file, "report.json path")->required();
    rep->add_option("--out-dir", rep_out_dir, "output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        app.exit(e);
        return 1;
    }

    try {
        auto need_config = [&]() {
            if (config_path.empty()) throw ArgumentError("--config is required for this command");
            return cli::RunConfig::load(config_path, overrides);
        };
        if (gen->parsed())
            return cmd_gen_data(need_config(), split, scenario, severity, severity_max, count,
                                incorrect_fraction, name);
        if (thwr->parsed()) return cmd_train_hwr(need_config(), train_dir, val_dir, out_file);
        if (tcls->parsed())
            return cmd_train_classifier(need_config(), cls_train_dir, cls_val_dir, extractor_file,
                                        cls_out_file);
        if (evalc->parsed())
            return cmd_evaluate(need_config(), hwr_file, classifier_file, data_dir, report_dir,
                                min_recall);
        if (cal->parsed()) return cmd_calibrate(scores_file, cal_min_recall, cal_out);
        if (rep->parsed()) return cmd_report(report_file, rep_out_dir);
        return 1;
    } catch (const ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const EncodingError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const FeasibilityError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}
