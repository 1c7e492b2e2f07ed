#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "inkcheck/classifier.hpp"

namespace inkcheck::eval {

// Assessment difficulty: a mistake-to-correct ratio m:c plus the minimal
// recall the detector must keep, and the severity of the injected mistakes.
struct ScenarioSpec {
    std::string name;
    int mistake_ratio_m = 1;
    int mistake_ratio_c = 2;
    double min_recall = 0.99;
    int severity = 1;

    double mean_mistakes() const {
        return static_cast<double>(mistake_ratio_m) /
               static_cast<double>(mistake_ratio_m + mistake_ratio_c);
    }

    static ScenarioSpec moderate(int severity = 1);   // 1:5
    static ScenarioSpec difficult(int severity = 1);  // 1:2
};

// M = round(m/(m+c) * total) misspelled examples, C = total - M correct ones.
std::pair<int, int> scenario_counts(const ScenarioSpec& spec, int total);

// Assembles one test set: `total` words sampled with replacement, the M
// smallest indices misspelled at spec.severity. Word sampling, styles and
// per-index mistake noise derive from (seed, index) only, so sets built for
// different scenarios share their positive examples and sets for different
// severities share their correct ones.
data::Dataset build_test_set(const ScenarioSpec& spec, int total,
                             const std::vector<std::string>& wordlist, std::uint64_t seed,
                             const render::CanvasConfig& canvas = {});

// Two-step baseline: positive iff the recognized text differs from the
// expected text.
bool baseline_classify(const hwr::HwrModel& recognizer, const render::WordImage& image,
                       const std::string& text);

// Closed-form baseline precision for a recognizer that reads P of T words
// correctly, on a test set with mistake ratio m:c. TP = M and
// FP = round(C*(T-P)/T), the expected number of misread correct words.
double baseline_precision(int m, int c, long correct_words, long total_words);

struct PrPoint {
    double threshold = 0.0;
    double precision = 0.0;
    double recall = 0.0;
};

// One point per distinct score, descending; score >= threshold means
// positive. Requires at least one positive label.
std::vector<PrPoint> pr_curve(const std::vector<double>& scores, const std::vector<int>& labels);

struct Calibration {
    double threshold = 0.0;
    bool recall_met = false;  // false: no curve point reaches min_recall
};

// Highest-precision curve point subject to recall >= min_recall, ties going
// to the larger threshold. Falls back to the lowest threshold (with
// recall_met = false) when the constraint is unreachable.
Calibration calibrate(const std::vector<PrPoint>& curve, double min_recall);

// Expected count of missed mistakes in an assessment of n_words.
double expected_undetected(double mean_mistakes, double recall, int n_words);

struct SetReport {
    std::string name;
    std::string scenario;
    int severity = 0;
    long total = 0;
    // classifier at the calibrated threshold
    double threshold = 0.0;
    bool recall_met = false;
    long tp = 0, fp = 0, tn = 0, fn = 0;
    double precision = 0.0, recall = 0.0;
    // two-step baseline, measured on the same set
    long base_tp = 0, base_fp = 0, base_tn = 0, base_fn = 0;
    double baseline_precision_measured = 0.0;
    double baseline_recall_measured = 0.0;
    // recognition accuracy on this set's images and the closed-form baseline
    long recognizer_correct_words = 0;
    double baseline_precision = 0.0;
    double improvement = 0.0;  // (precision - baseline_precision) / baseline_precision
    std::vector<PrPoint> curve;
};

struct ScenarioSummary {
    std::string scenario;
    std::map<int, double> precision_by_severity;
    double mean_precision = 0.0;
    double mean_baseline_precision = 0.0;
    double mean_baseline_recall_measured = 0.0;
    double improvement = 0.0;
};

struct EvalReport {
    double min_recall = 0.99;
    std::vector<SetReport> sets;
    std::vector<ScenarioSummary> scenarios;
};

struct TestSet {
    ScenarioSpec spec;
    std::string name;
    const data::Dataset* dataset = nullptr;
};

// Scores every test set with the one-step classifier, calibrates per set at
// min_recall, measures the two-step baseline on the same images and groups
// per-scenario severity averages. The recognizer doubles as the feature
// extractor, so each image is run through the shared trunk once.
EvalReport evaluate(const hwr::HwrModel& recognizer, const classifier::ClassifierModel& head,
                    const std::vector<TestSet>& sets, double min_recall);

// Report emission. All outputs are byte-deterministic for a fixed report.
void write_report_json(const EvalReport& report, const std::filesystem::path& path);
EvalReport read_report_json(const std::filesystem::path& path);
void write_report_csv(const EvalReport& report, const std::filesystem::path& path);
void write_pr_svg(const std::vector<PrPoint>& curve, const std::string& title,
                  const std::filesystem::path& path);

void write_scores_jsonl(const std::vector<double>& scores, const std::vector<int>& labels,
                        const std::filesystem::path& path);
std::pair<std::vector<double>, std::vector<int>> read_scores_jsonl(
    const std::filesystem::path& path);

}  // namespace inkcheck::eval
