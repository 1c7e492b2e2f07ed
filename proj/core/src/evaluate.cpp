#include "inkcheck/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <json.hpp>

#include "inkcheck/textgen.hpp"

namespace inkcheck::eval {

using nlohmann::json;

ScenarioSpec ScenarioSpec::moderate(int severity) {
    return ScenarioSpec{"moderate", 1, 5, 0.99, severity};
}

ScenarioSpec ScenarioSpec::difficult(int severity) {
    return ScenarioSpec{"difficult", 1, 2, 0.99, severity};
}

std::pair<int, int> scenario_counts(const ScenarioSpec& spec, int total) {
    if (total <= 0) throw ArgumentError("scenario_counts: total must be positive");
    const int m = static_cast<int>(std::llround(spec.mean_mistakes() * total));
    return {m, total - m};
}

data::Dataset build_test_set(const ScenarioSpec& spec, int total,
                             const std::vector<std::string>& wordlist, std::uint64_t seed,
                             const render::CanvasConfig& canvas) {
    if (spec.severity < 1) throw ArgumentError("build_test_set: severity must be >= 1");
    const auto [m_count, c_count] = scenario_counts(spec, total);

    // Word draws depend on (seed, index) only: every scenario/severity set
    // built from the same seed sees the same word at the same index.
    Rng word_rng(derive_seed(seed, 0x776f7264));
    const auto words = textgen::sample_words(wordlist, total, word_rng);

    data::Dataset ds;
    ds.manifest.seed = seed;
    ds.manifest.examples.reserve(words.size());
    ds.images.reserve(words.size());
    for (int i = 0; i < total; ++i) {
        data::Example e;
        e.text = words[static_cast<std::size_t>(i)];
        e.misspelled = i < m_count;
        e.seed = derive_seed(seed, static_cast<std::uint64_t>(i));
        if (e.misspelled) {
            e.severity = spec.severity;
            // Keyed by severity, not scenario: positives are shared across
            // scenarios at equal severity.
            Rng mistake_rng(derive_seed(e.seed, 0x6d697374, static_cast<std::uint64_t>(spec.severity)));
            e.rendered_text = textgen::apply_severity(e.text, spec.severity, mistake_rng);
        } else {
            e.rendered_text = e.text;
        }
        Rng style_rng(derive_seed(e.seed, 0x7374796c));
        const auto style = render::sample_style(style_rng);
        ds.images.push_back(
            render::render_word(e.rendered_text, style, derive_seed(e.seed, 0x696d6167), canvas));
        char name[32];
        std::snprintf(name, sizeof name, "images/%08d.pgm", i);
        e.image_path = name;
        ds.manifest.examples.push_back(std::move(e));
    }
    ds.manifest.meta["kind"] = "test";
    ds.manifest.meta["scenario"] = spec.name;
    ds.manifest.meta["severity"] = std::to_string(spec.severity);
    ds.manifest.meta["mistake_ratio"] =
        std::to_string(spec.mistake_ratio_m) + ":" + std::to_string(spec.mistake_ratio_c);
    return ds;
}

bool baseline_classify(const hwr::HwrModel& recognizer, const render::WordImage& image,
                       const std::string& text) {
    return recognizer.recognize(image) != text;
}

double baseline_precision(int m, int c, long correct_words, long total_words) {
    if (m < 1 || c < 1) throw ArgumentError("baseline_precision: ratio terms must be >= 1");
    if (total_words <= 0 || correct_words < 0 || correct_words > total_words)
        throw ArgumentError("baseline_precision: need 0 <= P <= T");
    const double frac = static_cast<double>(m) / static_cast<double>(m + c);
    const double mistaken = std::round(frac * static_cast<double>(total_words));
    const double correct = static_cast<double>(total_words) - mistaken;
    // Expected misread-correct count, as an integer number of examples; the
    // recall-1 assumption makes TP the full mistaken count.
    const double fp = std::round(correct * static_cast<double>(total_words - correct_words) /
                                 static_cast<double>(total_words));
    return mistaken / (mistaken + fp);
}

std::vector<PrPoint> pr_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.empty() || scores.size() != labels.size())
        throw ArgumentError("pr_curve: scores/labels mismatch");
    long total_pos = 0;
    for (int l : labels) total_pos += l ? 1 : 0;
    if (total_pos == 0) throw ArgumentError("pr_curve: no positive labels");

    std::vector<std::size_t> idx(scores.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

    std::vector<PrPoint> curve;
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < idx.size()) {
        const double threshold = scores[idx[i]];
        // Consume the whole tie group: score >= threshold includes all of it.
        while (i < idx.size() && scores[idx[i]] == threshold) {
            if (labels[idx[i]]) ++tp; else ++fp;
            ++i;
        }
        curve.push_back({threshold, static_cast<double>(tp) / static_cast<double>(tp + fp),
                         static_cast<double>(tp) / static_cast<double>(total_pos)});
    }
    return curve;
}

Calibration calibrate(const std::vector<PrPoint>& curve, double min_recall) {
    if (curve.empty()) throw ArgumentError("calibrate: empty curve");
    const PrPoint* best = nullptr;
    for (const auto& p : curve) {
        if (p.recall < min_recall) continue;
        if (!best || p.precision > best->precision ||
            (p.precision == best->precision && p.threshold > best->threshold))
            best = &p;
    }
    if (best) return {best->threshold, true};
    // Constraint unreachable: lowest threshold keeps recall maximal.
    double lowest = curve.front().threshold;
    for (const auto& p : curve) lowest = std::min(lowest, p.threshold);
    return {lowest, false};
}

double expected_undetected(double mean_mistakes, double recall, int n_words) {
    if (mean_mistakes < 0.0 || mean_mistakes > 1.0 || recall < 0.0 || recall > 1.0 || n_words < 0)
        throw ArgumentError("expected_undetected: arguments out of range");
    return static_cast<double>(n_words) * mean_mistakes * (1.0 - recall);
}

EvalReport evaluate(const hwr::HwrModel& recognizer, const classifier::ClassifierModel& head,
                    const std::vector<TestSet>& sets, double min_recall) {
    if (sets.empty()) throw ArgumentError("evaluate: no test sets");
    EvalReport report;
    report.min_recall = min_recall;

    const auto& alphabet = recognizer.config().alphabet;
    for (const auto& set : sets) {
        if (!set.dataset || set.dataset->manifest.examples.empty())
            throw ArgumentError("evaluate: empty test set '" + set.name + "'");
        const auto& ds = *set.dataset;

        SetReport sr;
        sr.name = set.name;
        sr.scenario = set.spec.name;
        sr.severity = set.spec.severity;
        sr.total = static_cast<long>(ds.manifest.examples.size());

        std::vector<double> scores(ds.manifest.examples.size());
        std::vector<int> labels(ds.manifest.examples.size());
        for (std::size_t i = 0; i < ds.manifest.examples.size(); ++i) {
            const auto& e = ds.manifest.examples[i];
            // One pass through the shared trunk serves both models.
            auto features = recognizer.features(ds.images[i]);
            auto onehot = render::one_hot_encode(e.text, alphabet, head.config().time_steps);
            scores[i] = head.score(features, onehot);
            labels[i] = e.misspelled ? 1 : 0;

            const std::string decoded =
                hwr::greedy_decode(*recognizer.logits_from_features(features), alphabet);
            if (decoded == e.rendered_text) ++sr.recognizer_correct_words;
            const bool base_positive = decoded != e.text;
            if (e.misspelled) {
                base_positive ? ++sr.base_tp : ++sr.base_fn;
            } else {
                base_positive ? ++sr.base_fp : ++sr.base_tn;
            }
        }

        sr.curve = pr_curve(scores, labels);
        const auto cal = calibrate(sr.curve, min_recall);
        sr.threshold = cal.threshold;
        sr.recall_met = cal.recall_met;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            const bool positive = scores[i] >= sr.threshold;
            if (labels[i]) {
                positive ? ++sr.tp : ++sr.fn;
            } else {
                positive ? ++sr.fp : ++sr.tn;
            }
        }
        sr.precision = sr.tp + sr.fp > 0
                           ? static_cast<double>(sr.tp) / static_cast<double>(sr.tp + sr.fp)
                           : 0.0;
        sr.recall = static_cast<double>(sr.tp) / static_cast<double>(sr.tp + sr.fn);
        sr.baseline_precision_measured =
            sr.base_tp + sr.base_fp > 0
                ? static_cast<double>(sr.base_tp) / static_cast<double>(sr.base_tp + sr.base_fp)
                : 0.0;
        sr.baseline_recall_measured =
            static_cast<double>(sr.base_tp) / static_cast<double>(sr.base_tp + sr.base_fn);
        sr.baseline_precision = baseline_precision(set.spec.mistake_ratio_m,
                                                   set.spec.mistake_ratio_c,
                                                   sr.recognizer_correct_words, sr.total);
        sr.improvement = (sr.precision - sr.baseline_precision) / sr.baseline_precision;
        report.sets.push_back(std::move(sr));
    }

    // Scenario summaries: severity-averaged precisions, like the grouped
    // results tables.
    std::vector<std::string> scenario_order;
    for (const auto& sr : report.sets)
        if (std::find(scenario_order.begin(), scenario_order.end(), sr.scenario) ==
            scenario_order.end())
            scenario_order.push_back(sr.scenario);
    for (const auto& name : scenario_order) {
        ScenarioSummary summary;
        summary.scenario = name;
        double base_sum = 0.0, recall_sum = 0.0;
        int n = 0;
        for (const auto& sr : report.sets) {
            if (sr.scenario != name) continue;
            summary.precision_by_severity[sr.severity] = sr.precision;
            base_sum += sr.baseline_precision;
            recall_sum += sr.baseline_recall_measured;
            ++n;
        }
        double prec_sum = 0.0;
        for (const auto& [sev, prec] : summary.precision_by_severity) prec_sum += prec;
        summary.mean_precision = prec_sum / static_cast<double>(n);
        summary.mean_baseline_precision = base_sum / static_cast<double>(n);
        summary.mean_baseline_recall_measured = recall_sum / static_cast<double>(n);
        summary.improvement = (summary.mean_precision - summary.mean_baseline_precision) /
                              summary.mean_baseline_precision;
        report.scenarios.push_back(std::move(summary));
    }
    return report;
}

namespace {

json set_to_json(const SetReport& sr) {
    json curve = json::array();
    for (const auto& p : sr.curve)
        curve.push_back({{"threshold", p.threshold}, {"precision", p.precision}, {"recall", p.recall}});
    return json{{"name", sr.name},
                {"scenario", sr.scenario},
                {"severity", sr.severity},
                {"total", sr.total},
                {"threshold", sr.threshold},
                {"recall_met", sr.recall_met},
                {"tp", sr.tp},
                {"fp", sr.fp},
                {"tn", sr.tn},
                {"fn", sr.fn},
                {"precision", sr.precision},
                {"recall", sr.recall},
                {"baseline", {{"tp", sr.base_tp},
                              {"fp", sr.base_fp},
                              {"tn", sr.base_tn},
                              {"fn", sr.base_fn},
                              {"precision_measured", sr.baseline_precision_measured},
                              {"recall_measured", sr.baseline_recall_measured}}},
                {"recognizer_correct_words", sr.recognizer_correct_words},
                {"baseline_precision", sr.baseline_precision},
                {"improvement", sr.improvement},
                {"pr_curve", curve}};
}

}  // namespace

void write_report_json(const EvalReport& report, const std::filesystem::path& path) {
    json sets = json::array();
    for (const auto& sr : report.sets) sets.push_back(set_to_json(sr));
    json scenarios = json::array();
    for (const auto& s : report.scenarios) {
        json by_sev = json::object();
        for (const auto& [sev, prec] : s.precision_by_severity)
            by_sev[std::to_string(sev)] = prec;
        scenarios.push_back({{"scenario", s.scenario},
                             {"precision_by_severity", by_sev},
                             {"mean_precision", s.mean_precision},
                             {"mean_baseline_precision", s.mean_baseline_precision},
                             {"mean_baseline_recall_measured", s.mean_baseline_recall_measured},
                             {"improvement", s.improvement}});
    }
    json doc{{"min_recall", report.min_recall}, {"sets", sets}, {"scenarios", scenarios}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write report: " + path.string());
    out << doc.dump(2) << "\n";
}

EvalReport read_report_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open report: " + path.string());
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded()) throw IoError("malformed report: " + path.string());
    EvalReport report;
    report.min_recall = doc.at("min_recall").get<double>();
    for (const auto& s : doc.at("sets")) {
        SetReport sr;
        sr.name = s.at("name").get<std::string>();
        sr.scenario = s.at("scenario").get<std::string>();
        sr.severity = s.at("severity").get<int>();
        sr.total = s.at("total").get<long>();
        sr.threshold = s.at("threshold").get<double>();
        sr.recall_met = s.at("recall_met").get<bool>();
        sr.tp = s.at("tp").get<long>();
        sr.fp = s.at("fp").get<long>();
        sr.tn = s.at("tn").get<long>();
        sr.fn = s.at("fn").get<long>();
        sr.precision = s.at("precision").get<double>();
        sr.recall = s.at("recall").get<double>();
        const auto& b = s.at("baseline");
        sr.base_tp = b.at("tp").get<long>();
        sr.base_fp = b.at("fp").get<long>();
        sr.base_tn = b.at("tn").get<long>();
        sr.base_fn = b.at("fn").get<long>();
        sr.baseline_precision_measured = b.at("precision_measured").get<double>();
        sr.baseline_recall_measured = b.at("recall_measured").get<double>();
        sr.recognizer_correct_words = s.at("recognizer_correct_words").get<long>();
        sr.baseline_precision = s.at("baseline_precision").get<double>();
        sr.improvement = s.at("improvement").get<double>();
        for (const auto& p : s.at("pr_curve"))
            sr.curve.push_back({p.at("threshold").get<double>(), p.at("precision").get<double>(),
                                p.at("recall").get<double>()});
        report.sets.push_back(std::move(sr));
    }
    for (const auto& s : doc.at("scenarios")) {
        ScenarioSummary summary;
        summary.scenario = s.at("scenario").get<std::string>();
        for (const auto& [k, v] : s.at("precision_by_severity").items())
            summary.precision_by_severity[std::stoi(k)] = v.get<double>();
        summary.mean_precision = s.at("mean_precision").get<double>();
        summary.mean_baseline_precision = s.at("mean_baseline_precision").get<double>();
        summary.mean_baseline_recall_measured =
            s.at("mean_baseline_recall_measured").get<double>();
        summary.improvement = s.at("improvement").get<double>();
        report.scenarios.push_back(std::move(summary));
    }
    return report;
}

void write_report_csv(const EvalReport& report, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write csv: " + path.string());
    out << "scenario,severity,tp,fp,tn,fn,precision,recall,baseline_precision,improvement\n";
    char line[256];
    for (const auto& sr : report.sets) {
        std::snprintf(line, sizeof line, "%s,%d,%ld,%ld,%ld,%ld,%.6f,%.6f,%.6f,%.6f\n",
                      sr.scenario.c_str(), sr.severity, sr.tp, sr.fp, sr.tn, sr.fn, sr.precision,
                      sr.recall, sr.baseline_precision, sr.improvement);
        out << line;
    }
}

void write_pr_svg(const std::vector<PrPoint>& curve, const std::string& title,
                  const std::filesystem::path& path) {
    constexpr int kW = 480, kH = 400, kMargin = 50;
    const int plot_w = kW - 2 * kMargin, plot_h = kH - 2 * kMargin;
    auto sx = [&](double recall) { return kMargin + recall * plot_w; };
    auto sy = [&](double precision) { return kH - kMargin - precision * plot_h; };

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write svg: " + path.string());
    char buf[256];
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kW << "\" height=\"" << kH
        << "\" viewBox=\"0 0 " << kW << " " << kH << "\">\n";
    out << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
    out << "<text x=\"" << kW / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
        << title << "</text>\n";
    // axes
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", kMargin,
                  kH - kMargin, kW - kMargin, kH - kMargin);
    out << buf;
    std::snprintf(buf, sizeof buf,
                  "<line x1=\"%d\" y1=\"%d\" x2=\"%d\" y2=\"%d\" stroke=\"black\"/>\n", kMargin,
                  kMargin, kMargin, kH - kMargin);
    out << buf;
    for (int i = 0; i <= 4; ++i) {
        const double v = i * 0.25;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%.1f\" y=\"%d\" text-anchor=\"middle\" font-size=\"10\">%.2f</text>\n",
                      sx(v), kH - kMargin + 16, v);
        out << buf;
        std::snprintf(buf, sizeof buf,
                      "<text x=\"%d\" y=\"%.1f\" text-anchor=\"end\" font-size=\"10\">%.2f</text>\n",
                      kMargin - 6, sy(v) + 3, v);
        out << buf;
    }
    out << "<text x=\"" << kW / 2 << "\" y=\"" << kH - 10
        << "\" text-anchor=\"middle\" font-size=\"12\">recall</text>\n";
    out << "<text x=\"14\" y=\"" << kH / 2
        << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 14 " << kH / 2
        << ")\">precision</text>\n";
    // curve, drawn from low recall to high
    out << "<polyline fill=\"none\" stroke=\"#1f6fb2\" stroke-width=\"1.5\" points=\"";
    for (auto it = curve.rbegin(); it != curve.rend(); ++it) {
        std::snprintf(buf, sizeof buf, "%.2f,%.2f ", sx(it->recall), sy(it->precision));
        out << buf;
    }
    out << "\"/>\n</svg>\n";
}

void write_scores_jsonl(const std::vector<double>& scores, const std::vector<int>& labels,
                        const std::filesystem::path& path) {
    if (scores.size() != labels.size()) throw ArgumentError("write_scores: size mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write scores: " + path.string());
    for (std::size_t i = 0; i < scores.size(); ++i) {
        json rec{{"score", scores[i]}, {"label", labels[i]}};
        out << rec.dump() << "\n";
    }
}

std::pair<std::vector<double>, std::vector<int>> read_scores_jsonl(
    const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scores: " + path.string());
    std::vector<double> scores;
    std::vector<int> labels;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        json rec = json::parse(line, nullptr, false);
        if (rec.is_discarded()) throw IoError("bad scores record in " + path.string());
        scores.push_back(rec.at("score").get<double>());
        labels.push_back(rec.at("label").get<int>());
    }
    return {std::move(scores), std::move(labels)};
}

}  // namespace inkcheck::eval
