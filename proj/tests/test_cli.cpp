#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path kWorkdir = fs::temp_directory_path() / "inkcheck_cli_tests";

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

RunResult run_cli(const std::string& args) {
    const fs::path out_file = kWorkdir / "stdout.txt";
    const fs::path err_file = kWorkdir / "stderr.txt";
    const std::string cmd = std::string(INKCHECK_CLI_PATH) + " " + args + " > " +
                            out_file.string() + " 2> " + err_file.string();
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out_file);
    r.err = slurp(err_file);
    return r;
}

fs::path write_config(const std::string& name, const std::string& extra = "") {
    const fs::path path = kWorkdir / name;
    std::ofstream out(path);
    out << "[run]\n"
        << "seed = 2024\n"
        << "[paths]\n"
        << "wordlist = " << INKCHECK_WORDLIST_PATH << "\n"
        << "output_dir = " << (kWorkdir / "out").string() << "\n"
        << "[hwr]\n"
        << "epochs = 2\n"
        << "batch_size = 8\n"
        << "train_count = 24\n"
        << "val_count = 8\n"
        << "[classifier]\n"
        << "epochs = 2\n"
        << "batch_size = 8\n"
        << "train_count = 24\n"
        << "val_count = 8\n"
        << "[eval]\n"
        << "min_recall = 0.9\n"
        << "test_count = 30\n"
        << "severities = 1,2\n"
        << extra;
    return path;
}

std::string dataset_fingerprint(const fs::path& dir) {
    std::string fp = slurp(dir / "manifest.jsonl") + slurp(dir / "meta.json");
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(dir / "images")) images.push_back(entry.path());
    std::sort(images.begin(), images.end());
    for (const auto& img : images) fp += slurp(img);
    return fp;
}

}  // namespace

TEST_CASE("cli: help and argument errors") {
    fs::create_directories(kWorkdir);
    CHECK(run_cli("--help").exit_code == 0);
    CHECK(run_cli("gen-data").exit_code == 1);           // missing --split
    CHECK(run_cli("no-such-command").exit_code == 1);
    const auto missing = run_cli("gen-data --split train");
    CHECK(missing.exit_code == 1);  // no --config
    CHECK(missing.err.find("error") != std::string::npos);
}

TEST_CASE("cli: config validation") {
    fs::create_directories(kWorkdir);
    {
        std::ofstream out(kWorkdir / "noseed.cfg");
        out << "[paths]\nwordlist = " << INKCHECK_WORDLIST_PATH << "\n";
    }
    const auto r = run_cli("--config " + (kWorkdir / "noseed.cfg").string() + " gen-data --split train");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("seed") != std::string::npos);
    CHECK(run_cli("--config /nonexistent.cfg gen-data --split train").exit_code == 1);
}

TEST_CASE("cli: full tiny pipeline with deterministic artifacts") {
    fs::remove_all(kWorkdir);
    fs::create_directories(kWorkdir);
    const auto cfg = write_config("run.cfg");
    const fs::path out = kWorkdir / "out";

    // --- gen-data: hwr splits (correct-only), classifier splits, test sets
    auto r = run_cli("--config " + cfg.string() +
                     " gen-data --split train --name hwr_train --incorrect-fraction 0 --count 24");
    REQUIRE(r.exit_code == 0);
    CHECK(r.out.find("wrote 24 examples") != std::string::npos);
    CHECK(r.out.find("incorrect 0") != std::string::npos);
    REQUIRE(run_cli("--config " + cfg.string() +
                    " gen-data --split val --name hwr_val --incorrect-fraction 0 --count 8")
                .exit_code == 0);
    REQUIRE(run_cli("--config " + cfg.string() + " gen-data --split train").exit_code == 0);
    REQUIRE(run_cli("--config " + cfg.string() + " gen-data --split val").exit_code == 0);
    for (const char* scenario : {"difficult", "moderate"})
        for (int severity : {1, 2}) {
            const std::string args = std::string("--config ") + cfg.string() +
                                     " gen-data --split test --scenario " + scenario +
                                     " --severity " + std::to_string(severity);
            REQUIRE(run_cli(args).exit_code == 0);
        }

    // scenario counts: difficult 1:2 of 30 -> 10 misspelled
    {
        std::ifstream meta(out / "data" / "test_difficult_s1" / "meta.json");
        const auto doc = nlohmann::json::parse(meta);
        CHECK(doc.at("count").get<int>() == 30);
        CHECK(doc.at("severity_histogram").at("1").get<int>() == 10);
        CHECK(doc.at("scenario").get<std::string>() == "difficult");
    }

    // byte-identical regeneration under the same seed/config
    const auto fp1 = dataset_fingerprint(out / "data" / "train");
    REQUIRE(run_cli("--config " + cfg.string() + " gen-data --split train").exit_code == 0);
    CHECK(dataset_fingerprint(out / "data" / "train") == fp1);

    // --- train-hwr rejects sets with misspelled examples
    r = run_cli("--config " + cfg.string() + " train-hwr --train " + (out / "data" / "train").string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("correct") != std::string::npos);

    // --- train-hwr (tiny) and checkpoint determinism
    r = run_cli("--config " + cfg.string() + " train-hwr");
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(out / "checkpoints" / "hwr.ckpt"));
    const auto ckpt1 = slurp(out / "checkpoints" / "hwr.ckpt");
    // per-epoch log: line-delimited, epochs in order
    {
        std::ifstream log(out / "logs" / "train_hwr.jsonl");
        std::string line;
        int expect = 0;
        while (std::getline(log, line)) {
            const auto rec = nlohmann::json::parse(line);
            CHECK(rec.at("epoch").get<int>() == expect++);
        }
        CHECK(expect == 2);
    }
    REQUIRE(run_cli("--config " + cfg.string() + " train-hwr").exit_code == 0);
    CHECK(slurp(out / "checkpoints" / "hwr.ckpt") == ckpt1);

    // --- train-classifier + digest guard
    r = run_cli("--config " + cfg.string() + " train-classifier");
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(out / "checkpoints" / "classifier.ckpt"));
    const auto cls1 = slurp(out / "checkpoints" / "classifier.ckpt");
    REQUIRE(run_cli("--config " + cfg.string() + " train-classifier").exit_code == 0);
    CHECK(slurp(out / "checkpoints" / "classifier.ckpt") == cls1);

    // a recognizer trained under a different geometry is refused
    r = run_cli("--config " + cfg.string() + " --set model.hidden=16 train-hwr --out " +
                (out / "checkpoints" / "other.ckpt").string());
    REQUIRE(r.exit_code == 0);
    r = run_cli("--config " + cfg.string() + " train-classifier --extractor " +
                (out / "checkpoints" / "other.ckpt").string());
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("match") != std::string::npos);

    // --- evaluate
    r = run_cli("--config " + cfg.string() + " evaluate");
    REQUIRE(r.exit_code == 0);
    REQUIRE(fs::exists(out / "reports" / "report.json"));
    REQUIRE(fs::exists(out / "reports" / "report.csv"));
    // csv rows = header + 4 test sets
    const auto csv = slurp(out / "reports" / "report.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);
    CHECK(fs::exists(out / "reports" / "pr_test_difficult_s1.svg"));
    CHECK(fs::exists(out / "reports" / "pr_test_moderate_s2.svg"));

    // the reported closed-form baseline is recomputable from the json fields
    {
        const auto doc = nlohmann::json::parse(slurp(out / "reports" / "report.json"));
        for (const auto& set : doc.at("sets")) {
            const long p = set.at("recognizer_correct_words").get<long>();
            const long t = set.at("total").get<long>();
            const int m = 1;
            const int c = set.at("scenario").get<std::string>() == "difficult" ? 2 : 5;
            const double frac = static_cast<double>(m) / (m + c);
            const double mist = std::round(frac * static_cast<double>(t));
            const double fp = std::round((t - mist) * static_cast<double>(t - p) / static_cast<double>(t));
            CHECK(set.at("baseline_precision").get<double>() ==
                  doctest::Approx(mist / (mist + fp)).epsilon(1e-12));
        }
    }

    // evaluate twice: byte-identical reports
    const auto rep1 = slurp(out / "reports" / "report.json");
    REQUIRE(run_cli("--config " + cfg.string() + " evaluate").exit_code == 0);
    CHECK(slurp(out / "reports" / "report.json") == rep1);

    // --- report re-emission from the stored json
    const fs::path rep_dir = kWorkdir / "reemit";
    r = run_cli("report --report " + (out / "reports" / "report.json").string() + " --out-dir " +
                rep_dir.string());
    REQUIRE(r.exit_code == 0);
    CHECK(slurp(rep_dir / "report.csv") == slurp(out / "reports" / "report.csv"));
    CHECK(slurp(rep_dir / "pr_test_difficult_s1.svg") ==
          slurp(out / "reports" / "pr_test_difficult_s1.svg"));

    // --- calibrate from a scores file
    {
        std::ofstream scores(kWorkdir / "scores.jsonl");
        scores << R"({"score":0.9,"label":1})" << "\n"
               << R"({"score":0.8,"label":1})" << "\n"
               << R"({"score":0.3,"label":0})" << "\n";
    }
    r = run_cli("calibrate --scores " + (kWorkdir / "scores.jsonl").string() +
                " --min-recall 1.0 --out " + (kWorkdir / "cal.json").string());
    REQUIRE(r.exit_code == 0);
    const auto cal = nlohmann::json::parse(slurp(kWorkdir / "cal.json"));
    CHECK(cal.at("recall_met").get<bool>());
    CHECK(cal.at("threshold").get<double>() <= 0.8);
    CHECK(cal.at("precision").get<double>() == 1.0);

    // missing test sets: user error
    fs::remove_all(out / "data" / "test_moderate_s2");
    r = run_cli("--config " + cfg.string() + " evaluate");
    CHECK(r.exit_code == 1);
    CHECK(r.err.find("missing test set") != std::string::npos);

    fs::remove_all(kWorkdir);
}
