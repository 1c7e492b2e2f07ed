#pragma once

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <string>
#include <vector>

#include "inkcheck/evaluate.hpp"
#include "inkcheck/ops.hpp"

namespace testutil {

// Replays a scripted sequence of draws; lets tests force specific choices
// out of the randomized generators.
struct ScriptedRng {
    std::deque<std::uint64_t> values;

    std::uint64_t uniform_index(std::uint64_t n) {
        if (values.empty()) return 0;
        const auto v = values.front() % n;
        values.pop_front();
        return v;
    }
};

// Central finite differences against reverse-mode gradients. `build_loss`
// must freshly rebuild the graph from the current parameter values.
struct GradCheckResult {
    int checked = 0;
    int failed = 0;
    double worst_rel = 0.0;
};

inline GradCheckResult check_gradients(const std::vector<inkcheck::nn::TensorPtr>& params,
                                       const std::function<inkcheck::nn::TensorPtr()>& build_loss,
                                       int coords_per_param, inkcheck::Rng& rng,
                                       double rel_tol = 1e-4, double h = 1e-5) {
    using inkcheck::nn::backward;
    for (const auto& p : params) p->zero_grad();
    backward(build_loss());

    GradCheckResult result;
    for (const auto& p : params) {
        const std::size_t n = p->data.size();
        for (int c = 0; c < coords_per_param; ++c) {
            const std::size_t i = static_cast<std::size_t>(rng.uniform_index(n));
            const double original = p->data[i];
            p->data[i] = original + h;
            const double up = build_loss()->data[0];
            p->data[i] = original - h;
            const double down = build_loss()->data[0];
            p->data[i] = original;
            const double numeric = (up - down) / (2.0 * h);
            const double analytic = p->grad[i];
            const double abs_err = std::abs(numeric - analytic);
            const double rel = abs_err / std::max(1e-8, std::abs(numeric) + std::abs(analytic));
            result.worst_rel = std::max(result.worst_rel, abs_err < 1e-7 ? 0.0 : rel);
            ++result.checked;
            if (abs_err >= 1e-7 && rel >= rel_tol) ++result.failed;
        }
    }
    return result;
}

// CTC oracle: enumerate every length-T class sequence, collapse it
// (merge adjacent repeats, then drop blanks) and sum the path
// probabilities of those matching the target.
inline double ctc_bruteforce(const std::vector<std::vector<double>>& logits,
                             const std::vector<int>& target) {
    const int t_steps = static_cast<int>(logits.size());
    const int k = static_cast<int>(logits[0].size());
    const int blank = k - 1;

    std::vector<std::vector<double>> probs(logits.size());
    for (int t = 0; t < t_steps; ++t) {
        double mx = logits[t][0];
        for (double v : logits[static_cast<std::size_t>(t)]) mx = std::max(mx, v);
        double z = 0.0;
        for (double v : logits[static_cast<std::size_t>(t)]) z += std::exp(v - mx);
        for (double v : logits[static_cast<std::size_t>(t)])
            probs[static_cast<std::size_t>(t)].push_back(std::exp(v - mx) / z);
    }

    double total = 0.0;
    std::vector<int> path(static_cast<std::size_t>(t_steps), 0);
    while (true) {
        std::vector<int> collapsed;
        int prev = -1;
        for (int c : path) {
            if (c != prev && c != blank) collapsed.push_back(c);
            prev = c;
        }
        if (collapsed == target) {
            double p = 1.0;
            for (int t = 0; t < t_steps; ++t)
                p *= probs[static_cast<std::size_t>(t)][static_cast<std::size_t>(path[static_cast<std::size_t>(t)])];
            total += p;
        }
        int pos = t_steps - 1;
        while (pos >= 0 && path[static_cast<std::size_t>(pos)] == k - 1) {
            path[static_cast<std::size_t>(pos)] = 0;
            --pos;
        }
        if (pos < 0) break;
        ++path[static_cast<std::size_t>(pos)];
    }
    return -std::log(total);
}

// Quadratic-time PR sweep used as the reference for the fast curve.
inline std::vector<inkcheck::eval::PrPoint> pr_bruteforce(const std::vector<double>& scores,
                                                          const std::vector<int>& labels) {
    std::vector<double> thresholds = scores;
    std::sort(thresholds.begin(), thresholds.end(), std::greater<>());
    thresholds.erase(std::unique(thresholds.begin(), thresholds.end()), thresholds.end());
    long total_pos = 0;
    for (int l : labels) total_pos += l ? 1 : 0;
    std::vector<inkcheck::eval::PrPoint> curve;
    for (double thr : thresholds) {
        long tp = 0, fp = 0;
        for (std::size_t i = 0; i < scores.size(); ++i) {
            if (scores[i] >= thr) (labels[i] ? ++tp : ++fp);
        }
        curve.push_back({thr, static_cast<double>(tp) / static_cast<double>(tp + fp),
                         static_cast<double>(tp) / static_cast<double>(total_pos)});
    }
    return curve;
}

// Plain DP edit distance, no backtrace; independent of the library's
// count-splitting implementation.
template <typename Seq>
int dp_distance(const Seq& a, const Seq& b) {
    std::vector<int> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = static_cast<int>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = static_cast<int>(i);
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1,
                               prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

inline int hamming(const std::string& a, const std::string& b) {
    int d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) d += a[i] != b[i] ? 1 : 0;
    return d;
}

inline std::string random_word(inkcheck::Rng& rng, int min_len, int max_len, int alphabet = 26) {
    const int len = static_cast<int>(rng.uniform_int(min_len, max_len));
    std::string w;
    for (int i = 0; i < len; ++i)
        w.push_back(static_cast<char>('a' + rng.uniform_index(static_cast<std::uint64_t>(alphabet))));
    return w;
}

}  // namespace testutil
