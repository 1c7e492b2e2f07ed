#pragma once

#include "inkcheck/classifier.hpp"
#include "inkcheck/evaluate.hpp"

namespace inkcheck::desk {

// Desk-scale pipeline defaults: small enough to train end to end in minutes
// on one CPU core, while keeping the shape semantics of the full-scale
// models (T x D features, T x T x 2 aligned pairs). The classifier trains
// on severities 1-3 so the comparison features generalize down to the
// subtle single-substitution case.
struct PipelineDefaults {
    hwr::HwrConfig hwr_config{};           // 32x128 canvas -> T=32, D=64
    classifier::HeadConfig head_config{};  // T=32, A=26, filters 8,8,16,16

    nn::TrainSchedule hwr_schedule{/*epochs=*/26, /*batch_size=*/8,
                                   /*lr_start=*/3e-3, /*lr_end=*/5e-4,
                                   /*patience=*/6, /*seed=*/0};
    nn::TrainSchedule head_schedule{/*epochs=*/16, /*batch_size=*/8,
                                    /*lr_start=*/1.2e-3, /*lr_end=*/3e-4,
                                    /*patience=*/6, /*seed=*/0};

    int hwr_train_count = 3200;
    int hwr_val_count = 400;
    int classifier_train_count = 20480;
    int classifier_val_count = 2048;
    int test_count = 1500;

    int min_word_len = 3;
    int max_word_len = 10;
    int train_severity = 1;
    int train_severity_max = 3;
    double train_incorrect_fraction = 0.5;
    double min_recall = 0.99;
};

inline PipelineDefaults defaults() { return {}; }

}  // namespace inkcheck::desk
