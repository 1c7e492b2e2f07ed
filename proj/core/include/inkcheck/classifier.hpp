#pragma once

#include <array>
#include <cstdint>

#include "inkcheck/hwr.hpp"

namespace inkcheck::classifier {

// Geometry of the misspelling head. T is the square side of the aligned
// pair; the one-hot text occupies A of its columns with symmetric zero
// padding of (T-A)/2 on each side, so A and T must share parity, and the
// four pooling stages need T divisible by 16.
struct HeadConfig {
    int time_steps = 32;   // T
    int alphabet_size = 26;  // A
    int feature_dim = 64;  // D of the frozen extractor
    std::array<int, 4> conv_filters{8, 8, 16, 16};
    double dropout_rate = 0.1;

    int pad() const { return (time_steps - alphabet_size) / 2; }
    int flat_dim() const {
        const int side = time_steps / 16;
        return side * side * conv_filters[3];
    }
    void validate() const;
    std::string canonical() const;
    std::uint64_t digest() const { return io::fnv1a64(canonical()); }
};

// Trainable parameters behind `config`: the time-distributed compression
// (D*T + T), four conv blocks (9*cin*f + f each) and the final perceptron
// ((T/16)^2 * f4 + 1).
std::int64_t count_params(const HeadConfig& config);

// Compression + one-hot alignment + the convolutional head producing the
// misspelling probability.
class ClassifierModel {
public:
    ClassifierModel(HeadConfig config, std::uint64_t init_seed);

    const HeadConfig& config() const { return config_; }
    std::vector<nn::TensorPtr> parameters() const;

    // Channel 0: features compressed to [T,T] by a linear time-distributed
    // dense layer. Channel 1: the one-hot text, zero-padded to [T,T].
    nn::TensorPtr align(const nn::TensorPtr& features, const nn::TensorPtr& text_onehot) const;

    // Warm start used by train_classifier; every seeded weight stays
    // trainable. The compression is initialized from the extractor's
    // discarded character layer so that letter-class columns land where the
    // padded one-hot puts the same letters: channel 0 starts out as
    // per-timestep letter evidence column-aligned with channel 1. The conv
    // stack is seeded with passthrough taps that pool evidence/text
    // presence down the stack plus contrast filters, which is the natural
    // comparison this head has to express.
    void warm_start_from(const hwr::HwrModel& extractor);

    // Four conv3x3+relu+maxpool blocks, flatten, dropout, perceptron with
    // sigmoid. Returns a scalar strictly inside (0,1).
    nn::TensorPtr head_forward(const nn::TensorPtr& aligned, bool training, Rng& rng) const;

    // Inference-mode score from cached inputs.
    double score(const nn::TensorPtr& features, const nn::TensorPtr& text_onehot) const;

    io::Checkpoint to_checkpoint(std::uint64_t extractor_digest) const;
    // Refuses checkpoints whose head config or extractor digest mismatch.
    static ClassifierModel from_checkpoint(const io::Checkpoint& checkpoint, HeadConfig config,
                                           std::uint64_t extractor_digest);

    std::vector<std::vector<double>> snapshot() const;
    void restore(const std::vector<std::vector<double>>& snapshot);

private:
    HeadConfig config_;
    nn::TensorPtr td_weight_, td_bias_;
    struct ConvLayer {
        nn::TensorPtr kernels, bias;
    };
    std::array<ConvLayer, 4> conv_;
    nn::TensorPtr out_weight_, out_bias_;
};

// Full one-step pipeline in inference mode: P(misspelled | image, text).
double predict(const hwr::HwrModel& extractor, const ClassifierModel& head,
               const render::WordImage& image, const std::string& text);

struct ClassifierEpochLog {
    int epoch = 0;
    double learning_rate = 0.0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double val_accuracy = 0.0;
    bool improved = false;
};

struct ClassifierTrainResult {
    std::vector<ClassifierEpochLog> log;
    int best_epoch = -1;
    double best_val_loss = 0.0;
    double best_val_accuracy = 0.0;
    bool val_balance_warning = false;
};

using ClassifierProgressFn = std::function<void(const ClassifierEpochLog&)>;

// BCE training of the head on top of the frozen extractor (misspelled = 1).
// Features are computed once per example and reused across epochs; no
// gradient ever reaches the extractor. Learning rate decays geometrically
// across the epoch budget; early stopping on validation loss returns the
// best-validation weights. Emits a warning flag if the validation split is
// unbalanced beyond 60/40.
ClassifierTrainResult train_classifier(ClassifierModel& model, const hwr::HwrModel& extractor,
                                       const data::Dataset& train, const data::Dataset& val,
                                       const nn::TrainSchedule& schedule,
                                       const ClassifierProgressFn& progress = {});

}  // namespace inkcheck::classifier
