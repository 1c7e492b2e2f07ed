#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "inkcheck/alphabet.hpp"
#include "inkcheck/checkpoint.hpp"
#include "inkcheck/dataset.hpp"
#include "inkcheck/optim.hpp"
#include "inkcheck/rnn.hpp"

namespace inkcheck::hwr {

struct ConvBlockSpec {
    int filters = 8;
    bool pool = true;  // 2x2 max pool after the activation
};

// Recognizer geometry. The column count after the conv stack fixes the
// number of recurrent time steps; every pooled block halves both spatial
// dims.
struct HwrConfig {
    int image_height = 32;
    int image_width = 128;
    std::vector<ConvBlockSpec> conv_blocks{{8, true}, {16, true}};
    int recurrent_hidden = 32;
    Alphabet alphabet = Alphabet::lowercase();

    int pool_count() const;
    int time_steps() const { return image_width >> pool_count(); }
    int feature_rows() const { return image_height >> pool_count(); }
    int feature_dim() const { return 2 * recurrent_hidden; }
    int num_classes() const { return alphabet.size() + 1; }  // + CTC blank

    void validate() const;
    std::string canonical() const;
    std::uint64_t digest() const { return io::fnv1a64(canonical()); }
};

// CNN + bidirectional recurrent block + per-timestep character layer,
// trained with CTC. The same network doubles as the classifier's feature
// extractor: features() is everything below the character layer.
class HwrModel {
public:
    HwrModel(HwrConfig config, std::uint64_t init_seed);

    const HwrConfig& config() const { return config_; }
    std::vector<nn::TensorPtr> parameters() const;
    void set_trainable(bool trainable);

    // Graph-building forward passes.
    nn::TensorPtr features_node(const nn::TensorPtr& image) const;  // [T, D]
    nn::TensorPtr logits_from_features(const nn::TensorPtr& features) const;  // [T, A+1]
    nn::TensorPtr logits_node(const nn::TensorPtr& image) const;

    // Convenience wrappers on images.
    nn::TensorPtr features(const render::WordImage& image) const;
    nn::TensorPtr logits(const render::WordImage& image) const;
    std::string recognize(const render::WordImage& image) const;

    io::Checkpoint to_checkpoint() const;
    // Throws ConfigError unless the checkpoint digest matches `config`.
    static HwrModel from_checkpoint(const io::Checkpoint& checkpoint, HwrConfig config);

    std::vector<std::vector<double>> snapshot() const;
    void restore(const std::vector<std::vector<double>>& snapshot);

private:
    HwrConfig config_;
    struct ConvLayer {
        nn::TensorPtr kernels, bias;
        bool pool = true;
    };
    std::vector<ConvLayer> conv_;
    nn::GruParams fwd_, bwd_;
    nn::TensorPtr top_weight_, top_bias_;
};

// Per-timestep argmax, collapse adjacent repeats, drop blanks.
std::string greedy_decode(const nn::Tensor& logits, const Alphabet& alphabet);

// Everything below the character-classification layer, inference mode.
nn::TensorPtr extract_features(const HwrModel& model, const render::WordImage& image);

struct EpochLog {
    int epoch = 0;
    double learning_rate = 0.0;
    double train_loss = 0.0;
    double val_cer = 0.0;
    double val_word_accuracy = 0.0;
    bool improved = false;
};

struct TrainResult {
    std::vector<EpochLog> log;
    int best_epoch = -1;
    double best_val_cer = 0.0;
    double best_val_word_accuracy = 0.0;
    int skipped_infeasible = 0;
};

using ProgressFn = std::function<void(const EpochLog&)>;

// Minimizes mean CTC loss with RMSprop; early-stops on validation CER and
// leaves the best-validation weights in the model. The training set must
// contain only correct examples; labels that cannot fit the time axis are
// skipped and counted. Bit-reproducible for a fixed schedule seed.
TrainResult train_hwr(HwrModel& model, const data::Dataset& train, const data::Dataset& val,
                      const nn::TrainSchedule& schedule, const ProgressFn& progress = {});

}  // namespace inkcheck::hwr
