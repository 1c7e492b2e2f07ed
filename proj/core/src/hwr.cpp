#include "inkcheck/hwr.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "inkcheck/metrics.hpp"

namespace inkcheck::hwr {

int HwrConfig::pool_count() const {
    int pools = 0;
    for (const auto& b : conv_blocks) pools += b.pool ? 1 : 0;
    return pools;
}

void HwrConfig::validate() const {
    if (conv_blocks.empty()) throw ConfigError("hwr: at least one conv block required");
    for (const auto& b : conv_blocks)
        if (b.filters < 1) throw ConfigError("hwr: conv filters must be positive");
    if (recurrent_hidden < 1) throw ConfigError("hwr: recurrent hidden size must be positive");
    const int pools = pool_count();
    if (image_width % (1 << pools) != 0 || image_height % (1 << pools) != 0)
        throw ConfigError("hwr: image dims must be divisible by 2^pools");
    if (time_steps() < 1) throw ConfigError("hwr: no time steps left after pooling");
}

std::string HwrConfig::canonical() const {
    std::ostringstream os;
    os << "hwr/v1;h=" << image_height << ";w=" << image_width << ";blocks=";
    for (std::size_t i = 0; i < conv_blocks.size(); ++i) {
        if (i) os << ",";
        os << conv_blocks[i].filters << (conv_blocks[i].pool ? "p" : "");
    }
    os << ";hidden=" << recurrent_hidden << ";alphabet=" << alphabet.symbols();
    return os.str();
}

HwrModel::HwrModel(HwrConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
    config_.validate();
    Rng rng(init_seed);
    int cin = 1;
    for (const auto& block : config_.conv_blocks) {
        ConvLayer layer;
        layer.kernels = nn::Tensor::glorot({3, 3, cin, block.filters}, 9 * cin, 9 * block.filters, rng);
        layer.bias = nn::Tensor::zeros({block.filters}, true);
        layer.pool = block.pool;
        conv_.push_back(layer);
        cin = block.filters;
    }
    const int seq_feat = config_.feature_rows() * cin;
    fwd_ = nn::GruParams::init(seq_feat, config_.recurrent_hidden, rng);
    bwd_ = nn::GruParams::init(seq_feat, config_.recurrent_hidden, rng);
    top_weight_ = nn::Tensor::glorot({config_.feature_dim(), config_.num_classes()},
                                     config_.feature_dim(), config_.num_classes(), rng);
    top_bias_ = nn::Tensor::zeros({config_.num_classes()}, true);
}

std::vector<nn::TensorPtr> HwrModel::parameters() const {
    std::vector<nn::TensorPtr> params;
    for (const auto& layer : conv_) {
        params.push_back(layer.kernels);
        params.push_back(layer.bias);
    }
    for (const auto& p : fwd_.parameters()) params.push_back(p);
    for (const auto& p : bwd_.parameters()) params.push_back(p);
    params.push_back(top_weight_);
    params.push_back(top_bias_);
    return params;
}

void HwrModel::set_trainable(bool trainable) {
    for (const auto& p : parameters()) {
        p->requires_grad = trainable;
        if (trainable)
            p->grad.assign(p->data.size(), 0.0);
        else {
            p->grad.clear();
            p->grad.shrink_to_fit();
        }
    }
}

nn::TensorPtr HwrModel::features_node(const nn::TensorPtr& image) const {
    if (image->shape.size() != 3 || image->shape[0] != config_.image_height ||
        image->shape[1] != config_.image_width || image->shape[2] != 1)
        throw DimensionError("hwr: image shape does not match config");
    nn::TensorPtr x = image;
    for (const auto& layer : conv_) {
        x = nn::relu(nn::conv2d_same(x, layer.kernels, layer.bias));
        if (layer.pool) x = nn::maxpool2x2(x);
    }
    auto seq = nn::columns_as_timesteps(x);
    return nn::bidirectional_recurrent(seq, fwd_, bwd_, config_.recurrent_hidden);
}

nn::TensorPtr HwrModel::logits_from_features(const nn::TensorPtr& features) const {
    return nn::time_distributed_dense(features, top_weight_, top_bias_);
}

nn::TensorPtr HwrModel::logits_node(const nn::TensorPtr& image) const {
    return logits_from_features(features_node(image));
}

nn::TensorPtr HwrModel::features(const render::WordImage& image) const {
    return features_node(render::image_to_tensor(image));
}

nn::TensorPtr HwrModel::logits(const render::WordImage& image) const {
    return logits_node(render::image_to_tensor(image));
}

std::string HwrModel::recognize(const render::WordImage& image) const {
    return greedy_decode(*logits(image), config_.alphabet);
}

io::Checkpoint HwrModel::to_checkpoint() const {
    io::Checkpoint ckpt;
    ckpt.kind = io::kKindRecognizer;
    ckpt.config_digest = config_.digest();
    for (std::size_t i = 0; i < conv_.size(); ++i) {
        ckpt.tensors.emplace_back("conv" + std::to_string(i) + ".kernels", conv_[i].kernels);
        ckpt.tensors.emplace_back("conv" + std::to_string(i) + ".bias", conv_[i].bias);
    }
    const char* dir_names[2] = {"gru_fwd", "gru_bwd"};
    const nn::GruParams* dirs[2] = {&fwd_, &bwd_};
    for (int d = 0; d < 2; ++d) {
        const auto& p = *dirs[d];
        const std::string prefix = dir_names[d];
        ckpt.tensors.emplace_back(prefix + ".wz", p.wz);
        ckpt.tensors.emplace_back(prefix + ".uz", p.uz);
        ckpt.tensors.emplace_back(prefix + ".bz", p.bz);
        ckpt.tensors.emplace_back(prefix + ".wr", p.wr);
        ckpt.tensors.emplace_back(prefix + ".ur", p.ur);
        ckpt.tensors.emplace_back(prefix + ".br", p.br);
        ckpt.tensors.emplace_back(prefix + ".wc", p.wc);
        ckpt.tensors.emplace_back(prefix + ".uc", p.uc);
        ckpt.tensors.emplace_back(prefix + ".bc", p.bc);
    }
    ckpt.tensors.emplace_back("top.weight", top_weight_);
    ckpt.tensors.emplace_back("top.bias", top_bias_);
    return ckpt;
}

HwrModel HwrModel::from_checkpoint(const io::Checkpoint& checkpoint, HwrConfig config) {
    if (checkpoint.kind != io::kKindRecognizer)
        throw ConfigError("checkpoint is not a recognizer checkpoint");
    if (checkpoint.config_digest != config.digest())
        throw ConfigError("recognizer checkpoint does not match the given config");
    HwrModel model(std::move(config), 0);
    auto expected = model.to_checkpoint();
    for (auto& [name, tensor] : expected.tensors) {
        const auto& stored = checkpoint.find(name);
        if (stored->shape != tensor->shape)
            throw ConfigError("checkpoint tensor '" + name + "' has unexpected shape");
        tensor->data = stored->data;  // tensors are shared with the model
    }
    return model;
}

std::vector<std::vector<double>> HwrModel::snapshot() const {
    std::vector<std::vector<double>> snap;
    for (const auto& p : parameters()) snap.push_back(p->data);
    return snap;
}

void HwrModel::restore(const std::vector<std::vector<double>>& snapshot) {
    auto params = parameters();
    if (snapshot.size() != params.size()) throw ArgumentError("hwr: snapshot size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->data = snapshot[i];
}

std::string greedy_decode(const nn::Tensor& logits, const Alphabet& alphabet) {
    if (logits.shape.size() != 2) throw DimensionError("greedy_decode: expected [T,K] logits");
    const int t_steps = logits.shape[0], k = logits.shape[1];
    const int blank = k - 1;
    std::string out;
    int prev = blank;
    for (int t = 0; t < t_steps; ++t) {
        const double* prow = logits.data.data() + static_cast<std::size_t>(t) * k;
        int best = 0;
        for (int j = 1; j < k; ++j)
            if (prow[j] > prow[best]) best = j;
        if (best != blank && best != prev) out.push_back(alphabet.symbol(best));
        prev = best;
    }
    return out;
}

nn::TensorPtr extract_features(const HwrModel& model, const render::WordImage& image) {
    return model.features(image);
}

namespace {

std::vector<int> label_indices(const std::string& text, const Alphabet& alphabet) {
    std::vector<int> idx;
    idx.reserve(text.size());
    for (char c : text) idx.push_back(alphabet.index_of(c));
    return idx;
}

struct ValScore {
    double cer = 0.0;
    double word_accuracy = 0.0;
};

ValScore score_validation(const HwrModel& model, const data::Dataset& val) {
    ValScore score;
    if (val.manifest.examples.empty()) return score;
    double cer_sum = 0.0;
    int correct = 0;
    for (std::size_t i = 0; i < val.images.size(); ++i) {
        const std::string decoded = model.recognize(val.images[i]);
        const std::string& truth = val.manifest.examples[i].rendered_text;
        cer_sum += metrics::cer(decoded, truth);
        correct += decoded == truth ? 1 : 0;
    }
    score.cer = cer_sum / static_cast<double>(val.images.size());
    score.word_accuracy = static_cast<double>(correct) / static_cast<double>(val.images.size());
    return score;
}

}  // namespace

TrainResult train_hwr(HwrModel& model, const data::Dataset& train, const data::Dataset& val,
                      const nn::TrainSchedule& schedule, const ProgressFn& progress) {
    for (const auto& e : train.manifest.examples)
        if (e.misspelled)
            throw ArgumentError("train_hwr: training set must contain only correct examples");

    const auto& alphabet = model.config().alphabet;
    const int t_steps = model.config().time_steps();

    TrainResult result;
    std::vector<std::size_t> usable;
    std::vector<std::vector<int>> labels(train.manifest.examples.size());
    for (std::size_t i = 0; i < train.manifest.examples.size(); ++i) {
        auto idx = label_indices(train.manifest.examples[i].rendered_text, alphabet);
        if (!nn::ctc_feasible(t_steps, static_cast<int>(idx.size()),
                              nn::count_adjacent_repeats(idx))) {
            ++result.skipped_infeasible;
            continue;
        }
        labels[i] = std::move(idx);
        usable.push_back(i);
    }
    if (usable.empty()) throw ArgumentError("train_hwr: no feasible training examples");

    auto params = model.parameters();
    auto opt = nn::OptimizerState::init(params, schedule.lr_start);
    Rng shuffle_rng(derive_seed(schedule.seed, 0x7261696e));

    double best_cer = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_params;
    int stale_epochs = 0;

    std::vector<std::size_t> order = usable;
    for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
        opt.learning_rate = nn::geometric_lr(schedule.lr_start, schedule.lr_end, epoch, schedule.epochs);
        // Fisher-Yates with the run's own rng keeps epochs reproducible.
        for (std::size_t i = order.size(); i > 1; --i)
            std::swap(order[i - 1], order[shuffle_rng.uniform_index(i)]);

        double loss_sum = 0.0;
        std::size_t batch_start = 0;
        while (batch_start < order.size()) {
            const std::size_t batch_end =
                std::min(batch_start + static_cast<std::size_t>(schedule.batch_size), order.size());
            const double inv_batch = 1.0 / static_cast<double>(batch_end - batch_start);
            nn::zero_grads(params);
            for (std::size_t bi = batch_start; bi < batch_end; ++bi) {
                const std::size_t i = order[bi];
                auto logits = model.logits_node(render::image_to_tensor(train.images[i]));
                nn::TensorPtr loss = nn::ctc_loss(logits, labels[i]);
                if (schedule.ctc_window_margin >= 0) {
                    // soft output-delay constraint: alignments stay free, but
                    // emission mass past the window pays a blank penalty
                    const int window =
                        std::min(t_steps, static_cast<int>(labels[i].size()) +
                                              nn::count_adjacent_repeats(labels[i]) +
                                              schedule.ctc_window_margin);
                    if (window < t_steps)
                        loss = nn::add(loss, nn::scale(nn::blank_tail_loss(logits, window),
                                                       schedule.ctc_tail_weight));
                }
                if (!std::isfinite(loss->data[0]))
                    throw NumericError("train_hwr: non-finite loss at epoch " +
                                       std::to_string(epoch) + ", example " + std::to_string(i));
                loss_sum += loss->data[0];
                nn::backward(loss, inv_batch);
            }
            nn::rmsprop_step(params, opt);
            batch_start = batch_end;
        }

        const auto val_score = score_validation(model, val);
        EpochLog entry;
        entry.epoch = epoch;
        entry.learning_rate = opt.learning_rate;
        entry.train_loss = loss_sum / static_cast<double>(order.size());
        entry.val_cer = val_score.cer;
        entry.val_word_accuracy = val_score.word_accuracy;
        entry.improved = val_score.cer < best_cer;
        result.log.push_back(entry);
        if (progress) progress(entry);

        if (entry.improved) {
            best_cer = val_score.cer;
            best_params = model.snapshot();
            result.best_epoch = epoch;
            result.best_val_cer = val_score.cer;
            result.best_val_word_accuracy = val_score.word_accuracy;
            stale_epochs = 0;
        } else if (++stale_epochs >= schedule.patience) {
            break;
        }
    }

    if (!best_params.empty()) model.restore(best_params);
    return result;
}

}  // namespace inkcheck::hwr
