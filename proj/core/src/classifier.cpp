#include "inkcheck/classifier.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace inkcheck::classifier {

void HeadConfig::validate() const {
    if (time_steps < 16 || time_steps % 16 != 0)
        throw ConfigError("head: T must be divisible by 16 for the four pooling stages");
    if (alphabet_size < 1 || alphabet_size > time_steps)
        throw ConfigError("head: alphabet width must be in [1, T]");
    if ((time_steps - alphabet_size) % 2 != 0)
        throw ConfigError("head: T and A must have the same parity for symmetric padding");
    for (int f : conv_filters)
        if (f < 1) throw ConfigError("head: conv filters must be positive");
    if (dropout_rate < 0.0 || dropout_rate >= 1.0)
        throw ConfigError("head: dropout rate must be in [0,1)");
    if (feature_dim < 1) throw ConfigError("head: feature dim must be positive");
}

std::string HeadConfig::canonical() const {
    std::ostringstream os;
    os << "head/v1;T=" << time_steps << ";A=" << alphabet_size << ";D=" << feature_dim
       << ";filters=" << conv_filters[0] << "," << conv_filters[1] << "," << conv_filters[2]
       << "," << conv_filters[3] << ";dropout=" << dropout_rate;
    return os.str();
}

std::int64_t count_params(const HeadConfig& config) {
    config.validate();
    std::int64_t total = static_cast<std::int64_t>(config.feature_dim) * config.time_steps +
                         config.time_steps;  // time-distributed compression
    int cin = 2;
    for (int f : config.conv_filters) {
        total += 9LL * cin * f + f;
        cin = f;
    }
    total += static_cast<std::int64_t>(config.flat_dim()) + 1;  // final perceptron
    return total;
}

ClassifierModel::ClassifierModel(HeadConfig config, std::uint64_t init_seed)
    : config_(config) {
    config_.validate();
    Rng rng(init_seed);
    td_weight_ = nn::Tensor::glorot({config_.feature_dim, config_.time_steps},
                                    config_.feature_dim, config_.time_steps, rng);
    td_bias_ = nn::Tensor::zeros({config_.time_steps}, true);
    int cin = 2;
    for (std::size_t i = 0; i < conv_.size(); ++i) {
        const int f = config_.conv_filters[i];
        conv_[i].kernels = nn::Tensor::glorot({3, 3, cin, f}, 9 * cin, 9 * f, rng);
        conv_[i].bias = nn::Tensor::zeros({f}, true);
        cin = f;
    }
    out_weight_ = nn::Tensor::glorot({config_.flat_dim(), 1}, config_.flat_dim(), 1, rng);
    out_bias_ = nn::Tensor::zeros({1}, true);
}

std::vector<nn::TensorPtr> ClassifierModel::parameters() const {
    std::vector<nn::TensorPtr> params{td_weight_, td_bias_};
    for (const auto& layer : conv_) {
        params.push_back(layer.kernels);
        params.push_back(layer.bias);
    }
    params.push_back(out_weight_);
    params.push_back(out_bias_);
    return params;
}

nn::TensorPtr ClassifierModel::align(const nn::TensorPtr& features,
                                     const nn::TensorPtr& text_onehot) const {
    const int t = config_.time_steps, a = config_.alphabet_size;
    if (features->shape != std::vector<int>{t, config_.feature_dim})
        throw DimensionError("align: features must be [T,D]");
    if (text_onehot->shape != std::vector<int>{t, a})
        throw DimensionError("align: one-hot text must be [T,A]");
    auto compressed = nn::time_distributed_dense(features, td_weight_, td_bias_);

    // The text channel is constant: place the one-hot block centrally.
    const int pad = config_.pad();
    auto padded = nn::Tensor::zeros({t, t});
    for (int i = 0; i < t; ++i)
        for (int j = 0; j < a; ++j)
            padded->at(i, pad + j) = text_onehot->at(i, j);
    return nn::stack_channels(compressed, padded);
}

nn::TensorPtr ClassifierModel::head_forward(const nn::TensorPtr& aligned, bool training,
                                            Rng& rng) const {
    const int t = config_.time_steps;
    if (aligned->shape != std::vector<int>{t, t, 2})
        throw DimensionError("head_forward: expected [T,T,2] input");
    nn::TensorPtr x = aligned;
    for (const auto& layer : conv_) x = nn::maxpool2x2(nn::relu(nn::conv2d_same(x, layer.kernels, layer.bias)));
    x = nn::dropout(nn::flatten(x), config_.dropout_rate, training, rng);
    return nn::sigmoid(nn::dense(x, out_weight_, out_bias_));
}

double ClassifierModel::score(const nn::TensorPtr& features,
                              const nn::TensorPtr& text_onehot) const {
    Rng unused(0);  // inference ignores the dropout stream
    return head_forward(align(features, text_onehot), false, unused)->data[0];
}

void ClassifierModel::warm_start_from(const hwr::HwrModel& extractor) {
    if (extractor.config().feature_dim() != config_.feature_dim)
        throw ConfigError("warm_start_from: feature width mismatch");
    const auto& top_weight = extractor.to_checkpoint().find("top.weight");  // [D, classes]
    const int d = config_.feature_dim, t = config_.time_steps, a = config_.alphabet_size;
    const int classes = top_weight->shape[1];
    const int letters = std::min(a, classes);
    const int pad = config_.pad();

    // Letter-class evidence lands at the one-hot letter columns, blank
    // evidence in the spare last column; rescaled to a tame magnitude so
    // the optimizer sees a normal starting point, just an informed one.
    double sumsq = 0.0;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < letters; ++j) sumsq += top_weight->at(i, j) * top_weight->at(i, j);
    const double rms = std::sqrt(sumsq / std::max(1, d * letters));
    const double scale = rms > 0.0 ? 0.08 / rms : 1.0;

    std::fill(td_weight_->data.begin(), td_weight_->data.end(), 0.0);
    std::fill(td_bias_->data.begin(), td_bias_->data.end(), 0.0);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < letters; ++j)
            td_weight_->at(i, pad + j) = top_weight->at(i, j) * scale;
        if (classes > a && t - 1 >= pad + a)
            td_weight_->at(i, t - 1) = top_weight->at(i, classes - 1) * scale;
    }

    // Conv stack: tap.at(kernel center, in_ch, out_ch). Filters 0/1/2 carry
    // letter-evidence, text and anti-evidence presence down the pooling
    // pyramid; the two deepest blocks add presence-contrast filters.
    auto tap = [](const nn::TensorPtr& kernels, int in_ch, int out_ch, double w) {
        const int ci = kernels->shape[2], co = kernels->shape[3];
        kernels->data[((1 * 3 + 1) * static_cast<std::size_t>(ci) + in_ch) * co + out_ch] = w;
    };
    const int carried = std::min({3, config_.conv_filters[0], config_.conv_filters[1]});
    if (carried == 3) {
        tap(conv_[0].kernels, 0, 0, 1.0);   // positive letter evidence
        tap(conv_[0].kernels, 1, 1, 1.0);   // text presence
        tap(conv_[0].kernels, 0, 2, -1.0);  // anti-evidence
        for (int c = 0; c < carried; ++c) tap(conv_[1].kernels, c, c, 1.0);
        for (std::size_t layer = 2; layer < conv_.size(); ++layer) {
            const int f = config_.conv_filters[layer];
            for (int c = 0; c < std::min(carried, f); ++c) tap(conv_[layer].kernels, c, c, 1.0);
            if (f >= carried + 2) {
                tap(conv_[layer].kernels, 0, carried, 1.0);       // evidence without
                tap(conv_[layer].kernels, 1, carried, -1.5);      //   matching text
                tap(conv_[layer].kernels, 1, carried + 1, 1.0);   // text without
                tap(conv_[layer].kernels, 0, carried + 1, -0.5);  //   matching evidence
            }
        }
    }
}

io::Checkpoint ClassifierModel::to_checkpoint(std::uint64_t extractor_digest) const {
    io::Checkpoint ckpt;
    ckpt.kind = io::kKindClassifierHead;
    ckpt.config_digest = config_.digest();
    ckpt.extractor_digest = extractor_digest;
    ckpt.tensors.emplace_back("td.weight", td_weight_);
    ckpt.tensors.emplace_back("td.bias", td_bias_);
    for (std::size_t i = 0; i < conv_.size(); ++i) {
        ckpt.tensors.emplace_back("conv" + std::to_string(i) + ".kernels", conv_[i].kernels);
        ckpt.tensors.emplace_back("conv" + std::to_string(i) + ".bias", conv_[i].bias);
    }
    ckpt.tensors.emplace_back("out.weight", out_weight_);
    ckpt.tensors.emplace_back("out.bias", out_bias_);
    return ckpt;
}

ClassifierModel ClassifierModel::from_checkpoint(const io::Checkpoint& checkpoint,
                                                 HeadConfig config,
                                                 std::uint64_t extractor_digest) {
    if (checkpoint.kind != io::kKindClassifierHead)
        throw ConfigError("checkpoint is not a classifier checkpoint");
    if (checkpoint.config_digest != config.digest())
        throw ConfigError("classifier checkpoint does not match the given head config");
    if (checkpoint.extractor_digest != extractor_digest)
        throw ConfigError("classifier checkpoint was trained against a different extractor");
    ClassifierModel model(config, 0);
    auto expected = model.to_checkpoint(extractor_digest);
    for (auto& [name, tensor] : expected.tensors) {
        const auto& stored = checkpoint.find(name);
        if (stored->shape != tensor->shape)
            throw ConfigError("checkpoint tensor '" + name + "' has unexpected shape");
        tensor->data = stored->data;
    }
    return model;
}

std::vector<std::vector<double>> ClassifierModel::snapshot() const {
    std::vector<std::vector<double>> snap;
    for (const auto& p : parameters()) snap.push_back(p->data);
    return snap;
}

void ClassifierModel::restore(const std::vector<std::vector<double>>& snapshot) {
    auto params = parameters();
    if (snapshot.size() != params.size())
        throw ArgumentError("classifier: snapshot size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) params[i]->data = snapshot[i];
}

double predict(const hwr::HwrModel& extractor, const ClassifierModel& head,
               const render::WordImage& image, const std::string& text) {
    const auto& alphabet = extractor.config().alphabet;
    auto features = extractor.features(image);
    auto onehot = render::one_hot_encode(text, alphabet, head.config().time_steps);
    return head.score(features, onehot);
}

namespace {

struct CachedSet {
    std::vector<nn::TensorPtr> features;
    std::vector<nn::TensorPtr> onehots;
    std::vector<double> labels;  // misspelled -> 1
};

CachedSet cache_inputs(const hwr::HwrModel& extractor, const ClassifierModel& head,
                       const data::Dataset& ds) {
    CachedSet cache;
    const auto& alphabet = extractor.config().alphabet;
    cache.features.reserve(ds.images.size());
    for (std::size_t i = 0; i < ds.images.size(); ++i) {
        auto feats = extractor.features(ds.images[i]);
        // Detach: training must never walk back into the extractor graph.
        cache.features.push_back(nn::Tensor::from(feats->shape, feats->data));
        cache.onehots.push_back(render::one_hot_encode(ds.manifest.examples[i].text, alphabet,
                                                       head.config().time_steps));
        cache.labels.push_back(ds.manifest.examples[i].misspelled ? 1.0 : 0.0);
    }
    return cache;
}

}  // namespace

ClassifierTrainResult train_classifier(ClassifierModel& model, const hwr::HwrModel& extractor,
                                       const data::Dataset& train, const data::Dataset& val,
                                       const nn::TrainSchedule& schedule,
                                       const ClassifierProgressFn& progress) {
    if (extractor.config().feature_dim() != model.config().feature_dim ||
        extractor.config().time_steps() != model.config().time_steps)
        throw ConfigError("train_classifier: extractor geometry does not match head config");
    if (train.manifest.examples.empty()) throw ArgumentError("train_classifier: empty training set");
    if (val.manifest.examples.empty()) throw ArgumentError("train_classifier: empty validation set");

    ClassifierTrainResult result;
    const double val_balance = val.manifest.incorrect_fraction();
    result.val_balance_warning = val_balance < 0.4 || val_balance > 0.6;

    model.warm_start_from(extractor);
    const auto train_cache = cache_inputs(extractor, model, train);
    const auto val_cache = cache_inputs(extractor, model, val);

    auto params = model.parameters();
    auto opt = nn::OptimizerState::init(params, schedule.lr_start);
    Rng shuffle_rng(derive_seed(schedule.seed, 0x636c7366));
    Rng dropout_rng(derive_seed(schedule.seed, 0x64726f70));

    double best_loss = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best_params;
    int stale_epochs = 0;

    std::vector<std::size_t> order(train_cache.features.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    for (int epoch = 0; epoch < schedule.epochs; ++epoch) {
        opt.learning_rate = nn::geometric_lr(schedule.lr_start, schedule.lr_end, epoch, schedule.epochs);
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
                auto aligned = model.align(train_cache.features[i], train_cache.onehots[i]);
                auto prob = model.head_forward(aligned, true, dropout_rng);
                auto loss = nn::bce_loss(prob, train_cache.labels[i]);
                if (!std::isfinite(loss->data[0]))
                    throw NumericError("train_classifier: non-finite loss at epoch " +
                                       std::to_string(epoch));
                loss_sum += loss->data[0];
                nn::backward(loss, inv_batch);
            }
            nn::rmsprop_step(params, opt);
            batch_start = batch_end;
        }

        double val_loss = 0.0;
        int val_correct = 0;
        for (std::size_t i = 0; i < val_cache.features.size(); ++i) {
            const double p = model.score(val_cache.features[i], val_cache.onehots[i]);
            const double y = val_cache.labels[i];
            const double pc = std::clamp(p, 1e-7, 1.0 - 1e-7);
            val_loss += -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
            val_correct += ((p >= 0.5) == (y >= 0.5)) ? 1 : 0;
        }
        val_loss /= static_cast<double>(val_cache.features.size());
        const double val_acc =
            static_cast<double>(val_correct) / static_cast<double>(val_cache.features.size());

        ClassifierEpochLog entry;
        entry.epoch = epoch;
        entry.learning_rate = opt.learning_rate;
        entry.train_loss = loss_sum / static_cast<double>(order.size());
        entry.val_loss = val_loss;
        entry.val_accuracy = val_acc;
        entry.improved = val_loss < best_loss;
        result.log.push_back(entry);
        if (progress) progress(entry);

        if (entry.improved) {
            best_loss = val_loss;
            best_params = model.snapshot();
            result.best_epoch = epoch;
            result.best_val_loss = val_loss;
            result.best_val_accuracy = val_acc;
            stale_epochs = 0;
        } else if (++stale_epochs >= schedule.patience) {
            break;
        }
    }

    if (!best_params.empty()) model.restore(best_params);
    return result;
}

}  // namespace inkcheck::classifier
