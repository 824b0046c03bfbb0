#include "labelset/trainer.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "labelset/parallel.hpp"
#include "labelset/rng.hpp"

namespace labelset {

namespace {

struct Adam {
    std::vector<double> m;
    std::vector<double> v;
    double beta1_t = 1.0;
    double beta2_t = 1.0;

    explicit Adam(std::size_t params) : m(params, 0.0), v(params, 0.0) {}

    void update(std::vector<double>& params, const std::vector<double>& grad,
                const TrainConfig& cfg) {
        beta1_t *= cfg.adam_beta1;
        beta2_t *= cfg.adam_beta2;
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double g = grad[i];
            m[i] = cfg.adam_beta1 * m[i] + (1.0 - cfg.adam_beta1) * g;
            v[i] = cfg.adam_beta2 * v[i] + (1.0 - cfg.adam_beta2) * g * g;
            const double m_hat = m[i] / (1.0 - beta1_t);
            const double v_hat = v[i] / (1.0 - beta2_t);
            params[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.adam_eps);
        }
    }
};

bool all_finite(const std::vector<double>& values) {
    for (double v : values) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

}  // namespace

Model zero_model(std::uint32_t num_labels, std::uint32_t feature_channels) {
    return Model{num_labels, feature_channels,
                 std::vector<double>(std::size_t(num_labels) * feature_channels, 0.0),
                 std::vector<double>(num_labels, 0.0)};
}

void TrainConfig::validate() const {
    require(learning_rate >= 0.0, ErrorCode::ConfigInvalid, "learning_rate must be nonnegative");
    require(batch_size >= 1, ErrorCode::ConfigInvalid, "batch_size must be at least 1");
    require(max_epochs >= 1, ErrorCode::ConfigInvalid, "max_epochs must be at least 1");
    require(early_stop_patience >= 1, ErrorCode::ConfigInvalid, "patience must be at least 1");
    require(split_fraction > 0.0 && split_fraction < 1.0, ErrorCode::ConfigInvalid,
            "split_fraction must lie in (0, 1)");
    require(adam_beta1 >= 0.0 && adam_beta1 < 1.0 && adam_beta2 >= 0.0 && adam_beta2 < 1.0,
            ErrorCode::ConfigInvalid, "Adam betas must lie in [0, 1)");
    require(adam_eps > 0.0, ErrorCode::ConfigInvalid, "Adam epsilon must be positive");
}

ProbMap forward(const Model& model, const FeatureMap& features) {
    require(model.feature_channels == features.channels, ErrorCode::ShapeMismatch,
            "model and features disagree on channel count");
    const std::size_t n = features.dims.voxel_count();
    const std::uint32_t k = model.num_labels;
    const std::uint32_t f = model.feature_channels;
    std::vector<double> out(n * k);

    parallel_chunks(n, 2048, [&](std::size_t begin, std::size_t end) {
        double logits[kMaxLabels];
        for (std::size_t i = begin; i < end; ++i) {
            const double* x = features.values.data() + i * f;
            double top = -std::numeric_limits<double>::infinity();
            for (std::uint32_t c = 0; c < k; ++c) {
                double z = model.bias[c];
                const double* w = model.weights.data() + std::size_t(c) * f;
                for (std::uint32_t j = 0; j < f; ++j) z += w[j] * x[j];
                logits[c] = z;
                if (z > top) top = z;
            }
            double total = 0.0;
            for (std::uint32_t c = 0; c < k; ++c) {
                logits[c] = std::exp(logits[c] - top);
                total += logits[c];
            }
            for (std::uint32_t c = 0; c < k; ++c) out[i * k + c] = logits[c] / total;
        }
    });

    return ProbMap(features.dims, k, std::move(out));
}

ProbMap forward(const Model& model, const Phantom& phantom) {
    return forward(model, phantom.features);
}

ParamGrad model_gradient(const Model& model, const Phantom& phantom, const LossSpec& loss) {
    const std::uint32_t k = model.num_labels;
    const std::uint32_t f = model.feature_channels;

    const ProbMap p = forward(model, phantom.features);
    const LossResult r = evaluate(loss, p, phantom.partial);

    ParamGrad grad{std::vector<double>(std::size_t(k) * f, 0.0), std::vector<double>(k, 0.0),
                   r.value};
    // dL/dz_c = p_c (dL/dp_c - sum_c' dL/dp_c' p_c'), then dz folds into the
    // linear layer. Voxel-major accumulation keeps the reduction order fixed.
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double* gp = r.gradient.data() + i * k;
        const double* x = phantom.features.values.data() + i * f;
        double dot = 0.0;
        for (std::uint32_t c = 0; c < k; ++c) dot += gp[c] * p(i, c);
        for (std::uint32_t c = 0; c < k; ++c) {
            const double dz = p(i, c) * (gp[c] - dot);
            if (dz == 0.0) continue;
            double* w = grad.weights.data() + std::size_t(c) * f;
            for (std::uint32_t j = 0; j < f; ++j) w[j] += dz * x[j];
            grad.bias[c] += dz;
        }
    }
    return grad;
}

TrainResult train(const std::vector<Phantom>& volumes, const LossSpec& loss, const TrainConfig& cfg) {
    cfg.validate();
    loss.validate();
    require(volumes.size() >= 2, ErrorCode::TooFewVolumes,
            "need at least 2 volumes for a train/early-stop split");

    const std::uint32_t k = volumes[0].truth.num_labels();
    const std::uint32_t f = volumes[0].features.channels;
    for (const Phantom& v : volumes) {
        require(v.truth.num_labels() == k && v.features.channels == f, ErrorCode::ShapeMismatch,
                "volumes disagree on label or feature channel count");
    }

    Rng rng(cfg.seed);
    std::vector<std::size_t> order(volumes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    rng.shuffle(order);

    std::size_t n_train = static_cast<std::size_t>(
        std::floor(static_cast<double>(volumes.size()) * cfg.split_fraction));
    if (n_train < 1) n_train = 1;
    if (n_train > volumes.size() - 1) n_train = volumes.size() - 1;
    std::vector<std::size_t> train_set(order.begin(), order.begin() + n_train);
    const std::vector<std::size_t> val_set(order.begin() + n_train, order.end());

    const std::size_t param_count = std::size_t(k) * f + k;
    Model model = zero_model(k, f);
    Adam adam(param_count);

    auto val_loss_of = [&](const Model& m) {
        double total = 0.0;
        for (std::size_t vi : val_set) {
            total += evaluate(loss, forward(m, volumes[vi]), volumes[vi].partial).value;
        }
        return total / static_cast<double>(val_set.size());
    };

    TrainResult result;
    result.model = model;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    result.best_epoch = 0;
    result.val_indices = val_set;

    std::vector<double> flat_grad(param_count, 0.0);
    std::vector<double> flat_params(param_count, 0.0);
    std::size_t step = 0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        rng.shuffle(train_set);

        double epoch_loss = 0.0;
        for (std::size_t batch_begin = 0; batch_begin < train_set.size();
             batch_begin += cfg.batch_size) {
            const std::size_t batch_end =
                std::min(batch_begin + cfg.batch_size, train_set.size());
            const double batch_volumes = static_cast<double>(batch_end - batch_begin);

            std::fill(flat_grad.begin(), flat_grad.end(), 0.0);
            for (std::size_t bi = batch_begin; bi < batch_end; ++bi) {
                const ParamGrad g = model_gradient(model, volumes[train_set[bi]], loss);
                if (!std::isfinite(g.loss_value) || !all_finite(g.weights) ||
                    !all_finite(g.bias)) {
                    raise(ErrorCode::NonFiniteLoss,
                          "non-finite loss or gradient at step " + std::to_string(step));
                }
                epoch_loss += g.loss_value;
                for (std::size_t j = 0; j < g.weights.size(); ++j) flat_grad[j] += g.weights[j];
                for (std::uint32_t c = 0; c < k; ++c) flat_grad[g.weights.size() + c] += g.bias[c];
            }
            // Averaged across the batch so learning_rate is batch-size
            // independent.
            for (double& g : flat_grad) g /= batch_volumes;

            std::copy(model.weights.begin(), model.weights.end(), flat_params.begin());
            std::copy(model.bias.begin(), model.bias.end(),
                      flat_params.begin() + model.weights.size());
            adam.update(flat_params, flat_grad, cfg);
            std::copy(flat_params.begin(), flat_params.begin() + model.weights.size(),
                      model.weights.begin());
            std::copy(flat_params.begin() + model.weights.size(), flat_params.end(),
                      model.bias.begin());
            ++step;
        }

        const double train_loss = epoch_loss / static_cast<double>(train_set.size());
        const double val_loss = val_loss_of(model);
        result.log.push_back(EpochLog{epoch, train_loss, val_loss});

        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best_epoch = epoch;
            result.model = model;
        } else if (epoch - result.best_epoch >= cfg.early_stop_patience) {
            break;
        }
    }

    return result;
}

}  // namespace labelset
