#include "dsoup/train.hpp"

#include <cmath>

#include "dsoup/errors.hpp"

namespace dsoup {

void TrainConfig::validate() const {
    if (steps < 1) throw ValidationError("train: steps must be >= 1");
    if (batch_size < 1) throw ValidationError("train: batch_size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw ValidationError("train: learning_rate must be finite and >= 0");
}

TrainResult finetune(const Checkpoint& init, const Shard& shard, const TrainConfig& cfg) {
    cfg.validate();
    if (shard.points.empty()) throw ValidationError("train: shard is empty");

    TrainResult res;
    res.checkpoint = init;
    Checkpoint& cp = res.checkpoint;
    Network net(cp.arch);
    auto ws = net.make_workspace();
    std::vector<double> grad(net.param_count());
    std::span<double> w(cp.weights);

    bool conditional = cp.arch.label_vocab > 0 && shard.labels.has_value();
    CounterRng rng(derive_stream(cfg.seed, stream_tag("train")));
    const std::size_t n = shard.points.size();
    const double inv_batch = 1.0 / cfg.batch_size;
    res.loss_history.reserve(cfg.steps);

    for (int step = 0; step < cfg.steps; ++step) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double loss = 0.0;
        for (int b = 0; b < cfg.batch_size; ++b) {
            std::size_t idx = rng.index(n);
            double t = kTimeFloor + (1.0 - kTimeFloor) * rng.uniform01();
            auto [e0, e1] = rng.normal_pair();
            auto [gamma, sigma] = cp.schedule.eval(t);
            const Vec2& x0 = shard.points[idx];
            Vec2 xt{gamma * x0.x + sigma * e0, gamma * x0.y + sigma * e1};
            std::optional<int> label;
            if (conditional) label = (*shard.labels)[idx];

            Vec2 eps_hat = net.forward(w, xt, t, label, ws);
            Vec2 r{eps_hat.x - e0, eps_hat.y - e1};
            loss += (r.x * r.x + r.y * r.y) * inv_batch;
            Vec2 cot{2.0 * inv_batch * r.x, 2.0 * inv_batch * r.y};
            net.backward(w, label, cot, grad, ws);
        }
        if (!std::isfinite(loss)) throw TrainingError("non-finite loss", step);
        res.loss_history.push_back(loss);
        for (std::size_t i = 0; i < w.size(); ++i) w[i] -= cfg.learning_rate * grad[i];
    }
    for (double v : cp.weights)
        if (!std::isfinite(v)) throw TrainingError("non-finite weights after update", cfg.steps - 1);

    cp.ancestor_hash = init.content_hash();
    cp.provenance = {{"kind", "finetune"},
                     {"init", cp.ancestor_hash},
                     {"shard", shard.id},
                     {"steps", cfg.steps},
                     {"batch_size", cfg.batch_size},
                     {"learning_rate", cfg.learning_rate},
                     {"seed", cfg.seed}};
    return res;
}

TrainResult train_from_scratch(const ArchDescriptor& arch, const NoiseSchedule& schedule,
                               const Shard& shard, const TrainConfig& cfg) {
    Checkpoint init = fresh_checkpoint(arch, schedule, cfg.seed);
    TrainResult res = finetune(init, shard, cfg);
    // A scratch-trained model is its own expansion point for later souping.
    res.checkpoint.ancestor_hash = res.checkpoint.content_hash();
    res.checkpoint.provenance["kind"] = "scratch";
    res.checkpoint.provenance.erase("init");
    return res;
}

}  // namespace dsoup
