#pragma once

#include <cstdint>
#include <vector>

#include "dsoup/checkpoint.hpp"
#include "dsoup/shard.hpp"

namespace dsoup {

struct TrainConfig {
    int steps = 2000;
    int batch_size = 128;
    double learning_rate = 1e-3;
    std::uint64_t seed = 0;

    void validate() const;
};

struct TrainResult {
    Checkpoint checkpoint;
    std::vector<double> loss_history;  // batch loss before each update
};

/// Plain SGD on the denoising objective: draw x0 from the shard, t uniform on
/// [time floor, 1], eps ~ N(0,I); minimize mean ||eps_hat(gamma x0 + sigma
/// eps, t) - eps||^2 over the batch. Single-threaded and bit-deterministic.
/// Labels are used only when both the shard and the architecture carry them.
TrainResult finetune(const Checkpoint& init, const Shard& shard, const TrainConfig& cfg);

/// fresh init + finetune; the result is marked as its own ancestor.
TrainResult train_from_scratch(const ArchDescriptor& arch, const NoiseSchedule& schedule,
                               const Shard& shard, const TrainConfig& cfg);

}  // namespace dsoup
