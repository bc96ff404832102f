#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dsoup/linalg.hpp"
#include "dsoup/rng.hpp"

namespace dsoup {

/// Shape of the noise-prediction MLP. Parameter layout is canonical:
/// label-embedding table (vocab x embed, row-major) first, then per layer the
/// weight matrix (row-major, out x in) followed by its bias.
struct ArchDescriptor {
    int input_dim = 2;
    std::vector<int> hidden = {128, 128};
    int time_embed_dim = 32;  // sinusoidal, even
    int label_vocab = 0;      // 0 = unconditional
    std::string activation = "silu";

    void validate() const;
    std::size_t param_count() const;

    bool operator==(const ArchDescriptor& o) const = default;

    nlohmann::json to_json() const;
    static ArchDescriptor from_json(const nlohmann::json& j);
};

/// Geometry + kernels for one architecture. Holds no weights; callers pass the
/// flat parameter vector on every call.
class Network {
public:
    explicit Network(const ArchDescriptor& arch);

    const ArchDescriptor& arch() const { return arch_; }
    std::size_t param_count() const { return param_count_; }

    /// Scratch buffers for one evaluation thread.
    struct Workspace {
        std::vector<double> input;              // 2 + embed
        std::vector<std::vector<double>> pre;   // per layer pre-activation
        std::vector<std::vector<double>> act;   // per layer activation
        std::vector<double> delta, delta_prev;  // backward buffers
    };
    Workspace make_workspace() const;

    Vec2 forward(std::span<const double> w, const Vec2& x, double t, std::optional<int> label,
                 Workspace& ws) const;

    /// Forward pass plus accumulation of d(cotangent . output)/dw into grad.
    Vec2 forward_backward(std::span<const double> w, const Vec2& x, double t,
                          std::optional<int> label, const Vec2& cotangent,
                          std::span<double> grad, Workspace& ws) const;

    /// Accumulate d(cotangent . output)/dw into grad, reusing the activations
    /// left in ws by an immediately preceding forward() with the same inputs.
    void backward(std::span<const double> w, std::optional<int> label, const Vec2& cotangent,
                  std::span<double> grad, Workspace& ws) const;

    /// Glorot-uniform weights per layer, zero biases and embeddings, drawn in
    /// canonical flattening order.
    void init_weights(std::span<double> w, CounterRng& rng) const;

private:
    void check_label(std::optional<int> label) const;
    void embed_time(double t, std::optional<int> label, std::span<const double> w,
                    std::span<double> out) const;

    ArchDescriptor arch_;
    std::vector<int> dims_;            // layer input sizes, then final output (=2)
    std::vector<std::size_t> w_off_;   // per layer weight offset
    std::vector<std::size_t> b_off_;   // per layer bias offset
    std::size_t embed_off_ = 0;        // label table offset (0)
    std::size_t param_count_ = 0;
};

}  // namespace dsoup
