#include "dsoup/network.hpp"

#include <cmath>
#include <nlohmann/json.hpp>

#include "dsoup/errors.hpp"

namespace dsoup {

void ArchDescriptor::validate() const {
    if (input_dim != 2)
        throw ValidationError("arch: input_dim must be 2, got " + std::to_string(input_dim));
    if (hidden.empty()) throw ValidationError("arch: at least one hidden layer required");
    for (int h : hidden)
        if (h < 1) throw ValidationError("arch: hidden width must be >= 1");
    if (time_embed_dim < 2 || time_embed_dim % 2 != 0)
        throw ValidationError("arch: time_embed_dim must be even and >= 2");
    if (label_vocab < 0) throw ValidationError("arch: label_vocab must be >= 0");
    if (activation != "silu")
        throw ValidationError("arch: unsupported activation '" + activation + "'");
}

std::size_t ArchDescriptor::param_count() const {
    validate();
    std::size_t n = std::size_t(label_vocab) * time_embed_dim;
    int in = input_dim + time_embed_dim;
    for (int h : hidden) {
        n += std::size_t(h) * in + h;
        in = h;
    }
    n += std::size_t(2) * in + 2;
    return n;
}

nlohmann::json ArchDescriptor::to_json() const {
    return {{"activation", activation},
            {"hidden", hidden},
            {"input_dim", input_dim},
            {"label_vocab", label_vocab},
            {"time_embed_dim", time_embed_dim}};
}

ArchDescriptor ArchDescriptor::from_json(const nlohmann::json& j) {
    ArchDescriptor a;
    try {
        a.input_dim = j.at("input_dim").get<int>();
        a.hidden = j.at("hidden").get<std::vector<int>>();
        a.time_embed_dim = j.at("time_embed_dim").get<int>();
        a.label_vocab = j.at("label_vocab").get<int>();
        a.activation = j.at("activation").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("arch json: ") + e.what());
    }
    a.validate();
    return a;
}

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double silu(double x) { return x * sigmoid(x); }
inline double silu_prime(double x) {
    double s = sigmoid(x);
    return s * (1.0 + x * (1.0 - s));
}

}  // namespace

Network::Network(const ArchDescriptor& arch) : arch_(arch) {
    arch_.validate();
    embed_off_ = 0;
    std::size_t off = std::size_t(arch_.label_vocab) * arch_.time_embed_dim;
    dims_.push_back(arch_.input_dim + arch_.time_embed_dim);
    for (int h : arch_.hidden) dims_.push_back(h);
    dims_.push_back(2);
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        w_off_.push_back(off);
        off += std::size_t(dims_[l + 1]) * dims_[l];
        b_off_.push_back(off);
        off += dims_[l + 1];
    }
    param_count_ = off;
}

Network::Workspace Network::make_workspace() const {
    Workspace ws;
    ws.input.resize(dims_[0]);
    std::size_t layers = dims_.size() - 1;
    ws.pre.resize(layers);
    ws.act.resize(layers);
    int widest = 0;
    for (std::size_t l = 0; l < layers; ++l) {
        ws.pre[l].resize(dims_[l + 1]);
        ws.act[l].resize(dims_[l + 1]);
        widest = std::max(widest, dims_[l + 1]);
    }
    widest = std::max(widest, dims_[0]);
    ws.delta.resize(widest);
    ws.delta_prev.resize(widest);
    return ws;
}

void Network::check_label(std::optional<int> label) const {
    if (label && (*label < 0 || *label >= arch_.label_vocab))
        throw ValidationError("label " + std::to_string(*label) + " outside vocab of " +
                              std::to_string(arch_.label_vocab));
}

void Network::embed_time(double t, std::optional<int> label, std::span<const double> w,
                         std::span<double> out) const {
    int half = arch_.time_embed_dim / 2;
    double s = 1000.0 * t;
    for (int k = 0; k < half; ++k) {
        double omega = half > 1 ? std::pow(10000.0, -double(k) / double(half - 1)) : 1.0;
        out[k] = std::sin(s * omega);
        out[half + k] = std::cos(s * omega);
    }
    if (label) {
        const double* row = w.data() + embed_off_ + std::size_t(*label) * arch_.time_embed_dim;
        for (int k = 0; k < arch_.time_embed_dim; ++k) out[k] += row[k];
    }
}

Vec2 Network::forward(std::span<const double> w, const Vec2& x, double t, std::optional<int> label,
                      Workspace& ws) const {
    if (w.size() != param_count_)
        throw ValidationError("weight vector size " + std::to_string(w.size()) + " != " +
                              std::to_string(param_count_));
    check_label(label);
    ws.input[0] = x.x;
    ws.input[1] = x.y;
    embed_time(t, label, w, std::span<double>(ws.input).subspan(2));

    std::size_t layers = dims_.size() - 1;
    const double* in = ws.input.data();
    for (std::size_t l = 0; l < layers; ++l) {
        int n_in = dims_[l], n_out = dims_[l + 1];
        const double* W = w.data() + w_off_[l];
        const double* b = w.data() + b_off_[l];
        bool last = (l + 1 == layers);
        for (int o = 0; o < n_out; ++o) {
            double z = b[o];
            const double* row = W + std::size_t(o) * n_in;
            for (int i = 0; i < n_in; ++i) z += row[i] * in[i];
            ws.pre[l][o] = z;
            ws.act[l][o] = last ? z : silu(z);
        }
        in = ws.act[l].data();
    }
    return {ws.act[layers - 1][0], ws.act[layers - 1][1]};
}

Vec2 Network::forward_backward(std::span<const double> w, const Vec2& x, double t,
                               std::optional<int> label, const Vec2& cotangent,
                               std::span<double> grad, Workspace& ws) const {
    Vec2 out = forward(w, x, t, label, ws);
    backward(w, label, cotangent, grad, ws);
    return out;
}

void Network::backward(std::span<const double> w, std::optional<int> label, const Vec2& cotangent,
                       std::span<double> grad, Workspace& ws) const {
    if (grad.size() != param_count_)
        throw ValidationError("grad vector size " + std::to_string(grad.size()) + " != " +
                              std::to_string(param_count_));

    std::size_t layers = dims_.size() - 1;
    ws.delta[0] = cotangent.x;
    ws.delta[1] = cotangent.y;
    for (std::size_t l = layers; l-- > 0;) {
        int n_in = dims_[l], n_out = dims_[l + 1];
        const double* a_prev = l == 0 ? ws.input.data() : ws.act[l - 1].data();
        const double* W = w.data() + w_off_[l];
        double* gW = grad.data() + w_off_[l];
        double* gb = grad.data() + b_off_[l];
        for (int i = 0; i < n_in; ++i) ws.delta_prev[i] = 0.0;
        for (int o = 0; o < n_out; ++o) {
            double d = ws.delta[o];
            gb[o] += d;
            const double* row = W + std::size_t(o) * n_in;
            double* grow = gW + std::size_t(o) * n_in;
            for (int i = 0; i < n_in; ++i) {
                grow[i] += d * a_prev[i];
                ws.delta_prev[i] += d * row[i];
            }
        }
        if (l > 0) {
            for (int i = 0; i < n_in; ++i)
                ws.delta[i] = ws.delta_prev[i] * silu_prime(ws.pre[l - 1][i]);
        } else if (label) {
            double* grow = grad.data() + embed_off_ + std::size_t(*label) * arch_.time_embed_dim;
            for (int k = 0; k < arch_.time_embed_dim; ++k) grow[k] += ws.delta_prev[2 + k];
        }
    }
}

void Network::init_weights(std::span<double> w, CounterRng& rng) const {
    if (w.size() != param_count_)
        throw ValidationError("weight vector size " + std::to_string(w.size()) + " != " +
                              std::to_string(param_count_));
    for (std::size_t i = 0; i < std::size_t(arch_.label_vocab) * arch_.time_embed_dim; ++i)
        w[embed_off_ + i] = 0.0;
    for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
        int n_in = dims_[l], n_out = dims_[l + 1];
        double a = std::sqrt(6.0 / double(n_in + n_out));
        double* W = w.data() + w_off_[l];
        for (std::size_t i = 0; i < std::size_t(n_out) * n_in; ++i)
            W[i] = a * (2.0 * rng.uniform01() - 1.0);
        double* b = w.data() + b_off_[l];
        for (int o = 0; o < n_out; ++o) b[o] = 0.0;
    }
}

}  // namespace dsoup
