#include "dsoup/checkpoint.hpp"

#include "dsoup/errors.hpp"
#include "dsoup/sha256.hpp"

namespace dsoup {

std::string Checkpoint::content_hash() const {
    nlohmann::json id = {{"arch", arch.to_json()}, {"schedule", schedule.to_json()}};
    std::string head = id.dump();
    head += ':';
    Sha256 h;
    h.update(head.data(), head.size());
    unsigned char buf[8];
    for (double v : weights) {
        le_double_bytes(v, buf);
        h.update(buf, 8);
    }
    return h.hex_digest();
}

Checkpoint fresh_checkpoint(const ArchDescriptor& arch, const NoiseSchedule& schedule,
                            std::uint64_t seed) {
    Checkpoint cp;
    cp.arch = arch;
    cp.schedule = schedule;
    Network net(arch);
    cp.weights.resize(net.param_count());
    CounterRng rng(derive_stream(seed, stream_tag("init")));
    net.init_weights(cp.weights, rng);
    cp.ancestor_hash = cp.content_hash();
    cp.provenance = {{"kind", "fresh"}, {"seed", seed}};
    return cp;
}

Vec2 eps_forward(const Checkpoint& cp, const Vec2& x, double t, std::optional<int> label) {
    Network net(cp.arch);
    auto ws = net.make_workspace();
    return net.forward(cp.weights, x, t, label, ws);
}

Vec2 score_from_eps(const Vec2& eps, double sigma) {
    if (!(sigma > 0.0)) throw ValidationError("score undefined for sigma <= 0");
    return {-eps.x / sigma, -eps.y / sigma};
}

}  // namespace dsoup
