#include "dsoup/sampler.hpp"

#include <cmath>
#include <mutex>
#include <thread>

#include "dsoup/errors.hpp"
#include "dsoup/rng.hpp"

namespace dsoup {

namespace {

// score may throw; chains propagate the first exception to the caller.
template <class ScoreLike>
Vec2 run_chain(ScoreLike& score, const NoiseSchedule& schedule, int steps, std::uint64_t seed,
               std::uint64_t chain) {
    CounterRng rng(derive_stream(seed, chain));
    auto [z0, z1] = rng.normal_pair();
    Vec2 x{z0, z1};
    const double dt = (1.0 - kTimeFloor) / steps;
    for (int j = 0; j < steps; ++j) {
        double t = 1.0 - j * dt;
        double beta = schedule.beta(t);
        Vec2 s = score(x, t);
        x.x += dt * (0.5 * beta * x.x + beta * s.x);
        x.y += dt * (0.5 * beta * x.y + beta * s.y);
        if (j + 1 < steps) {
            auto [n0, n1] = rng.normal_pair();
            double amp = std::sqrt(beta * dt);
            x.x += amp * n0;
            x.y += amp * n1;
        }
        if (!is_finite(x)) throw SamplingError("non-finite state", j);
    }
    return x;
}

template <class MakeScore>
std::vector<Vec2> run_all(const MakeScore& make_score, const NoiseSchedule& schedule, int n,
                          int steps, std::uint64_t seed, int threads) {
    if (steps < 1) throw ValidationError("sample: steps must be >= 1");
    if (n < 0) throw ValidationError("sample: n must be >= 0");
    if (threads < 1) threads = 1;
    std::vector<Vec2> out(static_cast<std::size_t>(n));
    if (n == 0) return out;

    threads = std::min<int>(threads, n);
    std::exception_ptr first_error;
    std::mutex err_mu;
    auto worker = [&](int tid) {
        auto score = make_score();
        try {
            for (int i = tid; i < n; i += threads)
                out[std::size_t(i)] = run_chain(score, schedule, steps, seed, std::uint64_t(i));
        } catch (...) {
            std::lock_guard lock(err_mu);
            if (!first_error) first_error = std::current_exception();
        }
    };
    if (threads == 1) {
        worker(0);
    } else {
        std::vector<std::thread> pool;
        for (int tid = 0; tid < threads; ++tid) pool.emplace_back(worker, tid);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);
    return out;
}

}  // namespace

std::vector<Vec2> sample_score(const ScoreFn& score, const NoiseSchedule& schedule, int n,
                               int steps, std::uint64_t seed, int threads) {
    return run_all([&] { return [&](const Vec2& x, double t) { return score(x, t); }; }, schedule,
                   n, steps, seed, threads);
}

std::vector<Vec2> sample_checkpoint(const Checkpoint& cp, std::optional<int> label, int n,
                                    int steps, std::uint64_t seed, int threads) {
    Network net(cp.arch);
    std::span<const double> w(cp.weights);
    auto make_score = [&] {
        // one workspace per thread
        return [&net, w, label, &cp, ws = net.make_workspace()](const Vec2& x, double t) mutable {
            Vec2 eps = net.forward(w, x, t, label, ws);
            double sigma = cp.schedule.eval(t).second;
            return score_from_eps(eps, sigma);
        };
    };
    return run_all(make_score, cp.schedule, n, steps, seed, threads);
}

std::vector<Vec2> sample_ensemble(const std::vector<Checkpoint>& cps,
                                  const std::vector<double>& coeffs, std::optional<int> label,
                                  int n, int steps, std::uint64_t seed, int threads) {
    if (cps.empty()) throw ValidationError("ensemble: need at least one checkpoint");
    if (cps.size() != coeffs.size())
        throw ValidationError("ensemble: checkpoint/coefficient count mismatch");
    const NoiseSchedule& schedule = cps.front().schedule;
    KahanSum total;
    for (double k : coeffs) {
        if (!(k > 0.0) || !std::isfinite(k))
            throw ValidationError("ensemble: coefficients must be positive and finite");
        total.add(k);
    }
    if (std::abs(total.value() - 1.0) > 1e-9)
        throw ValidationError("ensemble: coefficients must sum to 1 within 1e-9");
    std::vector<double> k(coeffs);
    for (double& v : k) v /= total.value();

    std::vector<Network> nets;
    nets.reserve(cps.size());
    for (const auto& cp : cps) {
        if (!(cp.schedule == schedule))
            throw ValidationError("ensemble: checkpoints have different noise schedules");
        nets.emplace_back(cp.arch);
    }
    auto make_score = [&] {
        std::vector<Network::Workspace> wss;
        for (const auto& net : nets) wss.push_back(net.make_workspace());
        return [&, wss = std::move(wss)](const Vec2& x, double t) mutable {
            Vec2 eps{0.0, 0.0};
            for (std::size_t i = 0; i < nets.size(); ++i) {
                Vec2 e = nets[i].forward(cps[i].weights, x, t, label, wss[i]);
                eps.x += k[i] * e.x;
                eps.y += k[i] * e.y;
            }
            return score_from_eps(eps, schedule.eval(t).second);
        };
    };
    return run_all(make_score, schedule, n, steps, seed, threads);
}

}  // namespace dsoup
