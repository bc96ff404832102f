#include "dsoup/souping.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>
#include <unordered_set>

#include "dsoup/errors.hpp"
#include "dsoup/evaluation.hpp"
#include "dsoup/sampler.hpp"

namespace dsoup {

void SoupRecipe::validate() const {
    if (entries.empty()) throw ValidationError("recipe: no entries");
    if (ancestor.empty()) throw ValidationError("recipe: missing ancestor hash");
    std::unordered_set<std::string> seen;
    KahanSum total;
    for (const auto& e : entries) {
        if (!(e.k > 0.0) || !std::isfinite(e.k))
            throw ValidationError("recipe: coefficient must be positive and finite");
        if (!seen.insert(e.hash).second)
            throw ValidationError("recipe: duplicate entry hash " + e.hash);
        total.add(e.k);
    }
    if (std::abs(total.value() - 1.0) > 1e-12)
        throw ValidationError("recipe: coefficients sum to " + std::to_string(total.value()) +
                              ", expected 1");
}

nlohmann::json SoupRecipe::to_json() const {
    nlohmann::json ents = nlohmann::json::array();
    for (const auto& e : entries) ents.push_back({{"hash", e.hash}, {"k", e.k}});
    return {{"ancestor", ancestor}, {"entries", ents}};
}

SoupRecipe SoupRecipe::from_json(const nlohmann::json& j) {
    SoupRecipe r;
    try {
        r.ancestor = j.at("ancestor").get<std::string>();
        for (const auto& e : j.at("entries")) {
            r.entries.push_back({e.at("hash").get<std::string>(), e.at("k").get<double>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError(std::string("recipe json: ") + e.what());
    }
    r.validate();
    return r;
}

std::pair<Checkpoint, SoupRecipe> soup(const std::vector<Checkpoint>& checkpoints,
                                       const std::vector<double>& coeffs) {
    if (checkpoints.empty()) throw ValidationError("soup: need at least one checkpoint");
    if (checkpoints.size() != coeffs.size())
        throw ValidationError("soup: " + std::to_string(checkpoints.size()) + " checkpoints vs " +
                              std::to_string(coeffs.size()) + " coefficients");
    const Checkpoint& first = checkpoints.front();
    for (const auto& cp : checkpoints) {
        if (!(cp.arch == first.arch))
            throw ArchMismatchError("soup: checkpoints have different architectures");
        if (!(cp.schedule == first.schedule))
            throw ValidationError("soup: checkpoints have different noise schedules");
        if (cp.ancestor_hash != first.ancestor_hash)
            throw AncestorMismatchError("soup: checkpoints descend from different ancestors");
    }
    KahanSum total;
    for (double k : coeffs) {
        if (!(k > 0.0) || !std::isfinite(k))
            throw ValidationError("soup: coefficients must be positive and finite");
        total.add(k);
    }
    if (std::abs(total.value() - 1.0) > 1e-9)
        throw ValidationError("soup: coefficients sum to " + std::to_string(total.value()) +
                              ", expected 1 within 1e-9");

    // coalesce repeated checkpoints so soup([w, w]) reproduces w exactly
    std::vector<std::string> hashes(checkpoints.size());
    for (std::size_t i = 0; i < checkpoints.size(); ++i) hashes[i] = checkpoints[i].content_hash();
    std::unordered_map<std::string, std::size_t> pos;
    std::vector<std::size_t> rep;      // index of first occurrence per distinct hash
    std::vector<double> k_merged;
    for (std::size_t i = 0; i < checkpoints.size(); ++i) {
        auto [it, fresh] = pos.try_emplace(hashes[i], rep.size());
        if (fresh) {
            rep.push_back(i);
            k_merged.push_back(coeffs[i]);
        } else {
            k_merged[it->second] += coeffs[i];
        }
    }
    for (double& k : k_merged) k /= total.value();

    Checkpoint out;
    out.arch = first.arch;
    out.schedule = first.schedule;
    out.ancestor_hash = first.ancestor_hash;
    const std::size_t n_params = first.weights.size();
    out.weights.resize(n_params);
    for (std::size_t j = 0; j < n_params; ++j) {
        KahanSum s;
        for (std::size_t m = 0; m < rep.size(); ++m)
            s.add(k_merged[m] * checkpoints[rep[m]].weights[j]);
        out.weights[j] = s.value();
    }

    SoupRecipe recipe;
    recipe.ancestor = first.ancestor_hash;
    for (std::size_t m = 0; m < rep.size(); ++m)
        recipe.entries.push_back({hashes[rep[m]], k_merged[m]});
    recipe.validate();
    out.provenance = {{"kind", "soup"}, {"recipe", recipe.to_json()}};
    return {std::move(out), std::move(recipe)};
}

std::pair<Checkpoint, SoupRecipe> unlearn(const Checkpoint& souped, const SoupRecipe& recipe,
                                          const std::string& remove_hash,
                                          const Checkpoint& removed) {
    recipe.validate();
    auto it = std::find_if(recipe.entries.begin(), recipe.entries.end(),
                           [&](const SoupEntry& e) { return e.hash == remove_hash; });
    if (it == recipe.entries.end())
        throw NotFoundError("unlearn: hash " + remove_hash + " not in recipe");
    if (recipe.entries.size() < 2)
        throw ValidationError("unlearn: cannot remove the sole recipe entry");
    if (removed.content_hash() != remove_hash)
        throw ValidationError("unlearn: provided checkpoint does not match the hash to remove");
    if (!(removed.arch == souped.arch))
        throw ArchMismatchError("unlearn: architecture mismatch with soup");
    if (removed.weights.size() != souped.weights.size())
        throw ValidationError("unlearn: weight count mismatch");

    const double ki = it->k;
    const double denom = 1.0 - ki;
    if (!(denom > 0.0)) throw ValidationError("unlearn: coefficient to remove must be < 1");

    Checkpoint out;
    out.arch = souped.arch;
    out.schedule = souped.schedule;
    out.ancestor_hash = souped.ancestor_hash;
    out.weights.resize(souped.weights.size());
    for (std::size_t j = 0; j < out.weights.size(); ++j)
        out.weights[j] = (souped.weights[j] - ki * removed.weights[j]) / denom;

    SoupRecipe rest;
    rest.ancestor = recipe.ancestor;
    for (const auto& e : recipe.entries)
        if (e.hash != remove_hash) rest.entries.push_back({e.hash, e.k / denom});
    rest.validate();
    out.provenance = {{"kind", "unlearn"}, {"removed", remove_hash}, {"recipe", rest.to_json()}};
    return {std::move(out), std::move(rest)};
}

MetricFn negative_energy_metric(const Shard& val, const MetricConfig& cfg) {
    if (cfg.n < 1) throw ValidationError("metric: n must be >= 1");
    if (cfg.steps < 1) throw ValidationError("metric: steps must be >= 1");
    if (val.points.empty()) throw ValidationError("metric: validation shard is empty");
    return [points = val.points, cfg](const Checkpoint& cp) {
        auto samples = sample_checkpoint(cp, cfg.label, cfg.n, cfg.steps, cfg.seed, cfg.threads);
        return -energy_distance(samples, points, derive_stream(cfg.seed, stream_tag("energy")));
    };
}

namespace {

std::pair<Checkpoint, SoupRecipe> uniform_soup(const std::vector<Checkpoint>& cps,
                                               const std::vector<std::size_t>& subset) {
    std::vector<Checkpoint> members;
    members.reserve(subset.size());
    for (std::size_t i : subset) members.push_back(cps[i]);
    std::vector<double> k(subset.size(), 1.0 / double(subset.size()));
    return soup(members, k);
}

}  // namespace

GreedyResult greedy_soup(const std::vector<Checkpoint>& checkpoints, const MetricFn& metric) {
    if (checkpoints.empty()) throw ValidationError("greedy soup: no checkpoints");
    const std::size_t n = checkpoints.size();
    std::vector<std::string> hashes(n);
    std::vector<double> individual(n);
    for (std::size_t i = 0; i < n; ++i) {
        hashes[i] = checkpoints[i].content_hash();
        individual[i] = metric(checkpoints[i]);
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (individual[a] != individual[b]) return individual[a] > individual[b];
        return hashes[a] < hashes[b];
    });

    GreedyResult res;
    res.trace = nlohmann::json::array();
    std::vector<std::size_t> kept{order[0]};
    auto current = uniform_soup(checkpoints, kept);
    res.metric = individual[order[0]];
    res.trace.push_back({{"hash", hashes[order[0]]},
                         {"individual", individual[order[0]]},
                         {"decision", "seed"}});

    for (std::size_t r = 1; r < n; ++r) {
        std::size_t cand = order[r];
        std::vector<std::size_t> trial_set = kept;
        trial_set.push_back(cand);
        auto trial = uniform_soup(checkpoints, trial_set);
        double tm = metric(trial.first);
        bool keep = tm > res.metric;
        res.trace.push_back({{"hash", hashes[cand]},
                             {"individual", individual[cand]},
                             {"soup_metric", tm},
                             {"decision", keep ? "kept" : "rejected"}});
        if (keep) {
            kept = std::move(trial_set);
            current = std::move(trial);
            res.metric = tm;
        }
    }
    res.checkpoint = std::move(current.first);
    res.recipe = std::move(current.second);
    return res;
}

GreedyResult reverse_greedy_soup(const std::vector<Checkpoint>& checkpoints,
                                 const MetricFn& metric) {
    if (checkpoints.empty()) throw ValidationError("reverse greedy soup: no checkpoints");

    // distinct checkpoints only — duplicates coalesce in the soup anyway
    std::vector<std::size_t> distinct;
    std::vector<std::string> hashes;
    {
        std::unordered_set<std::string> seen;
        for (std::size_t i = 0; i < checkpoints.size(); ++i) {
            std::string h = checkpoints[i].content_hash();
            if (seen.insert(h).second) {
                distinct.push_back(i);
                hashes.push_back(std::move(h));
            }
        }
    }
    const std::size_t n = distinct.size();
    std::vector<double> individual(n);
    for (std::size_t m = 0; m < n; ++m) individual[m] = metric(checkpoints[distinct[m]]);

    GreedyResult res;
    res.trace = nlohmann::json::array();
    std::vector<std::size_t> kept(n);
    for (std::size_t m = 0; m < n; ++m) kept[m] = m;
    auto current = uniform_soup(checkpoints, distinct);
    res.metric = metric(current.first);

    std::vector<std::size_t> order(n);
    for (std::size_t m = 0; m < n; ++m) order[m] = m;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (individual[a] != individual[b]) return individual[a] < individual[b];
        return hashes[a] < hashes[b];
    });

    for (std::size_t m : order) {
        if (kept.size() < 2) break;
        std::vector<std::size_t> trial_set;
        for (std::size_t x : kept)
            if (x != m) trial_set.push_back(distinct[x]);
        auto trial = uniform_soup(checkpoints, trial_set);
        double tm = metric(trial.first);
        bool remove = tm > res.metric;
        res.trace.push_back({{"hash", hashes[m]},
                             {"individual", individual[m]},
                             {"soup_metric", tm},
                             {"decision", remove ? "removed" : "retained"}});
        if (remove) {
            kept.erase(std::remove(kept.begin(), kept.end(), m), kept.end());
            current = std::move(trial);
            res.metric = tm;
        }
    }
    res.checkpoint = std::move(current.first);
    res.recipe = std::move(current.second);
    return res;
}

}  // namespace dsoup
