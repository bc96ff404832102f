#include <iostream>

#include "dsoup/checkpoint_io.hpp"
#include "dsoup/cli.hpp"
#include "dsoup/errors.hpp"
#include "dsoup/evaluation.hpp"
#include "dsoup/oracles.hpp"
#include "dsoup/sampler.hpp"
#include "dsoup/sha256.hpp"
#include "dsoup/souping.hpp"
#include "dsoup/train.hpp"
#include "dsoup/version.hpp"

namespace dsoup::cli {

namespace {

[[noreturn]] void cfg_fail(const std::string& what) {
    throw ValidationError("experiment config: " + what);
}

Vec2 vec_from(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2) cfg_fail(what + " must be [x, y]");
    return {j.at(0).get<double>(), j.at(1).get<double>()};
}

Mat2 mat_from(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.size() != 2 || !j.at(0).is_array() || j.at(0).size() != 2 ||
        !j.at(1).is_array() || j.at(1).size() != 2)
        cfg_fail(what + " must be [[a,b],[c,d]]");
    return {j.at(0).at(0).get<double>(), j.at(0).at(1).get<double>(),
            j.at(1).at(0).get<double>(), j.at(1).at(1).get<double>()};
}

// accepts either the full {kind, components} shape or a bare gaussian
// {mean, cov} shorthand
AnalyticDistribution generator_from(const nlohmann::json& g, const std::string& what) {
    if (g.contains("components")) {
        std::vector<MixtureComponent> comps;
        for (const auto& c : g.at("components")) {
            MixtureComponent mc;
            mc.weight = c.value("weight", 1.0);
            mc.gaussian.mean = vec_from(c.at("mean"), what + " component mean");
            mc.gaussian.cov = mat_from(c.at("cov"), what + " component cov");
            comps.push_back(mc);
        }
        return AnalyticDistribution::mixture(comps);
    }
    if (!g.contains("mean") || !g.contains("cov"))
        cfg_fail(what + " needs mean/cov or components");
    return AnalyticDistribution::gaussian(vec_from(g.at("mean"), what + " mean"),
                                          mat_from(g.at("cov"), what + " cov"));
}

TrainConfig train_config_from(const nlohmann::json& j, std::uint64_t seed) {
    TrainConfig cfg;
    cfg.steps = j.value("steps", 2000);
    cfg.batch_size = j.value("batch", 128);
    cfg.learning_rate = j.value("lr", 1e-3);
    cfg.seed = seed;
    return cfg;
}

struct Stage {
    std::filesystem::path out_dir;
    std::uint64_t master;
    nlohmann::json* manifest;
    int threads;

    std::uint64_t seed(const std::string& tag) const {
        return derive_stream(master, stream_tag(tag));
    }
    std::filesystem::path path(const std::string& rel) const { return out_dir / rel; }
};

nlohmann::json record_shard(Stage& st, const Shard& shard, const std::string& rel) {
    auto p = st.path(rel);
    save_shard(shard, p);
    return {{"id", shard.id}, {"path", p.string()}, {"n", shard.size()},
            {"sha256", sha256_file(p)}};
}

nlohmann::json record_checkpoint(Stage& st, const Checkpoint& cp, const std::string& rel) {
    auto p = st.path(rel);
    std::string fh = save_checkpoint(cp, p);
    return {{"path", p.string()},
            {"file_hash", fh},
            {"content_hash", cp.content_hash()},
            {"ancestor_hash", cp.ancestor_hash}};
}

}  // namespace

nlohmann::json run_experiment(const nlohmann::json& config, const std::filesystem::path& out_dir,
                              int threads) {
    const std::string name = config.value("name", "experiment");
    if (!config.contains("master_seed")) cfg_fail("master_seed is required");
    const std::uint64_t master = config.at("master_seed").get<std::uint64_t>();

    std::error_code ec;
    std::filesystem::create_directories(out_dir / "shards", ec);
    std::filesystem::create_directories(out_dir / "checkpoints", ec);
    std::filesystem::create_directories(out_dir / "samples", ec);
    std::filesystem::create_directories(out_dir / "eval", ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

    nlohmann::json manifest{{"name", name},
                            {"build", build_id()},
                            {"master_seed", master},
                            {"out_dir", out_dir.string()},
                            {"config", config}};
    Stage st{out_dir, master, &manifest, threads};

    // ---- shards ----
    if (!config.contains("shard") || !config.at("shard").is_array() ||
        config.at("shard").empty())
        cfg_fail("at least one [[shard]] is required");
    std::vector<Shard> shards;
    manifest["shards"] = nlohmann::json::array();
    for (const auto& sj : config.at("shard")) {
        if (!sj.contains("id")) cfg_fail("shard without id");
        const std::string id = sj.at("id").get<std::string>();
        auto dist = generator_from(sj.at("generator"), "shard " + id + " generator");
        std::optional<int> label;
        if (sj.contains("label")) label = sj.at("label").get<int>();
        Shard shard =
            make_shard(dist, sj.value("n", 2048), st.seed("shard:" + id), label, id);
        manifest["shards"].push_back(record_shard(st, shard, "shards/" + id + ".csv"));
        shards.push_back(std::move(shard));
    }
    Shard train_union = union_shards(shards);
    train_union.id = "union";
    manifest["union"] = record_shard(st, train_union, "shards/union.csv");

    // ---- validation shard ----
    nlohmann::json vj = config.value("validation", nlohmann::json::object());
    std::size_t val_n = vj.value("n", 2048);
    AnalyticDistribution val_gen = train_union.generator;
    if (vj.contains("generator")) val_gen = generator_from(vj.at("generator"), "validation");
    Shard val = make_shard(val_gen, val_n, st.seed("val"), std::nullopt, "val");
    manifest["validation"] = record_shard(st, val, "shards/val.csv");

    // ---- architecture + schedule ----
    nlohmann::json aj = config.value("arch", nlohmann::json::object());
    ArchDescriptor arch;
    if (aj.contains("hidden")) arch.hidden = aj.at("hidden").get<std::vector<int>>();
    arch.time_embed_dim = aj.value("time_embed_dim", 32);
    arch.label_vocab = aj.value("label_vocab", 0);
    nlohmann::json scj = config.value("schedule", nlohmann::json::object());
    NoiseSchedule schedule(scj.value("beta_min", 0.1), scj.value("beta_max", 20.0));

    // ---- pretrain on the union ----
    manifest["checkpoints"] = nlohmann::json::object();
    nlohmann::json pj = config.value("pretrain", nlohmann::json::object());
    auto pre = train_from_scratch(arch, schedule, train_union,
                                  train_config_from(pj, st.seed("pretrain")));
    pre.checkpoint.provenance["run"] = {{"experiment", name}, {"stage", "pretrain"}};
    manifest["checkpoints"]["pretrain"] =
        record_checkpoint(st, pre.checkpoint, "checkpoints/pretrain.ck");
    manifest["checkpoints"]["pretrain"]["final_loss"] = pre.loss_history.back();

    // ---- finetune per shard ----
    nlohmann::json fj = config.value("finetune", nlohmann::json::object());
    std::vector<Checkpoint> tuned;
    for (const auto& shard : shards) {
        auto res = finetune(pre.checkpoint, shard,
                            train_config_from(fj, st.seed("finetune:" + shard.id)));
        res.checkpoint.provenance["run"] = {
            {"experiment", name}, {"stage", "finetune"}, {"shard", shard.id}};
        auto rec =
            record_checkpoint(st, res.checkpoint, "checkpoints/" + shard.id + ".ck");
        rec["final_loss"] = res.loss_history.back();
        manifest["checkpoints"]["finetune:" + shard.id] = rec;
        tuned.push_back(std::move(res.checkpoint));
    }

    // ---- soups ----
    nlohmann::json soj = config.value("soup", nlohmann::json::object());
    std::vector<std::string> variants =
        soj.value("variants", std::vector<std::string>{"uniform"});
    MetricConfig mc;
    mc.n = soj.value("metric_n", 2048);
    mc.steps = soj.value("metric_steps", 200);
    mc.seed = st.seed("metric");
    mc.threads = threads;
    std::vector<std::pair<std::string, Checkpoint>> soups;
    for (const auto& variant : variants) {
        std::string key = "soup_" + variant;
        std::replace(key.begin(), key.end(), '-', '_');
        nlohmann::json rec;
        if (variant == "uniform") {
            auto [cp, recipe] =
                soup(tuned, std::vector<double>(tuned.size(), 1.0 / double(tuned.size())));
            cp.provenance["run"] = {{"experiment", name}, {"stage", key}};
            rec = record_checkpoint(st, cp, "checkpoints/" + key + ".ck");
            rec["recipe"] = recipe.to_json();
            save_json(recipe.to_json(), st.path("checkpoints/" + key + ".recipe.json"));
            soups.emplace_back(key, std::move(cp));
        } else if (variant == "greedy" || variant == "reverse-greedy") {
            auto metric = negative_energy_metric(val, mc);
            GreedyResult res = variant == "greedy" ? greedy_soup(tuned, metric)
                                                   : reverse_greedy_soup(tuned, metric);
            res.checkpoint.provenance["run"] = {{"experiment", name}, {"stage", key}};
            rec = record_checkpoint(st, res.checkpoint, "checkpoints/" + key + ".ck");
            rec["recipe"] = res.recipe.to_json();
            rec["metric"] = res.metric;
            rec["trace"] = res.trace;
            save_json(res.recipe.to_json(), st.path("checkpoints/" + key + ".recipe.json"));
            save_json({{"trace", res.trace}, {"metric", res.metric}},
                      st.path("checkpoints/" + key + ".trace.json"));
            soups.emplace_back(key, std::move(res.checkpoint));
        } else {
            cfg_fail("unknown soup variant '" + variant + "'");
        }
        manifest["checkpoints"][key] = rec;
    }

    // ---- sampling ----
    nlohmann::json smj = config.value("sampling", nlohmann::json::object());
    const int sample_n = smj.value("n", 4096);
    const int sample_steps = smj.value("steps", 400);
    std::vector<std::pair<std::string, std::vector<Vec2>>> sampled;
    auto draw = [&](const std::string& key, const Checkpoint& cp) {
        auto pts = sample_checkpoint(cp, std::nullopt, sample_n, sample_steps,
                                     st.seed("sample:" + key), threads);
        auto p = st.path("samples/" + key + ".csv");
        save_points_csv(pts, p);
        manifest["samples"][key] = {{"path", p.string()},
                                    {"sha256", sha256_file(p)},
                                    {"n", sample_n},
                                    {"steps", sample_steps},
                                    {"checkpoint", cp.content_hash()}};
        sampled.emplace_back(key, std::move(pts));
    };
    manifest["samples"] = nlohmann::json::object();
    if (smj.value("include_pretrain", true)) draw("pretrain", pre.checkpoint);
    if (smj.value("include_finetunes", true))
        for (std::size_t i = 0; i < tuned.size(); ++i) draw(shards[i].id, tuned[i]);
    for (const auto& [key, cp] : soups) draw(key, cp);
    if (smj.value("ensemble", false)) {
        if (tuned.size() > 4) cfg_fail("ensemble sampling supports at most 4 checkpoints");
        auto pts = sample_ensemble(tuned, std::vector<double>(tuned.size(), 1.0 / double(tuned.size())),
                                   std::nullopt, sample_n, sample_steps,
                                   st.seed("sample:ensemble"), threads);
        auto p = st.path("samples/ensemble.csv");
        save_points_csv(pts, p);
        manifest["samples"]["ensemble"] = {
            {"path", p.string()}, {"sha256", sha256_file(p)}, {"n", sample_n},
            {"steps", sample_steps}};
        sampled.emplace_back("ensemble", std::move(pts));
    }

    // ---- evaluation ----
    nlohmann::json ej = config.value("eval", nlohmann::json::object());
    manifest["reports"] = nlohmann::json::object();
    auto put_report = [&](const std::string& key, EvalReport rep) {
        rep.config["experiment"] = name;
        auto p = st.path("eval/" + key + ".json");
        save_json(rep.to_json(), p);
        manifest["reports"][key] = {{"path", p.string()}, {"value", rep.value}};
    };

    std::optional<Gaussian> moments_target;
    if (ej.value("moments", false)) {
        const std::string target_kind = ej.value("moments_target", "geometric-mean");
        if (target_kind == "geometric-mean") {
            std::vector<Gaussian> gs;
            for (const auto& s : shards) {
                if (s.generator.kind() != AnalyticDistribution::Kind::Gaussian)
                    cfg_fail("moments_target geometric-mean needs gaussian shard generators");
                gs.push_back(s.generator.components().front().gaussian);
            }
            moments_target = geometric_mean_gaussians(gs);
        } else if (target_kind == "union") {
            moments_target = Gaussian{train_union.generator.mean(),
                                      train_union.generator.covariance()};
        } else {
            cfg_fail("unknown moments_target '" + target_kind + "'");
        }
        manifest["moments_target"] = {
            {"mean", {moments_target->mean.x, moments_target->mean.y}},
            {"cov",
             {{moments_target->cov.a, moments_target->cov.b},
              {moments_target->cov.c, moments_target->cov.d}}}};
    }

    std::vector<Vec2> centers;
    if (ej.contains("mode_centers"))
        for (const auto& c : ej.at("mode_centers"))
            centers.push_back(vec_from(c, "mode_centers entry"));

    for (const auto& [key, pts] : sampled) {
        if (ej.value("energy", true)) {
            EvalReport rep;
            rep.metric = "energy_distance";
            rep.seed = st.seed("energy");
            rep.value = energy_distance(pts, val.points, rep.seed);
            rep.config = {{"against", "val"}, {"samples", key}};
            put_report(key + "_energy", std::move(rep));
        }
        bool soupish = key.rfind("soup", 0) == 0 || key == "ensemble";
        if (moments_target && soupish) {
            auto err = moments_error(pts, *moments_target);
            EvalReport rep;
            rep.metric = "moments_error";
            rep.value = std::max({err.mean_err.x, err.mean_err.y, err.cov_err});
            rep.config = {{"mean_err", {err.mean_err.x, err.mean_err.y}},
                          {"cov_err", err.cov_err},
                          {"samples", key}};
            put_report(key + "_moments", std::move(rep));
        }
        if (ej.value("nn", false)) {
            auto nn = nn_distance_distribution(pts, train_union.points);
            EvalReport rep;
            rep.metric = "nn_distance";
            rep.value = nn.median;
            rep.config = {{"median", nn.median}, {"p05", nn.p05}, {"samples", key}};
            put_report(key + "_nn", std::move(rep));
        }
        if (centers.size() >= 2) {
            auto fr = mode_fractions(pts, centers);
            EvalReport rep;
            rep.metric = "mode_fractions";
            rep.value = fr[0];
            rep.config = {{"fractions", fr}, {"samples", key}};
            put_report(key + "_modes", std::move(rep));
        }
    }

    const int lin_probes = ej.value("lincheck_probes", 0);
    if (lin_probes > 0 && tuned.size() >= 2) {
        EvalReport rep;
        rep.metric = "linearization_gap";
        rep.seed = st.seed("probes");
        rep.value =
            linearization_gap(tuned, std::vector<double>(tuned.size(), 1.0 / double(tuned.size())),
                              make_probe_set(lin_probes, rep.seed));
        rep.config = {{"probes", lin_probes}};
        for (const auto& cp : tuned) rep.input_hashes.push_back(cp.content_hash());
        put_report("lincheck", std::move(rep));
    }

    save_json(manifest, out_dir / "manifest.json");
    return manifest;
}

}  // namespace dsoup::cli
