#include "dsoup/cli.hpp"

#include <charconv>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsoup/checkpoint_io.hpp"
#include "dsoup/errors.hpp"
#include "dsoup/evaluation.hpp"
#include "dsoup/oracles.hpp"
#include "dsoup/sampler.hpp"
#include "dsoup/souping.hpp"
#include "dsoup/train.hpp"
#include "dsoup/version.hpp"
#include "toml_lite.hpp"

namespace dsoup::cli {

namespace {

std::string join_argv(int argc, const char* const* argv) {
    std::string s;
    for (int i = 0; i < argc; ++i) {
        if (i) s += ' ';
        s += argv[i];
    }
    return s;
}

std::vector<int> parse_int_list(const std::string& csv) {
    std::vector<int> out;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        int v = 0;
        auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size())
            throw ValidationError("bad integer list: '" + csv + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError("empty integer list");
    return out;
}

Vec2 parse_point(const std::string& s) {
    auto c = s.find(',');
    if (c == std::string::npos) throw ValidationError("expected 'x,y', got '" + s + "'");
    Vec2 p;
    auto parse = [&](std::string_view sv, double& out) {
        auto [q, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), out);
        if (ec != std::errc() || q != sv.data() + sv.size())
            throw ValidationError("bad coordinate in '" + s + "'");
    };
    parse(std::string_view(s).substr(0, c), p.x);
    parse(std::string_view(s).substr(c + 1), p.y);
    return p;
}

AnalyticDistribution load_generator(const std::filesystem::path& path) {
    return AnalyticDistribution::from_json(load_json(path));
}

Gaussian require_gaussian(const AnalyticDistribution& d, const std::string& what) {
    if (d.kind() != AnalyticDistribution::Kind::Gaussian)
        throw ValidationError(what + " must be a single gaussian");
    return d.components().front().gaussian;
}

std::vector<double> uniform_or_given(std::size_t n, std::vector<double> ks,
                                     const std::string& what) {
    if (ks.empty()) return std::vector<double>(n, 1.0 / double(n));
    if (ks.size() != n)
        throw ValidationError(what + ": got " + std::to_string(ks.size()) + " coefficients for " +
                              std::to_string(n) + " checkpoints");
    return ks;
}

void emit(const nlohmann::json& j, const std::string& out_path) {
    if (!out_path.empty()) save_json(j, out_path);
    std::cout << j.dump(2) << "\n";
}

struct TrainFlags {
    int steps = 2000;
    int batch = 128;
    double lr = 1e-3;
    std::uint64_t seed = 0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--steps", steps, "SGD steps");
        cmd->add_option("--batch", batch, "batch size");
        cmd->add_option("--lr", lr, "learning rate");
        cmd->add_option("--seed", seed, "RNG seed");
    }
    TrainConfig config() const { return {steps, batch, lr, seed}; }
};

nlohmann::json checkpoint_summary(const Checkpoint& cp, const std::string& path,
                                  const std::string& file_hash) {
    return {{"checkpoint", path},
            {"file_hash", file_hash},
            {"content_hash", cp.content_hash()},
            {"ancestor_hash", cp.ancestor_hash},
            {"weights", cp.weights.size()},
            {"build", build_id()}};
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"a lab for souping diffusion models: train on shards, average weights, sample"};
    app.require_subcommand(1);
    app.set_version_flag("--version", build_id());
    const std::string command_echo = join_argv(argc, argv);

    // ---- gen-data ----
    struct {
        std::string spec, id = "shard", out;
        std::uint64_t seed = 0;
        std::size_t n = 0;
        int label = -1;
        double split = 0.0;
    } gen;
    {
        auto* cmd = app.add_subcommand("gen-data", "draw a shard from a generator spec");
        cmd->add_option("--spec", gen.spec, "generator JSON file")->required();
        cmd->add_option("--n", gen.n, "number of points")->required();
        cmd->add_option("--seed", gen.seed, "RNG seed");
        cmd->add_option("--id", gen.id, "shard id");
        cmd->add_option("--label", gen.label, "attach this label to every point");
        cmd->add_option("--split", gen.split, "also split off this fraction into <stem>_a/_b");
        cmd->add_option("--out", gen.out, "output CSV path")->required();
        cmd->callback([&] {
            auto dist = load_generator(gen.spec);
            std::optional<int> label;
            if (gen.label >= 0) label = gen.label;
            Shard shard = make_shard(dist, gen.n, gen.seed, label, gen.id);
            nlohmann::json res{{"build", build_id()}};
            if (gen.split > 0.0) {
                auto [a, b] = split_shard(shard, gen.split, derive_stream(gen.seed, stream_tag("split")));
                std::filesystem::path base(gen.out);
                auto stem = base.parent_path() / base.stem();
                auto pa = stem.string() + "_a.csv", pb = stem.string() + "_b.csv";
                save_shard(a, pa, command_echo);
                save_shard(b, pb, command_echo);
                res["shards"] = {{{"path", pa}, {"id", a.id}, {"n", a.size()}},
                                 {{"path", pb}, {"id", b.id}, {"n", b.size()}}};
            } else {
                save_shard(shard, gen.out, command_echo);
                res["shards"] = {{{"path", gen.out}, {"id", shard.id}, {"n", shard.size()}}};
            }
            std::cout << res.dump(2) << "\n";
        });
    }

    // ---- pretrain ----
    struct {
        std::string data, out, hidden = "128,128";
        TrainFlags tf;
        int time_embed = 32, vocab = 0;
        double beta_min = 0.1, beta_max = 20.0;
    } pre;
    {
        auto* cmd = app.add_subcommand("pretrain", "train a fresh model on a shard");
        cmd->add_option("--data", pre.data, "training shard CSV")->required();
        cmd->add_option("--out", pre.out, "output checkpoint path")->required();
        pre.tf.attach(cmd);
        cmd->add_option("--hidden", pre.hidden, "hidden widths, e.g. 128,128");
        cmd->add_option("--time-embed", pre.time_embed, "time embedding size");
        cmd->add_option("--vocab", pre.vocab, "label vocabulary (0 = unconditional)");
        cmd->add_option("--beta-min", pre.beta_min, "schedule beta at t=0");
        cmd->add_option("--beta-max", pre.beta_max, "schedule beta at t=1");
        cmd->callback([&] {
            Shard shard = load_shard(pre.data);
            ArchDescriptor arch;
            arch.hidden = parse_int_list(pre.hidden);
            arch.time_embed_dim = pre.time_embed;
            arch.label_vocab = pre.vocab;
            NoiseSchedule schedule(pre.beta_min, pre.beta_max);
            auto res = train_from_scratch(arch, schedule, shard, pre.tf.config());
            res.checkpoint.provenance["command"] = command_echo;
            res.checkpoint.provenance["build"] = build_id();
            std::string fh = save_checkpoint(res.checkpoint, pre.out);
            auto summary = checkpoint_summary(res.checkpoint, pre.out, fh);
            summary["final_loss"] = res.loss_history.back();
            std::cout << summary.dump(2) << "\n";
        });
    }

    // ---- train (finetune) ----
    struct {
        std::string init, data, out;
        TrainFlags tf;
    } ft;
    {
        auto* cmd = app.add_subcommand("train", "finetune a checkpoint on a shard");
        cmd->add_option("--init", ft.init, "starting checkpoint")->required();
        cmd->add_option("--data", ft.data, "training shard CSV")->required();
        cmd->add_option("--out", ft.out, "output checkpoint path")->required();
        ft.tf.attach(cmd);
        cmd->callback([&] {
            Checkpoint init = load_checkpoint(ft.init);
            Shard shard = load_shard(ft.data);
            auto res = finetune(init, shard, ft.tf.config());
            res.checkpoint.provenance["command"] = command_echo;
            res.checkpoint.provenance["build"] = build_id();
            std::string fh = save_checkpoint(res.checkpoint, ft.out);
            auto summary = checkpoint_summary(res.checkpoint, ft.out, fh);
            summary["final_loss"] = res.loss_history.back();
            std::cout << summary.dump(2) << "\n";
        });
    }

    // ---- soup ----
    struct {
        std::vector<std::string> in;
        std::vector<double> ks;
        std::string out, recipe;
    } sp;
    {
        auto* cmd = app.add_subcommand("soup", "average checkpoints in weight space");
        cmd->add_option("--in", sp.in, "input checkpoints")->required();
        cmd->add_option("--k", sp.ks, "coefficients (default uniform)");
        cmd->add_option("--out", sp.out, "output checkpoint path")->required();
        cmd->add_option("--recipe", sp.recipe, "also write the recipe JSON here");
        cmd->callback([&] {
            std::vector<Checkpoint> cps;
            for (const auto& p : sp.in) cps.push_back(load_checkpoint(p));
            auto ks = uniform_or_given(cps.size(), sp.ks, "soup");
            auto [souped, recipe] = soup(cps, ks);
            souped.provenance["command"] = command_echo;
            souped.provenance["build"] = build_id();
            std::string fh = save_checkpoint(souped, sp.out);
            if (!sp.recipe.empty()) save_json(recipe.to_json(), sp.recipe);
            auto summary = checkpoint_summary(souped, sp.out, fh);
            summary["recipe"] = recipe.to_json();
            std::cout << summary.dump(2) << "\n";
        });
    }

    // ---- greedy-soup / reverse-greedy-soup ----
    struct GreedyFlags {
        std::vector<std::string> in;
        std::string val, out, recipe, trace;
        int metric_n = 2048, metric_steps = 200, label = -1, threads = 1;
        std::uint64_t seed = 0;
    };
    auto add_greedy = [&](const std::string& name, const std::string& help, GreedyFlags& g,
                          bool reverse) {
        auto* cmd = app.add_subcommand(name, help);
        cmd->add_option("--in", g.in, "candidate checkpoints")->required();
        cmd->add_option("--val", g.val, "validation shard CSV")->required();
        cmd->add_option("--out", g.out, "output checkpoint path")->required();
        cmd->add_option("--recipe", g.recipe, "write the recipe JSON here");
        cmd->add_option("--trace", g.trace, "write the per-candidate decision trace here");
        cmd->add_option("--metric-n", g.metric_n, "samples per metric evaluation");
        cmd->add_option("--metric-steps", g.metric_steps, "integrator steps per metric evaluation");
        cmd->add_option("--label", g.label, "conditioning label for metric sampling");
        cmd->add_option("--threads", g.threads, "sampling threads");
        cmd->add_option("--seed", g.seed, "metric RNG seed");
        cmd->callback([&g, reverse, &command_echo] {
            std::vector<Checkpoint> cps;
            for (const auto& p : g.in) cps.push_back(load_checkpoint(p));
            Shard val = load_shard(g.val);
            MetricConfig mc;
            mc.n = g.metric_n;
            mc.steps = g.metric_steps;
            mc.seed = g.seed;
            mc.threads = g.threads;
            if (g.label >= 0) mc.label = g.label;
            auto metric = negative_energy_metric(val, mc);
            GreedyResult res = reverse ? reverse_greedy_soup(cps, metric) : greedy_soup(cps, metric);
            res.checkpoint.provenance["command"] = command_echo;
            res.checkpoint.provenance["build"] = build_id();
            std::string fh = save_checkpoint(res.checkpoint, g.out);
            if (!g.recipe.empty()) save_json(res.recipe.to_json(), g.recipe);
            if (!g.trace.empty())
                save_json({{"trace", res.trace}, {"metric", res.metric}, {"build", build_id()}},
                          g.trace);
            auto summary = checkpoint_summary(res.checkpoint, g.out, fh);
            summary["metric"] = res.metric;
            summary["recipe"] = res.recipe.to_json();
            summary["trace"] = res.trace;
            std::cout << summary.dump(2) << "\n";
        });
    };
    GreedyFlags gfwd, grev;
    add_greedy("greedy-soup", "grow a soup by strict metric improvement", gfwd, false);
    add_greedy("reverse-greedy-soup", "prune the uniform soup by strict metric improvement", grev,
               true);

    // ---- unlearn ----
    struct {
        std::string soup, recipe, remove, weights, out, out_recipe;
    } ul;
    {
        auto* cmd = app.add_subcommand("unlearn", "subtract one ingredient out of a soup");
        cmd->add_option("--soup", ul.soup, "souped checkpoint")->required();
        cmd->add_option("--recipe", ul.recipe, "recipe JSON of that soup")->required();
        cmd->add_option("--remove", ul.remove, "content hash to remove")->required();
        cmd->add_option("--weights", ul.weights, "checkpoint file of the removed ingredient")
            ->required();
        cmd->add_option("--out", ul.out, "output checkpoint path")->required();
        cmd->add_option("--out-recipe", ul.out_recipe, "write the updated recipe JSON here");
        cmd->callback([&] {
            Checkpoint souped = load_checkpoint(ul.soup);
            SoupRecipe recipe = SoupRecipe::from_json(load_json(ul.recipe));
            Checkpoint removed = load_checkpoint(ul.weights);
            auto [rest, new_recipe] = unlearn(souped, recipe, ul.remove, removed);
            rest.provenance["command"] = command_echo;
            rest.provenance["build"] = build_id();
            std::string fh = save_checkpoint(rest, ul.out);
            if (!ul.out_recipe.empty()) save_json(new_recipe.to_json(), ul.out_recipe);
            auto summary = checkpoint_summary(rest, ul.out, fh);
            summary["recipe"] = new_recipe.to_json();
            std::cout << summary.dump(2) << "\n";
        });
    }

    // ---- sample ----
    struct {
        std::vector<std::string> cks;
        std::vector<double> ks;
        bool ensemble = false;
        int n = 0, steps = 500, label = -1, threads = 1;
        std::uint64_t seed = 0;
        std::string out;
    } sm;
    {
        auto* cmd = app.add_subcommand("sample", "integrate the reverse SDE from a checkpoint");
        cmd->add_option("--ck", sm.cks, "checkpoint(s)")->required();
        cmd->add_flag("--ensemble", sm.ensemble,
                      "average noise predictions across checkpoints at every step (max 4)");
        cmd->add_option("--k", sm.ks, "ensemble coefficients (default uniform)");
        cmd->add_option("--n", sm.n, "number of samples")->required();
        cmd->add_option("--steps", sm.steps, "integrator steps");
        cmd->add_option("--label", sm.label, "conditioning label");
        cmd->add_option("--threads", sm.threads, "chain threads");
        cmd->add_option("--seed", sm.seed, "RNG seed");
        cmd->add_option("--out", sm.out, "output CSV path")->required();
        cmd->callback([&] {
            std::optional<int> label;
            if (sm.label >= 0) label = sm.label;
            std::vector<Checkpoint> cps;
            for (const auto& p : sm.cks) cps.push_back(load_checkpoint(p));
            std::vector<Vec2> pts;
            nlohmann::json meta{{"build", build_id()}, {"command", command_echo},
                                {"n", sm.n},          {"steps", sm.steps},
                                {"seed", sm.seed},    {"ensemble", sm.ensemble}};
            if (cps.size() == 1 && !sm.ensemble) {
                pts = sample_checkpoint(cps[0], label, sm.n, sm.steps, sm.seed, sm.threads);
                meta["checkpoints"] = {cps[0].content_hash()};
            } else {
                if (!sm.ensemble)
                    throw ValidationError("multiple checkpoints require --ensemble");
                if (cps.size() > 4)
                    throw ValidationError("ensemble sampling supports at most 4 checkpoints");
                auto ks = uniform_or_given(cps.size(), sm.ks, "ensemble");
                pts = sample_ensemble(cps, ks, label, sm.n, sm.steps, sm.seed, sm.threads);
                nlohmann::json hashes = nlohmann::json::array();
                for (const auto& cp : cps) hashes.push_back(cp.content_hash());
                meta["checkpoints"] = hashes;
                meta["k"] = ks;
            }
            save_points_csv(pts, sm.out);
            save_json(meta, shard_sidecar_path(sm.out));
            meta["samples"] = sm.out;
            std::cout << meta.dump(2) << "\n";
        });
    }

    // ---- eval ----
    struct {
        std::string metric, samples, ref, train, target, out;
        std::vector<std::string> centers;
        std::vector<std::string> in;
        std::vector<double> ks;
        int probes = 256;
        std::uint64_t seed = 0;
    } ev;
    {
        auto* cmd = app.add_subcommand("eval", "score sample sets or checkpoints");
        cmd->add_option("--metric", ev.metric,
                        "moments | energy | nn | mode-fractions | linearization-gap")
            ->required();
        cmd->add_option("--samples", ev.samples, "sample CSV under evaluation");
        cmd->add_option("--ref", ev.ref, "reference sample CSV (energy)");
        cmd->add_option("--train", ev.train, "training CSV (nn)");
        cmd->add_option("--target", ev.target, "target gaussian JSON (moments)");
        cmd->add_option("--center", ev.centers, "mode center 'x,y' (repeatable)");
        cmd->add_option("--in", ev.in, "checkpoints (linearization-gap)");
        cmd->add_option("--k", ev.ks, "coefficients (default uniform)");
        cmd->add_option("--probes", ev.probes, "probe count (linearization-gap)");
        cmd->add_option("--seed", ev.seed, "seed for subsampling/probes");
        cmd->add_option("--out", ev.out, "also write the report JSON here");
        cmd->callback([&] {
            EvalReport rep;
            rep.metric = ev.metric;
            rep.seed = ev.seed;
            rep.config["command"] = command_echo;
            rep.config["build"] = build_id();
            auto need = [&](const std::string& v, const char* flag) {
                if (v.empty())
                    throw ValidationError("metric " + ev.metric + " requires " + flag);
                return v;
            };
            if (ev.metric == "moments") {
                auto pts = load_points_csv(need(ev.samples, "--samples"));
                auto target = require_gaussian(load_generator(need(ev.target, "--target")),
                                               "moments target");
                auto err = moments_error(pts, target);
                rep.value = std::max({err.mean_err.x, err.mean_err.y, err.cov_err});
                rep.config["mean_err"] = {err.mean_err.x, err.mean_err.y};
                rep.config["cov_err"] = err.cov_err;
            } else if (ev.metric == "energy") {
                auto a = load_points_csv(need(ev.samples, "--samples"));
                auto b = load_points_csv(need(ev.ref, "--ref"));
                rep.value = energy_distance(a, b, ev.seed);
            } else if (ev.metric == "nn") {
                auto g = load_points_csv(need(ev.samples, "--samples"));
                auto t = load_points_csv(need(ev.train, "--train"));
                auto nn = nn_distance_distribution(g, t);
                rep.value = nn.median;
                rep.config["median"] = nn.median;
                rep.config["p05"] = nn.p05;
            } else if (ev.metric == "mode-fractions") {
                auto pts = load_points_csv(need(ev.samples, "--samples"));
                if (ev.centers.size() < 2)
                    throw ValidationError("mode-fractions needs at least two --center");
                std::vector<Vec2> centers;
                for (const auto& c : ev.centers) centers.push_back(parse_point(c));
                auto fracs = mode_fractions(pts, centers);
                rep.value = fracs[0];
                rep.config["fractions"] = fracs;
            } else if (ev.metric == "linearization-gap") {
                if (ev.in.empty()) throw ValidationError("linearization-gap requires --in");
                std::vector<Checkpoint> cps;
                for (const auto& p : ev.in) {
                    cps.push_back(load_checkpoint(p));
                    rep.input_hashes.push_back(cps.back().content_hash());
                }
                auto ks = uniform_or_given(cps.size(), ev.ks, "linearization-gap");
                auto probes = make_probe_set(ev.probes, ev.seed);
                rep.value = linearization_gap(cps, ks, probes);
                rep.config["probes"] = ev.probes;
            } else {
                throw ValidationError("unknown metric '" + ev.metric + "'");
            }
            emit(rep.to_json(), ev.out);
        });
    }

    // ---- naf ----
    struct {
        std::string p, safe, out;
        bool geo_mean = false;
        int resolution = 512;
    } nf;
    {
        auto* cmd = app.add_subcommand("naf", "grid KL of a candidate against a safe model");
        cmd->add_option("--p", nf.p, "candidate generator JSON (array with --geo-mean)")
            ->required();
        cmd->add_option("--safe", nf.safe, "safe generator JSON")->required();
        cmd->add_flag("--geo-mean", nf.geo_mean,
                      "treat --p as a list of gaussians and take their geometric mean");
        cmd->add_option("--resolution", nf.resolution, "grid points per axis");
        cmd->add_option("--out", nf.out, "also write the report JSON here");
        cmd->callback([&] {
            AnalyticDistribution safe = load_generator(nf.safe);
            AnalyticDistribution p = [&] {
                nlohmann::json j = load_json(nf.p);
                if (!nf.geo_mean) return AnalyticDistribution::from_json(j);
                if (!j.is_array() || j.empty())
                    throw ValidationError("--geo-mean expects a nonempty JSON array of gaussians");
                std::vector<Gaussian> gs;
                for (const auto& item : j)
                    gs.push_back(require_gaussian(AnalyticDistribution::from_json(item),
                                                  "geo-mean input"));
                Gaussian gm = geometric_mean_gaussians(gs);
                return AnalyticDistribution::gaussian(gm.mean, gm.cov);
            }();
            GridSpec grid = default_grid(p, safe);
            grid.resolution = nf.resolution;
            NafReport rep = kl_grid(p, safe, grid);
            auto j = rep.to_json();
            j["build"] = build_id();
            j["command"] = command_echo;
            emit(j, nf.out);
        });
    }

    // ---- lincheck ----
    struct {
        std::vector<std::string> in;
        std::vector<double> ks;
        int probes = 256;
        std::uint64_t seed = 0;
        std::string out;
    } lc;
    {
        auto* cmd = app.add_subcommand("lincheck",
                                       "weight-average vs output-ensemble prediction gap");
        cmd->add_option("--in", lc.in, "checkpoints")->required();
        cmd->add_option("--k", lc.ks, "coefficients (default uniform)");
        cmd->add_option("--probes", lc.probes, "probe count");
        cmd->add_option("--seed", lc.seed, "probe seed");
        cmd->add_option("--out", lc.out, "also write the report JSON here");
        cmd->callback([&] {
            EvalReport rep;
            rep.metric = "linearization_gap";
            rep.seed = lc.seed;
            std::vector<Checkpoint> cps;
            for (const auto& p : lc.in) {
                cps.push_back(load_checkpoint(p));
                rep.input_hashes.push_back(cps.back().content_hash());
            }
            auto ks = uniform_or_given(cps.size(), lc.ks, "lincheck");
            rep.value = linearization_gap(cps, ks, make_probe_set(lc.probes, lc.seed));
            rep.config = {{"probes", lc.probes}, {"command", command_echo}, {"build", build_id()}};
            emit(rep.to_json(), lc.out);
        });
    }

    // ---- run-experiment ----
    struct {
        std::string config, out_dir;
        int threads = 1;
        std::int64_t seed = -1;
    } rx;
    {
        auto* cmd = app.add_subcommand("run-experiment", "execute a declarative pipeline config");
        cmd->add_option("config", rx.config, "TOML config file")->required();
        cmd->add_option("--out-dir", rx.out_dir, "override the config's output directory");
        cmd->add_option("--seed", rx.seed, "override the config's master seed");
        cmd->add_option("--threads", rx.threads, "sampling threads");
        cmd->callback([&] {
            nlohmann::json cfg = parse_toml_lite_file(rx.config);
            if (rx.seed >= 0) cfg["master_seed"] = rx.seed;
            cfg["command"] = command_echo;
            std::filesystem::path out_dir = !rx.out_dir.empty()
                                                ? std::filesystem::path(rx.out_dir)
                                                : std::filesystem::path(
                                                      cfg.value("out_dir", "runs/experiment"));
            nlohmann::json manifest = run_experiment(cfg, out_dir, rx.threads);
            std::cout << manifest.dump(2) << "\n";
        });
    }

    try {
        app.parse(argc, const_cast<char**>(argv));
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << std::flush;
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const NumericalError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace dsoup::cli
