#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "dsoup/checkpoint_io.hpp"
#include "dsoup/errors.hpp"
#include "dsoup/evaluation.hpp"
#include "dsoup/oracles.hpp"
#include "dsoup/sampler.hpp"
#include "dsoup/shard.hpp"
#include "dsoup/souping.hpp"
#include "dsoup/train.hpp"
#include "dsoup/version.hpp"

namespace py = pybind11;
using namespace dsoup;

namespace {

nlohmann::json to_json(const py::object& obj) {
    py::module_ json = py::module_::import("json");
    return nlohmann::json::parse(py::cast<std::string>(json.attr("dumps")(obj)));
}

py::object from_json(const nlohmann::json& j) {
    py::module_ json = py::module_::import("json");
    return json.attr("loads")(j.dump());
}

std::vector<Vec2> to_points(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr) {
    if (arr.ndim() != 2 || arr.shape(1) != 2)
        throw ValidationError("points must be an (n, 2) array");
    std::vector<Vec2> out(static_cast<std::size_t>(arr.shape(0)));
    auto r = arr.unchecked<2>();
    for (py::ssize_t i = 0; i < arr.shape(0); ++i) out[std::size_t(i)] = {r(i, 0), r(i, 1)};
    return out;
}

py::array_t<double> from_points(const std::vector<Vec2>& pts) {
    py::array_t<double> arr({py::ssize_t(pts.size()), py::ssize_t(2)});
    auto w = arr.mutable_unchecked<2>();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        w(py::ssize_t(i), 0) = pts[i].x;
        w(py::ssize_t(i), 1) = pts[i].y;
    }
    return arr;
}

Shard shard_from_points(const py::array_t<double, py::array::c_style | py::array::forcecast>& arr,
                        const std::string& id) {
    Shard s;
    s.id = id;
    s.points = to_points(arr);
    s.provenance = {id};
    return s;
}

ArchDescriptor arch_from(const std::vector<int>& hidden, int time_embed, int vocab) {
    ArchDescriptor a;
    a.hidden = hidden;
    a.time_embed_dim = time_embed;
    a.label_vocab = vocab;
    return a;
}

}  // namespace

PYBIND11_MODULE(dsoup, m) {
    m.doc() = "weight-averaged (souped) diffusion models on 2-D gaussian data";
    m.attr("__version__") = build_id();

    py::register_exception<ValidationError>(m, "DsoupValidationError", PyExc_ValueError);
    py::register_exception<NumericalError>(m, "DsoupNumericalError", PyExc_ArithmeticError);
    py::register_exception<IoError>(m, "DsoupIoError", PyExc_IOError);

    py::class_<NoiseSchedule>(m, "NoiseSchedule")
        .def(py::init<double, double>(), py::arg("beta_min") = 0.1, py::arg("beta_max") = 20.0)
        .def("beta", &NoiseSchedule::beta, py::arg("t"))
        .def("eval", &NoiseSchedule::eval, py::arg("t"),
             "returns (gamma, sigma) with gamma^2 + sigma^2 = 1");

    py::class_<Checkpoint>(m, "Checkpoint")
        .def_property_readonly("content_hash", &Checkpoint::content_hash)
        .def_readonly("ancestor_hash", &Checkpoint::ancestor_hash)
        .def_property_readonly("weights",
                               [](const Checkpoint& cp) {
                                   py::array_t<double> arr(py::ssize_t(cp.weights.size()));
                                   std::copy(cp.weights.begin(), cp.weights.end(),
                                             arr.mutable_data());
                                   return arr;
                               })
        .def_property_readonly("provenance",
                               [](const Checkpoint& cp) { return from_json(cp.provenance); })
        .def("__repr__", [](const Checkpoint& cp) {
            return "<Checkpoint " + cp.content_hash().substr(0, 12) + " (" +
                   std::to_string(cp.weights.size()) + " weights)>";
        });

    m.def(
        "generate",
        [](const py::object& generator, std::size_t n, std::uint64_t seed) {
            auto dist = AnalyticDistribution::from_json(to_json(generator));
            return from_points(make_shard(dist, n, seed).points);
        },
        py::arg("generator"), py::arg("n"), py::arg("seed") = 0,
        "draw n points from a generator dict {kind, components: [{weight, mean, cov}]}");

    m.def(
        "train",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
           int steps, int batch, double lr, std::uint64_t seed, const std::vector<int>& hidden,
           double beta_min, double beta_max) {
            auto res = train_from_scratch(arch_from(hidden, 32, 0),
                                          NoiseSchedule(beta_min, beta_max),
                                          shard_from_points(points, "py"),
                                          TrainConfig{steps, batch, lr, seed});
            return py::make_tuple(res.checkpoint, res.loss_history);
        },
        py::arg("points"), py::arg("steps") = 2000, py::arg("batch") = 128,
        py::arg("lr") = 1e-3, py::arg("seed") = 0,
        py::arg("hidden") = std::vector<int>{128, 128}, py::arg("beta_min") = 0.1,
        py::arg("beta_max") = 20.0, "train a fresh model; returns (checkpoint, loss_history)");

    m.def(
        "finetune",
        [](const Checkpoint& init,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& points,
           int steps, int batch, double lr, std::uint64_t seed, const std::string& shard_id) {
            auto res = finetune(init, shard_from_points(points, shard_id),
                                TrainConfig{steps, batch, lr, seed});
            return py::make_tuple(res.checkpoint, res.loss_history);
        },
        py::arg("init"), py::arg("points"), py::arg("steps") = 2000, py::arg("batch") = 128,
        py::arg("lr") = 1e-3, py::arg("seed") = 0, py::arg("shard_id") = "py");

    m.def(
        "soup",
        [](const std::vector<Checkpoint>& cps, std::optional<std::vector<double>> ks) {
            auto [cp, recipe] =
                soup(cps, ks ? *ks : std::vector<double>(cps.size(), 1.0 / double(cps.size())));
            return py::make_tuple(cp, from_json(recipe.to_json()));
        },
        py::arg("checkpoints"), py::arg("k") = py::none(),
        "weight-average checkpoints; returns (checkpoint, recipe)");

    m.def(
        "unlearn",
        [](const Checkpoint& souped, const py::object& recipe, const std::string& remove,
           const Checkpoint& removed) {
            auto [cp, rest] =
                unlearn(souped, SoupRecipe::from_json(to_json(recipe)), remove, removed);
            return py::make_tuple(cp, from_json(rest.to_json()));
        },
        py::arg("souped"), py::arg("recipe"), py::arg("remove_hash"), py::arg("removed"));

    m.def(
        "greedy_soup",
        [](const std::vector<Checkpoint>& cps,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& val,
           int metric_n, int metric_steps, std::uint64_t seed, bool reverse) {
            MetricConfig mc;
            mc.n = metric_n;
            mc.steps = metric_steps;
            mc.seed = seed;
            Shard v = shard_from_points(val, "val");
            auto metric = negative_energy_metric(v, mc);
            GreedyResult res = reverse ? reverse_greedy_soup(cps, metric)
                                       : greedy_soup(cps, metric);
            return py::make_tuple(res.checkpoint, from_json(res.recipe.to_json()), res.metric,
                                  from_json(res.trace));
        },
        py::arg("checkpoints"), py::arg("val"), py::arg("metric_n") = 1024,
        py::arg("metric_steps") = 100, py::arg("seed") = 0, py::arg("reverse") = false,
        "returns (checkpoint, recipe, metric, trace)");

    m.def(
        "sample",
        [](const Checkpoint& cp, int n, int steps, std::uint64_t seed, int threads) {
            return from_points(sample_checkpoint(cp, std::nullopt, n, steps, seed, threads));
        },
        py::arg("checkpoint"), py::arg("n"), py::arg("steps") = 400, py::arg("seed") = 0,
        py::arg("threads") = 1);

    m.def(
        "sample_analytic",
        [](const py::object& generator, int n, int steps, std::uint64_t seed, double beta_min,
           double beta_max) {
            auto dist = AnalyticDistribution::from_json(to_json(generator));
            NoiseSchedule s(beta_min, beta_max);
            auto pts = sample_score(
                [&](const Vec2& x, double t) { return analytic_score(marginal_at(dist, t, s), x); },
                s, n, steps, seed);
            return from_points(pts);
        },
        py::arg("generator"), py::arg("n"), py::arg("steps") = 1000, py::arg("seed") = 0,
        py::arg("beta_min") = 0.1, py::arg("beta_max") = 20.0,
        "integrate the reverse SDE with the exact analytic score");

    m.def(
        "energy_distance",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& a,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& b,
           std::uint64_t seed) { return energy_distance(to_points(a), to_points(b), seed); },
        py::arg("a"), py::arg("b"), py::arg("seed") = 0);

    m.def(
        "nn_distances",
        [](const py::array_t<double, py::array::c_style | py::array::forcecast>& generated,
           const py::array_t<double, py::array::c_style | py::array::forcecast>& train) {
            auto rep = nn_distance_distribution(to_points(generated), to_points(train));
            return py::make_tuple(rep.median, rep.p05, rep.distances);
        },
        py::arg("generated"), py::arg("train"), "returns (median, p05, distances)");

    m.def(
        "linearization_gap",
        [](const std::vector<Checkpoint>& cps, std::optional<std::vector<double>> ks, int probes,
           std::uint64_t seed) {
            return linearization_gap(
                cps, ks ? *ks : std::vector<double>(cps.size(), 1.0 / double(cps.size())),
                make_probe_set(probes, seed));
        },
        py::arg("checkpoints"), py::arg("k") = py::none(), py::arg("probes") = 256,
        py::arg("seed") = 0);

    m.def(
        "kl",
        [](const py::object& p, const py::object& q, int resolution) {
            auto dp = AnalyticDistribution::from_json(to_json(p));
            auto dq = AnalyticDistribution::from_json(to_json(q));
            GridSpec grid = default_grid(dp, dq);
            grid.resolution = resolution;
            return from_json(kl_grid(dp, dq, grid).to_json());
        },
        py::arg("p"), py::arg("q"), py::arg("resolution") = 512,
        "grid KL divergence report between two generator dicts");

    m.def("save_checkpoint", [](const Checkpoint& cp, const std::string& path) {
        return save_checkpoint(cp, path);
    });
    m.def("load_checkpoint",
          [](const std::string& path) { return load_checkpoint(path); });
}
