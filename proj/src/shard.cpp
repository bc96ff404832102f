#include "dsoup/shard.hpp"

#include <algorithm>
#include <charconv>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dsoup/errors.hpp"
#include "dsoup/version.hpp"

namespace dsoup {

Shard make_shard(const AnalyticDistribution& dist, std::size_t n, std::uint64_t seed,
                 std::optional<int> label, std::string id) {
    if (n < 1) throw ValidationError("make_shard: n must be >= 1");
    if (label && *label < 0) throw ValidationError("make_shard: label must be nonnegative");
    Shard shard;
    shard.id = std::move(id);
    shard.generator = dist;
    shard.seed = seed;
    shard.provenance = {shard.id};
    shard.points.reserve(n);
    CounterRng rng(seed);
    for (std::size_t i = 0; i < n; ++i) shard.points.push_back(dist.sample(rng));
    if (label) shard.labels = std::vector<int>(n, *label);
    return shard;
}

std::pair<Shard, Shard> split_shard(const Shard& shard, double fraction, std::uint64_t seed) {
    if (shard.size() < 2) throw ValidationError("split_shard: shard needs at least 2 points");
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ValidationError("split_shard: fraction must lie in (0,1)");
    }
    const std::size_t n = shard.size();
    const std::size_t na = static_cast<std::size_t>(std::floor(fraction * double(n)));

    // Fisher-Yates on the index array, then restore original order per half.
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    CounterRng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = rng.index(i + 1);
        std::swap(idx[i], idx[j]);
    }
    std::vector<bool> in_a(n, false);
    for (std::size_t i = 0; i < na; ++i) in_a[idx[i]] = true;

    auto pick = [&](bool want, const std::string& suffix) {
        Shard out;
        out.id = shard.id + suffix;
        out.generator = shard.generator;
        out.seed = seed;
        out.provenance = {out.id};
        if (shard.labels) out.labels = std::vector<int>{};
        for (std::size_t i = 0; i < n; ++i) {
            if (in_a[i] != want) continue;
            out.points.push_back(shard.points[i]);
            if (shard.labels) out.labels->push_back((*shard.labels)[i]);
        }
        return out;
    };
    return {pick(true, "_a"), pick(false, "_b")};
}

Shard union_shards(const std::vector<Shard>& shards) {
    if (shards.empty()) throw ValidationError("union_shards: need at least one shard");
    if (shards.size() == 1) return shards.front();

    std::size_t total = 0;
    for (const auto& s : shards) total += s.size();

    Shard out;
    out.seed = shards.front().seed;
    bool all_labeled = true;
    std::vector<MixtureComponent> comps;
    std::string id;
    for (const auto& s : shards) {
        id += (id.empty() ? "" : "+") + s.id;
        out.provenance.insert(out.provenance.end(), s.provenance.begin(), s.provenance.end());
        const double lambda = double(s.size()) / double(total);
        for (const auto& comp : s.generator.components()) {
            comps.push_back({lambda * comp.weight, comp.gaussian});
        }
        all_labeled = all_labeled && s.labels.has_value();
    }
    out.id = id;
    out.generator = AnalyticDistribution::mixture(std::move(comps));
    out.points.reserve(total);
    if (all_labeled) out.labels = std::vector<int>{};
    for (const auto& s : shards) {
        out.points.insert(out.points.end(), s.points.begin(), s.points.end());
        if (all_labeled) out.labels->insert(out.labels->end(), s.labels->begin(), s.labels->end());
    }
    return out;
}

std::filesystem::path shard_sidecar_path(const std::filesystem::path& csv_path) {
    auto p = csv_path;
    p.replace_extension(".json");
    return p;
}

namespace {

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

double parse_double(std::string_view s) {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(s.data(), end, v);
    if (ec != std::errc() || p != end) {
        throw FormatError("bad numeric field in CSV: '" + std::string(s) + "'");
    }
    return v;
}

}  // namespace

void save_shard(const Shard& shard, const std::filesystem::path& csv_path,
                const std::string& command_echo) {
    std::ofstream out(csv_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + csv_path.string());
    out << (shard.labels ? "x0,x1,label\n" : "x0,x1\n");
    for (std::size_t i = 0; i < shard.points.size(); ++i) {
        out << fmt_double(shard.points[i].x) << ',' << fmt_double(shard.points[i].y);
        if (shard.labels) out << ',' << (*shard.labels)[i];
        out << '\n';
    }
    if (!out) throw IoError("write failed for " + csv_path.string());
    out.close();

    nlohmann::json side{
        {"id", shard.id},
        {"seed", shard.seed},
        {"generator", shard.generator.to_json()},
        {"provenance", shard.provenance},
        {"build", build_id()},
    };
    if (!command_echo.empty()) side["command"] = command_echo;
    std::ofstream js(shard_sidecar_path(csv_path), std::ios::binary | std::ios::trunc);
    if (!js) throw IoError("cannot write " + shard_sidecar_path(csv_path).string());
    js << side.dump(2) << '\n';
}

void save_points_csv(const std::vector<Vec2>& points, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << "x0,x1\n";
    for (const auto& p : points) out << fmt_double(p.x) << ',' << fmt_double(p.y) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
}

std::vector<Vec2> load_points_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty CSV: " + path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != "x0,x1" && line != "x0,x1,label")
        throw FormatError("bad CSV header: '" + line + "'");
    std::vector<Vec2> points;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        if (c1 == std::string::npos) throw FormatError("bad CSV row: '" + line + "'");
        auto c2 = line.find(',', c1 + 1);
        if (c2 == std::string::npos) c2 = line.size();
        Vec2 p;
        p.x = parse_double(std::string_view(line).substr(0, c1));
        p.y = parse_double(std::string_view(line).substr(c1 + 1, c2 - c1 - 1));
        if (!is_finite(p)) throw FormatError("non-finite point in " + path.string());
        points.push_back(p);
    }
    if (points.empty()) throw FormatError("CSV has no points: " + path.string());
    return points;
}

Shard load_shard(const std::filesystem::path& csv_path) {
    std::ifstream in(csv_path, std::ios::binary);
    if (!in) throw IoError("cannot open " + csv_path.string());
    std::string line;
    if (!std::getline(in, line)) throw FormatError("empty shard CSV: " + csv_path.string());
    if (!line.empty() && line.back() == '\r') line.pop_back();
    bool labeled = false;
    if (line == "x0,x1,label") {
        labeled = true;
    } else if (line != "x0,x1") {
        throw FormatError("bad shard CSV header: '" + line + "'");
    }

    Shard shard;
    if (labeled) shard.labels = std::vector<int>{};
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        if (c1 == std::string::npos) throw FormatError("bad shard CSV row: '" + line + "'");
        const auto c2 = labeled ? line.find(',', c1 + 1) : std::string::npos;
        if (labeled && c2 == std::string::npos) {
            throw FormatError("bad shard CSV row (missing label): '" + line + "'");
        }
        Vec2 p;
        p.x = parse_double(std::string_view(line).substr(0, c1));
        p.y = parse_double(std::string_view(line).substr(c1 + 1, (labeled ? c2 : line.size()) - c1 - 1));
        if (!is_finite(p)) throw FormatError("non-finite point in " + csv_path.string());
        shard.points.push_back(p);
        if (labeled) {
            shard.labels->push_back(int(parse_double(std::string_view(line).substr(c2 + 1))));
        }
    }
    if (shard.points.empty()) throw FormatError("shard CSV has no points: " + csv_path.string());

    const auto side_path = shard_sidecar_path(csv_path);
    std::ifstream js(side_path, std::ios::binary);
    if (!js) throw IoError("missing shard sidecar " + side_path.string());
    nlohmann::json side;
    try {
        js >> side;
        shard.id = side.at("id").get<std::string>();
        shard.seed = side.at("seed").get<std::uint64_t>();
        shard.generator = AnalyticDistribution::from_json(side.at("generator"));
        if (side.contains("provenance")) {
            shard.provenance = side.at("provenance").get<std::vector<std::string>>();
        } else {
            shard.provenance = {shard.id};
        }
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("bad shard sidecar " + side_path.string() + ": " + e.what());
    }
    return shard;
}

}  // namespace dsoup
