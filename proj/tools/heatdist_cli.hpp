#pragma once

// Command-line front end. Every subcommand computes its results in memory and
// only then writes files; if any write fails, files already written by the
// same invocation are removed.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "heatdist/heatdist.hpp"

namespace heatdist::cli {

namespace fs = std::filesystem;
using nlohmann::json;

enum ExitCode : int {
    kOk = 0,
    kFailure = 1,
    kParseError = 2,
    kDimensionMismatch = 3,
    kNumericFailure = 4,
};

/// Flags shared by the subcommands.
struct RunConfig {
    double alpha = 1.0;
    std::string p = "2";
    std::string metric = "diffusion";
    std::size_t quad_order = kDefaultQuadratureOrder;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    std::string graph_path;
    std::string signals_path;
    std::string labels_path;
    std::string out_path;
    std::string fixture;
    bool labelled = false;

    void validate() const {
        if (!(alpha > 0.0)) throw InvalidArgument("--alpha must be > 0");
        (void)parse_norm(p);
        if (quad_order < 1 || quad_order > kMaxQuadratureOrder)
            throw InvalidArgument("--quad-order must lie in [1, 256]");
    }
};

namespace detail {

/// Files written by one invocation; removed again unless commit() is reached.
class Outputs {
public:
    Outputs() = default;
    Outputs(const Outputs&) = delete;
    Outputs& operator=(const Outputs&) = delete;
    ~Outputs() {
        if (committed_) return;
        std::error_code ec;
        for (const auto& p : written_) fs::remove(p, ec);
    }

    void write(const fs::path& path, const std::string& content) {
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        written_.push_back(path);
        std::ofstream f(path, std::ios::binary);
        if (!f) throw Error("cannot write " + path.string());
        f << content;
        f.close();
        if (!f) throw Error("write failed for " + path.string());
    }

    void commit() { committed_ = true; }

private:
    std::vector<fs::path> written_;
    bool committed_ = false;
};

inline fs::path sidecar(const fs::path& out) { return fs::path(out.string() + ".json"); }

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

struct Problem {
    Graph graph;
    SignalSet signals;
    std::string source;
};

/// Graph and signals from --fixture or --graph/--signals.
inline Problem load_problem(const RunConfig& cfg) {
    if (!cfg.fixture.empty()) {
        if (cfg.fixture != "fig1") throw InvalidArgument("unknown fixture '" + cfg.fixture + "'");
        Figure1 f = figure1_graph();
        SignalSet set{10, {f.r, f.g, f.y}, std::nullopt};
        return {std::move(f.graph), std::move(set), "fixture:fig1"};
    }
    if (cfg.graph_path.empty() || cfg.signals_path.empty())
        throw InvalidArgument("need --fixture or both --graph and --signals");
    Problem pr{io::read_graph(fs::path(cfg.graph_path)), io::read_signals_csv(fs::path(cfg.signals_path), cfg.labelled),
               cfg.graph_path};
    if (pr.signals.count() > 0 && pr.signals.n != pr.graph.node_count())
        throw DimensionMismatch("signal length vs graph nodes", pr.graph.node_count(), pr.signals.n);
    pr.signals.n = pr.graph.node_count();
    return pr;
}

inline json provenance(const std::string& command, const std::vector<std::string>& args) {
    return json{{"command", command}, {"args", args}, {"version", kVersion}};
}

inline std::vector<std::size_t> parse_size_list(const std::string& s, const char* flag) {
    std::vector<std::size_t> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const long long v = io::parse_integer(item, flag);
        if (v < 0) throw InvalidArgument(std::string(flag) + ": negative entry");
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw InvalidArgument(std::string(flag) + ": empty list");
    return out;
}

// --- subcommands ---------------------------------------------------------------

inline int cmd_distance(const RunConfig& cfg, const std::vector<std::string>& args) {
    cfg.validate();
    if (cfg.out_path.empty()) throw InvalidArgument("--out is required");
    const Norm p = parse_norm(cfg.p);
    const Metric metric = parse_metric(cfg.metric);
    const Problem pr = load_problem(cfg);
    const auto what = metric == Metric::superposition ? Precompute::full : Precompute::resolvent_only;
    const DiffusionOperator op = make_operator(pr.graph, cfg.alpha, what);
    const QuadratureRule quad = gauss_laguerre(cfg.quad_order);
    const DistanceMatrix dm = pairwise_distances(op, pr.signals, metric, p, quad, cfg.threads);

    std::ostringstream csv;
    io::write_distance_csv(csv, dm.d);
    json meta = provenance("distance", args);
    meta["metric"] = to_string(metric);
    meta["p"] = to_string(p);
    meta["alpha"] = cfg.alpha;
    meta["quad_order"] = cfg.quad_order;
    meta["source"] = pr.source;
    meta["signals"] = pr.signals.count();

    Outputs out;
    out.write(cfg.out_path, csv.str());
    out.write(sidecar(cfg.out_path), dump(meta));
    out.commit();
    return kOk;
}

inline int cmd_stability(const RunConfig& cfg, double delta, std::size_t reps, const std::string& pair,
                         const std::vector<std::string>& args) {
    cfg.validate();
    if (cfg.out_path.empty()) throw InvalidArgument("--out is required");
    const Problem pr = load_problem(cfg);
    const auto idx = parse_size_list(pair, "--pair");
    if (idx.size() != 2) throw InvalidArgument("--pair expects two indices i,j");
    if (idx[0] >= pr.signals.count() || idx[1] >= pr.signals.count())
        throw InvalidArgument("--pair index out of range");

    StabilityConfig sc;
    sc.perturbation = {delta, cfg.seed};
    sc.reps = reps;
    sc.p = parse_norm(cfg.p);
    sc.alpha = cfg.alpha;
    sc.quad_order = cfg.quad_order;
    sc.threads = cfg.threads;
    const auto samples = stability_experiment(pr.graph, pr.signals.signals[idx[0]], pr.signals.signals[idx[1]], sc);

    double max_diff = 0.0, max_sps = 0.0, max_e = 0.0;
    for (const auto& s : samples) {
        max_diff = std::max(max_diff, s.norm_dev_diff);
        max_sps = std::max(max_sps, s.norm_dev_sps);
        max_e = std::max(max_e, s.e_norm);
    }
    std::ostringstream csv;
    io::write_samples_csv(csv, samples);
    json meta = provenance("stability", args);
    meta["delta"] = delta;
    meta["reps"] = reps;
    meta["seed"] = cfg.seed;
    meta["p"] = to_string(sc.p);
    meta["alpha"] = cfg.alpha;
    meta["quad_order"] = cfg.quad_order;
    meta["pair"] = idx;
    meta["source"] = pr.source;
    meta["gamma"] = samples.front().gamma;
    meta["max_norm_dev_diff"] = max_diff;
    meta["max_norm_dev_sps"] = max_sps;
    meta["max_e_norm"] = max_e;

    Outputs out;
    out.write(cfg.out_path, csv.str());
    out.write(sidecar(cfg.out_path), dump(meta));
    out.commit();
    return kOk;
}

struct SynthOptions {
    std::string sizes = "9,8,10";
    double p_intra = 0.4;
    double w_lo = 1.0;
    double w_hi = 3.0;
    std::size_t bridges = 3;
    std::size_t per_type = 10;
    std::string out_dir;
};

inline int cmd_synth(const RunConfig& cfg, const SynthOptions& so, const std::vector<std::string>& args) {
    if (so.out_dir.empty()) throw InvalidArgument("--out-dir is required");
    ClusterGraphConfig gc;
    gc.sizes = parse_size_list(so.sizes, "--sizes");
    gc.p_intra = so.p_intra;
    gc.w_lo = so.w_lo;
    gc.w_hi = so.w_hi;
    gc.bridges = so.bridges;
    Rng graph_rng = Rng::substream(cfg.seed, 0);
    Rng signal_rng = Rng::substream(cfg.seed, 1);
    const ClusteredGraph cg = three_cluster_graph(gc, graph_rng);
    SignalSet set{cg.graph.node_count(), {}, std::vector<int>{}};
    if (so.per_type > 0) set = cluster_signals(cg.graph, cg.clusters, so.per_type, signal_rng);

    std::ostringstream graph_txt, clusters_txt, signals_csv, labels_txt;
    io::write_graph(graph_txt, cg.graph);
    io::write_labels(clusters_txt, cg.clusters);
    io::write_signals_csv(signals_csv, set, false);
    io::write_labels(labels_txt, *set.labels);
    json meta = provenance("synth", args);
    meta["seed"] = cfg.seed;
    meta["sizes"] = gc.sizes;
    meta["p_intra"] = gc.p_intra;
    meta["w_lo"] = gc.w_lo;
    meta["w_hi"] = gc.w_hi;
    meta["bridges"] = gc.bridges;
    meta["per_type"] = so.per_type;
    meta["nodes"] = cg.graph.node_count();
    meta["edges"] = cg.graph.edge_count();
    meta["signals"] = set.count();

    const fs::path dir(so.out_dir);
    Outputs out;
    out.write(dir / "graph.txt", graph_txt.str());
    out.write(dir / "clusters.txt", clusters_txt.str());
    out.write(dir / "signals.csv", signals_csv.str());
    out.write(dir / "labels.txt", labels_txt.str());
    out.write(dir / "synth.json", dump(meta));
    out.commit();
    return kOk;
}

inline int cmd_knn(const RunConfig& cfg, const std::vector<std::string>& distance_paths, const std::string& ks,
                   const std::vector<std::string>& args) {
    if (cfg.out_path.empty()) throw InvalidArgument("--out is required");
    if (cfg.labels_path.empty()) throw InvalidArgument("--labels is required");
    if (distance_paths.empty()) throw InvalidArgument("at least one --distances file is required");
    const auto k_list = parse_size_list(ks, "--k");
    const std::vector<int> labels = io::read_labels(fs::path(cfg.labels_path));

    json table = json::array();
    for (const auto& path : distance_paths) {
        const SymMatrix dm = io::read_distance_csv(fs::path(path));
        if (dm.size() != labels.size()) throw DimensionMismatch(path + " vs labels", labels.size(), dm.size());
        json row{{"distances", path}};
        // Carry the metric name over from the distance command's sidecar when present.
        if (std::ifstream side(sidecar(path)); side) {
            try {
                const json s = json::parse(side);
                if (s.contains("metric")) row["metric"] = s["metric"];
            } catch (const json::exception&) {
            }
        }
        json acc = json::object(), per_class = json::object();
        for (std::size_t k : k_list) {
            const KnnReport rep = knn_loocv(dm, labels, k);
            acc[std::to_string(k)] = rep.accuracy;
            json pc = json::object();
            for (std::size_t c = 0; c < rep.classes.size(); ++c)
                pc[std::to_string(rep.classes[c])] = rep.class_accuracy[c];
            per_class[std::to_string(k)] = pc;
        }
        row["accuracy"] = acc;
        row["class_accuracy"] = per_class;
        table.push_back(row);
    }
    json result = provenance("knn", args);
    result["k"] = k_list;
    result["results"] = table;

    Outputs out;
    out.write(cfg.out_path, dump(result));
    out.commit();
    return kOk;
}

inline int cmd_mds(const RunConfig& cfg, const std::string& distances, std::size_t dim,
                   const std::vector<std::string>& args) {
    if (cfg.out_path.empty()) throw InvalidArgument("--out is required");
    if (distances.empty()) throw InvalidArgument("--distances is required");
    const SymMatrix dm = io::read_distance_csv(fs::path(distances));
    std::optional<std::vector<int>> labels;
    if (!cfg.labels_path.empty()) {
        labels = io::read_labels(fs::path(cfg.labels_path));
        if (labels->size() != dm.size()) throw DimensionMismatch("mds labels", dm.size(), labels->size());
    }
    const Matrix coords = classical_mds(dm, dim);
    std::ostringstream csv;
    io::write_coordinates_csv(csv, coords, labels ? &*labels : nullptr);
    json meta = provenance("mds", args);
    meta["dim"] = dim;
    meta["distances"] = distances;

    Outputs out;
    out.write(cfg.out_path, csv.str());
    out.write(sidecar(cfg.out_path), dump(meta));
    out.commit();
    return kOk;
}

struct TransformOptions {
    std::string lattice;
    std::string idx_images;
    std::string idx_labels;
    std::size_t limit = 0;
};

inline std::pair<std::size_t, std::size_t> parse_lattice(const std::string& s) {
    const auto x = s.find('x');
    if (x == std::string::npos) throw InvalidArgument("--lattice expects ROWSxCOLS");
    const long long r = io::parse_integer(s.substr(0, x), "--lattice rows");
    const long long c = io::parse_integer(s.substr(x + 1), "--lattice cols");
    if (r < 1 || c < 1) throw InvalidArgument("--lattice dimensions must be positive");
    return {static_cast<std::size_t>(r), static_cast<std::size_t>(c)};
}

inline int cmd_transform(const RunConfig& cfg, const TransformOptions& to, const std::vector<std::string>& args) {
    cfg.validate();
    if (cfg.out_path.empty()) throw InvalidArgument("--out is required");
    Graph g;
    std::string graph_source;
    if (!to.lattice.empty()) {
        const auto [r, c] = parse_lattice(to.lattice);
        g = lattice_graph(r, c);
        graph_source = "lattice:" + to.lattice;
    } else if (!cfg.graph_path.empty()) {
        g = io::read_graph(fs::path(cfg.graph_path));
        graph_source = cfg.graph_path;
    } else {
        throw InvalidArgument("need --lattice or --graph");
    }

    SignalSet set;
    if (!to.idx_images.empty()) {
        ImageSet images = load_idx_images(to.idx_images);
        if (!to.idx_labels.empty()) attach_labels(images, load_idx_labels(to.idx_labels));
        const std::size_t count = to.limit ? std::min(to.limit, images.count) : images.count;
        set.n = images.pixels_per_image();
        if (images.labels) set.labels.emplace();
        for (std::size_t i = 0; i < count; ++i) {
            set.signals.push_back(image_signal(images, i));
            if (images.labels) set.labels->push_back((*images.labels)[i]);
        }
    } else if (!cfg.signals_path.empty()) {
        set = io::read_signals_csv(fs::path(cfg.signals_path), cfg.labelled);
    } else {
        throw InvalidArgument("need --signals or --idx-images");
    }
    if (set.count() > 0 && set.n != g.node_count())
        throw DimensionMismatch("signal length vs graph nodes", g.node_count(), set.n);
    set.n = g.node_count();

    const DiffusionOperator op = make_operator(g, cfg.alpha, Precompute::resolvent_only);
    SignalSet diffused{set.n, std::vector<Vector>(set.count()), set.labels};
    parallel_for(set.count(), cfg.threads,
                 [&](std::size_t i) { diffused.signals[i] = feature_transform(op, set.signals[i]); });

    std::ostringstream csv;
    io::write_signals_csv(csv, diffused, diffused.labels.has_value());
    json meta = provenance("transform", args);
    meta["alpha"] = cfg.alpha;
    meta["graph"] = graph_source;
    meta["signals"] = diffused.count();
    meta["labelled"] = diffused.labels.has_value();

    Outputs out;
    out.write(cfg.out_path, csv.str());
    out.write(sidecar(cfg.out_path), dump(meta));
    out.commit();
    return kOk;
}

inline int cmd_fixture(const std::string& name, const std::string& out_dir, const std::vector<std::string>& args) {
    if (name != "fig1") throw InvalidArgument("unknown fixture '" + name + "'");
    if (out_dir.empty()) throw InvalidArgument("--out-dir is required");
    const Figure1 f = figure1_graph();
    std::ostringstream graph_txt, signals_csv;
    io::write_graph(graph_txt, f.graph);
    io::write_signals_csv(signals_csv, SignalSet{10, {f.r, f.g, f.y}, std::nullopt}, false);
    json meta = provenance("fixture", args);
    meta["name"] = name;
    meta["signals"] = {"r", "g", "y"};

    const fs::path dir(out_dir);
    Outputs out;
    out.write(dir / "fig1_graph.txt", graph_txt.str());
    out.write(dir / "fig1_signals.csv", signals_csv.str());
    out.write(dir / "fig1.json", dump(meta));
    out.commit();
    return kOk;
}

}  // namespace detail

/// Parses `args` (without the program name) and runs one subcommand.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"Superposition and diffusion distances between graph signals", "heatdist"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    RunConfig cfg;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--alpha", cfg.alpha, "diffusion constant");
        sub->add_option("--p", cfg.p, "input norm: 1, 2 or inf");
        sub->add_option("--quad-order", cfg.quad_order, "Gauss-Laguerre order");
        sub->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
    };
    auto add_inputs = [&](CLI::App* sub) {
        sub->add_option("--fixture", cfg.fixture, "built-in problem (fig1)");
        sub->add_option("--graph", cfg.graph_path, "graph text file");
        sub->add_option("--signals", cfg.signals_path, "signals CSV");
        sub->add_flag("--labelled", cfg.labelled, "signals CSV carries a final label column");
    };

    auto* distance = app.add_subcommand("distance", "pairwise distance matrix");
    add_common(distance);
    add_inputs(distance);
    distance->add_option("--metric", cfg.metric, "input | diff | sps");
    distance->add_option("--out", cfg.out_path, "distance CSV");

    double delta = 0.05;
    std::size_t reps = 1000;
    std::string pair = "0,1";
    auto* stability = app.add_subcommand("stability", "edge-weight perturbation experiment");
    add_common(stability);
    add_inputs(stability);
    stability->add_option("--delta", delta, "weights scaled by Uniform[1-delta, 1+delta]");
    stability->add_option("--reps", reps, "repetitions");
    stability->add_option("--pair", pair, "signal indices i,j");
    stability->add_option("--seed", cfg.seed, "RNG seed");
    stability->add_option("--out", cfg.out_path, "samples CSV");

    detail::SynthOptions so;
    auto* synth = app.add_subcommand("synth", "clustered random graph and signals");
    synth->add_option("--sizes", so.sizes, "cluster sizes, comma separated");
    synth->add_option("--p-intra", so.p_intra, "intra-cluster edge probability");
    synth->add_option("--w-lo", so.w_lo, "lower intra-cluster weight");
    synth->add_option("--w-hi", so.w_hi, "upper intra-cluster weight");
    synth->add_option("--bridges", so.bridges, "unit edges between clusters");
    synth->add_option("--per-type", so.per_type, "signals per cluster");
    synth->add_option("--seed", cfg.seed, "RNG seed");
    synth->add_option("--out-dir", so.out_dir, "output directory");

    std::vector<std::string> distance_paths;
    std::string ks = "1,3,5,7";
    auto* knn = app.add_subcommand("knn", "leave-one-out k-NN accuracy");
    knn->add_option("--distances", distance_paths, "distance CSV (repeatable)");
    knn->add_option("--labels", cfg.labels_path, "labels file");
    knn->add_option("--k", ks, "neighbour counts, comma separated");
    knn->add_option("--out", cfg.out_path, "accuracy JSON");

    std::string mds_distances;
    std::size_t dim = 2;
    auto* mds = app.add_subcommand("mds", "classical multidimensional scaling");
    mds->add_option("--distances", mds_distances, "distance CSV");
    mds->add_option("--labels", cfg.labels_path, "optional labels file");
    mds->add_option("--dim", dim, "embedding dimension");
    mds->add_option("--out", cfg.out_path, "coordinates CSV");

    detail::TransformOptions to;
    double transform_alpha = 0.8;
    auto* transform = app.add_subcommand("transform", "diffused features (I + alpha L)^-1 v");
    transform->add_option("--alpha", transform_alpha, "diffusion constant");
    transform->add_option("--threads", cfg.threads, "worker threads (0 = all cores)");
    transform->add_option("--graph", cfg.graph_path, "graph text file");
    transform->add_option("--lattice", to.lattice, "pixel lattice ROWSxCOLS");
    transform->add_option("--signals", cfg.signals_path, "signals CSV");
    transform->add_flag("--labelled", cfg.labelled, "signals CSV carries a final label column");
    transform->add_option("--idx-images", to.idx_images, "IDX image file");
    transform->add_option("--idx-labels", to.idx_labels, "IDX label file");
    transform->add_option("--limit", to.limit, "use only the first N images");
    transform->add_option("--out", cfg.out_path, "diffused signals CSV");

    std::string fixture_name = "fig1";
    std::string fixture_dir;
    auto* fixture = app.add_subcommand("fixture", "write a built-in example problem");
    fixture->add_option("--name", fixture_name, "fixture name (fig1)");
    fixture->add_option("--out-dir", fixture_dir, "output directory");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kParseError;
    }

    try {
        if (*distance) return detail::cmd_distance(cfg, args);
        if (*stability) return detail::cmd_stability(cfg, delta, reps, pair, args);
        if (*synth) return detail::cmd_synth(cfg, so, args);
        if (*knn) return detail::cmd_knn(cfg, distance_paths, ks, args);
        if (*mds) return detail::cmd_mds(cfg, mds_distances, dim, args);
        if (*transform) {
            cfg.alpha = transform_alpha;
            return detail::cmd_transform(cfg, to, args);
        }
        if (*fixture) return detail::cmd_fixture(fixture_name, fixture_dir, args);
    } catch (const DimensionMismatch& e) {
        err << "error: " << e.what() << '\n';
        return kDimensionMismatch;
    } catch (const NumericError& e) {
        err << "error: " << e.what() << '\n';
        return kNumericFailure;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const InvalidArgument& e) {
        err << "error: " << e.what() << '\n';
        return kParseError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kFailure;
}

}  // namespace heatdist::cli
