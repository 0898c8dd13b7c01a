// Acceptance suite: one line per criterion, nonzero exit if any criterion fails.
//
// Digit criterion: set HEATDIST_MNIST_DIR to a directory holding an IDX image
// file and its label file (train-*, t10k-* or plain images-idx3-ubyte /
// labels-idx1-ubyte). Without it the criterion is reported as SKIP.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "heatdist/heatdist.hpp"
#include "test_support.hpp"

using namespace heatdist;
namespace fs = std::filesystem;

namespace {

enum class Status { pass, fail, skip };

struct Outcome {
    Status status = Status::pass;
    std::string detail;
};

/// Accumulates failures of one criterion; keeps the first few messages.
class Checker {
public:
    void require(bool ok, const std::string& what) {
        ++checks_;
        if (ok) return;
        ++failures_;
        if (messages_.size() < 5) messages_.push_back(what);
    }
    void note(const std::string& s) { notes_.push_back(s); }

    Outcome outcome() const {
        std::ostringstream os;
        os << checks_ << " checks, " << failures_ << " failures";
        for (const auto& n : notes_) os << "; " << n;
        for (const auto& m : messages_) os << "\n        - " << m;
        return {failures_ == 0 ? Status::pass : Status::fail, os.str()};
    }

private:
    long checks_ = 0;
    long failures_ = 0;
    std::vector<std::string> messages_;
    std::vector<std::string> notes_;
};

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

constexpr std::array kNorms = {Norm::l1, Norm::l2, Norm::linf};

const QuadratureRule& rule64() {
    static const QuadratureRule q = gauss_laguerre(64);
    return q;
}

/// Random weighted graph with n in [2, max_n].
Graph random_instance_graph(Rng& rng, std::size_t max_n) {
    const std::size_t n = 2 + rng.index(max_n - 1);
    return fixtures::random_graph(n, rng.uniform(0.05, 0.6), 0.1, 2.0, rng);
}

// 1. example-graph diffusion distances ----------------------------------------------------
Outcome figure1_diffusion() {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    const Figure1 f = figure1_graph();
    const DiffusionOperator op = make_operator(f.graph, 1.0);
    const double gy = diffusion_distance(op, f.g, f.y, Norm::l2);
    const double rg = diffusion_distance(op, f.r, f.g, Norm::l2);
    const double ry = diffusion_distance(op, f.r, f.y, Norm::l2);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    c.require(std::abs(gy - 0.418) <= 1e-3, "d(g,y) = " + fmt(gy));
    c.require(std::abs(rg - 0.664) <= 1e-3, "d(r,g) = " + fmt(rg));
    c.require(std::abs(ry - 0.698) <= 1e-3, "d(r,y) = " + fmt(ry));
    c.require(ms < 10.0, "runtime " + fmt(ms) + " ms");
    c.note("d(g,y)=" + fmt(gy) + " d(r,g)=" + fmt(rg) + " d(r,y)=" + fmt(ry) + ", " + fmt(ms) + " ms");
    return c.outcome();
}

// 2. example-graph superposition distances ----------------------------------------------
Outcome figure1_superposition() {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    const Figure1 f = figure1_graph();
    const DiffusionOperator op = make_operator(f.graph, 1.0);
    const QuadratureRule quad = gauss_laguerre(64);
    struct Case {
        const char* name;
        const Vector* a;
        const Vector* b;
        double expected;
    };
    const Case cases[] = {{"r,g", &f.r, &f.g, 0.701}, {"r,y", &f.r, &f.y, 0.742}, {"g,y", &f.g, &f.y, 0.456}};
    std::string values;
    for (const auto& k : cases) {
        const double gl = superposition_distance(op, *k.a, *k.b, Norm::l2, quad);
        const double oracle = superposition_oracle(op, *k.a, *k.b, Norm::l2, {1e-6});
        c.require(std::abs(gl - k.expected) <= 5e-3, std::string("d(") + k.name + ") = " + fmt(gl));
        c.require(std::abs(gl - oracle) <= 1e-4, std::string("quadrature vs oracle for ") + k.name + ": " +
                                                     fmt(gl) + " vs " + fmt(oracle));
        values += std::string(" d(") + k.name + ")=" + fmt(gl);
    }
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    c.require(ms < 100.0, "runtime " + fmt(ms) + " ms");
    c.note(values.substr(1) + ", " + fmt(ms) + " ms");
    return c.outcome();
}

// 3. superposition >= diffusion ------------------------------------------------------
Outcome lower_bound() {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    Rng rng(3003);
    double worst = 1e300;
    std::vector<std::tuple<DiffusionOperator, Vector, Vector, Norm>> instances;
    for (int trial = 0; trial < 1000; ++trial) {
        const Graph g = random_instance_graph(rng, 30);
        const DiffusionOperator op = make_operator(g, rng.uniform(0.1, 2.0));
        const Vector r = fixtures::random_vector(g.node_count(), rng), s = fixtures::random_vector(g.node_count(), rng);
        const Norm p = kNorms[static_cast<std::size_t>(trial) % 3];
        const double gap = superposition_distance(op, r, s, p, rule64()) - diffusion_distance(op, r, s, p);
        worst = std::min(worst, gap);
        c.require(gap >= -1e-8, "trial " + std::to_string(trial) + ": gap " + fmt(gap) + ", alpha*lambda_max " +
                                    fmt(op.alpha() * op.spectrum().values.back()));
        if (gap < -1e-8) instances.emplace_back(op, r, s, p);
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(sec < 30.0, "runtime " + fmt(sec) + " s");
    c.note("min(sps - diff) = " + fmt(worst) + " at quad_order 64, " + fmt(sec) + " s");
    if (!instances.empty()) {
        // diagnostics only: the same instances with the oracle integrator and the largest rule
        const QuadratureRule q256 = gauss_laguerre(kMaxQuadratureOrder);
        int oracle_ok = 0, q256_ok = 0;
        for (const auto& [op, r, s, p] : instances) {
            const double diff = diffusion_distance(op, r, s, p);
            if (superposition_oracle(op, r, s, p, {1e-6}) >= diff - 1e-6) ++oracle_ok;
            if (superposition_distance(op, r, s, p, q256) >= diff - 1e-8) ++q256_ok;
        }
        c.note("failing instances holding with the oracle: " + std::to_string(oracle_ok) + "/" +
               std::to_string(instances.size()) + ", at quad_order 256: " + std::to_string(q256_ok) + "/" +
               std::to_string(instances.size()));
    }
    return c.outcome();
}

// 4. metric and norm axioms ------------------------------------------------------------
Outcome axioms() {
    Checker c;
    Rng rng(4004);
    using DistFn = std::function<double(const DiffusionOperator&, const Vector&, const Vector&, Norm)>;
    const std::array<std::pair<const char*, DistFn>, 2> metrics = {
        std::pair<const char*, DistFn>{"diffusion",
                                       [](const auto& op, const auto& a, const auto& b, Norm p) {
                                           return diffusion_distance(op, a, b, p);
                                       }},
        std::pair<const char*, DistFn>{"superposition", [](const auto& op, const auto& a, const auto& b, Norm p) {
                                           return superposition_distance(op, a, b, p, rule64());
                                       }}};
    for (int trial = 0; trial < 1000; ++trial) {
        const Graph g = random_instance_graph(rng, 30);
        const std::size_t n = g.node_count();
        const DiffusionOperator op = make_operator(g, rng.uniform(0.1, 2.0));
        const Vector r = fixtures::random_vector(n, rng), s = fixtures::random_vector(n, rng),
                     t = fixtures::random_vector(n, rng);
        const double beta = rng.uniform(-5.0, 5.0);
        Vector bv = r, sum_rs(n);
        for (auto& x : bv) x *= beta;
        for (std::size_t i = 0; i < n; ++i) sum_rs[i] = r[i] + s[i];
        const Vector zero(n, 0.0);
        const Norm p = kNorms[static_cast<std::size_t>(trial) % 3];
        const std::string tag = " (trial " + std::to_string(trial) + ", p=" + to_string(p) + ")";
        for (const auto& [name, d] : metrics) {
            const std::string where = std::string(name) + tag;
            const double rs = d(op, r, s, p), sr = d(op, s, r, p), rt = d(op, r, t, p), st = d(op, s, t, p);
            c.require(rs == sr, "symmetry " + where);
            c.require(d(op, r, r, p) == 0.0, "identity " + where);
            if (vector_pnorm(subtract(r, s), p) >= 1e-3) c.require(rs >= 1e-12, "separation " + where);
            c.require(rt <= rs + st + 1e-9, "triangle " + where);
            // norms are distances to the zero signal
            const double nr = d(op, r, zero, p), ns = d(op, s, zero, p);
            const double nbv = d(op, bv, zero, p);
            c.require(std::abs(nbv - std::abs(beta) * nr) <= 1e-10 * std::abs(beta) * nr,
                      "homogeneity " + where + ": " + fmt(nbv) + " vs " + fmt(std::abs(beta) * nr));
            c.require(d(op, sum_rs, zero, p) <= nr + ns + 1e-9, "subadditivity " + where);
        }
    }
    return c.outcome();
}

// 5. stability under weight perturbation ----------------------------------------------------
Outcome stability() {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    const Figure1 f = figure1_graph();
    StabilityConfig cfg;
    cfg.perturbation = {0.05, 0};
    cfg.reps = 1000;
    cfg.p = Norm::l2;
    const auto samples = stability_experiment(f.graph, f.r, f.g, cfg);
    double max_sps = 0.0, max_diff = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        const std::string rep = "rep " + std::to_string(i);
        max_sps = std::max(max_sps, s.norm_dev_sps);
        max_diff = std::max(max_diff, s.norm_dev_diff);
        c.require(s.e_norm > 0.0, rep + ": zero perturbation");
        c.require(s.norm_dev_sps < 2.0, rep + ": normalized sps deviation " + fmt(s.norm_dev_sps));
        c.require(s.norm_dev_diff < 2.0, rep + ": normalized diff deviation " + fmt(s.norm_dev_diff));
        c.require(s.dev_sps <= 2.0 * s.gamma * s.e_norm + 1e-6, rep + ": sps bound");
        c.require(s.e_norm < 1.0, rep + ": ||E|| >= 1, diffusion bound inapplicable");
        if (s.e_norm < 1.0)
            c.require(s.dev_diff <= 2.0 * s.gamma * s.e_norm / (1.0 - s.e_norm) + 1e-8, rep + ": diff bound");
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(sec < 60.0, "runtime " + fmt(sec) + " s");
    c.note("max normalized deviation sps=" + fmt(max_sps) + " diff=" + fmt(max_diff) + ", " + fmt(sec) + " s");
    return c.outcome();
}

// 6. doubly stochastic heat kernel and resolvent -------------------------------------------
Outcome doubly_stochastic() {
    Checker c;
    Rng rng(6006);
    auto check = [&](const Matrix& m, const std::string& what) {
        const std::size_t n = m.rows();
        double min_entry = 1e300, worst_sum = 0.0, asym = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double rs = 0.0, cs = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                min_entry = std::min(min_entry, m(i, j));
                rs += m(i, j);
                cs += m(j, i);
                asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
            }
            worst_sum = std::max({worst_sum, std::abs(rs - 1.0), std::abs(cs - 1.0)});
        }
        c.require(min_entry >= -1e-10, what + ": negative entry " + fmt(min_entry));
        c.require(worst_sum <= 1e-9, what + ": row/column sum off by " + fmt(worst_sum));
        c.require(asym <= 1e-12, what + ": asymmetry " + fmt(asym));
        const SymMatrix sym = SymMatrix::from_upper(m);
        for (Norm p : kNorms) {
            const double norm = matrix_pnorm(sym, p);
            c.require(std::abs(norm - 1.0) <= 1e-9, what + ": ||.||_" + to_string(p) + " = " + fmt(norm));
        }
    };
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.index(40);
        const Graph g = fixtures::random_graph(n, rng.uniform(0.05, 0.6), 0.1, 3.0, rng);
        const DiffusionOperator op = make_operator(g, 1.0);
        const std::string tag = "trial " + std::to_string(trial);
        for (double s : {0.1, 1.0, 10.0}) {
            Matrix heat(n, n), resolvent(n, n);
            for (std::size_t j = 0; j < n; ++j) {
                Vector e(n, 0.0);
                e[j] = 1.0;
                const Vector col = expm_action(op.spectrum(), s, e);
                for (std::size_t i = 0; i < n; ++i) heat(i, j) = col[i];
                if (s == 0.1) {
                    const Vector rcol = feature_transform(op, e);
                    for (std::size_t i = 0; i < n; ++i) resolvent(i, j) = rcol[i];
                }
            }
            check(heat, tag + " exp(-" + fmt(s) + " L)");
            if (s == 0.1) check(resolvent, tag + " (I+L)^-1");
        }
    }
    return c.outcome();
}

// 7. three-cluster classification -----------------------------------------------------------
struct ClusterAccuracy {
    double input = 0.0;
    double diffusion = 0.0;
    double superposition = 0.0;
};

ClusterAccuracy cluster_run(std::uint64_t seed) {
    Rng graph_rng = Rng::substream(seed, 0), signal_rng = Rng::substream(seed, 1);
    const ClusteredGraph cg = three_cluster_graph({}, graph_rng);
    const SignalSet set = cluster_signals(cg.graph, cg.clusters, 10, signal_rng);
    const DiffusionOperator op = make_operator(cg.graph, 1.0);
    auto acc = [&](Metric m) {
        return knn_loocv(pairwise_distances(op, set, m, Norm::l2, rule64()), *set.labels, 1).accuracy;
    };
    return {acc(Metric::input), acc(Metric::diffusion), acc(Metric::superposition)};
}

Outcome three_clusters() {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    const ClusterAccuracy pinned = cluster_run(0);
    c.require(pinned.diffusion == 1.0, "default seed diffusion 1-NN accuracy " + fmt(pinned.diffusion));
    c.require(pinned.superposition == 1.0, "default seed superposition 1-NN accuracy " + fmt(pinned.superposition));
    c.require(pinned.diffusion >= pinned.input, "default seed diffusion below l2");
    double mean_diff = 0.0, mean_input = 0.0, mean_sps = 0.0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        const ClusterAccuracy a = cluster_run(seed);
        mean_diff += a.diffusion / 50.0;
        mean_input += a.input / 50.0;
        mean_sps += a.superposition / 50.0;
    }
    c.require(mean_diff > mean_input, "mean diffusion " + fmt(mean_diff) + " <= mean l2 " + fmt(mean_input));
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.require(sec < 120.0, "runtime " + fmt(sec) + " s");
    c.note("seed 0: l2=" + fmt(pinned.input) + " diff=" + fmt(pinned.diffusion) + " sps=" + fmt(pinned.superposition));
    c.note("50-seed means: l2=" + fmt(mean_input) + " diff=" + fmt(mean_diff) + " sps=" + fmt(mean_sps));
    return c.outcome();
}

// 8. diffusion dynamics ---------------------------------------------------------------------
Outcome dynamics() {
    Checker c;
    Rng rng(8008);
    int connected = 0;
    for (int trial = 0; trial < 200; ++trial) {
        const Graph g = random_instance_graph(rng, 30);
        const std::size_t n = g.node_count();
        const double alpha = rng.uniform(0.1, 2.0);
        const DiffusionOperator op = make_operator(g, alpha);
        const SymMatrix a = adjacency(g);
        const Vector r = fixtures::random_vector(n, rng);
        const std::string tag = "trial " + std::to_string(trial);

        const double h = 1e-6;
        const Vector rh = diffuse_signal(op, r, h), r2h = diffuse_signal(op, r, 2 * h);
        for (std::size_t i = 0; i < n; ++i) {
            double rate = 0.0;
            for (std::size_t k = 0; k < n; ++k) rate += alpha * a(i, k) * (r[k] - r[i]);
            // second-order one-sided difference
            c.require(std::abs((4 * rh[i] - 3 * r[i] - r2h[i]) / (2 * h) - rate) <= 1e-4, tag + ": derivative at node " + std::to_string(i));
        }

        const double t1 = rng.uniform(0.0, 3.0), t2 = rng.uniform(0.0, 3.0);
        const Vector both = diffuse_signal(op, r, t1 + t2);
        c.require(std::abs(sum(both) - sum(r)) <= 1e-9, tag + ": heat not conserved");
        c.require(fixtures::max_abs_diff(diffuse_signal(op, diffuse_signal(op, r, t1), t2), both) <= 1e-9,
                  tag + ": semigroup");

        if (is_connected(g)) {
            ++connected;
            const Vector late = diffuse_signal(op, r, 100.0 / (alpha * op.spectrum().values[1]));
            const auto [lo, hi] = std::minmax_element(late.begin(), late.end());
            c.require(*hi - *lo <= 1e-6 * vector_pnorm(r, Norm::linf), tag + ": isothermal spread " + fmt(*hi - *lo));
        }
    }
    c.require(connected >= 20, "too few connected instances for the isothermal check");
    c.note(std::to_string(connected) + " connected instances");
    return c.outcome();
}

// 9. digit images ------------------------------------------------------------------------
std::optional<std::pair<fs::path, fs::path>> find_digits() {
    const char* env = std::getenv("HEATDIST_MNIST_DIR");
    if (!env || !*env) return std::nullopt;
    const fs::path dir(env);
    const std::pair<const char*, const char*> names[] = {{"t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"},
                                                         {"train-images-idx3-ubyte", "train-labels-idx1-ubyte"},
                                                         {"images-idx3-ubyte", "labels-idx1-ubyte"}};
    for (const auto& [img, lbl] : names)
        if (fs::exists(dir / img) && fs::exists(dir / lbl)) return std::make_pair(dir / img, dir / lbl);
    return std::nullopt;
}

Outcome digits() {
    const auto files = find_digits();
    if (!files) return {Status::skip, "no digit data (set HEATDIST_MNIST_DIR)"};
    Checker c;
    ImageSet images = load_idx_images(files->first);
    attach_labels(images, load_idx_labels(files->second));
    c.require(images.rows == 28 && images.cols == 28, "images are not 28x28");
    if (images.rows != 28 || images.cols != 28 || images.count < 200) return c.outcome();

    // 200 distinct images, partial Fisher-Yates with a pinned seed
    Rng rng(9009);
    std::vector<std::size_t> idx(images.count);
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    for (std::size_t i = 0; i < 200; ++i) std::swap(idx[i], idx[i + rng.index(idx.size() - i)]);
    idx.resize(200);

    const DiffusionOperator op = make_operator(lattice_graph(28, 28), 0.8, Precompute::resolvent_only);
    std::vector<Vector> raw, diffused;
    std::vector<int> labels;
    for (std::size_t i : idx) {
        raw.push_back(image_signal(images, i));
        diffused.push_back(feature_transform(op, raw.back()));
        labels.push_back((*images.labels)[i]);
    }
    auto ratio = [&](const std::vector<Vector>& xs) {
        double same = 0.0, all = 0.0;
        std::size_t n_same = 0, n_all = 0;
        for (std::size_t i = 0; i < xs.size(); ++i)
            for (std::size_t j = i + 1; j < xs.size(); ++j) {
                const double d = vector_pnorm(subtract(xs[i], xs[j]), Norm::l2);
                all += d;
                ++n_all;
                if (labels[i] == labels[j]) {
                    same += d;
                    ++n_same;
                }
            }
        return (same / static_cast<double>(n_same)) / (all / static_cast<double>(n_all));
    };
    const double before = ratio(raw), after = ratio(diffused);
    c.require(after < before, "same-class/all-pairs ratio did not decrease: " + fmt(before) + " -> " + fmt(after));
    c.note("ratio " + fmt(before) + " -> " + fmt(after) + " (" + files->first.filename().string() + ")");
    return c.outcome();
}

}  // namespace

int main() {
    struct Criterion {
        const char* id;
        const char* title;
        Outcome (*run)();
    };
    const Criterion criteria[] = {
        {"AC1", "example graph diffusion distances", figure1_diffusion},
        {"AC2", "example graph superposition distances + oracle", figure1_superposition},
        {"AC3", "superposition >= diffusion on 1000 instances", lower_bound},
        {"AC4", "metric and norm axioms on 1000 triples", axioms},
        {"AC5", "stability under 5% weight perturbation", stability},
        {"AC6", "doubly stochastic heat kernel and resolvent", doubly_stochastic},
        {"AC7", "three-cluster 1-NN classification", three_clusters},
        {"AC8", "diffusion dynamics", dynamics},
        {"AC9", "digit feature transform", digits},
    };
    int failed = 0;
    for (const auto& cr : criteria) {
        Outcome o;
        try {
            o = cr.run();
        } catch (const std::exception& e) {
            o = {Status::fail, std::string("exception: ") + e.what()};
        }
        const char* tag = o.status == Status::pass ? "PASS" : o.status == Status::skip ? "SKIP" : "FAIL";
        std::printf("[%s] %s %s: %s\n", tag, cr.id, cr.title, o.detail.c_str());
        std::fflush(stdout);
        if (o.status == Status::fail) ++failed;
    }
    std::printf("%d criteria failed\n", failed);
    return failed == 0 ? 0 : 1;
}
