#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heatdist/diffuse.hpp"
#include "heatdist/error.hpp"
#include "heatdist/graph.hpp"
#include "heatdist/linalg.hpp"
#include "heatdist/matrix.hpp"
#include "heatdist/parallel.hpp"
#include "heatdist/random.hpp"

namespace heatdist {

enum class Metric { input, diffusion, superposition };

inline std::string to_string(Metric m) {
    switch (m) {
        case Metric::input: return "input";
        case Metric::diffusion: return "diffusion";
        case Metric::superposition: return "superposition";
    }
    return "?";
}

/// Accepts input|l2|diff|diffusion|sps|superposition.
inline Metric parse_metric(std::string_view s) {
    if (s == "input" || s == "l2") return Metric::input;
    if (s == "diff" || s == "diffusion") return Metric::diffusion;
    if (s == "sps" || s == "superposition") return Metric::superposition;
    throw InvalidArgument("unknown metric '" + std::string(s) + "'");
}

struct DistanceMatrix {
    SymMatrix d;
    Metric metric = Metric::diffusion;
    Norm p = Norm::l2;
    double alpha = 1.0;

    std::size_t size() const noexcept { return d.size(); }
    double operator()(std::size_t i, std::size_t j) const { return d(i, j); }
};

/// Distance between two signals under `metric` on a shared operator.
inline double signal_distance(const DiffusionOperator& op, std::span<const double> r, std::span<const double> s,
                              Metric metric, Norm p, const QuadratureRule& quad) {
    switch (metric) {
        case Metric::input: return vector_pnorm(subtract(r, s), p);
        case Metric::diffusion: return diffusion_distance(op, r, s, p);
        case Metric::superposition: return superposition_distance(op, r, s, p, quad);
    }
    throw InvalidArgument("unknown metric");
}

/// All pairwise distances; the upper triangle is filled in parallel.
inline DistanceMatrix pairwise_distances(const DiffusionOperator& op, const SignalSet& set, Metric metric, Norm p,
                                         const QuadratureRule& quad, std::size_t threads = 0) {
    set.validate();
    if (set.n != op.size()) throw DimensionMismatch("pairwise_distances: signal length", op.size(), set.n);
    const std::size_t m = set.count();
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    pairs.reserve(m * (m - (m > 0 ? 1 : 0)) / 2);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) pairs.emplace_back(i, j);
    std::vector<double> values(pairs.size());
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        const auto [i, j] = pairs[k];
        values[k] = signal_distance(op, set.signals[i], set.signals[j], metric, p, quad);
    });
    DistanceMatrix dm{SymMatrix(m), metric, p, op.alpha()};
    for (std::size_t k = 0; k < pairs.size(); ++k) dm.d.set(pairs[k].first, pairs[k].second, values[k]);
    return dm;
}

// --- k-NN ----------------------------------------------------------------------

struct KnnReport {
    std::size_t k = 1;
    double accuracy = 0.0;
    std::vector<int> classes;                   ///< sorted distinct labels
    std::vector<double> class_accuracy;         ///< aligned with classes
    std::vector<std::vector<std::size_t>> confusion;  ///< [true class][predicted class]
    std::vector<int> predictions;               ///< per held-out point
};

/// Leave-one-out k-nearest-neighbour classification over a distance matrix.
///
/// Neighbours are ranked by distance, ties going to the smaller index. The
/// predicted label is the most frequent among the k nearest; when several
/// labels tie, the one held by the nearest neighbour among them wins.
inline KnnReport knn_loocv(const SymMatrix& dm, std::span<const int> labels, std::size_t k) {
    const std::size_t n = dm.size();
    if (labels.size() != n) throw DimensionMismatch("knn_loocv: labels", n, labels.size());
    if (k < 1 || k >= n) throw InvalidArgument("knn_loocv: k must satisfy 1 <= k < n");

    KnnReport rep;
    rep.k = k;
    rep.classes.assign(labels.begin(), labels.end());
    std::sort(rep.classes.begin(), rep.classes.end());
    rep.classes.erase(std::unique(rep.classes.begin(), rep.classes.end()), rep.classes.end());
    auto class_index = [&](int label) {
        return static_cast<std::size_t>(std::lower_bound(rep.classes.begin(), rep.classes.end(), label) -
                                        rep.classes.begin());
    };
    const std::size_t c = rep.classes.size();
    rep.confusion.assign(c, std::vector<std::size_t>(c, 0));
    rep.predictions.resize(n);

    std::vector<std::size_t> order;
    std::vector<std::size_t> votes(c);
    std::vector<std::size_t> first_rank(c);
    for (std::size_t i = 0; i < n; ++i) {
        order.clear();
        for (std::size_t j = 0; j < n; ++j)
            if (j != i) order.push_back(j);
        std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                          [&](std::size_t a, std::size_t b) {
                              if (dm(i, a) != dm(i, b)) return dm(i, a) < dm(i, b);
                              return a < b;
                          });
        std::fill(votes.begin(), votes.end(), 0);
        std::fill(first_rank.begin(), first_rank.end(), n);
        for (std::size_t rank = 0; rank < k; ++rank) {
            const std::size_t ci = class_index(labels[order[rank]]);
            ++votes[ci];
            first_rank[ci] = std::min(first_rank[ci], rank);
        }
        std::size_t best = 0;
        for (std::size_t ci = 1; ci < c; ++ci)
            if (votes[ci] > votes[best] || (votes[ci] == votes[best] && first_rank[ci] < first_rank[best])) best = ci;
        rep.predictions[i] = rep.classes[best];
        ++rep.confusion[class_index(labels[i])][best];
    }

    std::size_t correct = 0;
    rep.class_accuracy.resize(c);
    for (std::size_t ci = 0; ci < c; ++ci) {
        const std::size_t row = std::accumulate(rep.confusion[ci].begin(), rep.confusion[ci].end(), std::size_t{0});
        correct += rep.confusion[ci][ci];
        rep.class_accuracy[ci] = row ? static_cast<double>(rep.confusion[ci][ci]) / static_cast<double>(row) : 0.0;
    }
    rep.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return rep;
}

inline KnnReport knn_loocv(const DistanceMatrix& dm, std::span<const int> labels, std::size_t k) {
    return knn_loocv(dm.d, labels, k);
}

// --- classical MDS ---------------------------------------------------------------

/// Classical (Torgerson) scaling: double-centre the squared distances and keep
/// the top `dim` eigenpairs. Negative eigenvalues contribute zero columns.
/// Each axis is flipped so that its largest-magnitude entry is positive.
inline Matrix classical_mds(const SymMatrix& dm, std::size_t dim = 2) {
    const std::size_t n = dm.size();
    if (dim < 1) throw InvalidArgument("classical_mds: dim must be >= 1");
    if (dim > n) throw InvalidArgument("classical_mds: dim exceeds the number of points");

    const double inv_n = 1.0 / static_cast<double>(n);
    std::vector<double> row_mean(n, 0.0);
    double grand = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) row_mean[i] += dm(i, j) * dm(i, j);
        grand += row_mean[i];
        row_mean[i] *= inv_n;
    }
    grand *= inv_n * inv_n;
    SymMatrix b(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j)
            b.set(i, j, -0.5 * (dm(i, j) * dm(i, j) - row_mean[i] - row_mean[j] + grand));

    const EigenPair e = sym_eigen(b);
    Matrix coords(n, dim);
    for (std::size_t axis = 0; axis < dim; ++axis) {
        const std::size_t k = n - 1 - axis;  // descending
        const double lambda = e.values[k];
        if (!(lambda > 0.0)) continue;
        const double scale = std::sqrt(lambda);
        std::size_t arg = 0;
        for (std::size_t i = 1; i < n; ++i)
            if (std::abs(e.vectors(i, k)) > std::abs(e.vectors(arg, k))) arg = i;
        const double sign = e.vectors(arg, k) < 0.0 ? -1.0 : 1.0;
        for (std::size_t i = 0; i < n; ++i) coords(i, axis) = sign * scale * e.vectors(i, k);
    }
    return coords;
}

inline Matrix classical_mds(const DistanceMatrix& dm, std::size_t dim = 2) { return classical_mds(dm.d, dim); }

// --- stability experiment ---------------------------------------------------------

struct PerturbationSample {
    double e_norm = 0.0;   ///< ||E||_p, E = L' - L
    double epsilon = 0.0;  ///< ||E||_p / ||L||_p
    double gamma = 0.0;    ///< max(||r||_p, ||s||_p)
    double dev_diff = 0.0;
    double dev_sps = 0.0;
    double norm_dev_diff = 0.0;  ///< dev_diff / e_norm (0 when e_norm == 0)
    double norm_dev_sps = 0.0;
};

struct StabilityConfig {
    PerturbationConfig perturbation;
    std::size_t reps = 1000;
    Norm p = Norm::l2;
    double alpha = 1.0;
    std::size_t quad_order = kDefaultQuadratureOrder;
    std::size_t threads = 0;
};

/// Repeatedly perturbs the edge weights and records how far both distances
/// between r and s move. Rep i draws from Rng::substream(seed, i).
inline std::vector<PerturbationSample> stability_experiment(const Graph& g, std::span<const double> r,
                                                            std::span<const double> s, const StabilityConfig& cfg) {
    cfg.perturbation.validate();
    if (cfg.reps < 1) throw InvalidArgument("stability_experiment: reps must be >= 1");
    const QuadratureRule quad = gauss_laguerre(cfg.quad_order);
    const DiffusionOperator base = make_operator(g, cfg.alpha);
    if (r.size() != base.size()) throw DimensionMismatch("stability_experiment: r", base.size(), r.size());
    if (s.size() != base.size()) throw DimensionMismatch("stability_experiment: s", base.size(), s.size());
    const double base_diff = diffusion_distance(base, r, s, cfg.p);
    const double base_sps = superposition_distance(base, r, s, cfg.p, quad);
    const double lap_norm = matrix_pnorm(laplacian(g), cfg.p);
    const double gamma = std::max(vector_pnorm(r, cfg.p), vector_pnorm(s, cfg.p));

    std::vector<PerturbationSample> samples(cfg.reps);
    parallel_for(cfg.reps, cfg.threads, [&](std::size_t rep) {
        Rng rng = Rng::substream(cfg.perturbation.seed, rep);
        const PerturbedGraph pg = perturb_weights(g, cfg.perturbation, rng);
        const DiffusionOperator op = make_operator(pg.graph, cfg.alpha);
        PerturbationSample& out = samples[rep];
        out.e_norm = matrix_pnorm(pg.laplacian_delta, cfg.p);
        out.epsilon = lap_norm > 0.0 ? out.e_norm / lap_norm : 0.0;
        out.gamma = gamma;
        out.dev_diff = std::abs(diffusion_distance(op, r, s, cfg.p) - base_diff);
        out.dev_sps = std::abs(superposition_distance(op, r, s, cfg.p, quad) - base_sps);
        if (out.e_norm > 0.0) {
            out.norm_dev_diff = out.dev_diff / out.e_norm;
            out.norm_dev_sps = out.dev_sps / out.e_norm;
        }
    });
    return samples;
}

}  // namespace heatdist
