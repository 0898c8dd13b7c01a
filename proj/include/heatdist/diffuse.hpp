#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "heatdist/error.hpp"
#include "heatdist/graph.hpp"
#include "heatdist/linalg.hpp"
#include "heatdist/matrix.hpp"

namespace heatdist {

/// Which precomputations make_operator performs.
enum class Precompute {
    full,            ///< spectrum of L and factor of (I + alpha L)
    resolvent_only,  ///< factor only; enough for diffusion distances and feature transforms
};

/// Heat diffusion on a fixed graph with conductivity alpha.
///
/// Holds the eigendecomposition of the Laplacian (for e^{-alpha L t}) and a
/// Cholesky factor of I + alpha L (for the resolvent), both computed once and
/// shared by every distance query. Immutable; safe to share across threads.
class DiffusionOperator {
public:
    const Graph& graph() const noexcept { return graph_; }
    double alpha() const noexcept { return alpha_; }
    std::size_t size() const noexcept { return graph_.node_count(); }

    bool has_spectrum() const noexcept { return spectrum_.has_value(); }
    const EigenPair& spectrum() const {
        if (!spectrum_) throw InvalidArgument("operator was built without a Laplacian spectrum");
        return *spectrum_;
    }
    const SpdFactor& resolvent() const noexcept { return factor_; }

private:
    friend DiffusionOperator make_operator(const Graph& g, double alpha, Precompute what);

    Graph graph_;
    double alpha_ = 1.0;
    std::optional<EigenPair> spectrum_;
    SpdFactor factor_;
};

inline DiffusionOperator make_operator(const Graph& g, double alpha, Precompute what = Precompute::full) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) throw InvalidArgument("diffusion constant alpha must be > 0");
    const SymMatrix lap = laplacian(g);
    const std::size_t n = g.node_count();
    SymMatrix shifted(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) shifted.set(i, j, (i == j ? 1.0 : 0.0) + alpha * lap(i, j));

    DiffusionOperator op;
    op.graph_ = g;
    op.alpha_ = alpha;
    if (what == Precompute::full) op.spectrum_ = sym_eigen(lap);
    op.factor_ = spd_factorize(shifted);
    return op;
}

namespace detail {
inline void check_dimension(const DiffusionOperator& op, std::span<const double> v, const char* what) {
    if (v.size() != op.size()) throw DimensionMismatch(what, op.size(), v.size());
}
inline bool all_zero(std::span<const double> v) {
    for (double x : v)
        if (x != 0.0) return false;
    return true;
}
}  // namespace detail

/// r(t) = e^{-alpha L t} r.
inline Vector diffuse_signal(const DiffusionOperator& op, std::span<const double> r, double t) {
    detail::check_dimension(op, r, "diffuse_signal");
    if (!(t >= 0.0)) throw InvalidArgument("diffuse_signal: t must be nonnegative");
    if (t == 0.0) return Vector(r.begin(), r.end());
    return expm_action(op.spectrum(), op.alpha() * t, r);
}

/// (I + alpha L)^{-1} v: the diffused-feature map.
inline Vector feature_transform(const DiffusionOperator& op, std::span<const double> v) {
    detail::check_dimension(op, v, "feature_transform");
    return op.resolvent().solve(v);
}

/// || (I + alpha L)^{-1} (r - s) ||_p
inline double diffusion_distance(const DiffusionOperator& op, std::span<const double> r, std::span<const double> s,
                                 Norm p) {
    detail::check_dimension(op, r, "diffusion_distance");
    detail::check_dimension(op, s, "diffusion_distance");
    const Vector d = subtract(r, s);
    if (detail::all_zero(d)) return 0.0;
    return vector_pnorm(op.resolvent().solve(d), p);
}

inline double diffusion_norm(const DiffusionOperator& op, std::span<const double> v, Norm p) {
    return diffusion_distance(op, v, Vector(v.size(), 0.0), p);
}

/// Gauss-Laguerre approximation of  integral_0^inf e^{-t} || e^{-alpha L t} (r - s) ||_p dt.
inline double superposition_distance(const DiffusionOperator& op, std::span<const double> r,
                                     std::span<const double> s, Norm p, const QuadratureRule& quad) {
    detail::check_dimension(op, r, "superposition_distance");
    detail::check_dimension(op, s, "superposition_distance");
    const Vector d = subtract(r, s);
    if (detail::all_zero(d)) return 0.0;
    const EigenPair& e = op.spectrum();
    const Vector coords = spectral_coordinates(e, d);
    double total = 0.0;
    for (std::size_t k = 0; k < quad.order(); ++k) {
        if (quad.weights[k] == 0.0) continue;
        total += quad.weights[k] * vector_pnorm(expm_action_spectral(e, op.alpha() * quad.nodes[k], coords), p);
    }
    return total;
}

inline double superposition_norm(const DiffusionOperator& op, std::span<const double> v, Norm p,
                                 const QuadratureRule& quad) {
    return superposition_distance(op, v, Vector(v.size(), 0.0), p, quad);
}

struct OracleOptions {
    double tolerance = 1e-6;
    int max_levels = 22;  ///< at most 2^max_levels Simpson panels
};

/// Independent reference for superposition_distance.
///
/// Truncates the integral at T = ln(||d|| / (tol/2)); the discarded tail is at
/// most e^{-T} ||d|| = tol/2 because ||e^{-alpha L t}||_p <= 1. The finite part
/// is composite Simpson, halving the step until consecutive estimates differ by
/// at most tol/2.
inline double superposition_oracle(const DiffusionOperator& op, std::span<const double> r,
                                   std::span<const double> s, Norm p, OracleOptions opts = {}) {
    if (!(opts.tolerance > 0.0)) throw InvalidArgument("superposition_oracle: tolerance must be positive");
    detail::check_dimension(op, r, "superposition_oracle");
    detail::check_dimension(op, s, "superposition_oracle");
    const Vector d = subtract(r, s);
    if (detail::all_zero(d)) return 0.0;

    const EigenPair& e = op.spectrum();
    const Vector coords = spectral_coordinates(e, d);
    const double half_tol = 0.5 * opts.tolerance;
    const double dnorm = vector_pnorm(d, p);
    const double horizon = std::max(std::log(dnorm / half_tol), 1.0);

    auto integrand = [&](double t) {
        return std::exp(-t) * vector_pnorm(expm_action_spectral(e, op.alpha() * t, coords), p);
    };
    if (integrand(horizon) > opts.tolerance)
        throw NumericError("superposition_oracle: integrand not below tolerance at truncation point");

    // Simpson on 2 panels, then repeated halving. Sums are kept split into
    // endpoint, odd-node and even-node parts so that old samples are reused.
    std::size_t panels = 2;
    double h = horizon / static_cast<double>(panels);
    const double ends = integrand(0.0) + integrand(horizon);
    double evens = 0.0;  // interior nodes with even index
    double odds = integrand(h);
    double estimate = h / 3.0 * (ends + 4.0 * odds + 2.0 * evens);
    for (int level = 1; level <= opts.max_levels; ++level) {
        evens += odds;
        panels *= 2;
        h = horizon / static_cast<double>(panels);
        odds = 0.0;
        for (std::size_t i = 1; i < panels; i += 2) odds += integrand(h * static_cast<double>(i));
        const double refined = h / 3.0 * (ends + 4.0 * odds + 2.0 * evens);
        const bool done = std::abs(refined - estimate) <= half_tol;
        estimate = refined;
        if (done && level >= 3) return estimate;
    }
    throw NumericError("superposition_oracle: refinement cap reached");
}

/// Signals on the nodes of one graph, optionally labelled.
struct SignalSet {
    std::size_t n = 0;
    std::vector<Vector> signals;
    std::optional<std::vector<int>> labels;

    std::size_t count() const noexcept { return signals.size(); }

    void validate() const {
        for (std::size_t k = 0; k < signals.size(); ++k)
            if (signals[k].size() != n) throw DimensionMismatch("signal #" + std::to_string(k), n, signals[k].size());
        if (labels && labels->size() != signals.size())
            throw DimensionMismatch("signal labels", signals.size(), labels->size());
    }
};

}  // namespace heatdist
