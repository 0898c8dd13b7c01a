#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "heatdist/error.hpp"
#include "heatdist/matrix.hpp"

namespace heatdist {

// --- norms ---------------------------------------------------------------------

/// Input norm used by every distance: l1, l2 or l-infinity.
enum class Norm { l1, l2, linf };

inline std::string to_string(Norm p) {
    switch (p) {
        case Norm::l1: return "1";
        case Norm::l2: return "2";
        case Norm::linf: return "inf";
    }
    return "?";
}

/// Accepts "1", "2", "inf".
inline Norm parse_norm(std::string_view s) {
    if (s == "1") return Norm::l1;
    if (s == "2") return Norm::l2;
    if (s == "inf") return Norm::linf;
    throw InvalidArgument("unsupported norm '" + std::string(s) + "' (expected 1, 2 or inf)");
}

inline double vector_pnorm(std::span<const double> v, Norm p) {
    switch (p) {
        case Norm::l1: {
            double s = 0.0;
            for (double x : v) s += std::abs(x);
            return s;
        }
        case Norm::l2: {
            // scaled accumulation keeps tiny and huge entries representable
            double scale = 0.0;
            for (double x : v) scale = std::max(scale, std::abs(x));
            if (scale == 0.0 || !std::isfinite(scale)) return scale;
            double s = 0.0;
            for (double x : v) {
                const double r = x / scale;
                s += r * r;
            }
            return scale * std::sqrt(s);
        }
        case Norm::linf: {
            double m = 0.0;
            for (double x : v) m = std::max(m, std::abs(x));
            return m;
        }
    }
    throw InvalidArgument("unsupported norm");
}

// --- symmetric eigendecomposition -----------------------------------------------

/// Eigenvalues in ascending order; column k of `vectors` is the unit
/// eigenvector for values[k].
struct EigenPair {
    Vector values;
    Matrix vectors;

    std::size_t size() const noexcept { return values.size(); }
};

struct JacobiOptions {
    int max_sweeps = 30;
    double relative_tolerance = 1e-12;  ///< stop when off-diagonal Frobenius <= tol * ||M||_F
};

/// Cyclic Jacobi rotations.
inline EigenPair sym_eigen(const SymMatrix& m, JacobiOptions opts = {}) {
    const std::size_t n = m.size();
    Matrix a = m.dense();
    Matrix v = Matrix::identity(n);
    const double threshold = opts.relative_tolerance * m.frobenius();

    auto off_diagonal = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j) s += a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    bool converged = false;
    for (int sweep = 0; sweep <= opts.max_sweeps; ++sweep) {
        if (off_diagonal() <= threshold) {
            converged = true;
            break;
        }
        if (sweep == opts.max_sweeps) break;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }
    if (!converged)
        throw NumericError("sym_eigen: no convergence after " + std::to_string(opts.max_sweeps) + " sweeps");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return a(x, x) < a(y, y); });

    EigenPair out{Vector(n), Matrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

// --- SPD factorization ----------------------------------------------------------------

/// Cholesky factor M = C C^T of a symmetric positive-definite matrix.
class SpdFactor {
public:
    SpdFactor() = default;

    std::size_t size() const noexcept { return chol_.rows(); }
    const Matrix& lower() const noexcept { return chol_; }

    Vector solve(std::span<const double> b) const {
        const std::size_t n = size();
        if (b.size() != n) throw DimensionMismatch("spd_solve", n, b.size());
        Vector x(b.begin(), b.end());
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = chol_.row(i);
            double s = x[i];
            for (std::size_t k = 0; k < i; ++k) s -= row[k] * x[k];
            x[i] = s / row[i];
        }
        for (std::size_t i = n; i-- > 0;) {
            double s = x[i];
            for (std::size_t k = i + 1; k < n; ++k) s -= chol_(k, i) * x[k];
            x[i] = s / chol_(i, i);
        }
        return x;
    }

private:
    friend SpdFactor spd_factorize(const SymMatrix& m);
    Matrix chol_;
};

inline SpdFactor spd_factorize(const SymMatrix& m) {
    const std::size_t n = m.size();
    Matrix c(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        double d = m(j, j);
        const auto rj = c.row(j);
        for (std::size_t k = 0; k < j; ++k) d -= rj[k] * rj[k];
        if (!(d > 0.0))
            throw NumericError("spd_factorize: matrix is not positive definite (pivot " + std::to_string(j) + ")");
        const double cjj = std::sqrt(d);
        c(j, j) = cjj;
        for (std::size_t i = j + 1; i < n; ++i) {
            const auto ri = c.row(i);
            double s = m(i, j);
            for (std::size_t k = 0; k < j; ++k) s -= ri[k] * rj[k];
            c(i, j) = s / cjj;
        }
    }
    SpdFactor f;
    f.chol_ = std::move(c);
    return f;
}

inline Vector spd_solve(const SpdFactor& f, std::span<const double> v) { return f.solve(v); }

// --- matrix norms --------------------------------------------------------------------

/// Induced p-norm of a symmetric matrix. The 2-norm is the spectral radius.
inline double matrix_pnorm(const SymMatrix& m, Norm p) {
    const std::size_t n = m.size();
    switch (p) {
        case Norm::l1:
        case Norm::linf: {
            // symmetric: max column sum == max row sum
            double best = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double s = 0.0;
                for (double x : m.row(i)) s += std::abs(x);
                best = std::max(best, s);
            }
            return best;
        }
        case Norm::l2: {
            if (n == 0) return 0.0;
            const EigenPair e = sym_eigen(m);
            return std::max(std::abs(e.values.front()), std::abs(e.values.back()));
        }
    }
    throw InvalidArgument("unsupported norm");
}

// --- exponential action --------------------------------------------------------------

/// Q^T v.
inline Vector spectral_coordinates(const EigenPair& e, std::span<const double> v) {
    const std::size_t n = e.size();
    if (v.size() != n) throw DimensionMismatch("spectral_coordinates", n, v.size());
    Vector y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double vi = v[i];
        if (vi == 0.0) continue;
        const auto qi = e.vectors.row(i);
        for (std::size_t k = 0; k < n; ++k) y[k] += qi[k] * vi;
    }
    return y;
}

/// Q diag(exp(-s * lambda)) y for spectral coordinates y.
inline Vector expm_action_spectral(const EigenPair& e, double s, std::span<const double> coords) {
    const std::size_t n = e.size();
    Vector scaled(n);
    for (std::size_t k = 0; k < n; ++k) scaled[k] = std::exp(-s * e.values[k]) * coords[k];
    return multiply(e.vectors, scaled);
}

/// e^{-sL} v from an eigendecomposition of L.
inline Vector expm_action(const EigenPair& e, double s, std::span<const double> v) {
    if (!(s >= 0.0)) throw InvalidArgument("expm_action: s must be nonnegative");
    return expm_action_spectral(e, s, spectral_coordinates(e, v));
}

// --- Gauss-Laguerre quadrature ----------------------------------------------------------

/// Rule for integrals of the form  integral_0^inf e^{-t} f(t) dt.
struct QuadratureRule {
    Vector nodes;    ///< ascending, positive
    Vector weights;  ///< positive until they underflow for large orders

    std::size_t order() const noexcept { return nodes.size(); }
};

inline constexpr std::size_t kMaxQuadratureOrder = 256;
inline constexpr std::size_t kDefaultQuadratureOrder = 64;

/// Golub-Welsch: nodes are the eigenvalues of the Laguerre Jacobi matrix
/// (diagonal 2k+1, off-diagonal k+1). The weight of a node is the squared first
/// component of its unit eigenvector; that vector is rebuilt from the node by
/// the three-term recurrence (with rescaling), which stays accurate where the
/// components span hundreds of orders of magnitude.
inline QuadratureRule gauss_laguerre(std::size_t order) {
    if (order < 1 || order > kMaxQuadratureOrder)
        throw InvalidArgument("gauss_laguerre: order must lie in [1, " + std::to_string(kMaxQuadratureOrder) + "]");
    const std::size_t n = order;
    auto diag = [](std::size_t k) { return 2.0 * static_cast<double>(k) + 1.0; };
    auto off = [](std::size_t k) { return static_cast<double>(k) + 1.0; };

    SymMatrix jacobi(n);
    for (std::size_t k = 0; k < n; ++k) {
        jacobi.set(k, k, diag(k));
        if (k + 1 < n) jacobi.set(k, k + 1, off(k));
    }
    QuadratureRule rule;
    rule.nodes = sym_eigen(jacobi).values;
    rule.weights.resize(n);

    for (std::size_t idx = 0; idx < n; ++idx) {
        const double x = rule.nodes[idx];
        double prev = 0.0, cur = 1.0;
        double sumsq = 1.0;
        double log_scale = 0.0;  // true component = stored * exp(log_scale)
        for (std::size_t k = 0; k + 1 < n; ++k) {
            const double next = ((x - diag(k)) * cur - (k > 0 ? off(k - 1) * prev : 0.0)) / off(k);
            prev = cur;
            cur = next;
            sumsq += cur * cur;
            if (std::abs(cur) > 1e100) {
                prev *= 1e-100;
                cur *= 1e-100;
                sumsq *= 1e-200;
                log_scale += 100.0 * std::log(10.0);
            }
        }
        // first component (== 1 before scaling) squared over the squared norm
        rule.weights[idx] = std::exp(-std::log(sumsq) - 2.0 * log_scale);
    }
    return rule;
}

}  // namespace heatdist
