#pragma once

// Principal component extraction with varimax rotation over the Pearson
// correlation matrix of citation patterns, plus the correlation summaries
// computed among the main loading columns.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <iomanip>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "structuration/corpus_io.hpp"
#include "structuration/matrix.hpp"

namespace structuration {

struct CorrelationMatrix {
    std::vector<std::string> labels;
    RealMatrix values;
    std::vector<std::string> dropped;  // zero-variance variables

    std::size_t size() const noexcept { return labels.size(); }
};

enum class RotationKind { none, varimax };

struct RotationInfo {
    RotationKind kind = RotationKind::none;
    int sweeps = 0;
    bool converged = true;
};

struct FactorSolution {
    std::vector<std::string> labels;
    RealMatrix loadings;                  // variables x k
    std::vector<double> eigenvalues;      // k largest, descending (extraction)
    std::vector<double> explained_variance;
    RotationInfo rotation;
    std::vector<std::size_t> unrotated_rows;  // zero-communality rows passed through
    bool aligned = false;

    std::size_t variables() const noexcept { return loadings.rows(); }
    std::size_t factors() const noexcept { return loadings.cols(); }
};

/// Pearson correlations among the three main loading columns, and each
/// pair's partial correlation controlling for the remaining column. A
/// partial is empty when its denominator vanishes.
struct CorrelationReport {
    double r12 = 0, r13 = 0, r23 = 0;
    std::optional<double> pr12_3, pr13_2, pr23_1;
};

namespace detail {

inline double mean_of(std::span<const double> x) {
    double s = 0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

// Two-pass Pearson correlation; returns nullopt when either input is constant.
inline std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
    const double mx = mean_of(x), my = mean_of(y);
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx <= 0 || syy <= 0) return std::nullopt;
    return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

inline void fix_column_signs(RealMatrix& loadings) {
    for (std::size_t c = 0; c < loadings.cols(); ++c) {
        std::size_t arg = 0;
        double best = -1;
        for (std::size_t r = 0; r < loadings.rows(); ++r)
            if (std::abs(loadings(r, c)) > best) {
                best = std::abs(loadings(r, c));
                arg = r;
            }
        if (loadings.rows() > 0 && loadings(arg, c) < 0)
            for (std::size_t r = 0; r < loadings.rows(); ++r) loadings(r, c) = -loadings(r, c);
    }
}

}  // namespace detail

/// Correlations between the columns (citing patterns) of `m`, with rows as
/// cases. Constant columns are dropped before analysis.
inline CorrelationMatrix correlation_matrix(const CitationMatrix& m) {
    if (m.rows() < 2) throw InputError("correlation analysis needs at least 2 cases (rows)");
    CorrelationMatrix out;
    std::vector<std::vector<double>> centered;
    std::vector<double> norms;
    for (std::size_t c = 0; c < m.cols(); ++c) {
        std::vector<double> col(m.rows());
        for (std::size_t r = 0; r < m.rows(); ++r) col[r] = static_cast<double>(m(r, c));
        const bool constant = std::all_of(col.begin(), col.end(), [&](double v) { return v == col[0]; });
        if (constant) {
            out.dropped.push_back(m.col_labels[c]);
            continue;
        }
        const double mu = detail::mean_of(col);
        double ss = 0;
        for (double& v : col) {
            v -= mu;
            ss += v * v;
        }
        out.labels.push_back(m.col_labels[c]);
        norms.push_back(std::sqrt(ss));
        centered.push_back(std::move(col));
    }
    const std::size_t n = out.labels.size();
    if (n < 2) throw InputError("fewer than 2 non-constant variables");

    out.values = RealMatrix(n, n);
    for (std::size_t a = 0; a < n; ++a) {
        out.values(a, a) = 1.0;
        for (std::size_t b = a + 1; b < n; ++b) {
            double s = 0;
            for (std::size_t r = 0; r < m.rows(); ++r) s += centered[a][r] * centered[b][r];
            const double r_ab = std::clamp(s / (norms[a] * norms[b]), -1.0, 1.0);
            out.values(a, b) = r_ab;
            out.values(b, a) = r_ab;
        }
    }
    return out;
}

struct SymmetricEigen {
    std::vector<double> values;  // descending
    RealMatrix vectors;          // column j belongs to values[j]
    int sweeps = 0;
};

/// Cyclic Jacobi eigendecomposition of a symmetric matrix. Sweeps stop once
/// the off-diagonal Frobenius norm falls below `tol`.
inline SymmetricEigen jacobi_eigen(RealMatrix a, double tol = 1e-12, int max_sweeps = 100) {
    const std::size_t n = a.rows();
    if (a.cols() != n) throw InputError("eigendecomposition needs a square matrix");
    RealMatrix v = RealMatrix::identity(n);

    auto off_norm = [&] {
        double s = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += 2 * a(i, j) * a(i, j);
        return std::sqrt(s);
    };

    int sweep = 0;
    for (; off_norm() >= tol; ++sweep) {
        if (sweep == max_sweeps)
            throw NumericalError("Jacobi eigensolver did not converge in " + std::to_string(max_sweeps) +
                                 " sweeps");
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2 * apq);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
                const double c = 1 / std::sqrt(t * t + 1);
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
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });
    SymmetricEigen out;
    out.sweeps = sweep;
    out.values.resize(n);
    out.vectors = RealMatrix(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = a(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = v(i, order[j]);
    }
    return out;
}

/// Loadings of the `k` leading principal components of a correlation matrix.
inline FactorSolution principal_components(const CorrelationMatrix& corr, std::size_t k) {
    const std::size_t n = corr.size();
    if (k == 0) throw InputError("number of components must be positive");
    if (k > n)
        throw InputError("requested " + std::to_string(k) + " components from " + std::to_string(n) +
                         " variables");
    auto eig = jacobi_eigen(corr.values);
    for (double& lambda : eig.values) {
        if (lambda < -1e-10) throw NumericalError("correlation matrix is not positive semi-definite");
        lambda = std::max(lambda, 0.0);
    }

    FactorSolution sol;
    sol.labels = corr.labels;
    sol.loadings = RealMatrix(n, k);
    for (std::size_t j = 0; j < k; ++j) {
        const double scale = std::sqrt(eig.values[j]);
        for (std::size_t i = 0; i < n; ++i) sol.loadings(i, j) = eig.vectors(i, j) * scale;
        sol.eigenvalues.push_back(eig.values[j]);
        sol.explained_variance.push_back(eig.values[j] / static_cast<double>(n));
    }
    detail::fix_column_signs(sol.loadings);
    return sol;
}

/// Raw varimax criterion: the sum over columns of the variance of squared
/// loadings. With `kaiser` set, rows are first scaled to unit communality.
inline double varimax_criterion(const RealMatrix& loadings, bool kaiser = true) {
    const std::size_t n = loadings.rows(), k = loadings.cols();
    std::vector<double> scale(n, 1.0);
    std::size_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        double h2 = 0;
        for (double x : loadings.row(i)) h2 += x * x;
        if (kaiser) scale[i] = h2 > 0 ? 1 / std::sqrt(h2) : 0.0;
        if (!kaiser || h2 > 0) ++used;
    }
    if (used == 0) return 0;
    double total = 0;
    for (std::size_t j = 0; j < k; ++j) {
        double s2 = 0, s4 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            if (scale[i] == 0) continue;
            const double x = loadings(i, j) * scale[i];
            s2 += x * x;
            s4 += x * x * x * x;
        }
        const double m = static_cast<double>(used);
        total += s4 / m - (s2 / m) * (s2 / m);
    }
    return total;
}

/// Orthogonal varimax rotation with Kaiser normalization by successive
/// planar rotations. Stops when the relative change of the criterion over a
/// sweep drops below `rel_tol`, or after `max_sweeps`.
inline FactorSolution varimax_rotate(const FactorSolution& sol, double rel_tol = 1e-6, int max_sweeps = 100) {
    FactorSolution out = sol;
    out.rotation = {RotationKind::varimax, 0, true};
    const std::size_t n = sol.variables(), k = sol.factors();
    if (k < 2 || n == 0) return out;

    std::vector<double> h(n);
    std::vector<std::size_t> rows;
    out.unrotated_rows.clear();
    for (std::size_t i = 0; i < n; ++i) {
        double h2 = 0;
        for (double x : sol.loadings.row(i)) h2 += x * x;
        h[i] = std::sqrt(h2);
        if (h2 > 0)
            rows.push_back(i);
        else
            out.unrotated_rows.push_back(i);
    }
    if (rows.empty()) return out;

    RealMatrix x(rows.size(), k);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < k; ++j) x(r, j) = sol.loadings(rows[r], j) / h[rows[r]];

    const double m = static_cast<double>(rows.size());
    double criterion = varimax_criterion(x, false);
    out.rotation.converged = false;
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (std::size_t p = 0; p + 1 < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                double A = 0, B = 0, C = 0, D = 0;
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    const double u = x(r, p) * x(r, p) - x(r, q) * x(r, q);
                    const double w = 2 * x(r, p) * x(r, q);
                    A += u;
                    B += w;
                    C += u * u - w * w;
                    D += 2 * u * w;
                }
                const double num = D - 2 * A * B / m;
                const double den = C - (A * A - B * B) / m;
                const double phi = std::atan2(num, den) / 4;
                if (phi == 0.0) continue;
                const double c = std::cos(phi), s = std::sin(phi);
                for (std::size_t r = 0; r < rows.size(); ++r) {
                    const double xp = x(r, p), xq = x(r, q);
                    x(r, p) = c * xp + s * xq;
                    x(r, q) = -s * xp + c * xq;
                }
            }
        }
        const double next = varimax_criterion(x, false);
        out.rotation.sweeps = sweep;
        const double change = std::abs(next - criterion) / std::max(std::abs(criterion), 1e-300);
        criterion = next;
        if (change < rel_tol) {
            out.rotation.converged = true;
            break;
        }
    }

    for (std::size_t r = 0; r < rows.size(); ++r)
        for (std::size_t j = 0; j < k; ++j) out.loadings(rows[r], j) = x(r, j) * h[rows[r]];
    detail::fix_column_signs(out.loadings);
    return out;
}

/// Column matching of one solution against another: column `j` of the
/// aligned result is `signs[j]` times column `source[j]` of the input.
struct ColumnAssignment {
    std::vector<std::size_t> source;
    std::vector<int> signs;

    bool is_identity() const {
        for (std::size_t j = 0; j < source.size(); ++j)
            if (source[j] != j || signs[j] != 1) return false;
        return true;
    }
};

/// Finds the column permutation and sign flips of `cur` that maximize the
/// summed absolute correlation with the columns of `prev`, computed over the
/// variables both solutions share.
inline ColumnAssignment best_alignment(const FactorSolution& prev, const FactorSolution& cur) {
    const std::size_t k = cur.factors();
    if (prev.factors() != k) throw InputError("cannot align solutions with different factor counts");
    if (k > 8) throw InputError("column alignment supports at most 8 factors");

    std::unordered_map<std::string_view, std::size_t> prev_row;
    for (std::size_t i = 0; i < prev.labels.size(); ++i) prev_row.emplace(prev.labels[i], i);
    std::vector<std::pair<std::size_t, std::size_t>> shared;
    for (std::size_t i = 0; i < cur.labels.size(); ++i)
        if (auto it = prev_row.find(cur.labels[i]); it != prev_row.end()) shared.emplace_back(it->second, i);
    if (shared.size() < 2) throw InputError("fewer than 2 shared variables between solutions");

    RealMatrix corr(k, k);
    std::vector<double> xa(shared.size()), xb(shared.size());
    for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t s = 0; s < shared.size(); ++s) xa[s] = prev.loadings(shared[s].first, a);
        for (std::size_t b = 0; b < k; ++b) {
            for (std::size_t s = 0; s < shared.size(); ++s) xb[s] = cur.loadings(shared[s].second, b);
            corr(a, b) = detail::pearson(xa, xb).value_or(0.0);
        }
    }

    std::vector<std::size_t> perm(k);
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<std::size_t> best = perm;
    double best_score = -1;
    // lexicographic enumeration starts at the identity, so strict
    // improvement keeps the identity, then the smallest permutation, on ties
    do {
        double score = 0;
        for (std::size_t a = 0; a < k; ++a) score += std::abs(corr(a, perm[a]));
        if (score > best_score + 1e-12) {
            best_score = score;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));

    ColumnAssignment out;
    out.source = best;
    for (std::size_t a = 0; a < k; ++a) out.signs.push_back(corr(a, best[a]) < 0 ? -1 : 1);
    return out;
}

inline FactorSolution apply_alignment(const FactorSolution& sol, const ColumnAssignment& assignment) {
    FactorSolution out = sol;
    for (std::size_t j = 0; j < sol.factors(); ++j)
        for (std::size_t i = 0; i < sol.variables(); ++i)
            out.loadings(i, j) = assignment.signs[j] * sol.loadings(i, assignment.source[j]);
    out.aligned = true;
    return out;
}

inline FactorSolution align_solution(const FactorSolution& prev, const FactorSolution& cur) {
    return apply_alignment(cur, best_alignment(prev, cur));
}

/// Correlations and first-order partial correlations among three columns.
inline CorrelationReport partial_correlations(const RealMatrix& loadings) {
    if (loadings.cols() != 3) throw InputError("partial correlations need exactly 3 columns");
    if (loadings.rows() < 4) throw InputError("partial correlations need at least 4 rows");
    const auto c1 = loadings.column(0), c2 = loadings.column(1), c3 = loadings.column(2);
    auto r = [](const std::vector<double>& x, const std::vector<double>& y, const char* which) {
        auto v = detail::pearson(x, y);
        if (!v) throw InputError(std::string("zero-variance loading column in pair ") + which);
        return *v;
    };
    CorrelationReport out;
    out.r12 = r(c1, c2, "1-2");
    out.r13 = r(c1, c3, "1-3");
    out.r23 = r(c2, c3, "2-3");
    auto partial = [](double rxy, double rxz, double ryz) -> std::optional<double> {
        const double den2 = (1 - rxz * rxz) * (1 - ryz * ryz);
        if (!(den2 > 0)) return std::nullopt;
        return std::clamp((rxy - rxz * ryz) / std::sqrt(den2), -1.0, 1.0);
    };
    out.pr12_3 = partial(out.r12, out.r13, out.r23);
    out.pr13_2 = partial(out.r13, out.r12, out.r23);
    out.pr23_1 = partial(out.r23, out.r12, out.r13);
    return out;
}

/// Selects loading columns (0-based) into a variables x columns.size() matrix.
inline RealMatrix select_columns(const RealMatrix& loadings, std::span<const std::size_t> columns) {
    RealMatrix out(loadings.rows(), columns.size());
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] >= loadings.cols())
            throw InputError("factor column " + std::to_string(columns[j] + 1) + " out of range");
        for (std::size_t i = 0; i < loadings.rows(); ++i) out(i, j) = loadings(i, columns[j]);
    }
    return out;
}

/// `label,F1,...,Fk` rows with six-decimal loadings, followed by `#`
/// metadata lines.
inline std::string serialize_factor_csv(const FactorSolution& sol) {
    std::ostringstream os;
    os << "label";
    for (std::size_t j = 0; j < sol.factors(); ++j) os << ",F" << (j + 1);
    os << '\n' << std::fixed << std::setprecision(6);
    for (std::size_t i = 0; i < sol.variables(); ++i) {
        os << detail::quote_label(sol.labels[i]);
        for (std::size_t j = 0; j < sol.factors(); ++j) {
            const double v = sol.loadings(i, j);
            os << ',' << (std::abs(v) < 5e-7 ? 0.0 : v);
        }
        os << '\n';
    }
    auto list = [&](const char* key, const std::vector<double>& xs) {
        os << "# " << key << '=';
        for (std::size_t j = 0; j < xs.size(); ++j) os << (j ? ";" : "") << xs[j];
        os << '\n';
    };
    list("eigenvalues", sol.eigenvalues);
    list("explained_variance", sol.explained_variance);
    os << "# rotation=" << (sol.rotation.kind == RotationKind::varimax ? "varimax-kaiser" : "none") << '\n';
    os << "# rotation_sweeps=" << sol.rotation.sweeps << '\n';
    os << "# converged=" << (sol.rotation.converged ? "true" : "false") << '\n';
    if (sol.aligned) os << "# columns_aligned_to_previous_year=true\n";
    return os.str();
}

}  // namespace structuration
