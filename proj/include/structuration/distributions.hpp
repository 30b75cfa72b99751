#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "structuration/matrix.hpp"

namespace structuration {

/// Three-way probability table stored row-major as p[(i * ny + j) * nz + k].
/// Tables built from binned observations also carry their integer counts.
struct JointDistribution3 {
    std::array<std::size_t, 3> shape{0, 0, 0};
    std::vector<double> probabilities;
    std::vector<std::uint64_t> counts;  // empty unless built from observations
    std::uint64_t case_count = 0;

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const noexcept {
        return (i * shape[1] + j) * shape[2] + k;
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const { return probabilities[index(i, j, k)]; }
    std::size_t size() const noexcept { return probabilities.size(); }

    /// Normalizes a non-negative table to a distribution.
    static JointDistribution3 from_weights(std::array<std::size_t, 3> shape, std::vector<double> weights) {
        if (weights.size() != shape[0] * shape[1] * shape[2] || weights.empty())
            throw InputError("weight table does not match its shape");
        double total = 0;
        for (double w : weights) {
            if (!(w >= 0) || !std::isfinite(w)) throw InputError("weights must be finite and non-negative");
            total += w;
        }
        if (!(total > 0)) throw InputError("weights sum to zero");
        for (double& w : weights) w /= total;
        JointDistribution3 out;
        out.shape = shape;
        out.probabilities = std::move(weights);
        return out;
    }

    static JointDistribution3 from_counts(std::array<std::size_t, 3> shape, std::vector<std::uint64_t> counts) {
        if (counts.size() != shape[0] * shape[1] * shape[2] || counts.empty())
            throw InputError("count table does not match its shape");
        std::uint64_t n = 0;
        for (auto c : counts) n += c;
        if (n == 0) throw InputError("count table is empty");
        JointDistribution3 out;
        out.shape = shape;
        out.case_count = n;
        out.probabilities.resize(counts.size());
        for (std::size_t i = 0; i < counts.size(); ++i)
            out.probabilities[i] = static_cast<double>(counts[i]) / static_cast<double>(n);
        out.counts = std::move(counts);
        return out;
    }
};

struct MarginSet {
    RealMatrix ab, ac, bc;
};

/// Bin index of a loading on an axis of `bins` half-open intervals over
/// [-1, 1]; the top interval is closed at +1.
inline std::size_t loading_bin(double x, std::size_t bins) {
    x = std::clamp(x, -1.0, 1.0);
    const auto b = static_cast<double>(bins);
    auto idx = static_cast<std::size_t>(std::floor((x + 1.0) * b / 2.0));
    return std::min(idx, bins - 1);
}

/// Counts each row of a variables x 3 loading matrix into a bins^3 table.
inline JointDistribution3 bin_loadings(const RealMatrix& loadings, std::size_t bins = 10) {
    if (bins < 2) throw InputError("at least 2 bins per axis are required");
    if (loadings.cols() != 3) throw InputError("binning needs exactly 3 loading columns");
    if (loadings.rows() == 0) throw InputError("empty loading matrix");
    std::vector<std::uint64_t> counts(bins * bins * bins, 0);
    for (std::size_t r = 0; r < loadings.rows(); ++r) {
        std::array<std::size_t, 3> cell{};
        for (std::size_t a = 0; a < 3; ++a) {
            const double x = loadings(r, a);
            if (!(std::abs(x) <= 1.01))
                throw InputError("loading " + std::to_string(x) + " at row " + std::to_string(r + 1) +
                                 " lies outside [-1.01, 1.01]");
            cell[a] = loading_bin(x, bins);
        }
        ++counts[(cell[0] * bins + cell[1]) * bins + cell[2]];
    }
    return JointDistribution3::from_counts({bins, bins, bins}, std::move(counts));
}

inline MarginSet margins(const JointDistribution3& p) {
    const auto [nx, ny, nz] = p.shape;
    MarginSet m{RealMatrix(nx, ny), RealMatrix(nx, nz), RealMatrix(ny, nz)};
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t k = 0; k < nz; ++k) {
                const double v = p(i, j, k);
                m.ab(i, j) += v;
                m.ac(i, k) += v;
                m.bc(j, k) += v;
            }
    return m;
}

/// `i,j,k,count` rows for non-empty cells and a trailing `# N=` line.
/// Tables without counts print probabilities in the last column instead.
inline std::string serialize_joint_csv(const JointDistribution3& p) {
    std::ostringstream os;
    const bool have_counts = !p.counts.empty();
    os << (have_counts ? "i,j,k,count\n" : "i,j,k,probability\n");
    os.precision(17);
    for (std::size_t i = 0; i < p.shape[0]; ++i)
        for (std::size_t j = 0; j < p.shape[1]; ++j)
            for (std::size_t k = 0; k < p.shape[2]; ++k) {
                const auto idx = p.index(i, j, k);
                if (p.probabilities[idx] == 0.0) continue;
                os << i << ',' << j << ',' << k << ',';
                if (have_counts)
                    os << p.counts[idx];
                else
                    os << p.probabilities[idx];
                os << '\n';
            }
    if (have_counts) os << "# N=" << p.case_count << '\n';
    return os.str();
}

}  // namespace structuration
