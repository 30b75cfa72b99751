#pragma once

// Plug-in Shannon measures over discrete distributions, in bits.
//
// Sign convention: mu* is the alternating seven-entropy sum
//   mu* = Hx + Hy + Hz - Hxy - Hxz - Hyz + Hxyz
// and the configurational information is Q = -mu*. Negative mu* (positive
// Q) is redundancy-dominated; positive mu* is information-dominated.

#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "structuration/distributions.hpp"
#include "structuration/matrix.hpp"

namespace structuration {

namespace detail {

// -sum p log2 p in storage order; zero cells contribute nothing.
inline double entropy_bits(std::span<const double> p) {
    double h = 0;
    for (double v : p)
        if (v > 0) h -= v * std::log2(v);
    return h;
}

inline void validate_distribution(std::span<const double> p) {
    if (p.empty()) throw InputError("empty probability array");
    double total = 0;
    for (double v : p) {
        if (!(v >= 0)) throw InputError("negative or NaN probability");
        total += v;
    }
    if (std::abs(total - 1.0) > 1e-9)
        throw InputError("probabilities sum to " + std::to_string(total) + ", not 1");
}

inline double floor_at_zero(double x, double tol) { return (x < 0 && x >= -tol) ? 0.0 : x; }

}  // namespace detail

/// Shannon entropy in bits of a probability array of any arity.
inline double entropy(std::span<const double> p) {
    detail::validate_distribution(p);
    return detail::entropy_bits(p);
}

/// Mutual information Hx + Hy - Hxy of a bivariate table.
inline double transmission2(const RealMatrix& joint) {
    detail::validate_distribution(joint.data());
    std::vector<double> px(joint.rows(), 0.0), py(joint.cols(), 0.0);
    for (std::size_t i = 0; i < joint.rows(); ++i)
        for (std::size_t j = 0; j < joint.cols(); ++j) {
            px[i] += joint(i, j);
            py[j] += joint(i, j);
        }
    const double t = detail::entropy_bits(px) + detail::entropy_bits(py) - detail::entropy_bits(joint.data());
    return detail::floor_at_zero(t, 1e-12);
}

/// The seven entropies of a three-way table.
struct Entropies3 {
    double h_x = 0, h_y = 0, h_z = 0;
    double h_xy = 0, h_xz = 0, h_yz = 0;
    double h_xyz = 0;
};

inline Entropies3 entropies3(const JointDistribution3& joint) {
    detail::validate_distribution(joint.probabilities);
    const auto m = margins(joint);
    std::vector<double> px(joint.shape[0], 0.0), py(joint.shape[1], 0.0), pz(joint.shape[2], 0.0);
    for (std::size_t i = 0; i < joint.shape[0]; ++i)
        for (std::size_t j = 0; j < joint.shape[1]; ++j) {
            px[i] += m.ab(i, j);
            py[j] += m.ab(i, j);
        }
    for (std::size_t i = 0; i < joint.shape[0]; ++i)
        for (std::size_t k = 0; k < joint.shape[2]; ++k) pz[k] += m.ac(i, k);

    Entropies3 h;
    h.h_x = detail::entropy_bits(px);
    h.h_y = detail::entropy_bits(py);
    h.h_z = detail::entropy_bits(pz);
    h.h_xy = detail::entropy_bits(m.ab.data());
    h.h_xz = detail::entropy_bits(m.ac.data());
    h.h_yz = detail::entropy_bits(m.bc.data());
    h.h_xyz = detail::entropy_bits(joint.probabilities);
    return h;
}

inline double mu_star(const Entropies3& h) {
    return h.h_x + h.h_y + h.h_z - h.h_xy - h.h_xz - h.h_yz + h.h_xyz;
}

/// Three-dimensional mutual information mu*.
inline double mu_star3(const JointDistribution3& joint) { return mu_star(entropies3(joint)); }

/// Configurational information Q = -mu*.
inline double q_config(const JointDistribution3& joint) { return -mu_star3(joint); }

/// Row-major probability table over an arbitrary number of axes.
struct DistributionN {
    std::vector<std::size_t> shape;
    std::vector<double> probabilities;
};

/// Entropy of the marginal over the axes selected by the bit mask `axes`.
inline double subset_entropy(const DistributionN& p, unsigned axes) {
    const std::size_t n = p.shape.size();
    std::vector<std::size_t> kept;
    for (std::size_t a = 0; a < n; ++a)
        if (axes & (1u << a)) kept.push_back(a);
    std::size_t out_size = 1;
    for (auto a : kept) out_size *= p.shape[a];
    std::vector<double> marginal(out_size, 0.0);

    std::vector<std::size_t> idx(n, 0);
    for (std::size_t flat = 0; flat < p.probabilities.size(); ++flat) {
        std::size_t target = 0;
        for (auto a : kept) target = target * p.shape[a] + idx[a];
        marginal[target] += p.probabilities[flat];
        for (std::size_t a = n; a-- > 0;) {
            if (++idx[a] < p.shape[a]) break;
            idx[a] = 0;
        }
    }
    return detail::entropy_bits(marginal);
}

/// Inclusion-exclusion sum over non-empty axis subsets S of
/// (-1)^(|S|+1) H(S). Two axes give the transmission; three give mu*.
inline double mu_multi(const DistributionN& p) {
    const std::size_t n = p.shape.size();
    if (n < 2 || n > 8) throw InputError("mu_multi supports 2 to 8 axes");
    std::size_t cells = 1;
    for (auto s : p.shape) cells *= s;
    if (cells != p.probabilities.size()) throw InputError("probability table does not match its shape");
    detail::validate_distribution(p.probabilities);

    double total = 0;
    for (unsigned mask = 1; mask < (1u << n); ++mask) {
        const int bits = std::popcount(mask);
        const double h = subset_entropy(p, mask);
        total += (bits % 2 == 1) ? h : -h;
    }
    return total;
}

/// Every measure reported for one binned distribution.
struct InfoReport {
    Entropies3 entropies;
    double t_xy = 0, t_xz = 0, t_yz = 0;
    double mu_star = 0;
    double q = 0;
    double i_ternary = 0;
    double r = 0;
    std::uint64_t n = 0;
    std::optional<int> year;
    bool ipf_converged = true;
    int ipf_iterations = 0;
    double ipf_deviation = 0;
};

/// Rounds bits to integer millibits, half away from zero.
inline long long to_millibits(double bits) { return std::llround(bits * 1000.0); }

inline std::string serialize_info_report(const InfoReport& r) {
    std::ostringstream os;
    os.precision(17);
    if (r.year) os << "year=" << *r.year << '\n';
    os << "N=" << r.n << '\n';
    const auto& h = r.entropies;
    os << "H_x=" << h.h_x << "\nH_y=" << h.h_y << "\nH_z=" << h.h_z << '\n';
    os << "H_xy=" << h.h_xy << "\nH_xz=" << h.h_xz << "\nH_yz=" << h.h_yz << '\n';
    os << "H_xyz=" << h.h_xyz << '\n';
    os << "T_xy=" << r.t_xy << "\nT_xz=" << r.t_xz << "\nT_yz=" << r.t_yz << '\n';
    os << "mu_star=" << r.mu_star << '\n';
    os << "Q=" << r.q << "\nI=" << r.i_ternary << "\nR=" << r.r << '\n';
    os << "Q_mb=" << to_millibits(r.q) << "\nI_mb=" << to_millibits(r.i_ternary)
       << "\nR_mb=" << to_millibits(r.r) << '\n';
    os << "regime=" << (r.mu_star < 0 ? "redundancy-dominated" : "information-dominated") << '\n';
    os << "ipf_converged=" << (r.ipf_converged ? "true" : "false") << '\n';
    os << "ipf_iterations=" << r.ipf_iterations << '\n';
    os << "ipf_deviation=" << r.ipf_deviation << '\n';
    os << "units=bits\n";
    os << "convention=Q = -mu*, R = I + Q\n";
    return os.str();
}

}  // namespace structuration
