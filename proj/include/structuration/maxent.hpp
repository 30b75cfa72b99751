#pragma once

// Maximum-entropy fit of the no-three-way-interaction model AB:AC:BC by
// iterative proportional fitting, and the ternary interaction information
// derived from it.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "structuration/distributions.hpp"
#include "structuration/infomeasures.hpp"

namespace structuration {

struct MaxEntModel {
    JointDistribution3 fitted;
    int iterations = 0;
    double max_margin_deviation = 0;
    bool converged = false;
};

namespace detail {

inline double margin_deviation(const MarginSet& a, const MarginSet& b) {
    double d = 0;
    auto upd = [&](const RealMatrix& x, const RealMatrix& y) {
        for (std::size_t i = 0; i < x.data().size(); ++i) d = std::max(d, std::abs(x.data()[i] - y.data()[i]));
    };
    upd(a.ab, b.ab);
    upd(a.ac, b.ac);
    upd(a.bc, b.bc);
    return d;
}

}  // namespace detail

/// Fits the maximum-entropy distribution sharing the three bivariate
/// margins of `joint`. Starts from the uniform distribution on cells not
/// excluded by a zero target margin and scales to the AB, AC and BC margins
/// in turn each cycle. Non-convergence is reported, not thrown.
inline MaxEntModel ipf_fit(const JointDistribution3& joint, double tol = 1e-10, int max_cycles = 1000) {
    if (!(tol > 0)) throw InputError("IPF tolerance must be positive");
    detail::validate_distribution(joint.probabilities);
    const auto [nx, ny, nz] = joint.shape;
    const MarginSet target = margins(joint);

    MaxEntModel model;
    model.fitted.shape = joint.shape;
    auto& f = model.fitted.probabilities;
    f.assign(joint.size(), 0.0);
    std::size_t permitted = 0;
    for (std::size_t i = 0; i < nx; ++i)
        for (std::size_t j = 0; j < ny; ++j)
            for (std::size_t k = 0; k < nz; ++k)
                if (target.ab(i, j) > 0 && target.ac(i, k) > 0 && target.bc(j, k) > 0) {
                    f[model.fitted.index(i, j, k)] = 1.0;
                    ++permitted;
                }
    for (double& v : f) v /= static_cast<double>(permitted);

    RealMatrix cur_ab(nx, ny), cur_ac(nx, nz), cur_bc(ny, nz);
    for (int cycle = 1; cycle <= max_cycles; ++cycle) {
        // AB
        std::fill(cur_ab.data().begin(), cur_ab.data().end(), 0.0);
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j)
                for (std::size_t k = 0; k < nz; ++k) cur_ab(i, j) += f[model.fitted.index(i, j, k)];
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j) {
                if (cur_ab(i, j) == 0) continue;
                const double s = target.ab(i, j) / cur_ab(i, j);
                for (std::size_t k = 0; k < nz; ++k) f[model.fitted.index(i, j, k)] *= s;
            }
        // AC
        std::fill(cur_ac.data().begin(), cur_ac.data().end(), 0.0);
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j)
                for (std::size_t k = 0; k < nz; ++k) cur_ac(i, k) += f[model.fitted.index(i, j, k)];
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j)
                for (std::size_t k = 0; k < nz; ++k)
                    if (cur_ac(i, k) != 0) f[model.fitted.index(i, j, k)] *= target.ac(i, k) / cur_ac(i, k);
        // BC
        std::fill(cur_bc.data().begin(), cur_bc.data().end(), 0.0);
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j)
                for (std::size_t k = 0; k < nz; ++k) cur_bc(j, k) += f[model.fitted.index(i, j, k)];
        for (std::size_t i = 0; i < nx; ++i)
            for (std::size_t j = 0; j < ny; ++j)
                for (std::size_t k = 0; k < nz; ++k)
                    if (cur_bc(j, k) != 0) f[model.fitted.index(i, j, k)] *= target.bc(j, k) / cur_bc(j, k);

        double total = 0;
        for (double v : f) total += v;
        for (double& v : f) v /= total;

        model.iterations = cycle;
        model.max_margin_deviation = detail::margin_deviation(margins(model.fitted), target);
        if (model.max_margin_deviation < tol) {
            model.converged = true;
            break;
        }
    }
    return model;
}

struct TernaryInteraction {
    double bits = 0;
    bool converged = false;
    MaxEntModel model;
};

/// Ternary interaction information: entropy of the AB:AC:BC
/// maximum-entropy fit minus the entropy of the observed table.
inline TernaryInteraction ternary_interaction(const JointDistribution3& joint, double tol = 1e-10,
                                              int max_cycles = 1000) {
    TernaryInteraction out;
    out.model = ipf_fit(joint, tol, max_cycles);
    out.converged = out.model.converged;
    const double i = detail::entropy_bits(out.model.fitted.probabilities) - detail::entropy_bits(joint.probabilities);
    out.bits = detail::floor_at_zero(i, 1e-9);
    return out;
}

/// R = I + Q.
inline double redundancy(double q, double i) { return i + q; }

/// Computes every entropy, transmission and the Q, I and R indicators for
/// one binned distribution.
inline InfoReport make_info_report(const JointDistribution3& joint, std::optional<int> year = std::nullopt,
                                   double tol = 1e-10, int max_cycles = 1000) {
    InfoReport r;
    r.entropies = entropies3(joint);
    const auto& h = r.entropies;
    r.t_xy = detail::floor_at_zero(h.h_x + h.h_y - h.h_xy, 1e-12);
    r.t_xz = detail::floor_at_zero(h.h_x + h.h_z - h.h_xz, 1e-12);
    r.t_yz = detail::floor_at_zero(h.h_y + h.h_z - h.h_yz, 1e-12);
    r.mu_star = mu_star(h);
    r.q = -r.mu_star;
    const auto ti = ternary_interaction(joint, tol, max_cycles);
    r.i_ternary = ti.bits;
    r.r = redundancy(r.q, r.i_ternary);
    r.n = joint.case_count;
    r.year = year;
    r.ipf_converged = ti.converged;
    r.ipf_iterations = ti.model.iterations;
    r.ipf_deviation = ti.model.max_margin_deviation;
    return r;
}

inline std::string serialize_maxent(const MaxEntModel& m) {
    std::ostringstream os;
    os << serialize_joint_csv(m.fitted);
    os.precision(6);
    os << "# iterations=" << m.iterations << '\n';
    os << "# deviation=" << std::scientific << m.max_margin_deviation << '\n';
    os << "# converged=" << (m.converged ? "true" : "false") << '\n';
    return os.str();
}

}  // namespace structuration
