// Acceptance suite: prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "structuration/structuration.hpp"

using namespace structuration;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

int failures = 0;

void report(int id, bool ok, const std::string& title, const std::string& detail) {
    std::printf("%s criterion %d: %s (%s)\n", ok ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

JointDistribution3 cells_joint(std::initializer_list<std::size_t> cells) {
    std::vector<double> w(8, 0.0);
    for (auto c : cells) w[c] = 1.0;
    return JointDistribution3::from_weights({2, 2, 2}, w);
}

JointDistribution3 factorized(std::mt19937_64& rng, std::size_t nx, std::size_t ny, std::size_t nz) {
    std::uniform_real_distribution<double> u(0.01, 1.0);
    std::vector<double> pxy(nx * ny), pz(nz), w;
    for (double& v : pxy) v = u(rng);
    for (double& v : pz) v = u(rng);
    for (double a : pxy)
        for (double c : pz) w.push_back(a * c);
    return JointDistribution3::from_weights({nx, ny, nz}, w);
}

double margin_gap(const JointDistribution3& a, const JointDistribution3& b) {
    double d = 0;
    for (int axis = 0; axis < 3; ++axis) {
        const auto x = oracle::sum_out(a, axis), y = oracle::sum_out(b, axis);
        for (std::size_t i = 0; i < x.data().size(); ++i) d = std::max(d, std::abs(x.data()[i] - y.data()[i]));
    }
    return d;
}

void criterion1() {
    std::mt19937_64 rng(1001);
    const auto t0 = Clock::now();
    double worst = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto p = oracle::random_positive_joint(rng, 10, 10, 10);
        worst = std::max(worst, std::abs(mu_star3(p) - oracle::interaction_via_conditioning(p)));
    }
    const double secs = seconds_since(t0);
    report(1, worst <= 1e-10 && secs < 10.0, "mu* equals T_xy minus conditional transmission on 1000 random joints",
           "max deviation " + fmt("%.3e", worst) + ", " + fmt("%.2f s", secs));
}

void criterion2() {
    const double x = mu_star3(cells_joint({0, 3, 5, 6}));
    const double c = mu_star3(cells_joint({0, 7}));
    std::mt19937_64 rng(1002);
    double f = 0;
    for (int t = 0; t < 100; ++t) f = std::max(f, std::abs(mu_star3(factorized(rng, 2 + t % 9, 3 + t % 7, 2 + t % 5))));
    const bool ok = std::abs(x + 1) <= 1e-12 && std::abs(c - 1) <= 1e-12 && f <= 1e-12;
    report(2, ok, "analytic sign cases",
           "XOR mu*=" + fmt("%.15f", x) + ", triple copy mu*=" + fmt("%.15f", c) + ", factorized max |mu*|=" +
               fmt("%.2e", f));
}

void criterion3() {
    std::mt19937_64 rng(1003);
    double worst_margin = 0, min_i = 1e300;
    int converged = 0;
    for (int t = 0; t < 1000; ++t) {
        const auto p = t % 2 ? oracle::random_positive_joint(rng, 10, 10, 10) : oracle::random_sparse_joint(rng, 10, 0.5);
        const auto ti = ternary_interaction(p);
        min_i = std::min(min_i, ti.bits);
        if (ti.converged) {
            ++converged;
            worst_margin = std::max(worst_margin, margin_gap(ti.model.fitted, p));
        }
    }
    const double xor_i = ternary_interaction(cells_joint({0, 3, 5, 6})).bits;
    const double copy_i = ternary_interaction(cells_joint({0, 7})).bits;
    double fact_i = 0;
    for (int t = 0; t < 50; ++t) fact_i = std::max(fact_i, ternary_interaction(factorized(rng, 4, 5, 6)).bits);
    const bool ok = converged > 0 && worst_margin <= 1e-10 && min_i >= -1e-9 && std::abs(xor_i - 1) <= 1e-6 &&
                    fact_i <= 1e-9 && copy_i <= 1e-9;
    report(3, ok, "IPF margins and ternary interaction",
           std::to_string(converged) + "/1000 converged, max margin error " + fmt("%.2e", worst_margin) +
               ", min I " + fmt("%.2e", min_i) + ", XOR I " + fmt("%.9f", xor_i) + ", factorized max I " +
               fmt("%.2e", fact_i) + ", triple copy I " + fmt("%.2e", copy_i));
}

void criterion4() {
    std::ifstream in(PUBLISHED_TABLES);
    std::string line;
    std::getline(in, line);
    int rows = 0, exact = 0, within = 0;
    std::string off;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::vector<long long> v;
        for (std::string f; std::getline(ss, f, ',');) v.push_back(std::stoll(f));
        const long long table = v[0], year = v[1], q = v[2], i = v[3], r = v[4];
        const long long implied = to_millibits(redundancy(static_cast<double>(q) / 1000, static_cast<double>(i) / 1000));
        ++rows;
        if (implied == r) ++exact;
        if (std::llabs(implied - r) <= 1) ++within;
        if (implied != r)
            off += " T" + std::to_string(table) + "/" + std::to_string(year) + ":" + std::to_string(r - implied);
    }
    report(4, rows == 26 && within == 26, "published (Q, I, R) rows satisfy R = Q + I within 1 millibit",
           std::to_string(within) + "/" + std::to_string(rows) + " within 1 mb, " + std::to_string(exact) +
               " exact; rounding residues" + off);
}

void criterion5() {
    // two blocks bridged by general journals; the third factor is degenerate
    SynthParams jacs;
    jacs.blocks = {20, 20, 0};
    jacs.within_rate = 1000;
    jacs.between_rate = 0;
    jacs.bridge_journals = 5;
    jacs.bridge_rate = 300;
    jacs.random_seed = 1;
    const auto a = analyze_series(synth_series(jacs), AnalysisConfig{});
    double max_i_mb = -1e300, max_q_mb = -1e300;
    for (const auto& row : a.rows) {
        max_i_mb = std::max(max_i_mb, 1000 * row.info.i_ternary);
        max_q_mb = std::max(max_q_mb, 1000 * row.info.q);
    }
    const bool jacs_ok = !a.partial() && a.rows.size() == 14 && max_i_mb < 0.1 && max_q_mb < 0;

    // blocks 1 and 2 merge linearly starting after 2000
    SynthParams merger;
    merger.blocks = {20, 20, 20};
    merger.within_rate = 10;
    merger.between_rate = 1;
    merger.merger_year = 2000;
    merger.merger_strength = 0.5;
    merger.random_seed = 1;
    const auto m = analyze_series(synth_series(merger), AnalysisConfig{});
    int q_peak = 0, i_peak = 0, q_trough = 0;
    double best_q = -1e300, best_i = -1e300, worst_q = 1e300;
    for (const auto& row : m.rows) {
        if (row.info.q > best_q) best_q = row.info.q, q_peak = row.year;
        if (row.info.i_ternary > best_i) best_i = row.info.i_ternary, i_peak = row.year;
        if (row.info.q < worst_q) worst_q = row.info.q, q_trough = row.year;
    }
    const bool merger_ok = !m.partial() && std::abs(q_peak - merger.merger_year) <= 1 &&
                           std::abs(i_peak - merger.merger_year) <= 1;
    report(5, jacs_ok && merger_ok, "two-block pattern and merger peak",
           std::string("two-block: ") + (jacs_ok ? "ok" : "violated") + ", max I " + fmt("%.4f mb", max_i_mb) +
               ", max Q " + fmt("%.4f mb", max_q_mb) + "; merger at " + std::to_string(merger.merger_year) +
               ": " + (merger_ok ? "ok" : "violated") + ", Q peaks " + std::to_string(q_peak) + ", I peaks " +
               std::to_string(i_peak) + ", Q minimum " + fmt("%.0f mb", 1000 * worst_q) + " in " +
               std::to_string(q_trough));
}

void criterion6() {
    std::mt19937_64 rng(1006);
    double rec = 0, trace = 0;
    for (std::size_t n : {2u, 5u, 10u, 20u, 35u, 50u}) {
        for (int t = 0; t < 3; ++t) {
            const auto r = oracle::random_correlation(rng, n, 2 * n + 5);
            const auto e = jacobi_eigen(r);
            double sum = 0;
            for (double v : e.values) sum += v;
            trace = std::max(trace, std::abs(sum - static_cast<double>(n)));
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) {
                    double s = 0;
                    for (std::size_t k = 0; k < n; ++k) s += e.vectors(i, k) * e.values[k] * e.vectors(j, k);
                    rec = std::max(rec, std::abs(s - r(i, j)));
                }
        }
    }
    double comm = 0;
    bool monotone = true, converged = true;
    for (int t = 0; t < 20; ++t) {
        FactorSolution s;
        s.loadings = oracle::random_matrix(rng, 50, 3, -0.9, 0.9);
        s.labels.assign(50, "");
        const auto rot = varimax_rotate(s);
        converged = converged && rot.rotation.converged && rot.rotation.sweeps <= 100;
        for (std::size_t i = 0; i < 50; ++i) {
            double h0 = 0, h1 = 0;
            for (std::size_t j = 0; j < 3; ++j) {
                h0 += s.loadings(i, j) * s.loadings(i, j);
                h1 += rot.loadings(i, j) * rot.loadings(i, j);
            }
            comm = std::max(comm, std::abs(h0 - h1));
        }
        double prev = varimax_criterion(s.loadings);
        for (int sweeps = 1; sweeps <= rot.rotation.sweeps; ++sweeps) {
            const double now = varimax_criterion(varimax_rotate(s, 0.0, sweeps).loadings);
            monotone = monotone && now >= prev - 1e-12;
            prev = now;
        }
    }
    double grid = 0;
    for (int t = 0; t < 50; ++t) {
        FactorSolution s;
        s.loadings = oracle::random_matrix(rng, 6, 2, -1, 1);
        s.labels.assign(6, "");
        grid = std::max(grid, std::abs(oracle::varimax_value(varimax_rotate(s).loadings) -
                                       oracle::varimax_grid_best(s.loadings)));
    }
    const bool ok = rec <= 1e-8 && trace <= 1e-8 && comm <= 1e-8 && monotone && converged && grid <= 1e-3;
    report(6, ok, "eigendecomposition and varimax",
           "reconstruction " + fmt("%.2e", rec) + ", trace " + fmt("%.2e", trace) + ", communality " +
               fmt("%.2e", comm) + ", monotone " + (monotone ? "yes" : "no") + ", converged " +
               (converged ? "yes" : "no") + ", 6x2 grid gap " + fmt("%.2e", grid));
}

void criterion7() {
    std::mt19937_64 rng(1007);
    double worst = 0;
    for (int t = 0; t < 100; ++t) {
        const auto l = oracle::random_matrix(rng, 50, 3, -1, 1);
        const auto c1 = l.column(0), c2 = l.column(1), c3 = l.column(2);
        const auto r = partial_correlations(l);
        if (!r.pr12_3 || !r.pr13_2 || !r.pr23_1) {
            worst = INFINITY;
            break;
        }
        worst = std::max(worst, std::abs(*r.pr12_3 - oracle::partial_by_residuals(c1, c2, c3)));
        worst = std::max(worst, std::abs(*r.pr13_2 - oracle::partial_by_residuals(c1, c3, c2)));
        worst = std::max(worst, std::abs(*r.pr23_1 - oracle::partial_by_residuals(c2, c3, c1)));
    }
    report(7, worst <= 1e-10, "partial correlations match residual regression", "max deviation " + fmt("%.2e", worst));
}

void criterion8() {
    std::mt19937_64 rng(1008);
    int connected = 0;
    double worst = 0;
    for (int t = 0; t < 200; ++t) {
        const std::size_t n = 2 + rng() % 7;
        std::bernoulli_distribution keep(0.25 + 0.5 * static_cast<double>(t % 10) / 10);
        JournalGraph g;
        std::vector<std::pair<std::size_t, std::size_t>> edges;
        for (std::size_t i = 0; i < n; ++i) g.nodes.push_back("v" + std::to_string(i));
        for (std::size_t u = 0; u < n; ++u)
            for (std::size_t v = u + 1; v < n; ++v)
                if (keep(rng)) {
                    edges.emplace_back(u, v);
                    g.edges.push_back({u, v, 1.0});
                }
        // connectivity by union-find
        std::vector<std::size_t> parent(n);
        for (std::size_t i = 0; i < n; ++i) parent[i] = i;
        auto find = [&](std::size_t x) {
            while (parent[x] != x) x = parent[x] = parent[parent[x]];
            return x;
        };
        for (auto [u, v] : edges) parent[find(u)] = find(v);
        bool is_connected = true;
        for (std::size_t i = 1; i < n; ++i) is_connected = is_connected && find(i) == find(0);
        if (!is_connected) continue;
        ++connected;
        const auto got = betweenness(g);
        const auto want = oracle::betweenness_by_enumeration(n, edges);
        for (std::size_t i = 0; i < n; ++i) worst = std::max(worst, std::abs(got.at(g.nodes[i]) - want[i]));
    }
    report(8, connected > 0 && worst <= 1e-12, "betweenness matches shortest-path enumeration",
           std::to_string(connected) + " connected graphs of 200, max deviation " + fmt("%.2e", worst));
}

void criterion9() {
    std::mt19937_64 rng(1009);
    std::uniform_real_distribution<double> w(0, 1);
    int ok_graphs = 0;
    for (int t = 0; t < 50; ++t) {
        TwoModeGraph g;
        const std::size_t nj = 1 + rng() % 30, nf = 3 + rng() % 3;
        for (std::size_t i = 0; i < nj; ++i) g.journal_nodes.push_back("Journal \"" + std::to_string(i) + "\", vol");
        for (std::size_t j = 0; j < nf; ++j) g.factor_nodes.push_back("F" + std::to_string(j + 1));
        for (std::size_t i = 0; i < nj; ++i)
            for (std::size_t j = 0; j < nf; ++j)
                if (rng() % 3 == 0) g.edges.push_back({i, j, w(rng)});
        const auto files = export_pajek(g);
        const auto back = parse_pajek(files.net, *files.clu);
        bool ok = back.labels.size() == nj + nf && back.partition.size() == nj + nf && back.edges.size() == g.edges.size();
        for (std::size_t i = 0; ok && i < nj + nf; ++i) {
            ok = back.labels[i] == (i < nj ? g.journal_nodes[i] : g.factor_nodes[i - nj]) &&
                 back.partition[i] == (i < nj ? 1 : 2);
        }
        for (std::size_t e = 0; ok && e < g.edges.size(); ++e) {
            char a[32], b[32];
            std::snprintf(a, sizeof a, "%.6f", g.edges[e].weight);
            std::snprintf(b, sizeof b, "%.6f", back.edges[e].weight);
            ok = back.edges[e].u == g.edges[e].u && back.edges[e].v == nj + g.edges[e].v && std::string(a) == b;
        }
        ok_graphs += ok;
    }
    report(9, ok_graphs == 50, "Pajek export round-trips", std::to_string(ok_graphs) + "/50 graphs recovered");
}

void criterion10() {
    SynthParams p;
    p.blocks = {60, 60, 60};
    p.bridge_journals = 20;
    p.bridge_rate = 2;
    p.within_rate = 10;
    p.between_rate = 1;
    p.noise_rate = 0.2;
    p.merger_year = 2000;
    p.merger_strength = 0.25;
    p.random_seed = 10;
    const auto series = synth_series(p);
    AnalysisConfig c;
    const auto t0 = Clock::now();
    const auto first = render_series_csv(analyze_series(series, c));
    const double secs = seconds_since(t0);
    const auto second = render_series_csv(analyze_series(series, c));
    c.threads = 4;
    const auto threaded = render_series_csv(analyze_series(series, c));
    const bool ok = secs < 5.0 && first == second && first == threaded;
    report(10, ok, "200-journal x 14-year series performance and determinism",
           fmt("%.2f s single-threaded", secs) + ", repeat identical " + (first == second ? "yes" : "no") +
               ", 4 threads identical " + (first == threaded ? "yes" : "no"));
}

}  // namespace

int main() {
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    std::printf("%d of 10 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
