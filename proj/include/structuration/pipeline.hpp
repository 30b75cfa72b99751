#pragma once

// Per-year analysis, multi-year indicator series, and the synthetic
// citation-series generator used for validation.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "structuration/corpus_io.hpp"
#include "structuration/distributions.hpp"
#include "structuration/factors.hpp"
#include "structuration/infomeasures.hpp"
#include "structuration/maxent.hpp"

namespace structuration {

enum class EnvironmentMode { per_year, fixed };

struct AnalysisConfig {
    std::size_t factors = 3;
    std::size_t bins = 10;
    Direction direction = Direction::citing;
    std::optional<std::string> seed_journal;
    std::optional<double> env_fraction;
    EnvironmentMode env_mode = EnvironmentMode::per_year;
    bool diag_zeroed = false;
    std::array<std::size_t, 3> use_factors{0, 1, 2};  // 0-based columns for Q/I/R
    double factor_threshold = 0.0;                    // two-mode graph export
    double journal_threshold = 0.0;                   // journal graph export
    double ipf_tol = 1e-10;
    int ipf_max_cycles = 1000;
    unsigned threads = 1;

    void validate() const {
        if (factors < 3) throw InputError("Q, I and R need at least 3 extracted factors");
        if (bins < 2) throw InputError("at least 2 bins per axis are required");
        std::set<std::size_t> distinct(use_factors.begin(), use_factors.end());
        if (distinct.size() != 3) throw InputError("--use-factors must name 3 distinct columns");
        for (auto c : use_factors)
            if (c >= factors) throw InputError("--use-factors column " + std::to_string(c + 1) + " exceeds k");
        if (seed_journal.has_value() != env_fraction.has_value())
            throw InputError("--seed-journal and --env-fraction must be given together");
        if (env_fraction && !(*env_fraction > 0 && *env_fraction < 1))
            throw InputError("environment fraction must lie in (0, 1)");
        if (threads == 0) throw InputError("thread count must be positive");
    }
};

inline std::string describe(const AnalysisConfig& c) {
    std::ostringstream os;
    os << "# k=" << c.factors << '\n';
    os << "# bins=" << c.bins << '\n';
    os << "# direction=" << (c.direction == Direction::citing ? "citing" : "cited") << '\n';
    os << "# use_factors=" << c.use_factors[0] + 1 << ',' << c.use_factors[1] + 1 << ',' << c.use_factors[2] + 1
       << '\n';
    if (c.seed_journal) {
        os << "# seed_journal=" << *c.seed_journal << '\n';
        os << "# env_fraction=" << *c.env_fraction << '\n';
        os << "# env_mode=" << (c.env_mode == EnvironmentMode::fixed ? "fixed" : "per-year") << '\n';
    }
    os << "# zero_diagonal=" << (c.diag_zeroed ? "true" : "false") << '\n';
    os << "# factor_threshold=" << c.factor_threshold << '\n';
    os << "# journal_threshold=" << c.journal_threshold << '\n';
    os << "# extraction=principal components of Pearson correlations; rotation=varimax-kaiser\n";
    os << "# column_alignment=year-over-year permutation and sign matching by max |r|\n";
    os << "# convention=Q = -mu*, R = I + Q; units=millibits\n";
    if (c.bins != 10) os << "# note=bins differ from 10; Q/I/R not comparable with 10-bin results\n";
    return os.str();
}

namespace detail {

template <typename F>
auto at_stage(const char* stage, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const InputError& e) {
        throw InputError(std::string(stage) + ": " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string(stage) + ": " + e.what());
    }
}

}  // namespace detail

/// Applies self-citation removal, direction choice and environment
/// delineation. `fixed_labels` overrides per-year delineation.
inline CitationMatrix prepare_matrix(const CitationMatrix& m, const AnalysisConfig& config,
                                     const std::vector<std::string>* fixed_labels = nullptr) {
    CitationMatrix out = config.diag_zeroed ? zero_diagonal(m) : m;
    out = select_direction(out, config.direction);
    if (fixed_labels) return restrict_to(out, *fixed_labels);
    if (config.seed_journal)
        out = detail::at_stage("environment",
                               [&] { return build_environment(out, *config.seed_journal, *config.env_fraction); });
    return out;
}

struct FactorStage {
    CorrelationMatrix correlations;
    FactorSolution solution;  // rotated
};

inline FactorStage extract_factors(const CitationMatrix& prepared, const AnalysisConfig& config) {
    FactorStage st;
    st.correlations = detail::at_stage("correlation", [&] { return correlation_matrix(prepared); });
    auto unrotated =
        detail::at_stage("extraction", [&] { return principal_components(st.correlations, config.factors); });
    st.solution = varimax_rotate(unrotated);
    return st;
}

struct YearAnalysis {
    InfoReport info;
    FactorSolution solution;
    CorrelationReport correlations;
    CorrelationMatrix correlation_matrix;
};

/// Q/I/R and correlation summaries of the selected loading columns.
inline std::pair<InfoReport, CorrelationReport> measure_solution(const FactorSolution& sol,
                                                                 const AnalysisConfig& config,
                                                                 std::optional<int> year) {
    RealMatrix three = select_columns(sol.loadings, config.use_factors);
    for (double& x : three.data()) x = std::clamp(x, -1.0, 1.0);
    auto corr = detail::at_stage("partial correlations", [&] { return partial_correlations(three); });
    auto joint = detail::at_stage("binning", [&] { return bin_loadings(three, config.bins); });
    auto info = make_info_report(joint, year, config.ipf_tol, config.ipf_max_cycles);
    return {info, corr};
}

inline YearAnalysis analyze_year(const CitationMatrix& matrix, const AnalysisConfig& config) {
    config.validate();
    const auto prepared = prepare_matrix(matrix, config);
    auto st = extract_factors(prepared, config);
    auto [info, corr] = measure_solution(st.solution, config, matrix.year);
    return {info, std::move(st.solution), corr, std::move(st.correlations)};
}

struct SeriesRow {
    int year = 0;
    std::uint64_t n = 0;
    long long q_mb = 0, i_mb = 0, r_mb = 0;
    CorrelationReport correlations;
    bool ipf_converged = true;
    bool aligned_identity = true;  // alignment left the columns untouched
    std::optional<ColumnAssignment> alignment;  // empty for the first year or without overlap
    InfoReport info;
};

struct YearFailure {
    int year = 0;
    std::string message;
};

struct SeriesReport {
    AnalysisConfig config;
    std::vector<SeriesRow> rows;
    std::vector<YearFailure> failures;
    std::vector<FactorSolution> solutions;  // aligned, parallel to rows

    bool partial() const { return !failures.empty(); }
};

namespace detail {

// Runs body(i) for i in [0, n) on up to `threads` workers.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
    if (threads <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < std::min<std::size_t>(threads, n); ++t)
        pool.emplace_back([&] {
            for (std::size_t i; (i = next.fetch_add(1)) < n;) body(i);
        });
}

}  // namespace detail

/// Analyzes every year, aligning factor columns to the preceding year.
/// Failed years are recorded and skipped.
inline SeriesReport analyze_series(const YearSeries& series, const AnalysisConfig& config) {
    config.validate();
    if (series.entries.empty()) throw InputError("empty series");
    const std::size_t n = series.entries.size();

    std::optional<std::vector<std::string>> fixed;
    if (config.seed_journal && config.env_mode == EnvironmentMode::fixed) {
        auto first = select_direction(config.diag_zeroed ? zero_diagonal(series.entries.front()) : series.entries.front(),
                                      config.direction);
        fixed = detail::at_stage("environment", [&] {
            return environment_labels(first, *config.seed_journal, *config.env_fraction);
        });
    }

    std::vector<std::optional<FactorStage>> stages(n);
    std::vector<std::string> errors(n);
    detail::parallel_for(n, config.threads, [&](std::size_t i) {
        try {
            const auto prepared = prepare_matrix(series.entries[i], config, fixed ? &*fixed : nullptr);
            stages[i] = extract_factors(prepared, config);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    std::vector<bool> identity(n, true);
    std::vector<std::optional<ColumnAssignment>> assignments(n);
    const FactorSolution* prev = nullptr;
    for (std::size_t i = 0; i < n; ++i) {
        if (!stages[i]) continue;
        if (prev) {
            try {
                auto assignment = best_alignment(*prev, stages[i]->solution);
                identity[i] = assignment.is_identity();
                assignments[i] = assignment;
                stages[i]->solution = apply_alignment(stages[i]->solution, assignment);
            } catch (const InputError&) {
                // no overlap with the previous year: keep the extraction order
            }
        }
        prev = &stages[i]->solution;
    }

    std::vector<std::optional<std::pair<InfoReport, CorrelationReport>>> measured(n);
    detail::parallel_for(n, config.threads, [&](std::size_t i) {
        if (!stages[i]) return;
        try {
            measured[i] = measure_solution(stages[i]->solution, config, series.entries[i].year);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    SeriesReport report;
    report.config = config;
    for (std::size_t i = 0; i < n; ++i) {
        const int year = series.entries[i].year;
        if (!measured[i]) {
            report.failures.push_back({year, errors[i]});
            continue;
        }
        const auto& [info, corr] = *measured[i];
        SeriesRow row;
        row.year = year;
        row.n = info.n;
        row.q_mb = to_millibits(info.q);
        row.i_mb = to_millibits(info.i_ternary);
        row.r_mb = to_millibits(info.r);
        row.correlations = corr;
        row.ipf_converged = info.ipf_converged;
        row.aligned_identity = identity[i];
        row.alignment = assignments[i];
        row.info = info;
        report.rows.push_back(row);
        report.solutions.push_back(stages[i]->solution);
    }
    return report;
}

inline std::string format_fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v == 0.0 ? 0.0 : v);
    return buf;
}

inline std::string render_series_csv(const SeriesReport& report) {
    std::string out = "year,N,Q_mb,I_mb,R_mb,r12,r13,r23,pr12_3,pr13_2,pr23_1,ipf_converged\n";
    auto opt = [](const std::optional<double>& v) { return v ? format_fixed6(*v) : std::string("NA"); };
    for (const auto& r : report.rows) {
        const auto& c = r.correlations;
        out += std::to_string(r.year) + "," + std::to_string(r.n) + "," + std::to_string(r.q_mb) + "," +
               std::to_string(r.i_mb) + "," + std::to_string(r.r_mb) + "," + format_fixed6(c.r12) + "," +
               format_fixed6(c.r13) + "," + format_fixed6(c.r23) + "," + opt(c.pr12_3) + "," + opt(c.pr13_2) +
               "," + opt(c.pr23_1) + "," + (r.ipf_converged ? "true" : "false") + "\n";
    }
    out += describe(report.config);
    for (const auto& f : report.failures) out += "# failed year " + std::to_string(f.year) + ": " + f.message + "\n";
    return out;
}

/// Parameters of the three-block synthetic citation generator. Blocks 1
/// and 2 form the merging pair; bridge journals cite and are cited by
/// both of them.
struct SynthParams {
    std::array<std::size_t, 3> blocks{10, 10, 10};
    double within_rate = 20.0;
    double between_rate = 1.0;
    int merger_year = 0;
    double merger_strength = 0.0;
    double noise_rate = 0.0;
    std::size_t bridge_journals = 0;
    double bridge_rate = 0.0;
    std::uint64_t random_seed = 1;
    int first_year = 1994;
    int last_year = 2007;

    void validate() const {
        if (within_rate < 0 || between_rate < 0 || noise_rate < 0 || bridge_rate < 0 || merger_strength < 0)
            throw InputError("synthetic rates must be non-negative");
        if (last_year < first_year) throw InputError("empty synthetic year span");
        if (blocks[0] + blocks[1] + blocks[2] + bridge_journals < 2)
            throw InputError("synthetic series needs at least 2 journals");
    }
};

namespace detail {

class PoissonSampler {
public:
    explicit PoissonSampler(std::seed_seq& seq) : gen_(seq) {}

    std::uint64_t operator()(double mean) {
        std::uint64_t total = 0;
        // split large means so exp(-mean) stays representable
        while (mean > 0) {
            const double part = std::min(mean, 30.0);
            mean -= part;
            const double limit = std::exp(-part);
            double prod = uniform();
            while (prod > limit) {
                ++total;
                prod *= uniform();
            }
        }
        return total;
    }

private:
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }
    std::mt19937_64 gen_;
};

}  // namespace detail

/// Fraction of the merger completed in `year`.
inline double merger_progress(const SynthParams& p, int year) {
    return year > p.merger_year ? std::min(1.0, p.merger_strength * (year - p.merger_year)) : 0.0;
}

/// Expected citation count between a cited and a citing journal; block ids
/// 0..2, 3 marks a bridge journal.
inline double synth_rate(const SynthParams& p, int year, int cited_block, int citing_block) {
    double rate;
    if (cited_block == citing_block) {
        rate = p.within_rate;
    } else if (cited_block == 3 || citing_block == 3) {
        const int other = cited_block == 3 ? citing_block : cited_block;
        rate = other <= 1 ? p.bridge_rate : p.between_rate;
    } else if ((cited_block == 0 && citing_block == 1) || (cited_block == 1 && citing_block == 0)) {
        rate = p.between_rate + (p.within_rate - p.between_rate) * merger_progress(p, year);
    } else {
        rate = p.between_rate;
    }
    return rate + p.noise_rate;
}

inline YearSeries synth_series(const SynthParams& p) {
    p.validate();
    std::vector<std::string> labels;
    std::vector<int> block_of;
    for (int b = 0; b < 3; ++b)
        for (std::size_t j = 0; j < p.blocks[b]; ++j) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "B%d-J%03zu", b + 1, j + 1);
            labels.emplace_back(buf);
            block_of.push_back(b);
        }
    for (std::size_t j = 0; j < p.bridge_journals; ++j) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "G-J%03zu", j + 1);
        labels.emplace_back(buf);
        block_of.push_back(3);
    }

    const std::size_t n = labels.size();
    YearSeries series;
    for (int year = p.first_year; year <= p.last_year; ++year) {
        std::seed_seq seq{static_cast<std::uint32_t>(p.random_seed), static_cast<std::uint32_t>(p.random_seed >> 32),
                          static_cast<std::uint32_t>(year)};
        detail::PoissonSampler draw(seq);
        CitationMatrix m;
        m.year = year;
        m.row_labels = labels;
        m.col_labels = labels;
        m.cells = Matrix<std::uint64_t>(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) m.cells(i, j) = draw(synth_rate(p, year, block_of[i], block_of[j]));
        series.entries.push_back(std::move(m));
    }
    return series;
}

}  // namespace structuration
