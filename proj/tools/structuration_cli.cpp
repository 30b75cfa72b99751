#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "structuration/structuration.hpp"

namespace fs = std::filesystem;
using namespace structuration;

namespace {

struct CommonFlags {
    std::optional<std::string> seed_journal;
    std::optional<double> env_fraction;
    std::string env_mode = "per-year";
    std::string direction = "citing";
    std::size_t factors = 3;
    std::size_t bins = 10;
    bool zero_diagonal = false;
    std::string use_factors = "1,2,3";
    double ipf_tol = 1e-10;
    int ipf_max_cycles = 1000;

    void attach(CLI::App* cmd) {
        cmd->add_option("--seed-journal", seed_journal, "Seed journal delineating the citation environment");
        cmd->add_option("--env-fraction", env_fraction, "Citation share threshold for the environment, in (0,1)");
        cmd->add_option("--env-mode", env_mode, "Environment per year or fixed to the first year")
            ->check(CLI::IsMember({"per-year", "fixed"}));
        cmd->add_option("--direction", direction, "Analyze citing or cited patterns")
            ->check(CLI::IsMember({"citing", "cited"}));
        cmd->add_option("--factors", factors, "Number of components to extract (k >= 3)");
        cmd->add_option("--bins", bins, "Bins per loading axis");
        cmd->add_flag("--zero-diagonal", zero_diagonal, "Remove journal self-citations");
        cmd->add_option("--use-factors", use_factors, "Three 1-based factor columns for Q, I and R");
        cmd->add_option("--ipf-tol", ipf_tol, "IPF margin tolerance");
        cmd->add_option("--ipf-max-cycles", ipf_max_cycles, "IPF cycle limit");
    }

    AnalysisConfig config() const {
        AnalysisConfig c;
        c.factors = factors;
        c.bins = bins;
        c.direction = direction == "cited" ? Direction::cited : Direction::citing;
        c.seed_journal = seed_journal;
        c.env_fraction = env_fraction;
        c.env_mode = env_mode == "fixed" ? EnvironmentMode::fixed : EnvironmentMode::per_year;
        c.diag_zeroed = zero_diagonal;
        c.ipf_tol = ipf_tol;
        c.ipf_max_cycles = ipf_max_cycles;
        const auto cols = parse_list<std::size_t>(use_factors, "--use-factors");
        if (cols.size() != 3) throw InputError("--use-factors needs exactly 3 columns");
        for (std::size_t a = 0; a < 3; ++a) {
            if (cols[a] == 0) throw InputError("--use-factors columns are 1-based");
            c.use_factors[a] = cols[a] - 1;
        }
        c.validate();
        return c;
    }

    template <typename T>
    static std::vector<T> parse_list(const std::string& text, const char* flag) {
        std::vector<T> out;
        std::stringstream ss(text);
        for (std::string item; std::getline(ss, item, ',');) {
            std::istringstream is(item);
            T v{};
            if (!(is >> v) || !(is >> std::ws).eof()) throw InputError(std::string("bad value in ") + flag + ": " + item);
            out.push_back(v);
        }
        return out;
    }
};

void write_file(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out << text;
}

int year_from_path(const fs::path& p) {
    const auto stem = p.stem().string();
    int year = 0;
    auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), year);
    return ec == std::errc{} && ptr == stem.data() + stem.size() ? year : 0;
}

CitationMatrix load_matrix(const fs::path& path) {
    auto m = parse_citation_csv(std::string_view(read_text_file(path)));
    m.year = year_from_path(path);
    return m;
}

std::string betweenness_csv(const std::map<std::string, double>& scores) {
    std::string out = "label,betweenness\n";
    for (const auto& [label, v] : scores) out += detail::quote_label(label) + "," + format_fixed6(v) + "\n";
    return out;
}

std::string year_suffix(int year) { return year ? "_" + std::to_string(year) : std::string(); }

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structuration measures for journal citation networks"};
    app.require_subcommand(1);

    // analyze
    CommonFlags analyze_flags;
    std::string analyze_input, analyze_out, factors_out, joint_out, maxent_out;
    auto* analyze = app.add_subcommand("analyze", "Q, I and R for one citation matrix");
    analyze->add_option("--input", analyze_input, "Citation matrix CSV")->required();
    analyze->add_option("--out", analyze_out, "Report file ('-' for stdout)")->required();
    analyze->add_option("--factors-out", factors_out, "Write the rotated loading matrix");
    analyze->add_option("--joint-out", joint_out, "Write the binned joint distribution");
    analyze->add_option("--maxent-out", maxent_out, "Write the maximum-entropy fit");
    analyze_flags.attach(analyze);

    // series
    CommonFlags series_flags;
    std::string series_dir, series_out, series_factors_dir;
    unsigned threads = 1;
    auto* series = app.add_subcommand("series", "Q, I and R for a directory of <year>.csv matrices");
    series->add_option("--dir", series_dir, "Directory of <year>.csv files")->required();
    series->add_option("--out", series_out, "Series CSV ('-' for stdout)")->required();
    series->add_option("--threads", threads, "Worker threads");
    series->add_option("--factors-dir", series_factors_dir, "Write aligned loadings per year here");
    series_flags.attach(series);

    // export-net
    CommonFlags net_flags;
    std::string net_input, net_dir, prefix;
    double threshold = 0.0;
    std::optional<double> journal_threshold;
    auto* export_net = app.add_subcommand("export-net", "Pajek files of the journal-factor graph");
    auto* in_opt = export_net->add_option("--input", net_input, "Citation matrix CSV");
    auto* dir_opt = export_net->add_option("--dir", net_dir, "Directory of <year>.csv files");
    in_opt->excludes(dir_opt);
    export_net->add_option("--threshold", threshold, "Minimum positive loading for an edge");
    export_net->add_option("--journal-threshold", journal_threshold,
                           "Also write the journal correlation graph and its betweenness");
    export_net->add_option("--prefix", prefix, "Output path prefix")->required();
    net_flags.attach(export_net);

    // synth
    std::string blocks_text = "10,10,10", years_text = "1994:2007", out_dir;
    SynthParams synth_params;
    auto* synth = app.add_subcommand("synth", "Generate a synthetic citation series");
    synth->add_option("--blocks", blocks_text, "Journals per block, a,b,c");
    synth->add_option("--within", synth_params.within_rate, "Mean citations within a block");
    synth->add_option("--between", synth_params.between_rate, "Mean citations between blocks");
    synth->add_option("--merger-year", synth_params.merger_year, "Year after which blocks 1 and 2 merge");
    synth->add_option("--merger-strength", synth_params.merger_strength, "Merger progress per year");
    synth->add_option("--noise", synth_params.noise_rate, "Mean background citations for every pair");
    synth->add_option("--bridges", synth_params.bridge_journals, "Bridging journals linked to blocks 1 and 2");
    synth->add_option("--bridge-rate", synth_params.bridge_rate, "Mean citations between bridges and blocks 1, 2");
    synth->add_option("--years", years_text, "Year span y0:y1");
    synth->add_option("--rng-seed", synth_params.random_seed, "Random seed");
    synth->add_option("--out-dir", out_dir, "Directory for <year>.csv files")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    auto emit = [](const std::string& path, const std::string& text) {
        if (path == "-")
            std::cout << text;
        else
            write_file(path, text);
    };

    try {
        if (*analyze) {
            const auto config = analyze_flags.config();
            const auto matrix = load_matrix(analyze_input);
            const auto result = analyze_year(matrix, config);
            std::string report = serialize_info_report(result.info);
            report += describe(config);
            emit(analyze_out, report);
            if (!factors_out.empty()) write_file(factors_out, serialize_factor_csv(result.solution));
            if (!joint_out.empty() || !maxent_out.empty()) {
                RealMatrix three = select_columns(result.solution.loadings, config.use_factors);
                for (double& x : three.data()) x = std::clamp(x, -1.0, 1.0);
                const auto joint = bin_loadings(three, config.bins);
                if (!joint_out.empty()) write_file(joint_out, serialize_joint_csv(joint));
                if (!maxent_out.empty())
                    write_file(maxent_out, serialize_maxent(ipf_fit(joint, config.ipf_tol, config.ipf_max_cycles)));
            }
            return 0;
        }
        if (*series) {
            auto config = series_flags.config();
            config.threads = threads;
            config.validate();
            const auto data = load_year_series_dir(series_dir);
            const auto report = analyze_series(data, config);
            emit(series_out, render_series_csv(report));
            if (!series_factors_dir.empty())
                for (std::size_t i = 0; i < report.rows.size(); ++i)
                    write_file(fs::path(series_factors_dir) / (std::to_string(report.rows[i].year) + "_factors.csv"),
                               serialize_factor_csv(report.solutions[i]));
            for (const auto& f : report.failures) std::cerr << "year " << f.year << " failed: " << f.message << '\n';
            return report.partial() ? 2 : 0;
        }
        if (*export_net) {
            auto config = net_flags.config();
            config.factor_threshold = threshold;
            if (journal_threshold) config.journal_threshold = *journal_threshold;
            std::vector<CitationMatrix> matrices;
            if (!net_input.empty())
                matrices.push_back(load_matrix(net_input));
            else if (!net_dir.empty())
                matrices = load_year_series_dir(net_dir).entries;
            else
                throw InputError("export-net needs --input or --dir");

            std::optional<std::vector<std::string>> fixed;
            if (config.seed_journal && config.env_mode == EnvironmentMode::fixed) {
                auto first = select_direction(config.diag_zeroed ? zero_diagonal(matrices.front()) : matrices.front(),
                                              config.direction);
                fixed = environment_labels(first, *config.seed_journal, *config.env_fraction);
            }
            const FactorSolution* prev = nullptr;
            std::vector<FactorStage> stages;
            stages.reserve(matrices.size());
            for (const auto& m : matrices) {
                auto st = extract_factors(prepare_matrix(m, config, fixed ? &*fixed : nullptr), config);
                if (prev) {
                    try {
                        st.solution = align_solution(*prev, st.solution);
                    } catch (const InputError&) {
                    }
                }
                stages.push_back(std::move(st));
                prev = &stages.back().solution;
                const auto base = prefix + year_suffix(m.year);
                const auto files = export_pajek(factor_graph(stages.back().solution, config.factor_threshold));
                write_file(base + ".net", files.net);
                write_file(base + ".clu", *files.clu);
                if (journal_threshold) {
                    const auto jg = journal_graph(stages.back().correlations, config.journal_threshold);
                    write_file(base + "_journals.net", export_pajek(jg).net);
                    write_file(base + "_betweenness.csv", betweenness_csv(betweenness(jg)));
                }
            }
            return 0;
        }
        if (*synth) {
            const auto blocks = CommonFlags::parse_list<std::size_t>(blocks_text, "--blocks");
            if (blocks.size() != 3) throw InputError("--blocks needs exactly 3 sizes");
            synth_params.blocks = {blocks[0], blocks[1], blocks[2]};
            const auto colon = years_text.find(':');
            if (colon == std::string::npos) throw InputError("--years must look like y0:y1");
            const auto y0 = CommonFlags::parse_list<int>(years_text.substr(0, colon), "--years");
            const auto y1 = CommonFlags::parse_list<int>(years_text.substr(colon + 1), "--years");
            if (y0.size() != 1 || y1.size() != 1) throw InputError("--years must look like y0:y1");
            synth_params.first_year = y0[0];
            synth_params.last_year = y1[0];
            const auto data = synth_series(synth_params);
            for (const auto& m : data.entries)
                write_file(fs::path(out_dir) / (std::to_string(m.year) + ".csv"), serialize_citation_csv(m));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
