#pragma once

// Citation matrices on disk and the journal-set selections applied to them
// before factor analysis.

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "structuration/matrix.hpp"

namespace structuration {

/// Cited (rows) x citing (columns) journal citation counts for one year.
struct CitationMatrix {
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    Matrix<std::uint64_t> cells;
    int year = 0;

    std::size_t rows() const noexcept { return cells.rows(); }
    std::size_t cols() const noexcept { return cells.cols(); }
    std::uint64_t operator()(std::size_t r, std::size_t c) const { return cells(r, c); }

    std::optional<std::size_t> row_index(std::string_view label) const {
        auto it = std::find(row_labels.begin(), row_labels.end(), label);
        if (it == row_labels.end()) return std::nullopt;
        return static_cast<std::size_t>(it - row_labels.begin());
    }
    std::optional<std::size_t> col_index(std::string_view label) const {
        auto it = std::find(col_labels.begin(), col_labels.end(), label);
        if (it == col_labels.end()) return std::nullopt;
        return static_cast<std::size_t>(it - col_labels.begin());
    }

    friend bool operator==(const CitationMatrix&, const CitationMatrix&) = default;
};

struct YearSeries {
    std::vector<CitationMatrix> entries;  // ascending by year
};

enum class Direction { citing, cited };

namespace detail {

inline std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

struct CsvField {
    std::string text;
    bool quoted = false;
};

// Splits one logical CSV record. Quoted fields may contain commas, doubled
// quotes and newlines; `pos` is advanced past the record terminator.
inline std::vector<CsvField> read_csv_record(std::string_view text, std::size_t& pos,
                                             std::size_t line_no) {
    std::vector<CsvField> fields;
    CsvField cur;
    bool in_quotes = false;
    bool after_quote = false;
    std::string raw;
    auto flush = [&] {
        if (cur.quoted) {
            cur.text = std::string(trim(cur.text));
            fields.push_back(std::move(cur));
        } else {
            fields.push_back({std::string(trim(raw)), false});
        }
        cur = {};
        raw.clear();
        after_quote = false;
    };
    while (pos < text.size()) {
        const char ch = text[pos++];
        if (in_quotes) {
            if (ch == '"') {
                if (pos < text.size() && text[pos] == '"') {
                    cur.text.push_back('"');
                    ++pos;
                } else {
                    in_quotes = false;
                    after_quote = true;
                }
            } else {
                cur.text.push_back(ch);
            }
            continue;
        }
        if (ch == ',') {
            flush();
        } else if (ch == '\n') {
            flush();
            return fields;
        } else if (ch == '"' && !after_quote && trim(raw).empty()) {
            in_quotes = true;
            cur.quoted = true;
            raw.clear();
        } else if (after_quote) {
            if (ch != ' ' && ch != '\t' && ch != '\r')
                throw InputError("line " + std::to_string(line_no) +
                                 ": unexpected character after closing quote");
        } else {
            raw.push_back(ch);
        }
    }
    if (in_quotes) throw InputError("line " + std::to_string(line_no) + ": unterminated quote");
    flush();
    return fields;
}

inline bool needs_quoting(std::string_view label) {
    if (label.empty()) return false;
    return label.find_first_of(",\"\n\r") != std::string_view::npos;
}

inline std::string quote_label(std::string_view label) {
    if (!needs_quoting(label)) return std::string(label);
    std::string out = "\"";
    for (char ch : label) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

inline void require_unique(const std::vector<std::string>& labels, std::string_view what) {
    std::unordered_set<std::string_view> seen;
    for (const auto& l : labels)
        if (!seen.insert(l).second)
            throw InputError("duplicate " + std::string(what) + " label '" + l + "'");
}

}  // namespace detail

/// Parses the CSV citation-matrix format: a header row `,<citing>,...`
/// followed by rows `<cited>,<count>,...`. Empty cells count as zero.
inline CitationMatrix parse_citation_csv(std::string_view text) {
    std::size_t pos = 0;
    std::size_t line_no = 1;
    if (!text.empty() && text.substr(0, 3) == "\xEF\xBB\xBF") pos = 3;

    auto at_blank_line = [&] {
        auto nl = text.find('\n', pos);
        auto line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        return detail::trim(line).empty();
    };

    while (pos < text.size() && at_blank_line()) {
        auto nl = text.find('\n', pos);
        pos = nl == std::string_view::npos ? text.size() : nl + 1;
        ++line_no;
    }
    if (pos >= text.size()) throw InputError("empty input: missing header row");

    auto header = detail::read_csv_record(text, pos, line_no);
    CitationMatrix m;
    for (std::size_t c = 1; c < header.size(); ++c) m.col_labels.push_back(std::move(header[c].text));
    detail::require_unique(m.col_labels, "citing");

    std::vector<std::uint64_t> values;
    const std::size_t ncols = m.col_labels.size();
    while (pos < text.size()) {
        ++line_no;
        if (at_blank_line()) {
            auto nl = text.find('\n', pos);
            pos = nl == std::string_view::npos ? text.size() : nl + 1;
            continue;
        }
        const std::size_t record_line = line_no;
        auto fields = detail::read_csv_record(text, pos, record_line);
        if (fields.size() != ncols + 1)
            throw InputError("ragged row at line " + std::to_string(record_line) + ": expected " +
                             std::to_string(ncols + 1) + " fields, found " +
                             std::to_string(fields.size()));
        m.row_labels.push_back(fields[0].text);
        for (std::size_t c = 1; c < fields.size(); ++c) {
            const auto cell = detail::trim(fields[c].text);
            std::uint64_t v = 0;
            if (!cell.empty()) {
                auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
                if (ec != std::errc{} || ptr != cell.data() + cell.size())
                    throw InputError("invalid count '" + std::string(cell) + "' at line " +
                                     std::to_string(record_line) + ", column " + std::to_string(c + 1) +
                                     " (expected a non-negative integer)");
            }
            values.push_back(v);
        }
    }
    if (m.row_labels.empty()) throw InputError("empty data section");
    detail::require_unique(m.row_labels, "cited");

    m.cells = Matrix<std::uint64_t>(m.row_labels.size(), ncols);
    std::copy(values.begin(), values.end(), m.cells.data().begin());
    return m;
}

inline CitationMatrix parse_citation_csv(std::istream& in) {
    std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_citation_csv(std::string_view(text));
}

inline std::string serialize_citation_csv(const CitationMatrix& m) {
    std::string out;
    for (const auto& l : m.col_labels) {
        out += ',';
        out += detail::quote_label(l);
    }
    out += '\n';
    for (std::size_t r = 0; r < m.rows(); ++r) {
        out += detail::quote_label(m.row_labels[r]);
        for (std::size_t c = 0; c < m.cols(); ++c) {
            out += ',';
            out += std::to_string(m(r, c));
        }
        out += '\n';
    }
    return out;
}

/// Re-indexes the matrix onto `labels` for both rows and columns. Journals
/// missing on either axis contribute zero rows or columns.
inline CitationMatrix restrict_to(const CitationMatrix& m, const std::vector<std::string>& labels) {
    detail::require_unique(labels, "journal");
    std::unordered_map<std::string_view, std::size_t> row_of, col_of;
    for (std::size_t i = 0; i < m.row_labels.size(); ++i) row_of.emplace(m.row_labels[i], i);
    for (std::size_t j = 0; j < m.col_labels.size(); ++j) col_of.emplace(m.col_labels[j], j);

    CitationMatrix out;
    out.year = m.year;
    out.row_labels = labels;
    out.col_labels = labels;
    out.cells = Matrix<std::uint64_t>(labels.size(), labels.size());
    for (std::size_t a = 0; a < labels.size(); ++a) {
        auto r = row_of.find(labels[a]);
        if (r == row_of.end()) continue;
        for (std::size_t b = 0; b < labels.size(); ++b) {
            auto c = col_of.find(labels[b]);
            if (c != col_of.end()) out.cells(a, b) = m(r->second, c->second);
        }
    }
    return out;
}

/// Journals citing `seed` at least `fraction` of the seed's total citations
/// received, plus the seed. Order follows the input column order; a seed
/// that never cites is appended last.
inline std::vector<std::string> environment_labels(const CitationMatrix& m, std::string_view seed,
                                                   double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw InputError("environment fraction must lie in (0, 1)");
    const auto seed_row = m.row_index(seed);
    if (!seed_row) throw InputError("seed journal '" + std::string(seed) + "' not found among cited rows");

    std::uint64_t total = 0;
    for (auto v : m.cells.row(*seed_row)) total += v;
    if (total == 0)
        throw InputError("seed journal '" + std::string(seed) +
                         "' receives no citations; environment undefined");

    // relative slack absorbs representation error in fraction * total
    const double threshold = fraction * static_cast<double>(total) * (1.0 - 1e-12);
    std::vector<std::string> keep;
    bool seed_kept = false;
    for (std::size_t j = 0; j < m.cols(); ++j) {
        const bool is_seed = m.col_labels[j] == seed;
        if (is_seed || static_cast<double>(m(*seed_row, j)) >= threshold) {
            keep.push_back(m.col_labels[j]);
            seed_kept = seed_kept || is_seed;
        }
    }
    if (!seed_kept) keep.emplace_back(seed);
    return keep;
}

inline CitationMatrix build_environment(const CitationMatrix& m, std::string_view seed, double fraction) {
    return restrict_to(m, environment_labels(m, seed, fraction));
}

inline CitationMatrix select_direction(const CitationMatrix& m, Direction direction) {
    if (direction == Direction::citing) return m;
    CitationMatrix out;
    out.year = m.year;
    out.row_labels = m.col_labels;
    out.col_labels = m.row_labels;
    out.cells = m.cells.transposed();
    return out;
}

/// Zeroes journal self-citations (cells whose row and column label agree).
inline CitationMatrix zero_diagonal(CitationMatrix m) {
    std::unordered_map<std::string_view, std::size_t> col_of;
    for (std::size_t j = 0; j < m.col_labels.size(); ++j) col_of.emplace(m.col_labels[j], j);
    for (std::size_t i = 0; i < m.rows(); ++i)
        if (auto it = col_of.find(m.row_labels[i]); it != col_of.end()) m.cells(i, it->second) = 0;
    return m;
}

inline YearSeries load_year_series(std::vector<std::pair<int, std::string>> entries) {
    if (entries.empty()) throw InputError("empty series");
    std::stable_sort(entries.begin(), entries.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 1; i < entries.size(); ++i)
        if (entries[i].first == entries[i - 1].first)
            throw InputError("duplicate year " + std::to_string(entries[i].first));

    YearSeries series;
    for (const auto& [year, text] : entries) {
        try {
            auto m = parse_citation_csv(std::string_view(text));
            m.year = year;
            series.entries.push_back(std::move(m));
        } catch (const InputError& e) {
            throw InputError("year " + std::to_string(year) + ": " + e.what());
        }
    }
    return series;
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Loads every `<year>.csv` in `dir`; other files are ignored.
inline YearSeries load_year_series_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw InputError("not a directory: " + dir.string());
    std::vector<std::pair<int, std::string>> entries;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
        const auto stem = entry.path().stem().string();
        int year = 0;
        auto [ptr, ec] = std::from_chars(stem.data(), stem.data() + stem.size(), year);
        if (ec != std::errc{} || ptr != stem.data() + stem.size()) continue;
        entries.emplace_back(year, read_text_file(entry.path()));
    }
    return load_year_series(std::move(entries));
}

}  // namespace structuration
