#pragma once

// Journal-factor and journal-journal graphs, Pajek export, and shortest-path
// betweenness on the unweighted skeleton.

#include <algorithm>
#include <charconv>
#include <cstddef>
#include <cstdio>
#include <map>
#include <numeric>
#include <optional>
#include <queue>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "structuration/factors.hpp"

namespace structuration {

struct WeightedEdge {
    std::size_t u = 0;  // node index
    std::size_t v = 0;
    double weight = 0;
};

/// Bipartite graph linking journals to the factors they load on positively.
/// Edges run from journal index `u` to factor index `v`.
struct TwoModeGraph {
    std::vector<std::string> journal_nodes;
    std::vector<std::string> factor_nodes;
    std::vector<WeightedEdge> edges;
};

/// Undirected journal graph; edges satisfy u < v.
struct JournalGraph {
    std::vector<std::string> nodes;
    std::vector<WeightedEdge> edges;
};

inline TwoModeGraph factor_graph(const FactorSolution& sol, double threshold = 0.0) {
    TwoModeGraph g;
    g.journal_nodes = sol.labels;
    for (std::size_t j = 0; j < sol.factors(); ++j) g.factor_nodes.push_back("F" + std::to_string(j + 1));
    for (std::size_t i = 0; i < sol.variables(); ++i)
        for (std::size_t j = 0; j < sol.factors(); ++j)
            if (sol.loadings(i, j) > threshold && sol.loadings(i, j) > 0) g.edges.push_back({i, j, sol.loadings(i, j)});
    return g;
}

/// Links each pair of variables whose correlation exceeds `threshold`.
/// Nodes are ordered by label; the edge list is in (u, v) order.
inline JournalGraph journal_graph(const CorrelationMatrix& corr, double threshold) {
    const std::size_t n = corr.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return corr.labels[a] < corr.labels[b]; });
    JournalGraph g;
    for (auto i : order) g.nodes.push_back(corr.labels[i]);
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = a + 1; b < n; ++b) {
            const double r = corr.values(order[a], order[b]);
            if (r > threshold) g.edges.push_back({a, b, r});
        }
    return g;
}

/// Unnormalized betweenness of every node, counting each unordered pair of
/// endpoints once. Edge weights are ignored. Scores are returned by label.
inline std::map<std::string, double> betweenness(const JournalGraph& g) {
    const std::size_t n = g.nodes.size();
    std::vector<std::vector<std::size_t>> adj(n);
    for (const auto& e : g.edges) {
        if (e.u == e.v) continue;
        adj[e.u].push_back(e.v);
        adj[e.v].push_back(e.u);
    }
    for (auto& a : adj) {
        std::sort(a.begin(), a.end());
        a.erase(std::unique(a.begin(), a.end()), a.end());
    }

    std::vector<double> score(n, 0.0);
    std::vector<double> sigma(n), delta(n);
    std::vector<long> dist(n);
    std::vector<std::size_t> stack;
    stack.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        std::fill(sigma.begin(), sigma.end(), 0.0);
        std::fill(delta.begin(), delta.end(), 0.0);
        std::fill(dist.begin(), dist.end(), -1);
        stack.clear();
        sigma[s] = 1;
        dist[s] = 0;
        std::queue<std::size_t> q;
        q.push(s);
        while (!q.empty()) {
            const auto v = q.front();
            q.pop();
            stack.push_back(v);
            for (auto w : adj[v]) {
                if (dist[w] < 0) {
                    dist[w] = dist[v] + 1;
                    q.push(w);
                }
                if (dist[w] == dist[v] + 1) sigma[w] += sigma[v];
            }
        }
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            const auto w = *it;
            for (auto v : adj[w])
                if (dist[v] == dist[w] - 1) delta[v] += sigma[v] / sigma[w] * (1 + delta[w]);
            if (w != s) score[w] += delta[w];
        }
    }
    std::map<std::string, double> out;
    for (std::size_t i = 0; i < n; ++i) out[g.nodes[i]] = score[i] / 2;  // each pair seen from both ends
    return out;
}

struct PajekFiles {
    std::string net;
    std::optional<std::string> clu;  // two-mode graphs only
};

namespace detail {

inline std::string pajek_label(std::string_view label) {
    std::string out = "\"";
    for (char ch : label) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

inline std::string pajek_weight(double w) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", w);
    return buf;
}

inline std::string pajek_net(const std::vector<std::string>& labels,
                             const std::vector<std::tuple<std::size_t, std::size_t, double>>& edges) {
    std::string out = "*Vertices " + std::to_string(labels.size()) + "\n";
    for (std::size_t i = 0; i < labels.size(); ++i) out += std::to_string(i + 1) + " " + pajek_label(labels[i]) + "\n";
    out += "*Edges\n";
    for (const auto& [u, v, w] : edges)
        out += std::to_string(u + 1) + " " + std::to_string(v + 1) + " " + pajek_weight(w) + "\n";
    return out;
}

}  // namespace detail

/// Pajek `.net` text (plus a `.clu` partition for two-mode graphs). Journal
/// vertices precede factor vertices; ids are 1-based.
inline PajekFiles export_pajek(const TwoModeGraph& g) {
    std::vector<std::string> labels = g.journal_nodes;
    labels.insert(labels.end(), g.factor_nodes.begin(), g.factor_nodes.end());
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    for (const auto& e : g.edges) edges.emplace_back(e.u, g.journal_nodes.size() + e.v, e.weight);

    PajekFiles files;
    files.net = detail::pajek_net(labels, edges);
    std::string clu = "*Vertices " + std::to_string(labels.size()) + "\n";
    for (std::size_t i = 0; i < labels.size(); ++i) clu += i < g.journal_nodes.size() ? "1\n" : "2\n";
    files.clu = std::move(clu);
    return files;
}

inline PajekFiles export_pajek(const JournalGraph& g) {
    std::vector<std::tuple<std::size_t, std::size_t, double>> edges;
    for (const auto& e : g.edges) edges.emplace_back(e.u, e.v, e.weight);
    return {detail::pajek_net(g.nodes, edges), std::nullopt};
}

/// Contents of a Pajek file pair in the subset of the grammar written by
/// export_pajek.
struct PajekGraph {
    std::vector<std::string> labels;
    std::vector<int> partition;  // empty without a .clu file
    std::vector<WeightedEdge> edges;
};

inline PajekGraph parse_pajek(std::string_view net, std::optional<std::string_view> clu = std::nullopt) {
    auto lines_of = [](std::string_view text) {
        std::vector<std::string_view> lines;
        std::size_t pos = 0;
        while (pos < text.size()) {
            auto nl = text.find('\n', pos);
            if (nl == std::string_view::npos) nl = text.size();
            lines.push_back(text.substr(pos, nl - pos));
            pos = nl + 1;
        }
        return lines;
    };
    auto parse_count = [](std::string_view line, std::string_view what) {
        constexpr std::string_view head = "*Vertices ";
        if (line.substr(0, head.size()) != head) throw InputError("expected '*Vertices' in " + std::string(what));
        std::size_t n = 0;
        auto rest = line.substr(head.size());
        auto [p, ec] = std::from_chars(rest.data(), rest.data() + rest.size(), n);
        if (ec != std::errc{}) throw InputError("bad vertex count in " + std::string(what));
        return n;
    };

    const auto lines = lines_of(net);
    if (lines.empty()) throw InputError("empty Pajek file");
    const std::size_t n = parse_count(lines[0], ".net");
    if (lines.size() < n + 2) throw InputError("truncated Pajek vertex list");

    PajekGraph g;
    for (std::size_t i = 0; i < n; ++i) {
        auto line = lines[1 + i];
        const auto q = line.find('"');
        if (q == std::string_view::npos || line.back() != '"') throw InputError("bad Pajek vertex line");
        std::size_t id = 0;
        std::from_chars(line.data(), line.data() + q, id);
        if (id != i + 1) throw InputError("Pajek vertex ids must be consecutive");
        std::string label;
        for (std::size_t c = q + 1; c + 1 < line.size(); ++c) {
            label.push_back(line[c]);
            if (line[c] == '"') ++c;  // doubled quote
        }
        g.labels.push_back(std::move(label));
    }
    if (lines[n + 1] != "*Edges") throw InputError("expected '*Edges'");
    for (std::size_t l = n + 2; l < lines.size(); ++l) {
        std::istringstream is{std::string(lines[l])};
        std::size_t u = 0, v = 0;
        double w = 0;
        if (!(is >> u >> v >> w) || u == 0 || v == 0 || u > n || v > n) throw InputError("bad Pajek edge line");
        g.edges.push_back({u - 1, v - 1, w});
    }
    if (clu) {
        const auto cl = lines_of(*clu);
        if (cl.empty() || parse_count(cl[0], ".clu") != n || cl.size() != n + 1)
            throw InputError("partition does not match the vertex list");
        for (std::size_t i = 0; i < n; ++i) g.partition.push_back(std::stoi(std::string(cl[1 + i])));
    }
    return g;
}

}  // namespace structuration
