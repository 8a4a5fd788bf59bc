#pragma once

// Brute-force optimal transport between two small discrete laws, used only to
// cross-check the CDF formula. Min-cost flow by successive shortest paths
// (Bellman-Ford on the residual graph); exact up to rounding for a few atoms.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace qsd::testing {

inline double transport_cost(const std::vector<double>& xa, const std::vector<double>& wa,
                             const std::vector<double>& xb, const std::vector<double>& wb) {
    const std::size_t n = xa.size(), m = xb.size();
    const std::size_t src = n + m, dst = n + m + 1, nodes = n + m + 2;
    struct Edge {
        std::size_t to, rev;
        double cap, cost;
    };
    std::vector<std::vector<Edge>> g(nodes);
    auto add = [&](std::size_t u, std::size_t v, double cap, double cost) {
        g[u].push_back({v, g[v].size(), cap, cost});
        g[v].push_back({u, g[u].size() - 1, 0.0, -cost});
    };
    double sa = 0, sb = 0;
    for (double w : wa) sa += w;
    for (double w : wb) sb += w;
    for (std::size_t i = 0; i < n; ++i) add(src, i, wa[i] / sa, 0.0);
    for (std::size_t j = 0; j < m; ++j) add(n + j, dst, wb[j] / sb, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j) add(i, n + j, 2.0, std::abs(xa[i] - xb[j]));

    const double eps = 1e-15;
    double total = 0.0;
    for (;;) {
        std::vector<double> dist(nodes, std::numeric_limits<double>::infinity());
        std::vector<std::size_t> pv(nodes), pe(nodes);
        dist[src] = 0.0;
        for (std::size_t it = 0; it < nodes; ++it) {
            bool changed = false;
            for (std::size_t u = 0; u < nodes; ++u) {
                if (!std::isfinite(dist[u])) continue;
                for (std::size_t k = 0; k < g[u].size(); ++k) {
                    const Edge& e = g[u][k];
                    if (e.cap > eps && dist[u] + e.cost < dist[e.to] - 1e-15) {
                        dist[e.to] = dist[u] + e.cost;
                        pv[e.to] = u;
                        pe[e.to] = k;
                        changed = true;
                    }
                }
            }
            if (!changed) break;
        }
        if (!std::isfinite(dist[dst])) break;
        double f = std::numeric_limits<double>::infinity();
        for (std::size_t v = dst; v != src; v = pv[v]) f = std::min(f, g[pv[v]][pe[v]].cap);
        if (f <= eps) break;
        for (std::size_t v = dst; v != src; v = pv[v]) {
            Edge& e = g[pv[v]][pe[v]];
            e.cap -= f;
            g[v][e.rev].cap += f;
        }
        total += f * dist[dst];
    }
    return total;
}

}  // namespace qsd::testing
