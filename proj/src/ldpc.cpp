#include "dbicm/ldpc.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <numeric>
#include <queue>
#include <stdexcept>

#include "dbicm/rng.hpp"

namespace dbicm {

double DegreeDistribution::average_degree() const {
    double a = 0.0;
    for (std::size_t j = 0; j < degrees.size(); ++j) a += degrees[j] * fraction[j];
    return a;
}

void DegreeDistribution::validate() const {
    if (degrees.size() != fraction.size() || degrees.empty())
        throw std::invalid_argument("DegreeDistribution: size mismatch");
    double s = 0.0;
    for (std::size_t j = 0; j < degrees.size(); ++j) {
        if (degrees[j] < 1) throw std::invalid_argument("DegreeDistribution: degree < 1");
        if (j > 0 && degrees[j] <= degrees[j - 1])
            throw std::invalid_argument("DegreeDistribution: degrees must ascend");
        if (fraction[j] < -1e-12 || fraction[j] > 1.0 + 1e-12)
            throw std::invalid_argument("DegreeDistribution: fraction out of [0,1]");
        s += fraction[j];
    }
    if (std::abs(s - 1.0) > 1e-6)
        throw std::invalid_argument("DegreeDistribution: fractions must sum to 1");
}

std::vector<int> ChannelAssignment::type_multiplicity() const {
    std::vector<int> mi(num_types(), 0);
    for (int t : type_of_bit) mi.at(t)++;
    return mi;
}

DegreeDistribution ChannelAssignment::column_sums() const {
    DegreeDistribution d;
    d.degrees = degrees;
    d.fraction.assign(degrees.size(), 0.0);
    for (const auto& row : p)
        for (std::size_t j = 0; j < row.size(); ++j) d.fraction[j] += row[j];
    return d;
}

double ChannelAssignment::constraint_violation(const DegreeDistribution& lambda) const {
    double v = 0.0;
    double total = 0.0;
    const auto mi = type_multiplicity();
    for (int i = 0; i < num_types(); ++i) {
        double row = 0.0;
        for (std::size_t j = 0; j < p[i].size(); ++j) {
            v = std::max(v, std::max(-p[i][j], p[i][j] - 1.0));
            row += p[i][j];
            total += p[i][j];
        }
        v = std::max(v, std::abs(row - static_cast<double>(mi[i]) / m));
    }
    v = std::max(v, std::abs(total - 1.0));
    for (std::size_t j = 0; j < degrees.size(); ++j) {
        double col = 0.0;
        for (int i = 0; i < num_types(); ++i) col += p[i][j];
        v = std::max(v, std::abs(col - lambda.fraction[j]));
    }
    return v;
}

void ChannelAssignment::validate(const DegreeDistribution& lambda, double tol) const {
    if (static_cast<int>(type_of_bit.size()) != m)
        throw std::invalid_argument("ChannelAssignment: phi size != m");
    if (constraint_violation(lambda) > tol)
        throw std::invalid_argument("ChannelAssignment: constraints violated");
}

ChannelAssignment classify_bit_channels(const std::vector<double>& bit_capacity, double tol) {
    const int m = static_cast<int>(bit_capacity.size());
    if (m == 0) throw std::invalid_argument("classify_bit_channels: empty capacities");
    std::vector<int> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return bit_capacity[a] > bit_capacity[b]; });

    ChannelAssignment ca;
    ca.m = m;
    ca.type_of_bit.assign(m, -1);
    int types = 0;
    double group_cap = 0.0;
    for (int idx = 0; idx < m; ++idx) {
        const int bit = order[idx];
        if (idx == 0 || group_cap - bit_capacity[bit] > tol) {
            group_cap = bit_capacity[bit];
            ++types;
        }
        ca.type_of_bit[bit] = types - 1;
    }
    ca.p.assign(types, {});
    return ca;
}

namespace {

/// Largest-remainder rounding of `weights * total` to integers summing to
/// `total`.
std::vector<int> largest_remainder(const std::vector<double>& weights, int total) {
    const std::size_t n = weights.size();
    std::vector<int> counts(n, 0);
    std::vector<std::pair<double, std::size_t>> rem;
    int assigned = 0;
    for (std::size_t j = 0; j < n; ++j) {
        const double exact = weights[j] * total;
        counts[j] = static_cast<int>(std::floor(exact + 1e-9));
        assigned += counts[j];
        rem.push_back({exact - counts[j], j});
    }
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    for (int u = 0; u < total - assigned; ++u) counts[rem[u % n].second]++;
    return counts;
}

}  // namespace

std::vector<std::vector<int>> expand_degree_sequences(const ChannelAssignment& ca, int N) {
    const int S = ca.num_types();
    const int V = static_cast<int>(ca.degrees.size());
    if (N <= 0 || N % ca.m != 0)
        throw std::invalid_argument("expand_degree_sequences: N must be a positive multiple of m");
    const auto mi = ca.type_multiplicity();
    std::vector<int> row_target(S);
    for (int i = 0; i < S; ++i) row_target[i] = N / ca.m * mi[i];

    // Column totals from the realized degree distribution, then cell counts
    // under both marginals: floors first, deficits by largest remainder.
    const DegreeDistribution cols = ca.column_sums();
    std::vector<int> col_target = largest_remainder(cols.fraction, N);

    std::vector<std::vector<int>> counts(S, std::vector<int>(V, 0));
    std::vector<int> row_def = row_target;
    std::vector<int> col_def = col_target;
    std::vector<std::tuple<double, int, int>> rem;
    for (int i = 0; i < S; ++i) {
        for (int j = 0; j < V; ++j) {
            const double exact = ca.p[i][j] * N;
            const int f = static_cast<int>(std::floor(exact + 1e-9));
            counts[i][j] = f;
            row_def[i] -= f;
            col_def[j] -= f;
            rem.push_back({exact - f, i, j});
        }
    }
    for (int i = 0; i < S; ++i)
        if (row_def[i] < 0)
            throw std::invalid_argument("expand_degree_sequences: infeasible rounding");
    std::sort(rem.begin(), rem.end(), [](const auto& a, const auto& b) {
        if (std::get<0>(a) != std::get<0>(b)) return std::get<0>(a) > std::get<0>(b);
        if (std::get<1>(a) != std::get<1>(b)) return std::get<1>(a) < std::get<1>(b);
        return std::get<2>(a) < std::get<2>(b);
    });
    for (const auto& [r, i, j] : rem) {
        (void)r;
        if (row_def[i] > 0 && col_def[j] > 0) {
            counts[i][j]++;
            row_def[i]--;
            col_def[j]--;
        }
    }
    // Any residue left is matched row-deficit to column-deficit directly.
    for (int i = 0; i < S; ++i) {
        while (row_def[i] > 0) {
            int j = 0;
            while (j < V && col_def[j] <= 0) ++j;
            if (j == V) throw std::invalid_argument("expand_degree_sequences: infeasible rounding");
            counts[i][j]++;
            row_def[i]--;
            col_def[j]--;
        }
    }

    std::vector<std::vector<int>> g(S);
    for (int i = 0; i < S; ++i) {
        for (int j = 0; j < V; ++j)
            g[i].insert(g[i].end(), counts[i][j], ca.degrees[j]);
        if (static_cast<int>(g[i].size()) != row_target[i])
            throw std::logic_error("expand_degree_sequences: row length mismatch");
    }
    return g;
}

std::size_t TannerCode::edge_count() const {
    std::size_t e = 0;
    for (const auto& v : vn_edges) e += v.size();
    return e;
}

std::vector<int> TannerCode::vn_degrees() const {
    std::vector<int> d(n);
    for (int v = 0; v < n; ++v) d[v] = static_cast<int>(vn_edges[v].size());
    return d;
}

std::vector<int> TannerCode::cn_degrees() const {
    std::vector<int> d(n_checks);
    for (int c = 0; c < n_checks; ++c) d[c] = static_cast<int>(cn_edges[c].size());
    return d;
}

bool TannerCode::syndrome_ok(const std::vector<std::uint8_t>& bits) const {
    for (const auto& cn : cn_edges) {
        int parity = 0;
        for (int v : cn) parity ^= bits[v];
        if (parity) return false;
    }
    return true;
}

namespace {

/// BFS from VN `root` in the partial graph; fills CN edge-distances
/// (INT_MAX = unreachable).
void bfs_cn_depths(const TannerCode& code, int root, std::vector<int>& vn_dist,
                   std::vector<int>& cn_dist) {
    std::fill(vn_dist.begin(), vn_dist.end(), INT_MAX);
    std::fill(cn_dist.begin(), cn_dist.end(), INT_MAX);
    vn_dist[root] = 0;
    std::queue<int> q;  // VN frontier
    q.push(root);
    while (!q.empty()) {
        const int v = q.front();
        q.pop();
        for (int c : code.vn_edges[v]) {
            if (cn_dist[c] != INT_MAX) continue;
            cn_dist[c] = vn_dist[v] + 1;
            for (int w : code.cn_edges[c]) {
                if (vn_dist[w] != INT_MAX) continue;
                vn_dist[w] = cn_dist[c] + 1;
                q.push(w);
            }
        }
    }
}

TannerCode peg_build(const std::vector<int>& vn_degree, int n_checks, int d_c,
                     std::uint64_t seed) {
    const int N = static_cast<int>(vn_degree.size());
    std::size_t total_edges = 0;
    for (int d : vn_degree) total_edges += static_cast<std::size_t>(d);
    if (total_edges > static_cast<std::size_t>(n_checks) * d_c)
        throw std::invalid_argument("peg_build: edge count exceeds CN capacity (infeasible d_c)");

    TannerCode code;
    code.n = N;
    code.n_checks = n_checks;
    code.vn_edges.assign(N, {});
    code.cn_edges.assign(n_checks, {});
    code.seed = seed;

    // Final concentration: every CN ends at cap_low or cap_low + 1 edges,
    // with exactly `over_budget` CNs at the higher level. Tracking the
    // budget (instead of filling level by level) lets the distance criterion
    // dominate the selection, which is what keeps the girth large.
    const int cap_low = static_cast<int>(total_edges / n_checks);
    int over_budget = static_cast<int>(total_edges - static_cast<std::size_t>(cap_low) * n_checks);

    Rng rng(seed);
    std::vector<int> deg(n_checks, 0);
    std::vector<int> vn_dist(N), cn_dist(n_checks);
    std::vector<char> neighbor(n_checks, 0);
    std::vector<int> cand;

    for (int v = 0; v < N; ++v) {
        std::fill(neighbor.begin(), neighbor.end(), 0);
        for (int l = 0; l < vn_degree[v]; ++l) {
            // Admissible: non-neighbor CNs below cap_low, plus CNs at
            // cap_low while the over-fill budget lasts.
            cand.clear();
            for (int c = 0; c < n_checks; ++c) {
                if (neighbor[c]) continue;
                if (deg[c] < cap_low || (deg[c] == cap_low && over_budget > 0 && deg[c] < d_c))
                    cand.push_back(c);
            }
            if (cand.empty()) {
                // Degenerate fallback: any non-neighbor CN with room.
                for (int c = 0; c < n_checks; ++c)
                    if (!neighbor[c] && deg[c] < d_c) cand.push_back(c);
            }
            if (cand.empty())
                throw std::runtime_error("peg_build: no CN with residual capacity");

            int chosen;
            if (l == 0) {
                // First edge: lowest-degree admissible CN, ties at random.
                int best_deg = INT_MAX;
                std::vector<int> ties;
                for (int c : cand) {
                    if (deg[c] < best_deg) {
                        best_deg = deg[c];
                        ties.assign(1, c);
                    } else if (deg[c] == best_deg) {
                        ties.push_back(c);
                    }
                }
                chosen = ties[rng.uniform_int(static_cast<std::uint32_t>(ties.size()))];
            } else {
                // Farthest CN first (unreachable counts as infinitely far),
                // then lowest degree, then random.
                bfs_cn_depths(code, v, vn_dist, cn_dist);
                int best_dist = -1;
                int best_deg = INT_MAX;
                std::vector<int> ties;
                for (int c : cand) {
                    const int d = cn_dist[c];
                    if (d > best_dist || (d == best_dist && deg[c] < best_deg)) {
                        best_dist = d;
                        best_deg = deg[c];
                        ties.assign(1, c);
                    } else if (d == best_dist && deg[c] == best_deg) {
                        ties.push_back(c);
                    }
                }
                chosen = ties[rng.uniform_int(static_cast<std::uint32_t>(ties.size()))];
            }
            code.vn_edges[v].push_back(chosen);
            code.cn_edges[chosen].push_back(v);
            neighbor[chosen] = 1;
            if (deg[chosen] == cap_low) --over_budget;
            deg[chosen]++;
        }
    }
    for (auto& e : code.vn_edges) std::sort(e.begin(), e.end());
    for (auto& e : code.cn_edges) std::sort(e.begin(), e.end());
    return code;
}

/// Integer rounding of the degree sequences can overshoot a tight edge
/// budget (nominal edge count == n_checks * d_c) by a few edges. Demote the
/// fewest possible VNs to the next lower allowed degree to fit the budget.
void trim_to_budget(std::vector<int>& vn_degree, const std::vector<int>& allowed,
                    std::size_t capacity) {
    std::size_t total = 0;
    for (int d : vn_degree) total += static_cast<std::size_t>(d);
    while (total > capacity) {
        int best_v = -1, best_step = INT_MAX, best_to = 0;
        for (std::size_t v = 0; v < vn_degree.size(); ++v) {
            const auto it = std::lower_bound(allowed.begin(), allowed.end(), vn_degree[v]);
            if (it == allowed.begin() || it == allowed.end() || *it != vn_degree[v]) continue;
            const int step = *it - *(it - 1);
            if (step < best_step) {
                best_step = step;
                best_v = static_cast<int>(v);
                best_to = *(it - 1);
            }
        }
        if (best_v < 0)
            throw std::invalid_argument("trim_to_budget: cannot fit the CN edge budget");
        vn_degree[best_v] = best_to;
        total -= static_cast<std::size_t>(best_step);
    }
}

int checks_for_rate(int N, double R) {
    const int nc = static_cast<int>(std::lround(N * (1.0 - R)));
    if (nc <= 0 || nc >= N) throw std::invalid_argument("invalid rate for code length");
    return nc;
}

/// The greedy construction occasionally gets cornered near the end (the last
/// high-degree VNs must take whatever CN slots remain) and picks up a
/// 4-cycle. A handful of deterministic re-seeds usually escapes; keep the
/// attempt with the largest girth.
TannerCode peg_build_best(const std::vector<int>& vn_degree, int n_checks, int d_c,
                          std::uint64_t seed) {
    constexpr int max_attempts = 5;
    TannerCode best;
    int best_girth = -1;
    for (int a = 0; a < max_attempts; ++a) {
        TannerCode code =
            peg_build(vn_degree, n_checks, d_c, seed + 0x9e3779b97f4a7c15ull * a);
        const int g = girth(code);
        if (g >= 6 || g == 0) return code;
        if (g > best_girth) {
            best_girth = g;
            best = std::move(code);
        }
    }
    best.seed = seed;
    return best;
}

}  // namespace

TannerCode constrained_peg(const ChannelAssignment& ca, int N, int d_c, double R,
                           std::uint64_t seed) {
    const auto g = expand_degree_sequences(ca, N);
    std::vector<std::size_t> counter(ca.num_types(), 0);
    std::vector<int> vn_degree(N);
    for (int v = 0; v < N; ++v) {
        const int type = ca.type_of_bit[v % ca.m];
        vn_degree[v] = g[type].at(counter[type]++);
    }
    const int nc = checks_for_rate(N, R);
    trim_to_budget(vn_degree, ca.degrees, static_cast<std::size_t>(nc) * d_c);
    return peg_build_best(vn_degree, nc, d_c, seed);
}

TannerCode conventional_peg(const DegreeDistribution& lambda, int N, int d_c, double R,
                            std::uint64_t seed) {
    lambda.validate();
    const std::vector<int> counts = largest_remainder(lambda.fraction, N);
    std::vector<int> vn_degree;
    vn_degree.reserve(N);
    for (std::size_t j = 0; j < counts.size(); ++j)
        vn_degree.insert(vn_degree.end(), counts[j], lambda.degrees[j]);
    const int nc = checks_for_rate(N, R);
    trim_to_budget(vn_degree, lambda.degrees, static_cast<std::size_t>(nc) * d_c);
    return peg_build_best(vn_degree, nc, d_c, seed);
}

int girth(const TannerCode& code) {
    // BFS from every vertex; a non-tree edge closing at depths (du, dw)
    // witnesses a cycle of length du + dw + 1.
    const int total = code.n + code.n_checks;
    auto neighbors = [&](int u) -> const std::vector<int>& {
        return u < code.n ? code.vn_edges[u] : code.cn_edges[u - code.n];
    };
    auto to_global = [&](int u, int nb) { return u < code.n ? nb + code.n : nb; };

    int best = INT_MAX;
    std::vector<int> dist(total), parent(total);
    for (int root = 0; root < total; ++root) {
        std::fill(dist.begin(), dist.end(), INT_MAX);
        dist[root] = 0;
        parent[root] = -1;
        std::queue<int> q;
        q.push(root);
        while (!q.empty()) {
            const int u = q.front();
            q.pop();
            if (2 * dist[u] + 1 >= best) break;
            for (int nb : neighbors(u)) {
                const int w = to_global(u, nb);
                if (w == parent[u]) continue;
                if (dist[w] == INT_MAX) {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    q.push(w);
                } else {
                    best = std::min(best, dist[u] + dist[w] + 1);
                }
            }
        }
    }
    return best == INT_MAX ? 0 : best;
}

std::vector<std::vector<int>> measure_assignment_counts(const TannerCode& code,
                                                        const ChannelAssignment& ca) {
    std::vector<std::vector<int>> counts(ca.num_types(),
                                         std::vector<int>(ca.degrees.size(), 0));
    for (int v = 0; v < code.n; ++v) {
        const int type = ca.type_of_bit[v % ca.m];
        const int d = static_cast<int>(code.vn_edges[v].size());
        const auto it = std::find(ca.degrees.begin(), ca.degrees.end(), d);
        if (it == ca.degrees.end())
            throw std::runtime_error("measure_assignment_counts: unexpected VN degree");
        counts[type][it - ca.degrees.begin()]++;
    }
    return counts;
}

}  // namespace dbicm
