#pragma once

// Finite weighted simplicial complexes with a vertex measure and the
// geodesic (shortest weighted path) metric on the 1-skeleton.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

namespace hdforms {

struct Cell {
    std::vector<int> verts;   // sorted vertex indices
    double weight = 1.0;      // inner-product weight w_k(c)
    double length = 1.0;      // metric length, 1-cells only
};

class MetricMeasureComplex {
public:
    std::vector<std::string> vertex_ids;
    Eigen::VectorXd measure;                 // mu per vertex
    std::vector<std::vector<Cell>> cells;    // degree 0..dimension
    Eigen::MatrixXd dist;                    // vertex geodesic distances
    int dimension = 0;

    int num_vertices() const { return static_cast<int>(vertex_ids.size()); }

    int vertex_index(const std::string& id) const {
        for (int i = 0; i < num_vertices(); ++i)
            if (vertex_ids[i] == id) return i;
        throw std::invalid_argument("unknown vertex: " + id);
    }

    double total_measure() const { return measure.sum(); }

    double diameter() const {
        double d = 0.0;
        for (int i = 0; i < num_vertices(); ++i)
            for (int j = 0; j < num_vertices(); ++j) d = std::max(d, dist(i, j));
        return d;
    }

    double min_edge_length() const {
        double m = std::numeric_limits<double>::infinity();
        if (dimension >= 1)
            for (const auto& e : cells[1]) m = std::min(m, e.length);
        return std::isfinite(m) ? m : 1.0;
    }

    // Open geodesic ball {y : rho(x,y) < r}.
    std::vector<int> ball(int x, double r) const {
        check_vertex(x);
        if (!(r > 0)) throw std::invalid_argument("ball radius must be positive");
        std::vector<int> out;
        for (int y = 0; y < num_vertices(); ++y)
            if (dist(x, y) < r) out.push_back(y);
        return out;
    }

    double volume(int x, double r) const {
        check_vertex(x);
        if (!(r > 0)) throw std::invalid_argument("ball radius must be positive");
        double v = 0.0;
        for (int y = 0; y < num_vertices(); ++y)
            if (dist(x, y) < r) v += measure(y);
        return v;
    }

    // Distance from x to a vertex subset (infinity if the set is empty).
    double dist_to_set(int x, const std::vector<char>& member) const {
        double d = std::numeric_limits<double>::infinity();
        for (int y = 0; y < num_vertices(); ++y)
            if (member[y]) d = std::min(d, dist(x, y));
        return d;
    }

    void check_vertex(int x) const {
        if (x < 0 || x >= num_vertices()) throw std::invalid_argument("unknown vertex index");
    }

    // Validation of the construction invariants; throws on violation.
    void validate() const {
        const int n = num_vertices();
        if (n == 0) throw std::invalid_argument("complex has no vertices");
        for (int i = 0; i < n; ++i)
            if (!(measure(i) > 0)) throw std::invalid_argument("non-positive measure");
        if (static_cast<int>(cells.size()) != dimension + 1)
            throw std::invalid_argument("cells_by_degree does not match dimension");
        for (int k = 0; k <= dimension; ++k) {
            for (const auto& c : cells[k]) {
                if (static_cast<int>(c.verts.size()) != k + 1)
                    throw std::invalid_argument("cell vertex count does not match degree");
                if (!std::is_sorted(c.verts.begin(), c.verts.end()))
                    throw std::invalid_argument("cell vertices not sorted");
                if (!(c.weight > 0)) throw std::invalid_argument("non-positive cell weight");
                if (k == 1 && !(c.length > 0))
                    throw std::invalid_argument("non-positive edge length");
                for (int v : c.verts)
                    if (v < 0 || v >= n) throw std::invalid_argument("cell references unknown vertex");
            }
        }
        // Faces of every k-cell (k >= 2) must be present as (k-1)-cells.
        for (int k = 2; k <= dimension; ++k) {
            std::set<std::vector<int>> lower;
            for (const auto& c : cells[k - 1]) lower.insert(c.verts);
            for (const auto& c : cells[k]) {
                for (size_t i = 0; i < c.verts.size(); ++i) {
                    std::vector<int> face = c.verts;
                    face.erase(face.begin() + static_cast<long>(i));
                    if (!lower.count(face))
                        throw std::invalid_argument("k-cell has a missing face");
                }
            }
        }
        validate_metric();
    }

    void validate_metric() const {
        const int n = num_vertices();
        for (int i = 0; i < n; ++i) {
            if (dist(i, i) != 0.0) throw std::invalid_argument("non-metric distances: rho(x,x) != 0");
            for (int j = 0; j < n; ++j) {
                if (!std::isfinite(dist(i, j)))
                    throw std::invalid_argument("disconnected complex");
                if (std::abs(dist(i, j) - dist(j, i)) > 1e-12)
                    throw std::invalid_argument("non-metric distances: asymmetry");
                if (i != j && !(dist(i, j) > 0))
                    throw std::invalid_argument("non-metric distances: zero off-diagonal");
            }
        }
        if (n <= 200) {
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        if (dist(i, j) > dist(i, k) + dist(k, j) + 1e-12)
                            throw std::invalid_argument("non-metric distances: triangle inequality");
        }
    }

    // Floyd-Warshall over the weighted 1-skeleton.
    void compute_distances() {
        const int n = num_vertices();
        const double inf = std::numeric_limits<double>::infinity();
        dist = Eigen::MatrixXd::Constant(n, n, inf);
        for (int i = 0; i < n; ++i) dist(i, i) = 0.0;
        if (dimension >= 1) {
            for (const auto& e : cells[1]) {
                int a = e.verts[0], b = e.verts[1];
                dist(a, b) = std::min(dist(a, b), e.length);
                dist(b, a) = dist(a, b);
            }
        }
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    if (dist(i, k) + dist(k, j) < dist(i, j))
                        dist(i, j) = dist(i, k) + dist(k, j);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (!std::isfinite(dist(i, j)))
                    throw std::invalid_argument("disconnected complex");
    }
};

struct DoublingSample {
    int center;
    double radius;
    double theta;
    double ratio;
};

struct DoublingCertificate {
    double C_D = 1.0;   // sup V(x,2r)/V(x,r)
    double kappa = 0.0; // fitted exponent in V(x,theta r) <= C theta^kappa V(x,r)
    int beta = 1;       // smallest integer strictly larger than kappa/2
    std::vector<DoublingSample> samples;
};

inline int beta_from_kappa(double kappa) {
    double half = kappa / 2.0;
    double fl = std::floor(half);
    if (half == fl) return static_cast<int>(half) + 1;
    return static_cast<int>(fl) + 1;
}

inline DoublingCertificate estimate_doubling(const MetricMeasureComplex& X,
                                             const std::vector<double>& radius_grid) {
    if (radius_grid.empty()) throw std::invalid_argument("empty radius grid");
    DoublingCertificate cert;
    cert.C_D = 1.0;
    cert.kappa = 0.0;
    const double thetas[3] = {2.0, 4.0, 8.0};
    for (int x = 0; x < X.num_vertices(); ++x) {
        for (double r : radius_grid) {
            double vr = X.volume(x, r);
            double v2 = X.volume(x, 2 * r);
            double c = v2 / vr;
            if (c > cert.C_D) {
                cert.C_D = c;
            }
            cert.samples.push_back({x, r, 2.0, c});
            for (double th : thetas) {
                double vth = X.volume(x, th * r);
                double k = std::log(vth / vr) / std::log(th);
                cert.kappa = std::max(cert.kappa, k);
            }
        }
    }
    cert.beta = beta_from_kappa(cert.kappa);
    return cert;
}

inline std::vector<double> default_radius_grid(const MetricMeasureComplex& X, int points = 24) {
    double lo = X.min_edge_length() / 2.0;
    double hi = std::max(2.0 * X.diameter(), lo * 2.0);
    std::vector<double> g;
    for (int i = 0; i < points; ++i)
        g.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
    return g;
}

struct WhitneyBall {
    int center;
    double radius;
};

// Greedy Whitney-type covering of a proper open subset O of the vertex set:
// each emitted ball B = B(x, rho(x,O^c)/3) satisfies 2B contained in O while 4B
// meets the complement.
inline std::vector<WhitneyBall> whitney_decompose(const MetricMeasureComplex& X,
                                                  const std::vector<int>& O) {
    const int n = X.num_vertices();
    if (O.empty()) throw std::invalid_argument("whitney_decompose: O is empty");
    if (static_cast<int>(O.size()) >= n)
        throw std::invalid_argument("whitney_decompose: O must be a proper subset");
    std::vector<char> in_O(n, 0);
    for (int v : O) {
        X.check_vertex(v);
        in_O[v] = 1;
    }
    std::vector<char> comp(n, 0);
    for (int v = 0; v < n; ++v) comp[v] = !in_O[v];
    std::vector<double> d_comp(n, 0.0);
    for (int v : O) d_comp[v] = X.dist_to_set(v, comp);

    std::vector<int> order(O.begin(), O.end());
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (d_comp[a] != d_comp[b]) return d_comp[a] > d_comp[b];
        return a < b;
    });

    std::vector<char> covered(n, 0);
    std::vector<WhitneyBall> balls;
    for (int x : order) {
        if (covered[x]) continue;
        double r = d_comp[x] / 3.0;
        balls.push_back({x, r});
        for (int y : O)
            if (X.dist(x, y) < r) covered[y] = 1;
    }
    return balls;
}

// --- Generators ---------------------------------------------------------

namespace detail {

inline MetricMeasureComplex finish(MetricMeasureComplex X) {
    X.compute_distances();
    X.validate();
    return X;
}

}  // namespace detail

inline MetricMeasureComplex generate_path(int n) {
    if (n < 1) throw std::invalid_argument("path size must be positive");
    MetricMeasureComplex X;
    X.dimension = n > 1 ? 1 : 0;
    for (int i = 0; i < n; ++i) X.vertex_ids.push_back("v" + std::to_string(i));
    X.measure = Eigen::VectorXd::Ones(n);
    X.cells.resize(X.dimension + 1);
    for (int i = 0; i < n; ++i) X.cells[0].push_back({{i}, 1.0, 1.0});
    for (int i = 0; i + 1 < n; ++i) X.cells[1].push_back({{i, i + 1}, 1.0, 1.0});
    return detail::finish(std::move(X));
}

inline MetricMeasureComplex generate_cycle(int n) {
    if (n < 3) throw std::invalid_argument("cycle size must be at least 3");
    MetricMeasureComplex X;
    X.dimension = 1;
    for (int i = 0; i < n; ++i) X.vertex_ids.push_back("v" + std::to_string(i));
    X.measure = Eigen::VectorXd::Ones(n);
    X.cells.resize(2);
    for (int i = 0; i < n; ++i) X.cells[0].push_back({{i}, 1.0, 1.0});
    for (int i = 0; i < n; ++i) {
        int a = i, b = (i + 1) % n;
        if (a > b) std::swap(a, b);
        X.cells[1].push_back({{a, b}, 1.0, 1.0});
    }
    std::sort(X.cells[1].begin(), X.cells[1].end(),
              [](const Cell& u, const Cell& v) { return u.verts < v.verts; });
    return detail::finish(std::move(X));
}

// Triangulated torus grid a x b. Diagonal edges get length 2 so that the
// geodesic metric stays the l^1 grid metric.
inline MetricMeasureComplex generate_torus_grid(int a, int b) {
    if (a < 3 || b < 3) throw std::invalid_argument("torus grid needs size >= 3 in each direction");
    MetricMeasureComplex X;
    X.dimension = 2;
    const int n = a * b;
    auto idx = [&](int i, int j) { return ((i % a + a) % a) * b + ((j % b + b) % b); };
    for (int i = 0; i < n; ++i) X.vertex_ids.push_back("v" + std::to_string(i));
    X.measure = Eigen::VectorXd::Ones(n);
    X.cells.resize(3);
    for (int i = 0; i < n; ++i) X.cells[0].push_back({{i}, 1.0, 1.0});
    std::set<std::vector<int>> edges;
    auto add_edge = [&](int u, int v, double len) {
        std::vector<int> e = {std::min(u, v), std::max(u, v)};
        if (edges.insert(e).second) X.cells[1].push_back({e, 1.0, len});
    };
    std::set<std::vector<int>> tris;
    auto add_tri = [&](int u, int v, int w) {
        std::vector<int> t = {u, v, w};
        std::sort(t.begin(), t.end());
        if (tris.insert(t).second) X.cells[2].push_back({t, 1.0, 1.0});
    };
    for (int i = 0; i < a; ++i) {
        for (int j = 0; j < b; ++j) {
            int p = idx(i, j), right = idx(i + 1, j), down = idx(i, j + 1), diag = idx(i + 1, j + 1);
            add_edge(p, right, 1.0);
            add_edge(p, down, 1.0);
            add_edge(p, diag, 2.0);
            add_tri(p, right, diag);
            add_tri(p, down, diag);
        }
    }
    std::sort(X.cells[1].begin(), X.cells[1].end(),
              [](const Cell& u, const Cell& v) { return u.verts < v.verts; });
    std::sort(X.cells[2].begin(), X.cells[2].end(),
              [](const Cell& u, const Cell& v) { return u.verts < v.verts; });
    return detail::finish(std::move(X));
}

// Octahedron subdivided `levels` times (combinatorial sphere triangulation).
inline MetricMeasureComplex generate_sphere_triangulation(int levels) {
    if (levels < 0) throw std::invalid_argument("sphere subdivision level must be >= 0");
    std::vector<std::array<int, 3>> tris = {{0, 2, 4}, {0, 2, 5}, {0, 3, 4}, {0, 3, 5},
                                            {1, 2, 4}, {1, 2, 5}, {1, 3, 4}, {1, 3, 5}};
    int nverts = 6;
    for (int l = 0; l < levels; ++l) {
        std::map<std::pair<int, int>, int> midpoint;
        auto mid = [&](int u, int v) {
            auto key = std::minmax(u, v);
            auto it = midpoint.find(key);
            if (it != midpoint.end()) return it->second;
            int m = nverts++;
            midpoint[key] = m;
            return m;
        };
        std::vector<std::array<int, 3>> next;
        for (auto& t : tris) {
            int a = t[0], b = t[1], c = t[2];
            int ab = mid(a, b), bc = mid(b, c), ca = mid(c, a);
            next.push_back({a, ab, ca});
            next.push_back({b, ab, bc});
            next.push_back({c, bc, ca});
            next.push_back({ab, bc, ca});
        }
        tris = std::move(next);
    }
    MetricMeasureComplex X;
    X.dimension = 2;
    for (int i = 0; i < nverts; ++i) X.vertex_ids.push_back("v" + std::to_string(i));
    X.measure = Eigen::VectorXd::Ones(nverts);
    X.cells.resize(3);
    for (int i = 0; i < nverts; ++i) X.cells[0].push_back({{i}, 1.0, 1.0});
    std::set<std::vector<int>> edges, trisset;
    for (auto& t : tris) {
        std::vector<int> tv = {t[0], t[1], t[2]};
        std::sort(tv.begin(), tv.end());
        if (trisset.insert(tv).second) X.cells[2].push_back({tv, 1.0, 1.0});
        for (int i = 0; i < 3; ++i)
            for (int j = i + 1; j < 3; ++j) {
                std::vector<int> e = {tv[i], tv[j]};
                if (edges.insert(e).second) X.cells[1].push_back({e, 1.0, 1.0});
            }
    }
    std::sort(X.cells[1].begin(), X.cells[1].end(),
              [](const Cell& u, const Cell& v) { return u.verts < v.verts; });
    std::sort(X.cells[2].begin(), X.cells[2].end(),
              [](const Cell& u, const Cell& v) { return u.verts < v.verts; });
    return detail::finish(std::move(X));
}

// Two triangulated patch x patch grids joined by a path of tube_length edges.
inline MetricMeasureComplex generate_dumbbell(int patch, int tube_length) {
    if (patch < 2) throw std::invalid_argument("dumbbell patch size must be >= 2");
    if (tube_length < 1) throw std::invalid_argument("dumbbell tube length must be >= 1");
    MetricMeasureComplex X;
    X.dimension = 2;
    int n = 0;
    auto new_vertex = [&]() {
        X.vertex_ids.push_back("v" + std::to_string(n));
        return n++;
    };
    std::vector<std::vector<int>> grid_a(patch, std::vector<int>(patch)),
        grid_b(patch, std::vector<int>(patch));
    for (auto* g : {&grid_a, &grid_b})
        for (int i = 0; i < patch; ++i)
            for (int j = 0; j < patch; ++j) (*g)[i][j] = new_vertex();
    std::vector<int> tube;
    for (int i = 0; i + 1 < tube_length; ++i) tube.push_back(new_vertex());
    X.measure = Eigen::VectorXd::Ones(n);
    X.cells.resize(3);
    for (int i = 0; i < n; ++i) X.cells[0].push_back({{i}, 1.0, 1.0});
    std::set<std::vector<int>> edges;
    auto add_edge = [&](int u, int v, double len) {
        std::vector<int> e = {std::min(u, v), std::max(u, v)};
        if (edges.insert(e).second) X.cells[1].push_back({e, 1.0, len});
    };
    auto add_tri = [&](int u, int v, int w) {
        std::vector<int> t = {u, v, w};
        std::sort(t.begin(), t.end());
        X.cells[2].push_back({t, 1.0, 1.0});
    };
    for (auto* g : {&grid_a, &grid_b}) {
        for (int i = 0; i < patch; ++i)
            for (int j = 0; j < patch; ++j) {
                if (i + 1 < patch) add_edge((*g)[i][j], (*g)[i + 1][j], 1.0);
                if (j + 1 < patch) add_edge((*g)[i][j], (*g)[i][j + 1], 1.0);
                if (i + 1 < patch && j + 1 < patch) {
                    add_edge((*g)[i][j], (*g)[i + 1][j + 1], 2.0);
                    add_tri((*g)[i][j], (*g)[i + 1][j], (*g)[i + 1][j + 1]);
                    add_tri((*g)[i][j], (*g)[i][j + 1], (*g)[i + 1][j + 1]);
                }
            }
    }
    // Tube from a corner of patch A to a corner of patch B.
    std::vector<int> chain;
    chain.push_back(grid_a[patch - 1][patch - 1]);
    for (int v : tube) chain.push_back(v);
    chain.push_back(grid_b[0][0]);
    for (size_t i = 0; i + 1 < chain.size(); ++i) add_edge(chain[i], chain[i + 1], 1.0);
    std::sort(X.cells[1].begin(), X.cells[1].end(),
              [](const Cell& u, const Cell& v) { return u.verts < v.verts; });
    std::sort(X.cells[2].begin(), X.cells[2].end(),
              [](const Cell& u, const Cell& v) { return u.verts < v.verts; });
    return detail::finish(std::move(X));
}

inline MetricMeasureComplex generate_complex(const std::string& kind,
                                             const std::vector<int>& size,
                                             [[maybe_unused]] unsigned seed = 0) {
    auto need = [&](size_t k) {
        if (size.size() < k) throw std::invalid_argument("missing size parameters for " + kind);
    };
    if (kind == "path") {
        need(1);
        return generate_path(size[0]);
    }
    if (kind == "cycle") {
        need(1);
        return generate_cycle(size[0]);
    }
    if (kind == "torus_grid") {
        need(1);
        int a = size[0], b = size.size() >= 2 ? size[1] : size[0];
        return generate_torus_grid(a, b);
    }
    if (kind == "sphere_triangulation") {
        need(1);
        return generate_sphere_triangulation(size[0]);
    }
    if (kind == "dumbbell") {
        need(2);
        return generate_dumbbell(size[0], size[1]);
    }
    throw std::invalid_argument("unknown complex kind: " + kind);
}

}  // namespace hdforms
