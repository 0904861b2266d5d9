#pragma once

// Discrete tent spaces: cones, area and Carleson functionals, T^{p,2} norms,
// atoms over Carleson boxes and the atomic decomposition of T^{1,2}.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <vector>

#include "calculus.hpp"

namespace hdforms {

struct Ball {
    int center = 0;
    double radius = 0.0;
};

// Pointwise fiber-norm-squared density per vertex and time slice.
inline Eigen::MatrixXd vertex_density(const SpaceTimeField& F) {
    const GradedSpace& S = *F.space;
    const MetricMeasureComplex& X = *S.X;
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(X.num_vertices(), F.grid.size());
    for (int k = 0; k <= X.dimension; ++k) {
        for (size_t c = 0; c < X.cells[k].size(); ++c) {
            int idx = S.offsets[k] + static_cast<int>(c);
            for (int j = 0; j < F.grid.size(); ++j) {
                double mass = X.cells[k][c].weight * std::norm(F.values(idx, j));
                for (int v : X.cells[k][c].verts)
                    out(v, j) += mass / static_cast<double>(k + 1);
            }
        }
    }
    for (int v = 0; v < X.num_vertices(); ++v) out.row(v) /= X.measure(v);
    return out;
}

// Cone of aperture alpha at x: {(y, j) : rho(x,y) < alpha t_j}.
inline std::vector<std::pair<int, int>> cone(const MetricMeasureComplex& X, int x, double alpha,
                                             const TimeGrid& grid) {
    X.check_vertex(x);
    if (!(alpha > 0)) throw std::invalid_argument("aperture must be positive");
    std::vector<std::pair<int, int>> out;
    for (int y = 0; y < X.num_vertices(); ++y)
        for (int j = 0; j < grid.size(); ++j)
            if (X.dist(x, y) < alpha * grid.points[j]) out.emplace_back(y, j);
    return out;
}

// Area functional S_alpha F per vertex.
inline Eigen::VectorXd area_functional(const SpaceTimeField& F, double alpha = 1.0) {
    if (!(alpha > 0)) throw std::invalid_argument("aperture must be positive");
    const MetricMeasureComplex& X = *F.space->X;
    const int n = X.num_vertices();
    Eigen::MatrixXd dens = vertex_density(F);
    // precompute volumes V(x, t_j)
    Eigen::MatrixXd vol(n, F.grid.size());
    for (int x = 0; x < n; ++x)
        for (int j = 0; j < F.grid.size(); ++j) vol(x, j) = X.volume(x, F.grid.points[j]);
    Eigen::VectorXd out(n);
    for (int x = 0; x < n; ++x) {
        double s = 0.0;
        for (int y = 0; y < n; ++y) {
            double d = X.dist(x, y);
            for (int j = 0; j < F.grid.size(); ++j) {
                if (d < alpha * F.grid.points[j])
                    s += X.measure(y) * dens(y, j) * F.grid.weights[j] / vol(x, j);
            }
        }
        out(x) = std::sqrt(s);
    }
    return out;
}

// Distinct open-ball vertex sets of the complex (deduplicated), each with a
// representative (center, radius), its membership mask and volume.
struct BallClass {
    Ball ball;
    std::vector<char> member;
    double volume = 0.0;
};

inline std::vector<BallClass> enumerate_ball_classes(const MetricMeasureComplex& X) {
    const int n = X.num_vertices();
    std::set<std::vector<char>> seen;
    std::vector<BallClass> out;
    for (int x = 0; x < n; ++x) {
        std::vector<double> ds;
        for (int y = 0; y < n; ++y) ds.push_back(X.dist(x, y));
        std::sort(ds.begin(), ds.end());
        ds.erase(std::unique(ds.begin(), ds.end()), ds.end());
        // open ball of radius just above each distinct distance
        for (size_t i = 0; i + 1 <= ds.size(); ++i) {
            double r = (i + 1 < ds.size()) ? 0.5 * (ds[i] + ds[i + 1]) : ds[i] + 1.0;
            BallClass bc;
            bc.ball = {x, r};
            bc.member.assign(n, 0);
            for (int y = 0; y < n; ++y)
                if (X.dist(x, y) < r) {
                    bc.member[y] = 1;
                    bc.volume += X.measure(y);
                }
            if (seen.insert(bc.member).second) out.push_back(std::move(bc));
        }
    }
    return out;
}

// Carleson functional C F: sup over balls containing x of the averaged mass
// over the geometric tent T(B) = {(y,t) : rho(y, B^c) >= t}.
inline Eigen::VectorXd carleson_functional(const SpaceTimeField& F) {
    const MetricMeasureComplex& X = *F.space->X;
    const int n = X.num_vertices();
    Eigen::MatrixXd dens = vertex_density(F);
    std::vector<BallClass> balls = enumerate_ball_classes(X);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (const auto& bc : balls) {
        // rho(y, B^c) per vertex; infinity when B is the whole space
        std::vector<char> comp(n);
        for (int v = 0; v < n; ++v) comp[v] = !bc.member[v];
        double mass = 0.0;
        for (int y = 0; y < n; ++y) {
            if (!bc.member[y]) continue;
            double dcomp = X.dist_to_set(y, comp);
            for (int j = 0; j < F.grid.size(); ++j)
                if (F.grid.points[j] <= dcomp)
                    mass += X.measure(y) * dens(y, j) * F.grid.weights[j];
        }
        double val = std::sqrt(mass / bc.volume);
        for (int x = 0; x < n; ++x)
            if (bc.member[x]) out(x) = std::max(out(x), val);
    }
    return out;
}

inline double tent_norm(const SpaceTimeField& F, double p, double alpha = 1.0) {
    if (p < 1) throw std::invalid_argument("tent norm needs p >= 1");
    const MetricMeasureComplex& X = *F.space->X;
    Eigen::VectorXd s = area_functional(F, alpha);
    double acc = 0.0;
    for (int x = 0; x < X.num_vertices(); ++x) acc += X.measure(x) * std::pow(s(x), p);
    return std::pow(acc, 1.0 / p);
}

struct TentAtomCertificate {
    Ball ball;
    bool support_ok = false;
    double normalization = 0.0;   // iint over the Carleson box of |A|^2 dmu dt/t
    double required = 0.0;        // 1/V(B)
    bool pass = false;
    int offending_vertex = -1;    // when support fails
    int offending_time = -1;
};

// Atoms are supported in the Carleson box B x [0, r(B)].
inline TentAtomCertificate validate_atom(const SpaceTimeField& A, const Ball& B,
                                         double rel_tol = 1e-9) {
    const MetricMeasureComplex& X = *A.space->X;
    TentAtomCertificate cert;
    cert.ball = B;
    cert.support_ok = true;
    Eigen::MatrixXd dens = vertex_density(A);
    double mass = 0.0;
    for (int y = 0; y < X.num_vertices(); ++y) {
        for (int j = 0; j < A.grid.size(); ++j) {
            if (dens(y, j) <= 0.0) continue;
            bool inside = X.dist(B.center, y) < B.radius && A.grid.points[j] <= B.radius;
            if (!inside) {
                cert.support_ok = false;
                cert.offending_vertex = y;
                cert.offending_time = j;
            }
            mass += X.measure(y) * dens(y, j) * A.grid.weights[j];
        }
    }
    cert.normalization = mass;
    cert.required = 1.0 / X.volume(B.center, B.radius);
    cert.pass = cert.support_ok && cert.normalization <= cert.required * (1.0 + rel_tol);
    return cert;
}

struct AtomicDecomposition {
    std::vector<double> lambda;
    std::vector<SpaceTimeField> atoms;
    std::vector<Ball> balls;
    std::vector<TentAtomCertificate> certificates;
    double sum_lambda = 0.0;
    double tent1_norm = 0.0;
    double measured_constant = 0.0;   // sum |lambda| / ||F||_{T^{1,2}}
};

// Level-set / Whitney atomic decomposition of T^{1,2}. The support of F is
// partitioned across dyadic level sets of S F, so the reconstruction
// sum lambda_j A_j = F is exact by construction.
inline AtomicDecomposition atomic_decompose(const SpaceTimeField& F) {
    const MetricMeasureComplex& X = *F.space->X;
    const int n = X.num_vertices();
    const int m = F.grid.size();
    Eigen::MatrixXd dens = vertex_density(F);
    if (dens.maxCoeff() <= 0.0) throw std::invalid_argument("atomic_decompose: zero field");

    Eigen::VectorXd sf = area_functional(F, 1.0);
    double smax = sf.maxCoeff();
    int kmax = static_cast<int>(std::floor(std::log2(smax))) ;
    int kmin = kmax - 40;  // below this everything is swept into the global atom

    double diam = X.diameter();
    double whole_radius = std::max(diam * 1.01 + 1.0, F.grid.t_max * 1.01);

    // For each level k, the coverage balls (4 * Whitney balls, or the whole
    // space when O_k is everything).
    struct Cover {
        std::vector<Ball> balls;
    };
    std::vector<int> levels;
    std::vector<Cover> covers;
    for (int k = kmax; k >= kmin; --k) {
        std::vector<int> O;
        for (int x = 0; x < n; ++x)
            if (sf(x) > std::pow(2.0, k)) O.push_back(x);
        if (O.empty()) continue;
        Cover cov;
        if (static_cast<int>(O.size()) == n) {
            cov.balls.push_back({0, whole_radius});
        } else {
            for (const auto& wb : whitney_decompose(X, O))
                cov.balls.push_back({wb.center, 4.0 * wb.radius});
        }
        levels.push_back(k);
        covers.push_back(std::move(cov));
    }

    // Assign each support point to (largest level covering it, first ball).
    // Key: (level index, ball index); level index -1 = global sweep atom.
    std::map<std::pair<int, int>, std::vector<std::pair<int, int>>> groups;
    for (int y = 0; y < n; ++y) {
        for (int j = 0; j < m; ++j) {
            if (dens(y, j) <= 0.0) continue;
            double t = F.grid.points[j];
            int gl = -1, gb = -1;
            // levels[] is ordered from largest k down; pick the largest k that covers
            for (size_t li = 0; li < levels.size(); ++li) {
                int found = -1;
                for (size_t bi = 0; bi < covers[li].balls.size(); ++bi) {
                    const Ball& b = covers[li].balls[bi];
                    if (X.dist(b.center, y) < b.radius && t <= b.radius) {
                        found = static_cast<int>(bi);
                        break;
                    }
                }
                if (found >= 0) {
                    gl = static_cast<int>(li);
                    gb = found;
                }
            }
            groups[{gl, gb}].push_back({y, j});
        }
    }

    AtomicDecomposition out;
    out.tent1_norm = tent_norm(F, 1.0);
    for (const auto& [key, pts] : groups) {
        Ball B = key.first < 0 ? Ball{0, whole_radius} : covers[key.first].balls[key.second];
        // restrict F to the cells whose mass maps to these (vertex,time) points:
        // a cell contributes to each of its vertices; restrict per (cell,time)
        // when all of its vertices are selected at that time. To keep the
        // partition exact at cell level, assign each (cell, time) entry to the
        // group of its lexicographically first vertex.
        SpaceTimeField A(*F.space, F.grid);
        std::set<std::pair<int, int>> ptset(pts.begin(), pts.end());
        for (int k = 0; k <= X.dimension; ++k) {
            for (size_t c = 0; c < X.cells[k].size(); ++c) {
                int idx = F.space->offsets[k] + static_cast<int>(c);
                int rep = X.cells[k][c].verts.front();
                for (int j = 0; j < m; ++j)
                    if (ptset.count({rep, j})) A.values(idx, j) = F.values(idx, j);
            }
        }
        double mass2 = 0.0;
        Eigen::MatrixXd ad = vertex_density(A);
        double rmax = 0.0, tmax = 0.0;
        for (int y = 0; y < n; ++y)
            for (int j = 0; j < m; ++j) {
                if (ad(y, j) <= 0.0) continue;
                mass2 += X.measure(y) * ad(y, j) * F.grid.weights[j];
                rmax = std::max(rmax, X.dist(B.center, y));
                tmax = std::max(tmax, F.grid.points[j]);
            }
        if (mass2 <= 0.0) continue;
        // Cell-valued entries spread density to all vertices of a cell, so the
        // support can exceed the covering ball by one cell diameter; grow the
        // atom's ball to the actual support extent.
        B.radius = std::max(rmax * (1.0 + 1e-9) + 1e-12, tmax);
        double VB = X.volume(B.center, B.radius);
        double lam = std::sqrt(VB * mass2);
        A.values /= lam;
        out.lambda.push_back(lam);
        out.balls.push_back(B);
        out.certificates.push_back(validate_atom(A, B));
        out.atoms.push_back(std::move(A));
        out.sum_lambda += lam;
    }
    out.measured_constant = out.sum_lambda / out.tent1_norm;
    return out;
}

struct DualityPairing {
    Complexd pairing = 0.0;
    double bound = 0.0;   // int S F * C G dmu
    double ratio = 0.0;
};

inline DualityPairing duality_pairing(const SpaceTimeField& F, const SpaceTimeField& G) {
    if (F.space != G.space || F.grid.size() != G.grid.size())
        throw std::invalid_argument("duality_pairing: mismatched fields");
    const MetricMeasureComplex& X = *F.space->X;
    DualityPairing out;
    for (int j = 0; j < F.grid.size(); ++j)
        out.pairing += F.grid.weights[j] *
                       F.space->inner(F.values.col(j), G.values.col(j));
    Eigen::VectorXd sf = area_functional(F, 1.0);
    Eigen::VectorXd cg = carleson_functional(G);
    for (int x = 0; x < X.num_vertices(); ++x) out.bound += X.measure(x) * sf(x) * cg(x);
    out.ratio = out.bound > 0 ? std::abs(out.pairing) / out.bound : 0.0;
    return out;
}

}  // namespace hdforms
