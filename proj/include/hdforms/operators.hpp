#pragma once

// Graded cochain spaces, the exterior derivative / codifferential and the
// Hodge-Dirac operator D = d + d* on the full graded space.

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "complex.hpp"

namespace hdforms {

using Complexd = std::complex<double>;

// Indexing of the direct sum of all cochain degrees, with the weighted
// inner product <f,g> = sum_k sum_c w_k(c) f_k(c) conj(g_k(c)).
struct GradedSpace {
    const MetricMeasureComplex* X = nullptr;
    std::vector<int> offsets;       // offsets[k] = first index of degree k
    int total = 0;
    Eigen::VectorXd weights;        // w per graded index
    Eigen::VectorXd sqrt_w, inv_sqrt_w;

    explicit GradedSpace(const MetricMeasureComplex& complex) : X(&complex) {
        offsets.resize(complex.dimension + 2);
        int off = 0;
        for (int k = 0; k <= complex.dimension; ++k) {
            offsets[k] = off;
            off += static_cast<int>(complex.cells[k].size());
        }
        offsets[complex.dimension + 1] = off;
        total = off;
        weights.resize(total);
        for (int k = 0; k <= complex.dimension; ++k)
            for (size_t c = 0; c < complex.cells[k].size(); ++c)
                weights(offsets[k] + static_cast<int>(c)) = complex.cells[k][c].weight;
        sqrt_w = weights.cwiseSqrt();
        inv_sqrt_w = sqrt_w.cwiseInverse();
    }

    int degree_size(int k) const { return offsets[k + 1] - offsets[k]; }
    int dimension() const { return X->dimension; }

    Complexd inner(const Eigen::VectorXcd& f, const Eigen::VectorXcd& g) const {
        Complexd s = 0.0;
        for (int i = 0; i < total; ++i) s += weights(i) * f(i) * std::conj(g(i));
        return s;
    }

    double norm(const Eigen::VectorXcd& f) const {
        return std::sqrt(weights.dot(f.cwiseAbs2()));
    }
};

struct GradedForm {
    const GradedSpace* space = nullptr;
    Eigen::VectorXcd coeffs;

    GradedForm() = default;
    explicit GradedForm(const GradedSpace& s)
        : space(&s), coeffs(Eigen::VectorXcd::Zero(s.total)) {}
    GradedForm(const GradedSpace& s, Eigen::VectorXcd c) : space(&s), coeffs(std::move(c)) {
        if (coeffs.size() != s.total) throw std::invalid_argument("graded form size mismatch");
    }

    double norm() const { return space->norm(coeffs); }

    Eigen::VectorXcd degree(int k) const {
        return coeffs.segment(space->offsets[k], space->degree_size(k));
    }

    void set_degree(int k, const Eigen::VectorXcd& v) {
        if (v.size() != space->degree_size(k))
            throw std::invalid_argument("degree block size mismatch");
        coeffs.segment(space->offsets[k], space->degree_size(k)) = v;
    }
};

inline Complexd inner(const GradedForm& f, const GradedForm& g) {
    Complexd s = 0.0;
    for (int i = 0; i < f.space->total; ++i)
        s += f.space->weights(i) * f.coeffs(i) * std::conj(g.coeffs(i));
    return s;
}

// Pointwise fiber-norm-squared density per vertex: degree-0 values live at
// their vertex; higher-degree cell mass is split evenly among the cell's
// vertices and divided by mu(x). Then sum_x mu(x) density(x) = |f|^2.
inline Eigen::VectorXd pointwise_density(const GradedForm& f) {
    const GradedSpace& S = *f.space;
    const MetricMeasureComplex& X = *S.X;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(X.num_vertices());
    for (int k = 0; k <= X.dimension; ++k) {
        for (size_t c = 0; c < X.cells[k].size(); ++c) {
            double mass = X.cells[k][c].weight *
                          std::norm(f.coeffs(S.offsets[k] + static_cast<int>(c)));
            for (int v : X.cells[k][c].verts)
                out(v) += mass / static_cast<double>(k + 1);
        }
    }
    for (int v = 0; v < X.num_vertices(); ++v) out(v) /= X.measure(v);
    return out;
}

// L^1 norm with the pointwise fiber norm: sum_x mu(x) |f|(x).
inline double l1_norm(const GradedForm& f) {
    Eigen::VectorXd dens = pointwise_density(f);
    double s = 0.0;
    for (int v = 0; v < f.space->X->num_vertices(); ++v)
        s += f.space->X->measure(v) * std::sqrt(dens(v));
    return s;
}

// L^p norm with the pointwise fiber norm.
inline double lp_norm(const GradedForm& f, double p) {
    if (p < 1) throw std::invalid_argument("p must be >= 1");
    Eigen::VectorXd dens = pointwise_density(f);
    double s = 0.0;
    for (int v = 0; v < f.space->X->num_vertices(); ++v)
        s += f.space->X->measure(v) * std::pow(dens(v), p / 2.0);
    return std::pow(s, 1.0 / p);
}

struct GradedOperator {
    const GradedSpace* space = nullptr;
    Eigen::SparseMatrix<double> mat;   // acts on full graded coordinate vectors

    GradedForm apply(const GradedForm& f) const {
        return GradedForm(*f.space, mat.cast<Complexd>() * f.coeffs);
    }
};

// Signed incidence exterior derivative: (df)(c) = sum_i (-1)^i f(c \ v_i),
// assembled from sorted vertex tuples.
inline GradedOperator assemble_exterior_derivative(const GradedSpace& S) {
    const MetricMeasureComplex& X = *S.X;
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 1; k <= X.dimension; ++k) {
        std::map<std::vector<int>, int> lower;
        for (size_t c = 0; c < X.cells[k - 1].size(); ++c)
            lower[X.cells[k - 1][c].verts] = static_cast<int>(c);
        for (size_t c = 0; c < X.cells[k].size(); ++c) {
            const auto& verts = X.cells[k][c].verts;
            for (size_t i = 0; i < verts.size(); ++i) {
                std::vector<int> face = verts;
                face.erase(face.begin() + static_cast<long>(i));
                auto it = lower.find(face);
                if (it == lower.end())
                    throw std::invalid_argument("inconsistent cell data: missing face");
                double sign = (i % 2 == 0) ? 1.0 : -1.0;
                trips.emplace_back(S.offsets[k] + static_cast<int>(c),
                                   S.offsets[k - 1] + it->second, sign);
            }
        }
    }
    GradedOperator d;
    d.space = &S;
    d.mat.resize(S.total, S.total);
    d.mat.setFromTriplets(trips.begin(), trips.end());
    return d;
}

// d* = W^{-1} d^T W blockwise; adjoint of d in the weighted inner product.
inline GradedOperator assemble_codifferential(const GradedSpace& S, const GradedOperator& d) {
    GradedOperator ds;
    ds.space = &S;
    Eigen::SparseMatrix<double> dt = Eigen::SparseMatrix<double>(d.mat.transpose());
    Eigen::VectorXd winv = S.weights.cwiseInverse();
    ds.mat = winv.asDiagonal() * dt * S.weights.asDiagonal();
    return ds;
}

inline GradedOperator assemble_dirac(const GradedSpace& S) {
    GradedOperator d = assemble_exterior_derivative(S);
    GradedOperator ds = assemble_codifferential(S, d);
    GradedOperator D;
    D.space = &S;
    D.mat = d.mat + ds.mat;
    return D;
}

inline GradedOperator assemble_laplacian(const GradedSpace& S) {
    GradedOperator D = assemble_dirac(S);
    GradedOperator L;
    L.space = &S;
    L.mat = D.mat * D.mat;
    return L;
}

}  // namespace hdforms
