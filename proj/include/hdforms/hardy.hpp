#pragma once

// Hardy norms via Q_psi, adapted cutoffs, molecules and their validator,
// the molecular decomposition pipeline, maximal functions and
// Coifman-Weiss atoms.

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tent.hpp"

namespace hdforms {

// ------------------------------------------------------------- default psi

// Admissible default symbols per p-regime; beta from the doubling certificate.
inline SymbolFunction default_hardy_symbol(double p, int beta) {
    if (p < 2.0) {
        int N = static_cast<int>(std::ceil(beta / 2.0)) + 1;   // tau = 2N-1 >= beta+1
        return symbol_rational(1, N);
    }
    if (p > 2.0) {
        return symbol_rational(beta, beta + 1);  // sigma = beta
    }
    return symbol_monomial_gauss(1);
}

inline void check_symbol_admissible(const SymbolFunction& psi, double p, int beta) {
    if (!psi.psi_class) throw std::invalid_argument("hardy_norm needs a Psi-class symbol");
    if (p < 2.0 && !(psi.sigma >= 1.0 && psi.tau >= beta + 1.0))
        throw std::invalid_argument("symbol class inadmissible for p < 2 (need sigma>=1, tau>=beta+1)");
    if (p > 2.0 && !(psi.sigma >= beta))
        throw std::invalid_argument("symbol class inadmissible for p > 2 (need sigma>=beta)");
}

struct HardyNorm {
    double value = 0.0;
    double harmonic_norm = 0.0;   // L^2 norm of the dropped nullspace part
};

inline HardyNorm hardy_norm(const SpectralDecomposition& S, const GradedForm& f, double p,
                            const SymbolFunction& psi, const TimeGrid& grid, int beta) {
    if (p < 1.0) throw std::invalid_argument("hardy_norm needs p >= 1");
    check_symbol_admissible(psi, p, beta);
    HardyNorm out;
    out.harmonic_norm = harmonic_part(S, f).norm();
    GradedForm fr = range_part(S, f);
    SpaceTimeField F = q_transform(psi, S, fr, grid);
    out.value = tent_norm(F, p, 1.0);
    return out;
}

// --------------------------------------------------------- adapted cutoffs

struct AdaptedCutoffs {
    Ball ball;
    std::vector<Eigen::VectorXd> chi;   // per annulus index k, one value per vertex
    double lipschitz_constant = 0.0;    // measured sup over edges of |dchi| * 2^k r / len
};

// chi_k from telescoped radial ramps: eta_k = clamp((2^{k+2} r - rho)/(2^{k+1} r)),
// chi_0 = eta_0, chi_k = eta_k - eta_{k-1}. Partition of unity once 2^{K+1} r
// covers the diameter.
inline AdaptedCutoffs build_adapted_cutoffs(const MetricMeasureComplex& X, const Ball& B,
                                            int K = -1) {
    if (!(B.radius > 0)) throw std::invalid_argument("cutoffs need a positive radius");
    const int n = X.num_vertices();
    double r = B.radius;
    if (K < 0)
        K = std::max(1, static_cast<int>(std::ceil(std::log2(
                              std::max(2.0, X.diameter() / r)))) + 2);
    auto eta = [&](int k, int x) {
        double rho = X.dist(B.center, x);
        double hi = std::pow(2.0, k + 2) * r, ramp = std::pow(2.0, k + 1) * r;
        return std::clamp((hi - rho) / ramp, 0.0, 1.0);
    };
    AdaptedCutoffs out;
    out.ball = B;
    for (int k = 0; k <= K; ++k) {
        Eigen::VectorXd c(n);
        for (int x = 0; x < n; ++x)
            c(x) = k == 0 ? eta(0, x) : eta(k, x) - eta(k - 1, x);
        out.chi.push_back(std::move(c));
    }
    // force exact partition of unity at the top annulus
    for (int x = 0; x < n; ++x) {
        double s = 0.0;
        for (int k = 0; k < K; ++k) s += out.chi[k](x);
        out.chi[K](x) = 1.0 - s;
    }
    if (X.dimension >= 1) {
        for (const auto& e : X.cells[1]) {
            for (int k = 0; k <= K; ++k) {
                double diff = std::abs(out.chi[k](e.verts[0]) - out.chi[k](e.verts[1]));
                out.lipschitz_constant = std::max(
                    out.lipschitz_constant, diff * std::pow(2.0, k) * r / e.length);
            }
        }
    }
    return out;
}

// Multiply a graded form by a vertex function (cell multiplier = mean of the
// function over the cell's vertices).
inline GradedForm multiply_by_vertex_function(const GradedForm& f, const Eigen::VectorXd& chi) {
    const GradedSpace& S = *f.space;
    const MetricMeasureComplex& X = *S.X;
    GradedForm out(S);
    for (int k = 0; k <= X.dimension; ++k) {
        for (size_t c = 0; c < X.cells[k].size(); ++c) {
            double m = 0.0;
            for (int v : X.cells[k][c].verts) m += chi(v);
            m /= static_cast<double>(k + 1);
            int idx = S.offsets[k] + static_cast<int>(c);
            out.coeffs(idx) = m * f.coeffs(idx);
        }
    }
    return out;
}

// Sharp indicator multiplier: keep a cell iff all of its vertices are in E.
inline GradedForm restrict_to_vertex_set(const GradedForm& f, const std::vector<char>& member) {
    const GradedSpace& S = *f.space;
    const MetricMeasureComplex& X = *S.X;
    GradedForm out(S);
    for (int k = 0; k <= X.dimension; ++k) {
        for (size_t c = 0; c < X.cells[k].size(); ++c) {
            bool all_in = true;
            for (int v : X.cells[k][c].verts) all_in = all_in && member[v];
            int idx = S.offsets[k] + static_cast<int>(c);
            if (all_in) out.coeffs(idx) = f.coeffs(idx);
        }
    }
    return out;
}

// ---------------------------------------------------------------- molecules

enum class MoleculeOperator { D, Delta, d, dstar };

struct MoleculeCertificate {
    Ball ball;
    int order = 1;
    bool operator_identity_ok = false;   // a = Op^N b
    double operator_identity_residual = 0.0;
    std::vector<double> annulus_a, annulus_b;          // measured ||chi_k a||, ||chi_k b||
    std::vector<double> required_a, required_b;        // 2^{-k} V^{-1/2}(2^k B) (etc.)
    double slack = 0.0;                                // max measured/required ratio
    double l1_norm_a = 0.0;
    bool pass = false;
};

struct MoleculeValidationOptions {
    double slack_tolerance = 1.0;
    bool atom_variant = false;   // b supported in B, no 2^{-k} tails required
};

inline MoleculeCertificate validate_molecule(const SpectralDecomposition& S,
                                             const GradedOperator& d, const GradedOperator& dstar,
                                             const GradedForm& a, const GradedForm& b,
                                             const Ball& B, int N, MoleculeOperator op,
                                             MoleculeValidationOptions opts = {}) {
    const MetricMeasureComplex& X = *S.space->X;
    MoleculeCertificate cert;
    cert.ball = B;
    cert.order = N;

    GradedOperator Dop;
    Dop.space = S.space;
    Dop.mat = d.mat + dstar.mat;
    GradedForm opb = b;
    switch (op) {
        case MoleculeOperator::D:
            for (int i = 0; i < N; ++i) opb = Dop.apply(opb);
            break;
        case MoleculeOperator::Delta:
            for (int i = 0; i < 2 * N; ++i) opb = Dop.apply(opb);
            break;
        case MoleculeOperator::d:   // a = d D^{N-1} b
            for (int i = 0; i + 1 < N; ++i) opb = Dop.apply(opb);
            opb = d.apply(opb);
            break;
        case MoleculeOperator::dstar:
            for (int i = 0; i + 1 < N; ++i) opb = Dop.apply(opb);
            opb = dstar.apply(opb);
            break;
    }
    GradedForm diff(*S.space, a.coeffs - opb.coeffs);
    cert.operator_identity_residual = diff.norm() / std::max(1e-300, a.norm());
    cert.operator_identity_ok = cert.operator_identity_residual <= 1e-9;

    AdaptedCutoffs cuts = build_adapted_cutoffs(X, B);
    double r = B.radius;
    cert.slack = 0.0;
    for (size_t k = 0; k < cuts.chi.size(); ++k) {
        double na = multiply_by_vertex_function(a, cuts.chi[k]).norm();
        double nb = multiply_by_vertex_function(b, cuts.chi[k]).norm();
        double vk = X.volume(B.center, std::pow(2.0, static_cast<double>(k)) * r);
        double tail = opts.atom_variant ? 1.0 : std::pow(2.0, -static_cast<double>(k));
        double req_a = tail / std::sqrt(vk);
        double req_b = tail * std::pow(r, N) / std::sqrt(vk);
        cert.annulus_a.push_back(na);
        cert.annulus_b.push_back(nb);
        cert.required_a.push_back(req_a);
        cert.required_b.push_back(req_b);
        if (na > 0) cert.slack = std::max(cert.slack, na / req_a);
        if (nb > 0) cert.slack = std::max(cert.slack, nb / req_b);
    }
    cert.l1_norm_a = l1_norm(a);
    cert.pass = cert.operator_identity_ok && cert.slack <= opts.slack_tolerance;
    return cert;
}

struct Molecule {
    GradedForm a, b;
    Ball ball;
};

struct MolecularDecomposition {
    std::vector<double> lambda;
    std::vector<Molecule> molecules;
    std::vector<MoleculeCertificate> certificates;
    double sum_lambda = 0.0;
    double reconstruction_residual = 0.0;   // relative to ||f||
    double max_slack = 0.0;
    int order = 1;
};

struct MolecularOptions {
    int order = 0;         // 0 = default floor(kappa/2)+2
    bool gaussian_mode = false;   // allow N = 1
    double harmonic_tolerance = 1e-8;
};

// Per tent atom A: a = S_psi A (with psi = z^M (1+iz)^{-M-2} Calderon-paired
// against the analysis symbol) and b = int t^N phi_t(D) A_t dt/t with
// psi(z) = z^N phi(z), so that a = D^N b exactly on the grid.
inline MolecularDecomposition molecular_decompose(const SpectralDecomposition& S,
                                                  const GradedOperator& d,
                                                  const GradedOperator& dstar,
                                                  const GradedForm& f,
                                                  const DoublingCertificate& doubling,
                                                  const TimeGrid& grid,
                                                  MolecularOptions opts = {}) {
    const int beta = doubling.beta;
    int N = opts.order > 0 ? opts.order
                           : static_cast<int>(std::floor(doubling.kappa / 2.0)) + 2;
    if (!opts.gaussian_mode && !(N > doubling.kappa / 2.0 + 1.0))
        throw std::invalid_argument("molecule order too small for certified mode");

    double hn = harmonic_part(S, f).norm();
    if (hn > opts.harmonic_tolerance * std::max(1e-300, f.norm()))
        throw std::invalid_argument("molecular_decompose: form has a harmonic component");

    SymbolFunction analysis = default_hardy_symbol(1.0, beta);
    int M = std::max(beta, N);
    SymbolFunction synth_raw = symbol_resolvent_power(M, M + 2);   // z^M (1+iz)^{-M-2}
    CalderonPair pair = calderon_normalize(analysis, synth_raw);

    // phi with psi = z^N phi, carrying the same normalization.
    SymbolFunction phi;
    phi.name = "phi(" + pair.synthesis.name + ")";
    phi.psi_class = true;   // phi(0) := 0, dropping the (irrelevant) harmonic part of b
    auto synth_eval = pair.synthesis.eval;
    phi.eval = [synth_eval, N](double x) {
        if (x == 0.0) return Complexd(0.0, 0.0);   // M > N keeps this the limit value
        return synth_eval(x) / std::pow(Complexd(x, 0.0), N);
    };

    SpaceTimeField F = q_transform(analysis, S, f, grid);
    AtomicDecomposition atoms = atomic_decompose(F);

    MolecularDecomposition out;
    out.order = N;
    Eigen::VectorXcd recon = Eigen::VectorXcd::Zero(S.space->total);
    for (size_t j = 0; j < atoms.atoms.size(); ++j) {
        Molecule mol;
        mol.ball = atoms.balls[j];
        mol.a = s_transform(pair.synthesis, S, atoms.atoms[j]);
        // b = sum_j w_j t^N phi_t(D) A_t
        SpaceTimeField scaled = atoms.atoms[j];
        for (int t = 0; t < scaled.grid.size(); ++t)
            scaled.values.col(t) *= std::pow(scaled.grid.points[t], N);
        mol.b = s_transform(phi, S, scaled);
        recon += atoms.lambda[j] * mol.a.coeffs;
        out.lambda.push_back(atoms.lambda[j]);
        out.sum_lambda += atoms.lambda[j];
        MoleculeCertificate cert = validate_molecule(S, d, dstar, mol.a, mol.b, mol.ball, N,
                                                     MoleculeOperator::D,
                                                     {1e18, false});
        out.max_slack = std::max(out.max_slack, cert.slack);
        out.certificates.push_back(std::move(cert));
        out.molecules.push_back(std::move(mol));
    }
    GradedForm diff(*S.space, recon - f.coeffs);
    out.reconstruction_residual = diff.norm() / std::max(1e-300, f.norm());
    return out;
}

// --------------------------------------------------------- maximal function

enum class MaximalVariant { plain, tilde };

// f*_{alpha,c}(x) = sup over the cone of L^2 space-time ball averages of the
// heat extension u(., s) = e^{-s^2 Delta} f; the tilde variant adds
// |s d/ds u|^2 = |-2 s^2 Delta u|^2, both evaluated spectrally.
inline Eigen::VectorXd maximal_function(const SpectralDecomposition& S, const GradedForm& f,
                                        double alpha, double c, const TimeGrid& grid,
                                        MaximalVariant variant = MaximalVariant::plain) {
    if (!(c > 0) || c > alpha / (1.0 + 2.0 * alpha) + 1e-12)
        throw std::invalid_argument("maximal function needs 0 < c <= alpha/(1+2 alpha)");
    const MetricMeasureComplex& X = *S.space->X;
    const int n = X.num_vertices();
    const int m = grid.size();

    SymbolFunction heat = symbol_heat();
    Eigen::MatrixXd udens(n, m), ddens(n, m);
    for (int j = 0; j < m; ++j) {
        double s = grid.points[j];
        GradedForm u = apply_function(heat, S, f, s);
        udens.col(j) = pointwise_density(u);
        if (variant == MaximalVariant::tilde) {
            // s d/ds e^{-s^2 Delta} f = -2 s^2 Delta e^{-s^2 Delta} f
            Eigen::VectorXcd cf = S.coeffs(f.coeffs);
            for (int i = 0; i < cf.size(); ++i) {
                double lam2 = S.eigenvalues(i) * S.eigenvalues(i);
                cf(i) *= -2.0 * s * s * lam2 * std::exp(-s * s * lam2);
            }
            GradedForm du(*S.space, S.synthesize(cf));
            ddens.col(j) = pointwise_density(du);
        }
    }

    // The ball average depends only on (y, t_j); compute it once, then take
    // the cone supremum per x.
    Eigen::MatrixXd avg = Eigen::MatrixXd::Constant(n, m, -1.0);   // -1 = empty window
    for (int y = 0; y < n; ++y) {
        for (int j = 0; j < m; ++j) {
            double t = grid.points[j];
            // space-time ball B(y, ct) x (t - ct, t + ct)
            double acc = 0.0;
            bool any = false;
            for (int i = 0; i < m; ++i) {
                double s = grid.points[i];
                if (!(s > t - c * t && s < t + c * t)) continue;
                double ds = s * grid.weights[i];   // ds = s d(log s)
                for (int z = 0; z < n; ++z) {
                    if (!(X.dist(y, z) < c * t)) continue;
                    double val = udens(z, i);
                    if (variant == MaximalVariant::tilde) val += ddens(z, i);
                    acc += X.measure(z) * ds * val;
                    any = true;
                }
            }
            if (any) avg(y, j) = acc / (t * X.volume(y, t));
        }
    }
    Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
    for (int x = 0; x < n; ++x) {
        double best = 0.0;
        for (int y = 0; y < n; ++y)
            for (int j = 0; j < m; ++j)
                if (X.dist(x, y) < alpha * grid.points[j] && avg(y, j) > best)
                    best = avg(y, j);
        out(x) = std::sqrt(best);
    }
    return out;
}

inline double maximal_norm(const SpectralDecomposition& S, const GradedForm& f, double alpha,
                           double c, const TimeGrid& grid,
                           MaximalVariant variant = MaximalVariant::plain) {
    const MetricMeasureComplex& X = *S.space->X;
    Eigen::VectorXd fs = maximal_function(S, f, alpha, c, grid, variant);
    double s = 0.0;
    for (int x = 0; x < X.num_vertices(); ++x) s += X.measure(x) * fs(x);
    return s;
}

// ------------------------------------------------------ Coifman-Weiss atoms

struct CwAtomCertificate {
    Ball ball;
    bool support_ok = false;
    double integral = 0.0;        // |int a dmu|
    double l2_norm = 0.0;
    double required_l2 = 0.0;     // V(B)^{-1/2}
    bool zero_integral_ok = false;
    bool norm_ok = false;
    bool pass = false;
};

inline CwAtomCertificate validate_cw_atom(const GradedSpace& S, const Eigen::VectorXcd& a,
                                          const Ball& B, double tol = 1e-10) {
    const MetricMeasureComplex& X = *S.X;
    if (a.size() != X.num_vertices())
        throw std::invalid_argument("validate_cw_atom expects a 0-form");
    CwAtomCertificate cert;
    cert.ball = B;
    cert.support_ok = true;
    Complexd integral = 0.0;
    double norm2 = 0.0, scale = 0.0;
    for (int y = 0; y < X.num_vertices(); ++y) {
        if (std::abs(a(y)) > 0 && !(X.dist(B.center, y) < B.radius)) cert.support_ok = false;
        integral += X.measure(y) * a(y);
        norm2 += X.measure(y) * std::norm(a(y));
        scale = std::max(scale, std::abs(a(y)));
    }
    cert.integral = std::abs(integral);
    cert.l2_norm = std::sqrt(norm2);
    cert.required_l2 = 1.0 / std::sqrt(X.volume(B.center, B.radius));
    cert.zero_integral_ok = cert.integral <= tol * std::max(1.0, scale);
    cert.norm_ok = cert.l2_norm <= cert.required_l2 * (1.0 + tol);
    cert.pass = cert.support_ok && cert.zero_integral_ok && cert.norm_ok;
    return cert;
}

}  // namespace hdforms
