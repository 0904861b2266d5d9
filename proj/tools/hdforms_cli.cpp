// Command-line front end: complex generation, spectra, Hardy norms, tent
// atoms, molecules, maximal functions, Riesz transforms and probes.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <hdforms/hdforms.hpp>

namespace {

using namespace hdforms;

struct LoadedComplex {
    MetricMeasureComplex X;
    GradedSpace S;
    GradedOperator d, dstar;
    SpectralDecomposition spec;

    explicit LoadedComplex(MetricMeasureComplex x)
        : X(std::move(x)), S(X), d(assemble_exterior_derivative(S)),
          dstar(assemble_codifferential(S, d)), spec(decompose_dirac(S)) {}
};

std::vector<int> parse_sizes(const std::string& s) {
    std::vector<int> out;
    size_t pos = 0;
    while (pos < s.size()) {
        size_t comma = s.find_first_of(",x", pos);
        out.push_back(std::stoi(s.substr(pos, comma - pos)));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Hardy-space machinery on finite weighted simplicial complexes"};
    app.require_subcommand(1);

    // ---- gen
    auto* gen = app.add_subcommand("gen", "generate a complex file");
    std::string gen_kind, gen_size = "8", gen_output = "mesh.json";
    unsigned gen_seed = 7;
    gen->add_option("--kind", gen_kind, "path|cycle|torus_grid|sphere_triangulation|dumbbell")
        ->required();
    gen->add_option("--size", gen_size, "size parameters, comma or x separated");
    gen->add_option("--seed", gen_seed);
    gen->add_option("--output", gen_output);

    // ---- spectrum
    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of D (or of Delta per degree)");
    std::string sp_complex, sp_output = "spec.json";
    int sp_degree = -1;
    spectrum->add_option("--complex", sp_complex)->required();
    spectrum->add_option("--degree", sp_degree, "restrict to Delta on this degree");
    spectrum->add_option("--output", sp_output);

    // ---- hardy-norm
    auto* hardy = app.add_subcommand("hardy-norm", "Hardy norm of a form");
    std::string hn_complex, hn_form, hn_psi = "default", hn_output = "report.json";
    double hn_p = 1.0, hn_tmin = 0.0, hn_tmax = 0.0;
    hardy->add_option("--complex", hn_complex)->required();
    hardy->add_option("--form", hn_form)->required();
    hardy->add_option("--p", hn_p);
    hardy->add_option("--psi", hn_psi);
    hardy->add_option("--t-min", hn_tmin, "0 = auto");
    hardy->add_option("--t-max", hn_tmax, "0 = auto");
    hardy->add_option("--output", hn_output);

    // ---- tent-atoms
    auto* tent = app.add_subcommand("tent-atoms", "atomic decomposition of a field");
    std::string ta_complex, ta_field, ta_output = "atoms.json";
    tent->add_option("--complex", ta_complex)->required();
    tent->add_option("--field", ta_field)->required();
    tent->add_option("--output", ta_output);

    // ---- molecules
    auto* mol = app.add_subcommand("molecules", "molecular decomposition of a form");
    std::string mo_complex, mo_form, mo_order = "auto", mo_output = "mol.json";
    mol->add_option("--complex", mo_complex)->required();
    mol->add_option("--form", mo_form)->required();
    mol->add_option("--order", mo_order, "auto or a positive integer");
    mol->add_option("--output", mo_output);

    // ---- maximal
    auto* maximal = app.add_subcommand("maximal", "maximal function norm of a form");
    std::string mx_complex, mx_form, mx_variant = "plain", mx_output = "maximal.json";
    double mx_alpha = 1.0, mx_c = 0.0;
    maximal->add_option("--complex", mx_complex)->required();
    maximal->add_option("--form", mx_form)->required();
    maximal->add_option("--alpha", mx_alpha);
    maximal->add_option("--c", mx_c, "0 = alpha/(1+2 alpha)");
    maximal->add_option("--variant", mx_variant, "plain|tilde");
    maximal->add_option("--output", mx_output);

    // ---- riesz
    auto* riesz = app.add_subcommand("riesz", "Riesz transform of a form");
    std::string rz_complex, rz_form, rz_variant = "full", rz_output = "riesz.json";
    riesz->add_option("--complex", rz_complex)->required();
    riesz->add_option("--form", rz_form)->required();
    riesz->add_option("--variant", rz_variant, "full|d_side|dstar_side");
    riesz->add_option("--output", rz_output);

    // ---- probe-offdiag
    auto* pod = app.add_subcommand("probe-offdiag", "off-diagonal decay probe");
    std::string po_complex, po_family = "res:1:2", po_E, po_F, po_output = "offdiag.json";
    double po_order = 1.0;
    pod->add_option("--complex", po_complex)->required();
    pod->add_option("--family", po_family);
    pod->add_option("--E", po_E, "comma separated vertex ids")->required();
    pod->add_option("--F", po_F, "comma separated vertex ids")->required();
    pod->add_option("--order", po_order);
    pod->add_option("--output", po_output);

    // ---- probe-gaussian
    auto* pg = app.add_subcommand("probe-gaussian", "Gaussian heat-kernel envelope probe");
    std::string pg_complex, pg_output = "gaussian.json";
    int pg_degree = 0;
    pg->add_option("--complex", pg_complex)->required();
    pg->add_option("--degree", pg_degree);
    pg->add_option("--output", pg_output);

    // ---- probe-composition
    auto* pc = app.add_subcommand("probe-composition", "composition decay probe");
    std::string pc_complex, pc_output = "composition.json";
    double pc_a = 1.0, pc_b = 1.0;
    pc->add_option("--complex", pc_complex)->required();
    pc->add_option("--a", pc_a);
    pc->add_option("--b", pc_b);
    pc->add_option("--output", pc_output);

    // ---- report
    auto* rp = app.add_subcommand("report", "summarize a report file");
    std::string rp_file;
    rp->add_option("file", rp_file)->required();

    // ---- run
    auto* run = app.add_subcommand("run", "run a config-driven experiment set");
    std::string run_config;
    run->add_option("config", run_config)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            MetricMeasureComplex X = generate_complex(gen_kind, parse_sizes(gen_size), gen_seed);
            save_complex(gen_output, X);
            std::cout << "wrote " << gen_output << " (" << X.num_vertices() << " vertices)\n";
        } else if (*spectrum) {
            LoadedComplex L(load_complex(sp_complex));
            json out;
            if (sp_degree >= 0) {
                // Delta restricted to one degree: squares of the D eigenvalues do not
                // separate degrees, so assemble Delta and read the diagonal block.
                GradedOperator Delta;
                Delta.space = &L.S;
                Delta.mat = (L.d.mat + L.dstar.mat) * (L.d.mat + L.dstar.mat);
                int off = L.S.offsets[sp_degree], nk = L.S.degree_size(sp_degree);
                Eigen::MatrixXd block = Eigen::MatrixXd(Delta.mat).block(off, off, nk, nk);
                Eigen::MatrixXd sym = L.S.sqrt_w.segment(off, nk).asDiagonal() * block *
                                      L.S.inv_sqrt_w.segment(off, nk).asDiagonal();
                Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (sym + sym.transpose()));
                json ev = json::array();
                for (int i = 0; i < es.eigenvalues().size(); ++i)
                    ev.push_back(es.eigenvalues()(i));
                out = {{"degree", sp_degree}, {"eigenvalues", ev}};
            } else {
                json ev = json::array();
                for (int i = 0; i < L.spec.eigenvalues.size(); ++i)
                    ev.push_back(L.spec.eigenvalues(i));
                out = {{"operator", "D"}, {"eigenvalues", ev}};
            }
            save_json_file(sp_output, out);
            std::cout << "wrote " << sp_output << "\n";
        } else if (*hardy) {
            LoadedComplex L(load_complex(hn_complex));
            GradedForm f = form_from_json(L.S, load_json_file(hn_form));
            DoublingCertificate doubling = estimate_doubling(L.X, default_radius_grid(L.X));
            TimeGrid grid = (hn_tmin > 0 && hn_tmax > 0)
                                ? make_time_grid(hn_tmin, hn_tmax)
                                : default_time_grid(L.spec);
            SymbolFunction psi = hn_psi == "default" ? default_hardy_symbol(hn_p, doubling.beta)
                                                     : parse_symbol(hn_psi);
            HardyNorm hn = hardy_norm(L.spec, f, hn_p, psi, grid, doubling.beta);
            save_json_file(hn_output, {{"p", hn_p},
                                       {"psi", psi.name},
                                       {"grid", grid.fingerprint()},
                                       {"hardy_norm", hn.value},
                                       {"harmonic_l2_norm", hn.harmonic_norm}});
            std::cout << "hardy_norm(p=" << hn_p << ") = " << hn.value << "\n";
        } else if (*tent) {
            LoadedComplex L(load_complex(ta_complex));
            SpaceTimeField F = field_from_json(L.S, load_json_file(ta_field));
            AtomicDecomposition dec = atomic_decompose(F);
            json atoms = json::array();
            for (size_t i = 0; i < dec.atoms.size(); ++i)
                atoms.push_back({{"lambda", dec.lambda[i]},
                                 {"ball", {{"center", dec.balls[i].center},
                                           {"radius", dec.balls[i].radius}}},
                                 {"certificate", atom_certificate_to_json(dec.certificates[i])}});
            save_json_file(ta_output, {{"atoms", atoms},
                                       {"sum_lambda", dec.sum_lambda},
                                       {"tent1_norm", dec.tent1_norm},
                                       {"measured_constant", dec.measured_constant}});
            std::cout << dec.atoms.size() << " atoms, sum |lambda| = " << dec.sum_lambda << "\n";
        } else if (*mol) {
            LoadedComplex L(load_complex(mo_complex));
            GradedForm f = form_from_json(L.S, load_json_file(mo_form));
            DoublingCertificate doubling = estimate_doubling(L.X, default_radius_grid(L.X));
            TimeGrid grid = default_time_grid(L.spec);
            MolecularOptions opts;
            if (mo_order != "auto") opts.order = std::stoi(mo_order);
            auto dec = molecular_decompose(L.spec, L.d, L.dstar, range_part(L.spec, f), doubling,
                                           grid, opts);
            json mols = json::array();
            for (size_t i = 0; i < dec.molecules.size(); ++i)
                mols.push_back({{"lambda", dec.lambda[i]},
                                {"certificate",
                                 molecule_certificate_to_json(dec.certificates[i])}});
            save_json_file(mo_output, {{"order", dec.order},
                                       {"molecules", mols},
                                       {"sum_lambda", dec.sum_lambda},
                                       {"max_slack", dec.max_slack},
                                       {"reconstruction_residual", dec.reconstruction_residual}});
            std::cout << dec.molecules.size() << " molecules, residual "
                      << dec.reconstruction_residual << "\n";
        } else if (*maximal) {
            LoadedComplex L(load_complex(mx_complex));
            GradedForm f = form_from_json(L.S, load_json_file(mx_form));
            TimeGrid grid = default_time_grid(L.spec);
            if (mx_c <= 0) mx_c = mx_alpha / (1.0 + 2.0 * mx_alpha);
            MaximalVariant variant =
                mx_variant == "tilde" ? MaximalVariant::tilde : MaximalVariant::plain;
            double norm = maximal_norm(L.spec, f, mx_alpha, mx_c, grid, variant);
            save_json_file(mx_output, {{"alpha", mx_alpha},
                                       {"c", mx_c},
                                       {"variant", mx_variant},
                                       {"maximal_norm", norm}});
            std::cout << "maximal_norm = " << norm << "\n";
        } else if (*riesz) {
            LoadedComplex L(load_complex(rz_complex));
            GradedForm f = form_from_json(L.S, load_json_file(rz_form));
            RieszVariant v = rz_variant == "d_side"
                                 ? RieszVariant::d_side
                                 : rz_variant == "dstar_side" ? RieszVariant::dstar_side
                                                              : RieszVariant::full;
            GradedForm r = riesz_transform(L.spec, f, v, &L.d, &L.dstar);
            save_json_file(rz_output, form_to_json(r));
            std::cout << "wrote " << rz_output << " (norm " << r.norm() << ")\n";
        } else if (*pod) {
            LoadedComplex L(load_complex(po_complex));
            auto parse_set = [&](const std::string& s) {
                std::vector<int> out;
                size_t pos = 0;
                while (pos < s.size()) {
                    size_t comma = s.find(',', pos);
                    std::string tok = s.substr(pos, comma - pos);
                    // accept either a vertex id or a bare index
                    int idx;
                    try {
                        idx = L.X.vertex_index(tok);
                    } catch (const std::invalid_argument&) {
                        idx = std::stoi(tok);
                        L.X.check_vertex(idx);
                    }
                    out.push_back(idx);
                    if (comma == std::string::npos) break;
                    pos = comma + 1;
                }
                return out;
            };
            std::vector<double> zg;
            double rho = 1.0;
            {
                auto E = parse_set(po_E);
                auto F = parse_set(po_F);
                rho = set_distance(L.X, E, F);
                for (int i = 0; i < 60; ++i)
                    zg.push_back(rho * std::pow(10.0, -3.0 + 3.5 * i / 59.0));
                auto rep = offdiag_probe(L.spec, parse_symbol(po_family), E, F, zg, po_order);
                save_json_file(po_output, probe_report_to_json(rep));
                std::cout << "fitted slope " << rep.fitted_exponent << " (verdict "
                          << (rep.verdict ? "pass" : "fail") << ")\n";
            }
        } else if (*pg) {
            LoadedComplex L(load_complex(pg_complex));
            std::vector<double> tg;
            for (double t = 0.25; t <= 16.0; t *= 2.0) tg.push_back(t);
            auto rep = gaussian_kernel_probe(L.spec, pg_degree, tg);
            save_json_file(pg_output, gaussian_report_to_json(rep));
            std::cout << "C_hat " << rep.C_hat << " c_hat " << rep.c_hat << " (verdict "
                      << (rep.verdict ? "pass" : "fail") << ")\n";
        } else if (*pc) {
            LoadedComplex L(load_complex(pc_complex));
            TimeGrid grid = default_time_grid(L.spec, 10);
            SymbolFunction psi = symbol_monomial_gauss(1);
            auto rep = composition_decay_probe(L.spec, psi, psi, symbol_heat(), grid.points,
                                               grid.points, pc_a, pc_b);
            save_json_file(pc_output, {{"a_hat", rep.a_hat},
                                       {"b_hat", rep.b_hat},
                                       {"residual_a", rep.residual_a},
                                       {"residual_b", rep.residual_b},
                                       {"verdict", rep.verdict}});
            std::cout << "a_hat " << rep.a_hat << " b_hat " << rep.b_hat << "\n";
        } else if (*rp) {
            json j = load_json_file(rp_file);
            std::cout << j.dump(2) << "\n";
        } else if (*run) {
            ExperimentConfig cfg = config_from_json(load_json_file(run_config));
            bool ok = run_experiment(cfg);
            std::cout << "report written to " << cfg.output_path << " ("
                      << (ok ? "pass" : "FAIL") << ")\n";
            return ok ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
