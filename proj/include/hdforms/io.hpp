#pragma once

// JSON file formats: complexes, forms, space-time fields, certificates and
// probe reports.

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "probes.hpp"

namespace hdforms {

using json = nlohmann::json;

inline json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);
    json j;
    in >> j;
    return j;
}

inline void save_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

// ----------------------------------------------------------- complex files

inline json complex_to_json(const MetricMeasureComplex& X) {
    json j;
    j["dimension"] = X.dimension;
    j["vertices"] = json::array();
    for (int i = 0; i < X.num_vertices(); ++i)
        j["vertices"].push_back({{"id", X.vertex_ids[i]}, {"measure", X.measure(i)}});
    j["cells"] = json::object();
    for (int k = 1; k <= X.dimension; ++k) {
        json arr = json::array();
        for (const auto& c : X.cells[k]) {
            json jc;
            jc["verts"] = json::array();
            for (int v : c.verts) jc["verts"].push_back(X.vertex_ids[v]);
            jc["weight"] = c.weight;
            if (k == 1) jc["length"] = c.length;
            arr.push_back(jc);
        }
        j["cells"][std::to_string(k)] = arr;
    }
    return j;
}

inline MetricMeasureComplex complex_from_json(const json& j) {
    MetricMeasureComplex X;
    if (!j.contains("dimension") || !j.contains("vertices"))
        throw std::invalid_argument("complex file: missing dimension or vertices");
    X.dimension = j["dimension"].get<int>();
    if (X.dimension < 0) throw std::invalid_argument("complex file: negative dimension");
    const auto& vs = j["vertices"];
    X.measure.resize(vs.size());
    std::map<std::string, int> index;
    int i = 0;
    for (const auto& v : vs) {
        std::string id = v.at("id").get<std::string>();
        if (index.count(id)) throw std::invalid_argument("complex file: duplicate vertex id");
        index[id] = i;
        X.vertex_ids.push_back(id);
        X.measure(i) = v.at("measure").get<double>();
        ++i;
    }
    X.cells.resize(X.dimension + 1);
    for (int v = 0; v < X.num_vertices(); ++v)
        X.cells[0].push_back({{v}, X.measure(v), 1.0});
    if (j.contains("cells")) {
        for (auto& [key, arr] : j["cells"].items()) {
            int k = std::stoi(key);
            if (k < 1 || k > X.dimension)
                throw std::invalid_argument("complex file: cell degree out of range");
            for (const auto& jc : arr) {
                Cell c;
                for (const auto& vid : jc.at("verts"))
                    c.verts.push_back(index.at(vid.get<std::string>()));
                std::sort(c.verts.begin(), c.verts.end());
                c.weight = jc.value("weight", 1.0);
                c.length = jc.value("length", 1.0);
                X.cells[k].push_back(std::move(c));
            }
        }
    }
    if (j.contains("distances")) {
        const auto& dm = j["distances"];
        int n = X.num_vertices();
        X.dist.resize(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) X.dist(a, b) = dm.at(a).at(b).get<double>();
    } else {
        X.compute_distances();
    }
    X.validate();
    return X;
}

inline MetricMeasureComplex load_complex(const std::string& path) {
    return complex_from_json(load_json_file(path));
}

// Generated complexes carry mu as the degree-0 weight; mirror that on load.
inline void save_complex(const std::string& path, const MetricMeasureComplex& X) {
    save_json_file(path, complex_to_json(X));
}

// -------------------------------------------------------------- form files

inline json form_to_json(const GradedForm& f) {
    json j;
    for (int k = 0; k <= f.space->dimension(); ++k) {
        json arr = json::array();
        Eigen::VectorXcd block = f.degree(k);
        for (int i = 0; i < block.size(); ++i) {
            if (block(i).imag() != 0.0)
                arr.push_back({block(i).real(), block(i).imag()});
            else
                arr.push_back(block(i).real());
        }
        j["degree_" + std::to_string(k)] = arr;
    }
    return j;
}

inline GradedForm form_from_json(const GradedSpace& S, const json& j) {
    GradedForm f(S);
    for (int k = 0; k <= S.dimension(); ++k) {
        std::string key = "degree_" + std::to_string(k);
        if (!j.contains(key)) continue;
        const auto& arr = j[key];
        if (static_cast<int>(arr.size()) != S.degree_size(k))
            throw std::invalid_argument("form file: degree block size mismatch at " + key);
        Eigen::VectorXcd block(S.degree_size(k));
        for (int i = 0; i < block.size(); ++i) {
            if (arr[i].is_array())
                block(i) = Complexd(arr[i][0].get<double>(), arr[i][1].get<double>());
            else
                block(i) = Complexd(arr[i].get<double>(), 0.0);
        }
        f.set_degree(k, block);
    }
    return f;
}

// ------------------------------------------------------------- field files

inline json field_to_json(const SpaceTimeField& F) {
    json j;
    j["grid"] = {{"t_min", F.grid.t_min},
                 {"t_max", F.grid.t_max},
                 {"points_per_decade", F.grid.points_per_decade}};
    json values = json::object();
    const GradedSpace& S = *F.space;
    for (int k = 0; k <= S.dimension(); ++k) {
        json rows = json::array();
        for (int c = 0; c < S.degree_size(k); ++c) {
            json row = json::array();
            for (int t = 0; t < F.grid.size(); ++t) {
                Complexd v = F.values(S.offsets[k] + c, t);
                if (v.imag() != 0.0)
                    row.push_back({v.real(), v.imag()});
                else
                    row.push_back(v.real());
            }
            rows.push_back(row);
        }
        values["degree_" + std::to_string(k)] = rows;
    }
    j["values"] = values;
    return j;
}

inline SpaceTimeField field_from_json(const GradedSpace& S, const json& j) {
    const auto& g = j.at("grid");
    TimeGrid grid = make_time_grid(g.at("t_min").get<double>(), g.at("t_max").get<double>(),
                                   g.value("points_per_decade", 40));
    SpaceTimeField F(S, grid);
    const auto& values = j.at("values");
    for (int k = 0; k <= S.dimension(); ++k) {
        std::string key = "degree_" + std::to_string(k);
        if (!values.contains(key)) continue;
        const auto& rows = values[key];
        for (int c = 0; c < S.degree_size(k); ++c) {
            const auto& row = rows.at(c);
            for (int t = 0; t < F.grid.size(); ++t) {
                if (row.at(t).is_array())
                    F.values(S.offsets[k] + c, t) =
                        Complexd(row[t][0].get<double>(), row[t][1].get<double>());
                else
                    F.values(S.offsets[k] + c, t) = Complexd(row[t].get<double>(), 0.0);
            }
        }
    }
    return F;
}

// ------------------------------------------------------------ certificates

inline json doubling_to_json(const DoublingCertificate& c) {
    return {{"C_D", c.C_D}, {"kappa", c.kappa}, {"beta", c.beta},
            {"samples", c.samples.size()}};
}

inline json atom_certificate_to_json(const TentAtomCertificate& c) {
    return {{"ball", {{"center", c.ball.center}, {"radius", c.ball.radius}}},
            {"support_ok", c.support_ok},
            {"normalization", c.normalization},
            {"required", c.required},
            {"pass", c.pass}};
}

inline json molecule_certificate_to_json(const MoleculeCertificate& c) {
    return {{"ball", {{"center", c.ball.center}, {"radius", c.ball.radius}}},
            {"order", c.order},
            {"operator_identity_ok", c.operator_identity_ok},
            {"operator_identity_residual", c.operator_identity_residual},
            {"annulus_a", c.annulus_a},
            {"annulus_b", c.annulus_b},
            {"required_a", c.required_a},
            {"required_b", c.required_b},
            {"slack", c.slack},
            {"l1_norm_a", c.l1_norm_a},
            {"pass", c.pass}};
}

inline json probe_report_to_json(const ProbeReport& r) {
    json samples = json::array();
    for (const auto& s : r.samples)
        samples.push_back({{"parameter", s.parameter}, {"x", s.x}, {"norm", s.norm},
                           {"in_regime", s.in_regime}});
    return {{"family", r.family},
            {"rho", r.rho},
            {"fitted_exponent", r.fitted_exponent},
            {"fitted_constant", r.fitted_constant},
            {"residual", r.residual},
            {"global_norm_bound", r.global_norm_bound},
            {"verdict", r.verdict},
            {"samples", samples}};
}

inline json gaussian_report_to_json(const GaussianKernelReport& r) {
    return {{"degree", r.degree},        {"C_hat", r.C_hat},
            {"c_hat", r.c_hat},          {"residual", r.residual},
            {"envelope_slack", r.envelope_slack},
            {"diagonal_positive", r.diagonal_positive},
            {"verdict", r.verdict}};
}

}  // namespace hdforms
