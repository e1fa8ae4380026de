#pragma once

// JSON (de)serialization of scenarios and analysis reports.  Doubles pass
// through nlohmann's shortest-roundtrip formatting, so scenario files
// round-trip bit-exactly; infinite endpoints are spelled "-inf" / "inf".

#include <json.hpp>

#include "delaydiff/core.hpp"
#include "delaydiff/measure.hpp"
#include "delaydiff/stability.hpp"
#include "delaydiff/transport.hpp"

namespace delaydiff {

using json = nlohmann::json;

/// Config parse failure carrying a JSON pointer to the offending field.
struct ConfigError : Error {
    std::string pointer;
    ConfigError(std::string ptr, const std::string& what)
        : Error("config error at " + ptr + ": " + what), pointer(std::move(ptr)) {}
};

namespace jsonio {

inline json endpoint_to_json(double v) {
    if (v == -kInf) return "-inf";
    if (v == kInf) return "inf";
    return v;
}

inline double endpoint_from_json(const json& j, const std::string& ptr) {
    if (j.is_string()) {
        const std::string s = j.get<std::string>();
        if (s == "-inf") return -kInf;
        if (s == "inf") return kInf;
        throw ConfigError(ptr, "expected a number or \"inf\"/\"-inf\"");
    }
    if (!j.is_number()) throw ConfigError(ptr, "expected a number");
    return j.get<double>();
}

inline const json& require(const json& j, const char* key, const std::string& ptr) {
    if (!j.is_object() || !j.contains(key)) throw ConfigError(ptr + "/" + key, "missing field");
    return j.at(key);
}

inline double require_number(const json& j, const char* key, const std::string& ptr) {
    const json& v = require(j, key, ptr);
    if (!v.is_number()) throw ConfigError(ptr + "/" + key, "expected a number");
    return v.get<double>();
}

// --- matrix ---------------------------------------------------------------

inline json matrix_to_json(const Mat& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Mat matrix_from_json(const json& j, const std::string& ptr) {
    if (!j.is_array() || j.empty()) throw ConfigError(ptr, "expected a nonempty array of rows");
    const std::size_t d = j.size();
    Mat m(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(j.at(0).size()));
    for (std::size_t i = 0; i < d; ++i) {
        const json& row = j.at(i);
        if (!row.is_array() || row.size() != static_cast<std::size_t>(m.cols()))
            throw ConfigError(ptr + "/" + std::to_string(i), "ragged matrix row");
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (!row.at(k).is_number())
                throw ConfigError(ptr + "/" + std::to_string(i) + "/" + std::to_string(k), "expected a number");
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row.at(k).get<double>();
        }
    }
    return m;
}

// --- delay ------------------------------------------------------------------

inline json delay_to_json(const DelaySpec& d) {
    json j;
    std::visit(
        [&](const auto& k) {
            using K = std::decay_t<decltype(k)>;
            if constexpr (std::is_same_v<K, ConstantDelay>) {
                j["kind"] = "constant";
                j["c"] = k.c;
            } else if constexpr (std::is_same_v<K, AffineDelay>) {
                j["kind"] = "affine";
                j["a"] = k.a;
                j["b"] = k.b;
            } else if constexpr (std::is_same_v<K, PiecewiseAffineDelay>) {
                j["kind"] = "piecewise_affine";
                j["breakpoints"] = k.breakpoints;
                json segs = json::array();
                for (const auto& s : k.segments) segs.push_back(json{{"a", s.a}, {"b", s.b}});
                j["segments"] = std::move(segs);
                if (!k.point_values.empty()) {
                    json pv = json::array();
                    for (const auto& v : k.point_values) {
                        if (v) pv.push_back(*v);
                        else pv.push_back(nullptr);
                    }
                    j["point_values"] = std::move(pv);
                }
            } else if constexpr (std::is_same_v<K, DyadicSpikeDelay>) {
                j["kind"] = "dyadic_spike";
            } else if constexpr (std::is_same_v<K, TabulatedDelay>) {
                j["kind"] = "tabulated";
                j["grid"] = k.grid;
                j["values"] = k.values;
                j["interpolation"] = (k.interpolation == Interp::Linear) ? "linear" : "left-constant";
            } else {
                j["kind"] = "transport_induced";
                j["ode_step"] = k.ode_step;
                j["root_tol"] = k.root_tol;
                json field;
                std::visit(
                    [&](const auto& form) {
                        using F = std::decay_t<decltype(form)>;
                        if constexpr (std::is_same_v<F, ConstantSpeed>) {
                            field["kind"] = "constant";
                            field["value"] = form.value;
                        } else if constexpr (std::is_same_v<F, SeparableSpeed>) {
                            field["kind"] = "separable";
                            field["time"] = {{"offset", form.time_factor.offset}, {"amp", form.time_factor.amp},
                                             {"freq", form.time_factor.freq}, {"phase", form.time_factor.phase}};
                            field["space"] = {{"offset", form.space_factor.offset}, {"amp", form.space_factor.amp},
                                              {"freq", form.space_factor.freq}, {"phase", form.space_factor.phase}};
                        } else {
                            field["kind"] = "additive";
                            json terms = json::array();
                            for (const auto& term : form.terms) {
                                terms.push_back(
                                    json{{"time",
                                          {{"offset", term.time_factor.offset}, {"amp", term.time_factor.amp},
                                           {"freq", term.time_factor.freq}, {"phase", term.time_factor.phase}}},
                                         {"space",
                                          {{"offset", term.space_factor.offset}, {"amp", term.space_factor.amp},
                                           {"freq", term.space_factor.freq}, {"phase", term.space_factor.phase}}}});
                            }
                            field["terms"] = std::move(terms);
                        }
                    },
                    k.field->form);
                j["field"] = std::move(field);
            }
        },
        d.kind);
    if (d.declared_tau_min) j["tau_min"] = *d.declared_tau_min;
    if (d.declared_tau_max) j["tau_max"] = *d.declared_tau_max;
    return j;
}

inline WaveFactor wave_from_json(const json& j, const std::string& ptr) {
    WaveFactor w;
    w.offset = require_number(j, "offset", ptr);
    if (j.contains("amp")) w.amp = j.at("amp").get<double>();
    if (j.contains("freq")) w.freq = j.at("freq").get<double>();
    if (j.contains("phase")) w.phase = j.at("phase").get<double>();
    return w;
}

inline TransportField field_from_json(const json& j, const std::string& ptr);

inline DelaySpec delay_from_json(const json& j, const std::string& ptr = "/delay") {
    const json& kj = require(j, "kind", ptr);
    if (!kj.is_string()) throw ConfigError(ptr + "/kind", "expected a string");
    const std::string kind = kj.get<std::string>();
    if (kind == "constant") return make_constant_delay(require_number(j, "c", ptr));
    if (kind == "affine") return make_affine_delay(require_number(j, "a", ptr), require_number(j, "b", ptr));
    if (kind == "piecewise_affine") {
        const json& bj = require(j, "breakpoints", ptr);
        const json& sj = require(j, "segments", ptr);
        std::vector<double> bps = bj.get<std::vector<double>>();
        std::vector<AffinePiece> segs;
        for (std::size_t i = 0; i < sj.size(); ++i)
            segs.push_back({require_number(sj.at(i), "a", ptr + "/segments/" + std::to_string(i)),
                            require_number(sj.at(i), "b", ptr + "/segments/" + std::to_string(i))});
        std::vector<std::optional<double>> pvs;
        if (j.contains("point_values")) {
            for (const auto& v : j.at("point_values")) {
                if (v.is_null()) pvs.push_back(std::nullopt);
                else pvs.push_back(v.get<double>());
            }
        }
        return make_piecewise_affine_delay(std::move(bps), std::move(segs), std::move(pvs));
    }
    if (kind == "dyadic_spike") return make_dyadic_spike_delay();
    if (kind == "tabulated") {
        const json& gj = require(j, "grid", ptr);
        const json& vj = require(j, "values", ptr);
        Interp interp = Interp::Linear;
        if (j.contains("interpolation")) {
            const std::string m = j.at("interpolation").get<std::string>();
            if (m == "left-constant") interp = Interp::LeftConstant;
            else if (m != "linear") throw ConfigError(ptr + "/interpolation", "expected \"linear\" or \"left-constant\"");
        }
        std::optional<double> dmin, dmax;
        if (j.contains("tau_min")) dmin = j.at("tau_min").get<double>();
        if (j.contains("tau_max")) dmax = j.at("tau_max").get<double>();
        return make_tabulated_delay(gj.get<std::vector<double>>(), vj.get<std::vector<double>>(), interp, dmin, dmax);
    }
    if (kind == "transport_induced") {
        const TransportField field = field_from_json(require(j, "field", ptr), ptr + "/field");
        const double step = j.contains("ode_step") ? j.at("ode_step").get<double>() : 0.0;
        const double tol = j.contains("root_tol") ? j.at("root_tol").get<double>() : 1e-10;
        const auto maps = transport::make_characteristic_maps(field, step, tol);
        return transport::make_transport_delay(maps);
    }
    throw ConfigError(ptr + "/kind", "unknown delay kind '" + kind + "'");
}

inline TransportField field_from_json(const json& j, const std::string& ptr) {
    const json& kj = require(j, "kind", ptr);
    const std::string kind = kj.get<std::string>();
    if (kind == "constant") return make_constant_field(require_number(j, "value", ptr));
    if (kind == "separable")
        return make_separable_field(wave_from_json(require(j, "time", ptr), ptr + "/time"),
                                    wave_from_json(require(j, "space", ptr), ptr + "/space"));
    if (kind == "additive") {
        std::vector<SeparableSpeed> terms;
        const json& tj = require(j, "terms", ptr);
        for (std::size_t i = 0; i < tj.size(); ++i) {
            const std::string tptr = ptr + "/terms/" + std::to_string(i);
            terms.push_back({wave_from_json(require(tj.at(i), "time", tptr), tptr + "/time"),
                             wave_from_json(require(tj.at(i), "space", tptr), tptr + "/space")});
        }
        return make_additive_field(terms);
    }
    throw ConfigError(ptr + "/kind", "unknown field kind '" + kind + "'");
}

// --- signal -----------------------------------------------------------------

inline json vec_to_json(const Vec& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
    return arr;
}

inline Vec vec_from_json(const json& j, const std::string& ptr) {
    if (!j.is_array() || j.empty()) throw ConfigError(ptr, "expected a nonempty numeric array");
    Vec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j.at(i).is_number()) throw ConfigError(ptr + "/" + std::to_string(i), "expected a number");
        v(static_cast<Eigen::Index>(i)) = j.at(i).get<double>();
    }
    return v;
}

inline const char* regularity_name(Regularity r) {
    switch (r) {
        case Regularity::Continuous: return "continuous";
        case Regularity::Regulated: return "regulated";
        case Regularity::Lp: return "lp";
        default: return "linf";
    }
}

inline Regularity regularity_from_name(const std::string& s, const std::string& ptr) {
    if (s == "continuous") return Regularity::Continuous;
    if (s == "regulated") return Regularity::Regulated;
    if (s == "lp") return Regularity::Lp;
    if (s == "linf") return Regularity::Linf;
    throw ConfigError(ptr, "unknown regularity '" + s + "'");
}

inline json signal_to_json(const Signal& s) {
    json j;
    j["support"] = json::array({endpoint_to_json(s.support_left), s.support_right});
    j["right_open"] = s.right_open;
    j["regularity"] = regularity_name(s.regularity);
    if (s.regularity == Regularity::Lp) j["p"] = s.p;
    std::visit(
        [&](const auto& f) {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, ConstantForm>) {
                j["form"] = "constant";
                j["value"] = vec_to_json(f.value);
            } else if constexpr (std::is_same_v<F, PowerForm>) {
                j["form"] = "power";
                j["beta"] = f.beta;
                j["direction"] = vec_to_json(f.direction);
            } else if constexpr (std::is_same_v<F, ScalarFamilyForm>) {
                j["form"] = "scalar_family";
                j["rho"] = {f.rho.real(), f.rho.imag()};
                j["alpha"] = {f.alpha.real(), f.alpha.imag()};
                json dir = json::array();
                for (Eigen::Index i = 0; i < f.direction.size(); ++i)
                    dir.push_back(json::array({f.direction(i).real(), f.direction(i).imag()}));
                j["direction"] = std::move(dir);
            } else {
                j["form"] = "sampled";
                j["grid"] = f.grid;
                json vals = json::array();
                for (const Vec& v : f.values) vals.push_back(vec_to_json(v));
                j["values"] = std::move(vals);
                j["interpolation"] = (f.interpolation == Interp::Linear) ? "linear" : "left-constant";
            }
        },
        s.form);
    return j;
}

inline Signal signal_from_json(const json& j, const std::string& ptr = "/initial") {
    const json& fj = require(j, "form", ptr);
    const std::string form = fj.get<std::string>();
    const json& sj = require(j, "support", ptr);
    if (!sj.is_array() || sj.size() != 2) throw ConfigError(ptr + "/support", "expected [left, right]");
    const double left = endpoint_from_json(sj.at(0), ptr + "/support/0");
    const double right = endpoint_from_json(sj.at(1), ptr + "/support/1");

    Signal s;
    s.support_left = left;
    s.support_right = right;
    if (j.contains("right_open")) s.right_open = j.at("right_open").get<bool>();
    s.regularity = regularity_from_name(require(j, "regularity", ptr).get<std::string>(), ptr + "/regularity");
    if (j.contains("p")) s.p = j.at("p").get<double>();

    if (form == "constant") {
        s.form = ConstantForm{vec_from_json(require(j, "value", ptr), ptr + "/value")};
    } else if (form == "power") {
        s.form = PowerForm{require_number(j, "beta", ptr), vec_from_json(require(j, "direction", ptr), ptr + "/direction")};
    } else if (form == "scalar_family") {
        const json& rj = require(j, "rho", ptr);
        const json& aj = require(j, "alpha", ptr);
        const json& dj = require(j, "direction", ptr);
        Eigen::VectorXcd dir(static_cast<Eigen::Index>(dj.size()));
        for (std::size_t i = 0; i < dj.size(); ++i)
            dir(static_cast<Eigen::Index>(i)) = {dj.at(i).at(0).get<double>(), dj.at(i).at(1).get<double>()};
        s.form = ScalarFamilyForm{{rj.at(0).get<double>(), rj.at(1).get<double>()},
                                  {aj.at(0).get<double>(), aj.at(1).get<double>()},
                                  dir};
    } else if (form == "sampled") {
        const json& gj = require(j, "grid", ptr);
        const json& vj = require(j, "values", ptr);
        SampledForm sf;
        sf.grid = gj.get<std::vector<double>>();
        for (std::size_t i = 0; i < vj.size(); ++i) sf.values.push_back(vec_from_json(vj.at(i), ptr + "/values/" + std::to_string(i)));
        if (j.contains("interpolation") && j.at("interpolation").get<std::string>() == "left-constant")
            sf.interpolation = Interp::LeftConstant;
        s.form = std::move(sf);
    } else {
        throw ConfigError(ptr + "/form", "unknown signal form '" + form + "'");
    }
    detail::validate_signal(s);
    return s;
}

// --- scenario ---------------------------------------------------------------

inline json scenario_to_json(const Scenario& s) {
    json j;
    j["matrix"] = matrix_to_json(s.matrix.entries);
    j["delay"] = delay_to_json(s.delay);
    j["initial"] = signal_to_json(s.initial);
    j["horizon"] = s.horizon_T;
    j["grid"] = s.output_grid;
    json norms = json::array();
    for (const auto& n : s.norm_requests) {
        json nj;
        nj["p"] = std::isfinite(n.p) ? json(n.p) : json("inf");
        if (n.fixed_window) nj["window"] = *n.fixed_window;
        else nj["window"] = "h";
        norms.push_back(std::move(nj));
    }
    j["norms"] = std::move(norms);
    return j;
}

inline Scenario scenario_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("", "config root must be an object");
    if (!j.contains("matrix")) throw ConfigError("/matrix", "missing field");
    if (!j.contains("delay")) throw ConfigError("/delay", "missing field");
    if (!j.contains("initial")) throw ConfigError("/initial", "missing field");
    if (!j.contains("horizon")) throw ConfigError("/horizon", "missing field");
    if (!j.contains("grid")) throw ConfigError("/grid", "missing field");

    const Mat m = matrix_from_json(j.at("matrix"), "/matrix");
    SystemMatrix sm;
    try {
        sm = make_system_matrix(m);
    } catch (const Error& e) {
        throw ConfigError("/matrix", e.what());
    }
    DelaySpec delay = delay_from_json(j.at("delay"));
    Signal initial = signal_from_json(j.at("initial"));
    if (!j.at("horizon").is_number()) throw ConfigError("/horizon", "expected a number");
    const double horizon = j.at("horizon").get<double>();
    if (!j.at("grid").is_array()) throw ConfigError("/grid", "expected an array");
    std::vector<double> grid = j.at("grid").get<std::vector<double>>();

    std::vector<NormRequest> norms;
    if (j.contains("norms")) {
        for (std::size_t i = 0; i < j.at("norms").size(); ++i) {
            const json& nj = j.at("norms").at(i);
            NormRequest req;
            const json& pj = require(nj, "p", "/norms/" + std::to_string(i));
            req.p = pj.is_string() ? kInf : pj.get<double>();
            if (nj.contains("window") && nj.at("window").is_number()) req.fixed_window = nj.at("window").get<double>();
            norms.push_back(req);
        }
    }
    try {
        return make_scenario(std::move(sm), std::move(delay), std::move(initial), horizon, std::move(grid),
                             std::move(norms));
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        throw ConfigError("", e.what());
    }
}

// --- reports ----------------------------------------------------------------

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::Holds: return "holds";
        case Verdict::Fails: return "fails";
        default: return "undecidable";
    }
}

inline json report_to_json(const HypothesisReport& rep) {
    json j;
    j["T"] = rep.T;
    if (rep.p) j["p"] = *rep.p;
    json items = json::object();
    for (int h = 1; h <= 10; ++h) {
        const auto& f = rep[h];
        json fj;
        fj["verdict"] = verdict_name(f.verdict);
        if (f.witness) fj["witness"] = *f.witness;
        fj["detail"] = f.detail;
        items["H" + std::to_string(h)] = std::move(fj);
    }
    j["hypotheses"] = std::move(items);
    return j;
}

inline json certificate_to_json(const DecayCertificate& c) {
    json j;
    switch (c.kind) {
        case CertKind::PointwiseExp: j["kind"] = "pointwise-exp"; break;
        case CertKind::SupWindowExp: j["kind"] = "sup-window-exp"; break;
        case CertKind::LpExp: j["kind"] = "lp-exp"; break;
    }
    j["C"] = c.C;
    j["gamma"] = c.gamma;
    j["alpha"] = c.alpha;
    j["beta"] = c.beta;
    if (c.tau_max > 0) j["tau_max"] = c.tau_max;
    if (c.kind == CertKind::LpExp) {
        j["phi_sup"] = c.phi_sup;
        j["p"] = c.p;
    }
    j["norm"] = {{"weight", matrix_to_json(c.norm_used.weight)},
                 {"operator_norm", c.norm_used.exact_operator_norm},
                 {"achieved_operator_norm", c.norm_used.achieved_operator_norm},
                 {"epsilon", c.norm_used.epsilon},
                 {"equiv_lower", c.norm_used.equiv_lower},
                 {"equiv_upper", c.norm_used.equiv_upper}};
    return j;
}

inline json density_to_json(const PushforwardDensity& d) {
    json j;
    j["bin_edges"] = d.bin_edges;
    j["density"] = d.density;
    j["T"] = d.source_T;
    j["sup_estimate"] = d.sup_estimate;
    j["seed"] = d.seed;
    return j;
}

}  // namespace jsonio
}  // namespace delaydiff
