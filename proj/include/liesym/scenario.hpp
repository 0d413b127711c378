#pragma once

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "liesym/dynamics.hpp"
#include "liesym/gnh.hpp"

namespace liesym {

using Json = nlohmann::ordered_json;

struct ValidationError {
    std::string field;
    std::string message;
};

/// Fully validated scenario: everything the runners need, plus the normalized
/// document (`echo`) that reproduces the run.
struct Scenario {
    Json echo;
    LieGroup group;
    FlowMode mode;
    SymplecticStructure structure;
    InertiaTensor inertia;
    Potential potential;
    PhasePoint initial;
    IntegratorOptions integrator;
    std::string trajectory_path;
    std::string report_path;
    std::optional<Vec> tau_vector;   // as given (before any tau-form expansion)
    std::optional<Vec> xi_vector;

    FlowProblem flow() const { return FlowProblem(group, mode, structure, inertia, potential); }
};

struct LoadResult {
    std::optional<Scenario> scenario;
    std::vector<ValidationError> errors;

    bool ok() const { return errors.empty() && scenario.has_value(); }
};

namespace scenario_detail {

inline bool get_double(const Json& j, const char* field, double& out,
                       std::vector<ValidationError>& errs) {
    if (!j.is_number()) {
        errs.push_back({field, "expected a number"});
        return false;
    }
    out = j.get<double>();
    return true;
}

inline bool get_vec(const Json& j, const char* field, int expected, Vec& out,
                    std::vector<ValidationError>& errs) {
    if (!j.is_array() || (expected >= 0 && static_cast<int>(j.size()) != expected)) {
        std::ostringstream os;
        os << "expected an array";
        if (expected >= 0) os << " of length " << expected;
        errs.push_back({field, os.str()});
        return false;
    }
    out.resize(j.size());
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) {
            errs.push_back({field, "expected numeric entries"});
            return false;
        }
        out(i) = j[i].get<double>();
    }
    return true;
}

inline bool get_mat(const Json& j, const char* field, int rows, int cols, Mat& out,
                    std::vector<ValidationError>& errs) {
    if (!j.is_array() || (rows >= 0 && static_cast<int>(j.size()) != rows)) {
        errs.push_back({field, "expected a nested array (row-major matrix)"});
        return false;
    }
    const int r = static_cast<int>(j.size());
    int c = -1;
    for (int i = 0; i < r; ++i) {
        if (!j[i].is_array()) {
            errs.push_back({field, "expected a nested array (row-major matrix)"});
            return false;
        }
        if (c < 0) c = static_cast<int>(j[i].size());
        if (static_cast<int>(j[i].size()) != c || (cols >= 0 && c != cols)) {
            errs.push_back({field, "ragged or wrongly sized matrix"});
            return false;
        }
    }
    out.resize(r, c);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < c; ++k) {
            if (!j[i][k].is_number()) {
                errs.push_back({field, "expected numeric entries"});
                return false;
            }
            out(i, k) = j[i][k].get<double>();
        }
    return true;
}

inline Json vec_to_json(const Vec& v) {
    Json a = Json::array();
    for (int i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline Json mat_to_json(const Mat& m) {
    Json a = Json::array();
    for (int i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (int j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        a.push_back(row);
    }
    return a;
}

} // namespace scenario_detail

/// Parses and validates a scenario document, reporting every violation rather
/// than stopping at the first.
inline LoadResult parse_scenario(const std::string& text) {
    using namespace scenario_detail;
    LoadResult res;
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        res.errors.push_back({"$", e.what()});   // message carries the byte position
        return res;
    }
    if (!doc.is_object()) {
        res.errors.push_back({"$", "scenario must be a JSON object"});
        return res;
    }
    auto& errs = res.errors;

    // ---- group ----
    std::optional<LieGroup> group;
    if (!doc.contains("group") || (doc["group"].is_string() && doc["group"] == "su2")) {
        group = LieGroup::su2();
    } else if (doc["group"].is_object()) {
        const Json& gj = doc["group"];
        if (!gj.contains("dim") || !gj["dim"].is_number_integer()) {
            errs.push_back({"group.dim", "expected an integer dimension"});
        } else {
            const int n = gj["dim"].get<int>();
            if (!gj.contains("structure_constants")) {
                errs.push_back({"group.structure_constants", "missing"});
            } else {
                const Json& fj = gj["structure_constants"];
                if (!fj.is_array() || static_cast<int>(fj.size()) != n) {
                    errs.push_back({"group.structure_constants",
                                    "expected an array of N row-major N x N slices"});
                } else {
                    std::vector<Mat> f;
                    bool ok = true;
                    for (int mu = 0; mu < n && ok; ++mu) {
                        Mat slice;
                        std::string fname = "group.structure_constants[" + std::to_string(mu) + "]";
                        ok = get_mat(fj[mu], fname.c_str(), n, n, slice, errs);
                        if (ok) f.push_back(std::move(slice));
                    }
                    if (ok) {
                        try {
                            group = LieGroup::generic(StructureConstants(n, std::move(f)));
                        } catch (const std::exception& e) {
                            errs.push_back({"group.structure_constants", e.what()});
                        }
                    }
                }
            }
        }
    } else {
        errs.push_back({"group", "expected \"su2\" or an object with dim and structure_constants"});
    }
    if (!group) return res;
    const int n = group->dim();

    // ---- mode ----
    FlowMode mode = FlowMode::EulerCanonical;
    if (doc.contains("mode")) {
        const std::string m = doc["mode"].is_string() ? doc["mode"].get<std::string>() : "";
        if (m == "euler-canonical") mode = FlowMode::EulerCanonical;
        else if (m == "euler-poisson") mode = FlowMode::EulerPoisson;
        else if (m == "cocycle") mode = FlowMode::Cocycle;
        else if (m == "darboux") mode = FlowMode::Darboux;
        else if (m == "full") mode = FlowMode::Full;
        else errs.push_back({"mode", "unknown mode \"" + m + "\""});
    }

    // ---- inertia ----
    std::optional<InertiaTensor> inertia;
    if (!doc.contains("inertia")) {
        errs.push_back({"inertia", "missing"});
    } else {
        const Json& ij = doc["inertia"];
        try {
            if (ij.is_array() && !ij.empty() && ij[0].is_number()) {
                Vec d;
                if (get_vec(ij, "inertia", n, d, errs)) inertia = InertiaTensor::diagonal(d);
            } else {
                Mat m;
                if (get_mat(ij, "inertia", n, n, m, errs)) inertia = InertiaTensor(m);
            }
        } catch (const std::exception& e) {
            errs.push_back({"inertia", e.what()});
        }
    }

    // ---- xi / theta ----
    std::optional<Vec> xi;
    std::optional<Mat> theta_explicit;
    if (doc.contains("xi") && doc.contains("theta")) {
        errs.push_back({"xi", "xi and theta are mutually exclusive"});
    } else if (doc.contains("xi")) {
        Vec v;
        if (get_vec(doc["xi"], "xi", n, v, errs)) xi = v;
    } else if (doc.contains("theta")) {
        Mat m;
        if (get_mat(doc["theta"], "theta", n, n, m, errs)) theta_explicit = m;
    }

    // ---- tau / upsilon ----
    std::optional<Vec> tau;
    std::optional<Mat> upsilon_explicit;
    if (doc.contains("tau") && doc.contains("upsilon")) {
        errs.push_back({"tau", "tau and upsilon are mutually exclusive"});
    } else if (doc.contains("tau")) {
        Vec v;
        if (get_vec(doc["tau"], "tau", 3, v, errs)) {
            if (n != 3)
                errs.push_back({"tau", "the tau form requires a three-dimensional algebra"});
            else
                tau = v;
        }
    } else if (doc.contains("upsilon")) {
        Mat m;
        if (get_mat(doc["upsilon"], "upsilon", n, n, m, errs)) upsilon_explicit = m;
    }

    // ---- potential ----
    Potential potential = Potential::none();
    if (doc.contains("potential") && !doc["potential"].is_null()) {
        const Json& pj = doc["potential"];
        const std::string kind =
            pj.is_object() && pj.contains("kind") && pj["kind"].is_string()
                ? pj["kind"].get<std::string>()
                : (pj.is_string() ? pj.get<std::string>() : "");
        if (kind == "none") {
            // keep default
        } else if (kind == "heavy-top") {
            Vec gamma, com;
            bool ok = pj.contains("gamma") && get_vec(pj["gamma"], "potential.gamma", n, gamma, errs);
            ok = (pj.contains("center_of_mass") &&
                  get_vec(pj["center_of_mass"], "potential.center_of_mass", n, com, errs)) && ok;
            if (!pj.contains("gamma")) errs.push_back({"potential.gamma", "missing"});
            if (!pj.contains("center_of_mass")) errs.push_back({"potential.center_of_mass", "missing"});
            if (ok) potential = Potential::heavy_top(std::move(gamma), std::move(com));
        } else {
            errs.push_back({"potential.kind", "expected \"none\" or \"heavy-top\""});
        }
    }

    // ---- mode/field consistency ----
    const bool xi_zero = !xi || xi->norm() == 0.0;
    const bool theta_zero = !theta_explicit || theta_explicit->norm() == 0.0;
    const bool tau_zero = !tau || tau->norm() == 0.0;
    const bool upsilon_zero = !upsilon_explicit || upsilon_explicit->norm() == 0.0;
    switch (mode) {
        case FlowMode::EulerCanonical:
        case FlowMode::EulerPoisson:
            if (!xi_zero || !theta_zero)
                errs.push_back({"mode", "canonical modes require xi/theta to vanish"});
            if (!tau_zero || !upsilon_zero)
                errs.push_back({"mode", "canonical modes require tau/upsilon to vanish"});
            if (mode == FlowMode::EulerPoisson && potential.kind != Potential::Kind::HeavyTop)
                errs.push_back({"mode", "euler-poisson mode requires the heavy-top potential"});
            break;
        case FlowMode::Cocycle:
        case FlowMode::Darboux:
            if (!tau_zero || !upsilon_zero)
                errs.push_back({"mode", "cocycle/darboux modes require tau/upsilon to vanish"});
            if (mode == FlowMode::Darboux && theta_explicit)
                errs.push_back({"mode", "darboux mode requires xi (coboundary form), not an explicit theta"});
            if (mode == FlowMode::Darboux && !group->algebra().semisimple())
                errs.push_back({"mode", "darboux mode requires a semisimple algebra"});
            break;
        case FlowMode::Full:
            break;
    }

    // ---- symplectic structure ----
    std::optional<SymplecticStructure> structure;
    if (errs.empty() || (inertia && group)) {
        try {
            TwoCocycle theta = TwoCocycle::zero(n);
            if (xi && xi->norm() != 0.0) {
                theta = TwoCocycle::from_xi(group->algebra(), DualVector(*xi));
            } else if (theta_explicit && theta_explicit->norm() != 0.0) {
                theta = TwoCocycle(group->algebra(), *theta_explicit);
            }
            MomentumBivector ups = MomentumBivector::zero(n);
            if (tau && tau->norm() != 0.0)
                ups = MomentumBivector::from_tau(group->algebra(), *tau);
            else if (upsilon_explicit && upsilon_explicit->norm() != 0.0)
                ups = MomentumBivector(*upsilon_explicit);

            switch (mode) {
                case FlowMode::EulerCanonical:
                case FlowMode::EulerPoisson:
                    structure = SymplecticStructure::canonical(n);
                    break;
                case FlowMode::Cocycle:
                case FlowMode::Darboux:
                    structure = SymplecticStructure::cocycle(std::move(theta));
                    break;
                case FlowMode::Full:
                    structure = SymplecticStructure::full(std::move(theta), std::move(ups));
                    break;
            }
        } catch (const std::exception& e) {
            errs.push_back({"theta", e.what()});
        }
    }

    // ---- initial state ----
    std::optional<GroupElement> g0;
    Vec pi0 = Vec::Zero(n);
    {
        const bool su2 = group->realization() == Realization::Su2Quaternion;
        Json init = doc.contains("initial") ? doc["initial"] : Json::object();
        if (!init.is_object()) {
            errs.push_back({"initial", "expected an object"});
            init = Json::object();
        }
        if (su2) {
            Vec q(4);
            q << 1, 0, 0, 0;
            if (init.contains("quaternion")) {
                Vec tmp;
                if (get_vec(init["quaternion"], "initial.quaternion", 4, tmp, errs)) q = tmp;
            }
            const double nq = q.norm();
            if (!(nq > 0.0) || std::abs(nq - 1.0) > 1e-6) {
                errs.push_back({"initial.quaternion", "quaternion must be unit to 1e-6"});
            } else {
                q /= nq;
                g0 = GroupElement(Realization::Su2Quaternion, q);
            }
        } else {
            Vec u = Vec::Zero(n);
            if (init.contains("coords")) {
                Vec tmp;
                if (get_vec(init["coords"], "initial.coords", n, tmp, errs)) u = tmp;
            }
            g0 = GroupElement(Realization::GenericChart, u);
        }
        if (init.contains("pi")) {
            Vec tmp;
            if (get_vec(init["pi"], "initial.pi", n, tmp, errs)) pi0 = tmp;
        }
    }

    // ---- integrator ----
    IntegratorOptions integ;
    {
        const Json ij = doc.contains("integrator") ? doc["integrator"] : Json::object();
        if (!ij.is_object()) {
            errs.push_back({"integrator", "expected an object"});
        } else {
            if (ij.contains("dt")) get_double(ij["dt"], "integrator.dt", integ.dt, errs);
            if (ij.contains("t_end")) get_double(ij["t_end"], "integrator.t_end", integ.t_end, errs);
            if (ij.contains("stride")) {
                if (ij["stride"].is_number_integer())
                    integ.stride = ij["stride"].get<int>();
                else
                    errs.push_back({"integrator.stride", "expected an integer"});
            }
            if (!(integ.dt > 0.0)) errs.push_back({"integrator.dt", "dt must be positive"});
            if (!(integ.t_end >= 0.0)) errs.push_back({"integrator.t_end", "t_end must be nonnegative"});
            if (integ.stride < 1) errs.push_back({"integrator.stride", "stride must be >= 1"});
        }
    }

    // ---- outputs ----
    std::string traj_path = "trajectory.csv";
    std::string report_path = "report.json";
    if (doc.contains("outputs")) {
        const Json& oj = doc["outputs"];
        if (!oj.is_object()) {
            errs.push_back({"outputs", "expected an object"});
        } else {
            if (oj.contains("trajectory")) {
                if (oj["trajectory"].is_string() && !oj["trajectory"].get<std::string>().empty())
                    traj_path = oj["trajectory"].get<std::string>();
                else
                    errs.push_back({"outputs.trajectory", "expected a nonempty string"});
            }
            if (oj.contains("report")) {
                if (oj["report"].is_string() && !oj["report"].get<std::string>().empty())
                    report_path = oj["report"].get<std::string>();
                else
                    errs.push_back({"outputs.report", "expected a nonempty string"});
            }
        }
    }

    if (!errs.empty() || !group || !inertia || !structure || !g0) return res;

    // normalized echo document
    Json echo;
    if (group->realization() == Realization::Su2Quaternion) {
        echo["group"] = "su2";
    } else {
        Json gj;
        gj["dim"] = n;
        Json slices = Json::array();
        for (int mu = 0; mu < n; ++mu) slices.push_back(mat_to_json(group->algebra().f_slice(mu)));
        gj["structure_constants"] = slices;
        echo["group"] = gj;
    }
    echo["mode"] = to_string(mode);
    echo["inertia"] = mat_to_json(inertia->matrix());
    if (xi) echo["xi"] = vec_to_json(*xi);
    if (theta_explicit) echo["theta"] = mat_to_json(*theta_explicit);
    if (tau) echo["tau"] = vec_to_json(*tau);
    if (upsilon_explicit) echo["upsilon"] = mat_to_json(*upsilon_explicit);
    if (potential.kind == Potential::Kind::HeavyTop) {
        Json pj;
        pj["kind"] = "heavy-top";
        pj["gamma"] = vec_to_json(potential.gamma);
        pj["center_of_mass"] = vec_to_json(potential.com);
        echo["potential"] = pj;
    } else {
        echo["potential"] = Json{{"kind", "none"}};
    }
    Json init;
    if (group->realization() == Realization::Su2Quaternion)
        init["quaternion"] = vec_to_json(g0->payload());
    else
        init["coords"] = vec_to_json(g0->payload());
    init["pi"] = vec_to_json(pi0);
    echo["initial"] = init;
    echo["integrator"] =
        Json{{"dt", integ.dt}, {"t_end", integ.t_end}, {"stride", integ.stride}};
    echo["outputs"] = Json{{"trajectory", traj_path}, {"report", report_path}};

    res.scenario.emplace(Scenario{std::move(echo), std::move(*group), mode, std::move(*structure),
                                  std::move(*inertia), std::move(potential),
                                  PhasePoint{std::move(*g0), std::move(pi0)}, integ, traj_path,
                                  report_path, tau, xi});
    return res;
}

inline LoadResult load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        LoadResult res;
        res.errors.push_back({"$", "cannot open scenario file: " + path.string()});
        return res;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str());
}

} // namespace liesym
