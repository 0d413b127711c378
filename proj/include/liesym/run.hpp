#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "liesym/observables.hpp"
#include "liesym/scenario.hpp"

namespace liesym {

// process exit codes
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDegeneracy = 3;
inline constexpr int kExitBlowUp = 4;

struct RunOptions {
    std::filesystem::path out_dir = ".";
    bool overwrite = false;
};

struct RunOutcome {
    int exit_code = kExitOk;
    Json report;
    std::vector<std::string> messages;
    std::filesystem::path report_file;
    std::filesystem::path trajectory_file;
};

namespace run_detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::filesystem::path resolve_output(const RunOptions& opts, const std::string& name,
                                            bool* collision) {
    const std::filesystem::path p = opts.out_dir / name;
    *collision = !opts.overwrite && std::filesystem::exists(p);
    return p;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

inline std::string trajectory_csv(const LieGroup& group, FlowMode mode, const Trajectory& traj) {
    const int n = group.dim();
    const bool su2 = group.realization() == Realization::Su2Quaternion;
    std::string s;
    s += "t";
    if (su2) {
        s += ",qw,qx,qy,qz";
    } else {
        for (int i = 1; i <= n; ++i) s += ",u_" + std::to_string(i);
    }
    for (int i = 1; i <= n; ++i) s += ",pi_" + std::to_string(i);
    if (mode == FlowMode::EulerPoisson)
        for (int i = 1; i <= n; ++i) s += ",gamma_" + std::to_string(i);
    if (mode == FlowMode::Darboux)
        for (int i = 1; i <= n; ++i) s += ",pi_prime_" + std::to_string(i);
    if (mode == FlowMode::Full) s += ",delta";
    s += "\n";
    for (size_t k = 0; k < traj.t.size(); ++k) {
        s += fmt17(traj.t[k]);
        const Vec& payload = traj.states[k].g.payload();
        for (int i = 0; i < payload.size(); ++i) s += "," + fmt17(payload(i));
        for (int i = 0; i < n; ++i) s += "," + fmt17(traj.states[k].pi(i));
        if (mode == FlowMode::EulerPoisson)
            for (int i = 0; i < n; ++i) s += "," + fmt17(traj.gamma[k](i));
        if (mode == FlowMode::Darboux)
            for (int i = 0; i < n; ++i) s += "," + fmt17(traj.pi_prime[k](i));
        if (mode == FlowMode::Full) s += "," + fmt17(traj.delta[k]);
        s += "\n";
    }
    return s;
}

inline Json vec_json(const Vec& v) { return scenario_detail::vec_to_json(v); }
inline Json mat_json(const Mat& m) { return scenario_detail::mat_to_json(m); }

} // namespace run_detail

/// simulate: integrate the scenario flow, write the CSV trajectory and the
/// monitor report.  Exit code 3 on a degeneracy halt, 4 on blow-up.
inline RunOutcome run_simulate(const Scenario& sc, const RunOptions& opts) {
    using namespace run_detail;
    RunOutcome out;
    bool col_a = false, col_b = false;
    const auto traj_path = resolve_output(opts, sc.trajectory_path, &col_a);
    const auto report_path = resolve_output(opts, sc.report_path, &col_b);
    if (col_a || col_b) {
        out.exit_code = kExitValidation;
        out.messages.push_back("output exists; pass --overwrite to replace it");
        return out;
    }

    const FlowProblem fp = sc.flow();
    if (sc.mode == FlowMode::Full) {
        const SymplecticFactors f =
            symplectic_factors(sc.group.algebra(), sc.initial.pi, sc.structure);
        if (std::abs(f.delta) <= degeneracy_tolerance(sc.structure, sc.initial.pi)) {
            out.exit_code = kExitValidation;
            out.messages.push_back("initial point is degenerate (|Delta| inside tolerance)");
            return out;
        }
    }

    const Trajectory traj = integrate(fp, sc.initial, sc.integrator);

    Json rep;
    rep["subcommand"] = "simulate";
    rep["scenario"] = sc.echo;
    rep["status"] = to_string(traj.halt);
    rep["samples"] = traj.t.size();
    Json drifts;
    for (const auto& [name, v] : traj.drift) drifts[name] = v;
    rep["monitor_drift"] = drifts;
    if (traj.event) {
        rep["degeneracy_event"] = Json{{"t_lo", traj.event->t_lo},
                                       {"t_hi", traj.event->t_hi},
                                       {"delta_lo", traj.event->delta_lo},
                                       {"delta_hi", traj.event->delta_hi},
                                       {"tolerance", traj.event->tol}};
    }
    switch (traj.halt) {
        case HaltReason::Completed: out.exit_code = kExitOk; break;
        case HaltReason::Degeneracy: out.exit_code = kExitDegeneracy; break;
        case HaltReason::BlowUp: out.exit_code = kExitBlowUp; break;
    }
    rep["exit_code"] = out.exit_code;

    write_text(traj_path, trajectory_csv(sc.group, sc.mode, traj));
    write_text(report_path, rep.dump(2) + "\n");
    out.report = std::move(rep);
    out.report_file = report_path;
    out.trajectory_file = traj_path;
    return out;
}

/// brackets: the fundamental bracket table at the initial point.
inline RunOutcome run_brackets(const Scenario& sc, const RunOptions& opts) {
    using namespace run_detail;
    RunOutcome out;
    bool collision = false;
    const auto report_path = resolve_output(opts, sc.report_path, &collision);
    if (collision) {
        out.exit_code = kExitValidation;
        out.messages.push_back("output exists; pass --overwrite to replace it");
        return out;
    }

    Json rep;
    rep["subcommand"] = "brackets";
    rep["scenario"] = sc.echo;
    try {
        const Mat table = fundamental_bracket_table(sc.group, sc.initial, sc.structure);
        const int n = sc.group.dim();
        Json labels = Json::array();
        for (int i = 1; i <= n; ++i) labels.push_back("g_" + std::to_string(i));
        for (int i = 1; i <= n; ++i) labels.push_back("pi_" + std::to_string(i));
        rep["labels"] = labels;
        rep["table"] = mat_json(table);
        out.exit_code = kExitOk;
    } catch (const DegeneratePointError& e) {
        rep["error"] = std::string("degenerate point: Delta = ") + std::to_string(e.delta);
        out.exit_code = kExitDegeneracy;
        out.messages.push_back(rep["error"].get<std::string>());
    }
    rep["exit_code"] = out.exit_code;
    write_text(report_path, rep.dump(2) + "\n");
    out.report = std::move(rep);
    out.report_file = report_path;
    return out;
}

/// check: invariant suite at the initial point (Jacobi sample, cocycle
/// residual, Delta against its tolerance, closedness probe).  Exit code 2 if
/// any check fails.
inline RunOutcome run_check(const Scenario& sc, const RunOptions& opts) {
    using namespace run_detail;
    RunOutcome out;
    bool collision = false;
    const auto report_path = resolve_output(opts, sc.report_path, &collision);
    if (collision) {
        out.exit_code = kExitValidation;
        out.messages.push_back("output exists; pass --overwrite to replace it");
        return out;
    }

    Json rep;
    rep["subcommand"] = "check";
    rep["scenario"] = sc.echo;
    bool all_ok = true;
    Json checks;

    // cocycle closure residual
    {
        const CocycleCheck c =
            two_cocycle_check(sc.group.algebra(), sc.structure.theta().matrix());
        checks["cocycle_residual"] = Json{{"value", c.residual}, {"passed", c.ok}};
        all_ok = all_ok && c.ok;
    }
    // degeneracy margin at the initial point
    {
        const SymplecticFactors f =
            symplectic_factors(sc.group.algebra(), sc.initial.pi, sc.structure);
        const double tol = degeneracy_tolerance(sc.structure, sc.initial.pi);
        const bool ok = std::abs(f.delta) > tol;
        checks["delta"] = Json{{"value", f.delta}, {"tolerance", tol}, {"nondegenerate", ok}};
        all_ok = all_ok && ok;
    }
    // Jacobi sample with three fixed observables
    try {
        const int n = sc.group.dim();
        Observable a, b, c;
        a.cpi = Vec::Zero(n); a.quad = Mat::Zero(n, n);
        b.cpi = Vec::Zero(n); b.quad = Mat::Zero(n, n);
        c.cpi = Vec::Zero(n); c.quad = Mat::Zero(n, n);
        a.cpi(0) = 1.0;
        b.cpi(n - 1) = 0.5;
        b.quad(0, 0) = 1.0;
        c.quad(0, n - 1) = c.quad(n - 1, 0) = 0.7;
        const int m = sc.group.payload_size();
        a.cg = Vec::Zero(m);
        b.cg = Vec::Zero(m);
        c.cg = Vec::Zero(m);
        a.cg(0) = 0.3;
        c.cg(m - 1) = -0.4;
        const double resid = jacobi_residual(sc.group, sc.structure, a, b, c, sc.initial);
        const bool ok = resid < 1e-8;
        checks["jacobi_sample"] = Json{{"value", resid}, {"passed", ok}};
        all_ok = all_ok && ok;
    } catch (const std::exception& e) {
        checks["jacobi_sample"] = Json{{"error", e.what()}, {"passed", false}};
        all_ok = false;
    }
    // closedness of the active two-form near the initial point
    if (sc.group.realization() == Realization::Su2Quaternion) {
        try {
            const double h = 1e-3;
            const FormField field = phase_space_form_field(sc.group, sc.structure, h);
            const int n = sc.group.dim();
            Vec x(2 * n);
            x.head(n) = sc.group.log(sc.initial.g).c;
            x.tail(n) = sc.initial.pi;
            const double resid = closedness_residual(field, x, h);
            const bool ok = resid < 1e-6;
            checks["closedness"] = Json{{"value", resid}, {"step", h}, {"passed", ok}};
            all_ok = all_ok && ok;
        } catch (const std::exception& e) {
            checks["closedness"] = Json{{"error", e.what()}, {"passed", false}};
            all_ok = false;
        }
    } else {
        checks["closedness"] = Json{{"skipped", "generic realization"}};
    }

    rep["checks"] = checks;
    rep["all_passed"] = all_ok;
    out.exit_code = all_ok ? kExitOk : kExitValidation;
    rep["exit_code"] = out.exit_code;
    write_text(report_path, rep.dump(2) + "\n");
    out.report = std::move(rep);
    out.report_file = report_path;
    return out;
}

/// gnh: constraint-tower analysis of the degenerate stratum.
inline RunOutcome run_gnh(const Scenario& sc, const RunOptions& opts) {
    using namespace run_detail;
    RunOutcome out;
    bool collision = false;
    const auto report_path = resolve_output(opts, sc.report_path, &collision);
    if (collision) {
        out.exit_code = kExitValidation;
        out.messages.push_back("output exists; pass --overwrite to replace it");
        return out;
    }
    if (sc.group.realization() != Realization::Su2Quaternion) {
        out.exit_code = kExitValidation;
        out.messages.push_back("the constraint analysis is implemented for su2 scenarios only");
        return out;
    }
    if (!sc.tau_vector || sc.tau_vector->norm() == 0.0) {
        out.exit_code = kExitValidation;
        out.messages.push_back("the constraint analysis requires a nonzero tau");
        return out;
    }

    const Vec xi = sc.xi_vector ? *sc.xi_vector : Vec(Vec::Zero(3));
    const GnhProblem problem(*sc.tau_vector, xi, sc.inertia, sc.potential);
    const GroupElement g0 = problem.align(sc.initial.g);
    const GnhReport r = run_analysis(problem, g0, sc.initial.pi(0), sc.initial.pi(1));

    Json rep;
    rep["subcommand"] = "gnh";
    rep["scenario"] = sc.echo;
    rep["tau"] = r.tau;
    rep["xi"] = vec_json(r.xi);
    rep["frame_rotation"] = mat_json(r.rotation);
    Json levels = Json::array();
    levels.push_back(Json{{"level", 1},
                          {"constraint", "C1 = 1 - pi'.tau"},
                          {"pi3_embedding", 1.0 / r.tau - r.xi(2)}});
    Json l2;
    l2["level"] = 2;
    l2["constraints"] = Json::array({"C21", "C22"});
    l2["samples"] = r.samples;
    l2["max_abs_sampled"] = r.c2_max_sampled;
    l2["identically_zero"] = (r.locus == LocusKind::AllOfPrimary);
    Json locus;
    locus["kind"] = to_string(r.locus);
    if (r.locus == LocusKind::MomentumPoint)
        locus["pi_prime_12"] = Json::array({r.locus_point(0), r.locus_point(1)});
    l2["locus"] = locus;
    levels.push_back(l2);
    if (r.tangency) {
        Json l3;
        l3["level"] = 3;
        l3["outcome"] = to_string(r.tangency->outcome);
        l3["rank"] = r.tangency->rank;
        l3["near_threshold"] = r.tangency->near_threshold;
        if (r.tangency->outcome == TangencyOutcome::Determined)
            l3["zeta"] = Json::array({r.tangency->zeta(0), r.tangency->zeta(1)});
        if (r.tangency->outcome == TangencyOutcome::Underdetermined)
            l3["gauge_dimension"] = r.tangency->gauge_dimension;
        if (r.tangency->outcome == TangencyOutcome::Tertiary) {
            Json tv = Json::array();
            for (double v : r.tangency->tertiary_values) tv.push_back(v);
            l3["tertiary_values"] = tv;
        }
        l3["system"] = mat_json(r.tangency->system);
        l3["offset"] = vec_json(r.tangency->offset);
        levels.push_back(l3);
    }
    rep["levels"] = levels;
    Json rp;
    rp["quaternion"] = vec_json(r.representative.g.payload());
    rp["pi"] = vec_json(r.representative.pi);
    rp["pi_prime"] = vec_json(problem.pi_prime(r.representative));
    rp["secondary"] = Json::array({r.representative_secondary.c21, r.representative_secondary.c22,
                                   r.representative_secondary.c23});
    rep["representative_point"] = rp;
    rep["proceed_notice"] = r.proceed_notice;
    rep["note"] = r.note;
    out.exit_code = kExitOk;
    rep["exit_code"] = out.exit_code;
    write_text(report_path, rep.dump(2) + "\n");
    out.report = std::move(rep);
    out.report_file = report_path;
    return out;
}

inline RunOutcome run_subcommand(const std::string& sub, const Scenario& sc,
                                 const RunOptions& opts) {
    if (sub == "simulate") return run_simulate(sc, opts);
    if (sub == "brackets") return run_brackets(sc, opts);
    if (sub == "check") return run_check(sc, opts);
    if (sub == "gnh") return run_gnh(sc, opts);
    RunOutcome out;
    out.exit_code = kExitUsage;
    out.messages.push_back("unknown subcommand: " + sub);
    return out;
}

} // namespace liesym
