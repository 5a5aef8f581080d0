#pragma once

#include <iostream>

#include <CLI11.hpp>

#include "io.hpp"

namespace eigperturb::cli {

using io::json;

// exit codes
inline constexpr int kOk = 0;
inline constexpr int kThresholdsFailed = 1;
inline constexpr int kInvalidConfig = 2;
inline constexpr int kStructureViolation = 3;
inline constexpr int kNonGeneric = 4;
inline constexpr int kClusterMismatch = 5;
inline constexpr int kNumericalFailure = 6;

struct Invocation {
    std::string command;
    std::string config;
    std::string out_json, out_csv;
    std::optional<std::uint64_t> seed;
};

struct Context {
    io::RunConfig cfg;
    StructuredProblem problem;
    PerturbationMode mode = PerturbationMode::random;
    std::vector<int> rhos;
    std::ostream& out;
};

namespace detail {

inline void emit_json(const Context& c, const json& j) {
    if (c.cfg.out_json.empty()) c.out << j.dump(2) << '\n';
    else io::write_text(c.cfg.out_json, j.dump(2) + "\n");
}

inline void emit_csv(const Context& c, const SweepReport& r) {
    if (!c.cfg.out_csv.empty()) io::write_text(c.cfg.out_csv, io::report_to_csv(r));
}

inline std::string fixed(double x, int prec = 3) {
    if (!std::isfinite(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f", prec, x);
    return buf;
}

inline std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2e", x);
    return buf;
}

inline void print_fits(std::ostream& os, const SweepReport& r) {
    os << "case " << to_string(r.eigen_case) << "  max symmetry error " << sci(r.max_symmetry_error)
       << (r.symmetry_ok ? "" : "  (FAIL)") << '\n';
    os << "rho  t*        order   resid   angle   gram    verdict\n";
    for (const auto& f : r.fits) {
        char line[160];
        std::snprintf(line, sizeof line, "%-4d %-9s %-7s %-7s %-7s %-7s %s\n", f.rho, sci(f.t_star).c_str(),
                      fixed(f.order_exponent).c_str(), fixed(f.residual_exponent).c_str(),
                      fixed(f.angle_exponent).c_str(), fixed(f.gram_exponent).c_str(), f.pass ? "pass" : "FAIL");
        os << line;
    }
}

inline int cmd_generate(Context& c) {
    emit_json(c, io::problem_to_json(c.problem, c.mode));
    return kOk;
}

inline int cmd_predict(Context& c) {
    json orders = json::array();
    for (int rho : c.rhos) {
        auto a = analyze_order(c.problem, rho);
        orders.push_back(io::analysis_to_json(*a, kWConditionMax));
        c.out << "rho " << rho << ": " << a->base.gammas.size() << " gamma, " << a->base.roots.size() << " roots\n";
    }
    emit_json(c, {{"schema", "eigperturb.prediction/1"},
                  {"case", to_string(c.problem.spec.eigen_case)},
                  {"lambda0", io::to_json(c.problem.spec.eigenvalue)},
                  {"orders", orders}});
    return kOk;
}

inline int cmd_sweep(Context& c) {
    const auto rep = run_sweep(c.problem, c.rhos, c.cfg.t_grid(), c.cfg.sweep);
    if (!c.cfg.out_json.empty()) io::write_text(c.cfg.out_json, io::report_to_json(rep).dump(2) + "\n");
    emit_csv(c, rep);
    print_fits(c.out, rep);
    return rep.pass ? kOk : kThresholdsFailed;
}

// structure, genericity, route agreement, symmetry and cluster counts over the grid
inline int cmd_verify(Context& c) {
    constexpr double kRouteTol = 1e-10;
    bool ok = true;
    json orders = json::array();
    for (int rho : c.rhos) {
        auto a = analyze_order(c.problem, rho);
        const bool route_ok = a->route_gap <= kRouteTol;
        ok = ok && route_ok;
        orders.push_back({{"rho", rho}, {"route_gap", io::num(a->route_gap)}, {"route_ok", route_ok}});
    }
    json pts = json::array();
    if (c.problem.perturbation.size()) {
        for (double t : c.cfg.t_grid()) {
            const auto e = eig(c.problem.A + t * c.problem.perturbation);
            std::vector<Complex> w(e.values.data(), e.values.data() + e.values.size()), mv;
            for (auto z : w) mv.push_back(mirror_of(c.problem.spec.eigen_case, z));
            const auto m = match_eigenvalues(w, mv);
            double err = 0.0;
            for (size_t i = 0; i < w.size(); ++i) err = std::max(err, std::abs(w[i] - mv[m[i]]));
            const double radius = eigperturb::detail::cluster_radius(c.problem);
            int found = 0;
            for (auto z : w) found += std::abs(z - c.problem.spec.eigenvalue) < radius;
            if (found != c.problem.spec.p())
                throw ClusterError("cluster count mismatch at t=" + io::fmt17(t), c.problem.spec.p(), found);
            const bool sym_ok = err <= c.cfg.sweep.symmetry_tol;
            ok = ok && sym_ok;
            pts.push_back({{"t", t}, {"symmetry_error", io::num(err)}, {"symmetry_ok", sym_ok}, {"cluster", found}});
        }
    }
    emit_json(c, {{"schema", "eigperturb.verification/1"},
                  {"structure_ok", true},
                  {"orders", orders},
                  {"points", pts},
                  {"pass", ok}});
    c.out << "verify: " << (ok ? "pass" : "FAIL") << '\n';
    return ok ? kOk : kThresholdsFailed;
}

// K = J^{-1}T semidefinite, even blocks at an imaginary eigenvalue.
// Here rho is the half size k of the 2k x 2k blocks.
inline int cmd_special_case(Context& c) {
    std::vector<int> halves = c.cfg.rhos;
    if (halves.empty())
        for (int r : active_orders(c.problem.spec))
            if (r % 2 == 0) halves.push_back(r / 2);
    if (halves.empty()) throw SpecError("special-case needs even Jordan blocks");
    bool ok = true;
    json sections = json::array();
    for (int half : halves) {
        const int rho = 2 * half;
        if (rho > c.problem.spec.m || c.problem.spec.count(rho) == 0)
            throw SpecError("no Jordan blocks of size " + std::to_string(rho));
        auto sd = semidefinite_case(c.problem, rho / 2);
        auto ax = axis_check(c.problem, rho, c.cfg.t_grid(), c.cfg.sweep);
        const bool pass = sd.all_imaginary && ax.on_axis && ax.inertia_ok && ax.split_ok;
        ok = ok && pass;
        sections.push_back({{"rho", half},
                            {"block_size", rho},
                            {"fractional_order", sd.fractional_order},
                            {"w_min_eigenvalues", sd.w_min_eigenvalues},
                            {"predicted_roots", io::to_json(sd.predicted_roots)},
                            {"all_predicted_imaginary", sd.all_imaginary},
                            {"max_off_axis_relative", io::num(ax.max_off_axis_relative)},
                            {"on_axis", ax.on_axis},
                            {"inertia_ok", ax.inertia_ok},
                            {"split_ok", ax.split_ok},
                            {"analysis", io::analysis_to_json(sd.analysis, kWConditionMax)},
                            {"sweep", io::report_to_json(ax.sweep)},
                            {"pass", pass}});
        emit_csv(c, ax.sweep);
        c.out << "rho " << half << " (blocks " << rho << "): max |Re lambda|/|H| " << sci(ax.max_off_axis_relative) << ", inertia "
              << (ax.inertia_ok && ax.split_ok ? "split ok" : "MISMATCH") << ", " << (pass ? "pass" : "FAIL") << '\n';
    }
    emit_json(c, {{"schema", "eigperturb.special-case/1"}, {"sections", sections}, {"pass", ok}});
    return ok ? kOk : kThresholdsFailed;
}

inline int dispatch(const Invocation& inv, std::ostream& out) {
    const std::filesystem::path cfg_path = inv.config;
    auto cfg = io::config_from(io::read_json_file(cfg_path), cfg_path.parent_path());
    if (io::command_from_string(inv.command) != cfg.command)
        throw SpecError(cfg_path.string() + ": config command does not match '" + inv.command + "'");
    if (!inv.out_json.empty()) cfg.out_json = inv.out_json;
    if (!inv.out_csv.empty()) cfg.out_csv = inv.out_csv;
    if (inv.seed) cfg.seed = inv.seed;
    Context c{cfg, {}, PerturbationMode::random, {}, out};
    if (cfg.problem.contains("perturbation_mode"))
        c.mode = perturbation_mode_from_string(cfg.problem["perturbation_mode"].get<std::string>());
    c.problem = io::problem_from(cfg.problem, cfg.seed, cfg.tol);
    c.rhos = cfg.rhos.empty() ? active_orders(c.problem.spec) : cfg.rhos;
    const auto active = active_orders(c.problem.spec);
    if (cfg.command != io::Command::special_case)
        for (int r : c.rhos)
            if (std::find(active.begin(), active.end(), r) == active.end())
                throw SpecError("rho " + std::to_string(r) + " has no Jordan blocks");
    switch (cfg.command) {
        case io::Command::generate: return cmd_generate(c);
        case io::Command::predict: return cmd_predict(c);
        case io::Command::verify: return cmd_verify(c);
        case io::Command::sweep: return cmd_sweep(c);
        case io::Command::special_case: return cmd_special_case(c);
    }
    return kInvalidConfig;
}

}  // namespace detail

inline int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const NonGenericError*>(&e)) return kNonGeneric;
    if (dynamic_cast<const ClusterError*>(&e)) return kClusterMismatch;
    if (dynamic_cast<const StructureError*>(&e)) return kStructureViolation;
    if (dynamic_cast<const SpecError*>(&e) || dynamic_cast<const DimensionError*>(&e)) return kInvalidConfig;
    return kNumericalFailure;
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"fractional-order eigenvalue perturbation of structured matrices"};
    app.require_subcommand(1);
    Invocation inv;
    std::uint64_t seed = 0;
    for (const char* name : {"generate", "predict", "verify", "sweep", "special-case"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", inv.config, "JSON run configuration")->required();
        sub->add_option("--out-json", inv.out_json, "JSON output path");
        sub->add_option("--out-csv", inv.out_csv, "CSV output path");
        sub->add_option("--seed", seed, "override the generation seed");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "eigperturb: " << e.what() << '\n';
        return kInvalidConfig;
    }
    const auto* sub = app.get_subcommands().front();
    inv.command = sub->get_name();
    if (sub->count("--seed")) inv.seed = seed;
    try {
        return detail::dispatch(inv, out);
    } catch (const NonGenericError& e) {
        err << "eigperturb: " << e.what() << " (k=" << e.k() << ")\n";
        return kNonGeneric;
    } catch (const ClusterError& e) {
        err << "eigperturb: " << e.what() << " (expected " << e.expected() << ", found " << e.found() << ")\n";
        return kClusterMismatch;
    } catch (const std::exception& e) {
        err << "eigperturb: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace eigperturb::cli
