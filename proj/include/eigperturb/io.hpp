#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "generate.hpp"

namespace eigperturb::io {

using nlohmann::json;

inline constexpr const char* kProblemSchema = "eigperturb.problem/1";
inline constexpr const char* kConfigSchema = "eigperturb.config/1";
inline constexpr const char* kReportSchema = "eigperturb.report/1";

// complex numbers are [re, im]; a bare number is read as real
inline json to_json(Complex z) { return json::array({z.real(), z.imag()}); }

inline Complex complex_from(const json& j) {
    if (j.is_number()) return {j.get<double>(), 0.0};
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number())
        return {j[0].get<double>(), j[1].get<double>()};
    throw SpecError("expected a complex number [re, im], got " + j.dump());
}

// matrices are row lists of complex entries
inline json to_json(const CMatrix& a) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        json r = json::array();
        for (Eigen::Index k = 0; k < a.cols(); ++k) r.push_back(to_json(a(i, k)));
        rows.push_back(std::move(r));
    }
    return rows;
}

inline CMatrix matrix_from(const json& j, const char* what) {
    if (!j.is_array()) throw SpecError(std::string(what) + ": matrix must be a list of rows");
    const auto r = Eigen::Index(j.size());
    const auto c = r ? Eigen::Index(j[0].size()) : 0;
    CMatrix a(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
        if (!j[i].is_array() || Eigen::Index(j[i].size()) != c) throw SpecError(std::string(what) + ": ragged matrix");
        for (Eigen::Index k = 0; k < c; ++k) a(i, k) = complex_from(j[i][k]);
    }
    return a;
}

inline json to_json(const std::vector<Complex>& v) {
    json out = json::array();
    for (auto z : v) out.push_back(to_json(z));
    return out;
}

// NaN and infinities are not JSON; they become null
inline json num(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

inline json spec_to_json(const JordanSpec& s) {
    return {{"m", s.m}, {"s", s.s}, {"signs", s.signs}, {"eigenvalue", to_json(s.eigenvalue)},
            {"case", to_string(s.eigen_case)}};
}

inline JordanSpec spec_from(const json& j) {
    try {
        JordanSpec s;
        s.m = j.at("m").get<int>();
        s.s = j.at("s").get<std::vector<int>>();
        if (j.contains("signs")) s.signs = j.at("signs").get<std::vector<int>>();
        s.eigenvalue = complex_from(j.at("eigenvalue"));
        s.eigen_case = eigen_case_from_string(j.at("case").get<std::string>());
        s.validate();
        return s;
    } catch (const json::exception& e) {
        throw SpecError(std::string("spec: ") + e.what());
    }
}

inline std::vector<ComplementEntry> complement_from(const json& j) {
    std::vector<ComplementEntry> out;
    if (!j.is_array()) throw SpecError("complement must be a list");
    for (const auto& e : j) {
        if (e.is_object()) out.push_back({complex_from(e.at("value")), e.value("sign", 0)});
        else out.push_back({complex_from(e), 0});
    }
    return out;
}

inline json problem_to_json(const StructuredProblem& pr, PerturbationMode mode = PerturbationMode::random) {
    json comp = json::array();
    for (const auto& c : pr.complement) comp.push_back({{"value", to_json(c.value)}, {"sign", c.sign}});
    json j = {{"schema", kProblemSchema},
              {"kind", pr.kind == ProblemKind::hamiltonian ? "hamiltonian" : "delta_hermitian"},
              {"spec", spec_to_json(pr.spec)},
              {"seed", pr.seed},
              {"similarity_magnitude", pr.similarity_magnitude},
              {"perturbation_mode", to_string(mode)},
              {"complement", comp},
              {"complement_spectrum", to_json(pr.complement_spectrum)},
              {"A", to_json(pr.A)},
              {"form", to_json(pr.form)},
              {"chains", to_json(pr.chains)}};
    if (pr.perturbation.size()) j["perturbation"] = to_json(pr.perturbation);
    return j;
}

inline GenerateRequest request_from(const json& j) {
    GenerateRequest r;
    r.spec = spec_from(j.at("spec"));
    if (j.contains("complement")) r.complement = complement_from(j["complement"]);
    r.seed = j.value("seed", std::uint64_t{0});
    r.similarity_magnitude = j.value("similarity_magnitude", r.similarity_magnitude);
    if (!(r.similarity_magnitude >= 0.0 && r.similarity_magnitude <= 2.0))
        throw SpecError("similarity_magnitude must lie in [0, 2]");
    if (j.contains("perturbation_mode")) r.perturbation = perturbation_mode_from_string(j["perturbation_mode"]);
    r.require_generic = j.value("require_generic", r.require_generic);
    r.generic_condition_max = j.value("generic_condition_max", r.generic_condition_max);
    return r;
}

// An explicit problem carries A; otherwise it is regenerated from spec and seed.
inline StructuredProblem problem_from(const json& j, std::optional<std::uint64_t> seed_override = {},
                                      const Tolerances& tol = {}) {
    if (j.contains("schema") && j["schema"] != kProblemSchema)
        throw SpecError("unsupported problem schema " + j["schema"].dump());
    try {
        if (!j.contains("A")) {
            auto req = request_from(j);
            if (seed_override) req.seed = *seed_override;
            return generate_problem(req);
        }
        StructuredProblem pr;
        pr.spec = spec_from(j.at("spec"));
        pr.kind = kind_of(pr.spec.eigen_case);
        if (j.contains("kind")) {
            const auto k = j["kind"].get<std::string>();
            if (k != "hamiltonian" && k != "delta_hermitian") throw SpecError("unknown problem kind '" + k + "'");
            if ((k == "hamiltonian") != (pr.kind == ProblemKind::hamiltonian))
                throw StructureError("problem kind does not match spec case");
        }
        pr.A = matrix_from(j["A"], "A");
        if (j.contains("form")) pr.form = matrix_from(j["form"], "form");
        else if (pr.kind == ProblemKind::hamiltonian && pr.A.rows() % 2 == 0) pr.form = symplectic_J(pr.A.rows() / 2);
        else throw StructureError("Δ-Hermitian problem without a form");
        if (j.contains("perturbation")) pr.perturbation = matrix_from(j["perturbation"], "perturbation");
        if (!j.contains("chains")) throw StructureError("problem has no chains");
        pr.chains = matrix_from(j["chains"], "chains");
        if (j.contains("complement")) pr.complement = complement_from(j["complement"]);
        if (j.contains("complement_spectrum"))
            for (const auto& z : j["complement_spectrum"]) pr.complement_spectrum.push_back(complex_from(z));
        pr.seed = j.value("seed", std::uint64_t{0});
        pr.similarity_magnitude = j.value("similarity_magnitude", 0.0);
        validate_problem(pr, tol);
        return pr;
    } catch (const json::exception& e) {
        throw SpecError(std::string("problem: ") + e.what());
    }
}

inline json read_json_file(const std::filesystem::path& p) {
    std::ifstream in(p);
    if (!in) throw SpecError("cannot open " + p.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw SpecError(p.string() + ": " + e.what());
    }
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error("cannot write " + p.string());
    out << text;
}

// ---------------------------------------------------------------- config

enum class Command { generate, predict, verify, sweep, special_case };

inline Command command_from_string(const std::string& s) {
    if (s == "generate") return Command::generate;
    if (s == "predict") return Command::predict;
    if (s == "verify") return Command::verify;
    if (s == "sweep") return Command::sweep;
    if (s == "special-case") return Command::special_case;
    throw SpecError("unknown command '" + s + "'");
}

struct RunConfig {
    Command command = Command::sweep;
    json problem;  // inline problem object, resolved from a path if given as a string
    std::vector<int> rhos;  // empty: all active orders
    double t_start = 1e-2, t_stop = 1e-9;
    int t_points = 8;
    std::string out_csv, out_json;
    std::optional<std::uint64_t> seed;
    SweepOptions sweep;
    Tolerances tol;

    std::vector<double> t_grid() const { return geometric_grid(t_start, t_stop, t_points); }
};

inline void apply_tolerances(const json& j, RunConfig& c) {
    static const char* known[] = {"symmetry_tol",    "defective_condition", "residual_floor_factor",
                                  "angle_floor",     "angle_noise_factor",  "dominance_ratio",
                                  "axis_tol",        "order_tol",           "residual_margin",
                                  "angle_tol",       "gram_min",            "structure",
                                  "chain"};
    for (const auto& [k, v] : j.items()) {
        if (std::find_if(std::begin(known), std::end(known), [&](const char* s) { return k == s; }) == std::end(known))
            throw SpecError("unknown tolerance '" + k + "'");
        if (!v.is_number() || !(v.get<double>() >= 0)) throw SpecError("tolerance '" + k + "' must be a nonnegative number");
    }
    auto& s = c.sweep;
    s.symmetry_tol = j.value("symmetry_tol", s.symmetry_tol);
    s.defective_condition = j.value("defective_condition", s.defective_condition);
    s.residual_floor_factor = j.value("residual_floor_factor", s.residual_floor_factor);
    s.angle_floor = j.value("angle_floor", s.angle_floor);
    s.angle_noise_factor = j.value("angle_noise_factor", s.angle_noise_factor);
    s.dominance_ratio = j.value("dominance_ratio", s.dominance_ratio);
    s.axis_tol = j.value("axis_tol", s.axis_tol);
    s.order_tol = j.value("order_tol", s.order_tol);
    s.residual_margin = j.value("residual_margin", s.residual_margin);
    s.angle_tol = j.value("angle_tol", s.angle_tol);
    s.gram_min = j.value("gram_min", s.gram_min);
    c.tol.structure = j.value("structure", c.tol.structure);
    c.tol.chain = j.value("chain", c.tol.chain);
}

inline RunConfig config_from(const json& j, const std::filesystem::path& base_dir = {}) {
    if (!j.is_object()) throw SpecError("config must be a JSON object");
    if (j.value("schema", std::string()) != kConfigSchema)
        throw SpecError(std::string("config schema must be \"") + kConfigSchema + "\"");
    RunConfig c;
    try {
        c.command = command_from_string(j.at("command").get<std::string>());
        if (!j.contains("problem")) throw SpecError("config has no problem");
        if (j["problem"].is_string()) {
            std::filesystem::path p = j["problem"].get<std::string>();
            if (p.is_relative()) p = base_dir / p;
            c.problem = read_json_file(p);
        } else {
            c.problem = j["problem"];
        }
        if (!c.problem.is_object()) throw SpecError("problem must be an object or a path");
        if (j.contains("rho")) {
            const auto& r = j["rho"];
            if (r.is_string()) {
                if (r != "all") throw SpecError("rho must be an integer or \"all\"");
            } else if (r.is_number_integer()) {
                c.rhos = {r.get<int>()};
            } else if (r.is_array()) {
                c.rhos = r.get<std::vector<int>>();
            } else {
                throw SpecError("rho must be an integer or \"all\"");
            }
        }
        if (j.contains("t_grid")) {
            const auto& g = j["t_grid"];
            c.t_start = g.value("start", c.t_start);
            c.t_stop = g.value("stop", c.t_stop);
            c.t_points = g.value("points", c.t_points);
        }
        if (!(c.t_start > c.t_stop) || !(c.t_stop > 0) || c.t_points < 4)
            throw SpecError("t_grid needs start > stop > 0 and at least 4 points");
        if (j.contains("output")) {
            c.out_csv = j["output"].value("csv", std::string());
            c.out_json = j["output"].value("json", std::string());
        }
        if (j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("tolerances")) apply_tolerances(j["tolerances"], c);
        c.sweep.parallel = j.value("parallel", false);
        if (j.contains("corrupt_s")) {
            const auto& k = j["corrupt_s"];
            Corruption x;
            x.rho = k.at("rho").get<int>();
            x.row = k.value("row", 0);
            x.col = k.value("col", 0);
            x.relative = k.value("relative", 0.1);
            c.sweep.corrupt = x;
        }
    } catch (const json::exception& e) {
        throw SpecError(std::string("config: ") + e.what());
    }
    return c;
}

// ---------------------------------------------------------------- reports

inline json analysis_to_json(const StructuredAnalysis& a, double w_limit) {
    json w = json::array();
    bool generic = true;
    for (size_t i = 0; i < a.base.W_condition.size(); ++i) {
        const double c = a.base.W_condition[i];
        const bool ok = c <= w_limit;
        generic = generic && (i == 0 || ok);
        w.push_back({{"k", a.rho() + int(i)}, {"condition", num(c)}, {"generic", ok}});
    }
    json roots = json::array();
    for (const auto& r : a.base.roots) roots.push_back({{"mu", to_json(r.mu)}, {"gamma_index", r.gamma_index}});
    json out = {{"rho", a.rho()},
                {"lambda0", to_json(a.lambda0)},
                {"phase", to_json(a.phase)},
                {"S", to_json(a.base.S)},
                {"gammas", to_json(a.base.gammas)},
                {"roots", roots},
                {"W", w},
                {"generic", generic},
                {"route_gap", num(a.route_gap)}};
    if (a.Sigma.size()) {
        auto cls = classify_real_persistence(a);
        json rc = json::array();
        for (const auto& c : cls.roots)
            rc.push_back({{"mu", to_json(c.mu)},
                          {"class", c.sufficient ? "sufficient" : (c.real_candidate ? "real-candidate" : "conjugate-pair")},
                          {"sign", c.sign}});
        out["classification"] = rc;
        if (a.eigen_case == EigenCase::ham_imaginary) {
            json ps = json::array();
            for (const auto& c : cls.roots)
                ps.push_back({{"mu", to_json(c.mu)},
                              {"status", to_string(!c.real_candidate ? Persistence::leaves_axis
                                                   : c.sufficient     ? Persistence::sufficient
                                                                      : Persistence::necessary_only)},
                              {"inertia", c.sign}});
            out["persistence"] = ps;
        }
    }
    return out;
}

inline json report_to_json(const SweepReport& r) {
    json pts = json::array();
    for (const auto& p : r.points) {
        json pairs = json::array();
        for (const auto& m : p.pairs) {
            json e = {{"rho", m.rho},         {"root", m.root_index},         {"mirror", m.mirror},
                      {"predicted", to_json(m.predicted)}, {"actual", to_json(m.actual)},
                      {"residual", num(m.residual)},       {"angle", num(m.angle)}};
            if (!m.root_class.empty()) {
                e["class"] = m.root_class;
                e["off_axis"] = num(m.off_axis);
                e["predicted_inertia"] = m.predicted_inertia;
                e["measured_inertia"] = m.measured_inertia;
            }
            pairs.push_back(e);
        }
        json orders = json::array();
        for (const auto& o : p.orders)
            orders.push_back({{"rho", o.rho},
                              {"order_value", num(o.order_value)},
                              {"residual", num(o.residual_value)},
                              {"gram_residual", num(o.gram_residual)},
                              {"root_angle", num(o.root_angle)},
                              {"angle_noise", num(o.angle_noise)},
                              {"principal_angle", num(o.subspace_angle)},
                              {"stable", o.stable}});
        pts.push_back({{"t", p.t},
                       {"pairs", pairs},
                       {"orders", orders},
                       {"max_gram_residual", num(p.max_gram_residual)},
                       {"symmetry_error", num(p.symmetry_error)},
                       {"cluster_condition", num(p.cluster_condition)},
                       {"stable", p.stable},
                       {"excluded", p.excluded}});
    }
    json fits = json::array();
    for (const auto& f : r.fits)
        fits.push_back({{"rho", f.rho},
                        {"t_star", f.t_star},
                        {"order_exponent", num(f.order_exponent)},
                        {"residual_exponent", num(f.residual_exponent)},
                        {"angle_exponent", num(f.angle_exponent)},
                        {"gram_exponent", num(f.gram_exponent)},
                        {"points", {{"order", f.order_points}, {"residual", f.residual_points},
                                    {"angle", f.angle_points}, {"gram", f.gram_points}}},
                        {"verdict", {{"order", f.order_ok}, {"residual", f.residual_ok}, {"angle", f.angle_ok},
                                     {"gram", f.gram_ok}, {"pass", f.pass}}}});
    json routes = json::array();
    for (const auto& rc : r.routes)
        routes.push_back({{"rho", rc.rho}, {"route_gap", num(rc.route_gap)}, {"max_w_condition", num(rc.max_w_condition)}});
    return {{"schema", kReportSchema},
            {"case", to_string(r.eigen_case)},
            {"lambda0", to_json(r.lambda0)},
            {"rhos", r.rhos},
            {"t_grid", r.t_grid},
            {"t_star", r.t_star},
            {"points", pts},
            {"fits", fits},
            {"routes", routes},
            {"max_symmetry_error", num(r.max_symmetry_error)},
            {"symmetry_ok", r.symmetry_ok},
            {"pass", r.pass}};
}

inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

// one row per (t, matched pair); gram_residual and max_angle are per order at that t
inline std::string report_to_csv(const SweepReport& r) {
    std::ostringstream os;
    os << "t,rho,pred_re,pred_im,act_re,act_im,residual,gram_residual,max_angle\n";
    for (const auto& p : r.points) {
        for (const auto& m : p.pairs) {
            const OrderPoint* op = nullptr;
            for (const auto& o : p.orders)
                if (o.rho == m.rho) op = &o;
            if (std::find(r.rhos.begin(), r.rhos.end(), m.rho) == r.rhos.end()) continue;
            os << fmt17(p.t) << ',' << m.rho << ',' << fmt17(m.predicted.real()) << ',' << fmt17(m.predicted.imag())
               << ',' << fmt17(m.actual.real()) << ',' << fmt17(m.actual.imag()) << ',' << fmt17(m.residual) << ','
               << fmt17(op ? op->gram_residual : 0.0) << ',' << fmt17(op ? op->root_angle : 0.0) << '\n';
        }
    }
    return os.str();
}

}  // namespace eigperturb::io
