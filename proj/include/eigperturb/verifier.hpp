#pragma once

#include <future>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "hamiltonian.hpp"

namespace eigperturb {

// min-cost perfect matching, O(n^3) potentials method; result[i] = column for row i
inline std::vector<int> hungarian(const Eigen::MatrixXd& cost) {
    const int n = int(cost.rows());
    if (cost.cols() != n) throw DimensionError("hungarian: cost matrix not square");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0), v(n + 1, 0), minv(n + 1);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    std::vector<bool> used(n + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), inf);
        std::fill(used.begin(), used.end(), false);
        do {
            used[j0] = true;
            int i0 = p[j0], j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    std::vector<int> out(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j]) out[p[j] - 1] = j - 1;
    return out;
}

inline std::vector<int> match_eigenvalues(const std::vector<Complex>& predicted, const std::vector<Complex>& actual) {
    if (predicted.size() != actual.size()) throw DimensionError("match_eigenvalues: length mismatch");
    const auto n = Eigen::Index(predicted.size());
    Eigen::MatrixXd cost(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) cost(i, j) = std::abs(predicted[i] - actual[j]);
    return hungarian(cost);
}

inline CMatrix invariant_subspace(const EigenDecomposition& e, const std::vector<int>& cluster) {
    CMatrix x(e.vectors.rows(), Eigen::Index(cluster.size()));
    for (Eigen::Index c = 0; c < x.cols(); ++c) x.col(c) = e.vectors.col(cluster[c]);
    return orthonormalize(x);
}

inline std::vector<double> principal_angles(const CMatrix& q1, const CMatrix& q2) {
    if (q1.rows() != q2.rows() || q1.cols() != q2.cols()) throw DimensionError("principal_angles: shape mismatch");
    auto s = svd_values(q1.adjoint() * q2);
    std::vector<double> out;
    for (double v : s) out.push_back(std::acos(std::clamp(v, 0.0, 1.0)));
    std::sort(out.begin(), out.end());
    return out;
}

inline double fit_order(const std::vector<double>& ts, const std::vector<double>& values) {
    if (ts.size() != values.size()) throw DimensionError("fit_order: length mismatch");
    if (ts.size() < 3) throw SpecError("fit_order: need at least 3 points");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = double(ts.size());
    for (size_t i = 0; i < ts.size(); ++i) {
        if (!(ts[i] > 0) || !(values[i] > 0)) throw SpecError("fit_order: nonpositive data");
        const double x = std::log(ts[i]), y = std::log(values[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double den = n * sxx - sx * sx;
    if (den <= 0) throw SpecError("fit_order: degenerate abscissae");
    return (n * sxy - sx * sy) / den;
}

inline double gram_residual(const CMatrix& u, const CMatrix& form, const CMatrix& expected, double scale_exp,
                            double t) {
    const CMatrix g = u.adjoint() * form * u;
    if (g.rows() != expected.rows() || g.cols() != expected.cols()) throw DimensionError("gram_residual: shape mismatch");
    return (g - std::pow(t, scale_exp) * expected).norm();
}

using AnalysisPtr = std::shared_ptr<StructuredAnalysis>;

inline AnalysisPtr analyze_order(const StructuredProblem& pr, int rho) {
    switch (pr.spec.eigen_case) {
        case EigenCase::delta_nonreal: return std::make_shared<StructuredAnalysis>(analyze_nonreal(pr, rho));
        case EigenCase::delta_real: return std::make_shared<StructuredAnalysis>(analyze_real(pr, rho));
        case EigenCase::ham_nonimaginary: return std::make_shared<HamiltonianAnalysis>(analyze_nonimaginary(pr, rho));
        case EigenCase::ham_imaginary: return std::make_shared<HamiltonianAnalysis>(analyze_imaginary(pr, rho));
    }
    return nullptr;
}

inline std::vector<int> active_orders(const JordanSpec& spec) {
    std::vector<int> out;
    for (int k = 1; k <= spec.m; ++k)
        if (spec.count(k) > 0) out.push_back(k);
    return out;
}

inline std::vector<double> geometric_grid(double start, double stop, int points) {
    if (!(start > stop) || !(stop > 0) || points < 4) throw SpecError("t grid needs start > stop > 0 and >= 4 points");
    std::vector<double> out;
    const double ls = std::log10(start), le = std::log10(stop);
    for (int i = 0; i < points; ++i) out.push_back(std::pow(10.0, ls + (le - ls) * i / (points - 1)));
    return out;
}

struct Corruption {
    int rho = 1;
    int row = 0, col = 0;
    double relative = 0.1;
};

struct SweepOptions {
    double symmetry_tol = 1e-10;
    double defective_condition = 1e8;
    double residual_floor_factor = 1e2;
    double angle_floor = 10.0 * std::sqrt(kEps);
    double angle_noise_factor = 10.0;  // angle must exceed this multiple of its rounding estimate
    double dominance_ratio = 0.25;     // residual / leading displacement below which a point is asymptotic
    double axis_tol = 1e-10;  // |Re λ| / ‖A‖ (imaginary) or |Im λ| / ‖A‖ (real) counted as on the axis
    double order_tol = 0.05;
    double residual_margin = 0.1;
    double angle_tol = 0.05;
    double gram_min = 0.95;
    bool parallel = false;
    std::optional<Corruption> corrupt;
};

struct MatchedPair {
    int rho = 1;
    int root_index = 0;
    bool mirror = false;
    Complex predicted, actual;
    double residual = 0.0;
    double angle = std::numeric_limits<double>::quiet_NaN();
    double off_axis = 0.0;  // sign cases: distance of the actual eigenvalue from the axis
    std::string root_class;  // sign cases: conjugate-pair / real-candidate / sufficient
    int predicted_inertia = 0;
    int measured_inertia = 0;
};

struct OrderPoint {
    int rho = 1;
    double order_value = 0.0;     // max |λ_actual - λ0|
    double residual_value = 0.0;  // max |λ_actual - λ_pred|
    double gram_residual = 0.0;
    double root_angle = 0.0;      // max per-root eigenvector angle
    double angle_noise = 0.0;     // first-order rounding estimate for those eigenvectors
    double subspace_angle = 0.0;  // max principal angle, whole cluster
    bool stable = false;          // this order's pairs are in the asymptotic regime
};

struct SweepPoint {
    double t = 0.0;
    std::vector<MatchedPair> pairs;
    std::vector<OrderPoint> orders;
    double max_gram_residual = 0.0;
    double symmetry_error = 0.0;
    double cluster_condition = 0.0;
    bool stable = false;
    bool excluded = false;
};

struct OrderFit {
    int rho = 1;
    double order_exponent = std::numeric_limits<double>::quiet_NaN();
    double residual_exponent = std::numeric_limits<double>::quiet_NaN();
    double angle_exponent = std::numeric_limits<double>::quiet_NaN();
    double gram_exponent = std::numeric_limits<double>::quiet_NaN();
    double t_star = 0.0;  // fit window: grid points with t <= t_star
    int order_points = 0, residual_points = 0, angle_points = 0, gram_points = 0;
    bool order_ok = false, residual_ok = false, angle_ok = false, gram_ok = false;
    bool pass = false;
};

struct RouteCheck {
    int rho = 1;
    double route_gap = 0.0;
    double max_w_condition = 0.0;
};

struct SweepReport {
    EigenCase eigen_case = EigenCase::delta_real;
    Complex lambda0;
    std::vector<int> rhos;  // reported orders
    std::vector<double> t_grid;
    std::vector<SweepPoint> points;
    std::vector<OrderFit> fits;
    std::vector<RouteCheck> routes;
    double t_star = 0.0;  // largest grid t below which every point is stable; 0 if none
    double max_symmetry_error = 0.0;
    bool symmetry_ok = false;
    bool pass = false;
};

namespace detail {

struct SweepModel {
    std::vector<AnalysisPtr> analyses;  // one per active order
    std::vector<RealPersistence> classes;
};

inline SweepModel build_model(const StructuredProblem& pr, const SweepOptions& opt) {
    SweepModel m;
    for (int rho : active_orders(pr.spec)) {
        auto a = analyze_order(pr, rho);
        if (opt.corrupt && opt.corrupt->rho == rho) {
            auto& s = a->base.S;
            if (opt.corrupt->row >= s.rows() || opt.corrupt->col >= s.cols()) throw SpecError("corruption index out of range");
            s(opt.corrupt->row, opt.corrupt->col) *= 1.0 + opt.corrupt->relative;
            complete_analysis(a->base);
        }
        m.analyses.push_back(a);
        m.classes.push_back(a->Sigma.size() ? classify_real_persistence(*a) : RealPersistence{});
    }
    return m;
}

inline double cluster_radius(const StructuredProblem& pr) {
    const Complex l0 = pr.spec.eigenvalue;
    double gap = std::numeric_limits<double>::infinity();
    for (auto z : pr.complement_spectrum) gap = std::min(gap, std::abs(z - l0));
    if (is_paired(pr.spec.eigen_case)) gap = std::min(gap, std::abs(mirror_of(pr.spec.eigen_case, l0) - l0));
    return 0.5 * gap;
}

// indices of the k eigenvalues closest to z
inline std::vector<int> nearest(const CVector& w, Complex z, int k) {
    std::vector<int> idx(w.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(w(a) - z) < std::abs(w(b) - z); });
    idx.resize(k);
    return idx;
}

inline double vector_angle(const CVector& x, const CVector& y) {
    const double c = std::abs(x.dot(y)) / (x.norm() * y.norm());
    return std::acos(std::clamp(c, 0.0, 1.0));
}

inline SweepPoint evaluate_point(const StructuredProblem& pr, const SweepModel& model, double t,
                                 const SweepOptions& opt) {
    const auto& spec = pr.spec;
    const int p = spec.p();
    const bool paired = is_paired(spec.eigen_case);
    const bool ham = pr.kind == ProblemKind::hamiltonian;
    const Complex l0 = spec.eigenvalue;
    const CMatrix mt = pr.A + t * pr.perturbation;
    const auto e = eig(mt);
    SweepPoint pt;
    pt.t = t;

    // cardinality check inside the isolation radius
    const double radius = cluster_radius(pr);
    int found = 0;
    for (Eigen::Index i = 0; i < e.values.size(); ++i) found += std::abs(e.values(i) - l0) < radius;
    if (found != p)
        throw ClusterError("cluster count mismatch at t=" + std::to_string(t) + ": expected " + std::to_string(p) +
                               ", found " + std::to_string(found),
                           p, found);

    struct Slot {
        int order_pos, root;
        Complex pred;
    };
    std::vector<Slot> slots;
    for (int oi = 0; oi < int(model.analyses.size()); ++oi) {
        const auto& a = *model.analyses[oi];
        auto preds = predict_eigenvalues(a.lambda0, a.base, t, a.phase);
        for (int r = 0; r < int(preds.size()); ++r) slots.push_back({oi, r, preds[r]});
    }
    if (int(slots.size()) != p) throw ClusterError("prediction count differs from p", p, int(slots.size()));

    auto assign = [&](Complex centre, bool mirror) {
        auto idx = nearest(e.values, centre, p);
        std::vector<Complex> pv, av;
        for (const auto& s : slots) pv.push_back(mirror ? mirror_of(spec.eigen_case, s.pred) : s.pred);
        for (int i : idx) av.push_back(e.values(i));
        auto m = match_eigenvalues(pv, av);
        std::vector<int> out(p);
        for (int i = 0; i < p; ++i) out[i] = idx[m[i]];
        return out;
    };
    const auto own = assign(l0, false);
    std::vector<int> mir;
    if (paired) mir = assign(mirror_of(spec.eigen_case, l0), true);

    // asymptotic: matching unambiguous and the leading term dominating the residual
    std::vector<bool> slot_stable(p, true);
    for (int i = 0; i < p; ++i) {
        double sep = std::numeric_limits<double>::infinity();
        for (int j = 0; j < p; ++j)
            if (j != i) sep = std::min(sep, std::abs(slots[i].pred - slots[j].pred));
        const double res = std::abs(e.values(own[i]) - slots[i].pred);
        slot_stable[i] = res < 0.5 * sep && res <= opt.dominance_ratio * std::abs(slots[i].pred - l0);
    }
    pt.stable = std::all_of(slot_stable.begin(), slot_stable.end(), [](bool b) { return b; });

    // cluster eigenvector conditioning
    {
        CMatrix x(mt.rows(), p);
        for (int i = 0; i < p; ++i) x.col(i) = e.vectors.col(own[i]);
        pt.cluster_condition = condition_number(x);
        pt.excluded = !(pt.cluster_condition <= opt.defective_condition);
    }

    const CMatrix y = solve(e.vectors, identity(mt.rows()));  // rows: left eigenvectors
    // eps |M| sum_j |y_j| / |λ_i - λ_j|: first-order rounding error of eigenvector i
    const double mnorm = mt.norm();
    auto vector_noise = [&](int i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < e.values.size(); ++j)
            if (j != i) acc += y.row(j).norm() / std::max(std::abs(e.values(i) - e.values(j)), 1e-300);
        return kEps * mnorm * acc;
    };
    auto project = [&](const CMatrix& u, const std::vector<int>& cl) {
        CMatrix xc(mt.rows(), Eigen::Index(cl.size())), yc(Eigen::Index(cl.size()), mt.rows());
        for (size_t i = 0; i < cl.size(); ++i) {
            xc.col(i) = e.vectors.col(cl[i]);
            yc.row(i) = y.row(cl[i]);
        }
        return CMatrix(xc * (yc * u));
    };

    for (int oi = 0; oi < int(model.analyses.size()); ++oi) {
        const auto& a = *model.analyses[oi];
        const int rho = a.rho();
        const int sr = spec.count(rho);
        OrderPoint op;
        op.rho = rho;
        op.stable = true;
        std::vector<int> cl, clm;
        for (int i = 0; i < p; ++i) {
            if (slots[i].order_pos != oi) continue;
            cl.push_back(own[i]);
            op.stable = op.stable && slot_stable[i];
            if (paired) clm.push_back(mir[i]);
            const auto& cls = model.classes[oi];
            for (int side = 0; side < (paired ? 2 : 1); ++side) {
                MatchedPair mp;
                mp.rho = rho;
                mp.root_index = slots[i].root;
                mp.mirror = side == 1;
                mp.predicted = side ? mirror_of(spec.eigen_case, slots[i].pred) : slots[i].pred;
                const int ai = side ? mir[i] : own[i];
                mp.actual = e.values(ai);
                mp.residual = std::abs(mp.actual - mp.predicted);
                if (!cls.roots.empty()) {
                    const auto& rc = cls.roots[slots[i].root];
                    mp.root_class = rc.sufficient ? "sufficient" : (rc.real_candidate ? "real-candidate" : "conjugate-pair");
                    mp.predicted_inertia = rc.sign;
                    mp.off_axis = ham ? std::abs(mp.actual.real()) : std::abs(mp.actual.imag());
                    if (ham) {
                        const CVector x = e.vectors.col(ai);
                        const double im = (x.adjoint() * pr.form * x)(0, 0).imag();
                        mp.measured_inertia = im > 0 ? 1 : (im < 0 ? -1 : 0);
                    }
                }
                try {
                    auto ev = eigvec_prediction(pr, a, slots[i].root, t);
                    mp.angle = vector_angle(side ? ev.partner : ev.right, e.vectors.col(ai));
                    op.angle_noise = std::max(op.angle_noise, vector_noise(ai));
                } catch (const ClusterError&) {
                }
                op.residual_value = std::max(op.residual_value, mp.residual);
                if (!std::isnan(mp.angle)) op.root_angle = std::max(op.root_angle, mp.angle);
                if (!side) op.order_value = std::max(op.order_value, std::abs(mp.actual - l0));
                pt.pairs.push_back(mp);
            }
        }
        const auto sp = predict_pair_basis(pr, a, t);
        const Eigen::Index w = rho * sr;
        CMatrix act = sp.basis;
        act.leftCols(w) = project(sp.basis.leftCols(w), cl);
        if (paired) act.rightCols(w) = project(sp.basis.rightCols(w), clm);
        op.gram_residual = gram_residual(act, pr.form, sp.expected_gram, sp.gram_exponent, t);
        pt.max_gram_residual = std::max(pt.max_gram_residual, op.gram_residual);
        try {
            std::vector<int> cli(cl.begin(), cl.end());
            auto ang = principal_angles(orthonormalize(sp.basis.leftCols(w)), invariant_subspace(e, cli));
            op.subspace_angle = ang.back();
        } catch (const RankDeficiencyError&) {
            op.subspace_angle = std::numeric_limits<double>::quiet_NaN();
        }
        pt.orders.push_back(op);
    }

    // spectrum symmetry after matching
    {
        std::vector<Complex> wv(e.values.data(), e.values.data() + e.values.size()), mv;
        for (auto z : wv) mv.push_back(mirror_of(spec.eigen_case, z));
        auto m = match_eigenvalues(wv, mv);
        for (size_t i = 0; i < wv.size(); ++i) pt.symmetry_error = std::max(pt.symmetry_error, std::abs(wv[i] - mv[m[i]]));
    }
    return pt;
}

}  // namespace detail

inline SweepReport run_sweep(const StructuredProblem& pr, const std::vector<int>& rhos, const std::vector<double>& t_grid,
                             const SweepOptions& opt = {}) {
    if (t_grid.size() < 4) throw SpecError("t grid needs at least 4 points");
    for (size_t i = 0; i < t_grid.size(); ++i) {
        if (!(t_grid[i] > 0)) throw SpecError("t grid must be positive");
        if (i && !(t_grid[i] < t_grid[i - 1])) throw SpecError("t grid must be strictly decreasing");
    }
    if (pr.perturbation.size() == 0) throw StructureError("problem has no perturbation");
    const auto model = detail::build_model(pr, opt);
    const auto active = active_orders(pr.spec);
    for (int r : rhos)
        if (std::find(active.begin(), active.end(), r) == active.end())
            throw SpecError("rho " + std::to_string(r) + " has s_rho = 0");

    SweepReport rep;
    rep.eigen_case = pr.spec.eigen_case;
    rep.lambda0 = pr.spec.eigenvalue;
    rep.rhos = rhos;
    rep.t_grid = t_grid;
    for (const auto& a : model.analyses) {
        RouteCheck rc;
        rc.rho = a->rho();
        rc.route_gap = a->route_gap;
        for (double c : a->base.W_condition) rc.max_w_condition = std::max(rc.max_w_condition, c);
        rep.routes.push_back(rc);
    }

    if (opt.parallel) {
        std::vector<std::future<SweepPoint>> fs;
        for (double t : t_grid) fs.push_back(std::async(std::launch::async, [&, t] { return detail::evaluate_point(pr, model, t, opt); }));
        for (auto& f : fs) rep.points.push_back(f.get());
    } else {
        for (double t : t_grid) rep.points.push_back(detail::evaluate_point(pr, model, t, opt));
    }

    // t*: the stable tail of the grid
    size_t first_stable = rep.points.size();
    for (size_t i = rep.points.size(); i-- > 0;) {
        if (!rep.points[i].stable) break;
        first_stable = i;
    }
    rep.t_star = first_stable < rep.points.size() ? rep.points[first_stable].t : 0.0;

    rep.max_symmetry_error = 0.0;
    for (const auto& pt : rep.points) rep.max_symmetry_error = std::max(rep.max_symmetry_error, pt.symmetry_error);
    rep.symmetry_ok = rep.max_symmetry_error <= opt.symmetry_tol;

    const double anorm = pr.A.norm();
    const double floor_abs = opt.residual_floor_factor * kEps * std::max(anorm, 1.0);
    rep.pass = rep.symmetry_ok;
    for (int rho : rhos) {
        OrderFit f;
        f.rho = rho;
        auto order_at = [&](size_t i) -> const OrderPoint& {
            for (const auto& op : rep.points[i].orders)
                if (op.rho == rho) return op;
            throw Error("missing order record");
        };
        size_t first = rep.points.size();
        for (size_t i = rep.points.size(); i-- > 0;) {
            if (!order_at(i).stable) break;
            first = i;
        }
        f.t_star = first < rep.points.size() ? rep.points[first].t : 0.0;
        std::vector<double> t1, v1, t2, v2, t3, v3, t4, v4;
        for (size_t i = first; i < rep.points.size(); ++i) {
            const auto& pt = rep.points[i];
            if (pt.excluded) continue;
            {
                const auto& op = order_at(i);
                if (op.order_value > 0) t1.push_back(pt.t), v1.push_back(op.order_value);
                if (op.residual_value > floor_abs) t2.push_back(pt.t), v2.push_back(op.residual_value);
                if (op.root_angle > std::max(opt.angle_floor, opt.angle_noise_factor * op.angle_noise))
                    t3.push_back(pt.t), v3.push_back(op.root_angle);
                if (op.gram_residual > floor_abs) t4.push_back(pt.t), v4.push_back(op.gram_residual);
            }
        }
        auto fit = [](const std::vector<double>& t, const std::vector<double>& v, double& out, int& n) {
            n = int(t.size());
            if (n >= 3) out = fit_order(t, v);
        };
        fit(t1, v1, f.order_exponent, f.order_points);
        fit(t2, v2, f.residual_exponent, f.residual_points);
        fit(t3, v3, f.angle_exponent, f.angle_points);
        fit(t4, v4, f.gram_exponent, f.gram_points);
        const double inv = 1.0 / rho;
        f.order_ok = std::abs(f.order_exponent - inv) <= opt.order_tol;
        f.residual_ok = f.residual_exponent >= inv + opt.residual_margin;
        // below three points above the noise floor there is nothing left to fit: treat as converged
        f.angle_ok = f.angle_points < 3 ? f.order_points >= 3 : f.angle_exponent >= inv - opt.angle_tol;
        f.gram_ok = f.gram_points < 3 ? f.order_points >= 3 : f.gram_exponent >= opt.gram_min;
        f.pass = f.order_ok && f.residual_ok && f.angle_ok && f.gram_ok;
        rep.pass = rep.pass && f.pass;
        rep.fits.push_back(f);
    }
    return rep;
}

inline SweepReport run_sweep(const StructuredProblem& pr, const std::vector<double>& t_grid, const SweepOptions& opt = {}) {
    return run_sweep(pr, active_orders(pr.spec), t_grid, opt);
}

// Imaginary-axis persistence of one order: distance of the matched eigenvalues
// from the axis and the measured inertia of each branch.
struct AxisReport {
    int rho = 1;
    std::vector<double> t, max_off_axis;  // per grid point, absolute
    double scale = 1.0;                   // ‖A‖
    double max_off_axis_relative = 0.0;
    bool on_axis = false;                 // max_off_axis <= axis_tol * scale everywhere
    bool inertia_ok = false;              // sufficient roots: measured sign equals predicted at every t
    bool split_ok = false;                // both inertia signs predicted among sufficient roots
    int sufficient_roots = 0;
    double off_axis_exponent = std::numeric_limits<double>::quiet_NaN();
    int off_axis_points = 0;
    SweepReport sweep;
};

inline AxisReport axis_check(const StructuredProblem& pr, int rho, const std::vector<double>& t_grid,
                             const SweepOptions& opt = {}) {
    if (pr.spec.eigen_case != EigenCase::ham_imaginary && pr.spec.eigen_case != EigenCase::delta_real)
        throw SpecError("axis check needs an eigenvalue on the symmetry axis");
    AxisReport out;
    out.rho = rho;
    out.sweep = run_sweep(pr, {rho}, t_grid, opt);
    out.scale = std::max(pr.A.norm(), 1e-300);
    out.inertia_ok = true;
    const bool ham = pr.kind == ProblemKind::hamiltonian;
    std::vector<int> seen;
    std::vector<double> ft, fv;
    const double floor_abs = opt.residual_floor_factor * kEps * std::max(pr.A.norm(), 1.0);
    for (const auto& pt : out.sweep.points) {
        double mx = 0.0;
        for (const auto& m : pt.pairs) {
            if (m.rho != rho) continue;
            mx = std::max(mx, m.off_axis);
            if (m.root_class == "sufficient") {
                if (std::find(seen.begin(), seen.end(), m.root_index) == seen.end()) seen.push_back(m.root_index);
                if (ham && m.measured_inertia != m.predicted_inertia) out.inertia_ok = false;
            }
        }
        out.t.push_back(pt.t);
        out.max_off_axis.push_back(mx);
        if (mx > floor_abs) ft.push_back(pt.t), fv.push_back(mx);
    }
    out.sufficient_roots = int(seen.size());
    bool pos = false, neg = false;
    const auto& cls = out.sweep.points.empty() ? std::vector<MatchedPair>{} : out.sweep.points.front().pairs;
    for (const auto& m : cls)
        if (m.rho == rho && m.root_class == "sufficient") (m.predicted_inertia > 0 ? pos : neg) = true;
    out.split_ok = pos && neg;
    for (double v : out.max_off_axis) out.max_off_axis_relative = std::max(out.max_off_axis_relative, v / out.scale);
    out.on_axis = out.max_off_axis_relative <= opt.axis_tol;
    out.off_axis_points = int(ft.size());
    if (ft.size() >= 3) out.off_axis_exponent = fit_order(ft, fv);
    return out;
}

}  // namespace eigperturb
