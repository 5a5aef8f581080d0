#pragma once

#include <optional>
#include <vector>

#include "perturb_core.hpp"

namespace eigperturb {

inline bool check_structure(const CMatrix& a, const CMatrix& form, double tol) {
    if (a.rows() != a.cols() || form.rows() != a.rows() || form.cols() != a.cols())
        throw DimensionError("check_structure: size mismatch");
    const CMatrix fa = form * a;
    return hermitian_defect(fa) <= tol * fa.norm();
}

// Result of a structured analysis for one order rho. Shared by the Δ-Hermitian
// and Hamiltonian paths; the ambient blocks feed basis and eigenvector predictions.
struct StructuredAnalysis {
    PerturbationAnalysis base;
    EigenCase eigen_case = EigenCase::delta_real;
    Complex lambda0;
    Complex phase = 1.0;  // prediction = lambda0 + phase * t^{1/rho} * mu
    CMatrix G_c;          // paired cases
    CMatrix Sigma;        // sign cases
    CMatrix S_hat;        // sign cases and Hamiltonian cases
    CMatrix expected_gram;
    double gram_exponent = 0.0;
    double route_gap = 0.0;  // distance between the two assembly routes

    // ambient pieces: head = E_rho [I; G], positions[i-1] = chain column block i of group rho
    CMatrix head;
    std::vector<CMatrix> positions;
    CMatrix mirror_tail;  // E^c_rho [I; G^c]
    std::vector<CMatrix> mirror_positions;

    int rho() const { return base.rho; }
    Complex mirror(Complex z) const { return mirror_of(eigen_case, z); }
};

namespace detail {

inline CMatrix chain_block(const CMatrix& chains, const JordanSpec& spec, int j, int i) {
    return chains.middleCols(spec.position_offset(j, i), spec.count(j));
}

inline CMatrix hcat(const std::vector<CMatrix>& parts, Eigen::Index rows) {
    Eigen::Index c = 0;
    for (const auto& p : parts) c += p.cols();
    CMatrix out(rows, c);
    c = 0;
    for (const auto& p : parts) {
        out.middleCols(c, p.cols()) = p;
        c += p.cols();
    }
    return out;
}

// E_k = [V_{k1}, ..., V_{m1}]
inline CMatrix heads(const CMatrix& v, const JordanSpec& spec, int k) {
    std::vector<CMatrix> parts;
    for (int j = k; j <= spec.m; ++j) parts.push_back(chain_block(v, spec, j, 1));
    return hcat(parts, v.rows());
}

// E^c_k = [V^c_{kk}, ..., V^c_{mm}]
inline CMatrix tails(const CMatrix& v, const JordanSpec& spec, int k) {
    std::vector<CMatrix> parts;
    for (int j = k; j <= spec.m; ++j) parts.push_back(chain_block(v, spec, j, j));
    return hcat(parts, v.rows());
}

inline void require_case(const StructuredProblem& pr, EigenCase c) {
    if (pr.spec.eigen_case != c)
        throw SpecError(std::string("case mismatch: expected ") + to_string(c) + ", problem is " +
                        to_string(pr.spec.eigen_case));
}

inline void require_rho(const JordanSpec& spec, int rho) {
    if (rho < 1 || rho > spec.m) throw SpecError("rho out of range");
    if (spec.count(rho) == 0) throw SpecError("s_rho is zero: no eigenvalues of order rho");
}

inline void fill_positions(StructuredAnalysis& a, const CMatrix& v, const CMatrix* vc, const JordanSpec& spec) {
    const int rho = a.rho();
    CMatrix g_stack = CMatrix::Identity(spec.tail_count(rho), spec.count(rho));
    if (rho < spec.m) g_stack.bottomRows(a.base.G.rows()) = a.base.G;
    a.head = heads(v, spec, rho) * g_stack;
    a.positions.clear();
    for (int i = 1; i <= rho; ++i) a.positions.push_back(chain_block(v, spec, rho, i));
    if (vc) {
        CMatrix gc_stack = CMatrix::Identity(spec.tail_count(rho), spec.count(rho));
        if (rho < spec.m) gc_stack.bottomRows(a.G_c.rows()) = a.G_c;
        a.mirror_tail = tails(*vc, spec, rho) * gc_stack;
        a.mirror_positions.clear();
        for (int j = 1; j <= rho; ++j) a.mirror_positions.push_back(chain_block(*vc, spec, rho, j));
    }
}

inline double rel_gap(const CMatrix& x, const CMatrix& y) {
    return (x - y).norm() / std::max(1.0, std::max(x.norm(), y.norm()));
}

}  // namespace detail

inline StructuredAnalysis analyze_nonreal(const StructuredProblem& pr, int rho) {
    detail::require_case(pr, EigenCase::delta_nonreal);
    const auto& spec = pr.spec;
    detail::require_rho(spec, rho);
    const CMatrix v = pr.primary_chains(), vc = pr.mirror_chains();
    const CMatrix dd = pr.form * pr.perturbation;

    StructuredAnalysis a;
    a.eigen_case = spec.eigen_case;
    a.lambda0 = spec.eigenvalue;
    a.base.rho = rho;
    for (int k = rho; k <= spec.m; ++k) {
        a.base.W.push_back(detail::tails(vc, spec, k).adjoint() * dd * detail::heads(v, spec, k));
        a.base.W_condition.push_back(condition_number(a.base.W.back()));
    }
    const CMatrix vr1 = detail::chain_block(v, spec, rho, 1);
    const CMatrix vcrr = detail::chain_block(vc, spec, rho, rho);
    if (rho < spec.m) {
        const CMatrix e = detail::heads(v, spec, rho + 1), ec = detail::tails(vc, spec, rho + 1);
        const CMatrix& w = a.base.W[1];
        auto sr = schur_from_blocks(vcrr.adjoint() * dd * vr1, vcrr.adjoint() * dd * e, ec.adjoint() * dd * vr1, w,
                                    rho + 1);
        a.base.S = sr.S;
        a.base.G = sr.G;
        a.G_c = -solve(w.adjoint(), e.adjoint() * dd * vcrr);
    } else {
        a.base.S = vcrr.adjoint() * dd * vr1;
        a.base.G = CMatrix(0, spec.count(rho));
        a.G_c = CMatrix(0, spec.count(rho));
    }
    complete_analysis(a.base);

    // second route: partition M_11 = V_c^* ΔD V through the generic path
    const CMatrix m11 = vc.adjoint() * dd * v;
    double gap = 0.0;
    for (int k = rho; k <= spec.m; ++k) gap = std::max(gap, detail::rel_gap(assemble_W(m11, spec, k), a.base.W[k - rho]));
    gap = std::max(gap, detail::rel_gap(schur_S(m11, spec, rho).S, a.base.S));
    a.route_gap = gap;

    a.expected_gram = exchange_form(rho * spec.count(rho));
    a.gram_exponent = 1.0 - 1.0 / rho;
    detail::fill_positions(a, v, &vc, spec);
    return a;
}

inline StructuredAnalysis analyze_real(const StructuredProblem& pr, int rho) {
    detail::require_case(pr, EigenCase::delta_real);
    const auto& spec = pr.spec;
    detail::require_rho(spec, rho);
    const CMatrix u = pr.primary_chains();
    const CMatrix dd = pr.form * pr.perturbation;

    StructuredAnalysis a;
    a.eigen_case = spec.eigen_case;
    a.lambda0 = spec.eigenvalue;
    a.base.rho = rho;
    a.Sigma = sign_block(spec, rho);
    std::vector<CMatrix> w_hat;
    for (int k = rho; k <= spec.m; ++k) {
        const CMatrix e = detail::heads(u, spec, k);
        w_hat.push_back(e.adjoint() * dd * e);
        a.base.W.push_back(sign_tail(spec, k) * w_hat.back());
        a.base.W_condition.push_back(condition_number(w_hat.back()));
    }
    const CMatrix ur1 = detail::chain_block(u, spec, rho, 1);
    if (rho < spec.m) {
        const CMatrix e = detail::heads(u, spec, rho + 1);
        auto sr = schur_from_blocks(ur1.adjoint() * dd * ur1, ur1.adjoint() * dd * e, e.adjoint() * dd * ur1, w_hat[1],
                                    rho + 1);
        a.S_hat = sr.S;
        a.base.G = sr.G;
    } else {
        a.S_hat = ur1.adjoint() * dd * ur1;
        a.base.G = CMatrix(0, spec.count(rho));
    }
    a.base.S = a.Sigma * a.S_hat;
    complete_analysis(a.base);

    // second route: D_11 = Δ_T U_T^* ΔD U_T through the generic partition
    const CMatrix d11 = build_form_T(spec) * u.adjoint() * dd * u;
    double gap = 0.0;
    for (int k = rho; k <= spec.m; ++k) gap = std::max(gap, detail::rel_gap(assemble_W(d11, spec, k), a.base.W[k - rho]));
    gap = std::max(gap, detail::rel_gap(schur_S(d11, spec, rho).S, a.base.S));
    a.route_gap = gap;

    a.expected_gram = gamma_block(spec, rho);
    a.gram_exponent = 1.0 - 1.0 / rho;
    detail::fill_positions(a, u, nullptr, spec);
    return a;
}

namespace detail {

inline bool is_real(Complex z, double tol = 1e-10) { return std::abs(z.imag()) <= tol * std::max(1.0, std::abs(z)); }

inline bool uniform_sign(const CMatrix& sigma) {
    bool pos = false, neg = false;
    for (Eigen::Index i = 0; i < sigma.rows(); ++i) (sigma(i, i).real() > 0 ? pos : neg) = true;
    return !(pos && neg);
}

// sign of rho * omega^{rho-1} * q^* Σ q for a real root
inline int root_sign(const StructuredAnalysis& a, const Root& r) {
    const CVector q = a.base.gamma_vectors.col(r.gamma_index);
    const Complex v = double(a.rho()) * std::pow(r.mu, a.rho() - 1) * (q.adjoint() * a.Sigma * q)(0, 0);
    return v.real() >= 0 ? 1 : -1;
}

inline bool root_is_real(const StructuredAnalysis& a, const Root& r) {
    const Complex g = a.base.gammas[r.gamma_index];
    if (!is_real(g)) return false;
    if (a.rho() % 2 == 0 && g.real() < 0) return false;
    return std::abs(r.mu.imag()) <= 1e-8 * std::max(std::abs(r.mu), 1e-300);
}

}  // namespace detail

struct RootClass {
    Complex mu;
    int gamma_index = 0;
    bool real_candidate = false;  // false: the root comes in a conjugate pair off the axis
    bool sufficient = false;      // certified to stay on the axis
    int sign = 0;                 // sign characteristic / inertia for sufficient roots
};

struct RealPersistence {
    std::vector<bool> gamma_real_candidate;
    std::vector<RootClass> roots;
    bool necessary_met = false;
    bool sufficient = false;
};

// parity/positivity rule on γ; certification only for a uniform Σ_ρ
inline RealPersistence classify_real_persistence(const StructuredAnalysis& a) {
    if (a.Sigma.size() == 0) throw SpecError("classification needs a real or imaginary eigenvalue analysis");
    RealPersistence out;
    const bool uniform = detail::uniform_sign(a.Sigma);
    out.necessary_met = true;
    for (const auto& g : a.base.gammas) {
        bool rc = detail::is_real(g) && (a.rho() % 2 == 1 || g.real() > 0);
        out.gamma_real_candidate.push_back(rc);
        out.necessary_met = out.necessary_met && rc;
    }
    out.sufficient = out.necessary_met && uniform;
    for (const auto& r : a.base.roots) {
        RootClass c;
        c.mu = r.mu;
        c.gamma_index = r.gamma_index;
        c.real_candidate = detail::root_is_real(a, r);
        c.sufficient = c.real_candidate && uniform;
        if (c.sufficient) c.sign = detail::root_sign(a, r);
        out.roots.push_back(c);
    }
    return out;
}

// leading-order bases [Ṽ, Ṽ^c] (paired) or Ũ, in ambient coordinates
inline SubspacePrediction predict_pair_basis(const StructuredProblem& pr, const StructuredAnalysis& a, double t) {
    if (!(t > 0)) throw SpecError("t must be positive");
    const int rho = a.rho();
    const int sr = pr.spec.count(rho);
    const auto n = pr.n();
    const bool paired = is_paired(a.eigen_case);
    SubspacePrediction out;
    out.basis = CMatrix::Zero(n, (paired ? 2 : 1) * rho * sr);
    out.basis.middleCols(0, sr) = a.head;
    for (int i = 2; i <= rho; ++i) out.basis.middleCols((i - 1) * sr, sr) = std::pow(t, double(i - 1) / rho) * a.positions[i - 1];
    if (paired) {
        const int off = rho * sr;
        for (int j = 1; j < rho; ++j)
            out.basis.middleCols(off + (j - 1) * sr, sr) = std::pow(t, double(rho - j) / rho) * a.mirror_positions[j - 1];
        out.basis.middleCols(off + (rho - 1) * sr, sr) = a.mirror_tail;
    }
    out.expected_gram = a.expected_gram;
    out.gram_exponent = a.gram_exponent;
    auto lb = leading_basis(pr.spec, a.base, t);
    out.orders = lb.orders;
    return out;
}

struct EigvecPrediction {
    CVector right;
    CVector partner;  // paired cases only
    double condition_scale = 1.0;
    std::optional<int> sigma;
    Complex omega;
};

inline EigvecPrediction eigvec_prediction(const StructuredProblem& pr, const StructuredAnalysis& a, int root_index,
                                          double t) {
    const auto& roots = a.base.roots;
    if (root_index < 0 || root_index >= int(roots.size())) throw DimensionError("root index out of range");
    const int rho = a.rho();
    const auto& r = roots[root_index];
    double scale = 1.0;
    for (const auto& x : roots) scale = std::max(scale, std::abs(x.mu));
    for (int j = 0; j < int(roots.size()); ++j)
        if (j != root_index && std::abs(roots[j].mu - r.mu) < kRootGap * scale)
            throw ClusterError("root is not simple", 1, 2);
    const auto s = a.base.S.rows();
    const CVector q = a.base.gamma_vectors.col(r.gamma_index);
    CVector f(rho * s);
    Complex w = 1.0;
    for (int i = 0; i < rho; ++i) {
        f.segment(i * s, s) = w * q;
        w *= r.mu;
    }
    auto basis = predict_pair_basis(pr, a, t).basis;
    EigvecPrediction out;
    out.omega = r.mu;
    out.right = basis.leftCols(rho * s) * f;
    out.condition_scale = std::pow(t, -(1.0 - 1.0 / rho));
    if (is_paired(a.eigen_case)) {
        const CMatrix qinv = solve(a.base.gamma_vectors, identity(s)).adjoint();
        const CVector qc = qinv.col(r.gamma_index);
        CVector fc(rho * s);
        Complex wc = 1.0;
        for (int i = rho - 1; i >= 0; --i) {
            fc.segment(i * s, s) = wc * qc;
            wc *= std::conj(r.mu);
        }
        const Complex ip = f.dot(fc);  // f^* f^c
        if (std::abs(ip) > 0) fc /= ip;
        out.partner = basis.rightCols(rho * s) * fc;
    } else if (a.Sigma.size() > 0 && detail::root_is_real(a, r)) {
        out.sigma = detail::root_sign(a, r);
    }
    return out;
}

}  // namespace eigperturb
