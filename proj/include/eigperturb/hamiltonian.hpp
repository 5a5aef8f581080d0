#pragma once

#include <vector>

#include "delta_hermitian.hpp"

namespace eigperturb {

inline bool check_hamiltonian(const CMatrix& h, double tol) {
    if (h.rows() != h.cols()) throw DimensionError("check_hamiltonian: matrix not square");
    if (h.rows() % 2) throw DimensionError("check_hamiltonian: odd dimension");
    const CMatrix jh = symplectic_J(h.rows() / 2) * h;
    return hermitian_defect(jh) <= tol * std::max(h.norm(), 1e-300);
}

struct DeltaTriple {
    CMatrix C, D, Delta;
};

inline DeltaTriple to_delta_hermitian(const CMatrix& h, const CMatrix& t, double tol = 1e-12) {
    if (!check_hamiltonian(h, tol) || (t.size() > 0 && !check_hamiltonian(t, tol)))
        throw StructureError("to_delta_hermitian: input is not Hamiltonian");
    const Complex mi(0, -1);
    DeltaTriple out{mi * h, mi * t, mi * symplectic_J(h.rows() / 2)};
    if (!check_structure(out.C, out.Delta, 1e-10)) throw StructureError("to_delta_hermitian: structure lost");
    return out;
}

// P̂ = diag(P̂_1..P̂_m), P̂_j = diag(I, -i I, ..., (-i)^{j-1} I)
inline CMatrix phase_matrix(const JordanSpec& spec) {
    const int p = spec.p();
    CMatrix out = CMatrix::Zero(p, p);
    for (int j = 1; j <= spec.m; ++j) {
        Complex w = 1.0;
        for (int i = 1; i <= j; ++i) {
            for (int c = 0; c < spec.count(j); ++c) {
                const int idx = spec.position_offset(j, i) + c;
                out(idx, idx) = w;
            }
            w *= Complex(0, -1);
        }
    }
    return out;
}

enum class Persistence { leaves_axis, necessary_only, sufficient };

inline const char* to_string(Persistence p) {
    switch (p) {
        case Persistence::leaves_axis: return "leaves-axis";
        case Persistence::necessary_only: return "necessary-only";
        case Persistence::sufficient: return "sufficient";
    }
    return "?";
}

struct RootPersistence {
    Complex mu;
    int gamma_index = 0;
    Persistence status = Persistence::leaves_axis;
    int inertia = 0;  // predicted structure inertia index, sufficient roots only
};

// The direct Ψ route fills the StructuredAnalysis part; `adapter` holds the
// same order analysed as a Δ-Hermitian problem on (-iH, -iT, -iJ).
struct HamiltonianAnalysis : StructuredAnalysis {
    std::vector<CMatrix> Psi;
    CMatrix G_hat;
    StructuredAnalysis adapter;
    std::vector<RootPersistence> persistence;  // imaginary case
};

// the Δ-Hermitian problem equivalent to a Hamiltonian one
inline StructuredProblem delta_adapter(const StructuredProblem& pr) {
    auto tri = to_delta_hermitian(pr.A, pr.perturbation);
    StructuredProblem out;
    out.kind = ProblemKind::delta_hermitian;
    out.spec = pr.spec;
    out.A = tri.C;
    out.perturbation = tri.D;
    out.form = tri.Delta;
    out.seed = pr.seed;
    out.similarity_magnitude = pr.similarity_magnitude;
    const Complex mi(0, -1);
    for (auto z : pr.complement_spectrum) out.complement_spectrum.push_back(mi * z);
    out.spec.eigenvalue = mi * pr.spec.eigenvalue;
    if (pr.spec.eigen_case == EigenCase::ham_nonimaginary) {
        out.spec.eigen_case = EigenCase::delta_nonreal;
        const CMatrix ph = phase_matrix(pr.spec).adjoint();
        const auto p = pr.spec.p();
        out.chains.resize(pr.n(), 2 * p);
        out.chains.leftCols(p) = pr.primary_chains() * ph;                      // V = Ξ P̂^*
        out.chains.rightCols(p) = Complex(0, 1) * pr.mirror_chains() * ph;     // V_c = i Ξ_c P̂^*
    } else {
        out.spec.eigen_case = EigenCase::delta_real;
        out.spec.eigenvalue = Complex(out.spec.eigenvalue.real(), 0.0);
        out.chains = pr.chains;
    }
    validate_problem(out, Tolerances{1e-10, 1e-8});
    return out;
}

inline HamiltonianAnalysis analyze_nonimaginary(const StructuredProblem& pr, int rho) {
    detail::require_case(pr, EigenCase::ham_nonimaginary);
    const auto& spec = pr.spec;
    detail::require_rho(spec, rho);
    const CMatrix xi = pr.primary_chains(), xic = pr.mirror_chains();
    const CMatrix jt = pr.form * pr.perturbation;

    HamiltonianAnalysis a;
    a.eigen_case = spec.eigen_case;
    a.lambda0 = spec.eigenvalue;
    a.base.rho = rho;
    for (int k = rho; k <= spec.m; ++k) {
        a.Psi.push_back(detail::tails(xic, spec, k).adjoint() * jt * detail::heads(xi, spec, k));
        a.base.W.push_back(a.Psi.back());
        a.base.W_condition.push_back(condition_number(a.Psi.back()));
    }
    const CMatrix x1 = detail::chain_block(xi, spec, rho, 1);
    const CMatrix xcr = detail::chain_block(xic, spec, rho, rho);
    if (rho < spec.m) {
        const CMatrix up = detail::heads(xi, spec, rho + 1), upc = detail::tails(xic, spec, rho + 1);
        const CMatrix& psi = a.Psi[1];
        auto sr = schur_from_blocks(xcr.adjoint() * jt * x1, xcr.adjoint() * jt * up, upc.adjoint() * jt * x1, psi,
                                    rho + 1);
        a.S_hat = sr.S;
        a.G_hat = sr.G;
        a.G_c = -solve(psi.adjoint(), up.adjoint() * jt * xcr);
    } else {
        a.S_hat = xcr.adjoint() * jt * x1;
        a.G_hat = CMatrix(0, spec.count(rho));
        a.G_c = CMatrix(0, spec.count(rho));
    }
    a.base.G = a.G_hat;
    a.base.S = -a.S_hat;
    complete_analysis(a.base);
    a.expected_gram = symplectic_J(rho * spec.count(rho));
    a.gram_exponent = 1.0 - 1.0 / rho;
    detail::fill_positions(a, xi, &xic, spec);

    const auto dp = delta_adapter(pr);
    a.adapter = analyze_nonreal(dp, rho);
    a.adapter.phase = Complex(0, 1);
    a.adapter.lambda0 = a.lambda0;  // i * (-i λ)
    // S_ρ = -(-i)^ρ Ŝ_ρ
    a.route_gap = detail::rel_gap(a.adapter.base.S, -std::pow(Complex(0, -1), rho) * a.S_hat);
    return a;
}

inline HamiltonianAnalysis analyze_imaginary(const StructuredProblem& pr, int rho) {
    detail::require_case(pr, EigenCase::ham_imaginary);
    const auto& spec = pr.spec;
    detail::require_rho(spec, rho);
    const CMatrix phi = pr.primary_chains();
    const CMatrix jt = pr.form * pr.perturbation;

    HamiltonianAnalysis a;
    a.eigen_case = spec.eigen_case;
    a.lambda0 = spec.eigenvalue;
    a.phase = Complex(0, 1);
    a.base.rho = rho;
    a.Sigma = sign_block(spec, rho);
    for (int k = rho; k <= spec.m; ++k) {
        const CMatrix up = detail::heads(phi, spec, k);
        a.Psi.push_back(up.adjoint() * jt * up);
        a.base.W.push_back(-sign_tail(spec, k) * a.Psi.back());
        a.base.W_condition.push_back(condition_number(a.Psi.back()));
    }
    const CMatrix f1 = detail::chain_block(phi, spec, rho, 1);
    if (rho < spec.m) {
        const CMatrix up = detail::heads(phi, spec, rho + 1);
        auto sr = schur_from_blocks(f1.adjoint() * jt * f1, f1.adjoint() * jt * up, up.adjoint() * jt * f1, a.Psi[1],
                                    rho + 1);
        a.S_hat = sr.S;
        a.G_hat = sr.G;
    } else {
        a.S_hat = f1.adjoint() * jt * f1;
        a.G_hat = CMatrix(0, spec.count(rho));
    }
    a.base.G = a.G_hat;
    a.base.S = -a.Sigma * a.S_hat;
    complete_analysis(a.base);
    a.expected_gram = Complex(0, 1) * gamma_block(spec, rho);
    a.gram_exponent = 1.0 - 1.0 / rho;
    detail::fill_positions(a, phi, nullptr, spec);

    const auto dp = delta_adapter(pr);
    a.adapter = analyze_real(dp, rho);
    a.adapter.phase = Complex(0, 1);
    a.adapter.lambda0 = a.lambda0;
    a.route_gap = detail::rel_gap(a.adapter.base.S, a.base.S);

    auto cls = classify_real_persistence(a);
    for (const auto& c : cls.roots) {
        RootPersistence rp;
        rp.mu = c.mu;
        rp.gamma_index = c.gamma_index;
        rp.status = !c.real_candidate ? Persistence::leaves_axis
                                      : (c.sufficient ? Persistence::sufficient : Persistence::necessary_only);
        rp.inertia = c.sign;
        a.persistence.push_back(rp);
    }
    return a;
}

inline std::vector<RootPersistence> persistence_analysis(const HamiltonianAnalysis& a) {
    if (a.eigen_case != EigenCase::ham_imaginary) throw SpecError("persistence analysis needs an imaginary eigenvalue");
    return a.persistence;
}

struct SemidefiniteReport {
    int half_order = 1;  // ρ in the half-size convention
    int block_size = 2;  // 2ρ
    double fractional_order = 0.5;
    std::vector<double> w_min_eigenvalues;  // smallest eigenvalue of each W_{2k}, k >= ρ
    HamiltonianAnalysis analysis;
    std::vector<Complex> predicted_roots;  // μ; eigenvalues i(α + t^{1/(2ρ)} μ)
    bool all_imaginary = false;
};

// T = J K with K Hermitian psd; even Jordan blocks with Σ_k = I
inline SemidefiniteReport semidefinite_case(const StructuredProblem& pr, int half_rho) {
    detail::require_case(pr, EigenCase::ham_imaginary);
    const auto& spec = pr.spec;
    const CMatrix k = -pr.form * pr.perturbation;  // J^{-1} = -J
    if (hermitian_defect(k) > 1e-10 * std::max(1.0, k.norm())) throw StructureError("K = J^{-1}T is not Hermitian");
    Eigen::SelfAdjointEigenSolver<CMatrix> es(k);
    if (es.eigenvalues().minCoeff() < -1e-12 * std::max(k.norm(), 1e-300))
        throw StructureError("K is indefinite");
    for (int j = 1; j <= spec.m; ++j) {
        if (j % 2 && spec.count(j) > 0) throw SpecError("semidefinite case needs even block sizes only");
        if (spec.sign_count(j) != spec.count(j)) throw SpecError("semidefinite case needs Sigma_k = I");
    }
    const int rho = 2 * half_rho;
    SemidefiniteReport rep;
    rep.half_order = half_rho;
    rep.block_size = rho;
    rep.fractional_order = 1.0 / rho;
    const CMatrix phi = pr.primary_chains();
    for (int j = rho; j <= spec.m; j += 2) {
        const CMatrix up = detail::heads(phi, spec, j);
        const CMatrix w = up.adjoint() * k * up;
        Eigen::SelfAdjointEigenSolver<CMatrix> ew((w + w.adjoint()) / 2.0);
        double mn = ew.eigenvalues().size() ? ew.eigenvalues().minCoeff() : 1.0;
        rep.w_min_eigenvalues.push_back(mn);
        if (!(mn > 1e-10 * std::max(1.0, w.norm())))
            throw NonGenericError("W_" + std::to_string(j) + " is not positive definite", j, mn);
    }
    rep.analysis = analyze_imaginary(pr, rho);
    rep.all_imaginary = true;
    for (const auto& r : rep.analysis.persistence) {
        rep.predicted_roots.push_back(r.mu);
        rep.all_imaginary = rep.all_imaginary && r.status == Persistence::sufficient;
    }
    return rep;
}

}  // namespace eigperturb
