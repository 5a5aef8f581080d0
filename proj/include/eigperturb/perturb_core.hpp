#pragma once

#include <algorithm>
#include <numbers>
#include <vector>

#include "canonical.hpp"

namespace eigperturb {

inline constexpr double kWConditionMax = 1e8;
inline constexpr double kRootGap = 1e-6;

// Sub-block B_{kl}^{(ij)}: row block k of group i, column block l of group j.
struct BlockIndex {
    JordanSpec spec;

    struct Range {
        int row, col, rows, cols;
    };

    Range range(int i, int j, int k, int l) const {
        if (i < 1 || i > spec.m || j < 1 || j > spec.m || k < 1 || k > i || l < 1 || l > j)
            throw DimensionError("block index out of range");
        return {spec.position_offset(i, k), spec.position_offset(j, l), spec.count(i), spec.count(j)};
    }
    CMatrix block(const CMatrix& b, int i, int j, int k, int l) const {
        auto r = range(i, j, k, l);
        return b.block(r.row, r.col, r.rows, r.cols);
    }
};

inline BlockIndex partition(const CMatrix& b, const JordanSpec& spec) {
    spec.validate();
    const int p = spec.p();
    if (b.rows() != p || b.cols() != p)
        throw DimensionError("partition: B must be " + std::to_string(p) + "x" + std::to_string(p));
    return BlockIndex{spec};
}

// W_k: block (i, j) = B_{i1}^{(ij)} for i, j = k..m
inline CMatrix assemble_W(const CMatrix& b, const JordanSpec& spec, int k) {
    auto idx = partition(b, spec);
    if (k < 1 || k > spec.m) throw DimensionError("assemble_W: k out of range");
    const int n = spec.tail_count(k);
    CMatrix w(n, n);
    int r = 0;
    for (int i = k; i <= spec.m; ++i) {
        int c = 0;
        for (int j = k; j <= spec.m; ++j) {
            w.block(r, c, spec.count(i), spec.count(j)) = idx.block(b, i, j, i, 1);
            c += spec.count(j);
        }
        r += spec.count(i);
    }
    return w;
}

struct SchurResult {
    CMatrix S;
    CMatrix G;  // (G_{ρ+1,ρ}; ...; G_{mρ}), empty when ρ = m
    double w_condition = 1.0;
};

// Schur complement of the trailing W_{ρ+1} block inside a bordered W_ρ
inline SchurResult schur_from_blocks(const CMatrix& top_left, const CMatrix& top_right, const CMatrix& bottom_left,
                                     const CMatrix& w_next, int k_next) {
    SchurResult out;
    if (w_next.rows() == 0) {
        out.S = top_left;
        out.G = CMatrix(0, top_left.cols());
        return out;
    }
    out.w_condition = condition_number(w_next);
    if (!(out.w_condition <= kWConditionMax))
        throw NonGenericError("non-generic perturbation: W_" + std::to_string(k_next) + " has condition " +
                                  std::to_string(out.w_condition),
                              k_next, out.w_condition);
    try {
        out.G = -solve(w_next, bottom_left);
    } catch (const SingularMatrixError& e) {
        throw NonGenericError("non-generic perturbation: W_" + std::to_string(k_next) + " singular", k_next,
                              out.w_condition);
    }
    out.S = top_left + top_right * out.G;
    return out;
}

inline SchurResult schur_S(const CMatrix& b, const JordanSpec& spec, int rho) {
    auto idx = partition(b, spec);
    if (rho < 1 || rho > spec.m) throw DimensionError("schur_S: rho out of range");
    const CMatrix tl = idx.block(b, rho, rho, rho, 1);
    if (rho == spec.m) return schur_from_blocks(tl, {}, {}, CMatrix(0, 0), rho + 1);
    const int n = spec.tail_count(rho + 1);
    CMatrix tr(spec.count(rho), n), bl(n, spec.count(rho));
    int off = 0;
    for (int j = rho + 1; j <= spec.m; ++j) {
        tr.middleCols(off, spec.count(j)) = idx.block(b, rho, j, rho, 1);
        bl.middleRows(off, spec.count(j)) = idx.block(b, j, rho, j, 1);
        off += spec.count(j);
    }
    return schur_from_blocks(tl, tr, bl, assemble_W(b, spec, rho + 1), rho + 1);
}

inline CMatrix companion_theta(const CMatrix& s, int rho) {
    if (s.rows() != s.cols()) throw DimensionError("companion_theta: S not square");
    if (rho < 1) throw DimensionError("companion_theta: rho must be positive");
    const auto n = s.rows();
    CMatrix th = CMatrix::Zero(rho * n, rho * n);
    for (int i = 0; i + 1 < rho; ++i) th.block(i * n, (i + 1) * n, n, n) = identity(n);
    th.block((rho - 1) * n, 0, n, n) += s;
    return th;
}

struct Root {
    Complex mu;
    int gamma_index;  // which γ_i this root belongs to
};

// ρ roots of γ, principal branch, sorted by argument in (-π, π]
inline std::vector<Complex> rho_roots(Complex gamma, int rho) {
    std::vector<Complex> out;
    const double r = std::pow(std::abs(gamma), 1.0 / rho);
    const double a0 = std::arg(gamma) / rho;
    for (int j = 0; j < rho; ++j) out.push_back(std::polar(r, a0 + 2.0 * std::numbers::pi * j / rho));
    auto argpi = [](Complex z) {
        double a = std::arg(z);
        return a <= -std::numbers::pi ? a + 2 * std::numbers::pi : a;
    };
    std::stable_sort(out.begin(), out.end(), [&](Complex x, Complex y) { return argpi(x) < argpi(y); });
    return out;
}

struct PerturbationAnalysis {
    int rho = 1;
    std::vector<CMatrix> W;  // W_ρ..W_m, empty entries where not needed
    std::vector<double> W_condition;
    CMatrix S;
    CMatrix G;
    CMatrix theta;
    std::vector<Complex> gammas;
    CMatrix gamma_vectors;  // eigenvectors of S
    std::vector<Root> roots;
};

// fill theta, gammas, roots from S
inline void complete_analysis(PerturbationAnalysis& a) {
    a.theta = companion_theta(a.S, a.rho);
    auto e = eig(a.S);
    a.gammas.assign(e.values.data(), e.values.data() + e.values.size());
    a.gamma_vectors = e.vectors;
    a.roots.clear();
    for (int i = 0; i < int(a.gammas.size()); ++i)
        for (auto mu : rho_roots(a.gammas[i], a.rho)) a.roots.push_back({mu, i});
}

// generic analysis of a p x p matrix B in canonical coordinates
inline PerturbationAnalysis analyze(const CMatrix& b, const JordanSpec& spec, int rho) {
    PerturbationAnalysis a;
    a.rho = rho;
    for (int k = rho; k <= spec.m; ++k) {
        a.W.push_back(assemble_W(b, spec, k));
        a.W_condition.push_back(condition_number(a.W.back()));
    }
    auto sr = schur_S(b, spec, rho);
    a.S = sr.S;
    a.G = sr.G;
    complete_analysis(a);
    return a;
}

inline std::vector<Complex> predict_eigenvalues(Complex lambda0, const PerturbationAnalysis& a, double t,
                                                Complex phase = 1.0) {
    if (!(t > 0)) throw SpecError("t must be positive");
    const double tr = std::pow(t, 1.0 / a.rho);
    std::vector<Complex> out;
    for (const auto& r : a.roots) out.push_back(lambda0 + phase * tr * r.mu);
    return out;
}

struct SubspacePrediction {
    CMatrix basis;
    // order exponent of the dropped remainder for each row block of each group: orders[k-1][r-1]
    std::vector<std::vector<double>> orders;
    CMatrix expected_gram;  // empty when no form applies
    double gram_exponent = 0.0;
};

// X_ρ(t) in canonical coordinates, remainders zeroed
inline SubspacePrediction leading_basis(const JordanSpec& spec, const PerturbationAnalysis& a, double t) {
    const int rho = a.rho;
    const int sr = spec.count(rho);
    SubspacePrediction out;
    out.basis = CMatrix::Zero(spec.p(), rho * sr);
    for (int i = 1; i <= rho; ++i)
        out.basis.block(spec.position_offset(rho, i), (i - 1) * sr, sr, sr) =
            std::pow(t, double(i - 1) / rho) * identity(sr);
    int off = 0;
    for (int k = rho + 1; k <= spec.m; ++k) {
        out.basis.block(spec.position_offset(k, 1), 0, spec.count(k), sr) = a.G.middleRows(off, spec.count(k));
        off += spec.count(k);
    }
    for (int k = 1; k <= spec.m; ++k) {
        std::vector<double> ex;
        for (int r = 1; r <= k; ++r) {
            if (k < rho) ex.push_back(1.0 - double(k - r + 1) / rho);
            else if (k == rho) ex.push_back(1.0);
            else ex.push_back(std::min(double(std::max(r - 1, 1)) / rho, 1.0));
        }
        out.orders.push_back(ex);
    }
    return out;
}

struct ClusterRestriction {
    CMatrix F, Q, Omega;
};

inline ClusterRestriction restrict_cluster(const PerturbationAnalysis& a, const std::vector<int>& selection) {
    const int rho = a.rho;
    const auto s = a.S.rows();
    const int nroots = int(a.roots.size());
    std::vector<bool> chosen(nroots, false);
    for (int i : selection) {
        if (i < 0 || i >= nroots) throw DimensionError("restrict_cluster: root index out of range");
        if (chosen[i]) throw DimensionError("restrict_cluster: duplicate root index");
        chosen[i] = true;
    }
    double scale = 1.0;
    for (const auto& r : a.roots) scale = std::max(scale, std::abs(r.mu));
    for (int i = 0; i < nroots; ++i)
        for (int j = 0; j < nroots; ++j)
            if (chosen[i] && !chosen[j] && std::abs(a.roots[i].mu - a.roots[j].mu) < kRootGap * scale)
                throw ClusterError("cluster not isolated: selected root too close to an unselected one",
                                   int(selection.size()), nroots);
    ClusterRestriction out;
    if (int(selection.size()) == nroots) {
        out.F = identity(rho * s);
        out.Omega = a.theta;
        out.Q = out.F.topRows(s);
        return out;
    }
    const auto k = Eigen::Index(selection.size());
    out.Q.resize(s, k);
    out.Omega = CMatrix::Zero(k, k);
    out.F.resize(rho * s, k);
    for (Eigen::Index c = 0; c < k; ++c) {
        const auto& r = a.roots[selection[c]];
        CVector q = a.gamma_vectors.col(r.gamma_index);
        out.Omega(c, c) = r.mu;
        Complex w = 1.0;
        CVector f(rho * s);
        for (int i = 0; i < rho; ++i) {
            f.segment(i * s, s) = w * q;
            w *= r.mu;
        }
        const double nf = f.norm();
        out.Q.col(c) = q / q.norm();
        out.F.col(c) = f / nf;
    }
    if (svd_values(out.F).back() < 1e-8)
        throw ClusterError("cluster restriction rank deficient (non-semisimple S)", int(k), int(k));
    const double res = (a.theta * out.F - out.F * out.Omega).norm();
    if (res > 1e-8 * std::max(1.0, a.theta.norm()))
        throw ClusterError("cluster restriction residual too large", int(k), int(k));
    return out;
}

}  // namespace eigperturb
