#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "linalg.hpp"

namespace eigperturb {

enum class ProblemKind { delta_hermitian, hamiltonian };
enum class EigenCase { delta_nonreal, delta_real, ham_nonimaginary, ham_imaginary };

inline const char* to_string(EigenCase c) {
    switch (c) {
        case EigenCase::delta_nonreal: return "delta_nonreal";
        case EigenCase::delta_real: return "delta_real";
        case EigenCase::ham_nonimaginary: return "ham_nonimaginary";
        case EigenCase::ham_imaginary: return "ham_imaginary";
    }
    return "?";
}

inline EigenCase eigen_case_from_string(const std::string& s) {
    if (s == "delta_nonreal") return EigenCase::delta_nonreal;
    if (s == "delta_real") return EigenCase::delta_real;
    if (s == "ham_nonimaginary") return EigenCase::ham_nonimaginary;
    if (s == "ham_imaginary") return EigenCase::ham_imaginary;
    throw SpecError("unknown case '" + s + "'");
}

inline ProblemKind kind_of(EigenCase c) {
    return (c == EigenCase::ham_imaginary || c == EigenCase::ham_nonimaginary) ? ProblemKind::hamiltonian
                                                                                : ProblemKind::delta_hermitian;
}

// nonreal / nonimaginary eigenvalues come with a mirror cluster (Ṽ and Ṽ^c)
inline bool is_paired(EigenCase c) { return c == EigenCase::delta_nonreal || c == EigenCase::ham_nonimaginary; }

inline Complex mirror_of(EigenCase c, Complex z) {
    return kind_of(c) == ProblemKind::hamiltonian ? -std::conj(z) : std::conj(z);
}

// Segre data for the target eigenvalue. Groups and chain positions are 1-based.
struct JordanSpec {
    int m = 1;
    std::vector<int> s{1};
    std::vector<int> signs;  // t_k; empty means all positive
    Complex eigenvalue{0.0, 0.0};
    EigenCase eigen_case = EigenCase::delta_real;

    int count(int j) const { return s.at(j - 1); }
    int sign_count(int j) const { return signs.empty() ? s.at(j - 1) : signs.at(j - 1); }

    int p() const {
        int out = 0;
        for (int j = 1; j <= m; ++j) out += j * count(j);
        return out;
    }
    int group_offset(int j) const {
        int out = 0;
        for (int k = 1; k < j; ++k) out += k * count(k);
        return out;
    }
    // first column of chain position i in group j
    int position_offset(int j, int i) const { return group_offset(j) + (i - 1) * count(j); }
    // Σ_{j>=k} s_j
    int tail_count(int k) const {
        int out = 0;
        for (int j = k; j <= m; ++j) out += count(j);
        return out;
    }
    bool has_signs() const { return eigen_case == EigenCase::delta_real || eigen_case == EigenCase::ham_imaginary; }

    void validate() const {
        if (m < 1) throw SpecError("m must be positive");
        if (int(s.size()) != m) throw SpecError("s must have m entries");
        for (int v : s)
            if (v < 0) throw SpecError("block counts must be nonnegative");
        if (s.back() <= 0) throw SpecError("s_m must be positive");
        if (!signs.empty()) {
            if (int(signs.size()) != m) throw SpecError("signs must have m entries");
            for (int j = 0; j < m; ++j)
                if (signs[j] < 0 || signs[j] > s[j]) throw SpecError("sign count outside [0, s_k]");
        }
        if (!std::isfinite(eigenvalue.real()) || !std::isfinite(eigenvalue.imag()))
            throw SpecError("eigenvalue not finite");
        switch (eigen_case) {
            case EigenCase::delta_nonreal:
                if (eigenvalue.imag() == 0.0) throw SpecError("delta_nonreal needs Im(eigenvalue) != 0");
                break;
            case EigenCase::delta_real:
                if (eigenvalue.imag() != 0.0) throw SpecError("delta_real needs a real eigenvalue");
                break;
            case EigenCase::ham_nonimaginary:
                if (eigenvalue.real() == 0.0) throw SpecError("ham_nonimaginary needs Re(eigenvalue) != 0");
                break;
            case EigenCase::ham_imaginary:
                if (eigenvalue.real() != 0.0) throw SpecError("ham_imaginary needs Re(eigenvalue) == 0");
                break;
        }
    }
};

// Sigma_k = diag(I_{t_k}, -I_{s_k - t_k})
inline CMatrix sign_block(const JordanSpec& spec, int k) {
    const int n = spec.count(k);
    CMatrix out = CMatrix::Zero(n, n);
    for (int i = 0; i < n; ++i) out(i, i) = i < spec.sign_count(k) ? 1.0 : -1.0;
    return out;
}

// diag(Sigma_k, ..., Sigma_m)
inline CMatrix sign_tail(const JordanSpec& spec, int k) {
    std::vector<CMatrix> blocks;
    for (int j = k; j <= spec.m; ++j) blocks.push_back(sign_block(spec, j));
    return block_diag(blocks);
}

inline CMatrix build_nilpotent(const JordanSpec& spec) {
    const int p = spec.p();
    CMatrix n = CMatrix::Zero(p, p);
    for (int j = 1; j <= spec.m; ++j) {
        const int sj = spec.count(j);
        for (int i = 1; i < j; ++i)
            n.block(spec.position_offset(j, i), spec.position_offset(j, i + 1), sj, sj) = identity(sj);
    }
    return n;
}

// Gamma_j: j x j block anti-diagonal of Sigma_j
inline CMatrix gamma_block(const JordanSpec& spec, int j) {
    const int sj = spec.count(j);
    CMatrix g = CMatrix::Zero(j * sj, j * sj);
    const CMatrix sig = sign_block(spec, j);
    for (int i = 1; i <= j; ++i) g.block((i - 1) * sj, (j - i) * sj, sj, sj) = sig;
    return g;
}

inline CMatrix gamma_form(const JordanSpec& spec) {
    std::vector<CMatrix> blocks;
    for (int j = 1; j <= spec.m; ++j) blocks.push_back(gamma_block(spec, j));
    return block_diag(blocks);
}

inline CMatrix exchange_form(Eigen::Index p) {
    CMatrix d = CMatrix::Zero(2 * p, 2 * p);
    d.topRightCorner(p, p) = identity(p);
    d.bottomLeftCorner(p, p) = identity(p);
    return d;
}

inline CMatrix build_form_T(const JordanSpec& spec) {
    spec.validate();
    return is_paired(spec.eigen_case) ? exchange_form(spec.p()) : gamma_form(spec);
}

// the matrix B with A·chains = chains·B
inline CMatrix target_block(const JordanSpec& spec) {
    const int p = spec.p();
    const CMatrix n = build_nilpotent(spec);
    const CMatrix lam = spec.eigenvalue * identity(p) + n;
    switch (spec.eigen_case) {
        case EigenCase::delta_nonreal: return block_diag({lam, lam.adjoint()});
        case EigenCase::delta_real: return lam;
        case EigenCase::ham_nonimaginary: return block_diag({lam, CMatrix(-lam.adjoint())});
        case EigenCase::ham_imaginary:
            return spec.eigenvalue * identity(p) + Complex(0, 1) * n;  // i(alpha I + N)
    }
    return lam;
}

// expected chains^* · form · chains
inline CMatrix target_gram(const JordanSpec& spec) {
    switch (spec.eigen_case) {
        case EigenCase::delta_nonreal:
        case EigenCase::delta_real: return build_form_T(spec);
        case EigenCase::ham_nonimaginary: return symplectic_J(spec.p());
        case EigenCase::ham_imaginary: return Complex(0, 1) * gamma_form(spec);
    }
    return {};
}

struct ComplementEntry {
    Complex value;
    int sign = 0;  // 0: assigned automatically
};

struct StructuredProblem {
    ProblemKind kind = ProblemKind::delta_hermitian;
    JordanSpec spec;
    CMatrix A, form, perturbation, chains;
    std::vector<Complex> complement_spectrum;
    std::vector<ComplementEntry> complement;
    std::uint64_t seed = 0;
    double similarity_magnitude = 0.0;

    Eigen::Index n() const { return A.rows(); }
    CMatrix primary_chains() const { return chains.leftCols(spec.p()); }
    CMatrix mirror_chains() const {
        if (!is_paired(spec.eigen_case)) throw StructureError("mirror chains exist only for paired cases");
        return chains.rightCols(spec.p());
    }
};

struct Tolerances {
    double structure = 1e-12;
    double chain = 1e-9;
};

inline void validate_problem(const StructuredProblem& pr, const Tolerances& tol = {}) {
    pr.spec.validate();
    if (pr.kind != kind_of(pr.spec.eigen_case)) throw StructureError("problem kind does not match spec case");
    const auto n = pr.A.rows();
    if (pr.A.cols() != n || pr.form.rows() != n || pr.form.cols() != n)
        throw StructureError("A and form must be square of equal size");
    require_finite(pr.A, "problem");
    require_finite(pr.form, "problem");
    const double fa = pr.form.norm() * std::max(pr.A.norm(), 1.0);
    if (pr.kind == ProblemKind::delta_hermitian) {
        if (hermitian_defect(pr.form) > tol.structure * pr.form.norm()) throw StructureError("form not Hermitian");
    } else {
        if (n % 2) throw StructureError("Hamiltonian problem of odd dimension");
        if (pr.form != symplectic_J(n / 2)) throw StructureError("form must be J_n exactly");
    }
    if (svd_values(pr.form).back() < kRankTol * pr.form.norm()) throw StructureError("form not invertible");
    if (hermitian_defect(pr.form * pr.A) > tol.structure * fa)
        throw StructureError("A is not structured with respect to the form");
    if (pr.perturbation.size() > 0) {
        if (pr.perturbation.rows() != n || pr.perturbation.cols() != n)
            throw StructureError("perturbation has wrong size");
        require_finite(pr.perturbation, "problem");
        const double fp = pr.form.norm() * std::max(pr.perturbation.norm(), 1.0);
        if (hermitian_defect(pr.form * pr.perturbation) > tol.structure * fp)
            throw StructureError("perturbation is not structured with respect to the form");
    }
    const int w = (is_paired(pr.spec.eigen_case) ? 2 : 1) * pr.spec.p();
    if (pr.chains.rows() != n || pr.chains.cols() != w) throw StructureError("chains missing or of wrong shape");
    const CMatrix b = target_block(pr.spec);
    const double cn = pr.chains.norm();
    if ((pr.A * pr.chains - pr.chains * b).norm() > tol.chain * std::max(pr.A.norm(), 1.0) * cn)
        throw StructureError("chain consistency violated");
    if ((pr.chains.adjoint() * pr.form * pr.chains - target_gram(pr.spec)).norm() > tol.chain * cn * cn)
        throw StructureError("chain pairing with the form violated");
    for (const auto& z : pr.complement_spectrum)
        if (std::abs(z - pr.spec.eigenvalue) <= 1e-8 * (1 + std::abs(z)))
            throw StructureError("target eigenvalue lies in the complement spectrum");
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// independent streams from one user seed
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) { return splitmix64(seed ^ splitmix64(tag)); }

inline CMatrix gaussian_matrix(Eigen::Index r, Eigen::Index c, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd(0.0, 1.0);
    CMatrix g(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) {
            double re = nd(rng);
            double im = nd(rng);
            g(i, j) = Complex(re, im) / std::sqrt(2.0);
        }
    return g;
}

inline CMatrix random_hermitian(Eigen::Index n, std::uint64_t seed) {
    CMatrix g = gaussian_matrix(n, n, seed);
    return (g + g.adjoint()) / 2.0;
}

inline bool is_symplectic_J(const CMatrix& f) { return f.rows() % 2 == 0 && f == symplectic_J(f.rows() / 2); }

// the Hermitian form attached to a structure: form itself, or -iJ_n
inline CMatrix hermitian_form(const CMatrix& form) {
    if (is_symplectic_J(form)) return Complex(0, -1) * form;
    if (hermitian_defect(form) <= 1e-12 * form.norm()) return form;
    throw StructureError("form is neither Hermitian nor J_n");
}

}  // namespace detail

inline CMatrix random_structured_similarity(const CMatrix& form, double magnitude, std::uint64_t seed) {
    if (!(magnitude >= 0.0) || magnitude > 2.0) throw SpecError("similarity magnitude must lie in [0, 2]");
    const auto n = form.rows();
    if (magnitude == 0.0) return identity(n);
    const CMatrix h = detail::hermitian_form(form);
    CMatrix g = detail::gaussian_matrix(n, n, detail::derive_seed(seed, 0x51));
    CMatrix k = (g - g.adjoint()) / 2.0;
    k *= magnitude / svd_values(k).front();
    return expm(solve(h, k));
}

inline CMatrix structured_perturbation_from(ProblemKind kind, const CMatrix& form, const CMatrix& m) {
    if (hermitian_defect(m) > 1e-12 * std::max(1.0, m.norm())) throw SpecError("M must be Hermitian");
    if (kind == ProblemKind::hamiltonian) {
        if (!detail::is_symplectic_J(form)) throw StructureError("Hamiltonian perturbation needs form J_n");
        return -form * m;  // J·T = -J·J·M = M
    }
    return solve(form, m);
}

inline CMatrix random_structured_perturbation(ProblemKind kind, const CMatrix& form, std::uint64_t seed) {
    return structured_perturbation_from(kind, form,
                                        detail::random_hermitian(form.rows(), detail::derive_seed(seed, 0xD1)));
}

// A <- U A U^{-1}, perturbation likewise, chains <- U chains
inline StructuredProblem conjugate_problem(const StructuredProblem& pr, const CMatrix& u) {
    StructuredProblem out = pr;
    auto similar = [&](const CMatrix& x) -> CMatrix {
        CMatrix ux = u * x;
        return solve(u.transpose(), ux.transpose()).transpose();
    };
    out.A = similar(pr.A);
    if (pr.perturbation.size() > 0) out.perturbation = similar(pr.perturbation);
    out.chains = u * pr.chains;
    validate_problem(out);
    return out;
}

namespace detail {

struct ComplementBlocks {
    std::vector<CMatrix> a, form;
    std::vector<Complex> spectrum;
};

inline void check_collision(const JordanSpec& spec, Complex z) {
    const Complex lam = spec.eigenvalue;
    const Complex mir = mirror_of(spec.eigen_case, lam);
    if (std::abs(z - lam) < 0.5 || std::abs(z - mir) < 0.5)
        throw SpecError("spectrum collision: complement value too close to the target eigenvalue");
}

inline int positive_count(const CMatrix& hermitian) {
    Eigen::SelfAdjointEigenSolver<CMatrix> es(hermitian);
    int c = 0;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) c += es.eigenvalues()(i) > 0;
    return c;
}

inline ComplementBlocks complement_blocks(const JordanSpec& spec, std::vector<ComplementEntry>& entries,
                                          int target_pos, int target_neg) {
    ComplementBlocks out;
    const bool ham = kind_of(spec.eigen_case) == ProblemKind::hamiltonian;
    const Complex i1(0, 1);
    // Hamiltonian: balance the signature of -iK so that it matches -iJ_n
    int balance = target_pos - target_neg;
    int autos = 0;
    for (auto& e : entries) {
        if (e.sign != 0 && e.sign != 1 && e.sign != -1) throw SpecError("complement sign must be -1, 0 or +1");
        const bool single = ham ? e.value.real() == 0.0 : e.value.imag() == 0.0;
        if (!single) continue;
        if (e.sign == 0) ++autos;
        else balance += e.sign;
    }
    if (ham) {
        if (std::abs(balance) > autos || (autos - std::abs(balance)) % 2)
            throw SpecError("cannot balance the Hamiltonian signature with the requested complement");
    }
    int alt = 1;
    for (auto& e : entries) {
        check_collision(spec, e.value);
        const bool single = ham ? e.value.real() == 0.0 : e.value.imag() == 0.0;
        if (single) {
            if (e.sign == 0) {
                if (ham) {
                    e.sign = balance > 0 ? -1 : (balance < 0 ? 1 : alt);
                    balance += e.sign;
                    if (balance == 0) alt = -alt;
                } else {
                    e.sign = alt;
                    alt = -alt;
                }
            }
            out.a.push_back(CMatrix::Constant(1, 1, e.value));
            out.form.push_back(CMatrix::Constant(1, 1, ham ? i1 * double(e.sign) : Complex(e.sign)));
            out.spectrum.push_back(e.value);
        } else {
            const Complex partner = ham ? -std::conj(e.value) : std::conj(e.value);
            check_collision(spec, partner);
            CMatrix a = CMatrix::Zero(2, 2);
            a(0, 0) = e.value;
            a(1, 1) = partner;
            out.a.push_back(a);
            out.form.push_back(ham ? symplectic_J(1) : exchange_form(1));
            out.spectrum.push_back(e.value);
            out.spectrum.push_back(partner);
        }
    }
    return out;
}

}  // namespace detail

inline StructuredProblem build_canonical_pair(const JordanSpec& spec, std::vector<ComplementEntry> complement) {
    spec.validate();
    StructuredProblem pr;
    pr.spec = spec;
    pr.kind = kind_of(spec.eigen_case);
    const Complex i1(0, 1);
    const CMatrix hat_a = target_block(spec);
    const CMatrix hat_k = target_gram(spec);
    int pos = 0, neg = 0;
    if (pr.kind == ProblemKind::hamiltonian) {
        pos = detail::positive_count(-i1 * hat_k);
        neg = int(hat_k.rows()) - pos;
    }
    auto comp = detail::complement_blocks(spec, complement, pos, neg);
    pr.complement = complement;
    pr.complement_spectrum = comp.spectrum;

    std::vector<CMatrix> ab{hat_a}, fb{hat_k};
    ab.insert(ab.end(), comp.a.begin(), comp.a.end());
    fb.insert(fb.end(), comp.form.begin(), comp.form.end());
    const CMatrix a = block_diag(ab);
    const CMatrix k = block_diag(fb);
    const auto w = hat_a.cols();

    if (pr.kind == ProblemKind::delta_hermitian) {
        pr.A = a;
        pr.form = k;
        pr.chains = identity(a.rows()).leftCols(w);
    } else {
        // unitary X0 with X0^* J X0 = K: both -iJ and -iK are Hermitian involutions
        const auto n2 = a.rows();
        if (n2 % 2) throw SpecError("Hamiltonian problem needs even total dimension");
        const CMatrix j = symplectic_J(n2 / 2);
        Eigen::SelfAdjointEigenSolver<CMatrix> ej(-i1 * j), ek(-i1 * k);
        const CMatrix x0 = ej.eigenvectors() * ek.eigenvectors().adjoint();
        pr.A = x0 * a * x0.adjoint();
        pr.form = j;
        pr.chains = x0.leftCols(w);
    }
    pr.perturbation = CMatrix::Zero(pr.A.rows(), pr.A.cols());
    validate_problem(pr);
    return pr;
}

}  // namespace eigperturb
