#include <gtest/gtest.h>

#include <random>

#include <eigperturb/generate.hpp>

using namespace eigperturb;

namespace {

const Complex I1(0, 1);

JordanSpec spec_of(EigenCase c, Complex lam, std::vector<int> s, std::vector<int> signs = {}) {
    JordanSpec sp;
    sp.m = int(s.size());
    sp.s = std::move(s);
    sp.signs = std::move(signs);
    sp.eigenvalue = lam;
    sp.eigen_case = c;
    return sp;
}

double multiset_gap(std::vector<Complex> a, std::vector<Complex> b) {
    double worst = 0;
    for (auto z : a) {
        auto it = std::min_element(b.begin(), b.end(), [&](Complex x, Complex y) { return std::abs(x - z) < std::abs(y - z); });
        worst = std::max(worst, std::abs(*it - z));
        b.erase(it);
    }
    return worst;
}

std::vector<Complex> values(const CVector& v) { return {v.data(), v.data() + v.size()}; }

CMatrix mat(std::initializer_list<std::initializer_list<Complex>> rows) {
    CMatrix a(Eigen::Index(rows.size()), Eigen::Index(rows.begin()->size()));
    int i = 0;
    for (auto r : rows) {
        int k = 0;
        for (auto v : r) a(i, k++) = v;
        ++i;
    }
    return a;
}

// H = [[iα, 1], [0, iα]], T = J_1 K, chains diag(1, i)
StructuredProblem jordan_2x2(double alpha, const CMatrix& k) {
    StructuredProblem pr;
    pr.kind = ProblemKind::hamiltonian;
    pr.spec = spec_of(EigenCase::ham_imaginary, alpha * I1, {0, 1}, {0, 1});
    pr.A = mat({{alpha * I1, 1.0}, {0.0, alpha * I1}});
    pr.form = symplectic_J(1);
    pr.perturbation = pr.form * k;
    pr.chains = mat({{1.0, 0.0}, {0.0, I1}});
    validate_problem(pr);
    return pr;
}

StructuredProblem generated(EigenCase c, Complex lam, std::vector<int> s, std::vector<int> signs, std::uint64_t seed,
                            std::vector<ComplementEntry> comp = {}) {
    GenerateRequest r;
    r.spec = spec_of(c, lam, std::move(s), std::move(signs));
    r.seed = seed;
    r.complement = std::move(comp);
    return generate_problem(r);
}

std::vector<Complex> predictions(const StructuredAnalysis& a, double t) {
    return predict_eigenvalues(a.lambda0, a.base, t, a.phase);
}

}  // namespace

TEST(Hamiltonian, CheckHamiltonian) {
    EXPECT_TRUE(check_hamiltonian(mat({{1.0, 0.0}, {0.0, -1.0}}), 1e-12));
    EXPECT_FALSE(check_hamiltonian(identity(2), 1e-12));
    EXPECT_TRUE(check_hamiltonian(mat({{I1, 0.7}, {0.0, I1}}), 1e-12));
    EXPECT_THROW(check_hamiltonian(identity(3), 1e-12), DimensionError);
}

TEST(Hamiltonian, ToDeltaHermitian) {
    const CMatrix j = symplectic_J(1);
    auto tri = to_delta_hermitian(j, CMatrix());
    EXPECT_LE((tri.C + I1 * j).norm(), 0.0);
    EXPECT_LE((tri.Delta + I1 * j).norm(), 0.0);
    EXPECT_LE((tri.Delta * tri.C - identity(2)).norm(), 1e-15);
    EXPECT_THROW(to_delta_hermitian(identity(2), CMatrix()), StructureError);

    auto pr = generated(EigenCase::ham_nonimaginary, {0.3, 0.6}, {1, 1}, {}, 3);
    auto t2 = to_delta_hermitian(pr.A, pr.perturbation);
    EXPECT_TRUE(check_structure(t2.C, t2.Delta, 1e-10));
    EXPECT_TRUE(check_structure(t2.D, t2.Delta, 1e-10));
    std::vector<Complex> mapped;
    for (auto z : values(eig(pr.A + 0.01 * pr.perturbation).values)) mapped.push_back(-I1 * z);
    EXPECT_LE(multiset_gap(mapped, values(eig(t2.C + 0.01 * t2.D).values)), 1e-12);
}

TEST(Hamiltonian, PhaseMatrix) {
    EXPECT_EQ((phase_matrix(spec_of(EigenCase::ham_nonimaginary, 1.0, {2})) - identity(2)).norm(), 0.0);
    const CMatrix p2 = phase_matrix(spec_of(EigenCase::ham_nonimaginary, 1.0, {0, 1}));
    EXPECT_EQ((p2 - mat({{1.0, 0.0}, {0.0, -I1}})).norm(), 0.0);
    const CMatrix n = mat({{0.0, 1.0}, {0.0, 0.0}});
    EXPECT_LE((p2.adjoint() * (I1 * n) * p2 - n).norm(), 1e-16);
    const CMatrix p3 = phase_matrix(spec_of(EigenCase::ham_nonimaginary, 1.0, {0, 0, 1}));
    EXPECT_LE((p3 - mat({{1.0, 0.0, 0.0}, {0.0, -I1, 0.0}, {0.0, 0.0, -1.0}})).norm(), 1e-16);
}

TEST(Hamiltonian, NonimaginarySimple) {
    const Complex lam(0.3, 0.6);
    auto pr = build_canonical_pair(spec_of(EigenCase::ham_nonimaginary, lam, {1}), {});
    const CMatrix m = mat({{0.7, Complex(0.2, -0.5)}, {Complex(0.2, 0.5), -1.1}});
    pr.perturbation = structured_perturbation_from(pr.kind, pr.form, m);
    auto a = analyze_nonimaginary(pr, 1);
    const CMatrix xi = pr.primary_chains(), xic = pr.mirror_chains();
    const CMatrix s_hat = xic.adjoint() * pr.form * pr.perturbation * xi;
    EXPECT_NEAR(std::abs(a.S_hat(0, 0) - s_hat(0, 0)), 0.0, 1e-14);
    for (double t : {1e-3, 1e-4}) {
        const Complex pred = lam - t * s_hat(0, 0);
        EXPECT_NEAR(std::abs(predictions(a, t)[0] - pred), 0.0, 1e-15);
        auto w = values(eig(pr.A + t * pr.perturbation).values);
        double best = 1e300, mirror = 1e300;
        for (auto z : w) {
            best = std::min(best, std::abs(z - pred));
            mirror = std::min(mirror, std::abs(z + std::conj(pred)));
        }
        EXPECT_LE(best, 10 * t * t);
        EXPECT_LE(mirror, 10 * t * t);
    }
}

TEST(Hamiltonian, ImaginaryClosedForm) {
    const double alpha = 1.0;
    auto pr = jordan_2x2(alpha, identity(2));
    auto a = analyze_imaginary(pr, 2);
    EXPECT_NEAR(std::abs(a.base.S(0, 0) - 1.0), 0.0, 1e-15);
    for (double t : {1e-2, 1e-4, 1e-6}) {
        auto p = predictions(a, t);
        EXPECT_LE(multiset_gap(p, {I1 * (alpha + std::sqrt(t)), I1 * (alpha - std::sqrt(t))}), 1e-15);
        const double r = std::sqrt(t * (1 + t));
        auto w = values(eig(pr.A + t * pr.perturbation).values);
        EXPECT_LE(multiset_gap(w, {I1 * (alpha + r), I1 * (alpha - r)}), 1e-12);
    }
    ASSERT_EQ(a.persistence.size(), 2u);
    for (const auto& r : a.persistence) {
        EXPECT_EQ(r.status, Persistence::sufficient);
        EXPECT_EQ(r.inertia, r.mu.real() > 0 ? 1 : -1);
    }
    // measured inertia sign Im(x* J x) at each branch
    const double t = 1e-4;
    auto e = eig(pr.A + t * pr.perturbation);
    for (int i = 0; i < 2; ++i) {
        const CVector x = e.vectors.col(i);
        const double im = (x.adjoint() * pr.form * x)(0, 0).imag();
        const bool upper = e.values(i).imag() > alpha;
        EXPECT_EQ(im > 0, upper);
    }

    auto neg = jordan_2x2(alpha, -identity(2));
    auto b = analyze_imaginary(neg, 2);
    EXPECT_NEAR(std::abs(b.base.S(0, 0) + 1.0), 0.0, 1e-15);
    const double tn = 1e-4;
    EXPECT_LE(multiset_gap(predictions(b, tn), {I1 * alpha + std::sqrt(tn), I1 * alpha - std::sqrt(tn)}), 1e-15);
    for (const auto& r : b.persistence) EXPECT_EQ(r.status, Persistence::leaves_axis);
    // eig of [[iα, 1-t], [t, iα]]: real offset ±√(t(1-t))
    auto wn = values(eig(neg.A + tn * neg.perturbation).values);
    const double off = std::sqrt(tn * (1 - tn));
    EXPECT_LE(multiset_gap(wn, {I1 * alpha + off, I1 * alpha - off}), 1e-12);
}

TEST(Hamiltonian, ImaginarySimple) {
    auto pr = build_canonical_pair(spec_of(EigenCase::ham_imaginary, 0.5 * I1, {1}, {1}), {{{0.0, -1.5}, 0}});
    const CMatrix k = mat({{1.2, 0.3}, {0.3, 0.8}});
    pr.perturbation = pr.form * k;
    auto a = analyze_imaginary(pr, 1);
    const CMatrix phi = pr.primary_chains();
    const double mu = (phi.adjoint() * k * phi)(0, 0).real();
    EXPECT_NEAR(std::abs(a.base.roots[0].mu - mu), 0.0, 1e-14);
    EXPECT_NEAR(std::abs(predictions(a, 1e-3)[0] - I1 * (0.5 + 1e-3 * mu)), 0.0, 1e-15);
}

TEST(Hamiltonian, PersistenceRules) {
    // mixed Σ_2 with both γ positive: necessary only
    auto pr = generated(EigenCase::ham_imaginary, 0.5 * I1, {0, 2}, {0, 1}, 5);
    auto a = analyze_imaginary(pr, 2);
    for (const auto& r : a.persistence) EXPECT_NE(r.status, Persistence::sufficient);
    EXPECT_THROW(persistence_analysis(analyze_nonimaginary(generated(EigenCase::ham_nonimaginary, {0.3, 0.6}, {1}, {}, 1), 1)),
                 SpecError);
}

TEST(Hamiltonian, RouteEquivalence) {
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        auto ni = generated(EigenCase::ham_nonimaginary, {0.3, 0.6}, {1, 1, 1}, {}, seed);
        auto im = generated(EigenCase::ham_imaginary, 0.5 * I1, {1, 1, 1}, {0, 1, 1}, seed);
        for (const auto* pr : {&ni, &im}) {
            for (int rho = 1; rho <= 3; ++rho) {
                auto a = pr->spec.eigen_case == EigenCase::ham_imaginary ? analyze_imaginary(*pr, rho)
                                                                          : analyze_nonimaginary(*pr, rho);
                EXPECT_LE(a.route_gap, 1e-10);
                const double t = 1e-4;
                EXPECT_LE(multiset_gap(predictions(a, t), predictions(a.adapter, t)), 1e-10);
                // imaginary case: Ψ_k Hermitian and γ closed under conjugation
                if (pr->spec.eigen_case == EigenCase::ham_imaginary) {
                    for (const auto& psi : a.Psi) EXPECT_LE(hermitian_defect(psi), 1e-12 * std::max(1.0, psi.norm()));
                    std::vector<Complex> g = a.base.gammas, gc;
                    for (auto z : g) gc.push_back(std::conj(z));
                    EXPECT_LE(multiset_gap(g, gc), 1e-10);
                }
            }
        }
    }
}

TEST(Hamiltonian, SemidefiniteCase) {
    auto pr = jordan_2x2(1.0, identity(2));
    auto rep = semidefinite_case(pr, 1);
    EXPECT_TRUE(rep.all_imaginary);
    EXPECT_EQ(rep.block_size, 2);
    EXPECT_DOUBLE_EQ(rep.fractional_order, 0.5);
    ASSERT_EQ(rep.predicted_roots.size(), 2u);
    EXPECT_LE(multiset_gap(rep.predicted_roots, {1.0, -1.0}), 1e-15);

    auto zero = jordan_2x2(1.0, CMatrix::Zero(2, 2));
    EXPECT_THROW(semidefinite_case(zero, 1), NonGenericError);

    EXPECT_THROW(semidefinite_case(jordan_2x2(1.0, -identity(2)), 1), StructureError);
}

TEST(Hamiltonian, SemidefiniteWithComplement) {
    auto pr = build_canonical_pair(spec_of(EigenCase::ham_imaginary, 0.5 * I1, {0, 1}, {0, 1}), {{{0.8, 0.3}, 0}});
    ASSERT_EQ(pr.n(), 4);
    for (double eps : {1.0, 1e-2}) {
        CMatrix k = CMatrix::Zero(4, 4);
        k.diagonal() << 1.0, 1.0, eps, eps;
        pr.perturbation = pr.form * k;
        auto rep = semidefinite_case(pr, 1);
        ASSERT_EQ(rep.w_min_eigenvalues.size(), 1u);
        EXPECT_GT(rep.w_min_eigenvalues[0], 0.0);
        EXPECT_TRUE(rep.all_imaginary);
        for (double t : {1e-2, 1e-3, 1e-4, 1e-5, 1e-6}) {
            auto w = values(eig(pr.A + t * pr.perturbation).values);
            std::sort(w.begin(), w.end(), [](Complex x, Complex y) { return std::abs(x - 0.5 * I1) < std::abs(y - 0.5 * I1); });
            for (int i = 0; i < 2; ++i) EXPECT_LE(std::abs(w[i].real()), 1e-12 * std::max(1.0, pr.A.norm())) << "t=" << t;
        }
    }
}

TEST(Theta, CompanionSpectrumProperty) {
    std::mt19937_64 g(2024);
    std::normal_distribution<double> n;
    std::uniform_int_distribution<int> dim(1, 4);
    for (int trial = 0; trial < 50; ++trial) {
        const int s = dim(g), rho = dim(g);
        CMatrix sm(s, s);
        for (int i = 0; i < s; ++i)
            for (int k = 0; k < s; ++k) sm(i, k) = Complex(n(g), n(g));
        std::vector<Complex> expect;
        for (auto gamma : values(eig(sm).values))
            for (auto mu : rho_roots(gamma, rho)) expect.push_back(mu);
        EXPECT_LE(multiset_gap(values(eig(companion_theta(sm, rho)).values), expect), 1e-8) << "trial " << trial;
    }
}
