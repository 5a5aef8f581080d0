#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include <eigperturb/generate.hpp>

using namespace eigperturb;

namespace {

const Complex I1(0, 1);

CMatrix random_matrix(int r, int c, unsigned seed) {
    std::mt19937 g(seed);
    std::normal_distribution<double> n;
    CMatrix a(r, c);
    for (int i = 0; i < r; ++i)
        for (int k = 0; k < c; ++k) a(i, k) = Complex(n(g), n(g));
    return a;
}

// naive product
CMatrix triple_loop(const CMatrix& a, const CMatrix& b) {
    CMatrix c = CMatrix::Zero(a.rows(), b.cols());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < b.cols(); ++j)
            for (int k = 0; k < a.cols(); ++k) c(i, j) += a(i, k) * b(k, j);
    return c;
}

// multiset distance after greedy nearest pairing; fine for well separated lists
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

int numeric_rank(const CMatrix& a) {
    auto s = svd_values(a);
    const double tol = 1e-10 * std::max(1.0, s.empty() ? 0.0 : s.front());
    return int(std::count_if(s.begin(), s.end(), [&](double x) { return x > tol; }));
}

JordanSpec spec_of(EigenCase c, Complex lam, std::vector<int> s, std::vector<int> signs = {}) {
    JordanSpec sp;
    sp.m = int(s.size());
    sp.s = std::move(s);
    sp.signs = std::move(signs);
    sp.eigenvalue = lam;
    sp.eigen_case = c;
    return sp;
}

}  // namespace

// ---------------------------------------------------------------- linalg

TEST(Linalg, MatmulExamples) {
    const CMatrix a = random_matrix(2, 2, 1);
    EXPECT_LE((matmul(identity(2), a) - a).norm(), 0.0);
    CMatrix n = CMatrix::Zero(2, 2);
    n(0, 1) = 1;
    EXPECT_EQ(matmul(n, n).norm(), 0.0);
    const CMatrix x = random_matrix(3, 3, 2), y = random_matrix(3, 3, 3);
    EXPECT_LE((matmul(x, y) - triple_loop(x, y)).norm(), 1e-13);
    EXPECT_THROW(matmul(random_matrix(2, 3, 4), random_matrix(2, 3, 5)), DimensionError);
}

TEST(Linalg, SolveExamples) {
    const CMatrix b = random_matrix(3, 2, 6);
    EXPECT_LE((solve(identity(3), b) - b).norm(), 1e-15);
    EXPECT_LE((solve(2.0 * identity(3), identity(3)) - 0.5 * identity(3)).norm(), 1e-15);
    const CMatrix a = random_matrix(5, 5, 7) + 5.0 * identity(5);
    const CMatrix rhs = random_matrix(5, 3, 8);
    EXPECT_LE((a * solve(a, rhs) - rhs).norm(), 1e-12 * rhs.norm());
    CMatrix sing = CMatrix::Zero(2, 2);
    sing(0, 0) = 1;
    EXPECT_THROW(solve(sing, identity(2)), SingularMatrixError);
}

TEST(Linalg, SolveMatmulRoundTrip) {
    for (unsigned s = 0; s < 10; ++s) {
        const CMatrix a = random_matrix(6, 6, 100 + s) + 4.0 * identity(6);
        const CMatrix x = random_matrix(6, 2, 200 + s);
        EXPECT_LE((solve(a, matmul(a, x)) - x).norm(), 1e-10 * x.norm());
    }
}

TEST(Linalg, EigExamples) {
    CMatrix d = CMatrix::Zero(3, 3);
    d(0, 0) = 1;
    d(1, 1) = 2.0 * I1;
    d(2, 2) = -3;
    EXPECT_LE(multiset_gap(values(eig(d).values), {1.0, 2.0 * I1, -3.0}), 1e-14);

    CMatrix nil = CMatrix::Zero(2, 2);
    nil(0, 1) = 1;
    nil(1, 0) = 1e-4;
    EXPECT_LE(multiset_gap(values(eig(nil).values), {1e-2, -1e-2}), 1e-15);

    EXPECT_LE(multiset_gap(values(eig(symplectic_J(1)).values), {I1, -I1}), 1e-15);
}

TEST(Linalg, EigReconstruction) {
    for (unsigned s = 0; s < 10; ++s) {
        CMatrix a = random_matrix(7, 7, 300 + s);
        auto e = eig(a);
        EXPECT_LE((a * e.vectors - e.vectors * e.values.asDiagonal()).norm(), 1e-10 * a.norm());
        for (int k = 0; k < 7; ++k) EXPECT_NEAR(e.vectors.col(k).norm(), 1.0, 1e-12);
    }
}

TEST(Linalg, Orthonormalize) {
    const CMatrix q0 = orthonormalize(random_matrix(5, 3, 9));
    const CMatrix q1 = orthonormalize(q0);
    for (int k = 0; k < 3; ++k) EXPECT_NEAR(std::abs(q0.col(k).dot(q1.col(k))), 1.0, 1e-13);

    CMatrix ones = CMatrix::Ones(2, 1);
    const CMatrix q = orthonormalize(ones);
    EXPECT_NEAR(std::abs(q(0, 0)), 1 / std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(std::abs(q(1, 0)), 1 / std::sqrt(2.0), 1e-15);

    const CMatrix r = orthonormalize(random_matrix(6, 3, 10));
    EXPECT_LE((r.adjoint() * r - identity(3)).norm(), 1e-13);

    CMatrix dep = random_matrix(4, 2, 11);
    dep.col(1) = dep.col(0) * Complex(2, 1);
    EXPECT_THROW(orthonormalize(dep), RankDeficiencyError);
}

TEST(Linalg, SvdValues) {
    auto s = svd_values(identity(3));
    ASSERT_EQ(s.size(), 3u);
    for (double v : s) EXPECT_NEAR(v, 1.0, 1e-15);

    CMatrix d = CMatrix::Zero(2, 2);
    d(0, 0) = 3;
    s = svd_values(d);
    EXPECT_NEAR(s[0], 3.0, 1e-15);
    EXPECT_NEAR(s[1], 0.0, 1e-15);

    const CMatrix a = random_matrix(4, 2, 12);
    s = svd_values(a);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(a.adjoint() * a);
    std::vector<double> oracle{std::sqrt(es.eigenvalues()(1)), std::sqrt(es.eigenvalues()(0))};
    EXPECT_NEAR(s[0], oracle[0], 1e-12);
    EXPECT_NEAR(s[1], oracle[1], 1e-12);
}

TEST(Linalg, SvdAdjointInvariance) {
    for (unsigned k = 0; k < 5; ++k) {
        const CMatrix a = random_matrix(5, 3, 400 + k);
        auto s1 = svd_values(a), s2 = svd_values(a.adjoint());
        ASSERT_EQ(s1.size(), s2.size());
        for (size_t i = 0; i < s1.size(); ++i) EXPECT_NEAR(s1[i], s2[i], 1e-12);
    }
}

TEST(Linalg, NonFiniteInputRejected) {
    CMatrix a = identity(2);
    a(0, 1) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(eig(a), NonFiniteError);
    EXPECT_THROW(solve(a, identity(2)), NonFiniteError);
}

TEST(Linalg, ExpmMatchesTaylor) {
    const CMatrix a = 0.3 * random_matrix(4, 4, 13) / random_matrix(4, 4, 13).norm();
    CMatrix term = identity(4), sum = identity(4);
    for (int k = 1; k < 30; ++k) {
        term = term * a / double(k);
        sum += term;
    }
    EXPECT_LE((expm(a) - sum).norm(), 1e-14);
}

// ---------------------------------------------------------------- canonical

TEST(Canonical, NilpotentExamples) {
    EXPECT_EQ(build_nilpotent(spec_of(EigenCase::delta_real, 0.0, {2})).norm(), 0.0);
    CMatrix n = build_nilpotent(spec_of(EigenCase::delta_real, 0.0, {0, 1}));
    CMatrix expect = CMatrix::Zero(2, 2);
    expect(0, 1) = 1;
    EXPECT_EQ((n - expect).norm(), 0.0);
    n = build_nilpotent(spec_of(EigenCase::delta_real, 0.0, {1, 1}));
    expect = CMatrix::Zero(3, 3);
    expect(1, 2) = 1;
    EXPECT_EQ((n - expect).norm(), 0.0);
    EXPECT_EQ(numeric_rank(n), 1);
    EXPECT_EQ((n * n).norm(), 0.0);
}

TEST(Canonical, NilpotentRankFormula) {
    for (std::vector<int> s : {std::vector<int>{1, 1, 1}, {2, 0, 1}, {0, 2, 1, 1}, {1, 0, 0, 2}, {3, 1, 2}}) {
        auto spec = spec_of(EigenCase::delta_real, 0.0, s);
        const CMatrix n = build_nilpotent(spec);
        CMatrix pw = identity(spec.p());
        for (int k = 1; k <= spec.m; ++k) {
            pw = pw * n;
            int expect = 0;
            for (int j = k + 1; j <= spec.m; ++j) expect += (j - k) * spec.count(j);
            EXPECT_EQ(numeric_rank(pw), expect) << "k=" << k;
        }
        EXPECT_EQ(pw.norm(), 0.0);
    }
}

TEST(Canonical, FormExamples) {
    CMatrix x = CMatrix::Zero(2, 2);
    x(0, 1) = x(1, 0) = 1;
    EXPECT_EQ((build_form_T(spec_of(EigenCase::delta_nonreal, {1, 1}, {1})) - x).norm(), 0.0);
    EXPECT_EQ((build_form_T(spec_of(EigenCase::delta_real, 0.0, {1}, {1})) - identity(1)).norm(), 0.0);
    EXPECT_EQ((build_form_T(spec_of(EigenCase::delta_real, 0.0, {0, 1}, {0, 1})) - x).norm(), 0.0);
}

TEST(Canonical, RealFormSignature) {
    auto spec = spec_of(EigenCase::delta_real, 0.0, {2, 1, 2}, {1, 0, 2});
    const CMatrix g = build_form_T(spec);
    EXPECT_LE(hermitian_defect(g), 0.0);
    EXPECT_LE((g * g - identity(spec.p())).norm(), 1e-15);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(g);
    int pos = 0;
    for (int i = 0; i < spec.p(); ++i) pos += es.eigenvalues()(i) > 0;
    // an odd block contributes (j+1)/2 of its sign and (j-1)/2 of the other; an even block j/2 each
    int expect = 0;
    for (int j = 1; j <= spec.m; ++j) {
        const int plus = spec.sign_count(j), minus = spec.count(j) - plus;
        expect += j % 2 ? plus * (j + 1) / 2 + minus * (j - 1) / 2 : spec.count(j) * j / 2;
    }
    EXPECT_EQ(pos, expect);
}

TEST(Canonical, CanonicalPairExamples) {
    auto pr = build_canonical_pair(spec_of(EigenCase::delta_real, 0.0, {1}, {1}), {});
    EXPECT_EQ(pr.A.rows(), 1);
    EXPECT_EQ(std::abs(pr.A(0, 0)), 0.0);
    EXPECT_EQ(pr.form(0, 0), Complex(1.0));

    pr = build_canonical_pair(spec_of(EigenCase::delta_nonreal, {1, 1}, {1}), {});
    CMatrix c = CMatrix::Zero(2, 2);
    c(0, 0) = Complex(1, 1);
    c(1, 1) = Complex(1, -1);
    EXPECT_LE((pr.A - c).norm(), 0.0);
    EXPECT_LE((pr.form - exchange_form(1)).norm(), 0.0);

    // imaginary Hamiltonian block: chain coordinates give i(αI + N) and Gram iΓ_2
    pr = build_canonical_pair(spec_of(EigenCase::ham_imaginary, I1, {0, 1}, {0, 1}), {});
    const CMatrix u = pr.chains;
    CMatrix h = CMatrix::Zero(2, 2);
    h(0, 0) = h(1, 1) = h(0, 1) = I1;
    EXPECT_LE((solve(u, pr.A * u) - h).norm(), 1e-14);
    CMatrix ig = CMatrix::Zero(2, 2);
    ig(0, 1) = ig(1, 0) = I1;
    EXPECT_LE((u.adjoint() * pr.form * u - ig).norm(), 1e-14);
    EXPECT_EQ(pr.form, symplectic_J(1));
}

TEST(Canonical, ComplementAndCollision) {
    auto spec = spec_of(EigenCase::delta_real, 0.5, {1, 1}, {1, 1});
    auto pr = build_canonical_pair(spec, {{{-1.0, 0.0}, 0}, {{2.0, 1.0}, 0}});
    EXPECT_EQ(pr.n(), 3 + 1 + 2);
    EXPECT_EQ(pr.complement_spectrum.size(), 3u);
    EXPECT_THROW(build_canonical_pair(spec, {{{0.7, 0.0}, 0}}), SpecError);

    auto hs = spec_of(EigenCase::ham_nonimaginary, {0.3, 0.6}, {1});
    EXPECT_THROW(build_canonical_pair(hs, {{{0.0, 1.5}, 0}}), SpecError);  // one imaginary entry cannot balance
    auto hp = build_canonical_pair(hs, {{{0.0, 1.5}, 0}, {{0.0, -1.5}, 0}});
    EXPECT_EQ(hp.n(), 4);
    validate_problem(hp);
}

TEST(Canonical, SimilarityExamples) {
    const CMatrix form = exchange_form(1);
    EXPECT_EQ((random_structured_similarity(form, 0.0, 1) - identity(2)).norm(), 0.0);
    for (std::uint64_t s = 0; s < 5; ++s) {
        const CMatrix u = random_structured_similarity(identity(4), 1.0, s);
        EXPECT_LE((u.adjoint() * u - identity(4)).norm(), 1e-12);
    }
    const CMatrix u = random_structured_similarity(form, 0.5, 3);
    EXPECT_LE((u.adjoint() * form * u - form).norm(), 1e-12 * form.norm());
    const CMatrix j = symplectic_J(3);
    const CMatrix v = random_structured_similarity(j, 2.0, 4);
    EXPECT_LE((v.adjoint() * j * v - j).norm(), 1e-12 * j.norm() * v.squaredNorm());
    EXPECT_THROW(random_structured_similarity(form, 2.5, 1), SpecError);
}

TEST(Canonical, PerturbationExamples) {
    EXPECT_LE((structured_perturbation_from(ProblemKind::delta_hermitian, identity(3), identity(3)) - identity(3)).norm(),
              1e-15);
    const CMatrix t = structured_perturbation_from(ProblemKind::hamiltonian, symplectic_J(1), identity(2));
    CMatrix expect = CMatrix::Zero(2, 2);
    expect(0, 1) = -1;
    expect(1, 0) = 1;
    EXPECT_EQ((t - expect).norm(), 0.0);
    EXPECT_LE(hermitian_defect(symplectic_J(1) * t), 0.0);
    const CMatrix form = build_form_T(spec_of(EigenCase::delta_real, 0.0, {2, 2}, {1, 1}));
    const CMatrix d = random_structured_perturbation(ProblemKind::delta_hermitian, form, 5);
    EXPECT_LE(hermitian_defect(form * d), 1e-14 * d.norm());
}

TEST(Canonical, ConjugateProblem) {
    auto spec = spec_of(EigenCase::delta_nonreal, {0.3, 0.6}, {1, 1});
    auto pr = build_canonical_pair(spec, {{{-1.5, 0.0}, 0}});
    pr.perturbation = random_structured_perturbation(pr.kind, pr.form, 9);
    auto same = conjugate_problem(pr, identity(pr.n()));
    EXPECT_LE((same.A - pr.A).norm(), 1e-15);
    const CMatrix u = random_structured_similarity(pr.form, 1.0, 11);
    auto moved = conjugate_problem(pr, u);
    EXPECT_LE(multiset_gap(values(eig(moved.A + 0.1 * moved.perturbation).values),
                           values(eig(pr.A + 0.1 * pr.perturbation).values)),
              1e-10);
    const CMatrix b = target_block(spec);
    EXPECT_LE((moved.A * moved.chains - moved.chains * b).norm(), 1e-9 * moved.chains.norm());
    // the form is left in place: U is form-unitary
    EXPECT_LE(hermitian_defect(moved.form * moved.A), 1e-12 * moved.A.norm());
}

TEST(Canonical, ValidateRejectsBrokenProblems) {
    auto pr = build_canonical_pair(spec_of(EigenCase::delta_real, 0.0, {0, 1}, {0, 1}), {});
    auto bad = pr;
    bad.chains = CMatrix(0, 0);
    EXPECT_THROW(validate_problem(bad), StructureError);
    bad = pr;
    bad.A(0, 1) += 0.5;
    EXPECT_THROW(validate_problem(bad), StructureError);
    JordanSpec sp = spec_of(EigenCase::delta_real, {0.0, 1.0}, {1});
    EXPECT_THROW(sp.validate(), SpecError);
    sp = spec_of(EigenCase::delta_real, 0.0, {1, 0});
    EXPECT_THROW(sp.validate(), SpecError);
}

// ---------------------------------------------------------------- generator

TEST(Generate, DeterministicUnderSeed) {
    GenerateRequest r;
    r.spec = spec_of(EigenCase::ham_imaginary, I1, {0, 1}, {0, 1});
    r.seed = 7;
    auto a = generate_problem(r), b = generate_problem(r);
    EXPECT_EQ((a.A - b.A).norm(), 0.0);
    EXPECT_EQ((a.perturbation - b.perturbation).norm(), 0.0);
    EXPECT_EQ(a.n(), 2);
    r.seed = 8;
    auto c = generate_problem(r);
    EXPECT_GT((a.perturbation - c.perturbation).norm(), 0.0);
}

TEST(Generate, SpectrumSymmetryAllCases) {
    struct Case {
        EigenCase c;
        Complex lam;
        std::vector<int> signs;
        std::vector<ComplementEntry> comp;
    };
    const std::vector<Case> cases = {
        {EigenCase::delta_nonreal, {0.3, 0.6}, {}, {{{-1.5, 0.0}, 0}, {{1.5, -0.5}, 0}}},
        {EigenCase::delta_real, 0.3, {1, 1, 1}, {{{-1.5, 0.0}, 0}, {{1.5, 1.0}, 0}}},
        {EigenCase::ham_nonimaginary, {0.3, 0.6}, {}, {{{0.0, -1.5}, 0}, {{0.0, 1.5}, 0}}},
        {EigenCase::ham_imaginary, {0.0, 0.5}, {0, 1, 1}, {{{0.0, 1.8}, 0}, {{0.0, -1.5}, 0}}}};
    for (const auto& cs : cases) {
        for (std::uint64_t seed = 1; seed <= 5; ++seed) {
            GenerateRequest r;
            r.spec = spec_of(cs.c, cs.lam, {1, 1, 1}, cs.signs);
            r.complement = cs.comp;
            r.seed = seed;
            auto pr = generate_problem(r);
            validate_problem(pr);
            for (double t : {1e-2, 1e-5}) {
                auto w = values(eig(pr.A + t * pr.perturbation).values);
                std::vector<Complex> mv;
                for (auto z : w) mv.push_back(mirror_of(cs.c, z));
                // clusters are only resolved to about eps^(1/3); compare at that scale
                EXPECT_LE(multiset_gap(w, mv), 1e-8) << to_string(cs.c) << " seed " << seed;
            }
        }
    }
}

TEST(Generate, GenericityRejection) {
    GenerateRequest r;
    r.spec = spec_of(EigenCase::delta_real, 0.2, {1, 1, 1}, {1, 1, 1});
    r.seed = 3;
    auto pr = generate_problem(r);
    EXPECT_TRUE(is_generic(pr, r.generic_condition_max));
    r.perturbation = PerturbationMode::none;
    auto z = generate_problem(r);
    EXPECT_EQ(z.perturbation.norm(), 0.0);
    EXPECT_FALSE(is_generic(z, 1e6));
}

TEST(Generate, JkModes) {
    GenerateRequest r;
    r.spec = spec_of(EigenCase::ham_imaginary, {0.0, 0.5}, {0, 2}, {0, 2});
    r.seed = 5;
    r.perturbation = PerturbationMode::jk_positive;
    auto pr = generate_problem(r);
    const CMatrix k = -pr.form * pr.perturbation;
    EXPECT_LE(hermitian_defect(k), 1e-12 * k.norm());
    Eigen::SelfAdjointEigenSolver<CMatrix> es(k);
    EXPECT_GT(es.eigenvalues().minCoeff(), 0.0);

    r.perturbation = PerturbationMode::jk_negative_on_chains;
    auto neg = generate_problem(r);
    const CMatrix kn = -neg.form * neg.perturbation;
    const CMatrix heads = orthonormalize(neg.chains.middleCols(neg.spec.position_offset(2, 1), 2));
    Eigen::SelfAdjointEigenSolver<CMatrix> eh(heads.adjoint() * kn * heads);
    EXPECT_LT(eh.eigenvalues().maxCoeff(), 0.0);
}
