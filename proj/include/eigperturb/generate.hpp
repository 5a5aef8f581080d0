#pragma once

#include <string>

#include "verifier.hpp"

namespace eigperturb {

// random: T or D from a random Hermitian M
// jk_positive: Hamiltonian T = J K with K positive definite
// jk_negative_on_chains: T = J K, K indefinite and negative definite on the eigenvector span
// none: zero perturbation
enum class PerturbationMode { random, jk_positive, jk_negative_on_chains, none };

inline const char* to_string(PerturbationMode m) {
    switch (m) {
        case PerturbationMode::random: return "random";
        case PerturbationMode::jk_positive: return "jk_positive";
        case PerturbationMode::jk_negative_on_chains: return "jk_negative_on_chains";
        case PerturbationMode::none: return "none";
    }
    return "?";
}

inline PerturbationMode perturbation_mode_from_string(const std::string& s) {
    if (s == "random") return PerturbationMode::random;
    if (s == "jk_positive") return PerturbationMode::jk_positive;
    if (s == "jk_negative_on_chains") return PerturbationMode::jk_negative_on_chains;
    if (s == "none") return PerturbationMode::none;
    throw SpecError("unknown perturbation mode '" + s + "'");
}

struct GenerateRequest {
    JordanSpec spec;
    std::vector<ComplementEntry> complement;
    std::uint64_t seed = 0;
    double similarity_magnitude = 0.3;
    PerturbationMode perturbation = PerturbationMode::random;
    bool require_generic = true;
    double generic_condition_max = 1e6;
    int max_attempts = 64;
};

inline bool is_generic(const StructuredProblem& pr, double cmax) {
    try {
        for (int rho : active_orders(pr.spec)) {
            auto a = analyze_order(pr, rho);
            for (double c : a->base.W_condition)
                if (!(c <= cmax)) return false;
        }
    } catch (const NonGenericError&) {
        return false;
    }
    return true;
}

inline CMatrix jk_perturbation(const StructuredProblem& pr, PerturbationMode mode, std::uint64_t seed) {
    if (pr.kind != ProblemKind::hamiltonian) throw SpecError("T = J K perturbations need a Hamiltonian problem");
    const auto n = pr.n();
    CMatrix b = detail::gaussian_matrix(n, n, seed);
    CMatrix k = b.adjoint() * b / double(n) + 0.1 * identity(n);
    if (mode == PerturbationMode::jk_negative_on_chains) {
        const CMatrix heads = detail::heads(pr.primary_chains(), pr.spec, 1);
        const CMatrix q = orthonormalize(heads);
        const double c = 2.0 * svd_values(k).front() + 1.0;
        k -= c * q * q.adjoint();
    }
    k = (k + k.adjoint()) / 2.0;
    return pr.form * k;  // T = J K
}

inline StructuredProblem generate_problem(const GenerateRequest& req) {
    auto pr = build_canonical_pair(req.spec, req.complement);
    pr.seed = req.seed;
    pr.similarity_magnitude = req.similarity_magnitude;
    const CMatrix u = random_structured_similarity(pr.form, req.similarity_magnitude, detail::derive_seed(req.seed, 1));
    pr = conjugate_problem(pr, u);
    if (req.perturbation == PerturbationMode::none) return pr;
    for (int attempt = 0; attempt < req.max_attempts; ++attempt) {
        const auto s = detail::derive_seed(req.seed, 1000 + attempt);
        if (req.perturbation == PerturbationMode::random)
            pr.perturbation = random_structured_perturbation(pr.kind, pr.form, s);
        else
            pr.perturbation = jk_perturbation(pr, req.perturbation, s);
        validate_problem(pr);
        if (!req.require_generic || is_generic(pr, req.generic_condition_max)) return pr;
    }
    throw NonGenericError("no generic perturbation found within the attempt budget", 0, 0.0);
}

}  // namespace eigperturb
