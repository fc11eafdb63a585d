#pragma once

#include <optional>

#include "cansub/kisin.hpp"

namespace cansub {

/// Output of the level-one canonical subgroup solver.
/// L_basis columns (in the module's given basis) span the unique phi-stable
/// direct summand congruent to Fil^1 mod u^{e(1-w)}; the canonical subgroup's
/// module is the quotient, presented by N_matrix on the complementary adapted
/// basis vectors.
struct CanSubResult {
    Rat w;
    SeriesMatrix B;        // d x (h-d), the solved fixed point
    SeriesMatrix D;        // (h-d) x (h-d), matrix of phi on the summand
    SeriesMatrix L_basis;  // h x (h-d)
    SeriesMatrix N_matrix; // d x d, matrix of phi on the quotient
    int iterations = 0;
    std::int64_t residual_val = 0; // certified valuation of the stability residual
    AdaptedPresentation ad;
    std::int64_t gamma = 0; // contraction exponent ep(1-w) - ew
};

/// Fixed-point recursion for B; optional custom initial iterate (uniqueness
/// tests restart from perturbed integral matrices).
CanSubResult solve_canonical(const KisinModule& M,
                             std::optional<SeriesMatrix> initial_B = std::nullopt);

/// The summand and quotient as Kisin modules (matrices D and N_matrix).
KisinModule summand_module(const KisinModule& M, const CanSubResult& res);
KisinModule quotient_module(const KisinModule& M, const CanSubResult& res);

/// Column span of L_basis equals the adapted Fil^1 span modulo u^{e*i}.
bool verify_frobenius_kernel(const CanSubResult& res, const KisinModule& M, const Rat& i);

/// Matrix of phi on M / span(L_basis) in a complementary basis (completed via
/// the Smith transform when no complement is given).
KisinModule quotient_presentation(const KisinModule& M, const SeriesMatrix& L_basis,
                                  std::optional<SeriesMatrix> complement = std::nullopt);

/// Theorem clause (b): the dual solver's summand equals the annihilator of
/// this solver's summand, as column spans at precision.
bool duality_check(const KisinModule& M);

} // namespace cansub
