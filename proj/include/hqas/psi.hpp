#pragma once

#include <string>
#include <vector>

#include "hqas/arith.hpp"

namespace hqas {

// Root-of-unity sums
//   Psi^{(j)}(a_{2j+1},...,a_i) = 1/i! * sum over ordered tuples of distinct
//   m_1..m_i in {0..r-1} of prod_{pairs} th^{m+m'}/(th^{m'}-th^{m})^2 * prod th^{-m_l a_l}
// with i = |args| + 2j. All entry points throw ArityOutOfRange unless 1 <= i <= r.

// Psi^{(0)} through the set-partition formula.
Rat psi0(int r, const std::vector<long>& args);

// Psi^{(j)} by iterated pair reduction down to Psi^{(0)}; memoized.
Rat psi(int r, int j, const std::vector<long>& args);

// Direct summation in Q(theta_r).
Rat psi_brute(int r, int j, const std::vector<long>& args);

// Strips entries divisible by r using the zero-factorization rule.
Rat psi_zero_strip(int r, int j, const std::vector<long>& args);

// Normalized memo key: entries reduced into {0..r-1} and sorted.
std::vector<long> psi_normalize(int r, const std::vector<long>& args);

// Identity families checked by psi_identity_suite.
struct PsiIdentityResult {
    std::string name;
    long checked = 0;
    std::vector<std::string> failures;
};

// Runs the oracle comparison psi = psi_brute for r <= brute_r_max (psi on
// every argument tuple in {-r..r}, psi_brute on every ordered residue tuple),
// and the special-value identities for r <= special_r_max: small-arity
// closed forms, the (r-1,...,r-1,i-1) and (-s,...,-s,(i-1)s) evaluations,
// constant-argument values, zero stripping, and the i = 4 formulas for
// r in {4,5,6}.
std::vector<PsiIdentityResult> psi_identity_suite(int brute_r_max = 6, int special_r_max = 7);

}  // namespace hqas
