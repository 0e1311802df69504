#pragma once

#include <utility>
#include <vector>

#include "hqas/engine.hpp"

namespace hqas {

// Coefficient of hbar^j :J_{alpha_1}...: in W^i_k of W(gl_r), summed over orderings of alpha:
// (1/r) i!/(2^j j!(i-2j)!) Psi^{(j)}(alpha) when sum alpha = r(k-i+1), else 0.
Rat wgl_coeff(int r, int i, int k, int j, const std::vector<long>& alpha);

// d^i = i - 1 - floor(s(i-1)/r).
int frak_d(int r, int s, int i);

bool coprime(int a, int b);
// r = +-1 mod s.
bool admissible_rs(int r, int s);

// q = rk + (s-r)(i-1) for (i,k) in the index set k >= d^i + delta_{i,1}; throws NotInIndexSet.
int pi_s(int r, int s, int i, int k);
// Inverse of pi_s; throws NotInIndexSet when q is not attained.
std::pair<int, int> pi_s_inv(int r, int s, int q);

// Dilaton-shifted W(gl_r) structure with J_{-s} -> J_{-s} - 1 on one component.
// Throws NotCoprime, NotAdmissible (unless forced), BadParameters.
StructureSpec build_coxeter(int r, int s, bool reduced = false, bool force = false);

// The crosscapped (r-1)-cycle class on two components, with J^1_0 = hbar^{1/2} q = -J^2_0.
// Throws SDoesNotDivideR, BadParameters.
StructureSpec build_cycle_rm1(int r, int s, const Rat& q);

// Partition of r attached to s (throws NoPartition unless r = +-1 mod s or s = r + 1).
std::vector<int> s_to_partition(int r, int s);
// lambda(a) = smallest m with lambda_1 + ... + lambda_m >= a.
int lambda_of(const std::vector<int>& lambda, int a);
bool lambda_good(const std::vector<int>& lambda, int i, int k);
// Whether some partition lambda of r has the same good modes as the index set of (r, s).
bool sets_agree(int r, int s);

// Closed forms for F_{0,3} and F_{1,1}; f03_closed throws NotAdmissible.
Rat f03_closed(int r, int s, int q1, int q2, int q3);
Rat f11_closed(int r, int s, int q);

struct ClosedFormMismatch {
    int r = 0;
    int s = 0;
    std::vector<int> idx;  // one level for F_{1,1}, three for F_{0,3}
    Rat engine;
    Rat closed;
};

struct ClosedFormReport {
    std::vector<std::pair<int, int>> pairs;
    long checked = 0;
    long negated = 0;
    std::vector<ClosedFormMismatch> mismatches;
};

// Engine F_{0,3} and F_{1,1} against the closed forms for every admissible
// coprime (r, s) with r <= r_max, on all variable levels up to s.
ClosedFormReport check_closed_forms(int r_max);

}  // namespace hqas
