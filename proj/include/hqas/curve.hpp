#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hqas/engine.hpp"

namespace hqas {

// One branch of a local spectral curve: x = z^r / r and the expansion
// coefficients tau_l of y around the branch point.
struct CurveComponent {
    int r = 2;
    std::map<int, Rat> tau;
};

// Components are numbered 1..c in the order listed; phi holds the
// polarization phi^{alpha,beta}_{l,m} on labels (alpha, l).
struct LocalCurve {
    std::vector<CurveComponent> components;
    Polarization phi;

    const CurveComponent& component(int alpha) const;
    int size() const { return static_cast<int>(components.size()); }
};

// Throws BadParameters on r < 2, nonpositive or zero-valued tau levels, and
// polarization labels outside the curve.
void validate_curve(const LocalCurve& curve);

// min{l > 0 : tau_l != 0 and r does not divide l}; throws NoS.
int s_alpha(const LocalCurve& curve, int alpha);

struct ComponentAdmissibility {
    int alpha = 0;
    int r = 0;
    int s = 0;
    bool admissible = false;
};

struct AdmissibilityReport {
    bool admissible = false;
    std::vector<ComponentAdmissibility> components;
};

AdmissibilityReport admissible(const LocalCurve& curve);

// Operators -r Phi T W^i_{alpha,k} T^{-1} Phi^{-1}, rescaled to unit diagonal,
// with dilaton v_{alpha,a} = tau^alpha_a for levels a not divisible by r_alpha.
// Throws NotAdmissible unless forced.
StructureSpec build_operators(const LocalCurve& curve, bool force = false);

// Loop-equation coefficient C^{(j)}[k|a] of component alpha in standard
// polarization, for one ordering of the signed levels a.
// Throws UnsupportedPolarization when phi touches alpha.
Rat loop_coeff_C(const LocalCurve& curve, int alpha, int k, int j, const std::vector<long>& a);

// D^{(j)}_i[k|a]: C^{(j)} with i - l - 2j further arguments absorbed into tau.
Rat loop_coeff_D(const LocalCurve& curve, int alpha, int i, int k, int j, const std::vector<long>& a);

struct LoopKey {
    int alpha = 1;
    int i = 1;
    int k = 0;
};

struct LoopMismatch {
    LoopKey key;
    std::string term;
    Rat loop_value;
    Rat conjugation_value;
};

// Compares D^{(j)}_i[k|a] / prod(mult!) with r times the multiset coefficient
// of T W^i_k T^{-1} for every term whose creators come from `pool` and whose
// annihilators are at most `annihilator_cap`. Empty result means agreement.
std::vector<LoopMismatch> check_loop_vs_conjugation(const LocalCurve& curve, const std::vector<LoopKey>& keys,
                                                    const std::vector<Label>& pool, int annihilator_cap);

// Block caps (chi, level) that make givental_transform at (chi_max, q_max)
// touch only determined block entries.
std::pair<int, int> givental_block_caps(const LocalCurve& curve, int chi_max, int q_max);

// Tables of the (r_alpha, s_alpha) structures, keyed by component.
std::map<int, FTable> givental_blocks(const LocalCurve& curve, int chi_max, int q_max);

// Applies exp(sum (tau_l + delta_{l,s})/l d_l) and exp(hbar/2 sum phi/(l m) d_l d_m)
// to the product of block partition functions. Blocks use component 1;
// block alpha is relabelled to component alpha. With `heat_order`, the
// polarization exponential is expanded only to that order.
// Throws TruncationTooCoarse when a needed block entry lies beyond the block caps.
FTable givental_transform(const LocalCurve& curve, const std::map<int, FTable>& blocks, int chi_max, int q_max,
                          std::optional<int> heat_order = std::nullopt);

// Bouchard-Eynard recursion on a one-component curve in standard
// polarization, in the basis z^{-l-1} dz. Coefficients beyond the support
// bound sum l <= s (2g - 2 + n) are taken to vanish.
class BERecursion {
public:
    explicit BERecursion(const LocalCurve& curve);

    int r() const { return r_; }
    int s() const { return s_; }

    // Coefficient of prod z_l^{-a_l - 1} dz_l in omega_{g,n}(z_1, ...), with
    // z_1 the distinguished argument. Throws NotRational on a non-rational residue.
    Rat value(int g, const std::vector<int>& args);

private:
    using Poly = LaurentSeries<Cyc>;

    Poly block(int h, const std::vector<int>& ws, const std::vector<int>& bs);
    Poly kernel_product(const std::vector<int>& subset, int order);
    Rat compute(int g, int a1, const std::vector<int>& rest);

    int r_ = 2;
    int s_ = 1;
    std::map<int, Rat> tau_;
    std::map<std::tuple<int, int, std::vector<int>>, Rat> memo_;
    std::map<std::tuple<int, std::vector<int>, std::vector<int>>, Poly> block_memo_;
    std::map<std::vector<int>, Poly> kernel_memo_;
};

// omega_{g,n} coefficients with every label <= level_cap, keyed by sorted
// labels and evaluated with the smallest label distinguished.
FTable be_recursion(const LocalCurve& curve, int g, int n, int level_cap);

}  // namespace hqas
