#pragma once

#include <climits>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hqas/arith.hpp"

namespace hqas {

// A variable label (component alpha >= 1, positive level q): x^alpha_q.
using Label = std::pair<int, int>;

std::string to_string(const Label& l);

// Mode J_{alpha,l}; l > 0 is hbar d/dx_l, l < 0 is (-l) x_{-l}.
struct JIndex {
    int comp = 1;
    int level = 1;
    friend auto operator<=>(const JIndex&, const JIndex&) = default;
};

// One normal-ordered monomial hbar^j C :J...J:. Creators and annihilators
// are kept sorted by (component, level).
struct OpTerm {
    HalfInt hbar;
    std::vector<JIndex> creators;
    std::vector<JIndex> annihilators;
    Rat coeff;

    // Grading degree: number of modes plus twice the hbar power.
    int degree() const {
        return static_cast<int>(creators.size() + annihilators.size()) + hbar.doubled;
    }
    void canonicalize();
    std::string str() const;
};

struct TermShape {
    int hbar2;
    std::vector<JIndex> creators;
    std::vector<JIndex> annihilators;
    friend auto operator<=>(const TermShape&, const TermShape&) = default;
};

TermShape shape_of(const OpTerm& t);

// Sums coefficients of equal shapes and drops zero terms; output is sorted.
std::vector<OpTerm> merge_terms(const std::vector<OpTerm>& terms);

// Dilaton data v_{alpha,a}: J_{alpha,-a} -> J_{alpha,-a} + v_{alpha,a}.
using DilatonShifts = std::map<Label, Rat>;

// Symmetric polarization phi^{alpha,beta}_{l,m}, stored with both orders.
class Polarization {
public:
    Polarization() = default;
    // Throws AsymmetricPhi unless entries(a,b) == entries(b,a) for all pairs.
    explicit Polarization(const std::map<std::pair<Label, Label>, Rat>& entries);
    // Builds a symmetric matrix from entries listed once per unordered pair.
    static Polarization from_unordered(const std::vector<std::tuple<Label, Label, Rat>>& entries);

    Rat at(const Label& a, const Label& b) const;
    bool empty() const { return entries_.empty(); }
    // Partners b with phi(a,b) != 0.
    std::vector<std::pair<Label, Rat>> row(const Label& a) const;
    const std::map<std::pair<Label, Label>, Rat>& entries() const { return entries_; }
    Polarization operator+(const Polarization& o) const;
    Polarization operator-() const;

private:
    std::map<std::pair<Label, Label>, Rat> entries_;
};

// Term-level conjugations.
std::vector<OpTerm> dilaton_shift(const OpTerm& term, const DilatonShifts& shifts);
std::vector<OpTerm> polarization_shift(const OpTerm& term, const Polarization& phi);

// ---------------------------------------------------------------------------
// Lazy operator families.

struct EnumRequest {
    // Multiset of (component, positive level) allowed as creators J_{alpha,-level}.
    std::vector<Label> pool;
    int annihilator_cap = INT_MAX;
    HalfInt hbar_cap = HalfInt{INT_MAX / 2};
    int degree_cap = INT_MAX;
    // Optional cap on sum_alpha weight[alpha] * level over annihilators.
    std::optional<Rat> weighted_sum_cap;
    std::map<int, Rat> weights;

    Rat weight(int comp) const;
};

// Request handed to raw mode sources before conjugation. Creators are
// allowed at the listed labels up to the given multiplicity.
struct RawRequest {
    std::map<Label, int> creator_max;
    int annihilator_cap = INT_MAX;
    int max_annihilators = INT_MAX;
    int hbar_cap2 = INT_MAX;
    std::optional<Rat> weighted_sum_cap;
    std::map<int, Rat> weights;

    Rat weight(int comp) const;
};

class CoeffFamily {
public:
    virtual ~CoeffFamily() = default;
    virtual std::string label() const = 0;
    virtual std::vector<OpTerm> enumerate(const EnumRequest& req) const = 0;
    // Families that produce unconjugated mode terms expose them here.
    virtual bool has_raw() const { return false; }
    virtual std::vector<OpTerm> enumerate_raw(const RawRequest&) const { return {}; }
};

using FamilyPtr = std::shared_ptr<const CoeffFamily>;

// The W(gl_r) mode W^i_k on one component:
//   (1/r) sum_j hbar^j i!/(2^j j!(i-2j)!) sum_{sum p = r(k-i+1)} Psi^{(j)}(p) :J_p...:,
// multiplied by `scale`. Zero modes J_0 are either dropped (no zero-mode
// value) or replaced by the scalar hbar^{1/2} * zero_mode. With `reduced`,
// every term containing a level divisible by r is dropped.
struct ModeSpec {
    int comp = 1;
    int r = 2;
    int i = 1;
    int k = 0;
    Rat scale = 1;
    std::optional<Rat> zero_mode;
    bool reduced = false;
};

FamilyPtr make_mode_family(const ModeSpec& spec);

// scale * sum_{k1 + k2 = total} W^{i1}_{k1}[comp1] * J^{comp2}_{k2}, where the
// zero mode J^{comp2}_0 is the scalar hbar^{1/2} * zero_mode2.
struct ModeTimesCurrentSpec {
    ModeSpec mode;  // mode.k is ignored
    int total = 0;
    int comp2 = 2;
    std::optional<Rat> zero_mode2;
    Rat scale = 1;
};

FamilyPtr make_mode_times_current_family(const ModeTimesCurrentSpec& spec);

// Linear combination of families with rational weights.
FamilyPtr make_sum_family(std::vector<std::pair<Rat, FamilyPtr>> parts, std::string label = "");

// Family-level conjugations (compose additively; they commute).
FamilyPtr dilaton_shift(const FamilyPtr& family, const DilatonShifts& shifts);
FamilyPtr polarization_shift(const FamilyPtr& family, const Polarization& phi);

std::vector<OpTerm> enumerate_terms(const CoeffFamily& family, const std::vector<Label>& creator_pool,
                                    int annihilator_cap, HalfInt hbar_cap);

// ---------------------------------------------------------------------------
// Coefficient tables F_{g,n}[idx], keys (2g, sorted labels). Only nonzero
// values are stored; completeness metadata tells which absent keys are zero.

struct SupportBound {
    // F_{g,n}[q] vanishes when sum_l weight[alpha_l] * q_l > 2g - 2 + n.
    std::map<int, Rat> weights;
    bool excludes(int g2, const std::vector<Label>& idx) const;
};

struct FKey {
    int g2 = 0;
    std::vector<Label> idx;
    friend auto operator<=>(const FKey&, const FKey&) = default;
};

class FTable {
public:
    std::map<FKey, Rat> entries;
    int chi_max = 0;
    int q_max = 0;
    std::optional<SupportBound> support;
    bool crosscapped = false;

    void set(int g2, std::vector<Label> idx, const Rat& value);
    // Value when determined by the table; nullopt when outside completeness.
    std::optional<Rat> lookup(int g2, std::vector<Label> idx) const;
    // Like lookup, throwing MissingF when undetermined.
    Rat at(int g2, std::vector<Label> idx) const;
};

// Callback resolving F_{h,m}[labels] for stable (h,m); labels sorted.
using FLookup = std::function<Rat(int g2, const std::vector<Label>& idx)>;

// Xi^{(l)}_{g',n}[term | beta] times the term's coefficient, for a target of
// doubled genus g2 (g' = g - hbar of the term). `genus_step2` is 1 when
// half-integer genera occur and 2 otherwise.
Rat xi_contribution(const OpTerm& term, int g2, const std::vector<Label>& beta, const FLookup& F, int genus_step2);

// [hbar^g] d_beta (Z^{-1} H Z)|_{x=0} for the family H, evaluated from F.
// Annihilators are enumerated up to `annihilator_cap` (and the table's support
// bound when present); lookups outside the table raise MissingF.
Rat apply_to_Z(const CoeffFamily& family, const FTable& F, HalfInt g, const std::vector<Label>& beta,
               int annihilator_cap);

}  // namespace hqas
