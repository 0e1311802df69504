#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "hqas/diffop.hpp"

namespace hqas {

// One operator of a structure, attached to the variable label it determines.
struct OperatorEntry {
    std::string name;
    FamilyPtr family;
};

// Defining data of a higher quantum Airy structure. Operators are produced
// lazily per variable label; the degree-1 part of the operator at label q must
// contain J_q with nonzero coefficient, and the remaining linear terms J_p
// must point to labels whose recursion does not return to q.
struct StructureSpec {
    std::string name;
    std::vector<int> components;
    std::function<bool(const Label&)> is_variable;
    std::function<std::optional<OperatorEntry>(const Label&)> operator_for;
    std::optional<SupportBound> support;
    bool crosscapped = false;

    // Variable labels with level <= q_max, sorted.
    std::vector<Label> labels_upto(int q_max) const;
};

struct SymmetryViolation {
    int g2 = 0;
    std::vector<Label> idx;
    // Value obtained with each distinct label distinguished.
    std::vector<std::pair<Label, Rat>> values;
};

struct AnnihilationResidual {
    std::string op;
    Label label;
    int g2 = 0;
    std::vector<Label> beta;
    int chi = 0;
    Rat residual;
};

// Memoized recursion F_{g,n}[q, beta] = -(sum_{p != q} L_p F[p, beta] + sum Xi)/L_q,
// where L_p is the coefficient of J_p in the operator at q.
class Engine {
public:
    explicit Engine(StructureSpec spec);

    const StructureSpec& spec() const { return spec_; }

    // F_{g,n}[idx] with the smallest label distinguished. Throws UnknownLabel,
    // HalfGenusOnIntegerStructure, Unstable.
    Rat compute_F(HalfInt g, std::vector<Label> idx);
    // Same, recursing from the operator of idx[position] at the top level.
    Rat compute_F_at(HalfInt g, std::vector<Label> idx, size_t position);

    // Every F with 2g-2+n <= chi_max and labels <= q_max; only nonzero values stored.
    FTable compute_all(int chi_max, int q_max);

    std::vector<SymmetryViolation> check_symmetry(int chi_max, int q_max);
    std::vector<AnnihilationResidual> check_annihilation(const FTable& F, int chi_max, int q_max);

    // Cached operator at a label; throws UnknownLabel when absent.
    const OperatorEntry& op(const Label& q);

private:
    Rat value(int g2, const std::vector<Label>& sorted_idx);
    Rat recurse(int g2, const std::vector<Label>& idx, size_t position);
    void validate(HalfInt g, const std::vector<Label>& idx) const;

    StructureSpec spec_;
    std::shared_mutex memo_mutex_;
    std::map<FKey, Rat> memo_;
    std::shared_mutex op_mutex_;
    std::map<Label, std::shared_ptr<OperatorEntry>> ops_;
};

// Thread count for batch drivers: HQAS_THREADS when set, else hardware concurrency.
unsigned worker_threads();

// Multisets of the sorted `labels` of size n, in lexicographic order.
void for_each_multiset(const std::vector<Label>& labels, int n,
                       const std::function<void(const std::vector<Label>&)>& fn);

}  // namespace hqas
