#pragma once

// Direct evaluation of the low-order F_{g,n} formulas from raw operator
// coefficients C^{(j)}[k|...], in the convention H_k = J_k - sum hbar^j/l! C :J...:.
// Sums over alpha run over the variable labels up to alpha_max.

#include <algorithm>
#include <map>
#include <tuple>
#include <vector>

#include "hqas/engine.hpp"

namespace hqas::oracle {

class COracle {
public:
    COracle(StructureSpec spec, int alpha_max) : spec_(std::move(spec)), alpha_max_(alpha_max) {
        alphas_ = spec_.labels_upto(alpha_max);
    }

    const std::vector<Label>& alphas() const { return alphas_; }

    // C^{(hbar2/2)}[k | -creators, annihilators] for one ordering of the modes.
    Rat C(const Label& k, int hbar2, std::vector<Label> creators, std::vector<Label> annihilators) {
        std::sort(creators.begin(), creators.end());
        std::sort(annihilators.begin(), annihilators.end());
        for (const auto& a : annihilators)
            if (a.second > alpha_max_) return Rat(0);
        const auto& terms = terms_for(k, creators);
        TermShape shape{hbar2, to_modes(creators, -1), to_modes(annihilators, 1)};
        auto it = terms.find(shape);
        if (it == terms.end()) return Rat(0);
        return -it->second * multiplicity_factorial(creators) * multiplicity_factorial(annihilators);
    }

    Rat F03(const Label& k, const Label& b1, const Label& b2) {
        return Rat(b1.second) * b2.second * C(k, 0, {b1, b2}, {});
    }

    Rat F11(const Label& k) { return C(k, 2, {}, {}); }

    Rat Fh2(const Label& k, const Label& b) { return Rat(b.second) * C(k, 1, {b}, {}); }

    Rat F04(const Label& k, const Label& b1, const Label& b2, const Label& b3) {
        Rat out = Rat(b1.second) * b2.second * b3.second * C(k, 0, {b1, b2, b3}, {});
        const Label b[3] = {b1, b2, b3};
        for (const auto& a : alphas_)
            for (int i = 0; i < 3; ++i) {
                Rat c = C(k, 0, {b[i]}, {a});
                if (c != 0) out += Rat(b[i].second) * c * F03(a, b[(i + 1) % 3], b[(i + 2) % 3]);
            }
        return out;
    }

    Rat F12(const Label& k, const Label& b) {
        Rat out = Rat(b.second) * C(k, 2, {b}, {});
        for (const auto& a : alphas_) {
            Rat c = C(k, 0, {b}, {a});
            if (c != 0) out += Rat(b.second) * c * F11(a);
        }
        for (const auto& a1 : alphas_)
            for (const auto& a2 : alphas_) {
                Rat c = C(k, 0, {}, {a1, a2});
                if (c != 0) out += rat(1, 2) * c * F03(symmetric_head(b, a1, a2), other(b, a1, a2, 0), other(b, a1, a2, 1));
            }
        return out;
    }

    // sum_alpha C^{(1/2)}[k|alpha] F_{1/2,2}[alpha, beta].
    Rat F12_half_genus_source(const Label& k, const Label& b) {
        Rat out = 0;
        for (const auto& a : alphas_) {
            Rat c = C(k, 1, {}, {a});
            if (c != 0) out += c * Fh2(std::min(a, b), std::max(a, b));
        }
        return out;
    }

    Rat Fh3(const Label& k, const Label& b1, const Label& b2) {
        Rat out = Rat(b1.second) * b2.second * C(k, 1, {b1, b2}, {});
        for (const auto& a : alphas_) {
            Rat c = C(k, 1, {}, {a});
            if (c != 0) out += c * F03(symmetric_head(a, b1, b2), other(a, b1, b2, 0), other(a, b1, b2, 1));
            Rat c1 = C(k, 0, {b1}, {a});
            if (c1 != 0) out += Rat(b1.second) * c1 * Fh2(std::min(a, b2), std::max(a, b2));
            Rat c2 = C(k, 0, {b2}, {a});
            if (c2 != 0) out += Rat(b2.second) * c2 * Fh2(std::min(a, b1), std::max(a, b1));
        }
        return out;
    }

    // F_{1/2,1} is absent, so only the C^{(1/2)} F_{1,1} and C^{(0)} F_{1/2,2} sums remain.
    Rat F32(const Label& k) {
        Rat out = C(k, 3, {}, {});
        for (const auto& a : alphas_) {
            Rat c = C(k, 1, {}, {a});
            if (c != 0) out += c * F11(a);
        }
        for (const auto& a1 : alphas_)
            for (const auto& a2 : alphas_) {
                Rat c = C(k, 0, {}, {a1, a2});
                if (c != 0) out += rat(1, 2) * c * Fh2(std::min(a1, a2), std::max(a1, a2));
            }
        return out;
    }

private:
    // F_{0,3} is evaluated with its smallest label as the operator label.
    static Label symmetric_head(const Label& a, const Label& b, const Label& c) { return std::min({a, b, c}); }
    static Label other(const Label& a, const Label& b, const Label& c, int which) {
        std::vector<Label> v{a, b, c};
        std::sort(v.begin(), v.end());
        return v[static_cast<size_t>(which) + 1];
    }

    // Creators are stored with negative levels.
    static std::vector<JIndex> to_modes(const std::vector<Label>& ls, int sign) {
        std::vector<JIndex> out;
        for (const auto& l : ls) out.push_back(JIndex{l.first, sign * l.second});
        std::sort(out.begin(), out.end());
        return out;
    }

    static Rat multiplicity_factorial(const std::vector<Label>& sorted) {
        Rat out = 1;
        size_t i = 0;
        while (i < sorted.size()) {
            size_t j = i;
            while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
            out *= factorial(static_cast<int>(j - i));
            i = j;
        }
        return out;
    }

    const std::map<TermShape, Rat>& terms_for(const Label& k, const std::vector<Label>& pool) {
        auto key = std::make_pair(k, pool);
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        auto entry = spec_.operator_for(k);
        std::map<TermShape, Rat> terms;
        if (entry)
            for (const auto& t : enumerate_terms(*entry->family, pool, alpha_max_, HalfInt{3}))
                terms[shape_of(t)] += t.coeff;
        return cache_.emplace(key, std::move(terms)).first->second;
    }

    StructureSpec spec_;
    int alpha_max_;
    std::vector<Label> alphas_;
    std::map<std::pair<Label, std::vector<Label>>, std::map<TermShape, Rat>> cache_;
};

}  // namespace hqas::oracle
