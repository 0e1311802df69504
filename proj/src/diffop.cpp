#include "hqas/diffop.hpp"

#include <algorithm>
#include <sstream>

#include "hqas/psi.hpp"

namespace hqas {

std::string to_string(const Label& l) { return std::to_string(l.first) + ":" + std::to_string(l.second); }

void OpTerm::canonicalize() {
    std::sort(creators.begin(), creators.end());
    std::sort(annihilators.begin(), annihilators.end());
}

std::string OpTerm::str() const {
    std::ostringstream out;
    out << to_string(coeff);
    if (hbar.doubled != 0) out << " hbar^" << to_string(hbar);
    if (!creators.empty() || !annihilators.empty()) {
        out << " :";
        for (const auto& c : creators) out << " J" << c.comp << "_" << c.level;
        for (const auto& a : annihilators) out << " J" << a.comp << "_" << a.level;
        out << " :";
    }
    return out.str();
}

TermShape shape_of(const OpTerm& t) { return TermShape{t.hbar.doubled, t.creators, t.annihilators}; }

std::vector<OpTerm> merge_terms(const std::vector<OpTerm>& terms) {
    std::map<TermShape, Rat> acc;
    for (const auto& t : terms) {
        OpTerm c = t;
        c.canonicalize();
        acc[shape_of(c)] += c.coeff;
    }
    std::vector<OpTerm> out;
    for (auto& [shape, coeff] : acc) {
        if (sgn(coeff) == 0) continue;
        out.push_back(OpTerm{HalfInt{shape.hbar2}, shape.creators, shape.annihilators, coeff});
    }
    return out;
}

Rat EnumRequest::weight(int comp) const {
    auto it = weights.find(comp);
    return it == weights.end() ? Rat(0) : it->second;
}

Rat RawRequest::weight(int comp) const {
    auto it = weights.find(comp);
    return it == weights.end() ? Rat(0) : it->second;
}

// ---------------------------------------------------------------------------
// Polarization

Polarization::Polarization(const std::map<std::pair<Label, Label>, Rat>& entries) {
    for (const auto& [key, value] : entries) {
        if (sgn(value) == 0) continue;
        auto it = entries.find({key.second, key.first});
        if (it == entries.end() || it->second != value) {
            fail("AsymmetricPhi", "phi(" + to_string(key.first) + "," + to_string(key.second) + ") has no equal transpose");
        }
        entries_[key] = value;
    }
}

Polarization Polarization::from_unordered(const std::vector<std::tuple<Label, Label, Rat>>& entries) {
    std::map<std::pair<Label, Label>, Rat> full;
    for (const auto& [a, b, v] : entries) {
        if (a.second <= 0 || b.second <= 0) fail("BadPolarization", "polarization levels must be positive");
        if (full.count({a, b}) != 0) fail("BadPolarization", "duplicate polarization entry");
        full[{a, b}] = v;
        full[{b, a}] = v;
    }
    return Polarization(full);
}

Rat Polarization::at(const Label& a, const Label& b) const {
    auto it = entries_.find({a, b});
    return it == entries_.end() ? Rat(0) : it->second;
}

std::vector<std::pair<Label, Rat>> Polarization::row(const Label& a) const {
    std::vector<std::pair<Label, Rat>> out;
    auto it = entries_.lower_bound({a, Label{INT_MIN, INT_MIN}});
    for (; it != entries_.end() && it->first.first == a; ++it) out.emplace_back(it->first.second, it->second);
    return out;
}

Polarization Polarization::operator+(const Polarization& o) const {
    std::map<std::pair<Label, Label>, Rat> sum = entries_;
    for (const auto& [k, v] : o.entries_) sum[k] += v;
    return Polarization(sum);
}

Polarization Polarization::operator-() const {
    std::map<std::pair<Label, Label>, Rat> neg;
    for (const auto& [k, v] : entries_) neg[k] = -v;
    return Polarization(neg);
}

// ---------------------------------------------------------------------------
// Conjugation expansion

namespace {

struct ExpandFilter {
    // Kept creators must fit in `pool` when present.
    std::optional<std::map<Label, int>> pool;
    int annihilator_cap = INT_MAX;
    int hbar_cap2 = INT_MAX;
    int degree_cap = INT_MAX;
    std::optional<Rat> weighted_sum_cap;
    std::map<int, Rat> weights;
};

Rat weight_of(const std::map<int, Rat>& w, int comp) {
    auto it = w.find(comp);
    return it == w.end() ? Rat(0) : it->second;
}

// Sum over perfect matchings of `pos`, each pair weighted by phi.
Rat matching_sum(std::vector<Label>& pos, const Polarization& phi) {
    if (pos.empty()) return Rat(1);
    if (pos.size() % 2 != 0) return Rat(0);
    Label first = pos.front();
    Rat total = 0;
    for (size_t j = 1; j < pos.size(); ++j) {
        Rat w = phi.at(first, pos[j]);
        if (sgn(w) == 0) continue;
        std::vector<Label> rest;
        for (size_t k = 1; k < pos.size(); ++k)
            if (k != j) rest.push_back(pos[k]);
        total += w * matching_sum(rest, phi);
    }
    return total;
}

// Expands every creator J_{-a} of `raw` into J_{-a} + v_a + A_a, with Wick
// contractions [A_a, J_{-b}] = hbar phi(a,b) between creator positions.
void expand_conjugation(const OpTerm& raw, const DilatonShifts& v, const Polarization& phi, const ExpandFilter& f,
                        std::vector<OpTerm>& out) {
    struct Group {
        Label label;
        int count;
        std::optional<Rat> dilaton;
        std::vector<std::pair<Label, Rat>> targets;  // (annihilator label, phi/level)
        bool contractible;
    };
    std::vector<Group> groups;
    for (const auto& c : raw.creators) {
        Label L{c.comp, -c.level};
        if (!groups.empty() && groups.back().label == L) {
            ++groups.back().count;
            continue;
        }
        Group g{L, 1, std::nullopt, {}, false};
        auto it = v.find(L);
        if (it != v.end() && sgn(it->second) != 0) g.dilaton = it->second;
        for (const auto& [b, w] : phi.row(L)) g.targets.emplace_back(b, w / b.second);
        g.contractible = !g.targets.empty();
        groups.push_back(std::move(g));
    }

    int raw_ann = static_cast<int>(raw.annihilators.size());
    Rat raw_weighted = 0;
    for (const auto& a : raw.annihilators) {
        if (a.level > f.annihilator_cap) return;
        raw_weighted += weight_of(f.weights, a.comp) * a.level;
    }
    if (f.weighted_sum_cap && raw_weighted > *f.weighted_sum_cap) return;
    if (raw.hbar.doubled > f.hbar_cap2) return;

    struct State {
        Rat coeff;
        std::vector<JIndex> kept;
        std::vector<JIndex> added_ann;
        std::vector<Label> contract;
        Rat weighted;
    };

    auto finish = [&](State& st) {
        int pairs2 = static_cast<int>(st.contract.size());  // 2 * number of pairs
        if (pairs2 % 2 != 0) return;
        int hbar2 = raw.hbar.doubled + pairs2;
        if (hbar2 > f.hbar_cap2) return;
        int degree = static_cast<int>(st.kept.size()) + raw_ann + static_cast<int>(st.added_ann.size()) + hbar2;
        if (degree > f.degree_cap) return;
        Rat c = st.coeff;
        if (pairs2 > 0) {
            c *= matching_sum(st.contract, phi);
            if (sgn(c) == 0) return;
        }
        OpTerm t;
        t.hbar = HalfInt{hbar2};
        for (const auto& k : st.kept) t.creators.push_back(JIndex{k.comp, k.level});
        t.annihilators = raw.annihilators;
        for (const auto& a : st.added_ann) t.annihilators.push_back(a);
        t.coeff = c;
        t.canonicalize();
        out.push_back(std::move(t));
    };

    auto rec = [&](auto&& self, size_t gi, State& st) -> void {
        if (gi == groups.size()) {
            finish(st);
            return;
        }
        const Group& g = groups[gi];
        int keep_limit = g.count;
        if (f.pool) {
            auto it = f.pool->find(g.label);
            keep_limit = std::min(keep_limit, it == f.pool->end() ? 0 : it->second);
        }
        // Distribute g.count positions among keep / dilaton / targets / contraction.
        const int nt = static_cast<int>(g.targets.size());
        std::vector<int> tcount(static_cast<size_t>(nt), 0);
        for (int kk = 0; kk <= keep_limit; ++kk) {
            int rest0 = g.count - kk;
            int dmax = g.dilaton ? rest0 : 0;
            for (int kd = 0; kd <= dmax; ++kd) {
                int rest1 = rest0 - kd;
                int cmax = g.contractible ? rest1 : 0;
                for (int kc = 0; kc <= cmax; ++kc) {
                    int rest2 = rest1 - kc;
                    if (rest2 > 0 && nt == 0) continue;
                    // Compositions of rest2 into the nt substitution targets.
                    auto targets_rec = [&](auto&& tself, int ti, int left, State& st2) -> void {
                        if (ti == nt - 1 || nt == 0) {
                            if (nt == 0 && left != 0) return;
                            if (nt > 0) tcount[static_cast<size_t>(ti)] = left;
                            // Assemble this group's contribution.
                            State next = st2;
                            Rat mult = factorial(g.count) / (factorial(kk) * factorial(kd) * factorial(kc));
                            for (int t = 0; t < nt; ++t) mult /= factorial(tcount[static_cast<size_t>(t)]);
                            next.coeff *= mult;
                            if (kd > 0) {
                                Rat p = 1;
                                for (int q = 0; q < kd; ++q) p *= *g.dilaton;
                                next.coeff *= p;
                            }
                            for (int q = 0; q < kk; ++q) next.kept.push_back(JIndex{g.label.first, -g.label.second});
                            for (int q = 0; q < kc; ++q) next.contract.push_back(g.label);
                            for (int t = 0; t < nt; ++t) {
                                const auto& [b, w] = g.targets[static_cast<size_t>(t)];
                                for (int q = 0; q < tcount[static_cast<size_t>(t)]; ++q) {
                                    if (b.second > f.annihilator_cap) return;
                                    next.coeff *= w;
                                    next.added_ann.push_back(JIndex{b.first, b.second});
                                    next.weighted += weight_of(f.weights, b.first) * b.second;
                                }
                            }
                            if (f.weighted_sum_cap && raw_weighted + next.weighted > *f.weighted_sum_cap) return;
                            self(self, gi + 1, next);
                            return;
                        }
                        for (int c = 0; c <= left; ++c) {
                            tcount[static_cast<size_t>(ti)] = c;
                            tself(tself, ti + 1, left - c, st2);
                        }
                    };
                    targets_rec(targets_rec, 0, rest2, st);
                }
            }
        }
    };

    State st{raw.coeff, {}, {}, {}, Rat(0)};
    rec(rec, 0, st);
}

}  // namespace

std::vector<OpTerm> dilaton_shift(const OpTerm& term, const DilatonShifts& shifts) {
    std::vector<OpTerm> out;
    OpTerm t = term;
    t.canonicalize();
    expand_conjugation(t, shifts, Polarization(), ExpandFilter{}, out);
    return merge_terms(out);
}

std::vector<OpTerm> polarization_shift(const OpTerm& term, const Polarization& phi) {
    std::vector<OpTerm> out;
    OpTerm t = term;
    t.canonicalize();
    expand_conjugation(t, DilatonShifts{}, phi, ExpandFilter{}, out);
    return merge_terms(out);
}

// ---------------------------------------------------------------------------
// Mode families

namespace {

// Nonincreasing partitions of n into exactly m parts, each in [1, cap],
// skipping parts rejected by `allowed`.
template <class Allowed, class Emit>
void partitions(long n, int m, long cap, const Allowed& allowed, std::vector<long>& cur, const Emit& emit) {
    if (m == 0) {
        if (n == 0) emit(cur);
        return;
    }
    if (n < m) return;
    long hi = std::min(cap, n - (m - 1));
    long lo = (n + m - 1) / m;  // the largest part is at least the average
    for (long p = hi; p >= lo; --p) {
        if (!allowed(p)) continue;
        cur.push_back(p);
        partitions(n - p, m - 1, p, allowed, cur, emit);
        cur.pop_back();
    }
}

Rat mult_factorials(std::vector<long> v) {
    std::sort(v.begin(), v.end());
    Rat out = 1;
    size_t i = 0;
    while (i < v.size()) {
        size_t j = i;
        while (j < v.size() && v[j] == v[i]) ++j;
        out *= factorial(static_cast<int>(j - i));
        i = j;
    }
    return out;
}

class ModeFamily : public CoeffFamily {
public:
    explicit ModeFamily(ModeSpec s) : s_(std::move(s)) {
        if (s_.r < 1 || s_.i < 1 || s_.i > s_.r) fail("ArityOutOfRange", "mode index i must lie in 1..r");
    }

    std::string label() const override {
        return "W[" + std::to_string(s_.comp) + "]^" + std::to_string(s_.i) + "_" + std::to_string(s_.k) +
               " (gl_" + std::to_string(s_.r) + ")";
    }

    bool has_raw() const override { return true; }

    std::vector<OpTerm> enumerate_raw(const RawRequest& req) const override {
        std::vector<OpTerm> out;
        emit_raw(req, s_.k, s_.scale, out);
        return out;
    }

    std::vector<OpTerm> enumerate(const EnumRequest& req) const override {
        RawRequest raw = raw_from(req);
        std::vector<OpTerm> out;
        for (auto& t : enumerate_raw(raw)) {
            if (t.degree() <= req.degree_cap) out.push_back(std::move(t));
        }
        return out;
    }

    // Emits the raw terms of W^i_k (k given) times `scale`.
    void emit_raw(const RawRequest& req, int k, const Rat& scale, std::vector<OpTerm>& out) const {
        const int r = s_.r, i = s_.i;
        auto level_ok = [&](long level) { return !(s_.reduced && level % r == 0); };
        std::vector<std::pair<int, int>> allowed;  // (level, max count)
        for (const auto& [L, cnt] : req.creator_max) {
            if (L.first != s_.comp || cnt <= 0 || !level_ok(L.second)) continue;
            allowed.emplace_back(L.second, cnt);
        }
        const bool zeros = s_.zero_mode.has_value() && !s_.reduced;
        const Rat wcomp = req.weight(s_.comp);
        for (int j = 0; 2 * j <= i && 2 * j <= req.hbar_cap2; ++j) {
            const int ell = i - 2 * j;
            const Rat base = factorial(i) / (Rat(r) * Rat(mpz_class(1) << j) * factorial(j));
            std::vector<int> counts(allowed.size(), 0);
            auto creators_rec = [&](auto&& self, size_t idx, int used, long csum) -> void {
                if (idx == allowed.size()) {
                    int zmax = zeros ? ell - used : 0;
                    for (int z = 0; z <= zmax; ++z) {
                        if (2 * j + z > req.hbar_cap2) break;
                        int m = ell - used - z;
                        if (m > req.max_annihilators) continue;
                        long total = static_cast<long>(r) * (k - i + 1) + csum;
                        if (total < 0) continue;
                        if (m == 0 && total != 0) continue;
                        if (req.weighted_sum_cap && m > 0 && wcomp * total > *req.weighted_sum_cap) continue;
                        std::vector<long> cur;
                        auto emit = [&](const std::vector<long>& parts) {
                            std::vector<long> args;
                            OpTerm t;
                            for (size_t a = 0; a < allowed.size(); ++a)
                                for (int c = 0; c < counts[a]; ++c) {
                                    args.push_back(-allowed[a].first);
                                    t.creators.push_back(JIndex{s_.comp, -allowed[a].first});
                                }
                            for (int c = 0; c < z; ++c) args.push_back(0);
                            for (long p : parts) {
                                args.push_back(p);
                                t.annihilators.push_back(JIndex{s_.comp, static_cast<int>(p)});
                            }
                            Rat coeff = base / mult_factorials(args) * scale;
                            coeff *= psi(r, j, args);
                            if (sgn(coeff) == 0) return;
                            for (int c = 0; c < z; ++c) coeff *= *s_.zero_mode;
                            if (sgn(coeff) == 0) return;
                            t.hbar = HalfInt{2 * j + z};
                            t.coeff = coeff;
                            t.canonicalize();
                            out.push_back(std::move(t));
                        };
                        long cap = req.annihilator_cap;
                        if (req.weighted_sum_cap && sgn(wcomp) > 0) {
                            Rat q = *req.weighted_sum_cap / wcomp;
                            mpz_class fl = q.get_num() / q.get_den();
                            if (fl < cap) cap = fl.get_si();
                        }
                        partitions(total, m, cap, level_ok, cur, emit);
                    }
                    return;
                }
                int lim = std::min(allowed[idx].second, ell - used);
                for (int c = 0; c <= lim; ++c) {
                    counts[idx] = c;
                    self(self, idx + 1, used + c, csum + static_cast<long>(c) * allowed[idx].first);
                }
                counts[idx] = 0;
            };
            creators_rec(creators_rec, 0, 0, 0);
        }
    }

    const ModeSpec& spec() const { return s_; }

    static RawRequest raw_from(const EnumRequest& req) {
        RawRequest raw;
        for (const auto& L : req.pool) raw.creator_max[L] += 1;
        raw.annihilator_cap = req.annihilator_cap;
        raw.max_annihilators = req.degree_cap;
        raw.hbar_cap2 = req.hbar_cap.doubled;
        raw.weighted_sum_cap = req.weighted_sum_cap;
        raw.weights = req.weights;
        return raw;
    }

private:
    ModeSpec s_;
};

class ModeTimesCurrentFamily : public CoeffFamily {
public:
    explicit ModeTimesCurrentFamily(ModeTimesCurrentSpec s) : s_(std::move(s)), mode_(s_.mode) {}

    std::string label() const override {
        return "sum W[" + std::to_string(s_.mode.comp) + "]^" + std::to_string(s_.mode.i) + " J[" +
               std::to_string(s_.comp2) + "] total " + std::to_string(s_.total);
    }

    bool has_raw() const override { return true; }

    std::vector<OpTerm> enumerate(const EnumRequest& req) const override {
        std::vector<OpTerm> out;
        for (auto& t : enumerate_raw(ModeFamily::raw_from(req)))
            if (t.degree() <= req.degree_cap) out.push_back(std::move(t));
        return out;
    }

    std::vector<OpTerm> enumerate_raw(const RawRequest& req) const override {
        std::vector<OpTerm> out;
        const int r1 = s_.mode.r, i1 = s_.mode.i;
        // Largest total creator level W can absorb on its component.
        std::vector<int> levels;
        for (const auto& [L, cnt] : req.creator_max) {
            if (L.first != s_.mode.comp) continue;
            for (int c = 0; c < std::min(cnt, i1); ++c) levels.push_back(L.second);
        }
        std::sort(levels.rbegin(), levels.rend());
        long max_csum = 0;
        for (int c = 0; c < std::min<int>(i1, static_cast<int>(levels.size())); ++c) max_csum += levels[c];

        auto run = [&](int k2, RawRequest sub, const std::function<void(OpTerm&)>& decorate) {
            std::vector<OpTerm> part;
            mode_.emit_raw(sub, s_.total - k2, s_.scale, part);
            for (auto& t : part) {
                decorate(t);
                t.canonicalize();
                out.push_back(std::move(t));
            }
        };

        // Creator J^{comp2}_{k2}, k2 < 0.
        for (const auto& [L, cnt] : req.creator_max) {
            if (L.first != s_.comp2 || cnt <= 0) continue;
            int k2 = -L.second;
            run(k2, req, [&](OpTerm& t) { t.creators.push_back(JIndex{s_.comp2, k2}); });
        }
        // Zero mode scalar.
        if (s_.zero_mode2 && sgn(*s_.zero_mode2) != 0 && req.hbar_cap2 >= 1) {
            RawRequest sub = req;
            sub.hbar_cap2 -= 1;
            Rat z = *s_.zero_mode2;
            run(0, sub, [&](OpTerm& t) {
                t.hbar.doubled += 1;
                t.coeff *= z;
            });
        }
        // Annihilator J^{comp2}_{k2}, k2 > 0.
        if (req.max_annihilators >= 1) {
            long bound = static_cast<long>(s_.total) - i1 + 1 + max_csum / r1;
            bound = std::min<long>(bound, req.annihilator_cap);
            Rat w2 = req.weight(s_.comp2);
            for (long k2 = 1; k2 <= bound; ++k2) {
                RawRequest sub = req;
                sub.max_annihilators -= 1;
                if (req.weighted_sum_cap) {
                    Rat left = *req.weighted_sum_cap - w2 * k2;
                    if (left < 0) break;
                    sub.weighted_sum_cap = left;
                }
                int kk = static_cast<int>(k2);
                run(kk, sub, [&](OpTerm& t) { t.annihilators.push_back(JIndex{s_.comp2, kk}); });
            }
        }
        return out;
    }

private:
    ModeTimesCurrentSpec s_;
    ModeFamily mode_;
};

class SumFamily : public CoeffFamily {
public:
    SumFamily(std::vector<std::pair<Rat, FamilyPtr>> parts, std::string label)
        : parts_(std::move(parts)), label_(std::move(label)) {}

    std::string label() const override {
        if (!label_.empty()) return label_;
        std::string s;
        for (const auto& [c, f] : parts_) s += (s.empty() ? "" : " + ") + to_string(c) + "*" + f->label();
        return s;
    }

    std::vector<OpTerm> enumerate(const EnumRequest& req) const override {
        std::vector<OpTerm> all;
        for (const auto& [c, f] : parts_) {
            for (auto t : f->enumerate(req)) {
                t.coeff *= c;
                all.push_back(std::move(t));
            }
        }
        return merge_terms(all);
    }

    const std::vector<std::pair<Rat, FamilyPtr>>& parts() const { return parts_; }

private:
    std::vector<std::pair<Rat, FamilyPtr>> parts_;
    std::string label_;
};

class ConjugatedFamily : public CoeffFamily {
public:
    ConjugatedFamily(FamilyPtr base, DilatonShifts v, Polarization phi)
        : base_(std::move(base)), v_(std::move(v)), phi_(std::move(phi)) {}

    std::string label() const override { return "conj(" + base_->label() + ")"; }

    std::vector<OpTerm> enumerate(const EnumRequest& req) const override {
        RawRequest raw = ModeFamily::raw_from(req);
        // Raw creators may also sit where they get absorbed or substituted.
        const int unbounded = 64;
        for (const auto& [L, val] : v_)
            if (sgn(val) != 0) raw.creator_max[L] = unbounded;
        for (const auto& [key, val] : phi_.entries()) raw.creator_max[key.first] = unbounded;
        ExpandFilter f;
        std::map<Label, int> pool;
        for (const auto& L : req.pool) pool[L] += 1;
        f.pool = pool;
        f.annihilator_cap = req.annihilator_cap;
        f.hbar_cap2 = req.hbar_cap.doubled;
        f.degree_cap = req.degree_cap;
        f.weighted_sum_cap = req.weighted_sum_cap;
        f.weights = req.weights;
        std::vector<OpTerm> out;
        for (const auto& t : base_->enumerate_raw(raw)) expand_conjugation(t, v_, phi_, f, out);
        return merge_terms(out);
    }

    const FamilyPtr& base() const { return base_; }
    const DilatonShifts& shifts() const { return v_; }
    const Polarization& phi() const { return phi_; }

private:
    FamilyPtr base_;
    DilatonShifts v_;
    Polarization phi_;
};

DilatonShifts add_shifts(const DilatonShifts& a, const DilatonShifts& b) {
    DilatonShifts out = a;
    for (const auto& [k, v] : b) out[k] += v;
    return out;
}

FamilyPtr conjugate(const FamilyPtr& family, const DilatonShifts& v, const Polarization& phi) {
    if (auto c = std::dynamic_pointer_cast<const ConjugatedFamily>(family)) {
        return std::make_shared<ConjugatedFamily>(c->base(), add_shifts(c->shifts(), v), c->phi() + phi);
    }
    if (auto s = std::dynamic_pointer_cast<const SumFamily>(family)) {
        std::vector<std::pair<Rat, FamilyPtr>> parts;
        for (const auto& [c, f] : s->parts()) parts.emplace_back(c, conjugate(f, v, phi));
        return std::make_shared<SumFamily>(std::move(parts), "");
    }
    if (!family->has_raw()) fail("UnsupportedFamily", "family cannot be conjugated: " + family->label());
    return std::make_shared<ConjugatedFamily>(family, v, phi);
}

}  // namespace

FamilyPtr make_mode_family(const ModeSpec& spec) { return std::make_shared<ModeFamily>(spec); }

FamilyPtr make_mode_times_current_family(const ModeTimesCurrentSpec& spec) {
    return std::make_shared<ModeTimesCurrentFamily>(spec);
}

FamilyPtr make_sum_family(std::vector<std::pair<Rat, FamilyPtr>> parts, std::string label) {
    return std::make_shared<SumFamily>(std::move(parts), std::move(label));
}

FamilyPtr dilaton_shift(const FamilyPtr& family, const DilatonShifts& shifts) {
    return conjugate(family, shifts, Polarization());
}

FamilyPtr polarization_shift(const FamilyPtr& family, const Polarization& phi) {
    return conjugate(family, DilatonShifts{}, phi);
}

std::vector<OpTerm> enumerate_terms(const CoeffFamily& family, const std::vector<Label>& creator_pool,
                                    int annihilator_cap, HalfInt hbar_cap) {
    EnumRequest req;
    req.pool = creator_pool;
    req.annihilator_cap = annihilator_cap;
    req.hbar_cap = hbar_cap;
    return family.enumerate(req);
}

// ---------------------------------------------------------------------------
// Tables

bool SupportBound::excludes(int g2, const std::vector<Label>& idx) const {
    Rat total = 0;
    for (const auto& l : idx) {
        auto it = weights.find(l.first);
        if (it == weights.end()) continue;
        total += it->second * l.second;
    }
    return total > Rat(g2 - 2 + static_cast<int>(idx.size()));
}

void FTable::set(int g2, std::vector<Label> idx, const Rat& value) {
    std::sort(idx.begin(), idx.end());
    FKey key{g2, std::move(idx)};
    if (sgn(value) == 0) {
        entries.erase(key);
    } else {
        entries[key] = value;
    }
}

std::optional<Rat> FTable::lookup(int g2, std::vector<Label> idx) const {
    std::sort(idx.begin(), idx.end());
    int chi = g2 - 2 + static_cast<int>(idx.size());
    auto it = entries.find(FKey{g2, idx});
    if (it != entries.end()) return it->second;
    if (g2 % 2 != 0 && !crosscapped) return Rat(0);
    for (const auto& l : idx)
        if (l.second <= 0) return Rat(0);
    if (support && support->excludes(g2, idx)) return Rat(0);
    bool inside = chi <= chi_max;
    for (const auto& l : idx)
        if (l.second > q_max) inside = false;
    if (inside) return Rat(0);
    return std::nullopt;
}

Rat FTable::at(int g2, std::vector<Label> idx) const {
    auto v = lookup(g2, idx);
    if (!v) {
        std::string s;
        for (const auto& l : idx) s += " " + to_string(l);
        fail("MissingF", "table has no value for F at 2g=" + std::to_string(g2) + " idx" + s);
    }
    return *v;
}

// ---------------------------------------------------------------------------
// Xi evaluation

Rat xi_contribution(const OpTerm& term, int g2, const std::vector<Label>& beta, const FLookup& F, int genus_step2) {
    const int gp2 = g2 - term.hbar.doubled;
    if (gp2 < 0) return Rat(0);

    // Creators pair with equal beta labels through F_{0,2}[-a, a] = a.
    std::map<Label, int> bcount;
    for (const auto& b : beta) bcount[b] += 1;
    Rat factor = term.coeff;
    {
        std::map<Label, int> ccount;
        for (const auto& c : term.creators) ccount[Label{c.comp, -c.level}] += 1;
        for (const auto& [L, mc] : ccount) {
            auto it = bcount.find(L);
            int mb = it == bcount.end() ? 0 : it->second;
            if (mb < mc) return Rat(0);
            for (int q = 0; q < mc; ++q) factor *= Rat(L.second) * Rat(mb - q);
            it->second -= mc;
        }
    }
    std::vector<Label> rest;
    for (const auto& [L, c] : bcount)
        for (int q = 0; q < c; ++q) rest.push_back(L);

    const int m = static_cast<int>(term.annihilators.size());
    if (m == 0) return (gp2 == 0 && rest.empty()) ? factor : Rat(0);

    // Set partitions of the annihilator positions (restricted growth strings),
    // leftover beta positions assigned to blocks, genera distributed with
    // sum 2h = 2g' + 2(#blocks) - 2m.
    Rat total = 0;
    std::vector<int> block_of(static_cast<size_t>(m), 0);
    auto over_partitions = [&](auto&& self, int pos, int nblocks) -> void {
        if (pos == m) {
            const int target = gp2 + 2 * nblocks - 2 * m;
            if (target < 0) return;
            std::vector<std::vector<Label>> base(static_cast<size_t>(nblocks));
            for (int p = 0; p < m; ++p)
                base[block_of[p]].push_back(Label{term.annihilators[p].comp, term.annihilators[p].level});
            std::vector<int> assign(rest.size(), 0);
            auto over_assign = [&](auto&& aself, size_t bi) -> void {
                if (bi == rest.size()) {
                    std::vector<std::vector<Label>> blocks = base;
                    for (size_t q = 0; q < rest.size(); ++q) blocks[assign[q]].push_back(rest[q]);
                    for (auto& b : blocks) std::sort(b.begin(), b.end());
                    // Genus compositions with every block stable.
                    std::vector<int> h2(static_cast<size_t>(nblocks), 0);
                    auto over_genus = [&](auto&& gself, int b, int left) -> void {
                        int sz = static_cast<int>(blocks[b].size());
                        if (b == nblocks - 1) {
                            if (left % genus_step2 != 0 || left - 2 + sz <= 0) return;
                            h2[b] = left;
                            Rat acc = factor;
                            for (int q = 0; q < nblocks && sgn(acc) != 0; ++q) acc *= F(h2[q], blocks[q]);
                            total += acc;
                            return;
                        }
                        for (int h = 0; h <= left; h += genus_step2) {
                            if (h - 2 + sz <= 0) continue;
                            h2[b] = h;
                            gself(gself, b + 1, left - h);
                        }
                    };
                    over_genus(over_genus, 0, target);
                    return;
                }
                for (int b = 0; b < nblocks; ++b) {
                    assign[bi] = b;
                    aself(aself, bi + 1);
                }
            };
            over_assign(over_assign, 0);
            return;
        }
        for (int b = 0; b <= nblocks; ++b) {
            block_of[pos] = b;
            self(self, pos + 1, std::max(nblocks, b + 1));
        }
    };
    over_partitions(over_partitions, 0, 0);
    return total;
}

Rat apply_to_Z(const CoeffFamily& family, const FTable& F, HalfInt g, const std::vector<Label>& beta,
               int annihilator_cap) {
    EnumRequest req;
    req.pool = beta;
    req.annihilator_cap = annihilator_cap;
    req.hbar_cap = g;
    const int chi = g.doubled - 2 + 1 + static_cast<int>(beta.size());
    req.degree_cap = chi + 1;
    if (F.support) {
        req.weights = F.support->weights;
        req.weighted_sum_cap = Rat(chi);
    }
    FLookup lookup = [&](int h2, const std::vector<Label>& idx) { return F.at(h2, idx); };
    const int step = F.crosscapped ? 1 : 2;
    Rat total = 0;
    for (const auto& t : family.enumerate(req)) total += xi_contribution(t, g.doubled, beta, lookup, step);
    return total;
}

}  // namespace hqas
