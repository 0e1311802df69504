#include "hqas/curve.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "hqas/errors.hpp"
#include "hqas/psi.hpp"
#include "hqas/wgl.hpp"

namespace hqas {

// ---------------------------------------------------------------------------
// Curve data

const CurveComponent& LocalCurve::component(int alpha) const {
    if (alpha < 1 || alpha > size()) fail("BadParameters", "no component " + std::to_string(alpha));
    return components[static_cast<size_t>(alpha - 1)];
}

void validate_curve(const LocalCurve& curve) {
    if (curve.components.empty()) fail("BadParameters", "a curve needs at least one component");
    for (const auto& c : curve.components) {
        if (c.r < 2) fail("BadParameters", "every component needs r >= 2");
        for (const auto& [l, v] : c.tau)
            if (l <= 0) fail("BadParameters", "tau levels must be positive");
    }
    for (const auto& [key, v] : curve.phi.entries()) {
        for (const Label& l : {key.first, key.second})
            if (l.first < 1 || l.first > curve.size() || l.second <= 0)
                fail("BadParameters", "polarization label " + to_string(l) + " is outside the curve");
    }
}

int s_alpha(const LocalCurve& curve, int alpha) {
    const auto& c = curve.component(alpha);
    for (const auto& [l, v] : c.tau)
        if (sgn(v) != 0 && l % c.r != 0) return l;
    fail("NoS", "component " + std::to_string(alpha) + " has no tau_l != 0 with r not dividing l");
}

AdmissibilityReport admissible(const LocalCurve& curve) {
    AdmissibilityReport rep;
    rep.admissible = true;
    for (int a = 1; a <= curve.size(); ++a) {
        ComponentAdmissibility c;
        c.alpha = a;
        c.r = curve.component(a).r;
        c.s = s_alpha(curve, a);
        c.admissible = c.s >= 1 && c.s <= c.r + 1 && admissible_rs(c.r, c.s);
        rep.admissible = rep.admissible && c.admissible;
        rep.components.push_back(c);
    }
    return rep;
}

// ---------------------------------------------------------------------------
// Operators by conjugation

namespace {

DilatonShifts dilaton_of(const LocalCurve& curve, bool include_divisible) {
    DilatonShifts v;
    for (int a = 1; a <= curve.size(); ++a) {
        const auto& c = curve.component(a);
        for (const auto& [l, t] : c.tau)
            if (sgn(t) != 0 && (include_divisible || l % c.r != 0)) v[Label{a, l}] = t;
    }
    return v;
}

std::string operator_name(int components, int alpha, int i, int k) {
    std::string sub = components == 1 ? std::to_string(k) : "{" + std::to_string(alpha) + "," + std::to_string(k) + "}";
    return "H^" + std::to_string(i) + "_" + sub;
}

}  // namespace

StructureSpec build_operators(const LocalCurve& curve, bool force) {
    validate_curve(curve);
    AdmissibilityReport rep = admissible(curve);
    std::vector<int> svals;
    for (const auto& c : rep.components) {
        if (!coprime(c.r, c.s) || c.s > c.r + 1) {
            if (!force) fail("NotAdmissible", "component " + std::to_string(c.alpha) + " has (r,s) = (" +
                                                  std::to_string(c.r) + "," + std::to_string(c.s) + ")");
            if (!coprime(c.r, c.s)) fail("NotCoprime", "no index set for non-coprime (r,s)");
            fail("BadParameters", "s exceeds r + 1");
        }
        if (!c.admissible && !force)
            fail("NotAdmissible", "component " + std::to_string(c.alpha) + " has r not +-1 mod s");
        svals.push_back(c.s);
    }

    StructureSpec spec;
    spec.name = "curve";
    const int ncomp = curve.size();
    for (int a = 1; a <= ncomp; ++a) spec.components.push_back(a);
    spec.is_variable = [ncomp](const Label& l) { return l.first >= 1 && l.first <= ncomp && l.second > 0; };

    const DilatonShifts v = dilaton_of(curve, false);
    const Polarization phi = curve.phi;
    std::vector<int> rvals;
    for (const auto& c : curve.components) rvals.push_back(c.r);

    spec.operator_for = [=](const Label& l) -> std::optional<OperatorEntry> {
        if (l.first < 1 || l.first > ncomp || l.second <= 0) return std::nullopt;
        const int r = rvals[static_cast<size_t>(l.first - 1)];
        const int s = svals[static_cast<size_t>(l.first - 1)];
        auto [i, k] = pi_s_inv(r, s, l.second);
        ModeSpec m;
        m.comp = l.first;
        m.r = r;
        m.i = i;
        m.k = k;
        m.scale = Rat(-r);
        FamilyPtr fam = dilaton_shift(make_mode_family(m), v);
        if (!phi.empty()) fam = polarization_shift(fam, phi);

        EnumRequest req;
        req.annihilator_cap = l.second;
        req.hbar_cap = HalfInt{0};
        req.degree_cap = 1;
        Rat diag = 0;
        for (const auto& t : fam->enumerate(req))
            if (t.hbar.doubled == 0 && t.creators.empty() && t.annihilators.size() == 1 &&
                t.annihilators[0] == JIndex{l.first, l.second})
                diag += t.coeff;
        if (sgn(diag) == 0) fail("SingularDiagonal", "operator at " + to_string(l) + " has no J_q term");
        std::string name = operator_name(ncomp, l.first, i, k);
        return OperatorEntry{name, make_sum_family({{Rat(1) / diag, fam}}, name)};
    };

    SupportBound sb;
    for (int a = 1; a <= ncomp; ++a) sb.weights[a] = rat(1, svals[static_cast<size_t>(a - 1)]);
    spec.support = sb;
    return spec;
}

// ---------------------------------------------------------------------------
// Loop-equation coefficients

namespace {

void require_standard(const LocalCurve& curve, int alpha) {
    for (const auto& [key, v] : curve.phi.entries())
        if (sgn(v) != 0 && (key.first.first == alpha || key.second.first == alpha))
            fail("UnsupportedPolarization", "phi touches component " + std::to_string(alpha));
}

Rat mult_factorial(std::vector<long> v) {
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

// Nondecreasing multisets of size n drawn from `levels`.
void for_each_level_multiset(const std::vector<int>& levels, int n, size_t start, std::vector<int>& cur,
                             const std::function<void(const std::vector<int>&)>& fn) {
    if (n == 0) {
        fn(cur);
        return;
    }
    for (size_t i = start; i < levels.size(); ++i) {
        cur.push_back(levels[i]);
        for_each_level_multiset(levels, n - 1, i, cur, fn);
        cur.pop_back();
    }
}

Rat loop_C_raw(int r, int k, int j, const std::vector<long>& a) {
    const int ell = static_cast<int>(a.size());
    long sum = 0;
    for (long x : a) sum += x;
    if (static_cast<long>(r) * (ell + 2 * j - k - 1) + sum != 0) return Rat(0);
    Rat pre = factorial(ell + 2 * j) / (factorial(j) * Rat(mpz_class(1) << j));
    return pre * psi(r, j, a);
}

}  // namespace

Rat loop_coeff_C(const LocalCurve& curve, int alpha, int k, int j, const std::vector<long>& a) {
    const auto& c = curve.component(alpha);
    require_standard(curve, alpha);
    if (j < 0) return Rat(0);
    return loop_C_raw(c.r, k, j, a);
}

Rat loop_coeff_D(const LocalCurve& curve, int alpha, int i, int k, int j, const std::vector<long>& a) {
    const auto& c = curve.component(alpha);
    require_standard(curve, alpha);
    const int extra = i - static_cast<int>(a.size()) - 2 * j;
    if (j < 0 || extra < 0) return Rat(0);
    std::vector<int> levels;
    for (const auto& [l, t] : c.tau)
        if (sgn(t) != 0) levels.push_back(l);
    Rat total = 0;
    std::vector<int> cur;
    for_each_level_multiset(levels, extra, 0, cur, [&](const std::vector<int>& E) {
        std::vector<long> args = a;
        std::vector<long> ev;
        Rat w = 1;
        for (int l : E) {
            args.push_back(-l);
            ev.push_back(l);
            w *= c.tau.at(l);
        }
        Rat cc = loop_C_raw(c.r, k, j, args);
        if (sgn(cc) != 0) total += w * cc / mult_factorial(ev);
    });
    return total;
}

std::vector<LoopMismatch> check_loop_vs_conjugation(const LocalCurve& curve, const std::vector<LoopKey>& keys,
                                                    const std::vector<Label>& pool, int annihilator_cap) {
    std::vector<LoopMismatch> out;
    const DilatonShifts v = dilaton_of(curve, true);
    for (const auto& key : keys) {
        const auto& comp = curve.component(key.alpha);
        require_standard(curve, key.alpha);
        const int r = comp.r;
        ModeSpec m;
        m.comp = key.alpha;
        m.r = r;
        m.i = key.i;
        m.k = key.k;
        FamilyPtr fam = dilaton_shift(make_mode_family(m), v);

        std::map<TermShape, Rat> conj;
        for (const auto& t : enumerate_terms(*fam, pool, annihilator_cap, HalfInt{2 * (key.i / 2)}))
            conj[shape_of(t)] += t.coeff;

        // Loop-side shapes: creators from the pool, absorbed tau levels, and
        // annihilator partitions fixed by momentum.
        std::set<TermShape> shapes;
        for (const auto& [s, c] : conj) shapes.insert(s);
        std::vector<int> creator_levels;
        std::map<int, int> creator_max;
        for (const auto& p : pool)
            if (p.first == key.alpha) creator_max[p.second] += 1;
        std::vector<int> tau_levels;
        for (const auto& [l, t] : comp.tau)
            if (sgn(t) != 0) tau_levels.push_back(l);

        std::vector<std::vector<int>> creator_sets{{}};
        for (const auto& [lvl, cnt] : creator_max) {
            std::vector<std::vector<int>> next;
            for (const auto& cs : creator_sets)
                for (int c = 0; c <= cnt; ++c) {
                    auto e = cs;
                    for (int x = 0; x < c; ++x) e.push_back(lvl);
                    next.push_back(std::move(e));
                }
            creator_sets = std::move(next);
        }

        for (int j = 0; 2 * j <= key.i; ++j)
            for (int ell = 0; ell + 2 * j <= key.i; ++ell) {
                const int extra = key.i - ell - 2 * j;
                for (const auto& cre : creator_sets) {
                    const int nann = ell - static_cast<int>(cre.size());
                    if (nann < 0) continue;
                    long csum = 0;
                    for (int x : cre) csum += x;
                    std::vector<int> ecur;
                    std::set<long> totals;
                    for_each_level_multiset(tau_levels, extra, 0, ecur, [&](const std::vector<int>& E) {
                        long esum = 0;
                        for (int x : E) esum += x;
                        totals.insert(static_cast<long>(r) * (key.k + 1 - key.i) + csum + esum);
                    });
                    for (long total : totals) {
                        std::vector<int> ann;
                        std::function<void(long, int, int)> rec = [&](long rem, int left, int maxp) {
                            if (left == 0) {
                                if (rem != 0) return;
                                TermShape s;
                                s.hbar2 = 2 * j;
                                for (int x : cre) s.creators.push_back(JIndex{key.alpha, -x});
                                for (int x : ann) s.annihilators.push_back(JIndex{key.alpha, x});
                                std::sort(s.creators.begin(), s.creators.end());
                                std::sort(s.annihilators.begin(), s.annihilators.end());
                                shapes.insert(s);
                                return;
                            }
                            for (int p = std::min<long>(maxp, rem); p >= 1; --p) {
                                if (static_cast<long>(p) * left < rem) break;
                                ann.push_back(p);
                                rec(rem - p, left - 1, p);
                                ann.pop_back();
                            }
                        };
                        if (total >= nann) rec(total, nann, annihilator_cap);
                    }
                }
            }

        for (const auto& s : shapes) {
            std::vector<long> a;
            for (const auto& c : s.creators) a.push_back(c.level);
            for (const auto& c : s.annihilators) a.push_back(c.level);
            Rat loop = loop_coeff_D(curve, key.alpha, key.i, key.k, s.hbar2 / 2, a) / mult_factorial(a);
            auto it = conj.find(s);
            Rat cv = it == conj.end() ? Rat(0) : Rat(r) * it->second;
            if (loop != cv) {
                OpTerm t{HalfInt{s.hbar2}, s.creators, s.annihilators, Rat(1)};
                out.push_back(LoopMismatch{key, t.str(), loop, cv});
            }
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Givental decomposition

namespace {

using ATable = std::map<FKey, Rat>;

Rat label_mult_factorial(const std::vector<Label>& sorted) {
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

int count_of(const std::vector<Label>& v, const Label& l) {
    return static_cast<int>(std::count(v.begin(), v.end(), l));
}

std::vector<Label> remove_one(std::vector<Label> v, const Label& l) {
    v.erase(std::find(v.begin(), v.end(), l));
    return v;
}

int chi_of(int g2, size_t n) { return g2 - 2 + static_cast<int>(n); }

}  // namespace

std::pair<int, int> givental_block_caps(const LocalCurve& curve, int chi_max, int q_max) {
    validate_curve(curve);
    int extra = 0;
    int level = q_max;
    for (const auto& [key, v] : curve.phi.entries()) level = std::max({level, key.first.second, key.second.second});
    for (int a = 1; a <= curve.size(); ++a) {
        const auto& c = curve.component(a);
        const int s = s_alpha(curve, a);
        std::map<int, Rat> t = c.tau;
        t[s] += 1;
        for (const auto& [l, val] : t) {
            if (l % c.r == 0 || sgn(val) == 0 || l <= s) continue;
            level = std::max(level, l);
            // Each translation step costs l/s - 1 of the Euler characteristic budget.
            Rat steps = Rat(chi_max) / (rat(l, s) - 1);
            mpz_class fl;
            mpz_fdiv_q(fl.get_mpz_t(), steps.get_num_mpz_t(), steps.get_den_mpz_t());
            extra = std::max(extra, static_cast<int>(fl.get_si()));
        }
    }
    return {chi_max + extra, level};
}

std::map<int, FTable> givental_blocks(const LocalCurve& curve, int chi_max, int q_max) {
    validate_curve(curve);
    std::map<int, FTable> out;
    for (int a = 1; a <= curve.size(); ++a) {
        Engine e(build_coxeter(curve.component(a).r, s_alpha(curve, a), false, true));
        out.emplace(a, e.compute_all(chi_max, q_max));
    }
    return out;
}

FTable givental_transform(const LocalCurve& curve, const std::map<int, FTable>& blocks, int chi_max, int q_max,
                          std::optional<int> heat_order) {
    validate_curve(curve);
    const int ncomp = curve.size();
    std::vector<int> svals;
    std::map<int, Rat> weights;
    for (int a = 1; a <= ncomp; ++a) {
        svals.push_back(s_alpha(curve, a));
        weights[a] = rat(1, svals.back());
        if (!blocks.count(a)) fail("BadParameters", "missing block table for component " + std::to_string(a));
    }
    auto weight_sum = [&](const std::vector<Label>& v) {
        Rat s = 0;
        for (const auto& l : v) s += weights[l.first] * l.second;
        return s;
    };

    // Label set: levels up to q_max plus every level the polarization touches.
    std::set<Label> labelset;
    for (int a = 1; a <= ncomp; ++a)
        for (int q = 1; q <= q_max; ++q) labelset.insert(Label{a, q});
    for (const auto& [key, v] : curve.phi.entries()) {
        labelset.insert(key.first);
        labelset.insert(key.second);
    }
    const std::vector<Label> labels(labelset.begin(), labelset.end());

    // Translation data c_l = (tau_l + delta_{l,s}) / l, skipping levels divisible by r.
    std::vector<std::pair<Label, Rat>> shift;
    for (int a = 1; a <= ncomp; ++a) {
        const auto& c = curve.component(a);
        const int s = svals[static_cast<size_t>(a - 1)];
        std::map<int, Rat> t = c.tau;
        t[s] += 1;
        for (const auto& [l, val] : t) {
            if (l % c.r == 0 || sgn(val) == 0) continue;
            if (l <= s)
                fail("TruncationTooCoarse", "translation along level " + std::to_string(l) +
                                                " <= s does not terminate at fixed Euler characteristic");
            shift.emplace_back(Label{a, l}, val / l);
        }
    }

    auto block_A = [&](int g2, const std::vector<Label>& idx) -> Rat {
        // Block tables carry product structure: entries mixing components vanish.
        const int a = idx.front().first;
        std::vector<Label> local;
        for (const auto& l : idx) {
            if (l.first != a) return Rat(0);
            local.push_back(Label{1, l.second});
        }
        auto v = blocks.at(a).lookup(g2, local);
        if (!v) fail("TruncationTooCoarse", "block entry beyond the block caps is needed");
        return *v / label_mult_factorial(idx);
    };

    // G_0: translated product of blocks, on every stable key within caps.
    ATable G0;
    const int order_cap = heat_order ? *heat_order : INT_MAX;
    for (int n = 1; n <= chi_max + 2; ++n)
        for (int g2 = 0; chi_of(g2, static_cast<size_t>(n)) <= chi_max; g2 += 2) {
            const int chi = chi_of(g2, static_cast<size_t>(n));
            if (chi < 1) continue;
            for_each_multiset(labels, n, [&](const std::vector<Label>& M) {
                Rat slack = Rat(chi) - weight_sum(M);
                if (sgn(slack) < 0) return;
                Rat total = 0;
                std::vector<size_t> counts(shift.size(), 0);
                std::function<void(size_t, Rat, int)> rec = [&](size_t pos, Rat left, int used) {
                    if (pos == shift.size()) {
                        std::vector<Label> N = M;
                        Rat w = 1;
                        for (size_t p = 0; p < shift.size(); ++p) {
                            if (counts[p] == 0) continue;
                            const auto& [lab, c] = shift[p];
                            int have = count_of(M, lab);
                            int e = static_cast<int>(counts[p]);
                            w *= binomial(have + e, e);
                            Rat cp = 1;
                            for (int x = 0; x < e; ++x) cp *= c;
                            w *= cp;
                            for (int x = 0; x < e; ++x) N.push_back(lab);
                        }
                        std::sort(N.begin(), N.end());
                        total += w * block_A(g2, N);
                        return;
                    }
                    const auto& [lab, c] = shift[pos];
                    const Rat cost = weights[lab.first] * lab.second - 1;
                    Rat l2 = left;
                    for (int e = 0; used + e <= order_cap; ++e) {
                        if (e > 0) {
                            l2 -= cost;
                            if (sgn(l2) < 0) break;
                        }
                        counts[pos] = static_cast<size_t>(e);
                        rec(pos + 1, l2, used + e);
                    }
                    counts[pos] = 0;
                };
                rec(0, slack, 0);
                if (sgn(total) != 0) G0[FKey{g2, M}] = total;
            });
        }

    // Heat flow exp(hbar/2 sum B d d) with B_{pq} = phi_{pq}/(l_p l_q).
    std::vector<std::tuple<Label, Label, Rat>> B;
    for (const auto& [key, v] : curve.phi.entries())
        if (sgn(v) != 0) B.emplace_back(key.first, key.second, v / (key.first.second * key.second.second));

    // Constant terms only change the normalization of Z and are dropped.
    auto inside = [&](int g2, const std::vector<Label>& M) {
        if (M.empty()) return false;
        if (chi_of(g2, M.size()) > chi_max || chi_of(g2, M.size()) < 1) return false;
        for (const auto& l : M)
            if (!labelset.count(l)) return false;
        return true;
    };

    std::vector<ATable> Gk{G0};
    ATable G = G0;
    for (int k = 0; k < order_cap && !B.empty(); ++k) {
        ATable next;
        for (const auto& [p, q, b] : B) {
            for (const auto& [key, A] : Gk[static_cast<size_t>(k)]) {
                int np = count_of(key.idx, p);
                int nq = count_of(key.idx, q) - (p == q ? 1 : 0);
                if (np < 1 || nq < 1) continue;
                auto M = remove_one(remove_one(key.idx, p), q);
                if (!inside(key.g2 + 2, M)) continue;
                next[FKey{key.g2 + 2, M}] += rat(1, 2) * b * np * nq * A;
            }
            for (int a = 0; a <= k; ++a)
                for (const auto& [X, AX] : Gk[static_cast<size_t>(a)]) {
                    int xp = count_of(X.idx, p);
                    if (xp < 1) continue;
                    auto Xr = remove_one(X.idx, p);
                    for (const auto& [Y, AY] : Gk[static_cast<size_t>(k - a)]) {
                        int yq = count_of(Y.idx, q);
                        if (yq < 1) continue;
                        auto M = remove_one(Y.idx, q);
                        M.insert(M.end(), Xr.begin(), Xr.end());
                        std::sort(M.begin(), M.end());
                        if (!inside(X.g2 + Y.g2, M)) continue;
                        next[FKey{X.g2 + Y.g2, M}] += rat(1, 2) * b * xp * yq * AX * AY;
                    }
                }
        }
        ATable cleaned;
        for (auto& [key, v] : next)
            if (sgn(v) != 0) cleaned[key] = v / (k + 1);
        if (cleaned.empty()) break;
        for (const auto& [key, v] : cleaned) G[key] += v;
        Gk.push_back(std::move(cleaned));
    }

    FTable out;
    out.chi_max = chi_max;
    out.q_max = q_max;
    out.support = SupportBound{weights};
    for (const auto& [key, A] : G) {
        bool ok = true;
        for (const auto& l : key.idx)
            if (l.second > q_max) ok = false;
        if (ok && sgn(A) != 0) out.set(key.g2, key.idx, A * label_mult_factorial(key.idx));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bouchard-Eynard recursion

BERecursion::BERecursion(const LocalCurve& curve) {
    validate_curve(curve);
    if (curve.size() != 1) fail("BadParameters", "the residue recursion handles one component");
    require_standard(curve, 1);
    r_ = curve.component(1).r;
    s_ = s_alpha(curve, 1);
    if (!coprime(r_, s_)) fail("NotCoprime", "the residue recursion needs gcd(r, s) = 1");
    for (const auto& [l, t] : curve.component(1).tau)
        if (sgn(t) != 0) tau_[l] = t;
}

Rat BERecursion::value(int g, const std::vector<int>& args) {
    if (g < 0 || args.empty()) fail("Unstable", "omega_{g,n} needs g >= 0 and n >= 1");
    if (2 * g - 2 + static_cast<int>(args.size()) <= 0) fail("Unstable", "omega_{0,1} and omega_{0,2} are initial data");
    for (int a : args)
        if (a <= 0) fail("UnknownLabel", "labels must be positive");
    std::vector<int> rest(args.begin() + 1, args.end());
    std::sort(rest.begin(), rest.end());
    long sum = 0;
    for (int a : args) sum += a;
    if (sum > static_cast<long>(s_) * (2 * g - 2 + static_cast<int>(args.size()))) return Rat(0);
    auto key = std::make_tuple(g, args[0], rest);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    Rat v = compute(g, args[0], rest);
    memo_.emplace(key, v);
    return v;
}

BERecursion::Poly BERecursion::block(int h, const std::vector<int>& ws, const std::vector<int>& bs) {
    std::vector<int> sb = bs;
    std::sort(sb.begin(), sb.end());
    auto key = std::make_tuple(h, ws, sb);
    auto it = block_memo_.find(key);
    if (it != block_memo_.end()) return it->second;

    const Cyc zero = Cyc::zero(r_);
    Poly out(zero, 0, {}, std::nullopt);
    const size_t m = ws.size() + sb.size();
    if (h == 0 && m == 2) {
        if (ws.size() == 2) {
            Cyc d = Cyc::theta_pow(r_, ws[0]) - Cyc::theta_pow(r_, ws[1]);
            Cyc c = Cyc::theta_pow(r_, ws[0] + ws[1]) * (d * d).inverse();
            out = Poly::monomial(c, -2);
        } else {
            const int b = sb[0];
            out = Poly::monomial(Cyc::theta_pow(r_, static_cast<long>(ws[0]) * b) * Rat(b), b - 1);
        }
    } else {
        const int chi = 2 * h - 2 + static_cast<int>(m);
        long bound = static_cast<long>(s_) * chi;
        for (int b : sb) bound -= b;
        std::vector<int> a(ws.size(), 1);
        std::function<void(size_t, long)> rec = [&](size_t pos, long left) {
            if (pos == ws.size()) {
                std::vector<int> args = a;
                args.insert(args.end(), sb.begin(), sb.end());
                Rat F = value(h, args);
                if (sgn(F) == 0) return;
                long th = 0;
                int e = 0;
                for (size_t l = 0; l < ws.size(); ++l) {
                    th -= static_cast<long>(ws[l]) * a[l];
                    e -= a[l] + 1;
                }
                out = out + Poly::monomial(Cyc::theta_pow(r_, th) * F, e);
                return;
            }
            const size_t remaining = ws.size() - pos - 1;
            for (long x = 1; x + static_cast<long>(remaining) <= left; ++x) {
                a[pos] = static_cast<int>(x);
                rec(pos + 1, left - x);
            }
        };
        rec(0, bound);
    }
    block_memo_.emplace(key, out);
    return out;
}

BERecursion::Poly BERecursion::kernel_product(const std::vector<int>& subset, int order) {
    auto it = kernel_memo_.find(subset);
    if (it != kernel_memo_.end() && it->second.precision() && *it->second.precision() >= order) return it->second;
    const int v0 = r_ - s_;
    const int each = order - (static_cast<int>(subset.size()) - 1) * v0;
    const Cyc zero = Cyc::zero(r_);
    Poly prod = Poly::monomial(Cyc::one(r_), 0);
    for (int m : subset) {
        // y(t) - y(theta^m t) = sum_l tau_l (1 - theta^{m l}) t^{l - r}.
        Poly diff(zero, 0, {}, std::nullopt);
        for (const auto& [l, t] : tau_) {
            Cyc c = (Cyc::one(r_) - Cyc::theta_pow(r_, static_cast<long>(m) * l)) * t;
            if (!c.is_zero()) diff = diff + Poly::monomial(c, l - r_);
        }
        prod = prod * diff.invert(each);
    }
    prod = prod.truncated(order);
    kernel_memo_.insert_or_assign(subset, prod);
    return prod;
}

Rat BERecursion::compute(int g, int a1, const std::vector<int>& rest) {
    const Cyc zero = Cyc::zero(r_);
    Cyc total = zero;
    const int nb = static_cast<int>(rest.size());

    for (int i = 1; i <= r_ - 1; ++i) {
        // Subsets S of {1..r-1} of size i; R is symmetric in its first
        // arguments, so ordered tuples contribute i! times each subset.
        std::vector<int> S;
        std::function<void(int)> choose = [&](int next) {
            if (static_cast<int>(S.size()) == i) {
                std::vector<int> A{0};
                A.insert(A.end(), S.begin(), S.end());
                const int na = static_cast<int>(A.size());
                Poly R(zero, 0, {}, std::nullopt);

                // Set partitions of A via restricted growth strings.
                std::vector<int> blk(static_cast<size_t>(na), 0);
                std::function<void(int, int)> part = [&](int pos, int nblocks) {
                    if (pos < na) {
                        for (int b = 0; b <= nblocks; ++b) {
                            blk[static_cast<size_t>(pos)] = b;
                            part(pos + 1, std::max(nblocks, b + 1));
                        }
                        return;
                    }
                    const int p = nblocks;
                    const int hsum = g - 1 + p - i;
                    if (hsum < 0) return;
                    std::vector<std::vector<int>> ws(static_cast<size_t>(p));
                    for (int x = 0; x < na; ++x) ws[static_cast<size_t>(blk[static_cast<size_t>(x)])].push_back(A[static_cast<size_t>(x)]);
                    // Distribute the remaining arguments and the genera.
                    std::vector<int> to(static_cast<size_t>(nb), 0);
                    std::function<void(int)> dist = [&](int pos2) {
                        if (pos2 < nb) {
                            for (int b = 0; b < p; ++b) {
                                to[static_cast<size_t>(pos2)] = b;
                                dist(pos2 + 1);
                            }
                            return;
                        }
                        std::vector<std::vector<int>> bs(static_cast<size_t>(p));
                        for (int x = 0; x < nb; ++x) bs[static_cast<size_t>(to[static_cast<size_t>(x)])].push_back(rest[static_cast<size_t>(x)]);
                        std::vector<int> hs(static_cast<size_t>(p), 0);
                        std::function<void(int, int)> gen = [&](int bi, int left) {
                            if (bi == p - 1) {
                                hs[static_cast<size_t>(bi)] = left;
                                for (int x = 0; x < p; ++x) {
                                    const int h = hs[static_cast<size_t>(x)];
                                    const auto m = ws[static_cast<size_t>(x)].size() + bs[static_cast<size_t>(x)].size();
                                    if (h == 0 && m == 1) return;
                                }
                                Poly prod = Poly::monomial(Cyc::one(r_), 0);
                                for (int x = 0; x < p; ++x) {
                                    Poly f = block(hs[static_cast<size_t>(x)], ws[static_cast<size_t>(x)],
                                                   bs[static_cast<size_t>(x)]);
                                    if (f.is_zero()) return;
                                    prod = prod * f;
                                }
                                R = R + prod;
                                return;
                            }
                            for (int h = 0; h <= left; ++h) {
                                hs[static_cast<size_t>(bi)] = h;
                                gen(bi + 1, left - h);
                            }
                        };
                        gen(0, hsum);
                    };
                    dist(0);
                };
                part(1, 1);

                if (!R.is_zero()) {
                    const int shift = a1 - (r_ - 1) * i;
                    const int need = -1 - shift - R.low();
                    Poly K = kernel_product(S, need);
                    Cyc acc = zero;
                    for (size_t x = 0; x < R.coeffs().size(); ++x) {
                        const int e = R.low() + static_cast<int>(x);
                        const int ek = -1 - shift - e;
                        if (ek < K.low()) continue;
                        acc += R.coeffs()[x] * K.coefficient(ek);
                    }
                    if (i % 2 == 0) acc = -acc;
                    total += acc;
                }
                return;
            }
            for (int m = next; m <= r_ - 1; ++m) {
                S.push_back(m);
                choose(m + 1);
                S.pop_back();
            }
        };
        choose(1);
    }
    return total.to_rat();
}

FTable be_recursion(const LocalCurve& curve, int g, int n, int level_cap) {
    BERecursion be(curve);
    FTable out;
    out.chi_max = 2 * g - 2 + n;
    out.q_max = level_cap;
    out.support = SupportBound{{{1, rat(1, be.s())}}};
    std::vector<Label> labels;
    for (int q = 1; q <= level_cap; ++q) labels.push_back(Label{1, q});
    for_each_multiset(labels, n, [&](const std::vector<Label>& idx) {
        std::vector<int> args;
        for (const auto& l : idx) args.push_back(l.second);
        Rat v = be.value(g, args);
        if (sgn(v) != 0) out.set(2 * g, idx, v);
    });
    return out;
}

}  // namespace hqas
