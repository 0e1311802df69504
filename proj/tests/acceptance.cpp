// Acceptance gate: one PASS/FAIL line per criterion. Every comparison is
// exact; the runtime budgets below are the only thresholds.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "hqas/curve.hpp"
#include "hqas/engine.hpp"
#include "hqas/psi.hpp"
#include "hqas/wgl.hpp"
#include "oracle.hpp"

using namespace hqas;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;
};

struct Criterion {
    int number;
    std::string title;
    double budget_seconds;
    std::function<Outcome()> run;
};

LocalCurve one_component(int r, std::map<int, Rat> tau) {
    LocalCurve c;
    c.components.push_back(CurveComponent{r, std::move(tau)});
    return c;
}

LocalCurve rs_curve(int r, int s) { return one_component(r, {{s, Rat(-1)}}); }

std::string rs_text(int r, int s) { return "(" + std::to_string(r) + "," + std::to_string(s) + ")"; }

long table_mismatches(const FTable& a, const FTable& b) {
    long bad = 0;
    for (const auto& [k, v] : a.entries) {
        auto w = b.lookup(k.g2, k.idx);
        if (!w || *w != v) ++bad;
    }
    for (const auto& [k, v] : b.entries) {
        auto w = a.lookup(k.g2, k.idx);
        if (!w || *w != v) ++bad;
    }
    return bad;
}

Outcome psi_identities() {
    Outcome out;
    long checked = 0, failed = 0;
    for (const auto& family : psi_identity_suite(6, 7)) {
        checked += family.checked;
        if (!family.failures.empty()) {
            failed += static_cast<long>(family.failures.size());
            out.detail += " [" + family.name + ": " + family.failures.front() + "]";
        }
    }
    out.ok = failed == 0;
    out.detail = std::to_string(checked) + " evaluations, " + std::to_string(failed) + " failures" + out.detail;
    return out;
}

Outcome closed_forms() {
    ClosedFormReport rep = check_closed_forms(8);
    Outcome out;
    out.ok = rep.mismatches.empty();
    out.detail = std::to_string(rep.pairs.size()) + " pairs, " + std::to_string(rep.checked) + " entries, " +
                 std::to_string(rep.mismatches.size()) + " differ";
    if (!rep.mismatches.empty()) {
        const auto& m = rep.mismatches.front();
        std::string idx;
        for (int q : m.idx) idx += (idx.empty() ? "" : ",") + std::to_string(q);
        out.detail += "; engine = -closed at " + std::to_string(rep.negated) + " of them, e.g. " + rs_text(m.r, m.s) +
                      (m.idx.size() == 1 ? " F11[" : " F03[") + idx + "] engine " + to_string(m.engine) +
                      " closed " + to_string(m.closed);
    }
    return out;
}

Outcome symmetry_classification() {
    Outcome out;
    const std::vector<std::pair<int, int>> symmetric{{2, 1}, {2, 3}, {3, 1}, {3, 2}, {3, 4},
                                                     {4, 3}, {5, 3}, {5, 4}, {5, 6}, {4, 5}};
    for (auto [r, s] : symmetric) {
        Engine e(build_coxeter(r, s));
        auto v = e.check_symmetry(3, 3 * s);
        if (!v.empty()) {
            out.ok = false;
            out.detail += " " + rs_text(r, s) + " asymmetric at " + std::to_string(v.size()) + " entries;";
        }
    }
    for (auto [r, s] : std::vector<std::pair<int, int>>{{7, 5}, {8, 5}, {9, 7}}) {
        Engine e(build_coxeter(r, s, false, true));
        auto v = e.check_symmetry(1, 3 * s);
        if (v.empty()) {
            out.ok = false;
            out.detail += " " + rs_text(r, s) + " unexpectedly symmetric;";
        }
    }
    if (out.ok) out.detail = "10 admissible pairs symmetric at chi <= 3; (7,5) (8,5) (9,7) asymmetric at chi = 1";
    return out;
}

Outcome annihilation() {
    Outcome out;
    for (auto [r, s] : std::vector<std::pair<int, int>>{{2, 3}, {3, 4}, {3, 2}, {4, 3}}) {
        Engine e(build_coxeter(r, s));
        FTable F = e.compute_all(2, 2 * s);
        auto res = e.check_annihilation(F, 2, 2 * s);
        if (!res.empty()) {
            out.ok = false;
            out.detail += " " + rs_text(r, s) + " " + std::to_string(res.size()) + " residuals;";
        }
    }
    if (out.ok) out.detail = "(2,3) (3,4) (3,2) (4,3) residuals zero at chi <= 2, probes <= 2s";
    return out;
}

Outcome raw_coefficient_oracle() {
    Outcome out;
    long checked = 0, bad = 0;
    for (auto [r, s] : std::vector<std::pair<int, int>>{{2, 3}, {3, 4}, {4, 3}}) {
        Engine e(build_coxeter(r, s));
        oracle::COracle o(build_coxeter(r, s), 4 * r * s);
        auto labels = e.spec().labels_upto(s + 1);
        auto expect = [&](const Rat& engine, const Rat& direct) {
            ++checked;
            if (engine != direct) ++bad;
        };
        for (size_t a = 0; a < labels.size(); ++a) {
            const Label& k = labels[a];
            expect(e.compute_F(HalfInt::from_int(1), {k}), o.F11(k));
            for (size_t b = a; b < labels.size(); ++b) {
                expect(e.compute_F(HalfInt::from_int(1), {k, labels[b]}), o.F12(k, labels[b]));
                for (size_t c = b; c < labels.size(); ++c) {
                    expect(e.compute_F(HalfInt::from_int(0), {k, labels[b], labels[c]}),
                           o.F03(k, labels[b], labels[c]));
                    for (size_t d = c; d < labels.size(); ++d)
                        expect(e.compute_F(HalfInt::from_int(0), {k, labels[b], labels[c], labels[d]}),
                               o.F04(k, labels[b], labels[c], labels[d]));
                }
            }
        }
    }
    out.ok = bad == 0;
    out.detail = std::to_string(checked) + " F03/F11/F04/F12 entries on (2,3) (3,4) (4,3), " + std::to_string(bad) +
                 " differ";
    return out;
}

Outcome route_equivalence() {
    Outcome out;
    long checked = 0, bad = 0;
    const std::vector<std::pair<int, int>> pairs{{2, 3}, {2, 1}, {3, 4}, {3, 2}};
    for (auto [r, s] : pairs) {
        LocalCurve c = rs_curve(r, s);
        Engine e(build_operators(c));
        const int cap = 2 * s;
        FTable direct = e.compute_all(2, cap);
        for (auto [g, n] : std::vector<std::pair<int, int>>{{0, 3}, {1, 1}, {0, 4}, {1, 2}}) {
            FTable residues = be_recursion(c, g, n, cap);
            for (const auto& [k, v] : residues.entries) {
                ++checked;
                if (direct.at(k.g2, k.idx) != v) ++bad;
            }
            for (const auto& [k, v] : direct.entries) {
                if (k.g2 != 2 * g || static_cast<int>(k.idx.size()) != n) continue;
                ++checked;
                if (residues.at(k.g2, k.idx) != v) ++bad;
            }
        }
    }
    std::vector<LocalCurve> loop_curves;
    for (auto [r, s] : pairs) loop_curves.push_back(rs_curve(r, s));
    loop_curves.push_back(one_component(3, {{2, Rat(-1)}, {4, rat(1, 3)}, {5, Rat(2)}}));
    long loop_bad = 0;
    for (const auto& c : loop_curves) {
        const int r = c.component(1).r;
        std::vector<LoopKey> keys;
        for (int i = 1; i <= r; ++i)
            for (int k = 0; k <= 3; ++k) keys.push_back({1, i, k});
        std::vector<Label> pool;
        for (int l = 1; l <= 3; ++l) pool.insert(pool.end(), 2, Label{1, l});
        loop_bad += static_cast<long>(check_loop_vs_conjugation(c, keys, pool, 8).size());
    }
    out.ok = bad == 0 && loop_bad == 0;
    out.detail = std::to_string(checked) + " residue-recursion comparisons with " + std::to_string(bad) +
                 " mismatches; loop-vs-conjugation on 5 curves with " + std::to_string(loop_bad) + " mismatches";
    return out;
}

Outcome givental_consistency() {
    Outcome out;
    const std::vector<std::tuple<Label, Label, Rat>> entries{{{1, 1}, {1, 1}, Rat(1)},
                                                             {{1, 1}, {1, 1}, rat(-3, 2)},
                                                             {{1, 1}, {1, 3}, rat(1, 2)},
                                                             {{1, 3}, {1, 3}, Rat(2)}};
    long bad = 0;
    for (const auto& entry : entries) {
        LocalCurve c = rs_curve(2, 3);
        c.phi = Polarization::from_unordered({entry});
        Engine e(build_operators(c));
        FTable direct = e.compute_all(2, 6);
        auto [chi, level] = givental_block_caps(c, 2, 6);
        bad += table_mismatches(direct, givental_transform(c, givental_blocks(c, chi, level), 2, 6));
    }
    out.ok = bad == 0;
    out.detail = "4 single-entry polarizations on (2,3), chi <= 2, labels <= 6: " + std::to_string(bad) + " mismatches";
    return out;
}

Outcome partition_arithmetic() {
    Outcome out;
    long pairs = 0;
    for (int r = 2; r <= 12; ++r)
        for (int s = 1; s <= 3 * r; ++s) {
            if (!coprime(r, s)) continue;
            ++pairs;
            if (sets_agree(r, s) != admissible_rs(r, s)) {
                out.ok = false;
                out.detail += " " + rs_text(r, s);
            }
        }
    out.detail = std::to_string(pairs) + " coprime pairs" + (out.ok ? "" : ", disagreement at" + out.detail);
    return out;
}

Outcome crosscapped_class() {
    Outcome out;
    long checked = 0, bad = 0, residuals = 0;
    for (const Rat& q : {Rat(1), rat(2, 3)}) {
        Engine e(build_cycle_rm1(3, 3, q));
        oracle::COracle o(build_cycle_rm1(3, 3, q), 30);
        auto labels = e.spec().labels_upto(4);
        for (const auto& k : labels) {
            ++checked;
            if (e.compute_F(HalfInt{3}, {k}) != o.F32(k)) ++bad;
            for (const auto& b : labels) {
                if (b < k) continue;
                checked += 2;
                if (e.compute_F(HalfInt{1}, {k, b}) != o.Fh2(k, b)) ++bad;
                if (e.compute_F(HalfInt::from_int(1), {k, b}) != o.F12(k, b) + o.F12_half_genus_source(k, b)) ++bad;
                for (const auto& c : labels) {
                    if (c < b) continue;
                    ++checked;
                    if (e.compute_F(HalfInt{1}, {k, b, c}) != o.Fh3(k, b, c)) ++bad;
                }
            }
        }
        FTable F = e.compute_all(2, 6);
        residuals += static_cast<long>(e.check_annihilation(F, 2, 6).size());
    }
    out.ok = bad == 0 && residuals == 0;
    out.detail = std::to_string(checked) + " half-genus display checks with " + std::to_string(bad) +
                 " mismatches; " + std::to_string(residuals) + " annihilation residuals at chi <= 2";
    return out;
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "root-of-unity sum identities", 60, psi_identities},
        {2, "closed-form F03/F11, r <= 8", 60, closed_forms},
        {3, "symmetry classification", 300, symmetry_classification},
        {4, "annihilation", 300, annihilation},
        {5, "raw-coefficient oracle at chi <= 2", 60, raw_coefficient_oracle},
        {6, "route equivalence", 300, route_equivalence},
        {7, "Givental consistency", 60, givental_consistency},
        {8, "partition arithmetic", 1, partition_arithmetic},
        {9, "crosscapped class", 120, crosscapped_class},
    };
    int failures = 0;
    for (const auto& c : criteria) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& ex) {
            o = {false, std::string("threw ") + ex.what()};
        }
        const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (seconds > c.budget_seconds) {
            o.ok = false;
            o.detail += "; over the " + std::to_string(static_cast<int>(c.budget_seconds)) + " s budget";
        }
        if (!o.ok) ++failures;
        std::printf("%s criterion %d (%s) %.2fs: %s\n", o.ok ? "PASS" : "FAIL", c.number, c.title.c_str(), seconds,
                    o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
