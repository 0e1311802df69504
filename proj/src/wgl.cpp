#include "hqas/wgl.hpp"

#include <numeric>

#include "hqas/psi.hpp"

namespace hqas {

namespace {

int floor_div(long a, long b) {
    long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return static_cast<int>(q);
}

long mod(long a, long m) {
    long x = a % m;
    return x < 0 ? x + m : x;
}

}  // namespace

Rat wgl_coeff(int r, int i, int k, int j, const std::vector<long>& alpha) {
    if (i < 1 || i > r || j < 0 || 2 * j > i || static_cast<int>(alpha.size()) != i - 2 * j)
        fail("ArityOutOfRange", "wgl_coeff needs 1 <= i <= r and |alpha| = i - 2j");
    long sum = 0;
    for (long a : alpha) sum += a;
    if (sum != static_cast<long>(r) * (k - i + 1)) return Rat(0);
    Rat c = factorial(i) / (Rat(r) * Rat(mpz_class(1) << j) * factorial(j) * factorial(i - 2 * j));
    return c * psi(r, j, alpha);
}

int frak_d(int r, int s, int i) { return i - 1 - floor_div(static_cast<long>(s) * (i - 1), r); }

bool coprime(int a, int b) { return std::gcd(a, b) == 1; }

bool admissible_rs(int r, int s) {
    if (s < 1 || s > r + 1) return false;
    long m = mod(r, s);
    return m == mod(1, s) || m == mod(-1, s);
}

int pi_s(int r, int s, int i, int k) {
    if (i < 1 || i > r || k < frak_d(r, s, i) + (i == 1 ? 1 : 0))
        fail("NotInIndexSet", "(" + std::to_string(i) + "," + std::to_string(k) + ") is not in the index set");
    return r * k + (s - r) * (i - 1);
}

std::pair<int, int> pi_s_inv(int r, int s, int q) {
    for (int i = 1; i <= r; ++i) {
        long num = static_cast<long>(q) - static_cast<long>(s - r) * (i - 1);
        if (mod(num, r) != 0) continue;
        int k = static_cast<int>(num / r);
        if (k >= frak_d(r, s, i) + (i == 1 ? 1 : 0)) return {i, k};
    }
    fail("NotInIndexSet", "level " + std::to_string(q) + " is not attained for (r,s)=(" + std::to_string(r) + "," +
                              std::to_string(s) + ")");
}

StructureSpec build_coxeter(int r, int s, bool reduced, bool force) {
    if (r < 2 || s < 1 || s > r + 1) fail("BadParameters", "need r >= 2 and 1 <= s <= r + 1");
    if (!coprime(r, s)) fail("NotCoprime", "r and s must be coprime");
    if (!admissible_rs(r, s) && !force) fail("NotAdmissible", "r is not +-1 mod s");
    StructureSpec spec;
    spec.name = std::string("W(gl_") + std::to_string(r) + ") s=" + std::to_string(s) + (reduced ? " reduced" : "");
    spec.components = {1};
    spec.is_variable = [r, reduced](const Label& l) {
        return l.first == 1 && l.second > 0 && !(reduced && l.second % r == 0);
    };
    const DilatonShifts shift{{Label{1, s}, Rat(-1)}};
    spec.operator_for = [r, s, reduced, shift](const Label& l) -> std::optional<OperatorEntry> {
        if (l.first != 1 || l.second <= 0 || (reduced && l.second % r == 0)) return std::nullopt;
        auto [i, k] = pi_s_inv(r, s, l.second);
        ModeSpec m;
        m.comp = 1;
        m.r = r;
        m.i = i;
        m.k = k;
        m.reduced = reduced;
        FamilyPtr fam = dilaton_shift(make_mode_family(m), shift);
        return OperatorEntry{"H^" + std::to_string(i) + "_" + std::to_string(k), fam};
    };
    spec.support = SupportBound{{{1, rat(1, s)}}};
    return spec;
}

StructureSpec build_cycle_rm1(int r, int s, const Rat& q) {
    if (r < 3 || s < 1 || s > r) fail("BadParameters", "need r >= 3 and 1 <= s <= r");
    if (r % s != 0) fail("SDoesNotDivideR", "s must divide r");
    const int r1 = r - 1;
    StructureSpec spec;
    spec.name = "cycle r=" + std::to_string(r) + " s=" + std::to_string(s) + " q=" + to_string(q);
    spec.components = {1, 2};
    spec.crosscapped = true;
    spec.is_variable = [](const Label& l) { return (l.first == 1 || l.first == 2) && l.second > 0; };
    const DilatonShifts shift{{Label{1, s}, Rat(-1)}};

    auto mode1 = [r1, q](int i, int k) {
        ModeSpec m;
        m.comp = 1;
        m.r = r1;
        m.i = i;
        m.k = k;
        m.zero_mode = q;
        return m;
    };
    // r1 * sum_{k1 + k2 = k - 1} W^{1,i}_{k1} J^2_{k2}, times `sign`.
    auto mixed = [r1, q, mode1](int i, int k, int sign) {
        ModeTimesCurrentSpec t;
        t.mode = mode1(i, 0);
        t.total = k - 1;
        t.comp2 = 2;
        t.zero_mode2 = -q;
        t.scale = Rat(sign * r1);
        return make_mode_times_current_family(t);
    };
    auto current2 = [](int k) {
        ModeSpec m;
        m.comp = 2;
        m.r = 1;
        m.i = 1;
        m.k = k;
        return make_mode_family(m);
    };

    spec.operator_for = [=](const Label& l) -> std::optional<OperatorEntry> {
        if (l.second <= 0) return std::nullopt;
        if (l.first == 2) {
            int K = l.second - s + r1;
            return OperatorEntry{"-H^" + std::to_string(r) + "_" + std::to_string(K),
                                 dilaton_shift(mixed(r1, K, -1), shift)};
        }
        if (l.first != 1) return std::nullopt;
        const int p = l.second;
        if (p % r1 == 0) {
            int k = p / r1;
            auto sum = make_sum_family({{Rat(1), make_mode_family(mode1(1, k))},
                                        {Rat(1), current2(k)},
                                        {Rat(1), mixed(r1, r1 - s + k, 1)}});
            return OperatorEntry{"H^1_" + std::to_string(k) + " + H^" + std::to_string(r) + "_" +
                                     std::to_string(r1 - s + k),
                                 dilaton_shift(sum, shift)};
        }
        for (int i = 2; i <= r1; ++i) {
            long num = static_cast<long>(p) - static_cast<long>(s) * (i - 1);
            if (mod(num, r1) != 0) continue;
            int k = static_cast<int>(num / r1) + i - 1;
            if (k < frak_d(r1, s, i)) return std::nullopt;
            auto sum = make_sum_family({{Rat(1), make_mode_family(mode1(i, k))}, {Rat(1), mixed(i - 1, k, 1)}});
            return OperatorEntry{"H^" + std::to_string(i) + "_" + std::to_string(k), dilaton_shift(sum, shift)};
        }
        return std::nullopt;
    };
    spec.support = SupportBound{{{1, rat(1, s)}, {2, rat(r1, s)}}};
    return spec;
}

std::vector<int> s_to_partition(int r, int s) {
    if (s < 1 || s > r + 1 || !coprime(r, s)) fail("NoPartition", "need 1 <= s <= r + 1 coprime with r");
    if (s == r + 1) return std::vector<int>(static_cast<size_t>(r), 1);
    int rr = static_cast<int>(mod(r, s));
    int rp = r / s;
    if (rr != 1 && rr != s - 1) fail("NoPartition", "r is not +-1 mod s");
    if (s == 1) return {r};
    std::vector<int> out;
    for (int a = 0; a < rr; ++a) out.push_back(rp + 1);
    for (int a = rr; a < s; ++a) out.push_back(rp);
    return out;
}

int lambda_of(const std::vector<int>& lambda, int a) {
    int sum = 0;
    for (size_t m = 0; m < lambda.size(); ++m) {
        sum += lambda[m];
        if (sum >= a) return static_cast<int>(m) + 1;
    }
    fail("BadPartition", "index exceeds the partition size");
}

bool lambda_good(const std::vector<int>& lambda, int i, int k) { return k >= i - lambda_of(lambda, i); }

bool sets_agree(int r, int s) {
    // Per i both sets are {k >= bound}; the scalar mode (1,0) is excluded from both.
    std::vector<int> target;
    for (int i = 1; i <= r; ++i) target.push_back(frak_d(r, s, i) + (i == 1 ? 1 : 0));
    std::vector<int> cur;
    bool found = false;
    auto rec = [&](auto&& self, int left, int maxpart) -> void {
        if (found) return;
        if (left == 0) {
            bool ok = true;
            for (int i = 1; i <= r && ok; ++i)
                ok = std::max(i - lambda_of(cur, i), i == 1 ? 1 : 0) == target[static_cast<size_t>(i - 1)];
            found = ok;
            return;
        }
        for (int p = std::min(left, maxpart); p >= 1; --p) {
            cur.push_back(p);
            self(self, left - p, p);
            cur.pop_back();
        }
    };
    rec(rec, r, r);
    return found;
}

Rat f03_closed(int r, int s, int q1, int q2, int q3) {
    if (!admissible_rs(r, s)) fail("NotAdmissible", "closed form needs r = +-1 mod s");
    if (q1 + q2 + q3 != s) return Rat(0);
    Rat prod = Rat(q1) * q2 * q3;
    if (mod(r, s) == mod(-1, s)) {
        int rp = (r - s + 1) / s;
        return -Rat(rp + 1) * prod;
    }
    int rp = (r - 1) / s;
    return Rat(rp) * prod;
}

Rat f11_closed(int r, int s, int q) {
    if (q != s) return Rat(0);
    return -rat(static_cast<long>(r) * r - 1, 24);
}

ClosedFormReport check_closed_forms(int r_max) {
    ClosedFormReport rep;
    auto compare = [&](int r, int s, std::vector<int> idx, const Rat& engine, const Rat& closed) {
        ++rep.checked;
        if (engine == closed) return;
        if (engine == -closed) ++rep.negated;
        rep.mismatches.push_back({r, s, std::move(idx), engine, closed});
    };
    for (int r = 2; r <= r_max; ++r)
        for (int s = 1; s <= r + 1; ++s) {
            if (!coprime(r, s) || !admissible_rs(r, s)) continue;
            rep.pairs.emplace_back(r, s);
            Engine e(build_coxeter(r, s));
            std::vector<int> levels;
            for (int q = 1; q <= s; ++q)
                if (e.spec().is_variable({1, q})) levels.push_back(q);
            for (int q : levels) compare(r, s, {q}, e.compute_F(HalfInt::from_int(1), {{1, q}}), f11_closed(r, s, q));
            for (size_t a = 0; a < levels.size(); ++a)
                for (size_t b = a; b < levels.size(); ++b)
                    for (size_t c = b; c < levels.size(); ++c) {
                        const int q1 = levels[a], q2 = levels[b], q3 = levels[c];
                        compare(r, s, {q1, q2, q3}, e.compute_F(HalfInt::from_int(0), {{1, q1}, {1, q2}, {1, q3}}),
                                f03_closed(r, s, q1, q2, q3));
                    }
        }
    return rep;
}

}  // namespace hqas
