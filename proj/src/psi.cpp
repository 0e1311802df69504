#include "hqas/psi.hpp"

#include <algorithm>
#include <functional>
#include <numeric>
#include <map>
#include <mutex>
#include <shared_mutex>
#include <tuple>

namespace hqas {

namespace {

void check_arity(int r, int j, size_t nargs) {
    long i = static_cast<long>(nargs) + 2L * j;
    if (r < 1 || j < 0 || i < 1 || i > r) {
        fail("ArityOutOfRange", "need 1 <= |args| + 2j <= r (r=" + std::to_string(r) + ", j=" + std::to_string(j) +
                                    ", |args|=" + std::to_string(nargs) + ")");
    }
}

long mod(long a, long r) { return ((a % r) + r) % r; }

using Key = std::tuple<int, int, std::vector<long>>;

struct Memo {
    std::shared_mutex mutex;
    std::map<Key, Rat> values;
};

Memo& memo() {
    static Memo m;
    return m;
}

// i! * Psi(args) as a sum over set partitions, by a subset recursion that
// always places the lowest remaining element in the next block.
Rat psi0_times_factorial(int r, const std::vector<long>& a) {
    const int n = static_cast<int>(a.size());
    const unsigned full = (1u << n) - 1;
    std::vector<long> block_sum(1u << n, 0);
    std::vector<int> block_size(1u << n, 0);
    for (unsigned mask = 1; mask <= full; ++mask) {
        int low = __builtin_ctz(mask);
        unsigned rest = mask & (mask - 1);
        block_sum[mask] = block_sum[rest] + a[static_cast<size_t>(low)];
        block_size[mask] = block_size[rest] + 1;
    }
    std::vector<Rat> f(1u << n, Rat(0));
    f[0] = 1;
    for (unsigned mask = 1; mask <= full; ++mask) {
        int low = __builtin_ctz(mask);
        unsigned lowbit = 1u << low;
        unsigned others = mask & ~lowbit;
        Rat acc = 0;
        // Iterate over all subsets of `others` to complete the block of `low`.
        for (unsigned sub = others;; sub = (sub - 1) & others) {
            unsigned block = sub | lowbit;
            if (mod(block_sum[block], r) == 0) {
                int b = block_size[block];
                Rat w = factorial(b - 1) * r;
                if ((b - 1) % 2 != 0) w = -w;
                acc += w * f[mask & ~block];
            }
            if (sub == 0) break;
        }
        f[mask] = acc;
    }
    return f[full];
}

}  // namespace

std::vector<long> psi_normalize(int r, const std::vector<long>& args) {
    std::vector<long> out;
    out.reserve(args.size());
    for (long a : args) out.push_back(mod(a, r));
    std::sort(out.begin(), out.end());
    return out;
}

Rat psi0(int r, const std::vector<long>& args) {
    check_arity(r, 0, args.size());
    return psi(r, 0, args);
}

Rat psi(int r, int j, const std::vector<long>& args) {
    check_arity(r, j, args.size());
    Key key{r, j, psi_normalize(r, args)};
    {
        std::shared_lock lock(memo().mutex);
        auto it = memo().values.find(key);
        if (it != memo().values.end()) return it->second;
    }
    const std::vector<long>& a = std::get<2>(key);
    Rat value;
    if (j == 0) {
        value = psi0_times_factorial(r, a) / factorial(static_cast<int>(a.size()));
    } else {
        value = 0;
        for (long p = 1; p < r; ++p) {
            std::vector<long> b = a;
            b.push_back(p);
            b.push_back(r - p);
            value += rat(p * (r - p), 2L * r) * psi(r, j - 1, b);
        }
    }
    std::unique_lock lock(memo().mutex);
    memo().values.emplace(std::move(key), value);
    return value;
}

Rat psi_brute(int r, int j, const std::vector<long>& args) {
    check_arity(r, j, args.size());
    const int i = static_cast<int>(args.size()) + 2 * j;
    // Pair kernel th^{m+m'}/(th^{m'}-th^{m})^2 for distinct m, m'.
    std::vector<std::vector<Cyc>> kernel(static_cast<size_t>(r), std::vector<Cyc>(static_cast<size_t>(r), Cyc(r)));
    if (j > 0) {
        for (int m1 = 0; m1 < r; ++m1)
            for (int m2 = 0; m2 < r; ++m2) {
                if (m1 == m2) continue;
                Cyc d = Cyc::theta_pow(r, m2) - Cyc::theta_pow(r, m1);
                kernel[m1][m2] = Cyc::theta_pow(r, m1 + m2) * (d * d).inverse();
            }
    }
    // acc[e] collects the pair-kernel products of tuples whose argument
    // exponent sum_l m_l a_l is congruent to e.
    std::vector<Cyc> acc(static_cast<size_t>(r), Cyc(r));
    std::vector<int> m(static_cast<size_t>(i), 0);
    std::vector<bool> used(static_cast<size_t>(r), false);
    auto rec = [&](auto&& self, int pos, const Cyc& pair_product, long exponent) -> void {
        if (pos == i) {
            acc[static_cast<size_t>(mod(exponent, r))] += pair_product;
            return;
        }
        for (int v = 0; v < r; ++v) {
            if (used[v]) continue;
            used[v] = true;
            m[pos] = v;
            if (pos < 2 * j) {
                if (pos % 2 == 1) {
                    self(self, pos + 1, pair_product * kernel[m[pos - 1]][v], exponent);
                } else {
                    self(self, pos + 1, pair_product, exponent);
                }
            } else {
                self(self, pos + 1, pair_product, exponent + v * args[pos - 2 * j]);
            }
            used[v] = false;
        }
    };
    rec(rec, 0, Cyc::one(r), 0);
    Cyc total(r);
    for (int e = 0; e < r; ++e) {
        if (acc[e].is_zero()) continue;
        total += acc[e] * Cyc::theta_pow(r, -e);
    }
    return total.to_rat() / factorial(i);
}

Rat psi_zero_strip(int r, int j, const std::vector<long>& args) {
    check_arity(r, j, args.size());
    std::vector<long> kept;
    for (long a : args)
        if (mod(a, r) != 0) kept.push_back(a);
    const int i = static_cast<int>(args.size()) + 2 * j;
    const int l = static_cast<int>(args.size() - kept.size());
    Rat factor = factorial(i - l) / factorial(i) * factorial(r - i + l) / factorial(r - i);
    if (kept.empty() && j == 0) return factor;
    return factor * psi(r, j, kept);
}

}  // namespace hqas

// ---------------------------------------------------------------------------
// Identity suite

namespace hqas {

namespace {

Rat delta(long r, long a) { return mod(a, r) == 0 ? Rat(1) : Rat(0); }

std::string args_text(int r, int j, const std::vector<long>& a) {
    std::string s = "r=" + std::to_string(r) + " j=" + std::to_string(j) + " args=(";
    for (size_t x = 0; x < a.size(); ++x) s += (x ? "," : "") + std::to_string(a[x]);
    return s + ")";
}

void expect(PsiIdentityResult& res, const Rat& got, const Rat& want, const std::string& what) {
    ++res.checked;
    if (got != want && res.failures.size() < 20) res.failures.push_back(what + ": " + to_string(got) + " != " + to_string(want));
}

}  // namespace

std::vector<PsiIdentityResult> psi_identity_suite(int brute_r_max, int special_r_max) {
    std::vector<PsiIdentityResult> out;

    {
        PsiIdentityResult res{"psi equals psi_brute", 0, {}};
        for (int r = 1; r <= brute_r_max; ++r)
            for (int i = 1; i <= r; ++i)
                for (int j = 0; 2 * j <= i; ++j) {
                    const int n = i - 2 * j;
                    std::vector<long> rho(static_cast<size_t>(n), 0);
                    // Every ordered residue tuple, then every lift into {-r..r}.
                    std::function<void(int)> residues = [&](int pos) {
                        if (pos < n) {
                            for (long v = 0; v < r; ++v) {
                                rho[static_cast<size_t>(pos)] = v;
                                residues(pos + 1);
                            }
                            return;
                        }
                        const Rat b = psi_brute(r, j, rho);
                        std::vector<long> lift(rho.size());
                        std::function<void(int)> lifts = [&](int q) {
                            if (q < n) {
                                long v = rho[static_cast<size_t>(q)];
                                for (long x = v - r; x <= r; x += r) {
                                    if (x < -r) continue;
                                    lift[static_cast<size_t>(q)] = x;
                                    lifts(q + 1);
                                }
                                return;
                            }
                            ++res.checked;
                            if (psi(r, j, lift) != b && res.failures.size() < 20)
                                res.failures.push_back(args_text(r, j, lift) + ": psi != psi_brute");
                        };
                        lifts(0);
                    };
                    residues(0);
                }
        out.push_back(std::move(res));
    }

    {
        PsiIdentityResult res{"small arity closed forms", 0, {}};
        for (long r = 1; r <= special_r_max; ++r)
            for (long a1 = -2 * r; a1 <= 2 * r; ++a1) {
                expect(res, psi(static_cast<int>(r), 0, {a1}), Rat(r) * delta(r, a1), args_text(static_cast<int>(r), 0, {a1}));
                if (r < 2) continue;
                for (long a2 = -r; a2 <= r; ++a2) {
                    Rat want = rat(1, 2) * (Rat(r * r) * delta(r, a1) * delta(r, a2) - Rat(r) * delta(r, a1 + a2));
                    expect(res, psi(static_cast<int>(r), 0, {a1, a2}), want, args_text(static_cast<int>(r), 0, {a1, a2}));
                    if (r < 3) continue;
                    for (long a3 = -r; a3 <= r; ++a3) {
                        Rat w3 = Rat(r * r * r) * delta(r, a1) * delta(r, a2) * delta(r, a3) -
                                 Rat(r * r) * (delta(r, a1) * delta(r, a2 + a3) + delta(r, a2) * delta(r, a1 + a3) +
                                               delta(r, a3) * delta(r, a1 + a2)) +
                                 Rat(2 * r) * delta(r, a1 + a2 + a3);
                        expect(res, psi(static_cast<int>(r), 0, {a1, a2, a3}), w3 / 6,
                               args_text(static_cast<int>(r), 0, {a1, a2, a3}));
                    }
                }
                if (r >= 3) {
                    Rat want = -rat(r * (r - 2) * (r * r - 1), 72) * delta(r, a1);
                    expect(res, psi(static_cast<int>(r), 1, {a1}), want, args_text(static_cast<int>(r), 1, {a1}));
                }
            }
        for (long r = 2; r <= special_r_max; ++r)
            expect(res, psi(static_cast<int>(r), 1, {}), -rat(r * (r * r - 1), 24), args_text(static_cast<int>(r), 1, {}));
        out.push_back(std::move(res));
    }

    {
        PsiIdentityResult res{"i Psi(r-1,...,r-1,i-1) = (-1)^(i-1) r", 0, {}};
        for (int r = 1; r <= special_r_max; ++r)
            for (int i = 1; i <= r; ++i) {
                std::vector<long> a(static_cast<size_t>(i - 1), r - 1);
                a.push_back(i - 1);
                expect(res, Rat(i) * psi(r, 0, a), Rat((i - 1) % 2 ? -r : r), args_text(r, 0, a));
            }
        out.push_back(std::move(res));
    }

    {
        // Printed form for coprime s; the (-1)^k binom(d-1,k) form for every s.
        PsiIdentityResult coprime{"i Psi(-s,...,-s,(i-1)s), coprime s", 0, {}};
        PsiIdentityResult general{"i Psi(-s,...,-s,(i-1)s), all s", 0, {}};
        for (int r = 1; r <= special_r_max; ++r)
            for (int s = 1; s <= r + 1; ++s) {
                const int d = std::gcd(r, s);
                const int rp = r / d;
                for (int i = 1; i <= r; ++i) {
                    std::vector<long> a(static_cast<size_t>(i - 1), -s);
                    a.push_back(static_cast<long>(i - 1) * s);
                    const Rat got = Rat(i) * psi(r, 0, a);
                    const int k = (i - 1) / rp;
                    const Rat sign = (i - 1) % 2 ? Rat(-1) : Rat(1);
                    expect(general, got, sign * r * (k % 2 ? Rat(-1) : Rat(1)) * binomial(d - 1, k), args_text(r, 0, a));
                    if (d == 1) {
                        Rat printed = 0;
                        if (rp % 2 == 0) {
                            for (int x = 0; x <= k; ++x) printed += binomial(d, k);
                        } else {
                            printed = (k % 2 ? Rat(-1) : Rat(1)) * binomial(d - 1, k);
                        }
                        expect(coprime, got, sign * r * printed, args_text(r, 0, a));
                    }
                }
            }
        out.push_back(std::move(coprime));
        out.push_back(std::move(general));
    }

    {
        PsiIdentityResult res{"Psi(0,...,0,a,...,a) for a coprime to r", 0, {}};
        for (int r = 1; r <= special_r_max; ++r)
            for (long a = -2 * r; a <= 2 * r; ++a) {
                if (std::gcd(static_cast<long>(r), a < 0 ? -a : a) != 1) continue;
                for (int i = 1; i <= r; ++i)
                    for (int b = 0; b <= i; ++b) {
                        std::vector<long> args(static_cast<size_t>(b), 0);
                        args.insert(args.end(), static_cast<size_t>(i - b), a);
                        // b = i is the all-zero tuple, equal to binom(r, i) by definition.
                        Rat want = b == i ? binomial(r, i) : (b == 0 ? (i == r ? Rat((r - 1) % 2 ? -1 : 1) : Rat(0)) : Rat(0));
                        expect(res, psi(r, 0, args), want, args_text(r, 0, args));
                    }
            }
        out.push_back(std::move(res));
    }

    {
        PsiIdentityResult res{"zero stripping", 0, {}};
        for (int r = 1; r <= std::min(special_r_max, 6); ++r)
            for (int i = 1; i <= r; ++i)
                for (int j = 0; 2 * j <= i; ++j)
                    for (int ell = 0; ell <= i - 2 * j; ++ell) {
                        const int n = i - 2 * j - ell;
                        std::vector<long> a(static_cast<size_t>(n), 0);
                        std::function<void(int)> rec = [&](int pos) {
                            if (pos < n) {
                                for (long v = 1 - r; v <= r - 1; ++v) {
                                    a[static_cast<size_t>(pos)] = v;
                                    rec(pos + 1);
                                }
                                return;
                            }
                            std::vector<long> with = a;
                            with.insert(with.end(), static_cast<size_t>(ell), 0);
                            const Rat full = psi(r, j, with);
                            Rat want;
                            if (n + 2 * j == 0) {
                                // Psi of the empty tuple is 1: every summand of the all-zero sum is 1.
                                want = factorial(r) / (factorial(i) * factorial(r - i));
                            } else {
                                want = factorial(i - ell) / factorial(i) * factorial(r - i + ell) / factorial(r - i) *
                                       psi(r, j, a);
                            }
                            expect(res, full, want, args_text(r, j, with));
                            expect(res, psi_zero_strip(r, j, with), full, args_text(r, j, with) + " strip");
                        };
                        rec(0);
                    }
        out.push_back(std::move(res));
    }

    {
        PsiIdentityResult res{"i = 4 formulas for r in {4,5,6}", 0, {}};
        for (long r = 4; r <= 6; ++r) {
            for (long a3 = -r; a3 <= r; ++a3)
                for (long a4 = -r; a4 <= r; ++a4) {
                    Rat want = -rat((r + 1) * r * r * (r - 1) * (r - 4), 12) * delta(r, a3) * delta(r, a4) +
                               (rat((r + 1) * r * (r - 1) * (r - 6), 12) + Rat(r * mod(a3, r) * mod(a4, r))) *
                                   delta(r, a3 + a4);
                    expect(res, Rat(24) * psi(static_cast<int>(r), 1, {a3, a4}), want,
                           args_text(static_cast<int>(r), 1, {a3, a4}));
                }
            expect(res, Rat(24) * psi(static_cast<int>(r), 2, {}),
                   rat((r + 1) * r * (r - 1) * (r - 2) * (r - 3) * (5 * r + 7), 720),
                   args_text(static_cast<int>(r), 2, {}));
        }
        out.push_back(std::move(res));
    }
    return out;
}

}  // namespace hqas
