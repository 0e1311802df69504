#include "doctest.h"

#include <algorithm>
#include <random>

#include "hqas/engine.hpp"
#include "hqas/wgl.hpp"

using namespace hqas;

namespace {

Label L(int q) { return Label{1, q}; }
std::vector<Label> idx(std::initializer_list<int> qs) {
    std::vector<Label> out;
    for (int q : qs) out.push_back(L(q));
    return out;
}

std::map<FKey, Rat> nonzero(const FTable& t) { return t.entries; }

}  // namespace

TEST_CASE("the (2,3) structure reproduces Witten-Kontsevich numbers") {
    // x_{2k+1} = t_k/(2k+1)!!, so F[q_1..q_n] = prod (q_l)!! <tau_{(q_l-1)/2}...>.
    Engine e23(build_coxeter(2, 3));
    CHECK(e23.compute_F(HalfInt::from_int(0), idx({1, 1, 1})) == 1);
    CHECK(e23.compute_F(HalfInt::from_int(1), idx({3})) == rat(1, 8));
    CHECK(e23.compute_F(HalfInt::from_int(0), idx({1, 1, 1, 3})) == 3);
    CHECK(e23.compute_F(HalfInt::from_int(1), idx({1, 5})) == rat(15, 24));
    CHECK(e23.compute_F(HalfInt::from_int(1), idx({3, 3})) == rat(9, 24));
    CHECK(e23.compute_F(HalfInt::from_int(0), idx({1, 1, 1, 1, 5})) == 15);
    CHECK(e23.compute_F(HalfInt::from_int(2), idx({9})) == rat(945, 1152));
}

TEST_CASE("F11 is the hbar coefficient of the (2,1) mode") {
    for (int r = 2; r <= 5; ++r)
        for (int s = 1; s <= r + 1; ++s) {
            if (!admissible_rs(r, s) || !coprime(r, s)) continue;
            Engine e(build_coxeter(r, s));
            CHECK(e.compute_F(HalfInt::from_int(1), idx({s})) == rat(static_cast<long>(r) * r - 1, 24));
        }
}

TEST_CASE("compute_all tables") {
    Engine e23(build_coxeter(2, 3));
    auto t = e23.compute_all(1, 3);
    std::map<FKey, Rat> expect{{FKey{0, idx({1, 1, 1})}, Rat(1)}, {FKey{2, idx({3})}, rat(1, 8)}};
    CHECK(nonzero(t) == expect);

    Engine e32(build_coxeter(3, 2));
    t = e32.compute_all(1, 4);
    std::map<FKey, Rat> expect32{{FKey{2, idx({2})}, rat(1, 3)}};
    CHECK(nonzero(t) == expect32);

    CHECK(e23.compute_all(1, 0).entries.empty());
}

TEST_CASE("input validation") {
    Engine e(build_coxeter(2, 3));
    auto code = [&](auto f) {
        try {
            f();
        } catch (const Error& err) {
            return err.code();
        }
        return std::string();
    };
    CHECK(code([&] { e.compute_F(HalfInt{1}, idx({1, 1})); }) == "HalfGenusOnIntegerStructure");
    CHECK(code([&] { e.compute_F(HalfInt::from_int(0), {Label{2, 1}, L(1), L(1)}); }) == "UnknownLabel");
    CHECK(code([&] { e.compute_F(HalfInt::from_int(0), idx({1, 1})); }) == "Unstable");
    Engine red(build_coxeter(2, 3, true));
    CHECK(code([&] { red.compute_F(HalfInt::from_int(0), idx({1, 1, 2})); }) == "UnknownLabel");
}

TEST_CASE("symmetry reports") {
    Engine e53(build_coxeter(5, 3));
    CHECK(e53.check_symmetry(2, 6).empty());
    Engine e21(build_coxeter(2, 1));
    CHECK(e21.check_symmetry(2, 4).empty());
    Engine e75(build_coxeter(7, 5, false, true));
    auto rep = e75.check_symmetry(1, 5);
    REQUIRE(!rep.empty());
    for (const auto& v : rep) {
        CHECK(v.g2 == 0);
        int sum = 0;
        for (const auto& l : v.idx) sum += l.second;
        CHECK(sum == 5);
    }
}

TEST_CASE("annihilation reports") {
    Engine e34(build_coxeter(3, 4));
    auto F = e34.compute_all(2, 8);
    CHECK(e34.check_annihilation(F, 2, 8).empty());
    FTable bad = F;
    bad.set(2, idx({4}), F.at(2, idx({4})) + 1);
    auto rep = e34.check_annihilation(bad, 2, 8);
    REQUIRE(!rep.empty());
    bool has_chi1 = false;
    for (const auto& r : rep) has_chi1 = has_chi1 || r.chi == 1;
    CHECK(has_chi1);

    StructureSpec empty;
    empty.name = "empty";
    Engine none(empty);
    CHECK(none.check_annihilation(FTable{}, 2, 4).empty());
}

TEST_CASE("memo fill order does not change values") {
    auto spec = build_coxeter(3, 4);
    Engine a(spec);
    auto ta = a.compute_all(2, 6);
    std::vector<FKey> keys;
    for (const auto& [k, v] : ta.entries) keys.push_back(k);
    std::mt19937 rng(11);
    std::shuffle(keys.begin(), keys.end(), rng);
    Engine b(spec);
    for (const auto& k : keys) CHECK(b.compute_F(HalfInt{k.g2}, k.idx) == ta.entries.at(k));
}

TEST_CASE("full structures vanish on r-divisible labels and agree with the reduced ones") {
    for (auto [r, s] : std::vector<std::pair<int, int>>{{2, 3}, {3, 4}, {3, 2}, {4, 3}}) {
        Engine full(build_coxeter(r, s));
        Engine red(build_coxeter(r, s, true));
        auto tf = full.compute_all(2, 2 * s);
        auto tr = red.compute_all(2, 2 * s);
        for (const auto& [k, v] : tf.entries)
            for (const auto& l : k.idx) CHECK(l.second % r != 0);
        CHECK(tf.entries == tr.entries);
    }
}

TEST_CASE("support pruning leaves values unchanged") {
    for (auto [r, s] : std::vector<std::pair<int, int>>{{2, 3}, {3, 2}, {3, 4}}) {
        auto spec = build_coxeter(r, s);
        Engine pruned(spec);
        spec.support.reset();
        Engine plain(spec);
        auto labels = spec.labels_upto(s + 2);
        for (int n = 1; n <= 4; ++n)
            for_each_multiset(labels, n, [&](const std::vector<Label>& ix) {
                for (int g = 0; g <= 1; ++g) {
                    if (2 * g - 2 + n <= 0 || 2 * g - 2 + n > 2) continue;
                    CHECK(pruned.compute_F(HalfInt::from_int(g), ix) == plain.compute_F(HalfInt::from_int(g), ix));
                }
            });
    }
}

TEST_CASE("crosscapped flag on an integer structure adds only zero half-genus values") {
    auto spec = build_coxeter(3, 4);
    Engine plain(spec);
    spec.crosscapped = true;
    Engine cc(spec);
    CHECK(plain.compute_all(2, 8).entries == cc.compute_all(2, 8).entries);
}
