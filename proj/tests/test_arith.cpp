#include "doctest.h"

#include <random>

#include "hqas/arith.hpp"

using namespace hqas;

namespace {

template <class F>
std::string error_code(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    return "";
}

using RS = LaurentSeries<Rat>;

RS series(int low, std::vector<long> c, std::optional<int> prec = std::nullopt) {
    std::vector<Rat> v;
    for (long x : c) v.emplace_back(x);
    return RS(Rat(0), low, v, prec);
}

}  // namespace

TEST_CASE("rationals stay in lowest terms and round-trip through text") {
    Rat x = rat(6, -4);
    CHECK(x.get_num() == -3);
    CHECK(x.get_den() == 2);
    CHECK(to_string(x) == "-3/2");
    CHECK(parse_rat(" -3/2 ") == x);
    CHECK(parse_rat("4/2") == Rat(2));
    CHECK(to_string(parse_rat("4/2")) == "2");
    CHECK(error_code([] { parse_rat("1/0"); }) == "BadRational");
    CHECK(error_code([] { parse_rat("abc"); }) == "BadRational");
    std::mt19937 gen(7);
    std::uniform_int_distribution<long> d(-50, 50);
    for (int t = 0; t < 200; ++t) {
        long a = d(gen), b = d(gen);
        if (a == 0 || b == 0) continue;
        Rat q = rat(a, b);
        CHECK(q * (Rat(1) / q) == Rat(1));
    }
}

TEST_CASE("half integers serialize doubled values") {
    CHECK(to_string(HalfInt{3}) == "3/2");
    CHECK(to_string(HalfInt{4}) == "2");
    CHECK(parse_halfint("3/2").doubled == 3);
    CHECK(parse_halfint("1").doubled == 2);
    CHECK(error_code([] { parse_halfint("1/3"); }) == "BadHalfInt");
}

TEST_CASE("cyclotomic power sums") {
    CHECK(cyc_power_sum(5, {1, 2, 3, 4}, {1, 1, 1, 1}).to_rat() == -1);
    CHECK(cyc_power_sum(3, {3}, {1}).to_rat() == 1);
    CHECK(cyc_power_sum(4, {2}, {1}).to_rat() == -1);
}

TEST_CASE("cyc_to_rat detects irrational elements") {
    CHECK(cyc_to_rat(Cyc(5, Rat(-1))) == -1);
    CHECK(error_code([] { cyc_to_rat(Cyc::theta_pow(3, 1)); }) == "NotRational");
    CHECK(cyc_to_rat(Cyc::theta_pow(2, 1)) == -1);
}

TEST_CASE("theta^r reduces to one for every order up to 16") {
    for (int r = 1; r <= 16; ++r) {
        Cyc th = Cyc::theta_pow(r, 1);
        Cyc p = Cyc::one(r);
        for (int k = 0; k < r; ++k) p *= th;
        CHECK(p == Cyc::one(r));
        // Powers below r are distinct from one except the zeroth.
        Cyc q = Cyc::one(r);
        for (int k = 1; k < r; ++k) {
            q *= th;
            CHECK_FALSE(q == Cyc::one(r));
        }
    }
}

TEST_CASE("cyclotomic multiplication is commutative, associative and invertible") {
    std::mt19937 gen(11);
    std::uniform_int_distribution<long> d(-5, 5);
    for (int r : {3, 5, 7, 8, 9, 12}) {
        auto rnd = [&] {
            std::vector<long> e;
            std::vector<Rat> w;
            for (int k = 0; k < r; ++k) {
                e.push_back(k);
                w.emplace_back(d(gen));
            }
            return cyc_power_sum(r, e, w);
        };
        for (int t = 0; t < 10; ++t) {
            Cyc a = rnd(), b = rnd(), c = rnd();
            CHECK(a * b == b * a);
            CHECK((a * b) * c == a * (b * c));
            if (!a.is_zero()) CHECK(a * a.inverse() == Cyc::one(r));
        }
    }
}

TEST_CASE("power sums with exponents divisible by r agree with rational evaluation") {
    for (int r = 2; r <= 9; ++r) {
        std::vector<long> e = {0, r, -2L * r, 5L * r};
        std::vector<Rat> w = {rat(1, 2), rat(-3), rat(7, 5), rat(2)};
        Rat direct = 0;
        for (auto& x : w) direct += x;
        CHECK(cyc_to_rat(cyc_power_sum(r, e, w)) == direct);
    }
}

TEST_CASE("laurent inversion examples") {
    RS f = series(1, {1, -1});
    RS g = laurent_invert(f, 2);
    CHECK(g.low() == -1);
    CHECK(g.coefficient(-1) == 1);
    CHECK(g.coefficient(0) == 1);
    CHECK(g.coefficient(1) == 1);
    CHECK(g.coefficient(2) == 1);
    CHECK(error_code([&] { g.coefficient(3); }) == "TruncationTooCoarse");

    RS two = series(0, {2});
    CHECK(laurent_invert(two, 0).coefficient(0) == rat(1, 2));

    RS tinv = series(-1, {1});
    RS t = laurent_invert(tinv, 3);
    CHECK(t.coefficient(1) == 1);
    CHECK(t.coefficient(2) == 0);
    CHECK(t.coefficient(3) == 0);

    CHECK(error_code([] { laurent_invert(series(0, {}), 3); }) == "ZeroSeries");
}

TEST_CASE("laurent residues") {
    CHECK(laurent_residue(series(-1, {3, 5})) == 3);
    CHECK(laurent_residue(series(-2, {1})) == 0);
    CHECK(error_code([] { laurent_residue(series(2, {1}, 0)); }) == "TruncationTooCoarse");
    CHECK(error_code([] { laurent_residue(series(-3, {1, 2}, -2)); }) == "TruncationTooCoarse");
}

TEST_CASE("inverse times series is one up to the requested order") {
    std::mt19937 gen(3);
    std::uniform_int_distribution<long> d(-4, 4);
    for (int t = 0; t < 30; ++t) {
        std::vector<long> c = {d(gen) == 0 ? 1 : d(gen) + 5};
        for (int k = 0; k < 5; ++k) c.push_back(d(gen));
        int low = static_cast<int>(d(gen));
        RS f = series(low, c);
        if (f.is_zero()) continue;
        int order = 6;
        RS g = f.invert(order);
        RS prod = f * g;
        CHECK(prod.coefficient(0) == 1);
        for (int e = 1; e <= order + low + 0 && prod.known(e); ++e) CHECK(prod.coefficient(e) == 0);
        for (int e = -5; e < 0; ++e) CHECK(prod.coefficient(e) == 0);
    }
}

TEST_CASE("laurent series over the cyclotomic field") {
    using SC = LaurentSeries<Cyc>;
    Cyc th = Cyc::theta_pow(5, 1);
    SC f(th, 0, {Cyc::one(5), -th}, std::nullopt);  // 1 - th t
    SC g = f.invert(4);
    SC p = f * g;
    CHECK(p.coefficient(0) == Cyc::one(5));
    for (int e = 1; e <= 4; ++e) CHECK(p.coefficient(e).is_zero());
    CHECK(g.coefficient(4) == Cyc::theta_pow(5, 4));
}
