#include "doctest.h"

#include <random>

#include "hqas/psi.hpp"

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

}  // namespace

TEST_CASE("psi0 examples") {
    CHECK(psi0(3, {3}) == 3);
    CHECK(psi0(2, {1, 1}) == -1);
    CHECK(psi0(4, {3, 3, 3, 3}) == -1);
    CHECK(error_code([] { psi0(3, {}); }) == "ArityOutOfRange");
    CHECK(error_code([] { psi0(2, {1, 1, 1}); }) == "ArityOutOfRange");
}

TEST_CASE("psi with pairs") {
    CHECK(psi(2, 1, {}) == rat(-1, 4));
    CHECK(psi(3, 1, {3}) == rat(-1, 3));
    CHECK(psi(5, 2, {}) == rat(4, 3));
}

TEST_CASE("psi brute force examples") {
    CHECK(psi_brute(3, 0, {1, 2}) == rat(-3, 2));
    CHECK(psi_brute(2, 1, {}) == rat(-1, 4));
    CHECK(psi_brute(4, 0, {0, 0, 0, 0}) == 1);
}

TEST_CASE("zero stripping examples") {
    CHECK(psi_zero_strip(3, 0, {3, 0}) == 3);
    CHECK(psi_zero_strip(4, 0, {1, 0}) == 0);
    CHECK(psi_zero_strip(2, 0, {0, 0}) == 1);
}

TEST_CASE("periodicity and permutation symmetry on random arguments") {
    std::mt19937 gen(5);
    for (int r = 2; r <= 8; ++r) {
        std::uniform_int_distribution<long> val(-2 * r, 2 * r);
        for (int t = 0; t < 40; ++t) {
            int i = 1 + static_cast<int>(gen() % static_cast<unsigned>(r));
            int j = static_cast<int>(gen() % static_cast<unsigned>(i / 2 + 1));
            std::vector<long> a;
            for (int k = 0; k < i - 2 * j; ++k) a.push_back(val(gen));
            Rat v = psi(r, j, a);
            if (!a.empty()) {
                std::vector<long> b = a;
                b[gen() % b.size()] += r * static_cast<long>(val(gen) % 3);
                CHECK(psi(r, j, b) == v);
                std::vector<long> c = a;
                std::shuffle(c.begin(), c.end(), gen);
                CHECK(psi(r, j, c) == v);
            }
            if (r <= 6) CHECK(psi_brute(r, j, a) == v);
        }
    }
}

TEST_CASE("brute force is insensitive to argument order and shifts by r") {
    CHECK(psi_brute(5, 1, {1, 4, 0}) == psi_brute(5, 1, {4, 0, 6}));
    CHECK(psi_brute(6, 0, {1, 2, 3}) == psi_brute(6, 0, {3, -4, 1}));
}

TEST_CASE("i! psi0 is an integer multiple of r") {
    for (int r = 1; r <= 7; ++r) {
        for (int i = 1; i <= r; ++i) {
            std::vector<long> a(static_cast<size_t>(i), 0);
            // Enumerate a modest grid of arguments.
            for (int code = 0; code < 200; ++code) {
                int c = code;
                for (int k = 0; k < i; ++k) {
                    a[static_cast<size_t>(k)] = c % r;
                    c /= r;
                }
                Rat v = psi0(r, a) * factorial(i);
                CHECK(v.get_den() == 1);
                CHECK(v.get_num() % r == 0);
            }
        }
    }
}

TEST_CASE("vanishing without a fully divisible set partition") {
    // (1,1) for r = 5: no block structure with all sums divisible by 5.
    CHECK(psi(5, 0, {1, 1}) == 0);
    CHECK(psi(5, 1, {1, 1}) == 0);
    CHECK(psi(7, 0, {1, 2, 3}) == 0);
}
