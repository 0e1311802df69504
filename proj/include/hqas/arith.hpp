#pragma once

#include <gmpxx.h>

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hqas/errors.hpp"

namespace hqas {

// ---------------------------------------------------------------------------
// Rationals

using Rat = mpq_class;

Rat rat(long num, long den = 1);
std::string to_string(const Rat& x);
// Accepts "p", "p/q" and optional surrounding whitespace; throws BadRational.
Rat parse_rat(const std::string& text);
Rat factorial(int n);
Rat binomial(int n, int k);

// ---------------------------------------------------------------------------
// Half-integers, stored doubled.

struct HalfInt {
    int doubled = 0;

    static constexpr HalfInt from_int(int v) { return HalfInt{2 * v}; }
    static constexpr HalfInt from_doubled(int d) { return HalfInt{d}; }

    bool is_integer() const { return doubled % 2 == 0; }
    Rat value() const { Rat v(doubled, 2); v.canonicalize(); return v; }

    friend auto operator<=>(const HalfInt&, const HalfInt&) = default;
    friend HalfInt operator+(HalfInt a, HalfInt b) { return HalfInt{a.doubled + b.doubled}; }
    friend HalfInt operator-(HalfInt a, HalfInt b) { return HalfInt{a.doubled - b.doubled}; }
};

std::string to_string(HalfInt h);
HalfInt parse_halfint(const std::string& text);

// ---------------------------------------------------------------------------
// Cyclotomic field Q(theta_r), theta_r = exp(2 pi i / r), stored as a
// polynomial in theta reduced modulo the r-th cyclotomic polynomial.

// Integer coefficients of Phi_r, lowest degree first.
const std::vector<Rat>& cyclotomic_polynomial(int r);
int euler_phi(int r);

class Cyc {
public:
    Cyc() : Cyc(1) {}
    explicit Cyc(int order);
    Cyc(int order, const Rat& value);

    static Cyc zero(int order) { return Cyc(order); }
    static Cyc one(int order) { return Cyc(order, Rat(1)); }
    // theta^e for any integer e (taken modulo r).
    static Cyc theta_pow(int order, long e);

    int order() const { return order_; }
    const std::vector<Rat>& coeffs() const { return coeffs_; }

    bool is_zero() const;
    bool is_rational() const;
    // Throws NotRational when a non-constant coordinate is nonzero.
    Rat to_rat() const;
    Cyc inverse() const;

    Cyc& operator+=(const Cyc& o);
    Cyc& operator-=(const Cyc& o);
    Cyc& operator*=(const Cyc& o);
    Cyc& operator*=(const Rat& k);

    friend Cyc operator+(Cyc a, const Cyc& b) { return a += b; }
    friend Cyc operator-(Cyc a, const Cyc& b) { return a -= b; }
    friend Cyc operator*(Cyc a, const Cyc& b) { return a *= b; }
    friend Cyc operator*(Cyc a, const Rat& k) { return a *= k; }
    friend Cyc operator*(const Rat& k, Cyc a) { return a *= k; }
    Cyc operator-() const;
    friend bool operator==(const Cyc& a, const Cyc& b);

    std::string str() const;

private:
    void check_same(const Cyc& o) const;

    int order_ = 1;
    std::vector<Rat> coeffs_;
};

// Sum of weights[m] * theta^exponents[m].
Cyc cyc_power_sum(int r, const std::vector<long>& exponents, const std::vector<Rat>& weights);
Rat cyc_to_rat(const Cyc& x);

// ---------------------------------------------------------------------------
// Truncated Laurent series in t over Rat or Cyc.
//
// Coefficients are stored from exponent `low()` upwards. A truncated series
// knows every coefficient of exponent <= precision(); exponents above it are
// unknown. An exact series knows all coefficients. A truncated series whose
// lowest stored term already lies above its precision carries no determined
// coefficient at all.

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rat> {
    static Rat zero_like(const Rat&) { return Rat(0); }
    static Rat one_like(const Rat&) { return Rat(1); }
    static bool is_zero(const Rat& x) { return sgn(x) == 0; }
    static Rat inverse(const Rat& x) { return Rat(1) / x; }
};

template <>
struct ScalarTraits<Cyc> {
    static Cyc zero_like(const Cyc& x) { return Cyc::zero(x.order()); }
    static Cyc one_like(const Cyc& x) { return Cyc::one(x.order()); }
    static bool is_zero(const Cyc& x) { return x.is_zero(); }
    static Cyc inverse(const Cyc& x) { return x.inverse(); }
};

template <class S>
class LaurentSeries {
public:
    using Traits = ScalarTraits<S>;

    // `prototype` fixes the scalar kind (e.g. the cyclotomic order).
    explicit LaurentSeries(S prototype) : zero_(Traits::zero_like(prototype)) {}

    LaurentSeries(S prototype, int low, std::vector<S> coeffs, std::optional<int> precision)
        : zero_(Traits::zero_like(prototype)), low_(low), coeffs_(std::move(coeffs)), prec_(precision) {
        normalize();
    }

    static LaurentSeries monomial(const S& c, int exponent, std::optional<int> precision = std::nullopt) {
        return LaurentSeries(c, exponent, {c}, precision);
    }

    int low() const { return low_; }
    const std::vector<S>& coeffs() const { return coeffs_; }
    std::optional<int> precision() const { return prec_; }
    bool exact() const { return !prec_.has_value(); }
    bool is_zero() const { return coeffs_.empty(); }
    const S& zero() const { return zero_; }

    bool known(int e) const {
        if (exact()) return true;
        if (e > *prec_) return false;
        if (!coeffs_.empty() && low_ > *prec_) return false;
        return true;
    }

    S coefficient(int e) const {
        if (!known(e)) fail("TruncationTooCoarse", "coefficient of t^" + std::to_string(e) + " is beyond the truncation");
        if (e < low_ || e >= low_ + static_cast<int>(coeffs_.size())) return zero_;
        return coeffs_[e - low_];
    }

    LaurentSeries shifted(int k) const {
        LaurentSeries out = *this;
        out.low_ += k;
        if (out.prec_) *out.prec_ += k;
        return out;
    }

    LaurentSeries truncated(int precision) const {
        LaurentSeries out = *this;
        out.prec_ = out.prec_ ? std::min(*out.prec_, precision) : precision;
        out.normalize();
        return out;
    }

    LaurentSeries& operator*=(const S& k) {
        for (auto& c : coeffs_) c *= k;
        normalize();
        return *this;
    }

    friend LaurentSeries operator+(const LaurentSeries& a, const LaurentSeries& b) {
        std::optional<int> prec = min_prec(a.prec_, b.prec_);
        if (a.is_zero() && b.is_zero()) return LaurentSeries(a.zero_, 0, {}, prec);
        int lo = a.is_zero() ? b.low_ : (b.is_zero() ? a.low_ : std::min(a.low_, b.low_));
        int hi = std::max(a.high(), b.high());
        if (prec) hi = std::min(hi, *prec);
        std::vector<S> c;
        for (int e = lo; e <= hi; ++e) c.push_back(a.raw(e) + b.raw(e));
        return LaurentSeries(a.zero_, lo, std::move(c), prec);
    }

    friend LaurentSeries operator-(const LaurentSeries& a, const LaurentSeries& b) {
        LaurentSeries nb = b;
        for (auto& c : nb.coeffs_) c = nb.zero_ - c;
        return a + nb;
    }

    friend LaurentSeries operator*(const LaurentSeries& a, const LaurentSeries& b) {
        // Absolute precision of a product: each factor's relative precision
        // shifted by the other factor's valuation.
        std::optional<int> prec;
        if (a.prec_ || b.prec_) {
            int pa = a.prec_ ? *a.prec_ - a.low_ : INT32_MAX / 4;
            int pb = b.prec_ ? *b.prec_ - b.low_ : INT32_MAX / 4;
            if (a.is_zero() || b.is_zero()) {
                int p = INT32_MAX / 4;
                if (a.prec_) p = std::min(p, *a.prec_ + (b.is_zero() ? 0 : b.low_));
                if (b.prec_) p = std::min(p, *b.prec_ + (a.is_zero() ? 0 : a.low_));
                return LaurentSeries(a.zero_, 0, {}, p);
            }
            prec = a.low_ + b.low_ + std::min(pa, pb);
        }
        if (a.is_zero() || b.is_zero()) return LaurentSeries(a.zero_, 0, {}, prec);
        int lo = a.low_ + b.low_;
        int hi = a.high() + b.high();
        if (prec) hi = std::min(hi, *prec);
        if (hi < lo) return LaurentSeries(a.zero_, lo, {}, prec);
        std::vector<S> c(static_cast<size_t>(hi - lo + 1), a.zero_);
        for (size_t i = 0; i < a.coeffs_.size(); ++i) {
            if (Traits::is_zero(a.coeffs_[i])) continue;
            for (size_t j = 0; j < b.coeffs_.size(); ++j) {
                int e = lo + static_cast<int>(i + j);
                if (e > hi) break;
                c[i + j] += a.coeffs_[i] * b.coeffs_[j];
            }
        }
        return LaurentSeries(a.zero_, lo, std::move(c), prec);
    }

    // g with f * g = 1, knowing every coefficient of g up to t^order.
    LaurentSeries invert(int order) const {
        int v = low_;
        if (is_zero() || (prec_ && v > *prec_)) fail("ZeroSeries", "series has no nonzero coefficient below its truncation");
        int glow = -v;
        if (order < glow) return LaurentSeries(zero_, glow, {}, order);
        int n = order - glow + 1;
        if (prec_ && *prec_ - v + 1 < n) {
            fail("TruncationTooCoarse", "input precision too small for the requested inverse order");
        }
        S inv0 = Traits::inverse(coeffs_[0]);
        std::vector<S> g(static_cast<size_t>(n), zero_);
        for (int m = 0; m < n; ++m) {
            S acc = (m == 0) ? Traits::one_like(zero_) : zero_;
            for (int k = 1; k <= m && k < static_cast<int>(coeffs_.size()); ++k) acc -= coeffs_[k] * g[m - k];
            g[m] = acc * inv0;
        }
        return LaurentSeries(zero_, glow, std::move(g), order);
    }

    S residue() const { return coefficient(-1); }

private:
    static std::optional<int> min_prec(std::optional<int> a, std::optional<int> b) {
        if (!a) return b;
        if (!b) return a;
        return std::min(*a, *b);
    }

    int high() const { return low_ + static_cast<int>(coeffs_.size()) - 1; }

    S raw(int e) const {
        if (e < low_ || e > high()) return zero_;
        return coeffs_[e - low_];
    }

    void normalize() {
        size_t first = 0;
        while (first < coeffs_.size() && Traits::is_zero(coeffs_[first])) ++first;
        if (first == coeffs_.size()) {
            coeffs_.clear();
            return;
        }
        coeffs_.erase(coeffs_.begin(), coeffs_.begin() + static_cast<long>(first));
        low_ += static_cast<int>(first);
        if (prec_ && low_ <= *prec_) {
            size_t keep = static_cast<size_t>(*prec_ - low_ + 1);
            if (coeffs_.size() > keep) coeffs_.resize(keep);
        }
        while (!coeffs_.empty() && Traits::is_zero(coeffs_.back())) coeffs_.pop_back();
    }

    S zero_;
    int low_ = 0;
    std::vector<S> coeffs_;
    std::optional<int> prec_;
};

template <class S>
LaurentSeries<S> laurent_invert(const LaurentSeries<S>& f, int order) {
    return f.invert(order);
}

template <class S>
S laurent_residue(const LaurentSeries<S>& f) {
    return f.residue();
}

}  // namespace hqas
