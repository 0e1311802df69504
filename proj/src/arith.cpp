#include "hqas/arith.hpp"

#include <cctype>
#include <map>
#include <mutex>
#include <numeric>

namespace hqas {

Rat rat(long num, long den) {
    Rat x(num, den);
    x.canonicalize();
    return x;
}

std::string to_string(const Rat& x) { return x.get_str(); }

Rat parse_rat(const std::string& text) {
    size_t b = 0, e = text.size();
    while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
    std::string t = text.substr(b, e - b);
    if (t.empty()) fail("BadRational", "empty rational literal");
    size_t slash = t.find('/');
    auto valid_int = [](const std::string& s) {
        size_t i = (!s.empty() && (s[0] == '-' || s[0] == '+')) ? 1 : 0;
        if (i >= s.size()) return false;
        for (; i < s.size(); ++i)
            if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
        return true;
    };
    std::string num = slash == std::string::npos ? t : t.substr(0, slash);
    std::string den = slash == std::string::npos ? "1" : t.substr(slash + 1);
    if (!num.empty() && num[0] == '+') num = num.substr(1);
    if (!valid_int(num) || !valid_int(den) || den[0] == '-' || den[0] == '+') {
        fail("BadRational", "cannot parse rational '" + text + "'");
    }
    mpz_class n(num), d(den);
    if (d == 0) fail("BadRational", "zero denominator in '" + text + "'");
    Rat x(n, d);
    x.canonicalize();
    return x;
}

Rat factorial(int n) {
    mpz_class f = 1;
    for (int k = 2; k <= n; ++k) f *= k;
    return Rat(f);
}

Rat binomial(int n, int k) {
    if (k < 0 || k > n) return Rat(0);
    mpz_class out;
    mpz_bin_uiui(out.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return Rat(out);
}

std::string to_string(HalfInt h) {
    if (h.is_integer()) return std::to_string(h.doubled / 2);
    return std::to_string(h.doubled) + "/2";
}

HalfInt parse_halfint(const std::string& text) {
    Rat v = parse_rat(text);
    Rat d = v * 2;
    if (d.get_den() != 1 || !d.get_num().fits_sint_p()) fail("BadHalfInt", "not a half-integer: '" + text + "'");
    return HalfInt{static_cast<int>(d.get_num().get_si())};
}

namespace {

using Poly = std::vector<Rat>;

void trim(Poly& p) {
    while (!p.empty() && sgn(p.back()) == 0) p.pop_back();
}

Poly poly_mul(const Poly& a, const Poly& b) {
    if (a.empty() || b.empty()) return {};
    Poly c(a.size() + b.size() - 1, Rat(0));
    for (size_t i = 0; i < a.size(); ++i) {
        if (sgn(a[i]) == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) c[i + j] += a[i] * b[j];
    }
    trim(c);
    return c;
}

// Quotient and remainder of a by b (b nonzero).
std::pair<Poly, Poly> poly_divmod(Poly a, const Poly& b) {
    trim(a);
    Poly q;
    if (a.size() < b.size()) return {q, a};
    q.assign(a.size() - b.size() + 1, Rat(0));
    const Rat lead = b.back();
    for (size_t k = a.size(); k-- >= b.size();) {
        Rat c = a[k] / lead;
        size_t shift = k - (b.size() - 1);
        q[shift] = c;
        if (sgn(c) != 0)
            for (size_t j = 0; j < b.size(); ++j) a[shift + j] -= c * b[j];
        if (k == b.size() - 1) break;
    }
    trim(a);
    trim(q);
    return {q, a};
}

Poly poly_sub(const Poly& a, const Poly& b) {
    Poly c(std::max(a.size(), b.size()), Rat(0));
    for (size_t i = 0; i < a.size(); ++i) c[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) c[i] -= b[i];
    trim(c);
    return c;
}

std::mutex& cyc_cache_mutex() {
    static std::mutex m;
    return m;
}

std::map<int, Poly>& phi_cache() {
    static std::map<int, Poly> cache;
    return cache;
}

Poly compute_phi(int r) {
    // x^r - 1 divided by Phi_d for every proper divisor d of r.
    Poly p(static_cast<size_t>(r) + 1, Rat(0));
    p[0] = -1;
    p[static_cast<size_t>(r)] = 1;
    for (int d = 1; d < r; ++d) {
        if (r % d != 0) continue;
        p = poly_divmod(p, cyclotomic_polynomial(d)).first;
    }
    return p;
}

}  // namespace

const std::vector<Rat>& cyclotomic_polynomial(int r) {
    if (r < 1) fail("BadOrder", "cyclotomic order must be positive");
    {
        std::lock_guard<std::mutex> lock(cyc_cache_mutex());
        auto it = phi_cache().find(r);
        if (it != phi_cache().end()) return it->second;
    }
    Poly p = compute_phi(r);
    std::lock_guard<std::mutex> lock(cyc_cache_mutex());
    return phi_cache().emplace(r, std::move(p)).first->second;
}

int euler_phi(int r) { return static_cast<int>(cyclotomic_polynomial(r).size()) - 1; }

Cyc::Cyc(int order) : order_(order), coeffs_(static_cast<size_t>(euler_phi(order)), Rat(0)) {}

Cyc::Cyc(int order, const Rat& value) : Cyc(order) { coeffs_[0] = value; }

Cyc Cyc::theta_pow(int order, long e) {
    static std::mutex m;
    static std::map<int, std::vector<Cyc>> cache;
    long k = ((e % order) + order) % order;
    std::lock_guard<std::mutex> lock(m);
    auto it = cache.find(order);
    if (it == cache.end()) {
        std::vector<Cyc> powers;
        for (int p = 0; p < order; ++p) {
            Poly x(static_cast<size_t>(p) + 1, Rat(0));
            x[static_cast<size_t>(p)] = 1;
            Poly rem = poly_divmod(x, cyclotomic_polynomial(order)).second;
            Cyc c(order);
            for (size_t i = 0; i < rem.size(); ++i) c.coeffs_[i] = rem[i];
            powers.push_back(std::move(c));
        }
        it = cache.emplace(order, std::move(powers)).first;
    }
    return it->second[static_cast<size_t>(k)];
}

bool Cyc::is_zero() const {
    for (const auto& c : coeffs_)
        if (sgn(c) != 0) return false;
    return true;
}

bool Cyc::is_rational() const {
    for (size_t i = 1; i < coeffs_.size(); ++i)
        if (sgn(coeffs_[i]) != 0) return false;
    return true;
}

Rat Cyc::to_rat() const {
    if (!is_rational()) fail("NotRational", "cyclotomic element " + str() + " is not rational");
    return coeffs_[0];
}

void Cyc::check_same(const Cyc& o) const {
    if (order_ != o.order_) fail("OrderMismatch", "cyclotomic orders differ");
}

Cyc& Cyc::operator+=(const Cyc& o) {
    check_same(o);
    for (size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
    return *this;
}

Cyc& Cyc::operator-=(const Cyc& o) {
    check_same(o);
    for (size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
    return *this;
}

Cyc& Cyc::operator*=(const Rat& k) {
    for (auto& c : coeffs_) c *= k;
    return *this;
}

Cyc& Cyc::operator*=(const Cyc& o) {
    check_same(o);
    const Poly& phi = cyclotomic_polynomial(order_);
    const size_t n = coeffs_.size();
    Poly prod(2 * n - 1, Rat(0));
    for (size_t i = 0; i < n; ++i) {
        if (sgn(coeffs_[i]) == 0) continue;
        for (size_t j = 0; j < n; ++j) prod[i + j] += coeffs_[i] * o.coeffs_[j];
    }
    // Phi is monic: eliminate degrees >= n from the top down.
    for (size_t k = prod.size(); k-- > n;) {
        if (sgn(prod[k]) == 0) continue;
        Rat c = prod[k];
        size_t shift = k - n;
        for (size_t j = 0; j <= n; ++j) prod[shift + j] -= c * phi[j];
    }
    for (size_t i = 0; i < n; ++i) coeffs_[i] = prod[i];
    return *this;
}

Cyc Cyc::operator-() const {
    Cyc out = *this;
    for (auto& c : out.coeffs_) c = -c;
    return out;
}

bool operator==(const Cyc& a, const Cyc& b) {
    if (a.order_ != b.order_) return false;
    return a.coeffs_ == b.coeffs_;
}

Cyc Cyc::inverse() const {
    if (is_zero()) fail("DivisionByZero", "inverse of zero cyclotomic element");
    // Extended Euclid: find u with u * a = 1 mod Phi.
    Poly a = coeffs_;
    trim(a);
    Poly r0 = cyclotomic_polynomial(order_), r1 = a;
    Poly s0 = {}, s1 = {Rat(1)};
    while (!(r1.size() == 1)) {
        auto [q, rem] = poly_divmod(r0, r1);
        Poly s2 = poly_sub(s0, poly_mul(q, s1));
        r0 = std::move(r1);
        r1 = std::move(rem);
        s0 = std::move(s1);
        s1 = std::move(s2);
        if (r1.empty()) fail("DivisionByZero", "element not invertible");
    }
    Rat c = r1[0];
    Poly u = poly_divmod(s1, cyclotomic_polynomial(order_)).second;
    Cyc out(order_);
    for (size_t i = 0; i < u.size(); ++i) out.coeffs_[i] = u[i] / c;
    return out;
}

std::string Cyc::str() const {
    std::string s;
    for (size_t i = 0; i < coeffs_.size(); ++i) {
        if (sgn(coeffs_[i]) == 0) continue;
        if (!s.empty()) s += " + ";
        s += "(" + to_string(coeffs_[i]) + ")";
        if (i > 0) s += "*th^" + std::to_string(i);
    }
    return s.empty() ? "0" : s;
}

Cyc cyc_power_sum(int r, const std::vector<long>& exponents, const std::vector<Rat>& weights) {
    if (r < 1) fail("BadOrder", "cyclotomic order must be positive");
    if (exponents.size() != weights.size()) fail("LengthMismatch", "exponents and weights differ in length");
    std::vector<Rat> bucket(static_cast<size_t>(r), Rat(0));
    for (size_t m = 0; m < exponents.size(); ++m) {
        long e = ((exponents[m] % r) + r) % r;
        bucket[static_cast<size_t>(e)] += weights[m];
    }
    Cyc out(r);
    for (int e = 0; e < r; ++e) {
        if (sgn(bucket[static_cast<size_t>(e)]) == 0) continue;
        out += Cyc::theta_pow(r, e) * bucket[static_cast<size_t>(e)];
    }
    return out;
}

Rat cyc_to_rat(const Cyc& x) { return x.to_rat(); }

}  // namespace hqas
