#pragma once

#include <gmpxx.h>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace dyadlab {

using BigInt = mpz_class;
using Rational = mpq_class;

// Raised when a caller violates a documented precondition. The message is the
// violated precondition, suitable for printing verbatim.
class precondition_error : public std::invalid_argument {
public:
    explicit precondition_error(const std::string& what) : std::invalid_argument(what) {}
};

// Raised when an internal consistency check fails (never the caller's fault).
class internal_error : public std::logic_error {
public:
    explicit internal_error(const std::string& what) : std::logic_error(what) {}
};

inline Rational make_rational(long num, long den = 1) {
    Rational q(num, den);
    q.canonicalize();
    return q;
}

inline Rational rational_from_string(const std::string& s) {
    Rational q;
    if (q.set_str(s, 10) != 0)
        throw precondition_error("not a rational: '" + s + "'");
    if (q.get_den() == 0)
        throw precondition_error("zero denominator: '" + s + "'");
    q.canonicalize();
    return q;
}

// Canonical text form. Integers print without "/1" so that exact values
// serialize the same way everywhere.
inline std::string rational_to_string(const Rational& q) {
    return q.get_str();
}

inline BigInt pow2(unsigned long k) {
    BigInt r;
    mpz_ui_pow_ui(r.get_mpz_t(), 2, k);
    return r;
}

inline BigInt pow10_k(unsigned long k) {
    BigInt r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, k);
    return r;
}

inline Rational pow2q(long k) {
    Rational q;
    if (k >= 0)
        q = Rational(pow2(static_cast<unsigned long>(k)));
    else
        q = Rational(1, pow2(static_cast<unsigned long>(-k)));
    q.canonicalize();
    return q;
}

// A dyadic rational m / 2^e, kept normalized: m odd or zero, and e == 0 when
// m == 0.
struct Dyadic {
    BigInt mantissa;
    unsigned long exponent = 0;

    Dyadic() : mantissa(0) {}
    Dyadic(BigInt m, unsigned long e) : mantissa(std::move(m)), exponent(e) { normalize(); }

    void normalize() {
        if (mantissa == 0) {
            exponent = 0;
            return;
        }
        while (exponent > 0 && mpz_even_p(mantissa.get_mpz_t())) {
            mantissa >>= 1;
            --exponent;
        }
    }

    Rational value() const {
        Rational q(mantissa, pow2(exponent));
        q.canonicalize();
        return q;
    }

    bool operator==(const Dyadic& o) const {
        return exponent == o.exponent && mantissa == o.mantissa;
    }
};

// Returns the dyadic form of q, or nullopt when the denominator is not a
// power of two.
inline std::optional<Dyadic> as_dyadic(const Rational& q) {
    BigInt den = q.get_den();  // canonical: den > 0, gcd(num, den) == 1
    if (den == 1) return Dyadic(q.get_num(), 0);
    size_t e = mpz_scan1(den.get_mpz_t(), 0);  // index of lowest set bit
    if (pow2(e) != den) return std::nullopt;
    return Dyadic(q.get_num(), e);
}

// What "describable by N bits" means for a dyadic rational. The default
// budget admits exponents up to N and |mantissa| up to 2^N; experiments can
// substitute their own policy.
struct BitBudget {
    unsigned bits;

    explicit BitBudget(unsigned n) : bits(n) {}

    virtual ~BitBudget() = default;

    virtual bool admits(const Dyadic& d) const {
        if (d.exponent > bits) return false;
        BigInt bound = pow2(bits);
        return abs(d.mantissa) <= bound;
    }

    bool admits(const Rational& q) const {
        auto d = as_dyadic(q);
        return d && admits(*d);
    }
};

inline bool is_dyadic_n_bits(const Rational& x, unsigned n) {
    return BitBudget(n).admits(x);
}

// Exact square root when q is the square of a rational; nullopt otherwise.
// Only defined for q >= 0.
inline std::optional<Rational> exact_sqrt(const Rational& q) {
    if (q < 0) throw precondition_error("exact_sqrt requires a non-negative argument");
    BigInt num = q.get_num(), den = q.get_den();
    if (!mpz_perfect_square_p(num.get_mpz_t()) || !mpz_perfect_square_p(den.get_mpz_t()))
        return std::nullopt;
    BigInt rn, rd;
    mpz_sqrt(rn.get_mpz_t(), num.get_mpz_t());
    mpz_sqrt(rd.get_mpz_t(), den.get_mpz_t());
    Rational r(rn, rd);
    r.canonicalize();
    return r;
}

inline Rational abs_rational(const Rational& q) {
    Rational r;
    mpq_abs(r.get_mpq_t(), q.get_mpq_t());
    return r;
}

}  // namespace dyadlab
