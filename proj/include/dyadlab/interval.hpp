#pragma once

#include "dyadlab/rational.hpp"

#include <utility>

namespace dyadlab {

// Directed-rounding interval arithmetic over exact rationals. Endpoints are
// snapped to the grid 2^-prec after each operation so numerators stay small;
// snapping always widens, never narrows, so enclosures remain valid. Used for
// the numeric screening paths (irrationality checks, resolution bounds); all
// admissibility verdicts still come from exact certificates.
struct Interval {
    Rational lo, hi;

    Interval() = default;
    Interval(Rational v) : lo(v), hi(std::move(v)) {}
    Interval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo > hi) throw internal_error("interval endpoints out of order");
    }

    Rational width() const { return hi - lo; }
    Rational mid() const { return (lo + hi) / 2; }
    bool contains(const Rational& q) const { return lo <= q && q <= hi; }
};

inline constexpr unsigned kDefaultPrecBits = 288;  // 256 requested + slack

inline Rational round_down(const Rational& q, unsigned prec) {
    BigInt scaled;
    Rational s = q * pow2q(prec);
    mpz_fdiv_q(scaled.get_mpz_t(), s.get_num().get_mpz_t(), s.get_den().get_mpz_t());
    Rational r(scaled, pow2(prec));
    r.canonicalize();
    return r;
}

inline Rational round_up(const Rational& q, unsigned prec) {
    BigInt scaled;
    Rational s = q * pow2q(prec);
    mpz_cdiv_q(scaled.get_mpz_t(), s.get_num().get_mpz_t(), s.get_den().get_mpz_t());
    Rational r(scaled, pow2(prec));
    r.canonicalize();
    return r;
}

inline Interval snap(const Interval& x, unsigned prec) {
    return Interval(round_down(x.lo, prec), round_up(x.hi, prec));
}

inline Interval iadd(const Interval& a, const Interval& b, unsigned prec = kDefaultPrecBits) {
    return snap(Interval(a.lo + b.lo, a.hi + b.hi), prec);
}

inline Interval isub(const Interval& a, const Interval& b, unsigned prec = kDefaultPrecBits) {
    return snap(Interval(a.lo - b.hi, a.hi - b.lo), prec);
}

inline Interval imul(const Interval& a, const Interval& b, unsigned prec = kDefaultPrecBits) {
    Rational c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    Rational lo = c[0], hi = c[0];
    for (int i = 1; i < 4; ++i) {
        if (c[i] < lo) lo = c[i];
        if (c[i] > hi) hi = c[i];
    }
    return snap(Interval(lo, hi), prec);
}

inline Interval iscale(const Interval& a, const Rational& q, unsigned prec = kDefaultPrecBits) {
    if (q >= 0) return snap(Interval(a.lo * q, a.hi * q), prec);
    return snap(Interval(a.hi * q, a.lo * q), prec);
}

inline Interval ineg(const Interval& a) { return Interval(-a.hi, -a.lo); }

// Enclosure of sqrt(q) for exact rational q >= 0 via integer square roots of
// the scaled numerator.
inline Interval sqrt_interval(const Rational& q, unsigned prec = kDefaultPrecBits) {
    if (q < 0) throw precondition_error("sqrt_interval requires a non-negative argument");
    if (auto r = exact_sqrt(q)) return Interval(*r);
    Rational scaled = q * pow2q(2 * static_cast<long>(prec));
    BigInt floor_scaled;
    mpz_fdiv_q(floor_scaled.get_mpz_t(), scaled.get_num().get_mpz_t(),
               scaled.get_den().get_mpz_t());
    BigInt root;
    mpz_sqrt(root.get_mpz_t(), floor_scaled.get_mpz_t());  // floor sqrt
    Rational lo(root, pow2(prec));
    Rational hi(root + 2, pow2(prec));  // +2 covers both floor steps
    lo.canonicalize();
    hi.canonicalize();
    return Interval(lo, hi);
}

namespace detail {

// atan(1/x) for integer x >= 2 by the alternating Taylor series; consecutive
// exact partial sums bracket the limit.
inline Interval atan_inv(unsigned long x, unsigned prec) {
    Rational inv_x2(1, BigInt(x) * x);
    Rational term(1, x);
    Rational sum = 0;
    Interval out;
    for (unsigned long k = 0;; ++k) {
        Rational contrib = term / (2 * k + 1);
        if (k % 2 == 0) {
            Rational upper = sum + contrib;
            out = Interval(round_down(sum, prec), round_up(upper, prec));
            sum = upper;
        } else {
            Rational lower = sum - contrib;
            out = Interval(round_down(lower, prec), round_up(sum, prec));
            sum = lower;
        }
        term *= inv_x2;
        if (contrib * pow2q(prec + 4) < 1) break;
    }
    return out;
}

}  // namespace detail

// Machin: pi = 16 atan(1/5) - 4 atan(1/239).
inline const Interval& pi_interval(unsigned prec = kDefaultPrecBits) {
    static const Interval pi = [] {
        unsigned p = kDefaultPrecBits + 16;
        Interval a = detail::atan_inv(5, p);
        Interval b = detail::atan_inv(239, p);
        return isub(iscale(a, 16, p), iscale(b, 4, p), kDefaultPrecBits);
    }();
    (void)prec;
    return pi;
}

namespace detail {

// cos over an interval argument |x| <= pi/2 + eps: Taylor with an explicit
// tail enclosure. Terms are evaluated in interval arithmetic on x^2.
inline Interval cos_taylor(const Interval& x, unsigned prec) {
    Interval x2 = imul(x, x, prec);
    Interval sum(Rational(1));
    Interval term(Rational(1));
    unsigned long k = 0;
    while (true) {
        ++k;
        // term_{k} = term_{k-1} * x^2 / ((2k-1)(2k))
        term = imul(term, x2, prec);
        term = iscale(term, Rational(1, BigInt(2 * k - 1) * (2 * k)), prec);
        if (k % 2 == 1)
            sum = isub(sum, term, prec);
        else
            sum = iadd(sum, term, prec);
        // Stop when the next term is provably below the grid; x^2 < 4 keeps
        // the remaining tail bounded by twice the next term.
        Rational term_mag = abs_rational(term.lo);
        if (abs_rational(term.hi) > term_mag) term_mag = abs_rational(term.hi);
        Rational next_bound = term_mag * 4 / Rational(BigInt(2 * k + 1) * (2 * k + 2));
        if (next_bound * pow2q(prec) < 1) {
            Interval tail(-next_bound * 2, next_bound * 2);
            return iadd(sum, tail, prec);
        }
    }
}

}  // namespace detail

// Enclosure of cos(pi * q) for exact rational q. Reduces modulo 2 and folds
// into [0, 1/2] before the series so the argument stays within [0, pi/2].
inline Interval cos_pi_times(const Rational& q, unsigned prec = kDefaultPrecBits) {
    // reduce q mod 2 into [0, 2)
    Rational r = q;
    BigInt whole;
    Rational half_r = r / 2;
    mpz_fdiv_q(whole.get_mpz_t(), half_r.get_num().get_mpz_t(), half_r.get_den().get_mpz_t());
    r -= Rational(whole) * 2;
    // cos(pi r), r in [0,2): fold to [0,1] via cos(pi(2-r)) = cos(pi r)
    if (r > 1) r = 2 - r;
    // fold to [0,1/2] via cos(pi r) = -cos(pi(1-r))
    bool negate = false;
    if (r > Rational(1, 2)) {
        r = 1 - r;
        negate = true;
    }
    if (r == 0) return negate ? Interval(Rational(-1)) : Interval(Rational(1));
    if (r == Rational(1, 2)) return Interval(Rational(0));
    Interval x = iscale(pi_interval(prec), r, prec);
    Interval c = detail::cos_taylor(x, prec);
    return negate ? ineg(c) : c;
}

inline Interval sin_pi_times(const Rational& q, unsigned prec = kDefaultPrecBits) {
    return cos_pi_times(Rational(1, 2) - q, prec);
}

// Distance from q to the nearest dyadic rational on the 2^-n grid.
inline Rational nearest_dyadic_distance(const Rational& q, unsigned n) {
    Rational scaled = q * pow2q(n);
    BigInt fl;
    mpz_fdiv_q(fl.get_mpz_t(), scaled.get_num().get_mpz_t(), scaled.get_den().get_mpz_t());
    Rational below(fl, pow2(n)), above(fl + 1, pow2(n));
    below.canonicalize();
    above.canonicalize();
    Rational d1 = q - below, d2 = above - q;
    return d1 < d2 ? d1 : d2;
}

}  // namespace dyadlab
