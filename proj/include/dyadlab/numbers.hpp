#pragma once

#include "dyadlab/interval.hpp"
#include "dyadlab/rational.hpp"

#include <optional>
#include <set>
#include <vector>

namespace dyadlab {

// ---------------------------------------------------------------------------
// The angle-doubling identity 2cos(2t) = (2cos t)^2 - 2
// ---------------------------------------------------------------------------

// Iterates x -> x^2 - 2 exactly, starting from x0 = 2cos(phi). Denominators
// square at every step unless the start is a (half-)integer, which is the
// engine of the irrationality proof.
inline std::vector<Rational> doubling_sequence(const Rational& x0, unsigned steps) {
    if (steps < 1) throw precondition_error("steps must be >= 1");
    std::vector<Rational> out;
    out.reserve(steps + 1);
    out.push_back(x0);
    Rational x = x0;
    for (unsigned i = 0; i < steps; ++i) {
        x = x * x - 2;
        x.canonicalize();
        out.push_back(x);
    }
    return out;
}

// Residues of 2^k m (mod 2n): the doubled angles 2^k (pi m / n) as multiples
// of pi/n. The orbit is eventually periodic by pigeonhole. From the first
// doubling onward every residue is even, which caps the distinct cosine
// values at n; the undoubled start can add one more class.
struct DoublingOrbit {
    std::vector<unsigned long> residues;   // from k = 0 up to the first repeat
    unsigned long distinct_cosine_values;  // classes r ~ 2n - r, from k >= 1
    unsigned long distinct_with_start;     // ditto including the k = 0 angle
    unsigned long preperiod;
    unsigned long period;
};

inline DoublingOrbit angle_doubling_orbit(unsigned long m, unsigned long n) {
    if (n == 0) throw precondition_error("denominator must be positive");
    DoublingOrbit out;
    unsigned long mod = 2 * n;
    std::vector<long> first_seen(mod, -1);
    unsigned long r = m % mod;
    std::set<unsigned long> classes;
    unsigned long step = 0;
    while (first_seen[r] < 0) {
        first_seen[r] = static_cast<long>(step);
        out.residues.push_back(r);
        if (step > 0) classes.insert(std::min(r, mod - r));
        r = (2 * r) % mod;
        ++step;
    }
    out.preperiod = static_cast<unsigned long>(first_seen[r]);
    out.period = step - out.preperiod;
    out.distinct_cosine_values = classes.size();
    classes.insert(std::min(out.residues.front(), mod - out.residues.front()));
    out.distinct_with_start = classes.size();
    return out;
}

// ---------------------------------------------------------------------------
// When is cos(pi m / n) rational?
// ---------------------------------------------------------------------------

// Decision for 0 <= m/n <= 1/2 in lowest terms. If cos(pi m/n) = a/b with
// b > 1 then the doubling sequence's denominators grow without bound, yet the
// doubled angles take at most n values; so b = 1 and 2cos is an integer,
// which pins the angle to {0, pi/3, pi/2}. Returns the rational value, or
// nullopt meaning provably irrational.
inline std::optional<Rational> rational_cosine_of_rational_angle(unsigned long m,
                                                                 unsigned long n) {
    if (n == 0) throw precondition_error("denominator must be positive");
    BigInt g;
    mpz_gcd_ui(g.get_mpz_t(), BigInt(m).get_mpz_t(), n);
    if (m != 0 && g != 1) throw precondition_error("m/n must be in lowest terms");
    if (Rational(m, n) > Rational(1, 2)) throw precondition_error("m/n must lie in [0, 1/2]");
    if (m == 0) return Rational(1);
    if (m == 1 && n == 3) return Rational(1, 2);
    if (m == 1 && n == 2) return Rational(0);
    return std::nullopt;
}

// Convenience over the full angle range [0, 1] via cos(pi - x) = -cos(x).
inline std::optional<Rational> rational_cosine_full_range(unsigned long m, unsigned long n) {
    Rational q(m, n);
    q.canonicalize();
    if (q > 1) throw precondition_error("m/n must lie in [0, 1]");
    if (2 * q <= 1)
        return rational_cosine_of_rational_angle(mpz_get_ui(q.get_num().get_mpz_t()),
                                                 mpz_get_ui(q.get_den().get_mpz_t()));
    Rational r = 1 - q;
    auto v = rational_cosine_of_rational_angle(mpz_get_ui(r.get_num().get_mpz_t()),
                                               mpz_get_ui(r.get_den().get_mpz_t()));
    if (!v) return std::nullopt;
    return Rational(-*v);
}

// ---------------------------------------------------------------------------
// The spherical cosine rule with dyadic admissibility
// ---------------------------------------------------------------------------

enum class CosineCertificate {
    exact_rational,           // value computed on the exact path
    irrational_angle_theorem, // cos^2(phi) irrational forces the sum irrational
    irrational_nonsquare_surd,// rational plus a provably irrational square root
    undecided_numeric         // numeric screen only (never marks admissible)
};

inline const char* certificate_name(CosineCertificate c) {
    switch (c) {
        case CosineCertificate::exact_rational: return "exact-rational";
        case CosineCertificate::irrational_angle_theorem: return "irrational-by-angle-theorem";
        case CosineCertificate::irrational_nonsquare_surd: return "irrational-nonsquare-surd";
        case CosineCertificate::undecided_numeric: return "undecided-numeric";
    }
    return "?";
}

struct SphericalCosine {
    Interval enclosure;                 // always valid
    std::optional<Rational> exact;      // present iff the value is rational
    bool dyadic_admissible = false;     // only ever true on the exact path
    CosineCertificate certificate = CosineCertificate::undecided_numeric;
    Rational nearest_dyadic_gap;        // lower bound on distance to the 2^-bits grid
};

namespace detail {

// sign of cos(pi q): +1, 0, or -1, decided exactly from the quadrant
inline int sign_of_cos_pi(const Rational& q) {
    Rational r = q;
    BigInt whole;
    Rational half_r = r / 2;
    mpz_fdiv_q(whole.get_mpz_t(), half_r.get_num().get_mpz_t(), half_r.get_den().get_mpz_t());
    r -= Rational(whole) * 2;  // r in [0, 2)
    if (r == Rational(1, 2) || r == Rational(3, 2)) return 0;
    if (r < Rational(1, 2) || r > Rational(3, 2)) return 1;
    return -1;
}

}  // namespace detail

// cos(theta_bc) = cos(ab) cos(ac) + sin(ab) sin(ac) cos(phi), phi = pi beta/2.
// The verdict is exact for every dyadic beta: either the value reduces to an
// exact rational, or an irrationality certificate applies. The numeric
// enclosure and grid distance are reported for screening tables; a numeric
// screen alone never declares admissibility.
inline SphericalCosine spherical_third_cosine(const Rational& cos_ab, const Rational& cos_ac,
                                              const Rational& beta, unsigned bits,
                                              unsigned prec = kDefaultPrecBits) {
    if (abs_rational(cos_ab) > 1 || abs_rational(cos_ac) > 1)
        throw precondition_error("cosines must lie in [-1, 1]");
    auto beta_dyadic = as_dyadic(beta);
    if (!beta_dyadic || beta < 0 || beta >= 4)
        throw precondition_error("beta must be a dyadic rational in [0,4)");

    SphericalCosine out;
    Rational c1c2 = cos_ab * cos_ac;
    c1c2.canonicalize();
    Rational D = (1 - cos_ab * cos_ab) * (1 - cos_ac * cos_ac);
    D.canonicalize();
    Rational phi_over_pi = beta / 2;

    bool beta_integer = beta.get_den() == 1;

    auto finish_exact = [&](Rational value) {
        value.canonicalize();
        out.exact = value;
        out.enclosure = Interval(value);
        out.certificate = CosineCertificate::exact_rational;
        out.dyadic_admissible = is_dyadic_n_bits(value, bits);
        out.nearest_dyadic_gap = nearest_dyadic_distance(value, bits);
    };

    if (beta_integer && (beta == 1 || beta == 3)) {
        finish_exact(c1c2);  // cos(phi) = 0
        return out;
    }
    if (D == 0) {
        finish_exact(c1c2);  // a pole is involved, the product term vanishes
        return out;
    }

    int csign = detail::sign_of_cos_pi(phi_over_pi);
    if (beta_integer) {  // cos(phi) = +-1
        if (auto s = exact_sqrt(D)) {
            finish_exact(c1c2 + csign * *s);
            return out;
        }
        out.certificate = CosineCertificate::irrational_nonsquare_surd;
    } else {
        // cos^2(phi) = (1 + cos(pi beta))/2 is rational only when
        // beta mod 2 is 1/2 or 3/2, where it equals 1/2.
        Rational beta_mod2 = beta - 2 * BigInt(beta.get_num() / (2 * beta.get_den()));
        beta_mod2.canonicalize();
        bool half_quadrant = (beta_mod2 == Rational(1, 2) || beta_mod2 == Rational(3, 2));
        if (half_quadrant) {
            if (auto s = exact_sqrt(D / 2)) {
                finish_exact(c1c2 + csign * *s);
                return out;
            }
            out.certificate = CosineCertificate::irrational_nonsquare_surd;
        } else {
            // were c1c2 + sqrt(D) cos(phi) rational, cos^2(phi) = r^2 / D
            // would be rational, contradicting the angle theorem
            out.certificate = CosineCertificate::irrational_angle_theorem;
        }
    }

    // irrational: report the enclosure and a certified gap to the dyadic grid
    Interval surd = sqrt_interval(D, prec);
    Interval cphi = cos_pi_times(phi_over_pi, prec);
    out.enclosure = iadd(Interval(c1c2), imul(surd, cphi, prec), prec);
    out.exact = std::nullopt;
    out.dyadic_admissible = false;
    Rational d_lo = nearest_dyadic_distance(out.enclosure.lo, bits);
    Rational d_hi = nearest_dyadic_distance(out.enclosure.hi, bits);
    Rational slack = out.enclosure.width();
    Rational gap = (d_lo < d_hi ? d_lo : d_hi) - slack;
    out.nearest_dyadic_gap = gap > 0 ? gap : Rational(0);
    return out;
}

// Simultaneous definability of the three relative cosines for points given as
// (cos colatitude, azimuth beta) pairs.
struct TripleAdmissibility {
    bool pair_ab = false;
    bool pair_ac = false;
    bool pair_bc = false;
    bool simultaneous = false;
};

inline Rational beta_difference(const Rational& b1, const Rational& b2) {
    Rational d = b2 - b1;
    // reduce mod 4 into [0, 4)
    Rational quarter = d / 4;
    BigInt whole;
    mpz_fdiv_q(whole.get_mpz_t(), quarter.get_num().get_mpz_t(), quarter.get_den().get_mpz_t());
    d -= Rational(whole) * 4;
    d.canonicalize();
    return d;
}

inline TripleAdmissibility triple_admissibility_cosines(
    const Rational& cos_a, const Rational& beta_a, const Rational& cos_b,
    const Rational& beta_b, const Rational& cos_c, const Rational& beta_c, unsigned bits) {
    TripleAdmissibility out;
    out.pair_ab =
        spherical_third_cosine(cos_a, cos_b, beta_difference(beta_a, beta_b), bits)
            .dyadic_admissible;
    out.pair_ac =
        spherical_third_cosine(cos_a, cos_c, beta_difference(beta_a, beta_c), bits)
            .dyadic_admissible;
    out.pair_bc =
        spherical_third_cosine(cos_b, cos_c, beta_difference(beta_b, beta_c), bits)
            .dyadic_admissible;
    out.simultaneous = out.pair_ab && out.pair_ac && out.pair_bc;
    return out;
}

}  // namespace dyadlab
