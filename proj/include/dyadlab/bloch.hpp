#pragma once

#include "dyadlab/interval.hpp"
#include "dyadlab/numbers.hpp"
#include "dyadlab/rational.hpp"
#include "dyadlab/symbolic.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace dyadlab {

// ---------------------------------------------------------------------------
// Points on the dyadic sphere
// ---------------------------------------------------------------------------

// A measurement direction: colatitude via cos(theta), azimuth phi = pi beta/2,
// both dyadic within the bit budget.
struct BlochPoint {
    Rational cos_theta;
    Rational beta;
    unsigned bits = 0;
};

inline BlochPoint make_bloch_point(const Rational& cos_theta, const Rational& beta,
                                   unsigned bits) {
    if (abs_rational(cos_theta) > 1)
        throw precondition_error("cosines must lie in [-1, 1]");
    if (beta < 0 || beta >= 4) throw precondition_error("beta must lie in [0,4)");
    if (!is_dyadic_n_bits(cos_theta, bits))
        throw precondition_error("cos(theta) must be describable by N bits");
    if (!is_dyadic_n_bits(beta, bits))
        throw precondition_error("beta must be describable by N bits");
    return BlochPoint{cos_theta, beta, bits};
}

inline BlochPoint antipode(const BlochPoint& p) {
    Rational b = p.beta + 2;
    if (b >= 4) b -= 4;
    return BlochPoint{Rational(-p.cos_theta), b, p.bits};
}

// cos^2(theta/2) = |1 - alpha/2| on the alpha in [0,2] branch gives
// alpha = 1 - cos(theta).
inline Rational alpha_from_angle(const Rational& cos_theta, unsigned bits) {
    if (abs_rational(cos_theta) > 1)
        throw precondition_error("cosines must lie in [-1, 1]");
    Rational alpha = 1 - cos_theta;
    alpha.canonicalize();
    if (!is_dyadic_n_bits(alpha, bits))
        throw precondition_error("alpha not representable in the bit budget");
    return alpha;
}

inline Rational angle_from_alpha(const Rational& alpha) {
    if (alpha < 0 || alpha > 2) throw precondition_error("alpha must lie in [0,2] on this branch");
    Rational c = 1 - alpha;
    c.canonicalize();
    return c;
}

// ---------------------------------------------------------------------------
// Singlet correlations over disjoint bit-string sample spaces
// ---------------------------------------------------------------------------

struct CorrelationRecord {
    BlochPoint a, b;
    size_t sample_size = 0;
    Rational relative_cosine;
    Rational alpha;
    Rational relative_beta;
    SymbolString sample;  // the disagreement string over {d, !d}
    Rational correlation;
    unsigned long lambda_space_id = 0;
};

namespace detail {

struct RelativeConfig {
    Rational cosine;
    Rational beta;
};

// Exact relative configuration of an ordered pair; throws an admissibility
// error when the relative cosine is not exactly dyadic within budget.
inline RelativeConfig relative_config(const BlochPoint& x, const BlochPoint& y) {
    Rational dbeta = beta_difference(x.beta, y.beta);
    auto sc = spherical_third_cosine(x.cos_theta, y.cos_theta, dbeta, x.bits);
    if (!sc.exact || !sc.dyadic_admissible) {
        std::string cosine_text = sc.exact
            ? rational_to_string(*sc.exact)
            : ("~" + std::to_string(mpq_get_d(sc.enclosure.mid().get_mpq_t())) + " (" +
               certificate_name(sc.certificate) + ")");
        throw precondition_error("inadmissible pair: relative cosine " + cosine_text +
                                 " is not dyadic within the bit budget");
    }
    return {*sc.exact, dbeta};
}

}  // namespace detail

// Builds the singlet sample space for the pair's relative configuration and
// counts disagreements: S = E_beta^alpha (dd...d), correlation =
// 1 - 2 freq(d) = -cos(theta).
inline CorrelationRecord singlet_correlation_relative(const Rational& rel_cos,
                                                      const Rational& rel_beta, unsigned bits,
                                                      unsigned long lambda_space_id = 0) {
    size_t size = size_t{1} << bits;
    Rational alpha = alpha_from_angle(rel_cos, bits);
    SignedPermutation op;
    try {
        op = fractional_power(rel_beta, alpha, size);
    } catch (const precondition_error& e) {
        throw precondition_error(std::string("inadmissible pair: ") + e.what());
    }
    CorrelationRecord rec;
    rec.sample_size = size;
    rec.relative_cosine = rel_cos;
    rec.alpha = alpha;
    rec.relative_beta = rel_beta;
    rec.sample = op.apply(uniform_string(size, 'd'));
    Rational freq_d = frequency(rec.sample);
    rec.correlation = 1 - 2 * freq_d;
    rec.correlation.canonicalize();
    rec.lambda_space_id = lambda_space_id;
    return rec;
}

inline CorrelationRecord singlet_correlation(const BlochPoint& a, const BlochPoint& b,
                                             unsigned long lambda_space_id = 0) {
    if (a.bits != b.bits) throw precondition_error("bit budgets must agree");
    auto rel = detail::relative_config(a, b);
    CorrelationRecord rec = singlet_correlation_relative(rel.cosine, rel.beta, a.bits,
                                                         lambda_space_id);
    rec.a = a;
    rec.b = b;
    return rec;
}

// ---------------------------------------------------------------------------
// The Bell experiment over three disjoint sample spaces
// ---------------------------------------------------------------------------

struct BellReport {
    CorrelationRecord corr_ab, corr_ac, corr_bc_prime;
    Rational lhs, rhs;
    bool violated = false;
    TripleAdmissibility triple;
    bool shared_lambda_admissible = false;
    Interval cos_cc_prime;  // closeness of the substituted third direction
};

// |cos(theta_cc')| >= 1 - 2 pi / 2^bits, checked conservatively against the
// pi enclosure.
inline bool within_instrument_resolution(const BlochPoint& c, const BlochPoint& c_prime,
                                         Interval* out_cos = nullptr) {
    Rational dbeta = beta_difference(c.beta, c_prime.beta);
    auto sc = spherical_third_cosine(c.cos_theta, c_prime.cos_theta, dbeta, c.bits);
    Interval enc = sc.enclosure;
    if (out_cos) *out_cos = enc;
    Rational abs_min = (enc.lo <= 0 && enc.hi >= 0)
                           ? Rational(0)
                           : (enc.lo > 0 ? enc.lo : Rational(-enc.hi));
    Rational bound = 1 - 2 * pi_interval().lo / pow2q(c.bits);
    return abs_min >= bound;
}

inline BellReport bell_experiment(const BlochPoint& a, const BlochPoint& b, const BlochPoint& c,
                                  const BlochPoint& c_prime) {
    if (a.bits != b.bits || a.bits != c.bits || a.bits != c_prime.bits)
        throw precondition_error("bit budgets must agree");
    BellReport report;
    if (!within_instrument_resolution(c, c_prime, &report.cos_cc_prime))
        throw precondition_error(
            "c' is not within instrument resolution of c: |cos(theta_cc')| < 1 - 2pi/2^N");

    report.corr_ab = singlet_correlation(a, b, 1);
    report.corr_ac = singlet_correlation(a, c, 2);
    report.corr_bc_prime = singlet_correlation(b, c_prime, 3);

    report.lhs = abs_rational(report.corr_ab.correlation - report.corr_ac.correlation);
    report.rhs = 1 + report.corr_bc_prime.correlation;
    report.lhs.canonicalize();
    report.rhs.canonicalize();
    report.violated = report.lhs > report.rhs;

    report.triple = triple_admissibility_cosines(a.cos_theta, a.beta, b.cos_theta, b.beta,
                                                 c.cos_theta, c.beta, a.bits);
    report.shared_lambda_admissible = report.triple.simultaneous;
    return report;
}

struct BellPlan {
    BlochPoint a, b, c, c_prime;
};

// Realizes the three requested relative cosines as points: a at the pole, b
// coplanar with it, c rotated by the smallest admissible azimuth step (so the
// a-b-c triple is never exactly coplanar), and c' coplanar with b at an
// exactly dyadic relative cosine, standing in for the unreachable c.
inline BellPlan plan_bell_configuration(const Rational& cos_ab, const Rational& cos_ac,
                                        const Rational& cos_bc_prime, unsigned bits) {
    BellPlan plan;
    plan.a = make_bloch_point(Rational(1), Rational(0), bits);
    plan.b = make_bloch_point(cos_ab, Rational(0), bits);

    // smallest azimuth step that keeps (alpha_ac, beta) jointly constructible
    Rational alpha_ac = alpha_from_angle(cos_ac, bits);
    auto alpha_dy = as_dyadic(alpha_ac);
    unsigned long q = alpha_dy ? alpha_dy->exponent : 0;
    if (bits < q + 2)
        throw precondition_error("inadmissible pair: alpha too fine for the bit budget");
    unsigned long d = bits - 2 - q;
    Rational dbeta = d == 0 ? Rational(1) : Rational(1, pow2(d));
    plan.c = make_bloch_point(cos_ac, dbeta, bits);

    // c' coplanar with b: scan dyadic colatitudes for an exact relative cosine
    Rational sb2 = 1 - cos_ab * cos_ab;
    sb2.canonicalize();
    std::optional<BlochPoint> found;
    unsigned long grid = 1ul << std::min(bits, 12u);
    for (int side = 0; side < 2 && !found; ++side) {
        Rational azimuth = side == 0 ? Rational(0) : Rational(2);
        int csign = side == 0 ? 1 : -1;
        for (long num = -static_cast<long>(grid); num <= static_cast<long>(grid); ++num) {
            Rational x(num, grid);
            x.canonicalize();
            if (!is_dyadic_n_bits(x, bits)) continue;
            Rational d2 = sb2 * (1 - x * x);
            auto s = exact_sqrt(d2);
            if (!s) continue;
            Rational rel = cos_ab * x + csign * *s;
            rel.canonicalize();
            if (rel == cos_bc_prime) {
                found = make_bloch_point(x, azimuth, bits);
                break;
            }
        }
    }
    if (!found)
        throw precondition_error(
            "cannot realize c': no coplanar dyadic point has the requested relative cosine");
    plan.c_prime = *found;
    return plan;
}

inline BellReport bell_experiment_from_cosines(const Rational& cos_ab, const Rational& cos_ac,
                                               const Rational& cos_bc_prime, unsigned bits) {
    BellPlan plan = plan_bell_configuration(cos_ab, cos_ac, cos_bc_prime, bits);
    return bell_experiment(plan.a, plan.b, plan.c, plan.c_prime);
}

// ---------------------------------------------------------------------------
// CHSH over four disjoint sample spaces
// ---------------------------------------------------------------------------

struct ChshReport {
    std::array<CorrelationRecord, 4> correlations;  // ab, ab', a'b, a'b'
    Rational S;
    bool violated = false;
};

inline ChshReport chsh_from_cosines(const Rational& cos_ab, const Rational& cos_ab_prime,
                                    const Rational& cos_a_prime_b,
                                    const Rational& cos_a_prime_b_prime, unsigned bits) {
    ChshReport r;
    r.correlations[0] = singlet_correlation_relative(cos_ab, Rational(0), bits, 1);
    r.correlations[1] = singlet_correlation_relative(cos_ab_prime, Rational(0), bits, 2);
    r.correlations[2] = singlet_correlation_relative(cos_a_prime_b, Rational(0), bits, 3);
    r.correlations[3] = singlet_correlation_relative(cos_a_prime_b_prime, Rational(0), bits, 4);
    r.S = r.correlations[0].correlation - r.correlations[1].correlation +
          r.correlations[2].correlation + r.correlations[3].correlation;
    r.S.canonicalize();
    r.violated = abs_rational(r.S) > 2;
    return r;
}

inline ChshReport chsh_experiment(const BlochPoint& a, const BlochPoint& a_prime,
                                  const BlochPoint& b, const BlochPoint& b_prime) {
    if (a.bits != a_prime.bits || a.bits != b.bits || a.bits != b_prime.bits)
        throw precondition_error("bit budgets must agree");
    auto ab = detail::relative_config(a, b);
    auto ab_p = detail::relative_config(a, b_prime);
    auto ap_b = detail::relative_config(a_prime, b);
    auto ap_bp = detail::relative_config(a_prime, b_prime);
    ChshReport r;
    r.correlations[0] = singlet_correlation_relative(ab.cosine, ab.beta, a.bits, 1);
    r.correlations[1] = singlet_correlation_relative(ab_p.cosine, ab_p.beta, a.bits, 2);
    r.correlations[2] = singlet_correlation_relative(ap_b.cosine, ap_b.beta, a.bits, 3);
    r.correlations[3] = singlet_correlation_relative(ap_bp.cosine, ap_bp.beta, a.bits, 4);
    r.S = r.correlations[0].correlation - r.correlations[1].correlation +
          r.correlations[2].correlation + r.correlations[3].correlation;
    r.S.canonicalize();
    r.violated = abs_rational(r.S) > 2;
    return r;
}

// ---------------------------------------------------------------------------
// Sequential Stern-Gerlach frequencies
// ---------------------------------------------------------------------------

// Hierarchical application of the symbolic probability function at three
// nested depths: each stage splits the surviving fraction by cos^2(theta/2).
struct SequentialSgReport {
    std::array<Rational, 3> stage_cosines;
    std::array<Rational, 3> stage_up_fractions;  // cos^2(theta_i / 2)
    Rational p_a, p_b, p_c, p_d;
};

inline SequentialSgReport sequential_sg(const Rational& cos1, const Rational& cos2,
                                        const Rational& cos3, unsigned bits) {
    SequentialSgReport r;
    r.stage_cosines = {cos1, cos2, cos3};
    for (int i = 0; i < 3; ++i) {
        Rational alpha = alpha_from_angle(r.stage_cosines[i], bits);  // validates
        Rational up = 1 - alpha / 2;                                  // cos^2(theta/2)
        up.canonicalize();
        r.stage_up_fractions[i] = up;
    }
    r.p_a = r.stage_up_fractions[0];
    r.p_b = (1 - r.p_a) * r.stage_up_fractions[1];
    Rational rest = (1 - r.p_a) * (1 - r.stage_up_fractions[1]);
    r.p_c = rest * r.stage_up_fractions[2];
    r.p_d = rest * (1 - r.stage_up_fractions[2]);
    for (Rational* p : {&r.p_a, &r.p_b, &r.p_c, &r.p_d}) p->canonicalize();
    return r;
}

// ---------------------------------------------------------------------------
// Non-convergence of the basis strings along a Cauchy sequence
// ---------------------------------------------------------------------------

struct CauchyRow {
    Rational beta;
    Rational next_beta;
    Rational hamming_distance;  // normalized, between this step and the next
};

enum class CauchyTarget { sqrt2, pi_over_4 };

// k-bit truncation of the target toward zero.
inline Rational cauchy_truncation(CauchyTarget target, unsigned k) {
    if (target == CauchyTarget::sqrt2) {
        BigInt scaled;  // floor(sqrt(2 * 4^k))
        mpz_ui_pow_ui(scaled.get_mpz_t(), 2, 2 * k + 1);
        BigInt root;
        mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
        Rational b(root, pow2(k));
        b.canonicalize();
        return b;
    }
    Interval quarter_pi = iscale(pi_interval(), Rational(1, 4));
    Rational lo = quarter_pi.lo * pow2q(k);
    BigInt fl;
    mpz_fdiv_q(fl.get_mpz_t(), lo.get_num().get_mpz_t(), lo.get_den().get_mpz_t());
    Rational b(fl, pow2(k));
    b.canonicalize();
    return b;
}

// Dyadic truncations beta_k -> target, with the basis string at each step.
// distinct_only walks the subsequence of distinct truncations (every listed
// distance is then a genuine separation claim); the raw walk keeps duplicate
// rows whose distance is zero.
inline std::vector<CauchyRow> cauchy_divergence_demo(CauchyTarget target, unsigned bits,
                                                     bool distinct_only = true) {
    if (bits < 3) throw precondition_error("bit budget too small for a subscript chain");
    size_t size = size_t{1} << bits;
    std::vector<Rational> betas;
    for (unsigned k = 0; k + 2 <= bits; ++k) {
        Rational b = cauchy_truncation(target, k);
        if (!distinct_only || betas.empty() || betas.back() != b) betas.push_back(b);
    }
    auto all_a = uniform_string(size);
    std::vector<SymbolString> strings;
    strings.reserve(betas.size());
    for (const auto& b : betas) strings.push_back(basis_element(b, size).apply(all_a));

    std::vector<CauchyRow> rows;
    for (size_t i = 0; i + 1 < betas.size(); ++i)
        rows.push_back({betas[i], betas[i + 1], normalized_hamming(strings[i], strings[i + 1])});
    return rows;
}

// Same demo for an explicitly dyadic target: the truncations stabilize and
// the trailing distances collapse to zero.
inline std::vector<CauchyRow> cauchy_divergence_demo_dyadic(const Rational& target,
                                                            unsigned bits) {
    if (bits < 3) throw precondition_error("bit budget too small for a subscript chain");
    auto dy = as_dyadic(target);
    if (!dy) throw precondition_error("target must be dyadic for the degenerate demo");
    size_t size = size_t{1} << bits;
    auto all_a = uniform_string(size);
    std::vector<CauchyRow> rows;
    Rational prev;
    SymbolString prev_string;
    for (unsigned k = 0; k + 2 <= bits; ++k) {
        Rational scaled = target * pow2q(k);
        BigInt fl;
        mpz_fdiv_q(fl.get_mpz_t(), scaled.get_num().get_mpz_t(), scaled.get_den().get_mpz_t());
        Rational b(fl, pow2(k));
        b.canonicalize();
        SymbolString s = basis_element(b, size).apply(all_a);
        if (k > 0) rows.push_back({prev, b, normalized_hamming(prev_string, s)});
        prev = b;
        prev_string = s;
    }
    return rows;
}

}  // namespace dyadlab
