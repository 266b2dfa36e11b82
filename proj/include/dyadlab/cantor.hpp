#pragma once

#include "dyadlab/rational.hpp"
#include "dyadlab/symbolic.hpp"

#include <cmath>
#include <functional>
#include <set>
#include <vector>

namespace dyadlab {

struct RatInterval {
    Rational lo, hi;

    RatInterval(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {
        if (!(lo < hi)) throw internal_error("interval endpoints out of order");
    }

    Rational width() const { return hi - lo; }
    bool operator==(const RatInterval& o) const { return lo == o.lo && hi == o.hi; }
};

enum class CantorFamily { middle_thirds, c_n };
enum class CantorVariant { t_i, t_f, unlabelled };

struct GroupingStats {
    unsigned long grouping_count = 0;
    Rational grouping_width;
    Rational gap;  // nominal spacing minus width between neighbouring groupings
};

struct CantorApprox {
    CantorFamily family = CantorFamily::c_n;
    unsigned N = 0;
    unsigned k = 0;
    CantorVariant variant = CantorVariant::unlabelled;
    std::vector<RatInterval> intervals;   // pairwise disjoint, ascending
    std::vector<uint8_t> labels;          // per-interval polarity when labelled
    bool labelled = false;
    GroupingStats stats;
};

// ---------------------------------------------------------------------------
// Middle thirds
// ---------------------------------------------------------------------------

inline CantorApprox middle_thirds(unsigned k) {
    CantorApprox out;
    out.family = CantorFamily::middle_thirds;
    out.k = k;
    out.intervals.emplace_back(Rational(0), Rational(1));
    for (unsigned level = 0; level < k; ++level) {
        std::vector<RatInterval> next;
        next.reserve(out.intervals.size() * 2);
        for (const auto& iv : out.intervals) {
            Rational third = iv.width() / 3;
            next.emplace_back(iv.lo, iv.lo + third);
            next.emplace_back(iv.hi - third, iv.hi);
        }
        out.intervals = std::move(next);
    }
    return out;
}

enum class TernaryVerdict { in, out, undetermined };

struct TernaryResult {
    TernaryVerdict verdict;
    unsigned level;  // exit level for `out`; resolution level otherwise
};

// Base-3 membership: a point survives while its expansion keeps to the outer
// thirds. Rational inputs cycle, so exact membership usually resolves well
// before `depth`; `undetermined` only remains when depth is smaller than the
// cycle length.
inline TernaryResult ternary_member(const Rational& x, unsigned depth) {
    if (x < 0 || x > 1) throw precondition_error("membership needs 0 <= x <= 1");
    Rational third(1, 3), two_thirds(2, 3);
    std::set<Rational> visited;
    Rational cur = x;
    visited.insert(cur);
    for (unsigned level = 1; level <= depth; ++level) {
        if (cur > third && cur < two_thirds) return {TernaryVerdict::out, level};
        cur = (cur <= third) ? Rational(cur * 3) : Rational(cur * 3 - 2);
        cur.canonicalize();
        if (visited.count(cur)) return {TernaryVerdict::in, level};
        visited.insert(cur);
    }
    return {TernaryVerdict::undetermined, depth};
}

// ---------------------------------------------------------------------------
// The C^(N) family
// ---------------------------------------------------------------------------

inline BigInt cn_interval_count(unsigned N, unsigned k) {
    BigInt copies = pow2(N) * (pow2(N) + 1);
    BigInt total;
    mpz_pow_ui(total.get_mpz_t(), copies.get_mpz_t(), k);
    return total;
}

inline Rational cn_interval_width(unsigned N, unsigned k) {
    Rational w(1, pow2(2 * N) * (pow2(N) + 1));
    Rational out = 1;
    for (unsigned j = 0; j < k; ++j) out *= w;
    return out;
}

inline GroupingStats grouping_stats(unsigned N, CantorVariant variant) {
    if (N < 1) throw precondition_error("N must be >= 1");
    GroupingStats s;
    if (variant == CantorVariant::t_i) {
        s.grouping_count = (1ul << N) + 1;
        s.grouping_width = Rational(1, pow2(N - 1) * (pow2(N) + 1));
        s.gap = Rational(1, pow2(N)) - s.grouping_width;
    } else if (variant == CantorVariant::t_f) {
        s.grouping_count = 2;
        s.grouping_width = Rational(1, pow2(N));
        s.gap = 1 - Rational(1, pow2(N - 1));
    } else {
        throw precondition_error("grouping statistics need the t_i or t_f variant");
    }
    s.grouping_width.canonicalize();
    s.gap.canonicalize();
    return s;
}

// Labels of the t_i groupings: grouping g carries E^(g * 2^(1-N)) applied to
// the all-plain string, ascending alpha left to right.
inline std::vector<SymbolString> grouping_label_strings(unsigned N) {
    size_t size = size_t{1} << N;
    auto all_a = uniform_string(size);
    std::vector<SymbolString> out;
    out.reserve((1ul << N) + 1);
    for (unsigned long g = 0; g <= (1ul << N); ++g) {
        Rational alpha(g, pow2(N - 1));
        alpha.canonicalize();
        out.push_back(fractional_power(Rational(0), alpha, size).apply(all_a));
    }
    return out;
}

namespace detail {

struct PatternCell {
    Rational lo, hi;
    uint8_t polarity;  // 0 plain, 1 negated (meaningful when labelled)
};

// One parent interval's worth of depth-1 structure on [0, 1].
inline std::vector<PatternCell> cn_pattern(unsigned N, CantorVariant variant, bool labelled) {
    if (N < 1) throw precondition_error("N must be >= 1");
    Rational w(1, pow2(2 * N) * (pow2(N) + 1));
    std::vector<PatternCell> cells;

    auto pack_grouping = [&](const Rational& start, unsigned long count,
                             const std::function<uint8_t(unsigned long)>& label_of) {
        // symmetric layout: half-gap margins, then intervals alternating with
        // equal-width gaps; total span is exactly the grouping width
        for (unsigned long i = 0; i < count; ++i) {
            Rational lo = start + w / 2 + Rational(2 * w) * Rational(static_cast<long>(i));
            Rational hi = lo + w;
            lo.canonicalize();
            hi.canonicalize();
            cells.push_back({lo, hi, labelled ? label_of(i) : uint8_t{0}});
        }
    };

    if (variant == CantorVariant::t_i) {
        GroupingStats stats = grouping_stats(N, variant);
        Rational G = stats.grouping_width;
        std::vector<SymbolString> labels;
        if (labelled) labels = grouping_label_strings(N);
        unsigned long per_grouping = 1ul << N;
        for (unsigned long g = 0; g <= (1ul << N); ++g) {
            Rational center(g, pow2(N));
            Rational start = center - G / 2;
            if (start < 0) start = 0;                  // clamp the first grouping
            if (start + G > 1) start = 1 - G;          // and the last
            start.canonicalize();
            pack_grouping(start, per_grouping, [&](unsigned long i) {
                return labels.empty() ? uint8_t{0} : labels[g].cells[i];
            });
        }
    } else if (variant == CantorVariant::t_f) {
        unsigned long per_grouping = (1ul << (N - 1)) * ((1ul << N) + 1);
        Rational G(1, pow2(N));
        pack_grouping(Rational(0), per_grouping, [](unsigned long) { return uint8_t{0}; });
        pack_grouping(Rational(1) - G, per_grouping, [](unsigned long) { return uint8_t{1}; });
    } else {
        throw precondition_error("C^(N) approximations need the t_i or t_f variant");
    }
    return cells;
}

}  // namespace detail

// Streams the depth-k intervals in ascending order without materializing
// them. Labels compose multiplicatively down the recursion (negation flips).
inline void for_each_cn_interval(
    unsigned N, unsigned k, CantorVariant variant, bool labelled,
    const std::function<void(const Rational&, const Rational&, uint8_t)>& fn) {
    if (N < 1 || k < 1) throw precondition_error("C^(N) approximations need N >= 1 and k >= 1");
    auto pattern = detail::cn_pattern(N, variant, labelled);
    Rational w = cn_interval_width(N, 1);

    std::function<void(const Rational&, const Rational&, uint8_t, unsigned)> recurse =
        [&](const Rational& offset, const Rational& scale, uint8_t parity, unsigned level) {
            for (const auto& cell : pattern) {
                Rational lo = offset + scale * cell.lo;
                Rational hi = offset + scale * cell.hi;
                lo.canonicalize();
                hi.canonicalize();
                uint8_t pol = parity ^ cell.polarity;
                if (level == k)
                    fn(lo, hi, pol);
                else
                    recurse(lo, scale * w, pol, level + 1);
            }
        };
    recurse(Rational(0), Rational(1), 0, 1);
}

inline constexpr unsigned long kIntervalCap = 10'000'000;

inline CantorApprox cn_approx(unsigned N, unsigned k, CantorVariant variant,
                              bool labelled = false, unsigned long cap = kIntervalCap) {
    BigInt total = cn_interval_count(N, k);
    if (total > cap)
        throw precondition_error(
            "interval count cap exceeded; use the streaming interface instead");
    CantorApprox out;
    out.family = CantorFamily::c_n;
    out.N = N;
    out.k = k;
    out.variant = variant;
    out.labelled = labelled;
    out.stats = grouping_stats(N, variant);
    out.intervals.reserve(mpz_get_ui(total.get_mpz_t()));
    for_each_cn_interval(N, k, variant, labelled,
                         [&](const Rational& lo, const Rational& hi, uint8_t pol) {
                             out.intervals.emplace_back(lo, hi);
                             if (labelled) out.labels.push_back(pol);
                         });
    return out;
}

inline CantorApprox label_groupings(unsigned N, unsigned k) {
    return cn_approx(N, k, CantorVariant::t_i, true);
}

// log[2^N (2^N + 1)] / log[2^(2N) (2^N + 1)], which tends to 2/3.
inline long double similarity_dimension(unsigned N) {
    if (N < 1) throw precondition_error("N must be >= 1");
    long double ln2 = 0.69314718055994530941723212145818L;
    long double lp = std::log1p(std::exp2l(-static_cast<long double>(N)));
    long double nl = static_cast<long double>(N) * ln2;
    return (2.0L * nl + lp) / (3.0L * nl + lp);
}

// The probability-preserving map D: t_i interval index -> t_f interval index,
// plain labels into the first t_f grouping and negated into the second,
// order-preserving within each class.
struct MapD {
    std::vector<size_t> forward;  // indexed by t_i interval position
    size_t plain_count = 0;
    size_t negated_count = 0;
};

inline MapD map_D(unsigned N, unsigned k) {
    CantorApprox ti = cn_approx(N, k, CantorVariant::t_i, true);
    CantorApprox tf = cn_approx(N, k, CantorVariant::t_f, true);
    if (ti.intervals.size() != tf.intervals.size())
        throw internal_error("t_i and t_f interval counts disagree");

    std::vector<size_t> tf_plain, tf_negated;
    for (size_t j = 0; j < tf.labels.size(); ++j)
        (tf.labels[j] == 0 ? tf_plain : tf_negated).push_back(j);

    MapD out;
    out.forward.assign(ti.intervals.size(), 0);
    size_t next_plain = 0, next_negated = 0;
    for (size_t i = 0; i < ti.labels.size(); ++i) {
        if (ti.labels[i] == 0) {
            if (next_plain >= tf_plain.size())
                throw internal_error("label counts disagree between t_i and t_f");
            out.forward[i] = tf_plain[next_plain++];
        } else {
            if (next_negated >= tf_negated.size())
                throw internal_error("label counts disagree between t_i and t_f");
            out.forward[i] = tf_negated[next_negated++];
        }
    }
    if (next_plain != tf_plain.size() || next_negated != tf_negated.size())
        throw internal_error("label counts disagree between t_i and t_f");
    out.plain_count = next_plain;
    out.negated_count = next_negated;
    return out;
}

}  // namespace dyadlab
