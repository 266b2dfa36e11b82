#pragma once

#include "dyadlab/rational.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace dyadlab {

// ---------------------------------------------------------------------------
// Symbol strings over {a, !a}
// ---------------------------------------------------------------------------

enum class Polarity : uint8_t { plain = 0, negated = 1 };

inline Polarity operator!(Polarity p) {
    return p == Polarity::plain ? Polarity::negated : Polarity::plain;
}

// A fixed-length string of one base symbol with per-cell negation flags.
// Lengths are powers of two. The base symbol label is metadata only; the
// algebra never looks at it.
struct SymbolString {
    char label = 'a';
    std::vector<uint8_t> cells;  // 0 = plain, 1 = negated

    size_t size() const { return cells.size(); }

    size_t plain_count() const {
        size_t n = 0;
        for (uint8_t c : cells) n += (c == 0);
        return n;
    }

    bool operator==(const SymbolString& o) const { return cells == o.cells; }

    std::string display() const {
        std::string out;
        for (uint8_t c : cells) {
            if (c) out += "¬";
            out += label;
        }
        return out;
    }
};

inline bool is_power_of_two(size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline size_t log2_exact(size_t n) {
    size_t k = 0;
    while ((size_t{1} << k) < n) ++k;
    if ((size_t{1} << k) != n) throw precondition_error("length must be a power of two");
    return k;
}

inline SymbolString uniform_string(size_t size, char label = 'a') {
    if (!is_power_of_two(size)) throw precondition_error("length must be a power of two");
    SymbolString s;
    s.label = label;
    s.cells.assign(size, 0);
    return s;
}

// Fraction of un-negated cells: the symbolic probability function.
inline Rational frequency(const SymbolString& s) {
    if (s.size() == 0) throw precondition_error("frequency of an empty string is undefined");
    Rational q(static_cast<long>(s.plain_count()), static_cast<long>(s.size()));
    q.canonicalize();
    return q;
}

inline Rational normalized_hamming(const SymbolString& a, const SymbolString& b) {
    if (a.size() != b.size()) throw precondition_error("size mismatch");
    size_t d = 0;
    for (size_t i = 0; i < a.size(); ++i) d += (a.cells[i] != b.cells[i]);
    Rational q(static_cast<long>(d), static_cast<long>(a.size()));
    q.canonicalize();
    return q;
}

// ---------------------------------------------------------------------------
// Signed permutations
// ---------------------------------------------------------------------------

// Output cell j reads input cell targets[j], negated when signs[j] != 0.
// Every permutation/negation operator in the algebra is one of these; dense
// matrices are only a derived view.
struct SignedPermutation {
    std::vector<uint32_t> targets;
    std::vector<uint8_t> signs;

    size_t size() const { return targets.size(); }

    bool operator==(const SignedPermutation& o) const {
        return targets == o.targets && signs == o.signs;
    }

    SymbolString apply(const SymbolString& in) const {
        if (in.size() != size()) throw precondition_error("size mismatch");
        SymbolString out;
        out.label = in.label;
        out.cells.resize(size());
        for (size_t j = 0; j < size(); ++j)
            out.cells[j] = in.cells[targets[j]] ^ signs[j];
        return out;
    }

    void check_valid() const {
        if (!is_power_of_two(size())) throw precondition_error("size must be a power of two");
        if (signs.size() != targets.size()) throw internal_error("targets/signs length mismatch");
        std::vector<uint8_t> seen(size(), 0);
        for (uint32_t t : targets) {
            if (t >= size() || seen[t]) throw internal_error("targets is not a bijection");
            seen[t] = 1;
        }
    }
};

inline SignedPermutation sp_identity(size_t n) {
    SignedPermutation p;
    p.targets.resize(n);
    p.signs.assign(n, 0);
    for (size_t j = 0; j < n; ++j) p.targets[j] = static_cast<uint32_t>(j);
    return p;
}

inline SignedPermutation global_negation(size_t n) {
    SignedPermutation p = sp_identity(n);
    p.signs.assign(n, 1);
    return p;
}

inline bool is_identity(const SignedPermutation& f) {
    for (size_t j = 0; j < f.size(); ++j)
        if (f.targets[j] != j || f.signs[j]) return false;
    return true;
}

// (f o g)(s) = f(g(s))
inline SignedPermutation compose(const SignedPermutation& f, const SignedPermutation& g) {
    if (f.size() != g.size()) throw precondition_error("size mismatch");
    SignedPermutation h;
    h.targets.resize(f.size());
    h.signs.resize(f.size());
    for (size_t j = 0; j < f.size(); ++j) {
        h.targets[j] = g.targets[f.targets[j]];
        h.signs[j] = f.signs[j] ^ g.signs[f.targets[j]];
    }
    return h;
}

inline SignedPermutation sp_pow(SignedPermutation base, unsigned long k) {
    SignedPermutation acc = sp_identity(base.size());
    while (k > 0) {
        if (k & 1) acc = compose(acc, base);
        base = compose(base, base);
        k >>= 1;
    }
    return acc;
}

inline SignedPermutation sp_inverse(const SignedPermutation& f) {
    SignedPermutation inv;
    inv.targets.resize(f.size());
    inv.signs.resize(f.size());
    for (size_t j = 0; j < f.size(); ++j) {
        inv.targets[f.targets[j]] = static_cast<uint32_t>(j);
        inv.signs[f.targets[j]] = f.signs[j];
    }
    return inv;
}

// Smallest k >= 1 with f^k = id.
inline unsigned long operator_order(const SignedPermutation& f, unsigned long limit = 1u << 20) {
    SignedPermutation acc = f;
    for (unsigned long k = 1; k <= limit; ++k) {
        if (is_identity(acc)) return k;
        acc = compose(acc, f);
    }
    throw internal_error("operator order exceeds limit");
}

// The pairwise unit: (x, y) -> (y, !x) on each consecutive pair. Squares to
// global negation.
inline SignedPermutation blockwise_i(size_t size) {
    if (size < 2 || size % 2 != 0)
        throw precondition_error("invalid-size: blockwise i needs an even size >= 2");
    SignedPermutation p;
    p.targets.resize(size);
    p.signs.resize(size);
    for (size_t m = 0; m + 1 < size; m += 2) {
        p.targets[m] = static_cast<uint32_t>(m + 1);
        p.signs[m] = 0;
        p.targets[m + 1] = static_cast<uint32_t>(m);
        p.signs[m + 1] = 1;
    }
    return p;
}

// ---------------------------------------------------------------------------
// The quaternion chain
// ---------------------------------------------------------------------------

namespace detail {

// [[0, A], [A, 0]] at double the size.
inline SignedPermutation lift_antidiag(const SignedPermutation& a) {
    size_t m = a.size();
    SignedPermutation p;
    p.targets.resize(2 * m);
    p.signs.resize(2 * m);
    for (size_t j = 0; j < m; ++j) {
        p.targets[j] = static_cast<uint32_t>(m + a.targets[j]);
        p.signs[j] = a.signs[j];
        p.targets[m + j] = a.targets[j];
        p.signs[m + j] = a.signs[j];
    }
    return p;
}

// [[A, 0], [0, -A]] at double the size.
inline SignedPermutation lift_diag_neg(const SignedPermutation& a) {
    size_t m = a.size();
    SignedPermutation p;
    p.targets.resize(2 * m);
    p.signs.resize(2 * m);
    for (size_t j = 0; j < m; ++j) {
        p.targets[j] = a.targets[j];
        p.signs[j] = a.signs[j];
        p.targets[m + j] = static_cast<uint32_t>(m + a.targets[j]);
        p.signs[m + j] = a.signs[j] ^ 1;
    }
    return p;
}

// [[0, 1], [A, 0]]: the square root of two identical diagonal copies of A.
inline SignedPermutation lift_half_root(const SignedPermutation& a) {
    size_t m = a.size();
    SignedPermutation p;
    p.targets.resize(2 * m);
    p.signs.resize(2 * m);
    for (size_t j = 0; j < m; ++j) {
        p.targets[j] = static_cast<uint32_t>(m + j);
        p.signs[j] = 0;
        p.targets[m + j] = a.targets[j];
        p.signs[m + j] = a.signs[j];
    }
    return p;
}

// Block diagonal of size/a.size() copies of a.
inline SignedPermutation tile(const SignedPermutation& a, size_t size) {
    size_t m = a.size();
    if (size % m != 0) throw internal_error("tile size not a multiple of block size");
    SignedPermutation p;
    p.targets.resize(size);
    p.signs.resize(size);
    for (size_t base = 0; base < size; base += m)
        for (size_t j = 0; j < m; ++j) {
            p.targets[base + j] = static_cast<uint32_t>(base + a.targets[j]);
            p.signs[base + j] = a.signs[j];
        }
    return p;
}

inline SignedPermutation negate(const SignedPermutation& a) {
    SignedPermutation p = a;
    for (auto& s : p.signs) s ^= 1;
    return p;
}

}  // namespace detail

// Chain element for a subscript bit string (MSB first). The pairwise unit is
// the empty-subscript seed; bit 0 wraps anti-diagonally, bit 1 wraps
// diagonally with a negated lower block.
inline SignedPermutation chain_element(const std::vector<int>& subscript) {
    // bits apply from innermost (last) to outermost (first)
    SignedPermutation op = blockwise_i(2);
    for (auto it = subscript.rbegin(); it != subscript.rend(); ++it)
        op = (*it == 0) ? detail::lift_antidiag(op) : detail::lift_diag_neg(op);
    return op;
}

// The ordered set of independent quaternion operators at the given size:
// subscripts of length log2(size) - 1 in ascending binary order.
inline std::vector<SignedPermutation> quaternion_chain(size_t size) {
    if (!is_power_of_two(size) || size < 4)
        throw precondition_error("unsupported size: quaternion chain needs a power of two >= 4");
    std::vector<SignedPermutation> level{blockwise_i(2)};
    while (level.front().size() < size) {
        std::vector<SignedPermutation> next;
        next.reserve(level.size() * 2);
        for (const auto& e : level) next.push_back(detail::lift_antidiag(e));
        for (const auto& e : level) next.push_back(detail::lift_diag_neg(e));
        level = std::move(next);
    }
    return level;
}

// The basis in presentation order. Size 4 appends the product E2 = E0 o E1;
// larger sizes are the raw chain.
inline std::vector<SignedPermutation> quaternion_basis(size_t size) {
    auto chain = quaternion_chain(size);
    if (size == 4) chain.push_back(compose(chain[0], chain[1]));
    return chain;
}

// Subscript value -> dyadic label: radix point after the first digit, so a
// subscript of L bits with value v reads beta = v / 2^(L-1).
inline Rational beta_of_subscript(unsigned long value, unsigned bits) {
    Rational q(value, pow2(bits - 1));
    q.canonicalize();
    return q;
}

// The basis element named by beta at a fixed size: the chain element whose
// zero-padded subscript has length log2(size) - 1, negated for beta >= 2.
// Distinct from the tiled minimal chain that powers fractional exponents.
inline SignedPermutation basis_element(const Rational& beta, size_t size) {
    if (!is_power_of_two(size) || size < 4)
        throw precondition_error("unsupported size: quaternion chain needs a power of two >= 4");
    if (beta < 0 || beta >= 4) throw precondition_error("beta must lie in [0,4)");
    bool negated = beta >= 2;
    Rational b0 = negated ? Rational(beta - 2) : beta;
    unsigned bits = static_cast<unsigned>(log2_exact(size)) - 1;
    Rational scaled = b0 * pow2q(static_cast<long>(bits) - 1);
    if (scaled.get_den() != 1)
        throw precondition_error("beta not in basis at this size");
    unsigned long v = mpz_get_ui(scaled.get_num().get_mpz_t());
    std::vector<int> subscript(bits);
    for (unsigned k = 0; k < bits; ++k)
        subscript[bits - 1 - k] = static_cast<int>((v >> k) & 1);
    SignedPermutation e = chain_element(subscript);
    if (negated) for (auto& s : e.signs) s ^= 1;
    return e;
}

// ---------------------------------------------------------------------------
// Fractional powers
// ---------------------------------------------------------------------------

// Label for E_beta^alpha at a given string size. beta in [0,4) selects the
// base operator (beta >= 2 names the negation of the beta-2 element); alpha
// in [0,4] is the dyadic exponent.
struct OperatorLabel {
    Rational beta;
    Rational alpha;
    size_t size = 0;
};

namespace detail {

struct BetaChain {
    SignedPermutation base;  // minimal-order chain element (negated when beta >= 2)
    size_t native_order;
};

inline BetaChain beta_base(const Rational& beta, size_t size) {
    if (beta < 0 || beta >= 4) throw precondition_error("beta must lie in [0,4)");
    bool negated = beta >= 2;
    Rational b0 = negated ? Rational(beta - 2) : beta;
    auto dy = as_dyadic(b0);
    if (!dy) throw precondition_error("beta not in basis: not a dyadic rational");
    BetaChain out;
    if (b0 == 0) {
        out.base = blockwise_i(2);
        out.native_order = 2;
    } else {
        unsigned long d = dy->exponent;  // fractional bits of beta
        if (d + 2 > log2_exact(size))
            throw precondition_error("beta not in basis at this size");
        unsigned bits = static_cast<unsigned>(d) + 1;
        out.native_order = size_t{4} << d;
        // subscript value is b0 * 2^d, i.e. the (odd) dyadic mantissa
        unsigned long v = mpz_get_ui(dy->mantissa.get_mpz_t());
        std::vector<int> subscript(bits);
        for (unsigned k = 0; k < bits; ++k)
            subscript[bits - 1 - k] = static_cast<int>((v >> k) & 1);
        out.base = chain_element(subscript);
    }
    if (negated) out.base = detail::negate(out.base);
    return out;
}

}  // namespace detail

// E_beta^alpha acting on strings of label.size cells, built by the recursive
// half-root scheme: tile the minimal chain element for beta, take block
// square roots down to alpha's denominator, then raise to the numerator.
inline SignedPermutation fractional_power(const OperatorLabel& label) {
    if (!is_power_of_two(label.size) || label.size < 2)
        throw precondition_error("size must be a power of two >= 2");
    if (label.alpha < 0 || label.alpha > 4)
        throw precondition_error("alpha must lie in [0,4]");
    auto ady = as_dyadic(label.alpha);
    if (!ady) throw precondition_error("alpha must be a dyadic rational");

    detail::BetaChain chain = detail::beta_base(label.beta, label.size);

    unsigned long q = ady->exponent;  // alpha = numer / 2^q, lowest terms
    size_t max_depth = log2_exact(label.size) - log2_exact(chain.native_order);
    if (q > max_depth)
        throw precondition_error("alpha too fine for size: root depth exceeded");

    SignedPermutation block = chain.base;
    for (unsigned long j = 0; j < q; ++j) block = detail::lift_half_root(block);
    SignedPermutation root = detail::tile(block, label.size);

    BigInt numer = ady->mantissa < 0 ? BigInt(0) : ady->mantissa;
    if (!mpz_fits_ulong_p(numer.get_mpz_t())) throw precondition_error("alpha numerator too large");
    return sp_pow(root, mpz_get_ui(numer.get_mpz_t()));
}

inline SignedPermutation fractional_power(const Rational& beta, const Rational& alpha,
                                          size_t size) {
    return fractional_power(OperatorLabel{beta, alpha, size});
}

// Largest root depth available for a beta chain at this size (alpha step is
// 2^-depth).
inline unsigned long fractional_depth(const Rational& beta, size_t size) {
    detail::BetaChain chain = detail::beta_base(beta, size);
    return static_cast<unsigned long>(log2_exact(size) - log2_exact(chain.native_order));
}

// ---------------------------------------------------------------------------
// Canonical square roots
// ---------------------------------------------------------------------------

namespace detail {

struct Cycle {
    std::vector<uint32_t> elems;  // reads-from traversal starting at min index
    bool odd_sign;                // parity of signs around the cycle
};

inline std::vector<Cycle> cycles_of(const SignedPermutation& f) {
    std::vector<Cycle> out;
    std::vector<uint8_t> seen(f.size(), 0);
    for (size_t start = 0; start < f.size(); ++start) {
        if (seen[start]) continue;
        Cycle c;
        c.odd_sign = false;
        uint32_t j = static_cast<uint32_t>(start);
        do {
            seen[j] = 1;
            c.elems.push_back(j);
            c.odd_sign ^= (f.signs[j] != 0);
            j = f.targets[j];
        } while (j != start);
        out.push_back(std::move(c));
    }
    return out;
}

}  // namespace detail

struct no_root_error : precondition_error {
    no_root_error() : precondition_error("no signed-permutation square root exists") {}
};

// Deterministic square root: cycles pair up in ascending order of minimal
// index and interleave into double-length cycles; odd-length cycles with even
// sign parity root in place. Sign seeds are chosen plain at each root cycle's
// minimal index, which reproduces the block anti-diagonal construction (and
// in particular the size-4 half root of the pairwise unit) exactly.
inline SignedPermutation canonical_sqrt(const SignedPermutation& f) {
    auto cycles = detail::cycles_of(f);

    SignedPermutation r;
    r.targets.assign(f.size(), 0);
    r.signs.assign(f.size(), 0);

    auto seed_signs = [&](const std::vector<uint32_t>& cyc) {
        // signs satisfy r.sign[c_k] ^ r.sign[c_{k+1}] = f.sign[c_k]; seed the
        // minimal element (front) plain
        r.signs[cyc.front()] = 0;
        for (size_t k = 0; k + 1 < cyc.size(); ++k)
            r.signs[cyc[k + 1]] = r.signs[cyc[k]] ^ f.signs[cyc[k]];
    };

    // group by (length, parity); pairing is only valid within a group
    std::map<std::pair<size_t, bool>, std::vector<size_t>> groups;
    for (size_t i = 0; i < cycles.size(); ++i)
        groups[{cycles[i].elems.size(), cycles[i].odd_sign}].push_back(i);

    for (auto& [key, members] : groups) {
        auto [len, odd] = key;
        if (len % 2 == 1 && !odd) {
            // self-root each cycle: traverse by (len+1)/2 steps
            for (size_t idx : members) {
                const auto& cyc = cycles[idx].elems;
                size_t step = (len + 1) / 2;
                std::vector<uint32_t> rc;
                rc.reserve(len);
                size_t pos = 0;
                for (size_t k = 0; k < len; ++k) {
                    rc.push_back(cyc[pos]);
                    pos = (pos + step) % len;
                }
                for (size_t k = 0; k < len; ++k)
                    r.targets[rc[k]] = rc[(k + 1) % len];
                seed_signs(rc);
            }
        } else {
            if (members.size() % 2 != 0) throw no_root_error();
            for (size_t m = 0; m + 1 < members.size(); m += 2) {
                const auto& c1 = cycles[members[m]].elems;
                const auto& c2 = cycles[members[m + 1]].elems;
                std::vector<uint32_t> rc;
                rc.reserve(2 * len);
                for (size_t k = 0; k < len; ++k) {
                    rc.push_back(c1[k]);
                    rc.push_back(c2[k]);
                }
                for (size_t k = 0; k < 2 * len; ++k)
                    r.targets[rc[k]] = rc[(k + 1) % (2 * len)];
                seed_signs(rc);
            }
        }
    }
    if (!(compose(r, r) == f)) throw internal_error("canonical_sqrt postcondition failed");
    return r;
}

// ---------------------------------------------------------------------------
// Matrix view
// ---------------------------------------------------------------------------

// Dense matrix over {0, +1, -1}. For these operators the plain transpose
// doubles as the conjugate transpose in the block reading: the 2x2
// permutation/negation block transposes to its own negation.
struct SignMatrix {
    size_t n = 0;
    std::vector<int8_t> a;  // row-major

    int8_t at(size_t r, size_t c) const { return a[r * n + c]; }
    int8_t& at(size_t r, size_t c) { return a[r * n + c]; }

    bool operator==(const SignMatrix& o) const { return n == o.n && a == o.a; }
};

inline SignMatrix to_matrix(const SignedPermutation& f) {
    SignMatrix m;
    m.n = f.size();
    m.a.assign(m.n * m.n, 0);
    for (size_t j = 0; j < m.n; ++j)
        m.at(j, f.targets[j]) = f.signs[j] ? -1 : 1;
    return m;
}

inline SignMatrix matmul(const SignMatrix& x, const SignMatrix& y) {
    if (x.n != y.n) throw precondition_error("size mismatch");
    SignMatrix z;
    z.n = x.n;
    z.a.assign(z.n * z.n, 0);
    for (size_t r = 0; r < z.n; ++r)
        for (size_t k = 0; k < z.n; ++k) {
            int8_t v = x.at(r, k);
            if (!v) continue;
            for (size_t c = 0; c < z.n; ++c) {
                int prod = z.at(r, c) + v * y.at(k, c);
                if (prod < -1 || prod > 1)
                    throw internal_error("matrix product left the sign alphabet");
                z.at(r, c) = static_cast<int8_t>(prod);
            }
        }
    return z;
}

inline SignMatrix transpose(const SignMatrix& x) {
    SignMatrix t;
    t.n = x.n;
    t.a.assign(t.n * t.n, 0);
    for (size_t r = 0; r < x.n; ++r)
        for (size_t c = 0; c < x.n; ++c) t.at(c, r) = x.at(r, c);
    return t;
}

inline bool matrix_is_identity(const SignMatrix& x) {
    for (size_t r = 0; r < x.n; ++r)
        for (size_t c = 0; c < x.n; ++c)
            if (x.at(r, c) != (r == c ? 1 : 0)) return false;
    return true;
}

// M * M^T == id; with the block reading of the transpose this is exactly
// unitarity with the i-marker sent to -i.
inline bool is_unitary(const SignedPermutation& f) {
    SignMatrix m = to_matrix(f);
    return matrix_is_identity(matmul(m, transpose(m)));
}

// 2x2 block classification against {0, +-1, +-i}; the i marker is the
// pairwise permutation/negation block.
enum class BlockEntry : int8_t { zero = 0, plus_one, minus_one, plus_i, minus_i };

struct BlockMatrix {
    size_t n = 0;  // in blocks
    std::vector<BlockEntry> a;

    BlockEntry at(size_t r, size_t c) const { return a[r * n + c]; }
};

inline std::optional<BlockMatrix> block_form(const SignMatrix& m) {
    if (m.n % 2 != 0) return std::nullopt;
    BlockMatrix b;
    b.n = m.n / 2;
    b.a.assign(b.n * b.n, BlockEntry::zero);
    for (size_t r = 0; r < b.n; ++r)
        for (size_t c = 0; c < b.n; ++c) {
            int8_t e00 = m.at(2 * r, 2 * c), e01 = m.at(2 * r, 2 * c + 1);
            int8_t e10 = m.at(2 * r + 1, 2 * c), e11 = m.at(2 * r + 1, 2 * c + 1);
            BlockEntry v;
            if (!e00 && !e01 && !e10 && !e11)
                v = BlockEntry::zero;
            else if (e00 == 1 && e11 == 1 && !e01 && !e10)
                v = BlockEntry::plus_one;
            else if (e00 == -1 && e11 == -1 && !e01 && !e10)
                v = BlockEntry::minus_one;
            else if (!e00 && !e11 && e01 == 1 && e10 == -1)
                v = BlockEntry::plus_i;
            else if (!e00 && !e11 && e01 == -1 && e10 == 1)
                v = BlockEntry::minus_i;
            else
                return std::nullopt;
            b.a[r * b.n + c] = v;
        }
    return b;
}

}  // namespace dyadlab
