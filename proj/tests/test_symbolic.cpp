#include "dyadlab/symbolic.hpp"

#include <catch2/catch.hpp>

#include <random>

using namespace dyadlab;

namespace {

SymbolString string_of(const char* pattern) {
    // "a.a." reads plain, negated, plain, negated
    SymbolString s;
    s.label = 'a';
    for (const char* p = pattern; *p; ++p) s.cells.push_back(*p == '.' ? 1 : 0);
    return s;
}

// Independent oracle: act on a vector of tagged unknowns through the dense
// sign matrix instead of the permutation representation.
SymbolString matrix_apply_oracle(const SignedPermutation& f, const SymbolString& in) {
    SignMatrix m = to_matrix(f);
    SymbolString out;
    out.label = in.label;
    out.cells.assign(in.size(), 0);
    for (size_t r = 0; r < m.n; ++r) {
        int acc_cell = -1, acc_sign = 0;
        for (size_t c = 0; c < m.n; ++c) {
            if (m.at(r, c) == 0) continue;
            REQUIRE(acc_cell == -1);  // one entry per row
            acc_cell = static_cast<int>(c);
            acc_sign = m.at(r, c) < 0;
        }
        REQUIRE(acc_cell >= 0);
        out.cells[r] = in.cells[acc_cell] ^ acc_sign;
    }
    return out;
}

}  // namespace

TEST_CASE("blockwise i acts pairwise") {
    auto i4 = blockwise_i(4);

    CHECK(i4.apply(string_of("aaaa")) == string_of("a.a."));

    // distinct-cell bookkeeping: targets/sign table matches (x,y) -> (y, !x)
    CHECK(i4.targets == std::vector<uint32_t>{1, 0, 3, 2});
    CHECK(i4.signs == std::vector<uint8_t>{0, 1, 0, 1});

    // i o i = global negation
    CHECK(compose(i4, i4) == global_negation(4));

    CHECK_THROWS_AS(blockwise_i(0), precondition_error);
    CHECK_THROWS_AS(blockwise_i(3), precondition_error);
}

TEST_CASE("composition semantics") {
    auto i4 = blockwise_i(4);
    CHECK(compose(sp_identity(4), i4) == i4);
    CHECK(compose(i4, sp_identity(4)) == i4);
    CHECK_THROWS_AS(compose(blockwise_i(4), blockwise_i(8)), precondition_error);

    // associativity on a sample of generated operators
    auto basis = quaternion_basis(8);
    for (const auto& f : basis)
        for (const auto& g : basis) {
            auto lhs = compose(compose(f, g), basis[0]);
            auto rhs = compose(f, compose(g, basis[0]));
            CHECK(lhs == rhs);
        }

    // cross-check compose against the dense matrix oracle
    SymbolString probe = string_of("a..a.aa.");
    for (const auto& f : basis)
        for (const auto& g : basis) {
            auto composed = compose(f, g);
            CHECK(composed.apply(probe) == matrix_apply_oracle(f, matrix_apply_oracle(g, probe)));
        }
}

TEST_CASE("the size-4 quaternion triple") {
    auto basis = quaternion_basis(4);
    REQUIRE(basis.size() == 3);
    const auto& e0 = basis[0];
    const auto& e1 = basis[1];
    const auto& e2 = basis[2];

    // E0(a1 a2 a3 a4) = a4 !a3 a2 !a1
    SymbolString in = string_of("aa..");
    CHECK(e0.apply(in).cells == std::vector<uint8_t>{1, 0, 0, 1});
    // E1(a1 a2 a3 a4) = a2 !a1 !a4 a3
    CHECK(e1.apply(in).cells == std::vector<uint8_t>{0, 1, 0, 1});
    // E2(a1 a2 a3 a4) = a3 a4 !a1 !a2
    CHECK(e2.apply(in).cells == std::vector<uint8_t>{1, 1, 1, 1});

    CHECK(compose(e0, e1) == e2);
    for (const auto& e : basis) {
        CHECK(compose(e, e) == global_negation(4));
        CHECK(operator_order(e) == 4);
    }

    CHECK(operator_order(sp_identity(4)) == 1);
    CHECK(operator_order(global_negation(4)) == 2);
}

TEST_CASE("chain relations at sizes 8 and 16") {
    for (size_t size : {size_t{8}, size_t{16}}) {
        auto chain = quaternion_chain(size);
        REQUIRE(chain.size() == size / 2);

        // every element squares to global negation and has order 4
        for (const auto& e : chain) {
            CHECK(compose(e, e) == global_negation(size));
            CHECK(operator_order(e) == 4);
        }

        // E_{0s} o E_{1s} is the same block antidiagonal [[0,1],[-1,0]] for
        // every suffix s
        SignedPermutation expected;
        {
            auto id_half = sp_identity(size / 2);
            expected = detail::lift_antidiag(id_half);
            for (size_t j = size / 2; j < size; ++j) expected.signs[j] ^= 1;
        }
        for (size_t s = 0; s < chain.size() / 2; ++s)
            CHECK(compose(chain[s], chain[chain.size() / 2 + s]) == expected);
    }
}

TEST_CASE("beta labels follow the radix point rule") {
    CHECK(beta_of_subscript(0b000, 3) == Rational(0));
    CHECK(beta_of_subscript(0b001, 3) == Rational(1, 4));
    CHECK(beta_of_subscript(0b101, 3) == Rational(5, 4));
    CHECK(beta_of_subscript(0b1, 1) == Rational(1));
    CHECK(beta_of_subscript(0b11, 2) == Rational(3, 2));
}

TEST_CASE("canonical square roots") {
    SECTION("half root of the pairwise unit reproduces the published map") {
        auto r = canonical_sqrt(blockwise_i(4));
        // (a1 a2 a3 a4) -> (a3, a4, a2, !a1)
        CHECK(r.targets == std::vector<uint32_t>{2, 3, 1, 0});
        CHECK(r.signs == std::vector<uint8_t>{0, 0, 0, 1});
        CHECK(compose(r, r) == blockwise_i(4));
        CHECK(operator_order(r) == 8);
    }

    SECTION("identity roots to identity") {
        CHECK(canonical_sqrt(sp_identity(8)) == sp_identity(8));
    }

    SECTION("global negation roots to the pairwise unit") {
        auto r = canonical_sqrt(global_negation(4));
        CHECK(compose(r, r) == global_negation(4));
        CHECK(r == blockwise_i(4));
    }

    SECTION("postcondition holds across the generated families") {
        for (size_t size : {size_t{4}, size_t{8}, size_t{16}}) {
            for (const auto& e : quaternion_basis(size)) {
                auto r = canonical_sqrt(e);
                CHECK(compose(r, r) == e);
            }
        }
    }

    SECTION("no root for a lone odd-parity cycle") {
        CHECK_THROWS_AS(canonical_sqrt(blockwise_i(2)), precondition_error);
        // a single 4-cycle with odd parity has no signed-permutation root
        CHECK_THROWS_AS(canonical_sqrt(canonical_sqrt(blockwise_i(4))), precondition_error);
    }

    SECTION("agrees with the block scheme on tiled units") {
        for (size_t size : {size_t{4}, size_t{8}, size_t{16}}) {
            auto direct = canonical_sqrt(blockwise_i(size));
            auto block = fractional_power(Rational(0), Rational(1, 2), size);
            CHECK(direct == block);
        }
    }
}

TEST_CASE("fractional powers") {
    SECTION("alpha = 1/2 on the beta = 0 chain at size 4") {
        auto r = fractional_power(Rational(0), Rational(1, 2), 4);
        CHECK(r.apply(string_of("aaaa")) == string_of("aaa."));
        CHECK(compose(r, r) == blockwise_i(4));
    }

    SECTION("alpha = 3/2 leaves exactly one plain cell") {
        auto r = fractional_power(Rational(0), Rational(3, 2), 4);
        auto composed = compose(blockwise_i(4), fractional_power(Rational(0), Rational(1, 2), 4));
        CHECK(r == composed);
        CHECK(r.apply(string_of("aaaa")).plain_count() == 1);
    }

    SECTION("integer landmarks") {
        for (Rational beta : {Rational(0), Rational(1), Rational(1, 2), Rational(5, 2)}) {
            size_t size = 16;
            CHECK(is_identity(fractional_power(beta, Rational(0), size)));
            CHECK(fractional_power(beta, Rational(2), size) == global_negation(size));
            CHECK(is_identity(fractional_power(beta, Rational(4), size)));
        }
    }

    SECTION("depth errors") {
        CHECK_THROWS_AS(fractional_power(Rational(0), Rational(1, 4), 4), precondition_error);
        CHECK_THROWS_AS(fractional_power(Rational(1), Rational(1, 2), 4), precondition_error);
        CHECK_THROWS_AS(fractional_power(Rational(1, 2), Rational(1), 4), precondition_error);
        CHECK_THROWS_AS(fractional_power(Rational(1, 3), Rational(1), 16), precondition_error);
    }

    SECTION("power law within a chain") {
        // r = E^(1/4); r^k = E^(k/4)
        size_t size = 16;
        auto quarter = fractional_power(Rational(0), Rational(1, 4), size);
        for (unsigned k = 0; k <= 16; ++k) {
            auto direct = fractional_power(Rational(0), Rational(k, 4), size);
            CHECK(sp_pow(quarter, k) == direct);
        }
    }
}

TEST_CASE("frequency follows |1 - alpha/2| exhaustively") {
    for (size_t size : {size_t{4}, size_t{8}, size_t{16}}) {
        auto all_a = uniform_string(size);
        unsigned n = static_cast<unsigned>(log2_exact(size));
        // all admissible beta at this size: denominators up to 2^(n-2), plus
        // the negated band
        for (unsigned db = 0; db + 2 <= n; ++db) {
            for (unsigned long num = 0; num < (2ul << db); ++num) {
                Rational beta0(num, pow2(db));
                beta0.canonicalize();
                for (Rational beta : {beta0, Rational(beta0 + 2)}) {
                    unsigned long depth = fractional_depth(beta, size);
                    for (unsigned long an = 0; an <= (4ul << depth); ++an) {
                        Rational alpha(an, pow2(depth));
                        alpha.canonicalize();
                        auto op = fractional_power(beta, alpha, size);
                        Rational expected = abs_rational(1 - alpha / 2);
                        CHECK(frequency(op.apply(all_a)) == expected);
                    }
                }
            }
        }
    }
}

TEST_CASE("frequency landmarks from the probability function") {
    auto all_a = uniform_string(4);
    CHECK(frequency(blockwise_i(4).apply(all_a)) == Rational(1, 2));
    CHECK(frequency(canonical_sqrt(blockwise_i(4)).apply(all_a)) == Rational(3, 4));
    CHECK(frequency(all_a) == 1);
}

TEST_CASE("matrix view") {
    SECTION("pairwise unit at size 2") {
        SignMatrix m = to_matrix(blockwise_i(2));
        CHECK(m.at(0, 0) == 0);
        CHECK(m.at(0, 1) == 1);
        CHECK(m.at(1, 0) == -1);
        CHECK(m.at(1, 1) == 0);
    }

    SECTION("E2 is [[0,1],[-1,0]] in 2x2 blocks") {
        auto basis = quaternion_basis(4);
        auto blocks = block_form(to_matrix(basis[2]));
        REQUIRE(blocks.has_value());
        CHECK(blocks->at(0, 0) == BlockEntry::zero);
        CHECK(blocks->at(0, 1) == BlockEntry::plus_one);
        CHECK(blocks->at(1, 0) == BlockEntry::minus_one);
        CHECK(blocks->at(1, 1) == BlockEntry::zero);
    }

    SECTION("block forms of E0 and E1 match the displayed matrices") {
        auto basis = quaternion_basis(4);
        auto b0 = block_form(to_matrix(basis[0]));
        REQUIRE(b0);
        CHECK(b0->at(0, 1) == BlockEntry::plus_i);
        CHECK(b0->at(1, 0) == BlockEntry::plus_i);
        CHECK(b0->at(0, 0) == BlockEntry::zero);
        auto b1 = block_form(to_matrix(basis[1]));
        REQUIRE(b1);
        CHECK(b1->at(0, 0) == BlockEntry::plus_i);
        CHECK(b1->at(1, 1) == BlockEntry::minus_i);
    }

    SECTION("matrix product oracle: M(E0) M(E1) = M(E2)") {
        auto basis = quaternion_basis(4);
        // composition order f o g means matrix(f) acts after matrix(g):
        // M(f o g) = M(f) * M(g)
        CHECK(matmul(to_matrix(basis[0]), to_matrix(basis[1])) == to_matrix(basis[2]));
    }

    SECTION("matrix multiplication represents composition in general") {
        for (const auto& f : quaternion_basis(8))
            for (const auto& g : quaternion_basis(8))
                CHECK(matmul(to_matrix(f), to_matrix(g)) == to_matrix(compose(f, g)));
    }
}

TEST_CASE("unitarity across the generated operators") {
    for (size_t size : {size_t{4}, size_t{8}, size_t{16}}) {
        for (const auto& e : quaternion_basis(size)) CHECK(is_unitary(e));
        CHECK(is_unitary(fractional_power(Rational(0), Rational(1, 2), size)));
        CHECK(is_unitary(canonical_sqrt(blockwise_i(size))));
    }
}

TEST_CASE("Pauli triple from the quaternions") {
    // sigma_x = -i E0, sigma_z = -i E1, sigma_y = -i E2 where i is the tiled
    // pairwise unit acting as the scalar imaginary
    auto basis = quaternion_basis(4);
    auto i4 = blockwise_i(4);
    auto minus_i = compose(global_negation(4), i4);
    auto sx = compose(minus_i, basis[0]);
    auto sz = compose(minus_i, basis[1]);
    auto sy = compose(minus_i, basis[2]);

    // involutions
    CHECK(is_identity(compose(sx, sx)));
    CHECK(is_identity(compose(sy, sy)));
    CHECK(is_identity(compose(sz, sz)));

    // sigma_x sigma_y = i sigma_z
    CHECK(compose(sx, sy) == compose(i4, sz));

    // pairwise anti-commutation
    auto anticommute = [&](const SignedPermutation& p, const SignedPermutation& q) {
        return compose(p, q) == compose(global_negation(4), compose(q, p));
    };
    CHECK(anticommute(sx, sy));
    CHECK(anticommute(sy, sz));
    CHECK(anticommute(sx, sz));

    // expected block structure: sigma_z = [[1,0],[0,-1]], sigma_x = [[0,1],[1,0]]
    auto bz = block_form(to_matrix(sz));
    REQUIRE(bz);
    CHECK(bz->at(0, 0) == BlockEntry::plus_one);
    CHECK(bz->at(1, 1) == BlockEntry::minus_one);
    auto bx = block_form(to_matrix(sx));
    REQUIRE(bx);
    CHECK(bx->at(0, 1) == BlockEntry::plus_one);
    CHECK(bx->at(1, 0) == BlockEntry::plus_one);
    auto by = block_form(to_matrix(sy));
    REQUIRE(by);
    CHECK(by->at(0, 1) == BlockEntry::minus_i);
    CHECK(by->at(1, 0) == BlockEntry::plus_i);
}

TEST_CASE("strings do not vary continuously with beta") {
    // dyadic truncations of sqrt(2) converging upward; consecutive distinct
    // operator labels keep a positive Hamming separation
    size_t size = 1024;
    unsigned n = static_cast<unsigned>(log2_exact(size));
    auto all_a = uniform_string(size);

    std::vector<Rational> betas;
    BigInt two_scaled;
    for (unsigned k = 0; k + 2 <= n; ++k) {
        // floor(sqrt(2) * 2^k) / 2^k
        BigInt scaled;
        mpz_ui_pow_ui(scaled.get_mpz_t(), 2, 2 * k + 1);
        BigInt root;
        mpz_sqrt(root.get_mpz_t(), scaled.get_mpz_t());
        Rational b(root, pow2(k));
        b.canonicalize();
        if (betas.empty() || betas.back() != b) betas.push_back(b);
    }
    REQUIRE(betas.size() >= 4);

    for (size_t k = 0; k + 1 < betas.size(); ++k) {
        auto s1 = fractional_power(betas[k], Rational(1), size).apply(all_a);
        auto s2 = fractional_power(betas[k + 1], Rational(1), size).apply(all_a);
        CHECK(normalized_hamming(s1, s2) > 0);
    }
}

TEST_CASE("sampled relations at larger sizes") {
    for (size_t size : {size_t{64}, size_t{256}}) {
        auto chain = quaternion_chain(size);
        auto all_a = uniform_string(size);
        // spot-check a spread of chain elements
        for (size_t idx : {size_t{0}, chain.size() / 3, chain.size() - 1}) {
            CHECK(compose(chain[idx], chain[idx]) == global_negation(size));
            CHECK(operator_order(chain[idx]) == 4);
        }
        // and a few fractional powers against the frequency law
        for (auto [beta, alpha] : {std::pair{Rational(0), Rational(1, 16)},
                                   std::pair{Rational(1, 2), Rational(5, 4)},
                                   std::pair{Rational(3), Rational(7, 2)}}) {
            auto image = fractional_power(beta, alpha, size).apply(all_a);
            CHECK(frequency(image) == abs_rational(1 - alpha / 2));
        }
    }
}

TEST_CASE("random composition properties") {
    std::mt19937 rng(20140301);
    auto chain = quaternion_chain(16);
    std::uniform_int_distribution<size_t> pick(0, chain.size() - 1);
    for (int trial = 0; trial < 200; ++trial) {
        auto f = chain[pick(rng)];
        auto g = chain[pick(rng)];
        auto h = compose(f, g);
        h.check_valid();
        CHECK(is_unitary(h));
        CHECK(is_identity(compose(h, sp_inverse(h))));
    }
}
