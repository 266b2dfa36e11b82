#include "dyadlab/lorenz.hpp"

#include <catch2/catch.hpp>

#include <algorithm>
#include <random>

using namespace dyadlab;

namespace {

const LorenzParams kStandard{};

// 2x2 integer product oracle, independent of the ModularMatrix operator.
std::array<long, 4> mat2_oracle(const std::string& word) {
    std::array<long, 4> m{1, 0, 0, 1};
    for (char ch : word) {
        std::array<long, 4> g = ch == 'L' ? std::array<long, 4>{1, 1, 0, 1}
                                          : std::array<long, 4>{1, 0, 1, 1};
        m = {m[0] * g[0] + m[1] * g[2], m[0] * g[1] + m[1] * g[3],
             m[2] * g[0] + m[3] * g[2], m[2] * g[1] + m[3] * g[3]};
    }
    return m;
}

}  // namespace

TEST_CASE("integration basics") {
    SECTION("the origin is a fixed point") {
        auto traj = integrate({0, 0, 0}, kStandard, 1e-3, 1.0);
        CHECK(norm(traj.states.back()) == 0.0);
    }

    SECTION("the spiral equilibrium C+ stays put") {
        double c = std::sqrt(kStandard.b * (kStandard.r - 1));
        auto traj = integrate({c, c, kStandard.r - 1}, kStandard, 1e-3, 1.0);
        CHECK(norm(traj.states.back() - traj.states.front()) < 1e-6);
    }

    SECTION("desk-scale envelope from a generic start") {
        auto traj = integrate({1, 1, 1}, kStandard, 1e-3, 100.0);
        double max_x = 0, max_z = 0;
        for (const auto& s : traj.states) {
            max_x = std::max(max_x, std::abs(s.x));
            max_z = std::max(max_z, s.z);
        }
        CHECK(max_x < 25.0);
        CHECK(max_z < 50.0);
    }

    SECTION("parameter validation") {
        CHECK_THROWS_AS(integrate({1, 1, 1}, LorenzParams{-1, 28, 8.0 / 3.0}, 1e-3, 1.0),
                        precondition_error);
        CHECK_THROWS_AS(integrate({1, 1, 1}, LorenzParams{0.0, 28, 0.0}, 1e-3, 1.0),
                        precondition_error);
        CHECK_THROWS_AS(ellipsoid_contraction_check(LorenzParams{0.0, 28, 0.0}),
                        precondition_error);
        CHECK_THROWS_AS(integrate({1, 1, 1}, kStandard, 0.0, 1.0), precondition_error);
    }
}

TEST_CASE("volume contraction") {
    CHECK(divergence(kStandard) == Approx(-41.0 / 3.0).epsilon(1e-12));
    CHECK(divergence(LorenzParams{1, 28, 1}) == Approx(-3.0).epsilon(1e-12));
    CHECK(divergence(LorenzParams{3, 10, 2}) < 0);

    SECTION("measured log-volume decay matches the trace") {
        double rate = ellipsoid_contraction_check(kStandard, 50.0);
        CHECK(std::abs(rate - divergence(kStandard)) < 0.01 * std::abs(divergence(kStandard)));
    }

    SECTION("doubling sigma shifts the rate by exactly -10") {
        LorenzParams doubled = kStandard;
        doubled.sigma = 20.0;
        double r1 = ellipsoid_contraction_check(kStandard, 50.0);
        double r2 = ellipsoid_contraction_check(doubled, 50.0);
        CHECK(std::abs((r2 - r1) - (-10.0)) < 0.1);
    }

    SECTION("rate is independent of the initial frame orientation") {
        std::array<std::array<double, 3>, 3> tilted{
            {{0.6, 0.8, 0.0}, {-0.8, 0.6, 0.0}, {0.0, 0.0, 1.0}}};
        double r1 = ellipsoid_contraction_check(kStandard, 50.0);
        double r2 = ellipsoid_contraction_check(kStandard, 50.0, 1e-3, tilted);
        CHECK(std::abs(r1 - r2) < 0.01 * std::abs(r1));
    }
}

TEST_CASE("largest Lyapunov exponent") {
    double lam = lyapunov_max(kStandard, 600.0);
    CHECK(lam == Approx(0.9).margin(0.05));

    SECTION("stable under halving the step") {
        double lam2 = lyapunov_max(kStandard, 600.0, 1.0, 5e-4);
        CHECK(std::abs(lam2 - lam) < 0.02 * std::abs(lam));
    }

    SECTION("globally stable regime has no positive exponent") {
        LorenzParams stable = kStandard;
        stable.r = 0.5;
        CHECK(lyapunov_max(stable, 200.0, 1.0, 1e-3, 5.0, {0.1, 0.1, 0.1}) <= 0.0);
    }
}

TEST_CASE("symbolic words") {
    SECTION("a trajectory spiralling one wing reads a constant word") {
        // start close to C- and watch a few circuits before escape
        double c = std::sqrt(kStandard.b * (kStandard.r - 1));
        LorenzState near_left{-c + 0.4, -c + 0.4, kStandard.r - 1};
        auto word = symbolic_word(near_left, kStandard, 1e-3, 4.0);
        REQUIRE_FALSE(word.empty());
        CHECK(word.find('R') == std::string::npos);
    }

    SECTION("no crossings yields an empty-word error") {
        CHECK_THROWS_WITH(symbolic_word(LorenzState{0, 0, 1}, kStandard, 1e-3, 0.5),
                          Catch::Matchers::Contains("empty word"));
    }
}

TEST_CASE("cyclic normal form") {
    CHECK(cyclic_normal_form("RL") == "LR");
    CHECK(cyclic_normal_form("RLRLL") == "LLRLR");
    CHECK(cyclic_normal_form("LLLL") == "LLLL");
    CHECK(cyclic_normal_form("LRLRL") == "LLRLR");
    CHECK_THROWS_AS(cyclic_normal_form(""), precondition_error);

    // rotations all map to one normal form
    std::mt19937 rng(5);
    for (int trial = 0; trial < 200; ++trial) {
        std::string w;
        size_t len = 1 + rng() % 12;
        for (size_t i = 0; i < len; ++i) w += (rng() & 1) ? 'L' : 'R';
        std::string nf = cyclic_normal_form(w);
        std::string rotated = w;
        std::rotate(rotated.begin(), rotated.begin() + rng() % len, rotated.end());
        CHECK(cyclic_normal_form(rotated) == nf);
    }
}

TEST_CASE("modular word matrices") {
    SECTION("generators") {
        CHECK(word_to_matrix("L") == ModularMatrix{1, 1, 0, 1});
        CHECK(word_to_matrix("R") == ModularMatrix{1, 0, 1, 1});
        CHECK(word_to_matrix("LR") == ModularMatrix{2, 1, 1, 1});
    }

    SECTION("the worked example") {
        auto A = word_to_matrix("LRRRLLRRRLLLLR");
        CHECK(A == ModularMatrix{164, 133, 127, 103});
        CHECK(A.det() == 1);
    }

    SECTION("unit determinant and the monoid homomorphism, randomly") {
        std::mt19937 rng(99);
        for (int trial = 0; trial < 10000; ++trial) {
            size_t len = 1 + rng() % 20;
            std::string w;
            for (size_t i = 0; i < len; ++i) w += (rng() & 1) ? 'L' : 'R';
            auto m = word_to_matrix(w);
            CHECK(m.det() == 1);

            auto oracle = mat2_oracle(w);
            CHECK(m.a == oracle[0]);
            CHECK(m.b == oracle[1]);
            CHECK(m.c == oracle[2]);
            CHECK(m.d == oracle[3]);

            size_t cut = 1 + rng() % len;
            if (cut < len) {
                auto left = word_to_matrix(w.substr(0, cut));
                auto right = word_to_matrix(w.substr(cut));
                CHECK(left * right == m);
            }
        }
    }

    SECTION("rejects other alphabets") {
        CHECK_THROWS_AS(word_to_matrix("LXR"), precondition_error);
        CHECK_THROWS_AS(word_to_matrix(""), precondition_error);
    }
}

TEST_CASE("unstable periodic orbits") {
    auto catalogue = find_upos(kStandard, 5);
    REQUIRE_FALSE(catalogue.orbits.empty());
    CHECK_FALSE(catalogue.budget_exhausted);

    auto find_word = [&](const std::string& nf) -> const UpoRecord* {
        for (const auto& o : catalogue.orbits)
            if (o.normal_form == nf) return &o;
        return nullptr;
    };

    SECTION("the short catalogue contains the expected words") {
        const UpoRecord* lr = find_word("LR");
        REQUIRE(lr != nullptr);
        // golden period from this implementation's own refinement
        CHECK(lr->period == Approx(1.558652).margin(1e-3));
        CHECK(lr->closure_error < 1e-6);

        // the five-symbol alternating orbit, normal form of LRLRL
        const UpoRecord* lrlrl = find_word(cyclic_normal_form("LRLRL"));
        REQUIRE(lrlrl != nullptr);
        CHECK(lrlrl->period == Approx(3.869539).margin(1e-3));
        CHECK(lrlrl->closure_error < 1e-6);
    }

    SECTION("every refined orbit closes and reproduces its word") {
        for (const auto& o : catalogue.orbits) {
            CHECK(o.closure_error < 1e-6);
            CHECK(o.matrix.det() == 1);
            CHECK(cyclic_normal_form(o.word) == o.normal_form);

            // re-integrate one period and extract the word again
            auto rec = certify_upo(o.initial, o.period, kStandard, 1e-3);
            CHECK(rec.closure_error < 1e-6);
            CHECK(cyclic_normal_form(rec.word) == o.normal_form);
        }
    }

    SECTION("no equilibrium impersonates an orbit") {
        for (const auto& o : catalogue.orbits) CHECK(norm(rhs(o.initial, kStandard)) > 1e-3);
    }

    SECTION("a starved refinement budget flags exhaustion") {
        UpoSearchBudget tiny;
        tiny.search_time = 300.0;
        tiny.max_refinements = 1;
        auto starved = find_upos(kStandard, 5, tiny);
        CHECK(starved.budget_exhausted);
        CHECK(starved.orbits.size() <= 1);
    }

    SECTION("words up to length five form the known census") {
        // 1 + 2 + 3 + 6 admissible primitive cyclic words of lengths 2..5
        std::vector<std::string> names;
        for (const auto& o : catalogue.orbits) names.push_back(o.normal_form);
        std::sort(names.begin(), names.end());
        CHECK(names.size() == 12);
        CHECK(std::count(names.begin(), names.end(), "LR") == 1);
        CHECK(find_word("LLR") != nullptr);
        CHECK(find_word("LRR") != nullptr);
        CHECK(find_word("LLRR") != nullptr);
        CHECK(find_word("LLLR") != nullptr);
        CHECK(find_word("LRRR") != nullptr);
    }
}

TEST_CASE("word-targeted orbit search") {
    SECTION("short words match the close-return catalogue") {
        auto rec = find_upo_by_word("LR", kStandard);
        REQUIRE(rec);
        CHECK(rec->period == Approx(1.558652).margin(1e-3));
        CHECK(rec->closure_error < 1e-6);
        CHECK(cyclic_normal_form(rec->word) == "LR");
    }

    SECTION("the twenty-symbol orbit refines and closes") {
        std::string word = "RLLRLLLRRRLLRLRRRRLL";
        auto rec = find_upo_by_word(word, kStandard);
        REQUIRE(rec);
        CHECK(cyclic_normal_form(rec->word) == cyclic_normal_form(word));
        CHECK(rec->closure_error < 1e-6);
        CHECK(rec->period == Approx(15.258146).margin(1e-2));
        CHECK(rec->matrix.det() == 1);
    }

    SECTION("alphabet validation") {
        CHECK_THROWS_AS(find_upo_by_word("LRX", kStandard), precondition_error);
        CHECK_THROWS_AS(find_upo_by_word("", kStandard), precondition_error);
    }
}

TEST_CASE("ensembles") {
    SECTION("a single-member ring reduces to plain integration") {
        std::vector<LorenzState> ring{{1, 1, 1}};
        auto res = evolve_ensemble(ring, kStandard, 1e-3, 2.0);
        auto traj = integrate({1, 1, 1}, kStandard, 1e-3, 2.0);
        CHECK(norm(res.states[0] - traj.states.back()) < 1e-12);
        CHECK(res.surviving == 1);
    }

    SECTION("cardinality is conserved") {
        auto ring = make_ring({0, 0, 15}, kStandard, 1e-3, 48);
        auto res = evolve_ensemble(ring, kStandard, 1e-3, 3.0);
        CHECK(res.states.size() == 48);
        CHECK(res.surviving == 48);
    }

    SECTION("a quiet stretch of the attractor keeps the ring tight") {
        auto traj = integrate({1, 1, 1}, kStandard, 1e-3, 35.0);
        LorenzState center = traj.states.back();
        auto ring = make_ring(center, kStandard, 1e-3, 32);
        auto res = evolve_ensemble(ring, kStandard, 1e-3, 2.0);
        double ratio = max_pairwise_distance(res.states) / max_pairwise_distance(ring);
        CHECK(ratio < 10.0);
    }

    SECTION("straddling the saddle splits the ring across both wings") {
        auto ring = make_ring({0, 0, 15}, kStandard, 1e-3, 32);
        auto res = evolve_ensemble(ring, kStandard, 1e-3, 3.0);
        double ratio = max_pairwise_distance(res.states) / max_pairwise_distance(ring);
        CHECK(ratio > 100.0);
        int left = 0, right = 0;
        for (const auto& s : res.states) (s.x < 0 ? left : right)++;
        CHECK(left > 0);
        CHECK(right > 0);
    }

    SECTION("empty rings are rejected") {
        CHECK_THROWS_AS(evolve_ensemble({}, kStandard, 1e-3, 1.0), precondition_error);
    }
}
