// Command-line front end: every construction in the library is reachable as a
// subcommand that emits deterministic JSON or CSV. Identical invocations
// produce byte-identical files.

#include "dyadlab/bloch.hpp"
#include "dyadlab/cantor.hpp"
#include "dyadlab/lorenz.hpp"
#include "dyadlab/numbers.hpp"
#include "dyadlab/serialize.hpp"
#include "dyadlab/symbolic.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <numeric>
#include <optional>
#include <string>

namespace {

using namespace dyadlab;

std::string g_out_dir;

// Output path resolution: explicit path (joined onto --out-dir when
// relative), else out-dir/name, else stdout.
void emit_text(const std::string& path, const std::string& fallback_name,
               const std::string& content) {
    std::string target = path;
    if (target.empty() && !g_out_dir.empty()) target = g_out_dir + "/" + fallback_name;
    if (!target.empty() && target != "-" && target.front() != '/' && !g_out_dir.empty())
        target = g_out_dir + "/" + target;
    if (target.empty() || target == "-") {
        std::cout << content;
        return;
    }
    std::ofstream os(target, std::ios::binary);
    if (!os) throw precondition_error("cannot open output file: " + target);
    os << content;
}

void emit_json(const std::string& path, const std::string& fallback_name, const Json& j) {
    emit_text(path, fallback_name, j.dump(2) + "\n");
}

Rational parse_rational(const std::string& text) { return rational_from_string(text); }

struct AlgebraOptions {
    size_t size = 4;
    std::string beta = "0";
    std::string alpha = "1";
    bool basis = false;
    bool verify = false;
    bool power = false;
    bool sqrt_of_unit = false;
    bool matrix = false;
    std::string out;
};

void run_algebra(const AlgebraOptions& opt) {
    if (!is_power_of_two(opt.size) || opt.size < 2)
        throw precondition_error("size must be a power of two >= 2");
    Json j;
    j["schema_version"] = kSchemaVersion;
    j["size"] = opt.size;

    if (opt.basis) {
        Json ops = Json::array();
        auto basis = quaternion_basis(opt.size);
        auto all_a = uniform_string(opt.size);
        unsigned bits = static_cast<unsigned>(log2_exact(opt.size));
        for (size_t idx = 0; idx < basis.size(); ++idx) {
            Json op;
            if (opt.size == 4 && idx == 2)
                op["name"] = "E2 = E0 o E1";
            else
                op["beta"] =
                    json_rational(beta_of_subscript(static_cast<unsigned long>(idx),
                                                    std::max(1u, bits - 1)));
            op["operator"] = to_json(basis[idx]);
            op["image_of_all_plain"] = to_json(basis[idx].apply(all_a));
            op["order"] = operator_order(basis[idx]);
            if (opt.matrix) op["matrix"] = to_json(to_matrix(basis[idx]));
            ops.push_back(op);
        }
        j["basis"] = ops;
    }

    if (opt.verify) {
        auto chain = quaternion_chain(opt.size);
        bool squares = true, orders = true, unitary = true, pairs = true;
        auto neg = global_negation(opt.size);
        for (const auto& e : chain) {
            squares = squares && (compose(e, e) == neg);
            orders = orders && (operator_order(e) == 4);
            unitary = unitary && is_unitary(e);
        }
        SignedPermutation expected = detail::lift_antidiag(sp_identity(opt.size / 2));
        for (size_t jx = opt.size / 2; jx < opt.size; ++jx) expected.signs[jx] ^= 1;
        for (size_t s = 0; s < chain.size() / 2; ++s)
            pairs = pairs && (compose(chain[s], chain[chain.size() / 2 + s]) == expected);
        Json v;
        v["squares_to_negation"] = squares;
        v["order_four"] = orders;
        v["unitary"] = unitary;
        v["chain_pair_products_match"] = pairs;
        j["verify"] = v;
        if (!(squares && orders && unitary && pairs))
            throw internal_error("operator relation verification failed");
    }

    if (opt.power) {
        Rational beta = parse_rational(opt.beta);
        Rational alpha = parse_rational(opt.alpha);
        auto op = fractional_power(beta, alpha, opt.size);
        j["beta"] = json_rational(beta);
        j["alpha"] = json_rational(alpha);
        j["operator"] = to_json(op);
        auto image = op.apply(uniform_string(opt.size));
        j["image_of_all_plain"] = to_json(image);
        j["frequency"] = json_rational(frequency(image));
        if (opt.matrix) j["matrix"] = to_json(to_matrix(op));
    }

    if (opt.sqrt_of_unit) {
        auto root = canonical_sqrt(blockwise_i(opt.size));
        j["sqrt_of_pairwise_unit"] = to_json(root);
        j["image_of_all_plain"] = to_json(root.apply(uniform_string(opt.size)));
    }

    emit_json(opt.out, "algebra.json", j);
}

struct CantorOptions {
    unsigned N = 2;
    unsigned k = 1;
    std::string variant = "ti";
    int middle_thirds_k = -1;
    bool labels = false;
    bool map_d = false;
    int dimension_n = -1;
    std::string out;
    std::string csv;
};

void run_cantor(const CantorOptions& opt) {
    if (opt.dimension_n >= 0) {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["N"] = opt.dimension_n;
        j["similarity_dimension"] =
            json_double(static_cast<double>(similarity_dimension(opt.dimension_n)));
        emit_json(opt.out, "dimension.json", j);
        return;
    }
    if (opt.middle_thirds_k >= 0) {
        auto approx = middle_thirds(static_cast<unsigned>(opt.middle_thirds_k));
        if (!opt.csv.empty() || opt.out.empty()) {
            std::ostringstream os;
            write_intervals_csv(os, approx);
            emit_text(opt.csv, "middle_thirds.csv", os.str());
        }
        if (!opt.out.empty()) emit_json(opt.out, "middle_thirds.json", to_json(approx));
        return;
    }
    if (opt.map_d) {
        auto d = map_D(opt.N, opt.k);
        emit_json(opt.out, "map_d.json", to_json(d));
        return;
    }
    CantorVariant variant;
    if (opt.variant == "ti")
        variant = CantorVariant::t_i;
    else if (opt.variant == "tf")
        variant = CantorVariant::t_f;
    else
        throw precondition_error("variant must be ti or tf");
    auto approx = cn_approx(opt.N, opt.k, variant, opt.labels);
    if (!opt.csv.empty()) {
        std::ostringstream os;
        write_intervals_csv(os, approx);
        emit_text(opt.csv, "cantor.csv", os.str());
    }
    emit_json(opt.out, "cantor.json", to_json(approx));
}

struct NumbersOptions {
    int cos_scan_max_den = -1;
    std::string doubling_x0;
    unsigned doubling_steps = 6;
    std::vector<std::string> spherical;  // cos_ab cos_ac beta
    std::vector<std::string> triple;     // three "cos:beta" points
    unsigned bits = 8;
    std::string out;
};

void run_numbers(const NumbersOptions& opt) {
    Json j;
    j["schema_version"] = kSchemaVersion;

    if (opt.cos_scan_max_den > 0) {
        Json hits = Json::array();
        unsigned long scanned = 0;
        for (unsigned long n = 1; n <= static_cast<unsigned long>(opt.cos_scan_max_den); ++n) {
            for (unsigned long m = (n == 1 ? 0 : 1); m <= (n == 1 ? 1 : n - 1); ++m) {
                if (std::gcd(m, n) != 1) continue;
                ++scanned;
                auto v = rational_cosine_full_range(m, n);
                if (v) {
                    Rational frac(m, n);
                    frac.canonicalize();
                    Json hit;
                    hit["angle_fraction"] = json_rational(frac);
                    hit["cosine"] = json_rational(*v);
                    hits.push_back(hit);
                }
            }
        }
        j["max_denominator"] = opt.cos_scan_max_den;
        j["scanned"] = scanned;
        j["rational_hits"] = hits;
        emit_json(opt.out, "cos_scan.json", j);
        return;
    }

    if (!opt.doubling_x0.empty()) {
        auto seq = doubling_sequence(parse_rational(opt.doubling_x0), opt.doubling_steps);
        Json vals = Json::array();
        for (const auto& v : seq) vals.push_back(json_rational(v));
        j["x0"] = opt.doubling_x0;
        j["sequence"] = vals;
        emit_json(opt.out, "doubling.json", j);
        return;
    }

    if (opt.spherical.size() == 3) {
        auto r = spherical_third_cosine(parse_rational(opt.spherical[0]),
                                        parse_rational(opt.spherical[1]),
                                        parse_rational(opt.spherical[2]), opt.bits);
        j["cos_ab"] = opt.spherical[0];
        j["cos_ac"] = opt.spherical[1];
        j["beta"] = opt.spherical[2];
        j["bits"] = opt.bits;
        j["result"] = to_json(r);
        emit_json(opt.out, "spherical.json", j);
        return;
    }

    if (opt.triple.size() == 3) {
        std::array<Rational, 3> cosines, betas;
        for (int i = 0; i < 3; ++i) {
            auto sep = opt.triple[i].find(':');
            if (sep == std::string::npos)
                throw precondition_error("triple points are written cos:beta");
            cosines[i] = parse_rational(opt.triple[i].substr(0, sep));
            betas[i] = parse_rational(opt.triple[i].substr(sep + 1));
        }
        auto t = triple_admissibility_cosines(cosines[0], betas[0], cosines[1], betas[1],
                                              cosines[2], betas[2], opt.bits);
        j["bits"] = opt.bits;
        j["result"] = to_json(t);
        emit_json(opt.out, "triple.json", j);
        return;
    }

    throw precondition_error("numbers needs one of --cos-scan, --doubling, --spherical, --triple");
}

struct BellOptions {
    std::string cos_ab, cos_ac, cos_bc;
    std::vector<std::string> chsh;
    std::vector<std::string> sg;
    std::string cauchy;
    unsigned bits = 8;
    std::string out;
};

void run_bell(const BellOptions& opt) {
    if (!opt.chsh.empty()) {
        if (opt.chsh.size() != 4)
            throw precondition_error("chsh needs four relative cosines");
        auto r = chsh_from_cosines(parse_rational(opt.chsh[0]), parse_rational(opt.chsh[1]),
                                   parse_rational(opt.chsh[2]), parse_rational(opt.chsh[3]),
                                   opt.bits);
        emit_json(opt.out, "chsh.json", to_json(r));
        return;
    }
    if (!opt.sg.empty()) {
        if (opt.sg.size() != 3)
            throw precondition_error("sg needs three stage cosines");
        auto r = sequential_sg(parse_rational(opt.sg[0]), parse_rational(opt.sg[1]),
                               parse_rational(opt.sg[2]), opt.bits);
        emit_json(opt.out, "sequential_sg.json", to_json(r));
        return;
    }
    if (!opt.cauchy.empty()) {
        std::vector<CauchyRow> rows;
        if (opt.cauchy == "sqrt2")
            rows = cauchy_divergence_demo(CauchyTarget::sqrt2, opt.bits);
        else if (opt.cauchy == "pi4")
            rows = cauchy_divergence_demo(CauchyTarget::pi_over_4, opt.bits);
        else
            rows = cauchy_divergence_demo_dyadic(parse_rational(opt.cauchy), opt.bits);
        emit_json(opt.out, "cauchy.json", to_json(rows));
        return;
    }
    if (opt.cos_ab.empty() || opt.cos_ac.empty() || opt.cos_bc.empty())
        throw precondition_error("bell needs --cos-ab, --cos-ac and --cos-bc");
    auto report = bell_experiment_from_cosines(parse_rational(opt.cos_ab),
                                               parse_rational(opt.cos_ac),
                                               parse_rational(opt.cos_bc), opt.bits);
    emit_json(opt.out, "bell.json", to_json(report));
}

struct LorenzOptions {
    double x = 1.0, y = 1.0, z = 1.0;
    double total_time = 20.0;
    double dt = 1e-3;
    double sigma = 10.0, r = 28.0, b = 8.0 / 3.0;
    bool word = false;
    bool upo = false;
    std::string upo_word;
    int max_word = 5;
    double search_time = 1500.0;
    bool contraction = false;
    bool lyapunov = false;
    bool ensemble = false;
    double radius = 1e-3;
    unsigned count = 32;
    std::string out;
    std::string csv;
};

void run_lorenz(const LorenzOptions& opt) {
    LorenzParams params{opt.sigma, opt.r, opt.b};
    LorenzState start{opt.x, opt.y, opt.z};

    if (!opt.upo_word.empty()) {
        UpoSearchBudget budget;
        budget.search_time = opt.search_time;
        budget.dt = opt.dt;
        auto rec = find_upo_by_word(opt.upo_word, params, budget);
        if (!rec)
            throw precondition_error("no orbit with the requested word was found; "
                                     "a longer --search-time may help");
        emit_json(opt.out, "upo_word.json", to_json(*rec));
        return;
    }
    if (opt.upo) {
        UpoSearchBudget budget;
        budget.search_time = opt.search_time;
        budget.dt = opt.dt;
        auto catalogue = find_upos(params, opt.max_word, budget);
        std::sort(catalogue.orbits.begin(), catalogue.orbits.end(),
                  [](const UpoRecord& a, const UpoRecord& b) {
                      if (a.normal_form.size() != b.normal_form.size())
                          return a.normal_form.size() < b.normal_form.size();
                      return a.normal_form < b.normal_form;
                  });
        emit_json(opt.out, "upo_catalogue.json", to_json(catalogue));
        return;
    }
    if (opt.contraction) {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["expected"] = json_double(divergence(params));
        j["measured"] = json_double(ellipsoid_contraction_check(params, opt.total_time > 0
                                                                            ? opt.total_time
                                                                            : 50.0));
        emit_json(opt.out, "contraction.json", j);
        return;
    }
    if (opt.lyapunov) {
        Json j;
        j["schema_version"] = kSchemaVersion;
        j["lyapunov_max"] = json_double(lyapunov_max(params, opt.total_time));
        emit_json(opt.out, "lyapunov.json", j);
        return;
    }
    if (opt.ensemble) {
        auto ring = make_ring(start, params, opt.radius, opt.count);
        auto res = evolve_ensemble(ring, params, opt.dt, opt.total_time);
        std::ostringstream os;
        write_ensemble_csv(os, ring, res);
        emit_text(opt.csv.empty() ? opt.out : opt.csv, "ensemble.csv", os.str());
        return;
    }
    if (opt.word) {
        Json j;
        j["schema_version"] = kSchemaVersion;
        std::string w = symbolic_word(start, params, opt.dt, opt.total_time);
        j["word"] = w;
        j["normal_form"] = cyclic_normal_form(w);
        j["matrix"] = to_json(word_to_matrix(w));
        emit_json(opt.out, "word.json", j);
        return;
    }
    auto traj = integrate(start, params, opt.dt, opt.total_time);
    std::ostringstream os;
    write_trajectory_csv(os, traj);
    emit_text(opt.csv.empty() ? opt.out : opt.csv, "trajectory.csv", os.str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"dyadlab: exact symbolic, fractal and dynamical constructions"};
    app.set_config("--config");

    std::string out_dir;
    if (const char* env = std::getenv("DYADLAB_OUT")) out_dir = env;
    app.add_option("--out-dir", out_dir, "directory for default-named outputs");

    unsigned seed = 0;
    app.add_option("--seed", seed,
                   "recorded for provenance; all experiments here are deterministic");

    AlgebraOptions alg;
    auto* algebra = app.add_subcommand("algebra", "operators, relations, strings, matrices");
    algebra->add_option("--size", alg.size, "string length (power of two)");
    algebra->add_flag("--basis", alg.basis, "emit the quaternion basis");
    algebra->add_flag("--verify", alg.verify, "check the generated relations");
    algebra->add_flag("--power", alg.power, "emit E_beta^alpha");
    algebra->add_option("--beta", alg.beta, "operator label beta");
    algebra->add_option("--alpha", alg.alpha, "operator exponent alpha");
    algebra->add_flag("--sqrt", alg.sqrt_of_unit, "canonical square root of the pairwise unit");
    algebra->add_flag("--matrix", alg.matrix, "include dense matrices");
    algebra->add_option("-o,--out", alg.out, "output path (default stdout)");

    CantorOptions can;
    auto* cantor = app.add_subcommand("cantor", "approximations, labels, map D, dimension");
    cantor->add_option("--N", can.N, "family parameter");
    cantor->add_option("--k", can.k, "iteration depth");
    cantor->add_option("--variant", can.variant, "ti or tf");
    cantor->add_option("--middle-thirds", can.middle_thirds_k, "middle-thirds depth");
    cantor->add_flag("--labels", can.labels, "attach polarities");
    cantor->add_flag("--map-d", can.map_d, "emit the t_i -> t_f bijection");
    cantor->add_option("--dimension", can.dimension_n, "similarity dimension at N");
    cantor->add_option("-o,--out", can.out, "JSON output path");
    cantor->add_option("--csv", can.csv, "CSV output path");

    NumbersOptions num;
    auto* numbers = app.add_subcommand("numbers", "cosine rationality and admissibility");
    numbers->add_option("--cos-scan", num.cos_scan_max_den, "scan denominators up to this bound");
    numbers->add_option("--doubling", num.doubling_x0, "iterate x -> x^2 - 2 from here");
    numbers->add_option("--steps", num.doubling_steps, "doubling steps");
    numbers->add_option("--spherical", num.spherical, "cos_ab cos_ac beta")->expected(3);
    numbers->add_option("--triple", num.triple, "three points as cos:beta")->expected(3);
    numbers->add_option("--bits", num.bits, "dyadic bit budget");
    numbers->add_option("-o,--out", num.out, "output path");

    BellOptions bell;
    auto* bellcmd = app.add_subcommand("bell", "correlation experiments and frequency tables");
    bellcmd->add_option("--cos-ab", bell.cos_ab, "first sub-experiment relative cosine");
    bellcmd->add_option("--cos-ac", bell.cos_ac, "second sub-experiment relative cosine");
    bellcmd->add_option("--cos-bc", bell.cos_bc, "third sub-experiment relative cosine");
    bellcmd->add_option("--chsh", bell.chsh, "four relative cosines")->expected(4);
    bellcmd->add_option("--sg", bell.sg, "three sequential stage cosines")->expected(3);
    bellcmd->add_option("--cauchy", bell.cauchy, "sqrt2, pi4, or a dyadic rational");
    bellcmd->add_option("--bits", bell.bits, "dyadic bit budget");
    bellcmd->add_option("-o,--out", bell.out, "output path");

    LorenzOptions lor;
    auto* lorenz = app.add_subcommand("lorenz", "integration, words, orbits, ensembles");
    lorenz->add_option("--x", lor.x, "initial x");
    lorenz->add_option("--y", lor.y, "initial y");
    lorenz->add_option("--z", lor.z, "initial z");
    lorenz->add_option("--T", lor.total_time, "integration time");
    lorenz->add_option("--dt", lor.dt, "step size");
    lorenz->add_option("--sigma", lor.sigma, "sigma");
    lorenz->add_option("--r", lor.r, "r");
    lorenz->add_option("--b", lor.b, "b");
    lorenz->add_flag("--word", lor.word, "emit the symbolic word of the trajectory");
    lorenz->add_flag("--upo", lor.upo, "search for unstable periodic orbits");
    lorenz->add_option("--upo-word", lor.upo_word, "find the orbit with this cyclic word");
    lorenz->add_option("--max-word", lor.max_word, "orbit word length bound");
    lorenz->add_option("--search-time", lor.search_time, "close-return search horizon");
    lorenz->add_flag("--contraction", lor.contraction, "measure the volume contraction rate");
    lorenz->add_flag("--lyapunov", lor.lyapunov, "estimate the largest Lyapunov exponent");
    lorenz->add_flag("--ensemble", lor.ensemble, "evolve a ring of states");
    lorenz->add_option("--radius", lor.radius, "ring radius");
    lorenz->add_option("--count", lor.count, "ring member count");
    lorenz->add_option("-o,--out", lor.out, "output path");
    lorenz->add_option("--csv", lor.csv, "CSV output path");

    app.require_subcommand(0, 1);

    try {
        app.parse(argc, argv);
        g_out_dir = out_dir;
        if (algebra->parsed())
            run_algebra(alg);
        else if (cantor->parsed())
            run_cantor(can);
        else if (numbers->parsed())
            run_numbers(num);
        else if (bellcmd->parsed())
            run_bell(bell);
        else if (lorenz->parsed())
            run_lorenz(lor);
        else {
            std::cout << app.help();
            return 0;
        }
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
        nlohmann::ordered_json err;
        err["error"] = "validation";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const dyadlab::precondition_error& e) {
        nlohmann::ordered_json err;
        err["error"] = "validation";
        err["precondition"] = e.what();
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const dyadlab::internal_error& e) {
        nlohmann::ordered_json err;
        err["error"] = "internal-consistency";
        err["message"] = e.what();
        std::cerr << err.dump() << "\n";
        return 2;
    }
    return 0;
}
