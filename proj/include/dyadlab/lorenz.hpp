#pragma once

#include "dyadlab/rational.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace dyadlab {

// ---------------------------------------------------------------------------
// The flow
// ---------------------------------------------------------------------------

struct LorenzParams {
    double sigma = 10.0;
    double r = 28.0;
    double b = 8.0 / 3.0;
};

inline void validate(const LorenzParams& p) {
    if (!(p.sigma > 0) || !(p.b > 0))
        throw precondition_error("sigma > 0 and b > 0 are required");
}

struct LorenzState {
    double x = 0, y = 0, z = 0;

    bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

inline LorenzState operator-(const LorenzState& a, const LorenzState& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
}

inline double norm(const LorenzState& s) { return std::sqrt(s.x * s.x + s.y * s.y + s.z * s.z); }

inline LorenzState rhs(const LorenzState& s, const LorenzParams& p) {
    return {-p.sigma * s.x + p.sigma * s.y, -s.x * s.z + p.r * s.x - s.y, s.x * s.y - p.b * s.z};
}

// volume contraction rate: div v = -(sigma + b + 1), state-independent
inline double divergence(const LorenzParams& p) { return -(p.sigma + p.b + 1.0); }

inline LorenzState rk4_step(const LorenzState& s, const LorenzParams& p, double dt) {
    auto add = [](const LorenzState& a, const LorenzState& v, double h) {
        return LorenzState{a.x + h * v.x, a.y + h * v.y, a.z + h * v.z};
    };
    LorenzState k1 = rhs(s, p);
    LorenzState k2 = rhs(add(s, k1, dt / 2), p);
    LorenzState k3 = rhs(add(s, k2, dt / 2), p);
    LorenzState k4 = rhs(add(s, k3, dt), p);
    return {s.x + dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
            s.y + dt / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
            s.z + dt / 6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z)};
}

struct Trajectory {
    double dt = 0;
    std::vector<LorenzState> states;  // states[k] at time k * dt

    double duration() const { return dt * (states.empty() ? 0 : states.size() - 1); }
};

inline Trajectory integrate(const LorenzState& start, const LorenzParams& p, double dt,
                            double total_time) {
    validate(p);
    if (!(dt > 0) || !(total_time > 0)) throw precondition_error("dt > 0 and T > 0 are required");
    size_t steps = static_cast<size_t>(std::ceil(total_time / dt));
    Trajectory traj;
    traj.dt = dt;
    traj.states.reserve(steps + 1);
    traj.states.push_back(start);
    LorenzState s = start;
    for (size_t k = 0; k < steps; ++k) {
        s = rk4_step(s, p, dt);
        if (!s.finite()) throw precondition_error("trajectory diverged to a non-finite state");
        traj.states.push_back(s);
    }
    return traj;
}

// ---------------------------------------------------------------------------
// Tangent-space evolution
// ---------------------------------------------------------------------------

using Mat3 = std::array<std::array<double, 3>, 3>;

inline Mat3 jacobian(const LorenzState& s, const LorenzParams& p) {
    return Mat3{{{-p.sigma, p.sigma, 0.0},
                 {p.r - s.z, -1.0, -s.x},
                 {s.y, s.x, -p.b}}};
}

namespace detail {

struct TangentFrame {
    LorenzState base;
    std::array<std::array<double, 3>, 3> v;  // v[i] is the i-th tangent column
};

inline std::array<double, 3> matvec(const Mat3& m, const std::array<double, 3>& x) {
    std::array<double, 3> out{};
    for (int i = 0; i < 3; ++i)
        out[i] = m[i][0] * x[0] + m[i][1] * x[1] + m[i][2] * x[2];
    return out;
}

// RK4 on the state together with up to three tangent columns.
inline void variational_step(LorenzState& s, std::array<std::array<double, 3>, 3>& v,
                             int columns, const LorenzParams& p, double dt) {
    auto add = [](const LorenzState& a, const LorenzState& d, double h) {
        return LorenzState{a.x + h * d.x, a.y + h * d.y, a.z + h * d.z};
    };
    LorenzState k1 = rhs(s, p);
    LorenzState s2 = add(s, k1, dt / 2);
    LorenzState k2 = rhs(s2, p);
    LorenzState s3 = add(s, k2, dt / 2);
    LorenzState k3 = rhs(s3, p);
    LorenzState s4 = add(s, k3, dt);
    LorenzState k4 = rhs(s4, p);

    Mat3 j1 = jacobian(s, p), j2 = jacobian(s2, p), j3 = jacobian(s3, p), j4 = jacobian(s4, p);
    for (int c = 0; c < columns; ++c) {
        auto& col = v[c];
        auto m1 = matvec(j1, col);
        std::array<double, 3> col2{col[0] + dt / 2 * m1[0], col[1] + dt / 2 * m1[1],
                                   col[2] + dt / 2 * m1[2]};
        auto m2 = matvec(j2, col2);
        std::array<double, 3> col3{col[0] + dt / 2 * m2[0], col[1] + dt / 2 * m2[1],
                                   col[2] + dt / 2 * m2[2]};
        auto m3 = matvec(j3, col3);
        std::array<double, 3> col4{col[0] + dt * m3[0], col[1] + dt * m3[1],
                                   col[2] + dt * m3[2]};
        auto m4 = matvec(j4, col4);
        for (int i = 0; i < 3; ++i)
            col[i] += dt / 6 * (m1[i] + 2 * m2[i] + 2 * m3[i] + m4[i]);
    }
    s = LorenzState{s.x + dt / 6 * (k1.x + 2 * k2.x + 2 * k3.x + k4.x),
                    s.y + dt / 6 * (k1.y + 2 * k2.y + 2 * k3.y + k4.y),
                    s.z + dt / 6 * (k1.z + 2 * k2.z + 2 * k3.z + k4.z)};
}

// Gram-Schmidt; returns the log of each pivot norm.
inline std::array<double, 3> orthonormalize(std::array<std::array<double, 3>, 3>& v,
                                            int columns) {
    std::array<double, 3> lognorms{};
    for (int c = 0; c < columns; ++c) {
        for (int prev = 0; prev < c; ++prev) {
            double dot = 0;
            for (int i = 0; i < 3; ++i) dot += v[c][i] * v[prev][i];
            for (int i = 0; i < 3; ++i) v[c][i] -= dot * v[prev][i];
        }
        double n = std::sqrt(v[c][0] * v[c][0] + v[c][1] * v[c][1] + v[c][2] * v[c][2]);
        lognorms[c] = std::log(n);
        for (int i = 0; i < 3; ++i) v[c][i] /= n;
    }
    return lognorms;
}

}  // namespace detail

// Largest Lyapunov exponent by tangent-vector renormalization.
inline double lyapunov_max(const LorenzParams& p, double total_time = 1000.0,
                           double renorm_interval = 1.0, double dt = 1e-3,
                           double transient = 30.0,
                           LorenzState start = {1.0, 1.0, 1.0}) {
    validate(p);
    LorenzState s = start;
    for (double t = 0; t < transient; t += dt) s = rk4_step(s, p, dt);

    std::array<std::array<double, 3>, 3> v{{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
    double sum_log = 0;
    double elapsed = 0;
    size_t renorm_steps = std::max<size_t>(1, static_cast<size_t>(renorm_interval / dt));
    size_t total_steps = static_cast<size_t>(total_time / dt);
    for (size_t k = 0; k < total_steps; ++k) {
        detail::variational_step(s, v, 1, p, dt);
        if ((k + 1) % renorm_steps == 0) {
            auto logs = detail::orthonormalize(v, 1);
            sum_log += logs[0];
            elapsed += renorm_interval;
        }
    }
    return sum_log / elapsed;
}

// Sum of all three exponents measured from the tangent parallelepiped's
// log-volume decay; equals div v exactly in theory.
inline double ellipsoid_contraction_check(const LorenzParams& p, double total_time = 50.0,
                                          double dt = 1e-3,
                                          std::array<std::array<double, 3>, 3> frame =
                                              {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}},
                                          LorenzState start = {1.0, 1.0, 1.0}) {
    validate(p);
    LorenzState s = start;
    for (double t = 0; t < 20.0; t += dt) s = rk4_step(s, p, dt);

    double sum_log_volume = 0;
    size_t renorm_steps = 200;
    size_t total_steps = static_cast<size_t>(total_time / dt);
    for (size_t k = 0; k < total_steps; ++k) {
        detail::variational_step(s, frame, 3, p, dt);
        if ((k + 1) % renorm_steps == 0) {
            auto logs = detail::orthonormalize(frame, 3);
            sum_log_volume += logs[0] + logs[1] + logs[2];
        }
    }
    double measured_time = dt * static_cast<double>(total_steps - total_steps % renorm_steps);
    return sum_log_volume / measured_time;
}

// ---------------------------------------------------------------------------
// The classifying section and symbolic words
// ---------------------------------------------------------------------------

struct SectionEvent {
    double t;
    LorenzState state;  // at a local maximum of Z
};

namespace detail {

inline double zdot(const LorenzState& s, const LorenzParams& p) { return s.x * s.y - p.b * s.z; }

// Walks the flow with fixed steps and emits refined Z-maximum events.
class SectionWalker {
public:
    SectionWalker(LorenzState start, const LorenzParams& p, double dt)
        : s_(start), p_(p), dt_(dt) {}

    const LorenzState& state() const { return s_; }
    double time() const { return t_; }

    // advance one step; returns an event if a Z-maximum was crossed
    std::optional<SectionEvent> step() {
        double zd0 = zdot(s_, p_);
        LorenzState next = rk4_step(s_, p_, dt_);
        if (!next.finite()) throw precondition_error("trajectory diverged to a non-finite state");
        double zd1 = zdot(next, p_);
        std::optional<SectionEvent> event;
        if (zd0 > 0 && zd1 <= 0) {
            // bisect the fractional step on the sign change of dZ/dt
            double lo = 0, hi = dt_;
            LorenzState at_lo = s_;
            for (int iter = 0; iter < 60 && (hi - lo) > 1e-14; ++iter) {
                double mid = (lo + hi) / 2;
                LorenzState sm = rk4_step(s_, p_, mid);
                if (zdot(sm, p_) > 0) {
                    lo = mid;
                    at_lo = sm;
                } else {
                    hi = mid;
                }
            }
            event = SectionEvent{t_ + lo, rk4_step(s_, p_, lo)};
        }
        s_ = next;
        t_ += dt_;
        return event;
    }

private:
    LorenzState s_;
    LorenzParams p_;
    double dt_;
    double t_ = 0;
};

}  // namespace detail

// One symbol per circuit: L when the Z-maximum happens at X < 0, R at X > 0.
// An exact zero inherits the previous symbol.
inline std::string symbolic_word_of_events(const std::vector<SectionEvent>& events) {
    std::string word;
    char prev = 'R';
    for (const auto& e : events) {
        char c = e.state.x < 0 ? 'L' : (e.state.x > 0 ? 'R' : prev);
        word += c;
        prev = c;
    }
    return word;
}

inline std::vector<SectionEvent> section_events(const LorenzState& start, const LorenzParams& p,
                                                double dt, double total_time) {
    validate(p);
    detail::SectionWalker walker(start, p, dt);
    std::vector<SectionEvent> events;
    size_t steps = static_cast<size_t>(std::ceil(total_time / dt));
    for (size_t k = 0; k < steps; ++k)
        if (auto e = walker.step()) events.push_back(*e);
    return events;
}

inline std::string symbolic_word(const LorenzState& start, const LorenzParams& p, double dt,
                                 double total_time) {
    auto events = section_events(start, p, dt, total_time);
    if (events.empty())
        throw precondition_error("empty word: the trajectory never crossed the section");
    return symbolic_word_of_events(events);
}

inline std::string symbolic_word(const Trajectory& traj, const LorenzParams& p) {
    if (traj.states.empty()) throw precondition_error("empty trajectory");
    return symbolic_word(traj.states.front(), p, traj.dt, traj.duration());
}

// Lexicographically least rotation; two words agree here iff they are
// rotations of each other.
inline std::string cyclic_normal_form(const std::string& w) {
    if (w.empty()) throw precondition_error("empty word");
    std::string best = w;
    std::string rotated = w;
    for (size_t k = 1; k < w.size(); ++k) {
        std::rotate(rotated.begin(), rotated.begin() + 1, rotated.end());
        if (rotated < best) best = rotated;
    }
    return best;
}

// ---------------------------------------------------------------------------
// Modular words
// ---------------------------------------------------------------------------

struct ModularMatrix {
    BigInt a = 1, b = 0, c = 0, d = 1;  // row major [[a, b], [c, d]]

    bool operator==(const ModularMatrix& o) const {
        return a == o.a && b == o.b && c == o.c && d == o.d;
    }

    BigInt det() const { return a * d - b * c; }
};

inline ModularMatrix operator*(const ModularMatrix& x, const ModularMatrix& y) {
    return {x.a * y.a + x.b * y.c, x.a * y.b + x.b * y.d, x.c * y.a + x.d * y.c,
            x.c * y.b + x.d * y.d};
}

inline ModularMatrix modular_L() { return {1, 1, 0, 1}; }
inline ModularMatrix modular_R() { return {1, 0, 1, 1}; }

inline ModularMatrix word_to_matrix(const std::string& word) {
    if (word.empty()) throw precondition_error("empty word");
    ModularMatrix m;
    for (char c : word) {
        if (c == 'L')
            m = m * modular_L();
        else if (c == 'R')
            m = m * modular_R();
        else
            throw precondition_error("words are over the alphabet {L, R}");
    }
    return m;
}

// ---------------------------------------------------------------------------
// Unstable periodic orbits
// ---------------------------------------------------------------------------

struct UpoRecord {
    std::string word;         // as traversed from the initial point
    std::string normal_form;  // cyclic normal form
    ModularMatrix matrix;     // of the normal form
    double period = 0;
    LorenzState initial;      // on the section (a Z-maximum)
    double closure_error = 0; // |state(period) - state(0)| after re-integration
};

struct UpoSearchBudget {
    double transient = 50.0;
    double search_time = 1500.0;
    double dt = 1e-3;
    double close_return_eps = 0.5;
    int max_refinements = 400;
    double newton_tol = 1e-10;
};

struct UpoCatalogue {
    std::vector<UpoRecord> orbits;
    bool budget_exhausted = false;
};

namespace detail {

// Integrates from a section point (x, y, xy/b) until `circuits` further
// Z-maxima; returns the arrival section point and flight time.
struct ReturnResult {
    LorenzState state;
    double time;
};

inline std::optional<ReturnResult> section_return(double x, double y, const LorenzParams& p,
                                                  int circuits, double dt,
                                                  double max_time = 100.0) {
    LorenzState start{x, y, x * y / p.b};
    SectionWalker walker(start, p, dt);
    // leave the section before arming event detection
    int remaining = circuits;
    size_t max_steps = static_cast<size_t>(max_time / dt);
    std::optional<SectionEvent> last;
    for (size_t k = 0; k < max_steps; ++k) {
        auto e = walker.step();
        if (e && walker.time() > 2 * dt) {
            last = e;
            if (--remaining == 0) return ReturnResult{e->state, e->t};
        }
    }
    return std::nullopt;
}

// Damped Newton on the 2-D section map residual F(u) - u. Returns the best
// point visited; the residual floor scales with the map's amplification
// (coordinate quantization alone contributes about 2e-15 times the circuit
// multiplier), so callers pick the acceptance threshold.
struct RefineOutcome {
    ReturnResult point;
    double residual;
};

inline std::optional<RefineOutcome> refine_upo(double x0, double y0, const LorenzParams& p,
                                               int circuits, double dt, double tol,
                                               int max_iter = 40) {
    double x = x0, y = y0;
    double last_norm = 1e30;
    std::optional<RefineOutcome> best;
    // keep finite-difference probes inside the linear regime: the k-circuit
    // map amplifies offsets by up to e^(1.2 k) on the least stable orbits
    double h_base = std::clamp(0.02 * std::exp(-1.2 * circuits), 1e-10, 1e-7);
    for (int iter = 0; iter < max_iter; ++iter) {
        auto f0 = section_return(x, y, p, circuits, dt);
        if (!f0) return best;
        double rx = f0->state.x - x, ry = f0->state.y - y;
        double rnorm = std::hypot(rx, ry);
        if (!best || rnorm < best->residual)
            best = RefineOutcome{{{x, y, x * y / p.b}, f0->time}, rnorm};
        if (rnorm < tol) return best;

        double h = h_base * std::max(1.0, std::max(std::abs(x), std::abs(y)));
        auto fx = section_return(x + h, y, p, circuits, dt);
        auto fy = section_return(x, y + h, p, circuits, dt);
        if (!fx || !fy) return best;
        // J of the residual
        double j11 = (fx->state.x - f0->state.x) / h - 1.0;
        double j21 = (fx->state.y - f0->state.y) / h;
        double j12 = (fy->state.x - f0->state.x) / h;
        double j22 = (fy->state.y - f0->state.y) / h - 1.0;
        double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-14) return best;
        double dx = (-rx * j22 + ry * j12) / det;
        double dy = (-ry * j11 + rx * j21) / det;

        double damping = 1.0;
        if (rnorm > last_norm) damping = 0.5;
        double step_cap = 2.0;
        double step = std::hypot(dx, dy);
        if (step > step_cap) damping *= step_cap / step;
        x += damping * dx;
        y += damping * dy;
        last_norm = rnorm;
    }
    return best;
}

}  // namespace detail

// Re-integrates a refined orbit for one period and reports the word and the
// closure error.
inline UpoRecord certify_upo(const LorenzState& section_point, double period,
                             const LorenzParams& p, double dt) {
    UpoRecord rec;
    rec.initial = section_point;
    rec.period = period;

    auto events = section_events(section_point, p, dt, period + dt);
    // drop any event essentially at the starting time, keep one circuit's worth
    std::vector<SectionEvent> circuit;
    for (const auto& e : events)
        if (e.t > 2 * dt && e.t <= period + 2 * dt) circuit.push_back(e);
    rec.word = symbolic_word_of_events(circuit);

    LorenzState s = section_point;
    double remaining = period;
    while (remaining > dt) {
        s = rk4_step(s, p, dt);
        remaining -= dt;
    }
    s = rk4_step(s, p, remaining);
    rec.closure_error = norm(s - section_point);
    rec.normal_form = cyclic_normal_form(rec.word);
    rec.matrix = word_to_matrix(rec.normal_form);
    return rec;
}

inline UpoCatalogue find_upos(const LorenzParams& p, int max_word_len,
                              const UpoSearchBudget& budget = {}) {
    validate(p);
    if (max_word_len < 1) throw precondition_error("max word length must be >= 1");
    UpoCatalogue catalogue;

    LorenzState s{1.0, 1.0, 1.0};
    for (double t = 0; t < budget.transient; t += budget.dt) s = rk4_step(s, p, budget.dt);

    auto events = section_events(s, p, budget.dt, budget.search_time);
    std::vector<std::string> seen_normal_forms;
    int refinements = 0;

    for (size_t i = 0; i + 1 < events.size(); ++i) {
        for (int k = 1; k <= max_word_len && i + static_cast<size_t>(k) < events.size(); ++k) {
            if (refinements >= budget.max_refinements) {
                catalogue.budget_exhausted = true;
                return catalogue;
            }
            const auto& e0 = events[i];
            const auto& e1 = events[i + static_cast<size_t>(k)];
            if (norm(e1.state - e0.state) > budget.close_return_eps) continue;

            ++refinements;
            auto refined = detail::refine_upo(e0.state.x, e0.state.y, p, k, budget.dt,
                                              budget.newton_tol);
            if (!refined || refined->residual > budget.newton_tol) continue;
            // an equilibrium masquerades as a periodic orbit through its
            // linearized spiral; reject stationary refinements
            if (norm(rhs(refined->point.state, p)) < 1e-3) continue;
            UpoRecord rec = certify_upo(refined->point.state, refined->point.time, p, budget.dt);
            if (static_cast<int>(rec.word.size()) != k) continue;
            if (rec.closure_error > 1e-6) continue;
            // a k-fold repeat of a shorter orbit has a repeating normal form
            bool duplicate = false;
            for (const auto& nf : seen_normal_forms)
                if (nf == rec.normal_form) duplicate = true;
            if (duplicate) continue;
            // reject repeats of shorter words (e.g. LRLR for LR)
            bool repeat = false;
            for (int d = 1; d < k; ++d) {
                if (k % d != 0) continue;
                std::string base = rec.normal_form.substr(0, d);
                std::string rebuilt;
                for (int rep = 0; rep < k / d; ++rep) rebuilt += base;
                if (rebuilt == rec.normal_form) repeat = true;
            }
            if (repeat) continue;
            seen_normal_forms.push_back(rec.normal_form);
            catalogue.orbits.push_back(rec);
        }
    }
    return catalogue;
}

// ---------------------------------------------------------------------------
// Word-targeted orbit search by multiple shooting
// ---------------------------------------------------------------------------

namespace detail {

// Dense solve by Gaussian elimination with partial pivoting.
inline bool solve_dense(std::vector<double>& a, std::vector<double>& rhs, size_t n) {
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        for (size_t row = col + 1; row < n; ++row)
            if (std::abs(a[row * n + col]) > std::abs(a[pivot * n + col])) pivot = row;
        if (std::abs(a[pivot * n + col]) < 1e-14) return false;
        if (pivot != col) {
            for (size_t k = 0; k < n; ++k) std::swap(a[col * n + k], a[pivot * n + k]);
            std::swap(rhs[col], rhs[pivot]);
        }
        for (size_t row = col + 1; row < n; ++row) {
            double f = a[row * n + col] / a[col * n + col];
            if (f == 0) continue;
            for (size_t k = col; k < n; ++k) a[row * n + k] -= f * a[col * n + k];
            rhs[row] -= f * rhs[col];
        }
    }
    for (size_t col = n; col-- > 0;) {
        double acc = rhs[col];
        for (size_t k = col + 1; k < n; ++k) acc -= a[col * n + k] * rhs[k];
        rhs[col] = acc / a[col * n + col];
    }
    return true;
}

}  // namespace detail

// Finds the orbit with a prescribed cyclic word by multiple shooting: one
// section point per symbol, each mapped a single circuit onto the next. The
// one-circuit map is only mildly expanding, so long words stay
// well-conditioned where a single long return map would not.
inline std::optional<UpoRecord> find_upo_by_word(const std::string& word, const LorenzParams& p,
                                                 const UpoSearchBudget& budget = {}) {
    validate(p);
    size_t n = word.size();
    if (n == 0) throw precondition_error("empty word");
    for (char c : word)
        if (c != 'L' && c != 'R') throw precondition_error("words are over the alphabet {L, R}");

    // sample the section and its symbol stream
    LorenzState s{1.0, 1.0, 1.0};
    for (double t = 0; t < budget.transient; t += budget.dt) s = rk4_step(s, p, budget.dt);
    auto events = section_events(s, p, budget.dt, budget.search_time);
    if (events.size() < n + 8) return std::nullopt;
    std::string stream = symbolic_word_of_events(events);

    // seed each shooting node from an event whose forward window matches the
    // word at that offset, degrading the window when no match exists
    std::vector<double> u(2 * n);
    for (size_t i = 0; i < n; ++i) {
        bool seeded = false;
        for (size_t window = std::min<size_t>(n, 6); window >= 1 && !seeded; --window) {
            std::string want;
            for (size_t k = 0; k < window; ++k) want += word[(i + k) % n];
            auto pos = stream.find(want);
            if (pos != std::string::npos && pos < events.size()) {
                u[2 * i] = events[pos].state.x;
                u[2 * i + 1] = events[pos].state.y;
                seeded = true;
            }
        }
        if (!seeded) return std::nullopt;
    }

    // Newton on the stacked residuals r_i = step(u_i) - u_{i+1}
    auto newton_pass = [&](double dt) -> std::optional<double> {
        for (int iter = 0; iter < 60; ++iter) {
            std::vector<double> fx(2 * n), residual(2 * n);
            std::vector<double> jac(4 * n * n, 0.0);
            double total_time = 0;
            double rmax = 0;
            for (size_t i = 0; i < n; ++i) {
                auto f0 = detail::section_return(u[2 * i], u[2 * i + 1], p, 1, dt);
                if (!f0) return std::nullopt;
                fx[2 * i] = f0->state.x;
                fx[2 * i + 1] = f0->state.y;
                total_time += f0->time;
                size_t next = (i + 1) % n;
                residual[2 * i] = f0->state.x - u[2 * next];
                residual[2 * i + 1] = f0->state.y - u[2 * next + 1];
                rmax = std::max({rmax, std::abs(residual[2 * i]),
                                 std::abs(residual[2 * i + 1])});
            }
            if (rmax < budget.newton_tol) return total_time;

            for (size_t i = 0; i < n; ++i) {
                double hx = 1e-7 * std::max(1.0, std::abs(u[2 * i]));
                double hy = 1e-7 * std::max(1.0, std::abs(u[2 * i + 1]));
                auto fdx = detail::section_return(u[2 * i] + hx, u[2 * i + 1], p, 1, dt);
                auto fdy = detail::section_return(u[2 * i], u[2 * i + 1] + hy, p, 1, dt);
                if (!fdx || !fdy) return std::nullopt;
                size_t next = (i + 1) % n;
                size_t r0 = 2 * i, c0 = 2 * i;
                size_t dim = 2 * n;
                jac[r0 * dim + c0] = (fdx->state.x - fx[2 * i]) / hx;
                jac[r0 * dim + c0 + 1] = (fdy->state.x - fx[2 * i]) / hy;
                jac[(r0 + 1) * dim + c0] = (fdx->state.y - fx[2 * i + 1]) / hx;
                jac[(r0 + 1) * dim + c0 + 1] = (fdy->state.y - fx[2 * i + 1]) / hy;
                jac[r0 * dim + 2 * next] -= 1.0;
                jac[(r0 + 1) * dim + 2 * next + 1] -= 1.0;
            }
            std::vector<double> delta = residual;
            if (!detail::solve_dense(jac, delta, 2 * n)) return std::nullopt;
            double step_norm = 0;
            for (double d : delta) step_norm = std::max(step_norm, std::abs(d));
            double damping = std::min(1.0, 2.0 / std::max(step_norm, 1e-12));
            for (size_t k = 0; k < 2 * n; ++k) u[k] -= damping * delta[k];
        }
        return std::nullopt;
    };

    auto coarse = newton_pass(budget.dt);
    if (!coarse) return std::nullopt;

    // polish on the full n-circuit return map: its residual is the actual
    // re-integration closure, so this is what pins the 1e-6 guarantee
    auto polished = detail::refine_upo(u[0], u[1], p, static_cast<int>(n), budget.dt,
                                       budget.newton_tol, 12);
    if (!polished || polished->residual > 1e-7) return std::nullopt;
    if (norm(rhs(polished->point.state, p)) < 1e-3) return std::nullopt;  // stationary
    UpoRecord rec = certify_upo(polished->point.state, polished->point.time, p, budget.dt);
    if (cyclic_normal_form(rec.word) != cyclic_normal_form(word)) return std::nullopt;
    if (rec.closure_error > 1e-6) return std::nullopt;
    return rec;
}

// ---------------------------------------------------------------------------
// Ensembles
// ---------------------------------------------------------------------------

struct EnsembleResult {
    std::vector<LorenzState> states;
    std::vector<uint8_t> diverged;  // per-member flag, others keep evolving
    size_t surviving = 0;
};

// Ring of uncertainty around a centre, laid in the plane transverse to the
// local flow direction.
inline std::vector<LorenzState> make_ring(const LorenzState& center, const LorenzParams& p,
                                          double radius, size_t count) {
    if (count == 0) throw precondition_error("ring must be nonempty");
    LorenzState v = rhs(center, p);
    double vn = norm(v);
    LorenzState flow = vn > 1e-12 ? LorenzState{v.x / vn, v.y / vn, v.z / vn}
                                  : LorenzState{0, 0, 1};
    // u1 orthogonal to flow
    LorenzState trial{1, 0, 0};
    if (std::abs(flow.x) > 0.9) trial = {0, 1, 0};
    double dot = trial.x * flow.x + trial.y * flow.y + trial.z * flow.z;
    LorenzState u1{trial.x - dot * flow.x, trial.y - dot * flow.y, trial.z - dot * flow.z};
    double n1 = norm(u1);
    u1 = {u1.x / n1, u1.y / n1, u1.z / n1};
    LorenzState u2{flow.y * u1.z - flow.z * u1.y, flow.z * u1.x - flow.x * u1.z,
                   flow.x * u1.y - flow.y * u1.x};

    std::vector<LorenzState> ring;
    ring.reserve(count);
    for (size_t j = 0; j < count; ++j) {
        double angle = 2.0 * M_PI * static_cast<double>(j) / static_cast<double>(count);
        double c = std::cos(angle), sgn = std::sin(angle);
        ring.push_back({center.x + radius * (c * u1.x + sgn * u2.x),
                        center.y + radius * (c * u1.y + sgn * u2.y),
                        center.z + radius * (c * u1.z + sgn * u2.z)});
    }
    return ring;
}

inline EnsembleResult evolve_ensemble(const std::vector<LorenzState>& ring,
                                      const LorenzParams& p, double dt, double total_time) {
    if (ring.empty()) throw precondition_error("ring must be nonempty");
    validate(p);
    EnsembleResult out;
    out.states.reserve(ring.size());
    out.diverged.assign(ring.size(), 0);
    for (size_t m = 0; m < ring.size(); ++m) {
        try {
            Trajectory t = integrate(ring[m], p, dt, total_time);
            out.states.push_back(t.states.back());
            ++out.surviving;
        } catch (const precondition_error&) {
            out.states.push_back(ring[m]);
            out.diverged[m] = 1;
        }
    }
    return out;
}

inline double max_pairwise_distance(const std::vector<LorenzState>& pts) {
    double best = 0;
    for (size_t i = 0; i < pts.size(); ++i)
        for (size_t j = i + 1; j < pts.size(); ++j) best = std::max(best, norm(pts[i] - pts[j]));
    return best;
}

}  // namespace dyadlab
