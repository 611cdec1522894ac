#include "fter/simulation.hpp"
#include "fter/steppers.hpp"

#include <doctest.h>

#include <limits>
#include <random>

using namespace fter;

namespace {

Config make_config(int n, int nf, double L, double tau, std::vector<double> gains) {
    Config cfg;
    cfg.n = n;
    cfg.nf = nf;
    cfg.L = L;
    cfg.tau = tau;
    cfg.lambdas = Eigen::Map<Eigen::VectorXd>(gains.data(), static_cast<Eigen::Index>(gains.size()));
    return cfg;
}

State random_state(const Config& cfg, std::mt19937_64& rng, double scale = 3.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    State s = State::zeros(cfg);
    for (Eigen::Index i = 0; i < s.w.size(); ++i) s.w[i] = d(rng);
    for (Eigen::Index i = 0; i < s.z.size(); ++i) s.z[i] = d(rng);
    return s;
}

double rel_diff(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff());
}

// Independent loop transcription of the reference scheme, row by row, no matrices.
State fterd_transcription(const Config& cfg, const State& s, double g) {
    const int nf = cfg.nf, n = cfg.n;
    const double tau = cfg.tau;
    const double w1 = s.w[0];
    State out = s;
    for (int i = 0; i < nf; ++i) {
        const double next = (i + 1 < nf) ? s.w[i + 1] : (s.z[0] - g);
        out.w[i] = s.w[i] + tau * next + tau * psi(i, cfg, w1);
    }
    for (int j = 0; j <= n; ++j) {
        double acc = 0;
        double coeff = 1;
        for (int l = j; l <= n; ++l) {
            acc += coeff * s.z[l];
            coeff *= tau / (l - j + 1);
        }
        out.z[j] = acc + tau * psi(nf + j, cfg, w1);
    }
    return out;
}

}  // namespace

TEST_CASE("method names round-trip") {
    for (Method m : kAllMethods) CHECK(parse_method(to_string(m)) == m);
    CHECK(parse_method("fter_i") == Method::FterI);
    CHECK(parse_method("d") == Method::FterD);
    CHECK_THROWS_AS(parse_method("rk4"), ContractError);
}

TEST_CASE("equilibrium is preserved by every stepper") {
    const Config cfg = preset_config(25, 0.1);
    const auto mats = StepMatrices::build(cfg);
    State s = State::zeros(cfg);
    s.z[0] = 4.2;
    const StepInput in{4.2, 0, 0.0};
    for (Method m : kAllMethods) {
        const State next = step_with(m, cfg, mats, s, in);
        CHECK(next.w.isZero(0));
        CHECK(next.z == s.z);
        CHECK(next.xi == 0.0);
    }
}

TEST_CASE("reference scheme hand trace") {
    const Config cfg = make_config(1, 1, 1.0, 0.1, {1.0, 1.0, 1.0});
    const auto mats = StepMatrices::build(cfg);
    State s = State::zeros(cfg);
    s.z << 1.0, 0.0;
    const State next = fterd_step(cfg, mats, s, StepInput{0.0, 0, 0.0});
    CHECK(next.w[0] == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(next.z[0] == 1.0);
    CHECK(next.z[1] == 0.0);
}

TEST_CASE("reference scheme matches a loop transcription") {
    const Config cfg = preset_config(25, 0.1);
    const auto mats = StepMatrices::build(cfg);
    const SignalModel sig = scenario_signal(1);

    // Scenario I from the zero state
    State a = State::zeros(cfg), b = State::zeros(cfg);
    for (long k = 0; k < 40; ++k) {
        const StepInput in = sample(sig, cfg, k);
        a = fterd_step(cfg, mats, a, in);
        b = fterd_transcription(cfg, b, in.g);
        if (k == 0) CHECK(rel_diff(a.stacked(), b.stacked()) <= 1e-15);
        CHECK(rel_diff(a.stacked(), b.stacked()) <= 1e-13);
    }

    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 100; ++trial) {
        const State s = random_state(cfg, rng);
        const double g = std::uniform_real_distribution<double>(-2, 2)(rng);
        const State x = fterd_step(cfg, mats, s, StepInput{g, 0, 0.0});
        const State y = fterd_transcription(cfg, s, g);
        CHECK(rel_diff(x.stacked(), y.stacked()) <= 1e-14);
    }
}

TEST_CASE("exact explicit scheme differs from the reference through its matrices only") {
    const Config cfg = preset_config(25, 0.1);
    const auto mats = StepMatrices::build(cfg);
    const int nf = cfg.nf;
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 100; ++trial) {
        const State s = random_state(cfg, rng);
        const double g = std::uniform_real_distribution<double>(-2, 2)(rng);
        const StepInput in{g, 0, 0.0};
        const Eigen::VectorXd d = fterd_step(cfg, mats, s, in).stacked();
        const Eigen::VectorXd e = ftere_step(cfg, mats, s, in).stacked();

        const Eigen::VectorXd u = injection_vector(cfg, s.w[0]);
        Eigen::VectorXd tau_enf = Eigen::VectorXd::Zero(cfg.dim());
        tau_enf[nf - 1] = cfg.tau;
        Eigen::VectorXd expect(cfg.dim());
        expect.head(nf) = (mats.c - mats.phi_w) * s.w + (mats.d - mats.g) * s.z;
        expect.tail(cfg.n + 1).setZero();
        expect += -(tau_enf - mats.h) * g + (cfg.tau * Eigen::MatrixXd::Identity(cfg.dim(), cfg.dim()) -
                                               Eigen::MatrixXd(mats.b_star)) * u;
        CHECK(rel_diff(d - e, expect) <= 1e-14);
    }
}

TEST_CASE("Taylor propagation is exact for polynomial trajectories") {
    const Config cfg = preset_config(25, 0.3);
    const auto mats = StepMatrices::build(cfg);
    // p(t) = 2 - t + 0.5 t^2 + 0.25 t^3
    auto deriv = [](double t, int i) {
        switch (i) {
            case 0: return 2 - t + 0.5 * t * t + 0.25 * t * t * t;
            case 1: return -1 + t + 0.75 * t * t;
            case 2: return 1 + 1.5 * t;
            case 3: return 1.5;
            default: return 0.0;
        }
    };
    const double t0 = 1.3;
    State s = State::zeros(cfg);
    for (int i = 0; i <= 3; ++i) s.z[i] = deriv(t0, i);
    for (Method m : {Method::FterE, Method::FterExactFull}) {
        const State next = step_with(m, cfg, mats, s, StepInput{0.0, 0, t0});
        for (int i = 0; i <= 3; ++i) CHECK(next.z[i] == doctest::Approx(deriv(t0 + cfg.tau, i)).epsilon(1e-14));
    }
}

TEST_CASE("full exact scheme minus exact explicit scheme is the E defect") {
    const Config cfg = preset_config(98, 0.4);
    const auto mats = StepMatrices::build(cfg);
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const State s = random_state(cfg, rng, 10.0);
        const StepInput in{std::uniform_real_distribution<double>(-5, 5)(rng), 0, 0.0};
        const Eigen::VectorXd full = fter_exact_full_step(cfg, mats, s, in).stacked();
        const Eigen::VectorXd expl = ftere_step(cfg, mats, s, in).stacked();
        Eigen::VectorXd defect = Eigen::VectorXd::Zero(cfg.dim());
        defect.head(cfg.nf) = mats.e * s.z;
        CHECK((full - expl - defect).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, full.cwiseAbs().maxCoeff()));
    }

    State s = random_state(cfg, rng);
    s.z.setZero();
    const StepInput in{0.7, 0, 0.0};
    CHECK(fter_exact_full_step(cfg, mats, s, in).stacked() == ftere_step(cfg, mats, s, in).stacked());
}

TEST_CASE("implicit step solves its own w1 row") {
    const Config cfg = preset_config(25, 0.1);
    const auto mats = StepMatrices::build(cfg);
    const Eigen::VectorXd a = implicit_coefficients(cfg);
    Stepper stepper(cfg, Method::FterI);
    std::mt19937_64 rng(41);
    int dead = 0, outside = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const double scale = trial % 3 == 0 ? 1e-12 : (trial % 3 == 1 ? 1e-3 : 5.0);
        const State s = random_state(cfg, rng, scale);
        const double g = std::uniform_real_distribution<double>(-scale, scale)(rng);
        const double propagated = stepper.w1_propagation(s.stacked(), g);
        CaseOutcome out;
        const State next = fteri_step(cfg, mats, s, StepInput{g, 0, 0.0}, &out);
        const double b = -propagated;
        CHECK(next.w[0] == out.omega_next);
        CHECK(next.xi == out.xi_next);
        CHECK(std::abs(implicit_residual(a, b, next.w[0], next.xi)) <= 1e-9 * std::max(1.0, std::abs(b)));
        if (next.w[0] != 0) {
            CHECK(next.xi == sign(next.w[0]));
            ++outside;
        } else {
            CHECK(std::abs(next.xi) <= 1.0);
            ++dead;
        }
    }
    CHECK(dead > 0);
    CHECK(outside > 0);
}

TEST_CASE("printed b_k orientation disagrees in the innovation sign") {
    const Config cfg = preset_config(25, 0.1);
    Stepper stepper(cfg, Method::FterI);
    State s = State::zeros(cfg);
    s.w << 0.3, -0.2;
    s.z << 1.5, 0.1, 0.0, 0.0;
    const double g = 1.0;
    const double tau = cfg.tau;
    const double wsum = s.w[0] + tau * s.w[1];
    const double h0 = tau * tau / 2;
    const double printed = h0 * (s.z[0] - g) - wsum;
    const double used = -stepper.w1_propagation(s.stacked(), g);
    CHECK(used == doctest::Approx(-h0 * (s.z[0] - g) - wsum).epsilon(1e-15));
    CHECK(used != doctest::Approx(printed));
    // the two agree only when the innovation vanishes
    s.z[0] = g;
    CHECK(-stepper.w1_propagation(s.stacked(), g) == doctest::Approx(h0 * (s.z[0] - g) - wsum));
}

TEST_CASE("implicit and explicit steps agree to second order in tau") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        State s = random_state(preset_config(25, 1e-3), rng, 2.0);
        if (std::abs(s.w[0]) < 0.1) s.w[0] = s.w[0] < 0 ? -0.1 - s.w[0] : 0.1 + s.w[0];
        const double g = 0.3;
        std::vector<double> lt, ld;
        for (double tau : {1e-3, 1e-4, 1e-5}) {
            const Config cfg = preset_config(25, tau);
            const auto mats = StepMatrices::build(cfg);
            const Eigen::VectorXd diff = fteri_step(cfg, mats, s, StepInput{g, 0, 0.0}).stacked() -
                                         ftere_step(cfg, mats, s, StepInput{g, 0, 0.0}).stacked();
            lt.push_back(std::log(tau));
            ld.push_back(std::log(diff.norm()));
        }
        const double mt = (lt[0] + lt[1] + lt[2]) / 3, md = (ld[0] + ld[1] + ld[2]) / 3;
        double num = 0, den = 0;
        for (int i = 0; i < 3; ++i) {
            num += (lt[i] - mt) * (ld[i] - md);
            den += (lt[i] - mt) * (lt[i] - mt);
        }
        CHECK(num / den >= 1.5);
    }
}

TEST_CASE("steppers are deterministic") {
    const Config cfg = preset_config(98, 0.05);
    const auto mats = StepMatrices::build(cfg);
    std::mt19937_64 rng(61);
    const State s = random_state(cfg, rng);
    for (Method m : kAllMethods) {
        const State a = step_with(m, cfg, mats, s, StepInput{0.4, 3, 0.15});
        const State b = step_with(m, cfg, mats, s, StepInput{0.4, 3, 0.15});
        CHECK(a.stacked() == b.stacked());
        CHECK(a.xi == b.xi);
    }
}

TEST_CASE("step errors") {
    const Config cfg = preset_config(25, 0.1);
    const auto mats = StepMatrices::build(cfg);
    State wrong;
    wrong.w = Eigen::VectorXd::Zero(1);
    wrong.z = Eigen::VectorXd::Zero(4);
    CHECK_THROWS_AS(ftere_step(cfg, mats, wrong, StepInput{}), ContractError);

    State huge = State::zeros(cfg);
    huge.z.setConstant(std::numeric_limits<double>::max());
    try {
        fterd_step(cfg, mats, huge, StepInput{0.0, 12, 1.2});
        FAIL("expected a numerical error");
    } catch (const NumericalError& err) {
        CHECK(err.step() == 12);
    }

    Config other = cfg;
    other.tau = 0.2;
    CHECK_THROWS_AS(Stepper(other, Method::FterE, mats, implicit_coefficients(other)), ContractError);
}

TEST_CASE("run records the initial state only for t_end = 0") {
    const Config cfg = preset_config(25, 0.1);
    const ErrorTrace tr = run(cfg, Method::FterI, scenario_signal(1), 0.0);
    CHECK(tr.size() == 1);
    CHECK(tr.z.rows() == 1);
    CHECK(tr.z.row(0).isZero(0));
    CHECK(step_count(25.0, 0.1) == 250);
}

TEST_CASE("constant signal: zero-error start is a fixed point of every scheme") {
    const Config cfg = preset_config(1.0, 0.1);
    SignalModel constant;
    constant.base.poly = {5.0};
    State s0 = State::zeros(cfg);
    s0.z[0] = 5.0;
    for (Method m : kAllMethods) {
        const ErrorTrace tr = run(cfg, m, constant, 50.0, s0);
        CHECK(tr.sigma.isZero(0));
    }
}

TEST_CASE("constant signal from a cold start: implicit residual error is below the reference scheme's") {
    // The terminal 1e-10 bound is checked by the acceptance suite.
    const Config cfg = preset_config(1.0, 0.1);
    SignalModel constant;
    constant.base.poly = {5.0};
    auto tail = [&](Method m) {
        const ErrorTrace tr = run(cfg, m, constant, 50.0);
        double peak = 0;
        for (Eigen::Index k = tr.sigma.rows() - 100; k < tr.sigma.rows(); ++k)
            peak = std::max(peak, std::abs(tr.sigma(k, 0)));
        return peak;
    };
    CHECK(tail(Method::FterI) < 0.1 * tail(Method::FterD));
}

TEST_CASE("run errors carry the failing step") {
    Config cfg = preset_config(1e12, 1.0);
    SignalModel wild;
    wild.base.poly = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1e300};
    try {
        run(cfg, Method::FterD, wild, 50.0);
        FAIL("expected divergence");
    } catch (const NumericalError& err) {
        CHECK(err.step() >= 0);
    }
}
