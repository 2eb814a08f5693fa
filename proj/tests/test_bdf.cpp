#include <softrod/bdf.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace softrod;

namespace {

// BDF coefficients from exact differentiation of the interpolating polynomial
// through t_i, t_{i-1}, ..., t_{i-k}: weight_j = L_j'(t_i).
std::vector<double> lagrange_derivative_weights(int order, double dt) {
    std::vector<double> nodes(order + 1);
    for (int j = 0; j <= order; ++j) nodes[j] = -j * dt;
    std::vector<double> w(order + 1, 0.0);
    for (int j = 0; j <= order; ++j) {
        double sum = 0.0;
        for (int m = 0; m <= order; ++m) {
            if (m == j) continue;
            double prod = 1.0 / (nodes[j] - nodes[m]);
            for (int l = 0; l <= order; ++l) {
                if (l == j || l == m) continue;
                prod *= (0.0 - nodes[l]) / (nodes[j] - nodes[l]);
            }
            sum += prod;
        }
        w[j] = sum;
    }
    return w;
}

} // namespace

TEST(Coefficients, ClosedForms) {
    const double dt = 1.0 / 30.0;
    const auto b1 = make_scheme(SchemeKind::bdf1, dt);
    EXPECT_DOUBLE_EQ(b1.c0, 1.0 / dt);
    EXPECT_DOUBLE_EQ(b1.c[0], -1.0 / dt);

    const auto b2 = make_scheme(SchemeKind::bdf2, dt);
    EXPECT_DOUBLE_EQ(b2.c0, 3.0 / (2.0 * dt));
    EXPECT_DOUBLE_EQ(b2.c[0], -2.0 / dt);
    EXPECT_DOUBLE_EQ(b2.c[1], 1.0 / (2.0 * dt));

    const auto b3 = make_scheme(SchemeKind::bdf3, dt);
    EXPECT_DOUBLE_EQ(b3.c0, 11.0 / (6.0 * dt));
    EXPECT_DOUBLE_EQ(b3.c[0], -3.0 / dt);
    EXPECT_DOUBLE_EQ(b3.c[1], 3.0 / (2.0 * dt));
    EXPECT_DOUBLE_EQ(b3.c[2], -1.0 / (3.0 * dt));

    const double a = -0.2;
    const auto ba = make_scheme(SchemeKind::bdf_alpha, dt, a);
    EXPECT_DOUBLE_EQ(ba.c0, (1.5 + a) / (dt * (1.0 + a)));
    EXPECT_DOUBLE_EQ(ba.c[0], -2.0 / dt);
    EXPECT_DOUBLE_EQ(ba.c[1], (0.5 + a) / (dt * (1.0 + a)));
    EXPECT_DOUBLE_EQ(ba.d1, a / (1.0 + a));
}

TEST(Coefficients, MatchInterpolatingPolynomial) {
    const double dt = 0.01;
    for (auto [kind, order] : {std::pair{SchemeKind::bdf1, 1}, {SchemeKind::bdf2, 2}, {SchemeKind::bdf3, 3}}) {
        const auto s = make_scheme(kind, dt);
        const auto w = lagrange_derivative_weights(order, dt);
        EXPECT_NEAR(s.c0, w[0], 1e-9 * std::abs(w[0]));
        for (int j = 1; j <= order; ++j) {
            EXPECT_NEAR(s.c[j - 1], w[j], 1e-9 * std::abs(w[j]));
        }
    }
}

TEST(Coefficients, PolynomialExactness) {
    // a scheme of order k differentiates polynomials of degree <= k exactly
    const double dt = 0.05;
    for (auto [kind, order] : {std::pair{SchemeKind::bdf1, 1}, {SchemeKind::bdf2, 2}, {SchemeKind::bdf3, 3}}) {
        const auto s = make_scheme(kind, dt);
        for (int deg = 0; deg <= order; ++deg) {
            auto y = [deg](double t) { return std::pow(1.0 + t, deg); };
            auto dy = [deg](double t) { return deg == 0 ? 0.0 : deg * std::pow(1.0 + t, deg - 1); };
            const double t = 0.7;
            std::vector<double> past;
            for (std::size_t k = 1; k <= s.depth(); ++k) past.push_back(y(t - k * dt));
            EXPECT_NEAR(bdf_time_derivative(s, y(t), past, static_cast<const double *>(nullptr)), dy(t), 1e-9)
                << to_string(kind) << " degree " << deg;
        }
    }
}

TEST(Coefficients, AlphaZeroEqualsBdf2OnRandomHistories) {
    std::mt19937 rng(42);
    std::normal_distribution<double> n(0.0, 1.0);
    const double dt = 1.0 / 30.0;
    const auto ba = make_scheme(SchemeKind::bdf_alpha, dt, 0.0);
    const auto b2 = make_scheme(SchemeKind::bdf2, dt);
    for (int k = 0; k < 1000; ++k) {
        const std::vector<double> past{n(rng), n(rng)};
        const double rate = n(rng);
        const double now = n(rng);
        const double a = bdf_time_derivative(ba, now, past, &rate);
        const double b = bdf_time_derivative(b2, now, past, &rate);
        EXPECT_LE(std::abs(a - b), 1e-14 * std::max(1.0, std::abs(b)));
    }
}

TEST(Coefficients, TrapezoidalIsAlphaMinusHalf) {
    const double dt = 0.02;
    const auto tr = make_scheme(SchemeKind::trapezoidal, dt);
    EXPECT_DOUBLE_EQ(tr.c0, 2.0 / dt);
    EXPECT_DOUBLE_EQ(tr.c[0], -2.0 / dt);
    EXPECT_DOUBLE_EQ(tr.c[1], 0.0);
    EXPECT_DOUBLE_EQ(tr.d1, -1.0);
    EXPECT_EQ(tr.kind, SchemeKind::trapezoidal);
}

TEST(Coefficients, ConsistencyOnConstants) {
    // y_t of a constant history vanishes
    for (auto kind : {SchemeKind::bdf1, SchemeKind::bdf2, SchemeKind::bdf3, SchemeKind::bdf_alpha,
                      SchemeKind::trapezoidal}) {
        const auto s = make_scheme(kind, 0.1, -0.3);
        std::vector<double> past(s.depth(), 2.5);
        const double rate = 0.0;
        EXPECT_NEAR(bdf_time_derivative(s, 2.5, past, &rate), 0.0, 1e-12) << to_string(kind);
    }
}

TEST(Coefficients, Validation) {
    EXPECT_THROW(make_scheme(SchemeKind::bdf1, 0.0), InvalidParameter);
    EXPECT_THROW(make_scheme(SchemeKind::bdf_alpha, 0.1, 0.1), InvalidParameter);
    EXPECT_THROW(make_scheme(SchemeKind::bdf_alpha, 0.1, -0.6), InvalidParameter);
}

TEST(History, InsufficientSamplesThrow) {
    const auto s = make_scheme(SchemeKind::bdf3, 0.1);
    const std::vector<double> past{1.0, 2.0};
    EXPECT_THROW(history_term(s, past, static_cast<const double *>(nullptr)), InsufficientHistory);
    const auto a = make_scheme(SchemeKind::bdf_alpha, 0.1, -0.2);
    EXPECT_THROW(history_term(a, past, static_cast<const double *>(nullptr)), InsufficientHistory);
}

TEST(History, ColdStartSteps) {
    EXPECT_EQ(make_scheme(SchemeKind::bdf1, 0.1).cold_start_steps(), 1);
    EXPECT_EQ(make_scheme(SchemeKind::bdf2, 0.1).cold_start_steps(), 1);
    EXPECT_EQ(make_scheme(SchemeKind::bdf3, 0.1).cold_start_steps(), 2);
}

TEST(History, BufferTermsAndRates) {
    RodState s0;
    s0.grid = {0.0, 1.0};
    s0.nodes.resize(2);
    s0.v.assign(2, Vec3(0, 0, 1));
    s0.u.assign(2, Vec3::Zero());
    HistoryBuffer buf(s0);
    const auto b1 = make_scheme(SchemeKind::bdf1, 0.5);
    const HistoryTerms t1 = buf.terms(b1);
    EXPECT_TRUE(t1.v[0].isApprox(Vec3(0, 0, -2.0)));

    RodState s1 = s0;
    s1.u.assign(2, Vec3(1.0, 0.0, 0.0));
    buf.push(s1, b1, t1);
    // rate = (u1 - u0) / dt
    EXPECT_TRUE(buf.latest_rates().u[1].isApprox(Vec3(2.0, 0.0, 0.0)));
    EXPECT_TRUE(buf.latest_rates().v[0].isZero(1e-15));
    EXPECT_EQ(buf.samples(), 2u);

    const auto b2 = make_scheme(SchemeKind::bdf2, 0.5);
    const HistoryTerms t2 = buf.terms(b2);
    EXPECT_TRUE(t2.u[0].isApprox(Vec3(-4.0, 0.0, 0.0)));
    for (int k = 0; k < 5; ++k) buf.push(s1, b2, t2);
    EXPECT_EQ(buf.samples(), HistoryBuffer::kMaxDepth);
}
