#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <random>

#include "hinfty/hinfty_lab.hpp"

using namespace hinf;

namespace {

Operator real_diagonal(std::initializer_list<double> values) {
    Vector d(static_cast<Eigen::Index>(values.size()));
    int i = 0;
    for (double v : values) d(i++) = v;
    return Operator::diagonal(d);
}

// ∫_0^∞ f(t) dt by adaptive quadrature.
double half_line_integral(const std::function<double(double)>& f) {
    boost::math::quadrature::exp_sinh<double> q;
    return q.integrate(f);
}

LabOptions quick_options() {
    LabOptions o;
    o.pack_size = 20;
    o.search_rounds = 6;
    o.sweep_angles = 3;
    o.budget = 4000;
    return o;
}

}  // namespace

TEST_CASE("report plumbing: checks, csv rows and json round trip") {
    SuiteReport r;
    r.suite = "demo";
    r.add_check("holds", 1.0, 2.0);
    r.add_check("within_tolerance", 2.0 + 1e-9, 2.0, 1e-8);
    CHECK(r.passed());
    r.add_check("fails", 3.0, 2.0);
    CHECK_FALSE(r.passed());
    CHECK(r.check("fails").margin == doctest::Approx(-1.0));
    r.add_check("nan_fails", std::nan(""), 1.0);
    CHECK_FALSE(r.check("nan_fails").pass);
    r.add_constant("c", 1.5, 0.1, "gaussian_mc");
    r.series["s"] = {{1.0, 2.0}, {3.0, 4.0}};

    const std::string csv = r.to_csv();
    CHECK(csv.rfind("suite,check,lhs,rhs,margin,pass\n", 0) == 0);
    CHECK(csv.find("demo,holds,1,2,1,true\n") != std::string::npos);
    CHECK(csv.find("demo,fails,3,2,-1,false\n") != std::string::npos);

    const SuiteReport back = SuiteReport::from_json(r.to_json());
    CHECK(back.to_csv() == csv);
    CHECK(back.constant("c") == 1.5);
    CHECK(back.series.at("s").size() == 2);
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0 / 3.0) == "0.333333333333333");
}

TEST_CASE("sector suite calibrates to one for a positive diagonal at angle pi") {
    const Operator a = real_diagonal({1.0, 4.0});
    const SuiteReport r = sector_equivalence_suite(a, SpaceSpec(2.0, 2), kPi, 2.0, quick_options());
    CHECK(r.constant("C3_upper") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.constant("C3_lower") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.constant("C2_dual_upper") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.constant("C4_hinfty") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.constant("C1_bip") == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.passed());
    CHECK(r.series.at("bip_constant_vs_angle").size() == 3);
}

TEST_CASE("sector square function on a ray matches the scalar integral") {
    const double omega = 2.0;
    const double lambda = 3.0;
    const double scalar = half_line_integral([&](double t) {
        return lambda / std::norm(std::polar(t, omega) - lambda);
    });
    const Operator a = real_diagonal({lambda, 0.2});
    const SuiteReport r = sector_equivalence_suite(a, SpaceSpec(2.0, 2), omega, 1.0, quick_options());
    // Both channels share the same scalar value by dilation invariance.
    CHECK(r.constant("C3_upper") == doctest::Approx(std::sqrt(scalar)).epsilon(1e-6));
    CHECK(r.constant("C3_lower") == doctest::Approx(1.0 / std::sqrt(scalar)).epsilon(1e-6));
    CHECK(r.check("dilation_upper").pass);
    CHECK(r.check("dilation_lower").pass);
    CHECK(r.check("lower_le_dual_upper").pass);
    CHECK(r.check("calculus_le_chain").pass);
}

TEST_CASE("scalar operator gives unit constants") {
    const Operator a = real_diagonal({2.5});
    const SuiteReport r = sector_equivalence_suite(a, SpaceSpec(2.0, 1), kPi, 1.0, quick_options());
    CHECK(r.constant("C3_two_sided") == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.constant("C4_hinfty") == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(hinfty_bound_estimate(a, DomainKind::sector, 1.0, SpaceSpec(3.0, 1), 30, 5).value ==
          doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("sector suite rejects inconsistent angles") {
    const Operator a(Matrix{{Scalar(1, 1), 0}, {0, 2}});
    const double spec = a.spectral_angle();
    CHECK_THROWS_AS(sector_equivalence_suite(a, SpaceSpec(2.0, 2), spec * 0.5, 2.0), AngleConflict);
    CHECK_THROWS_AS(sector_equivalence_suite(a, SpaceSpec(2.0, 2), 2.0, spec * 0.5), AngleConflict);
    CHECK_THROWS_AS(strip_group_suite(Operator(Matrix{{Scalar(0.5, 0)}}), SpaceSpec(2.0, 1), 0.3), AngleConflict);
}

TEST_CASE("calculus constant of a diagonal operator is one on every lp") {
    const Operator a = real_diagonal({0.3, 1.0, 2.0, 5.0, 7.0, 11.0, 20.0, 40.0});
    for (double p : {1.0, 1.5, 3.0, kInf}) {
        const BoundEstimate e = hinfty_bound_estimate(a, DomainKind::sector, 1.0, SpaceSpec(p, 8), 50, 3, 10);
        CHECK(e.value == doctest::Approx(1.0).epsilon(0.05));
        CHECK(e.method == EstimateMethod::randomized_search);
    }
}

TEST_CASE("calculus constant of a Jordan block matches the closed form") {
    const Operator jordan(Matrix{{1.0, 1.0}, {0.0, 1.0}});
    const double sigma = 0.5;
    const std::uint64_t seed = 11;
    // f(A) = f(1) I + f'(1) N with a central difference for f'(1).
    double expected = 1.0;
    std::vector<HFunction> members = sector_test_pack(40, sigma, seed);
    for (auto& f : conformal_stress_functions(sigma, 1.0, 1.0, 5)) members.push_back(f);
    for (const HFunction& f : members) {
        const double h = 1e-5;
        const Scalar d = (f(1.0 + h) - f(1.0 - h)) / (2.0 * h);
        Matrix value{{f(1.0), d}, {0.0, f(1.0)}};
        expected = std::max(expected, operator_norm(value, 2.0));
    }
    const BoundEstimate e = hinfty_bound_estimate(jordan, DomainKind::sector, sigma, SpaceSpec(2.0, 2), 40, seed, 0);
    CHECK(e.value == doctest::Approx(expected).epsilon(1e-6));
    // The unregularized conformal map vanishes at 1 with |f'(1)| = π/(4σ) ≈ 1.57.
    CHECK(e.value > 1.3);
    // The local search only moves upward.
    const BoundEstimate searched = hinfty_bound_estimate(jordan, DomainKind::sector, sigma, SpaceSpec(2.0, 2), 40, seed, 20);
    CHECK(searched.value >= e.value);
}

TEST_CASE("strip suite: imaginary diagonal generator") {
    const double a = 0.7;
    const Operator b = Operator::diagonal(Vector{{Scalar(0, 1), Scalar(0, -3)}});
    const SuiteReport r = strip_group_suite(b, SpaceSpec(2.0, 2), a, quick_options());
    // ∫ dy / (a² + (y − θ)²) = π/a per channel.
    boost::math::quadrature::tanh_sinh<double> q;
    const double per_channel = q.integrate([&](double y) { return 1.0 / (a * a + (y - 1.0) * (y - 1.0)); },
                                           -std::numeric_limits<double>::infinity(),
                                           std::numeric_limits<double>::infinity());
    CHECK(r.constant("resolvent_upper_right") == doctest::Approx(std::sqrt(per_channel)).epsilon(1e-6));
    CHECK(r.constant("resolvent_lower_left") == doctest::Approx(1.0 / std::sqrt(per_channel)).epsilon(1e-6));
    CHECK(r.constant("C_resolvent") == doctest::Approx(std::sqrt(per_channel)).epsilon(1e-6));
    // Diagonal: ‖f(B)‖ = max_j |f(iθ_j)| ≤ ‖f‖_∞.
    CHECK(r.constant("C_hinfty_strip") <= 1.0 + 1e-9);
    CHECK(r.check("strip_calculus_le_2aC2").pass);
    // ∫ e^{−2a|t|} dt = 1/a for a unitary group.
    CHECK(r.constant("group_decay_upper") == doctest::Approx(std::sqrt(1.0 / a)).epsilon(1e-4));
}

TEST_CASE("strip calculus of the zero generator is evaluation at zero") {
    const Operator zero(Matrix::Zero(1, 1));
    const double a = 0.5;
    double expected = 1.0;
    for (const HFunction& f : strip_test_pack(20, a, 4)) expected = std::max(expected, std::abs(f(0.0)));
    const BoundEstimate e = hinfty_bound_estimate(zero, DomainKind::strip, a, SpaceSpec(2.0, 1), 20, 4, 0);
    CHECK(e.value == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("square-function comparison: scalar ratio from one-dimensional integrals") {
    const HFunction psi = make_function("sqrt_resolvent");
    const HFunction phi = make_function("phi");
    const double num = half_line_integral([](double t) { return 1.0 / ((1 + t) * (1 + t)); });
    const double den = half_line_integral([](double t) { return t / std::pow(1 + t, 4); });
    const double oracle = std::sqrt(num / den);
    const Operator a = real_diagonal({1.0});
    const SuiteReport r = square_function_comparison(a, psi, phi, SpaceSpec(2.0, 1), quick_options());
    CHECK(r.constant("ratio_max") == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(r.constant("ratio_min") == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(r.passed());
}

TEST_CASE("square-function comparison of a function with itself is one") {
    const HFunction phi = make_function("phi");
    const Operator a(Matrix{{1.0, 0.5}, {0.0, 3.0}});
    for (double p : {2.0, 3.0}) {
        const SuiteReport r = square_function_comparison(a, phi, phi, SpaceSpec(p, 2), quick_options());
        CHECK(r.constant("ratio_max") == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.constant("ratio_min") == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(r.constant("predicted_upper") >= 1.0);
        CHECK(r.passed());
    }
}

TEST_CASE("g-function on the torus: exact Hilbert ratio and mean projection") {
    for (double beta : {1.0, 0.75}) {
        boost::math::quadrature::exp_sinh<double> q;
        const double oracle = std::sqrt(q.integrate([&](double x) { return std::pow(x, 2 * beta - 1) * std::exp(-2 * x); }));
        for (auto sg : {TorusSemigroup::heat, TorusSemigroup::poisson}) {
            const SuiteReport r = g_function_experiment(64, 2.0, beta, sg);
            CHECK(r.constant("upper") == doctest::Approx(oracle).epsilon(1e-6));
            CHECK(r.constant("lower") == doctest::Approx(1.0 / oracle).epsilon(1e-6));
            CHECK(r.check("constant_vector_annihilated").pass);
            CHECK(r.passed());
        }
    }
    CHECK_THROWS(g_function_experiment(48, 2.0, 1.0, TorusSemigroup::heat));
    CHECK_THROWS(g_function_experiment(64, 1.0, 1.0, TorusSemigroup::heat));
}

TEST_CASE("g-function sweep produces one series point per torus size") {
    LabOptions o;
    o.budget = 3000;
    const SuiteReport r = g_function_sweep({16, 32}, {3.0}, 1.0, TorusSemigroup::heat, o, 0.5);
    CHECK(r.series.at("upper_p3").size() == 2);
    CHECK(r.series.at("lower_p3").size() == 2);
    CHECK(r.check("stable_upper_p3").lhs >= 0.0);
    CHECK_NOTHROW(r.check("N16_p3_constant_vector_annihilated"));
}

TEST_CASE("log bridge on a positive diagonal") {
    const Operator a = real_diagonal({1.0, std::exp(2.0)});
    const SuiteReport r = log_bridge_suite(a, SpaceSpec(2.0, 2), 1.0, quick_options());
    CHECK(r.check("group_identity_t1").pass);
    CHECK(r.check("log_resolvent_z4i").pass);
    CHECK(r.check("half_power_t1").pass);
    CHECK(r.passed());
    // e^{−B} with B = −i log A is diag(1, e^{2i}).
    const Matrix gen = matrix_from_json(r.details.at("generator"));
    const Matrix expm_minus = group(Operator(gen), -1.0);
    CHECK(std::abs(expm_minus(0, 0) - Scalar(1.0)) < 1e-10);
    CHECK(std::abs(expm_minus(1, 1) - std::exp(Scalar(0, 2.0))) < 1e-8);
    // Scalar channel: ratio² = (π − a) a / (π sin a) by the two explicit integrals.
    const double s = 1.0;
    const double sector_sq = 2.0 * half_line_integral([&](double t) { return 1.0 / std::norm(std::polar(t, s) - 1.0); });
    boost::math::quadrature::tanh_sinh<double> q;
    const double strip_sq = 2.0 * q.integrate([&](double y) { return 1.0 / (s * s + y * y); },
                                              -std::numeric_limits<double>::infinity(),
                                              std::numeric_limits<double>::infinity());
    CHECK(r.constant("sector_over_strip_max") == doctest::Approx(std::sqrt(sector_sq / strip_sq)).epsilon(1e-6));
}

TEST_CASE("suites are deterministic for a fixed seed") {
    const Operator a(Matrix{{1.0, 0.3}, {0.0, 2.0}});
    LabOptions o = quick_options();
    o.seed = 9;
    const std::string first = sector_equivalence_suite(a, SpaceSpec(3.0, 2), 2.0, 1.5, o).to_csv();
    const std::string second = sector_equivalence_suite(a, SpaceSpec(3.0, 2), 2.0, 1.5, o).to_csv();
    CHECK(first == second);
}
