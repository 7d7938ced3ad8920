#include <doctest.h>

#include <unsupported/Eigen/MatrixFunctions>
#include <random>

#include "hinfty/banach_geometry.hpp"
#include "hinfty/operator_core.hpp"

using namespace hinf;

namespace {

Matrix random_matrix(int n, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) m(i, j) = Scalar(nd(rng), nd(rng));
    return m;
}

Matrix random_unitary(int n, std::mt19937_64& rng) {
    Eigen::HouseholderQR<Matrix> qr(random_matrix(n, rng));
    return qr.householderQ();
}

// Normal matrix with spectrum inside the sector |arg| ≤ angle.
Matrix random_normal_sectorial(int n, double angle, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ud(-1.0, 1.0);
    Vector d(n);
    for (int k = 0; k < n; ++k) d(k) = std::polar(std::pow(10.0, 2.0 * ud(rng)), angle * ud(rng));
    Matrix u = random_unitary(n, rng);
    return u * d.asDiagonal() * u.adjoint();
}

}  // namespace

TEST_CASE("resolvent of a diagonal matrix at zero") {
    Operator a = Operator::diagonal(Vector::LinSpaced(2, 1.0, 2.0));
    Matrix r = resolvent(a, 0.0);
    Matrix expected = Matrix::Zero(2, 2);
    expected(0, 0) = -1.0;
    expected(1, 1) = -0.5;
    CHECK((r - expected).norm() < 1e-14);
}

TEST_CASE("scalar resolvent") {
    Operator a(Matrix::Constant(1, 1, 1.0));
    CHECK(std::abs(resolvent(a, 2.0)(0, 0) - 1.0) < 1e-15);
}

TEST_CASE("resolvent of a Jordan block matches the direct inverse") {
    Matrix j(2, 2);
    j << 1.0, 1.0, 0.0, 1.0;
    Operator a(j);
    Matrix expected = (-j).inverse();
    CHECK((resolvent(a, 0.0) - expected).norm() < 1e-14);
    CHECK_FALSE(a.is_normal());
    CHECK_FALSE(a.eig().has_value());
}

TEST_CASE("resolvent near an eigenvalue raises SpectrumHit") {
    Operator a = Operator::diagonal(Vector::LinSpaced(2, 1.0, 2.0));
    CHECK_THROWS_AS(resolvent(a, 1.0), SpectrumHit);
    CHECK_THROWS_AS(resolvent(a, Scalar(2.0, 1e-15)), SpectrumHit);
}

TEST_CASE("non-finite entries are rejected") {
    Matrix m = Matrix::Identity(2, 2);
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS(Operator(m));
}

TEST_CASE("resolvent identity on random points") {
    std::mt19937_64 rng(11);
    Operator a(random_matrix(6, rng));
    std::normal_distribution<double> nd(0.0, 3.0);
    for (int trial = 0; trial < 20; ++trial) {
        Scalar l(nd(rng), nd(rng)), m(nd(rng), nd(rng));
        Matrix rl = resolvent(a, l), rm = resolvent(a, m);
        Matrix lhs = rl - rm;
        Matrix rhs = (m - l) * rl * rm;
        CHECK((lhs - rhs).norm() <= 1e-9 * std::max(1.0, lhs.norm()));
    }
}

TEST_CASE("square-root factorization between two rays") {
    std::mt19937_64 rng(5);
    Operator a(random_normal_sectorial(5, 0.6, rng));
    Matrix root = a.matrix().sqrt();
    const double omega = 1.2, nu = -2.0;
    for (double t : {0.01, 1.0, 30.0}) {
        Scalar lw = std::polar(t, omega), ln = std::polar(t, nu);
        Matrix lhs = root * resolvent(a, lw);
        Matrix fac = Matrix::Identity(5, 5) + (std::polar(1.0, nu) - std::polar(1.0, omega)) * t * resolvent(a, lw);
        Matrix rhs = fac * root * resolvent(a, ln);
        CHECK((lhs - rhs).norm() <= 1e-9 * lhs.norm());
    }
}

TEST_CASE("sector profile of a positive diagonal matrix") {
    Operator a = Operator::diagonal(Vector::LinSpaced(2, 1.0, 2.0));
    SectorProfileOptions opts;
    opts.with_r_bounds = false;
    SectorProfile prof = sector_profile(a, {kPi / 2}, 1, SpaceSpec(2, 2), opts);
    CHECK(prof.omega_spec == doctest::Approx(0.0));
    // oracle: sup_t t / sqrt(t² + a²) → 1
    CHECK(prof.sup_bound.at(kPi / 2) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("spectral angle of a rotated scalar") {
    Operator a = Operator::diagonal(Vector::Constant(1, std::polar(1.0, kPi / 4)));
    CHECK(a.spectral_angle() == doctest::Approx(kPi / 4).epsilon(1e-15));
}

TEST_CASE("R-bound on the negative axis equals the uniform bound on l2") {
    Operator a = Operator::diagonal(Vector::LinSpaced(2, 1.0, 4.0));
    SectorProfile prof = sector_profile(a, {kPi}, 1, SpaceSpec(2, 2));
    CHECK(prof.r_bound.at(kPi) == doctest::Approx(prof.sup_bound.at(kPi)).epsilon(1e-12));
}

TEST_CASE("sector profile is nonincreasing in the angle") {
    std::mt19937_64 rng(3);
    Operator a(random_matrix(4, rng) + 8.0 * Matrix::Identity(4, 4));
    SectorProfileOptions opts;
    opts.with_r_bounds = false;
    std::vector<double> angles{1.0, 1.4, 2.0, 2.6, 3.1};
    SectorProfile prof = sector_profile(a, angles, 3, SpaceSpec(2, 4), opts);
    double prev = kInf;
    for (auto [angle, m] : prof.sup_bound) {
        (void)angle;
        CHECK(m <= prev);
        prev = m;
    }
}

TEST_CASE("sampled sector bound agrees with 1-D maximization for normal matrices") {
    std::mt19937_64 rng(17);
    Matrix m = random_normal_sectorial(5, 0.5, rng);
    Operator a(m);
    Eigen::ComplexEigenSolver<Matrix> es(m);
    const double sigma = 1.0;
    SectorProfileOptions opts;
    opts.with_r_bounds = false;
    SectorProfile prof = sector_profile(a, {sigma}, 1, SpaceSpec(2, 5), opts);

    // Independent oracle: golden-section search of |λ| / dist(λ, σ(A)) on both rays.
    auto ratio = [&](double u, double angle) {
        Scalar l = std::polar(std::exp(u), angle);
        double d = kInf;
        for (Scalar e : es.eigenvalues()) d = std::min(d, std::abs(l - e));
        return std::abs(l) / d;
    };
    double oracle = 0.0;
    for (double angle : {sigma, -sigma}) {
        double best_u = 0.0, best = 0.0;
        for (double u = -25.0; u <= 25.0; u += 0.01)
            if (ratio(u, angle) > best) best = ratio(u, angle), best_u = u;
        double lo = best_u - 0.01, hi = best_u + 0.01;
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        for (int it = 0; it < 100; ++it) {
            double c = hi - g * (hi - lo), d = lo + g * (hi - lo);
            if (ratio(c, angle) > ratio(d, angle))
                hi = d;
            else
                lo = c;
        }
        oracle = std::max(oracle, ratio(0.5 * (lo + hi), angle));
    }
    CHECK(prof.sup_bound.at(sigma) == doctest::Approx(oracle).epsilon(0.05));
}

TEST_CASE("eigenvalue on the negative axis is not sectorial") {
    Operator a = Operator::diagonal(Vector::Constant(1, -1.0));
    CHECK_THROWS_AS(sector_profile(a, {kPi / 2}, 1, SpaceSpec(2, 1)), NotSectorial);
    Operator z = Operator::diagonal(Vector::LinSpaced(2, 0.0, 1.0));
    CHECK_THROWS_AS(sector_profile(z, {kPi / 2}, 1, SpaceSpec(2, 2)), NotSectorial);
}

TEST_CASE("strip profile examples") {
    Vector d(2);
    d << Scalar(0, 1), Scalar(0, -3);
    Operator b = Operator::diagonal(d);
    StripProfile prof = strip_profile(b, {0.5, 1.0, 2.0});
    CHECK(prof.w_spec == doctest::Approx(0.0));
    CHECK(prof.resolvent_bound.at(1.0) <= 1.0 + 1e-12);
    CHECK(prof.resolvent_bound.at(0.5) >= prof.resolvent_bound.at(1.0));
    CHECK(prof.resolvent_bound.at(1.0) >= prof.resolvent_bound.at(2.0));

    Operator c = Operator::diagonal(Vector::Constant(1, Scalar(0.5, 1.0)));
    CHECK(strip_profile(c, {}).w_spec == doctest::Approx(0.5));
}

TEST_CASE("operator norms on lp") {
    Matrix t(2, 2);
    t << 1.0, -2.0, 3.0, Scalar(0.0, 4.0);
    CHECK(operator_norm(t, 1.0) == doctest::Approx(6.0));
    CHECK(operator_norm(t, kInf) == doctest::Approx(7.0));
    CHECK(operator_norm(t, 2.0) == doctest::Approx(t.jacobiSvd().singularValues()(0)));
    Vector d(3);
    d << 0.5, Scalar(0.0, -2.0), 1.0;
    CHECK(operator_norm(d.asDiagonal().toDenseMatrix(), 3.0) == doctest::Approx(2.0).epsilon(1e-12));
    // Riesz–Thorin: the 3-norm sits below the interpolated bound.
    const double n3 = operator_norm(t, 3.0);
    CHECK(n3 <= std::pow(operator_norm(t, 2.0), 2.0 / 3.0) * std::pow(operator_norm(t, kInf), 1.0 / 3.0) + 1e-12);
}

TEST_CASE("matrix JSON round trip") {
    std::mt19937_64 rng(2);
    Operator a(random_matrix(3, rng));
    Operator b = Operator::from_json(a.to_json());
    CHECK((a.matrix() - b.matrix()).norm() == 0.0);

    json diag = json::parse(R"({"diag_re":[1,2],"diag_im":[0,3]})");
    Operator d = Operator::from_json(diag);
    CHECK(d.matrix()(1, 1) == Scalar(2.0, 3.0));
    CHECK(d.is_normal());
    CHECK_THROWS(Operator::from_json(json::parse(R"({"dim":3,"re":[[1,2],[3,4]]})")));
}
