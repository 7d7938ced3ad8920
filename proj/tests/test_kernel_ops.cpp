#include <doctest.h>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <random>

#include "hinfty/kernel_ops.hpp"
#include "hinfty/operator_core.hpp"

using namespace hinf;

namespace {

Matrix random_matrix(int rows, int cols, std::mt19937_64& rng) {
    std::normal_distribution<double> nd;
    Matrix m(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) m(i, j) = Scalar(nd(rng), nd(rng));
    return m;
}

SampledFunction random_function(const GridSpec& g, const SpaceSpec& s, std::mt19937_64& rng) {
    return SampledFunction(g, random_matrix(s.n, g.size(), rng), s);
}

// Σ_j w_j Σ_r a_rj b_rj, no conjugation.
Scalar pairing(const GridSpec& g, const Matrix& a, const Matrix& b) {
    return (a.cwiseProduct(b).colwise().sum().transpose().array() * g.w.cast<Scalar>().array()).sum();
}

Vector gaussian_x(int n) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = Scalar(1.0 + i, 0.5 * i - 1.0);
    return x;
}

// Real and imaginary parts of ∫_0^∞ fn(r) dr/r.
Scalar haar_integral(const std::function<Scalar(double)>& fn) {
    boost::math::quadrature::tanh_sinh<double> near;
    boost::math::quadrature::exp_sinh<double> far;
    auto part = [&](bool imag) {
        auto f = [&](double r) { Scalar v = fn(r) / r; return imag ? v.imag() : v.real(); };
        return near.integrate(f, 0.0, 1.0) + far.integrate(f, 1.0, kInf);
    };
    return Scalar(part(false), part(true));
}

}  // namespace

TEST_CASE("identity kernel reproduces the function and its norm") {
    std::mt19937_64 rng(1);
    GridSpec g = interval_grid(0, 1, 16);
    SampledFunction f = random_function(g, SpaceSpec(3, 4), rng);
    ApplyResult r = apply(identity_kernel(g), f, 4000, 5);
    CHECK((r.image.values - f.values).norm() == 0.0);
    CHECK(r.image_norm.value == doctest::Approx(r.input_norm.value).epsilon(1e-14));
    CHECK(identity_kernel(g).l2_norm_estimate() == 1.0);
}

TEST_CASE("averaging projection contracts on l2") {
    std::mt19937_64 rng(2);
    GridSpec g = ray_dt_grid(0.01, 100.0, 10);
    std::vector<int> blocks(g.size());
    for (int j = 0; j < g.size(); ++j) blocks[j] = j / 7;
    KernelOperator p = averaging_kernel(g, blocks);
    CHECK(p.l2_norm_estimate() == 1.0);
    // Oracle: the exact singular values of a weighted conditional expectation are 0 or 1.
    KernelOperator fresh(KernelKind::dense_matrix, g, g, p.nodal());
    CHECK(fresh.l2_norm_estimate() == doctest::Approx(1.0).epsilon(1e-12));
    for (int trial = 0; trial < 5; ++trial) {
        SampledFunction f = random_function(g, SpaceSpec(2, 3), rng);
        ApplyResult r = apply(p, f);
        CHECK(r.image_norm.std_error == 0.0);
        CHECK(r.image_norm.value <= r.input_norm.value * (1 + 1e-12));
        ApplyResult twice = apply(p, r.image);
        CHECK((twice.image.values - r.image.values).norm() <= 1e-12 * r.image.values.norm());
    }
}

TEST_CASE("unit-norm dense kernel on l3") {
    std::mt19937_64 rng(3);
    GridSpec in = interval_grid(0, 2, 12), out = interval_grid(-1, 1, 9);
    Matrix s = random_matrix(9, 12, rng);
    s /= Eigen::JacobiSVD<Matrix>(s).singularValues()(0);
    KernelOperator k = dense_kernel(s, in, out);
    CHECK(k.l2_norm_estimate() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(k.l2_norm_exact());
    for (int trial = 0; trial < 4; ++trial) {
        SampledFunction f = random_function(in, SpaceSpec(3, 3), rng);
        ApplyResult r;
        CHECK_NOTHROW(r = apply(k, f, kDefaultBudget, 11 + trial));
        CHECK(r.image_norm.value <= r.input_norm.value + 3 * (r.image_norm.std_error + r.input_norm.std_error));
    }
    SampledFunction wrong = random_function(out, SpaceSpec(3, 3), rng);
    CHECK_THROWS_AS(apply(k, wrong), GridMismatch);
}

TEST_CASE("Fourier transform of a Gaussian") {
    GridSpec g = symmetric_line_grid(20.0, 512);
    const Vector x = gaussian_x(3);
    SampledFunction f = sample(g, SpaceSpec(2, 3), [&](double t, Scalar, int) -> Vector {
        return std::exp(-0.5 * t * t) * x;
    });
    FourierResult r = fourier(f);
    CHECK(r.isometry_defect <= 1e-10);
    // e^{−x²/2} is its own transform
    double err = 0.0;
    for (int k = 0; k < r.image.grid.size(); ++k) {
        const double xi = r.image.grid.t(k);
        err = std::max(err, (r.image.values.col(k) - std::exp(-0.5 * xi * xi) * x).norm());
    }
    CHECK(err <= 1e-10);
    CHECK(gamma_norm(r.image).value == doctest::Approx(gamma_norm(f).value).epsilon(1e-8));
    CHECK(gamma_norm(f).value == doctest::Approx(std::pow(kPi, 0.25) * x.norm()).epsilon(1e-10));
}

TEST_CASE("Fourier transform of a single-node function has flat modulus") {
    GridSpec g = symmetric_line_grid(8.0, 64);
    Matrix v = Matrix::Zero(2, 64);
    v(0, 17) = Scalar(2.0, -1.0);
    v(1, 17) = 3.0;
    FourierResult r = fourier(SampledFunction(g, v, SpaceSpec(1.5, 2)));
    const RealVector mod = r.image.values.row(0).cwiseAbs().transpose();
    CHECK(mod.maxCoeff() - mod.minCoeff() <= 1e-13 * mod.maxCoeff());
    CHECK(mod(0) == doctest::Approx(g.w(0) / std::sqrt(2 * kPi) * std::sqrt(5.0)).epsilon(1e-13));
}

TEST_CASE("disjoint frequencies with orthogonal vectors are Pythagorean") {
    GridSpec g = symmetric_line_grid(30.0, 1024);
    Vector x1 = Vector::Unit(2, 0), x2 = Vector::Unit(2, 1) * Scalar(0, 2);
    auto env = [](double t) { return std::exp(-t * t / 50.0); };
    SampledFunction low = sample(g, SpaceSpec(2, 2), [&](double t, Scalar, int) -> Vector { return env(t) * x1; });
    SampledFunction high = sample(g, SpaceSpec(2, 2), [&](double t, Scalar, int) -> Vector {
        return env(t) * std::cos(6.0 * t) * x2;
    });
    SampledFunction both(g, low.values + high.values, low.space);
    const double lhs = std::pow(gamma_norm(fourier(both).image).value, 2);
    const double rhs = std::pow(gamma_norm(fourier(low).image).value, 2) +
                       std::pow(gamma_norm(fourier(high).image).value, 2);
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("Fourier transform preserves gamma norms off l2 within MC error") {
    std::mt19937_64 rng(4);
    GridSpec g = symmetric_line_grid(10.0, 128);
    for (double p : {1.5, 3.0}) {
        SampledFunction f = sample(g, SpaceSpec(p, 3), [&](double t, Scalar, int) -> Vector {
            Vector v(3);
            v << std::exp(-t * t), std::exp(-std::abs(t)) * Scalar(0, 1), 1.0 / (1.0 + t * t);
            return v;
        });
        BoundEstimate a = gamma_norm(f, kDefaultBudget, 1), b = gamma_norm(fourier(f).image, kDefaultBudget, 2);
        CHECK(std::abs(a.value - b.value) <= 3 * std::hypot(a.std_error, b.std_error));
    }
}

TEST_CASE("Fourier transform needs a dyadic uniform line grid") {
    CHECK_THROWS_AS(fourier(SampledFunction(symmetric_line_grid(1.0, 12), Matrix::Ones(1, 12), SpaceSpec(2, 1))),
                    GridMismatch);
    CHECK_THROWS_AS(fourier(SampledFunction(interval_grid(0, 1, 16), Matrix::Ones(1, 16), SpaceSpec(2, 1))),
                    GridMismatch);
    KernelOperator k = fourier_kernel(symmetric_line_grid(4.0, 32));
    KernelOperator fresh(KernelKind::dense_matrix, k.in_grid(), k.out_grid(), k.nodal());
    CHECK(fresh.l2_norm_estimate() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Hilbert transform maps a modulated cosine to the modulated sine") {
    GridSpec g = symmetric_line_grid(80.0, 4096);
    auto env = [](double t) { return std::exp(-t * t / 200.0); };
    SampledFunction f = sample(g, SpaceSpec(2, 1), [&](double t, Scalar, int) -> Vector {
        return Vector::Constant(1, env(t) * std::cos(t));
    });
    SampledFunction h = hilbert_pv(f, HilbertVariant::line);
    RealVector expected(g.size());
    for (int j = 0; j < g.size(); ++j) expected(j) = env(g.t(j)) * std::sin(g.t(j));
    const double rel = (h.values.row(0).transpose() - expected.cast<Scalar>()).norm() / expected.norm();
    MESSAGE("Hilbert pair relative error " << rel);
    CHECK(rel <= 1e-3);
    CHECK_THROWS_AS(hilbert_pv(f, HilbertVariant::sector_k), GridMismatch);
}

namespace {

// For G(λ) = A^{1/2}R(λ,A)x and μ on the contour the resolvent identity gives
//   PV(1/2πi)∫ G(λ)/(λ−μ) dλ = c(μ)·G(μ) − A^{1/2}·D·R(μ,A)x
// with c(μ) the truncated PV integral of 1 and D = (1/2πi)∫ R(λ,A) dλ over the
// same truncated contour. Returns max relative residual over interior nodes.
double cauchy_identity_residual(const GridSpec& g, const Matrix& a, HilbertVariant variant, double inner, double outer) {
    Operator op(a);
    const Matrix root = op.eig_apply([](Scalar z) { return std::sqrt(z); });
    Vector x(a.rows());
    for (int i = 0; i < x.size(); ++i) x(i) = Scalar(1.0, 0.3 * i);
    SampledFunction gfun = sample(g, SpaceSpec(2, a.rows()), [&](double, Scalar z, int) -> Vector {
        return root * (resolvent(op, z) * x);
    });
    SampledFunction out = hilbert_pv(gfun, variant);
    Matrix d = Matrix::Zero(a.rows(), a.cols());
    for (int j = 0; j < g.size(); ++j) d += g.dz(j) * resolvent(op, g.z(j));
    d /= 2.0 * kPi * kI;
    double worst = 0.0;
    for (int i = 0; i < g.size(); ++i) {
        const double s = std::abs(g.z(i));
        if (s < inner || s > outer) continue;
        const Vector ref = cauchy_of_one(g, g.z(i)) * gfun.values.col(i) - root * d * resolvent(op, g.z(i)) * x;
        worst = std::max(worst, (out.values.col(i) - ref).norm() / gfun.values.col(i).norm());
    }
    return worst;
}

}  // namespace

TEST_CASE("sector Cauchy kernel reproduces the resolvent identity") {
    std::mt19937_64 rng(5);
    Matrix q = random_matrix(3, 3, rng);
    Matrix a = q * Matrix(Vector::LinSpaced(3, 0.5, 8.0).asDiagonal()) * q.inverse();
    GridSpec g = sector_boundary_grid(kPi / 2, 1e-5, 1e5, 40);
    const double res = cauchy_identity_residual(g, a, HilbertVariant::sector_k, 1e-3, 1e3);
    MESSAGE("sector kernel residual " << res);
    CHECK(res <= 1e-3);
}

TEST_CASE("strip kernel reproduces the resolvent identity") {
    Matrix b = Matrix::Zero(2, 2);
    b(0, 0) = Scalar(0.2, 0.0);
    b(1, 1) = Scalar(-0.3, 0.0);
    b(0, 1) = 0.4;
    GridSpec g = strip_boundary_grid(1.0, 0.0, 1.0, 8.0, 0.02);
    const double res = cauchy_identity_residual(g, b, HilbertVariant::strip_h0, 0.0, 50.0);
    MESSAGE("strip kernel residual " << res);
    CHECK(res <= 1e-3);
}

TEST_CASE("Cauchy kernels send zero to zero") {
    for (const auto& [g, v] : {std::pair{sector_boundary_grid(1.0, 1e-2, 1e2, 20), HilbertVariant::sector_k},
                                std::pair{strip_boundary_grid(0.5, 0.0, 1.0, 4.0, 0.1), HilbertVariant::strip_h0},
                                std::pair{symmetric_line_grid(5.0, 64), HilbertVariant::line}}) {
        SampledFunction z(g, Matrix::Zero(2, g.size()), SpaceSpec(3, 2));
        CHECK(hilbert_pv(z, v).values.norm() == 0.0);
    }
}

TEST_CASE("sector kernel sensitivity to the vertex window") {
    Matrix a = Vector::LinSpaced(3, 1.0, 4.0).cast<Scalar>().asDiagonal();
    GridSpec wide = sector_boundary_grid(2.0, 1e-8, 1e4, 40), narrow = sector_boundary_grid(2.0, 1e-4, 1e4, 40);
    Operator op(a);
    const Matrix root = op.eig_apply([](Scalar z) { return std::sqrt(z); });
    const Vector x = Vector::Ones(3);
    auto g_of = [&](double, Scalar z, int) -> Vector { return root * (resolvent(op, z) * x); };
    SampledFunction hw = hilbert_pv(sample(wide, SpaceSpec(2, 3), g_of), HilbertVariant::sector_k);
    SampledFunction hn = hilbert_pv(sample(narrow, SpaceSpec(2, 3), g_of), HilbertVariant::sector_k);
    // Nodes coincide on the shared part of both windows; compare at |μ| ≈ 1.
    int iw = -1, in = -1;
    for (int j = 0; j < wide.size(); ++j)
        if (wide.branch[j] == 0 && std::abs(std::log(wide.t(j))) < 0.03) iw = j;
    for (int j = 0; j < narrow.size(); ++j)
        if (narrow.branch[j] == 0 && std::abs(std::log(narrow.t(j))) < 0.03) in = j;
    REQUIRE(iw >= 0);
    REQUIRE(in >= 0);
    CHECK(wide.t(iw) == doctest::Approx(narrow.t(in)).epsilon(1e-12));
    const double diff = (hw.values.col(iw) - hn.values.col(in)).norm() / hw.values.col(iw).norm();
    MESSAGE("vertex window 1e-8 vs 1e-4 relative change " << diff);
    // Integrand is O(|λ|^{1/2}) at the vertex, so the cut region contributes O(√window).
    CHECK(diff <= 1e-1);
    CHECK(diff > 0.0);
}

TEST_CASE("Mellin convolution with the unit point mass is the identity") {
    std::mt19937_64 rng(6);
    GridSpec g = ray_haar_grid(1e-3, 1e3, 30);
    SampledFunction f = random_function(g, SpaceSpec(4, 2), rng);
    MellinResult r = mellin_convolution(MellinKernel{{}, 1.0}, f);
    CHECK((r.image.values - f.values).norm() <= 1e-13 * f.values.norm());
    CHECK(r.symbol_sup == doctest::Approx(1.0).epsilon(1e-14));
    CHECK_THROWS_AS(mellin_convolution(MellinKernel{{}, 1.0}, SampledFunction(line_grid(0, 1, 4), Matrix::Ones(1, 4), SpaceSpec(2, 1))),
                    GridMismatch);
}

TEST_CASE("Mellin convolution acts on t^{-i xi} by its symbol") {
    auto kernel = [](double t) { return Scalar(std::sqrt(t) * std::exp(-t)); };
    GridSpec g = ray_haar_grid(1e-12, 1e12, 60);
    for (double xi : {0.0, 0.7, -2.0}) {
        SampledFunction f = sample(g, SpaceSpec(2, 1), [&](double t, Scalar, int) {
            return Vector::Constant(1, std::exp(Scalar(0, -xi * std::log(t))));
        });
        const Scalar symbol = haar_integral([&](double r) { return kernel(r) * std::exp(Scalar(0, xi * std::log(r))); });
        MellinResult r = mellin_convolution(MellinKernel{kernel, 0.0}, f);
        double worst = 0.0;
        for (int j = 0; j < g.size(); ++j) {
            if (g.t(j) < 1e-2 || g.t(j) > 1.0) continue;
            worst = std::max(worst, std::abs(r.image.values(0, j) - symbol * f.values(0, j)) / std::abs(symbol));
        }
        CHECK(worst <= 1e-5);
        CHECK(r.symbol_sup >= std::abs(symbol) * (1 - 1e-5));
    }
}

TEST_CASE("reflected Mellin operator is bounded by the L1 norm of the kernel on rays") {
    const double gamma = kPi / 3;
    auto g = [](Scalar z) { return std::sqrt(z) / (1.0 + z); };
    GridSpec grid = ray_haar_grid(1e-6, 1e6, 40);
    for (double sign : {1.0, -1.0}) {
        const Scalar rot = std::polar(1.0, sign * gamma);
        auto k = [&](double t) { return g(t * rot); };
        const double l1 = haar_integral([&](double t) { return Scalar(std::abs(k(t))); }).real();
        // Correlation ∫ k(t/s) f(t) dt/t equals the convolution against the reflected kernel.
        auto reflected = [&](double t) { return k(1.0 / t); };
        MellinResult r = mellin_convolution(MellinKernel{reflected, 0.0},
                                            SampledFunction(grid, Matrix::Zero(1, grid.size()), SpaceSpec(2, 1)));
        MESSAGE("symbol sup " << r.symbol_sup << " vs kernel L1 " << l1);
        CHECK(r.symbol_sup <= l1);
        CHECK(r.l2_bound <= l1 * (1 + 1e-3));
        KernelOperator op = mellin_kernel(grid, MellinKernel{reflected, 0.0});
        KernelOperator fresh(KernelKind::dense_matrix, grid, grid, op.nodal());
        CHECK(fresh.l2_norm_estimate() <= op.l2_norm_estimate() * (1 + 1e-12));
    }
}

TEST_CASE("tensor extension is bounded by the largest singular value on l2") {
    std::mt19937_64 rng(7);
    GridSpec line = symmetric_line_grid(6.0, 64);
    GridSpec haar = ray_haar_grid(1e-2, 1e2, 12);
    GridSpec sector = sector_boundary_grid(1.0, 1e-2, 1e2, 12);
    GridSpec strip = strip_boundary_grid(0.5, 0.0, 1.0, 3.0, 0.1);
    std::vector<int> blocks(line.size());
    for (int j = 0; j < line.size(); ++j) blocks[j] = j / 5;
    std::vector<KernelOperator> kernels{identity_kernel(line),
                                        averaging_kernel(line, blocks),
                                        dense_kernel(random_matrix(64, 64, rng), line, line),
                                        fourier_kernel(line),
                                        hilbert_kernel(line, HilbertVariant::line),
                                        hilbert_kernel(sector, HilbertVariant::sector_k),
                                        hilbert_kernel(strip, HilbertVariant::strip_h0),
                                        mellin_kernel(haar, MellinKernel{[](double t) { return Scalar(t / (1 + t * t)); }, 0.5})};
    for (const auto& k : kernels) {
        KernelOperator fresh(KernelKind::dense_matrix, k.in_grid(), k.out_grid(), k.nodal());
        const double sigma = fresh.l2_norm_estimate();
        CHECK(k.l2_norm_estimate() >= sigma - 1e-8);
        for (int trial = 0; trial < 3; ++trial) {
            SampledFunction f = random_function(k.in_grid(), SpaceSpec(2, 4), rng);
            ApplyResult r = apply(k, f);
            CHECK(r.image_norm.value <= sigma * r.input_norm.value + 1e-8);
        }
    }
}

TEST_CASE("transpose kernel satisfies the duality pairing") {
    std::mt19937_64 rng(8);
    GridSpec sector = sector_boundary_grid(1.2, 1e-2, 1e2, 10);
    GridSpec in = ray_dt_grid(0.1, 10.0, 8), out = interval_grid(0, 3, 11);
    std::vector<KernelOperator> kernels{dense_kernel(random_matrix(11, in.size(), rng), in, out),
                                        hilbert_kernel(sector, HilbertVariant::sector_k),
                                        fourier_kernel(symmetric_line_grid(3.0, 16))};
    for (const auto& k : kernels) {
        KernelOperator kt = k.transpose();
        CHECK(kt.in_grid().compatible(k.out_grid()));
        SampledFunction f = random_function(k.in_grid(), SpaceSpec(3, 2), rng);
        SampledFunction g = random_function(k.out_grid(), SpaceSpec(1.5, 2), rng);
        const Scalar lhs = pairing(k.out_grid(), f.values * k.nodal().transpose(), g.values);
        const Scalar rhs = pairing(k.in_grid(), f.values, g.values * kt.nodal().transpose());
        CHECK(std::abs(lhs - rhs) <= 1e-10 * std::max(1.0, std::abs(lhs)));
        KernelOperator fresh(KernelKind::dense_matrix, kt.in_grid(), kt.out_grid(), kt.nodal());
        CHECK(fresh.l2_norm_estimate() == doctest::Approx(k.l2_norm_estimate()).epsilon(1e-10));
    }
}

TEST_CASE("Fourier multiplier with unimodular diagonal symbol") {
    GridSpec line = symmetric_line_grid(8.0, 64);
    KernelOperator ft = fourier_kernel(line);
    KernelOperator inverse = dense_kernel(ft.normalized().adjoint(), ft.out_grid(), line);
    const GridSpec& freq = ft.out_grid();
    std::vector<Matrix> family;
    for (int k = 0; k < freq.size(); ++k) {
        const double xi = freq.t(k);
        Vector d(3);
        d << (xi >= 0 ? 1.0 : -1.0) * kI, std::polar(1.0, xi), 1.0 / (1.0 + xi * xi);
        family.push_back(d.asDiagonal());
    }
    SpaceSpec space(3, 3);
    BoundOptions opts;
    opts.seed = 4;
    FamilyBound fb = bound_estimate(family, space, BoundKind::gamma, opts);
    SampledFunction f = sample(line, space, [](double t, Scalar, int) -> Vector {
        Vector v(3);
        v << std::exp(-t * t), std::exp(-std::abs(t)), std::cos(t) * std::exp(-t * t / 4);
        return v;
    });
    Matrix mult = fourier(f).image.values;
    for (int k = 0; k < freq.size(); ++k) mult.col(k) = family[k] * mult.col(k);
    ApplyResult back = apply(inverse, SampledFunction(freq, mult, space), kDefaultBudget, 9);
    const BoundEstimate in = gamma_norm(f, kDefaultBudget, 9);
    CHECK(back.image_norm.value <= fb.estimate.value * in.value +
                                       3 * (back.image_norm.std_error + fb.estimate.std_error * in.value +
                                            fb.estimate.value * in.std_error));
}
