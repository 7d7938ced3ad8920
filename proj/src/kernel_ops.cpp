#include "hinfty/kernel_ops.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <stdexcept>

namespace hinf {

std::string to_string(KernelKind k) {
    switch (k) {
        case KernelKind::identity: return "identity";
        case KernelKind::dense_matrix: return "dense-matrix";
        case KernelKind::fourier: return "fourier";
        case KernelKind::hilbert_line: return "hilbert-line";
        case KernelKind::sector_k: return "sector-K";
        case KernelKind::strip_h0: return "strip-H0";
        case KernelKind::mellin_convolution: return "mellin-convolution";
        case KernelKind::averaging: return "averaging";
    }
    return "dense-matrix";
}

KernelOperator::KernelOperator(KernelKind kind, GridSpec in_grid, GridSpec out_grid, Matrix nodal,
                               json params)
    : kind_(kind), in_(std::move(in_grid)), out_(std::move(out_grid)), nodal_(std::move(nodal)),
      params_(std::move(params)) {
    if (nodal_.rows() != out_.size() || nodal_.cols() != in_.size())
        throw GridMismatch("kernel matrix shape does not match its grids");
}

Matrix KernelOperator::normalized() const {
    return out_.w.cwiseSqrt().cast<Scalar>().asDiagonal() * nodal_ *
           in_.w.cwiseSqrt().cwiseInverse().cast<Scalar>().asDiagonal();
}

void KernelOperator::set_l2_norm(double value, bool exact) const {
    l2_ = value;
    l2_exact_ = exact;
}

bool KernelOperator::l2_norm_exact() const {
    l2_norm_estimate();
    return l2_exact_;
}

double KernelOperator::l2_norm_estimate() const {
    if (l2_) return *l2_;
    const Matrix s = normalized();
    if (std::max(s.rows(), s.cols()) <= 1024) {
        const Matrix gram = s.rows() <= s.cols() ? Matrix(s * s.adjoint()) : Matrix(s.adjoint() * s);
        Eigen::SelfAdjointEigenSolver<Matrix> es(gram, Eigen::EigenvaluesOnly);
        set_l2_norm(std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff())), true);
    } else {
        std::mt19937_64 rng(1);
        std::normal_distribution<double> nd;
        Vector v(s.cols());
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Scalar(nd(rng), nd(rng));
        double sigma = 0.0;
        for (int it = 0; it < 300; ++it) {
            v.normalize();
            Vector u = s.adjoint() * (s * v);
            sigma = std::sqrt(std::abs(v.dot(u)));
            v = u;
        }
        set_l2_norm(sigma, false);
    }
    return *l2_;
}

KernelOperator KernelOperator::transpose() const {
    Matrix t = in_.w.cwiseInverse().cast<Scalar>().asDiagonal() * nodal_.transpose() *
               out_.w.cast<Scalar>().asDiagonal();
    KernelOperator k(kind_, out_, in_, std::move(t), params_);
    if (l2_) k.set_l2_norm(*l2_, l2_exact_);  // ‖W^{1/2} K′ W^{-1/2}‖ = ‖S̃ᵀ‖
    return k;
}

json KernelOperator::to_json() const {
    json j{{"kind", to_string(kind_)},
           {"params", params_},
           {"in_grid", in_.to_json()},
           {"out_grid", out_.to_json()}};
    if (kind_ == KernelKind::dense_matrix) j["matrix"] = matrix_to_json(nodal_);
    return j;
}

KernelOperator identity_kernel(const GridSpec& grid) {
    KernelOperator k(KernelKind::identity, grid, grid, Matrix::Identity(grid.size(), grid.size()));
    k.set_l2_norm(1.0, true);
    return k;
}

KernelOperator dense_kernel(const Matrix& normalized, const GridSpec& in, const GridSpec& out) {
    Matrix nodal = out.w.cwiseSqrt().cwiseInverse().cast<Scalar>().asDiagonal() * normalized *
                   in.w.cwiseSqrt().cast<Scalar>().asDiagonal();
    return KernelOperator(KernelKind::dense_matrix, in, out, std::move(nodal));
}

KernelOperator averaging_kernel(const GridSpec& grid, const std::vector<int>& block) {
    const int m = grid.size();
    if (static_cast<int>(block.size()) != m) throw GridMismatch("one block id per node is required");
    std::map<int, double> mass;
    for (int j = 0; j < m; ++j) mass[block[j]] += grid.w(j);
    Matrix k = Matrix::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
            if (block[i] == block[j]) k(i, j) = grid.w(j) / mass[block[j]];
    KernelOperator op(KernelKind::averaging, grid, grid, std::move(k), json{{"block", block}});
    op.set_l2_norm(1.0, true);
    return op;
}

namespace {

struct BranchLayout {
    std::vector<int> local;  // index inside the branch
    std::vector<int> size;   // branch size of each node
};

BranchLayout branch_layout(const GridSpec& g) {
    BranchLayout b;
    b.local.resize(g.size());
    b.size.resize(g.size());
    int start = 0;
    for (int j = 0; j <= g.size(); ++j) {
        if (j == g.size() || (j > start && g.branch[j] != g.branch[start])) {
            for (int k = start; k < j; ++k) {
                b.local[k] = k - start;
                b.size[k] = j - start;
            }
            start = j;
        }
    }
    return b;
}

std::vector<std::pair<Scalar, Scalar>> branch_ends(const GridSpec& g) {
    switch (g.kind) {
        case GridKind::line:
        case GridKind::interval: return {{Scalar(g.lo), Scalar(g.hi)}};
        case GridKind::sector_boundary: {
            const double om = g.params.at("omega");
            const Scalar lower = std::polar(1.0, -om), upper = std::polar(1.0, om);
            return {{g.lo * lower, g.hi * lower}, {g.hi * upper, g.lo * upper}};
        }
        case GridKind::strip_boundary: {
            const double b = g.params.at("b"), c0 = g.params.at("center"), sc = g.params.at("scale"),
                         um = g.params.at("u_max");
            const double y0 = c0 - sc * std::sinh(um), y1 = c0 + sc * std::sinh(um);
            return {{Scalar(b, y0), Scalar(b, y1)}, {Scalar(-b, y1), Scalar(-b, y0)}};
        }
        default: throw GridMismatch("grid kind has no contour");
    }
}

void check_variant(const GridSpec& g, HilbertVariant v) {
    const bool ok = (v == HilbertVariant::line && g.kind == GridKind::line) ||
                    (v == HilbertVariant::sector_k && g.kind == GridKind::sector_boundary) ||
                    (v == HilbertVariant::strip_h0 && g.kind == GridKind::strip_boundary);
    if (!ok) throw GridMismatch("grid kind does not match the transform variant");
    if (v == HilbertVariant::line && !g.uniform_spacing()) throw GridMismatch("line grid must be uniform");
}

// Row i of the discrete PV operator. Same-branch nodes use the alternating
// rule (odd offsets, doubled weights, half-cell end correction); the
// diagonal makes constants map to the exact truncated PV of 1.
Vector cauchy_row(const GridSpec& g, const BranchLayout& lay, int i, HilbertVariant v) {
    const int m = g.size();
    Vector row = Vector::Zero(m);
    const Scalar scale = v == HilbertVariant::line ? Scalar(-1.0 / kPi) : 1.0 / (2.0 * kPi * kI);
    const int ki = lay.local[i], big = lay.size[i];
    const int first = (ki % 2 == 0) ? 1 : 0;
    const int last = ((big - 1 - ki) % 2 != 0) ? big - 1 : big - 2;
    Scalar off_sum = 0.0;
    for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        Scalar wt;
        if (g.branch[j] == g.branch[i]) {
            const int kj = lay.local[j];
            if ((kj - ki) % 2 == 0) continue;
            double factor = 2.0;
            if (kj == first) factor *= (first == 0) ? 0.75 : 1.25;
            if (kj == last) factor *= (last == big - 1) ? 0.75 : 1.25;
            wt = factor * g.dz(j);
        } else {
            wt = g.dz(j);
        }
        row(j) = scale * wt / (g.z(j) - g.z(i));
        off_sum += row(j);
    }
    const Scalar one = cauchy_of_one(g, g.z(i));
    row(i) = (v == HilbertVariant::line ? Scalar(-2.0) * kI * one : one) - off_sum;
    return row;
}

}  // namespace

Scalar cauchy_of_one(const GridSpec& grid, Scalar mu) {
    Scalar total = 0.0;
    for (auto [s, e] : branch_ends(grid)) {
        const Scalar rel = (mu - s) / (e - s);
        if (std::abs(rel.imag()) <= 1e-12 && rel.real() > 0.0 && rel.real() < 1.0)
            total += std::log(std::abs(e - mu) / std::abs(s - mu));
        else
            total += std::log((e - mu) / (s - mu));
    }
    return total / (2.0 * kPi * kI);
}

KernelOperator hilbert_kernel(const GridSpec& grid, HilbertVariant variant) {
    check_variant(grid, variant);
    const BranchLayout lay = branch_layout(grid);
    Matrix k(grid.size(), grid.size());
    for (int i = 0; i < grid.size(); ++i) k.row(i) = cauchy_row(grid, lay, i, variant).transpose();
    const KernelKind kind = variant == HilbertVariant::line      ? KernelKind::hilbert_line
                            : variant == HilbertVariant::sector_k ? KernelKind::sector_k
                                                                  : KernelKind::strip_h0;
    return KernelOperator(kind, grid, grid, std::move(k), grid.params);
}

SampledFunction hilbert_pv(const SampledFunction& f, HilbertVariant variant) {
    check_variant(f.grid, variant);
    const BranchLayout lay = branch_layout(f.grid);
    Matrix out(f.space.n, f.grid.size());
    for (int i = 0; i < f.grid.size(); ++i) out.col(i) = f.values * cauchy_row(f.grid, lay, i, variant);
    return SampledFunction(f.grid, std::move(out), f.space);
}

ApplyResult apply(const KernelOperator& k, const SampledFunction& f, long budget, std::uint64_t seed) {
    if (!f.grid.compatible(k.in_grid())) throw GridMismatch("function grid differs from the kernel input grid");
    ApplyResult r;
    r.image = SampledFunction(k.out_grid(), f.values * k.nodal().transpose(), f.space);
    r.image_norm = gamma_norm(r.image, budget, seed);
    r.input_norm = gamma_norm(f, budget, seed);
    r.l2_norm = k.l2_norm_estimate();
    const double rhs = r.l2_norm * r.input_norm.value;
    const double se = r.image_norm.std_error + r.l2_norm * r.input_norm.std_error;
    if (r.image_norm.value > rhs * (1.0 + 1e-12) + 3.0 * se + 1e-13)
        throw ViolationFound("kernel extension exceeds its scalar L2 bound",
                             json{{"lhs", r.image_norm.value}, {"rhs", rhs}, {"stderr", se}});
    return r;
}

namespace {

bool power_of_two(int m) { return m > 0 && (m & (m - 1)) == 0; }

struct FourierLayout {
    GridSpec out;
    double h, x0, dxi;
};

FourierLayout fourier_layout(const GridSpec& g) {
    if (g.kind != GridKind::line || !g.uniform_spacing() || !power_of_two(g.size()))
        throw GridMismatch("Fourier transform needs a uniform line grid with 2^k nodes");
    FourierLayout l;
    const int m = g.size();
    l.h = g.w(0);
    l.x0 = g.t(0);
    l.dxi = 2.0 * kPi / (m * l.h);
    l.out = line_grid(-0.5 * m * l.dxi, l.dxi, m);
    return l;
}

}  // namespace

FourierResult fourier(const SampledFunction& f) {
    const FourierLayout lay = fourier_layout(f.grid);
    const int m = f.grid.size();
    Eigen::FFT<double> fft;
    Matrix out(f.space.n, m);
    std::vector<Scalar> in(m), spec(m);
    FourierResult res;
    for (int r = 0; r < f.space.n; ++r) {
        for (int j = 0; j < m; ++j) in[j] = (j % 2 ? -1.0 : 1.0) * f.values(r, j);
        fft.fwd(spec, in);
        for (int k = 0; k < m; ++k) {
            const double xi = lay.out.t(k);
            out(r, k) = lay.h / std::sqrt(2.0 * kPi) * std::polar(1.0, -xi * lay.x0) * spec[k];
        }
        const double before = std::sqrt(lay.h) * f.values.row(r).norm();
        const double after = std::sqrt(lay.dxi) * out.row(r).norm();
        if (before > 0) res.isometry_defect = std::max(res.isometry_defect, std::abs(after - before) / before);
    }
    res.image = SampledFunction(lay.out, std::move(out), f.space);
    return res;
}

KernelOperator fourier_kernel(const GridSpec& line) {
    const FourierLayout lay = fourier_layout(line);
    const int m = line.size();
    Matrix k(m, m);
    for (int a = 0; a < m; ++a)
        for (int j = 0; j < m; ++j)
            k(a, j) = lay.h / std::sqrt(2.0 * kPi) * std::polar(1.0, -lay.out.t(a) * line.t(j));
    KernelOperator op(KernelKind::fourier, line, lay.out, std::move(k));
    op.set_l2_norm(1.0, true);
    return op;
}

namespace {

void check_haar(const GridSpec& g) {
    if (g.kind != GridKind::ray_haar || !g.uniform_spacing()) throw GridMismatch("Mellin convolution needs a ray-haar grid");
}

std::vector<Scalar> mellin_taps(const MellinKernel& k, int m, double h) {
    std::vector<Scalar> c(2 * m - 1, 0.0);  // lag l stored at l + m − 1
    if (k.fn)
        for (int l = -(m - 1); l <= m - 1; ++l) c[l + m - 1] = h * k.fn(std::exp(l * h));
    c[m - 1] += k.point_mass;
    return c;
}

int next_pow2(int v) {
    int p = 1;
    while (p < v) p <<= 1;
    return p;
}

}  // namespace

KernelOperator mellin_kernel(const GridSpec& g, const MellinKernel& k) {
    check_haar(g);
    const int m = g.size();
    const double h = g.w(0);
    const auto c = mellin_taps(k, m, h);
    Matrix t(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) t(i, j) = c[i - j + m - 1];
    KernelOperator op(KernelKind::mellin_convolution, g, g, std::move(t));
    SampledFunction probe(g, Matrix::Zero(1, m), SpaceSpec(2, 1));
    op.set_l2_norm(mellin_convolution(k, probe).l2_bound, false);
    return op;
}

MellinResult mellin_convolution(const MellinKernel& k, const SampledFunction& f) {
    check_haar(f.grid);
    const int m = f.grid.size();
    const double h = f.grid.w(0);
    const auto c = mellin_taps(k, m, h);
    Eigen::FFT<double> fft;

    const int p = next_pow2(2 * m - 1);
    std::vector<Scalar> taps(p, 0.0), taps_hat;
    for (int l = -(m - 1); l <= m - 1; ++l) taps[(l + p) % p] = c[l + m - 1];
    fft.fwd(taps_hat, taps);

    Matrix out(f.space.n, m);
    std::vector<Scalar> row(p), row_hat, conv;
    for (int r = 0; r < f.space.n; ++r) {
        std::fill(row.begin(), row.end(), Scalar(0.0));
        for (int j = 0; j < m; ++j) row[j] = f.values(r, j);
        fft.fwd(row_hat, row);
        for (int q = 0; q < p; ++q) row_hat[q] *= taps_hat[q];
        fft.inv(conv, row_hat);
        for (int i = 0; i < m; ++i) out(r, i) = conv[i];
    }

    // Symbol Σ_l c_l e^{−ilθ} sampled finely; Bernstein's inequality turns the
    // sampled maximum into a bound for the trigonometric polynomial.
    const int q = std::min(1 << 21, next_pow2(256 * p));
    std::vector<Scalar> pad(q, 0.0), sym;
    for (int l = -(m - 1); l <= m - 1; ++l) pad[(l + q) % q] = c[l + m - 1];
    fft.fwd(sym, pad);
    double smax = 0.0;
    for (const auto& s : sym) smax = std::max(smax, std::abs(s));
    const double ratio = kPi * (m - 1) / q;

    MellinResult res;
    res.image = SampledFunction(f.grid, std::move(out), f.space);
    res.symbol_sup = smax;
    res.l2_bound = ratio < 1.0 ? smax / (1.0 - ratio) : kInf;
    return res;
}

}  // namespace hinf
