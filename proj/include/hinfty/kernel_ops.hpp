#pragma once

#include <functional>
#include <optional>

#include "hinfty/square_functions.hpp"

namespace hinf {

enum class KernelKind { identity, dense_matrix, fourier, hilbert_line, sector_k, strip_h0, mellin_convolution, averaging };

std::string to_string(KernelKind k);

// Scalar operator between two grids in nodal form: (Kf)_i = Σ_j K_ij f_j.
// The L2 operator is the normalized matrix W_out^{1/2} K W_in^{-1/2}.
class KernelOperator {
public:
    KernelOperator(KernelKind kind, GridSpec in_grid, GridSpec out_grid, Matrix nodal,
                   json params = json::object());

    KernelKind kind() const { return kind_; }
    const GridSpec& in_grid() const { return in_; }
    const GridSpec& out_grid() const { return out_; }
    const Matrix& nodal() const { return nodal_; }
    const json& params() const { return params_; }

    Matrix normalized() const;
    // Largest singular value of the normalized matrix; exact up to 1024 nodes,
    // otherwise a structured bound or power-iteration value.
    double l2_norm_estimate() const;
    bool l2_norm_exact() const;
    void set_l2_norm(double value, bool exact) const;

    // Transpose with respect to the bilinear pairing Σ w_j f_j g_j.
    KernelOperator transpose() const;

    json to_json() const;

private:
    KernelKind kind_;
    GridSpec in_, out_;
    Matrix nodal_;
    json params_;
    mutable std::optional<double> l2_;
    mutable bool l2_exact_ = false;
};

KernelOperator identity_kernel(const GridSpec& grid);
// `normalized` is the L2 matrix; stored nodally.
KernelOperator dense_kernel(const Matrix& normalized, const GridSpec& in, const GridSpec& out);
// Weighted block averages; block[j] is the block id of node j.
KernelOperator averaging_kernel(const GridSpec& grid, const std::vector<int>& block);

enum class HilbertVariant { line, sector_k, strip_h0 };

// Line: classical (1/π) PV ∫ f(y)/(x − y) dy. Sector/strip: (1/2πi) PV ∮ G(λ)/(λ − μ) dλ.
KernelOperator hilbert_kernel(const GridSpec& grid, HilbertVariant variant);
// (1/2πi) PV ∫ dλ/(λ − μ) over the truncated contour of the grid, μ on the contour.
Scalar cauchy_of_one(const GridSpec& grid, Scalar mu);

struct MellinKernel {
    std::function<Scalar(double)> fn;  // may be empty
    Scalar point_mass = 0.0;           // coefficient of the unit mass at t = 1
};

KernelOperator mellin_kernel(const GridSpec& haar_grid, const MellinKernel& k);

struct ApplyResult {
    SampledFunction image;
    BoundEstimate image_norm;
    BoundEstimate input_norm;
    double l2_norm = 0.0;
};

ApplyResult apply(const KernelOperator& k, const SampledFunction& f, long budget = kDefaultBudget,
                  std::uint64_t seed = 0);

struct FourierResult {
    SampledFunction image;
    double isometry_defect = 0.0;  // max relative change of scalar L2 norms over coordinates
};

// Unitary transform (1/√2π) ∫ e^{−iξx} f(x) dx on the uniform dual grid.
FourierResult fourier(const SampledFunction& f);
KernelOperator fourier_kernel(const GridSpec& line);

SampledFunction hilbert_pv(const SampledFunction& f, HilbertVariant variant);

struct MellinResult {
    SampledFunction image;
    double symbol_sup = 0.0;    // sampled sup of the discrete symbol
    double l2_bound = 0.0;      // certified bound for the discrete operator
};

// (k ∗ f)(s) = ∫ k(s/t) f(t) dt/t through the FFT in log coordinates.
MellinResult mellin_convolution(const MellinKernel& k, const SampledFunction& f);

}  // namespace hinf
