#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hinfty/banach_geometry.hpp"

namespace hinf {

enum class GridKind { interval, ray_dt, ray_haar, line, sector_boundary, strip_boundary, custom };

std::string to_string(GridKind k);
GridKind grid_kind_from_string(const std::string& s);

// Quadrature grid. `t` is the real parameter of each node (position, radius
// or height), `z` the point in ℂ, `dz` the oriented quadrature weight for
// contour integrals and `w` the positive weight of the grid measure.
struct GridSpec {
    GridKind kind = GridKind::custom;
    RealVector t;
    RealVector w;
    std::vector<int> branch;
    Vector z;
    Vector dz;
    double lo = 0.0, hi = 0.0;  // truncation window of the parameter
    json params = json::object();

    int size() const { return static_cast<int>(t.size()); }
    double window_measure() const;
    bool compatible(const GridSpec& other) const;
    bool uniform_spacing(double rel_tol = 1e-12) const;

    json to_json() const;
    static GridSpec from_json(const json& j);
};

// Midpoint cells on [a, b].
GridSpec interval_grid(double a, double b, int nodes);
// Nodes x0 + j·h, j = 0..m−1, cells of width h.
GridSpec line_grid(double x0, double h, int nodes);
GridSpec symmetric_line_grid(double half_width, int nodes);
// (0, ∞) with dt/t: uniform in log t.
GridSpec ray_haar_grid(double lo, double hi, int nodes_per_decade = 60);
// (0, ∞) with dt: geometric nodes, weights t_j·h.
GridSpec ray_dt_grid(double lo, double hi, int nodes_per_decade = 60);
// ∂Σ(ω) with arc length, lower ray outward then upper ray inward.
GridSpec sector_boundary_grid(double omega, double lo, double hi, int nodes_per_decade = 60);
// ∂S(b): Im λ = center + scale·sinh(u), |u| ≤ u_max; right line upward, left line downward.
GridSpec strip_boundary_grid(double b, double center, double scale, double u_max, double h);

struct SampledFunction {
    GridSpec grid;
    Matrix values;  // n × m, column j is f(t_j)
    SpaceSpec space;

    SampledFunction() = default;
    SampledFunction(GridSpec g, Matrix v, SpaceSpec s);

    std::string to_csv() const;
    static SampledFunction from_csv(const std::string& text, const SpaceSpec& space);
};

using NodeFunction = std::function<Vector(double t, Scalar z, int branch)>;
SampledFunction sample(const GridSpec& grid, const SpaceSpec& space, const NodeFunction& f);

// Column j = √w_j · f(t_j).
Matrix embed_matrix(const SampledFunction& f);

BoundEstimate gamma_norm(const SampledFunction& f, long budget = kDefaultBudget,
                         std::uint64_t seed = 0);

struct DualBracket {
    double lower = 0.0;
    double lower_stderr = 0.0;
    double upper = 0.0;
    double upper_stderr = 0.0;
    bool exact = false;
};

// g takes values in X′ = ℓ_{p′}; g.space must be that dual space.
DualBracket gamma_dual_norm(const SampledFunction& g, long budget = kDefaultBudget,
                            std::uint64_t seed = 0);

struct HolderResult {
    Scalar pairing = 0.0;          // Σ w_j ⟨f_j, g_j⟩
    double abs_integral = 0.0;     // Σ w_j |⟨f_j, g_j⟩|
    double bound = 0.0;            // ‖f‖_γ · upper bracket of ‖g‖_γ′
    double bound_stderr = 0.0;
};

HolderResult holder_pairing(const SampledFunction& f, const SampledFunction& g,
                            long budget = kDefaultBudget, std::uint64_t seed = 0);

struct MultiplierResult {
    SampledFunction image;
    BoundEstimate image_norm;
    BoundEstimate input_norm;
    BoundEstimate family_bound;
    double rhs = 0.0;  // family bound × ‖f‖_γ
};

// (Nf)(t_j) = N(t_j) f(t_j); with `transpose` the family acts as N(t_j)ᵀ on X′.
MultiplierResult pointwise_multiplier(const std::vector<Matrix>& family, const SampledFunction& f,
                                      bool transpose = false, long budget = kDefaultBudget,
                                      std::uint64_t seed = 0);

}  // namespace hinf
