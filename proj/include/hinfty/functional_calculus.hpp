#pragma once

#include <functional>
#include <string>
#include <vector>

#include "hinfty/banach_geometry.hpp"

namespace hinf {

// Sector Σ(σ) = {|arg λ| < σ}; strip S(a) = {|Re λ| < a}.
enum class DomainKind { sector, strip };
enum class FunctionClass { h0, h1, hinf };

std::string to_string(DomainKind d);
std::string to_string(FunctionClass c);

struct HFunction {
    std::string name;
    std::function<Scalar(Scalar)> eval;
    DomainKind domain = DomainKind::sector;
    double angle = kPi;  // σ for sectors, a for strips
    FunctionClass cls = FunctionClass::h0;
    // Sector: |f(λ)| ≲ min(|λ|, 1/|λ|)^decay. Strip: |f(λ)| ≲ e^{−decay·|Im λ|}.
    double decay = 0.0;
    json params = json::object();

    Scalar operator()(Scalar z) const { return eval(z); }

    // Max of |f| over the sampled domain boundary (rays at ±σ or lines at ±a).
    double sup_norm_estimate() const;
    // Finite on 64 boundary points and the declared decay holds on the sampled window.
    void validate() const;
};

HFunction product(const HFunction& f, const HFunction& g);
// λ ↦ f(e^{iλ}) on S(σ) for f on Σ(σ).
HFunction lift_to_strip(const HFunction& f);

// Named registry: "phi" λ(1+λ)^{-2}; "power_ratio" λ^α(1+λ)^{-β}; "g_beta" λ^β e^{−λ};
// "sqrt_resolvent" λ^{1/2}(1+λ)^{-1}; "rho" n/(n+λ) − 1/(1+nλ); "imaginary_power" λ^{is};
// "group" e^{tλ} on a strip; "rational" with explicit zeros/poles; "lifted" {base}.
HFunction make_function(const std::string& name, const json& params = json::object());

// Seeded pack of normalized rational H0 functions on Σ(sigma): degree ≤ 6,
// poles outside the closed sector, boundary sup-norm 1.
std::vector<HFunction> sector_test_pack(int size, double sigma, std::uint64_t seed);
// Lifted sector pack on S(a) plus normalized group functions e^{tλ}.
std::vector<HFunction> strip_test_pack(int size, double a, std::uint64_t seed);

struct ContourSpec {
    DomainKind kind = DomainKind::sector;
    double angle = 0.0;              // γ (sector) or b (strip); 0 picks the midpoint
    int nodes_per_decade = 60;       // sector lattice density in log-radius
    double window_decades = 4.0;     // initial margin around the spectral window
    double max_extra_decades = 40.0;
    double tail_tolerance = 1e-9;    // stop extending once the outer block is this small
    double strip_step = 0.0;         // u-step of the sinh map; 0 picks it from the geometry

    json to_json() const;
};

// Fixed-window contour with the resolvents stored when n ≤ 16.
class ContourCache {
public:
    ContourCache(const Operator& a, DomainKind kind, double function_angle, ContourSpec spec = {},
                 double window_decades = 12.0);

    const Operator& op() const { return a_; }
    double contour_angle() const { return angle_; }
    const std::vector<Scalar>& nodes() const { return z_; }
    const std::vector<Scalar>& weights() const { return dz_; }
    Matrix resolvent_at(std::size_t j) const;

    // (1/2πi) Σ f(z_j) R(z_j) dz_j; TailNotConverged if the outer blocks exceed 1e−8.
    Matrix integrate(const std::function<Scalar(Scalar)>& f) const;
    Matrix integrate(const std::function<Matrix(Scalar)>& f) const;

private:
    Operator a_;
    DomainKind kind_;
    double angle_;
    std::vector<Scalar> z_, dz_;
    std::vector<int> block_;  // −1 inner tail block, +1 outer tail block, 0 interior
    std::vector<Matrix> res_;
};

// (1/2πi) ∮ f(λ) R(λ, A) dλ for f in H0 or H1 on a domain strictly larger than the spectrum.
Matrix dunford(const HFunction& f, const Operator& a, const ContourSpec& spec = {});
// Any class; H∞ functions go through φ(A)^{-1}(φ f)(A).
Matrix calculus(const HFunction& f, const Operator& a, const ContourSpec& spec = {});

// Richardson variant of the extended calculus: extrapolates (f ρ_n)(A) in n.
Matrix calculus_richardson(const HFunction& f, const Operator& a, const std::vector<int>& ns = {16, 32, 64});

enum class PowerMethod { eig, dunford_regularized, balakrishnan };
std::string to_string(PowerMethod m);

Matrix power(const Operator& a, Scalar z, PowerMethod method);

// Sign of the fractional-power representation relative to the displayed
// coefficient sin(π(z − ½))/π; fixed by a scalar calibration at first use.
int balakrishnan_sign();

Matrix log_operator(const Operator& a);

struct LogResolventCheck {
    Matrix integral;
    Matrix reference;   // (z − log A)^{-1}
    double residual = 0.0;
};
LogResolventCheck log_resolvent_check(const Operator& a, Scalar z);

struct HalfPowerCheck {
    Matrix integral;
    Matrix reference;   // t^{1/2} A^{1/2} (t + A)^{-1}
    double residual = 0.0;  // relative
};
// Contour integral over |Im z| = a of t^{1/2}e^{z/2}/(t+e^z)·(z − log A)^{-1}.
HalfPowerCheck log_half_power_check(const Operator& a, double t, double strip_a);

Matrix semigroup(const Operator& a, double t);
Matrix group(const Operator& b, double t);

// (1/2πi) ∫ φ(λ) F(λ) R(λ, A) dλ with F(λ) commuting with the resolvents.
Matrix operator_valued_calculus(const std::function<Matrix(Scalar)>& family, const HFunction& phi,
                                const Operator& a, const ContourSpec& spec = {});

// (φ f ψ)(A, B) by iterated contour quadrature; f is given on the product domain
// of φ and ψ.
Matrix joint_calculus(const std::function<Scalar(Scalar, Scalar)>& f, const Operator& a,
                      const Operator& b, const HFunction& phi, const HFunction& psi);

}  // namespace hinf
