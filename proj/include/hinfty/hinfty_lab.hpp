#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hinfty/functional_calculus.hpp"
#include "hinfty/kernel_ops.hpp"

namespace hinf {

// One-sided assertion lhs ≤ rhs + tolerance; margin = rhs − lhs.
struct SuiteCheck {
    std::string id;
    double lhs = 0.0;
    double rhs = 0.0;
    double tolerance = 0.0;
    double margin = 0.0;
    bool pass = false;

    json to_json() const;
};

struct SuiteConstant {
    std::string name;
    double value = 0.0;
    double std_error = 0.0;
    std::string method;
};

struct SuiteReport {
    std::string suite;
    json operator_descriptor = json::object();
    json space = json::object();
    std::vector<SuiteConstant> constants;
    std::vector<SuiteCheck> checks;
    // Plot-ready series: name → (x, y) points in insertion order.
    std::map<std::string, std::vector<std::pair<double, double>>> series;
    json details = json::object();
    double runtime_seconds = 0.0;
    std::vector<std::uint64_t> seeds;

    bool passed() const;
    const SuiteCheck& check(const std::string& id) const;
    double constant(const std::string& name) const;

    SuiteCheck& add_check(const std::string& id, double lhs, double rhs, double tolerance = 0.0);
    void add_constant(const std::string& name, double value, double std_error, const std::string& method);
    void add_constant(const std::string& name, const BoundEstimate& est);

    json to_json() const;
    static SuiteReport from_json(const json& j);
    // Header "suite,check,lhs,rhs,margin,pass" and one row per check.
    std::string to_csv() const;
};

std::string format_number(double v);

struct LabOptions {
    int pack_size = 50;
    int sweep_angles = 8;
    int search_rounds = 30;      // randomized perturbations of the best pack members
    int random_vectors = 4;      // extra test vectors on non-Hilbert spaces
    double scale_factor = 10.0;  // c in the A → cA invariance check
    long budget = kDefaultBudget;
    std::uint64_t seed = 1;
};

// Derivative-stressing members on Σ(sigma): the conformal map of the sector onto the
// disk, (λ^κ − μ^κ)/(λ^κ + μ^κ) with κ = π/(2 sigma), vanishing at μ on a geometric
// set of centers in [lo, hi], times a wide H0 regularizer; boundary sup-norm 1.
std::vector<HFunction> conformal_stress_functions(double sigma, double lo, double hi, int count);

// Lower bound for the calculus constant: max ‖f(A)‖ / ‖f‖_∞ over the seeded pack,
// the unit function, the conformal stress functions and a randomized local search around the best members.
BoundEstimate hinfty_bound_estimate(const Operator& op, DomainKind domain, double angle,
                                    const SpaceSpec& space, int pack_size, std::uint64_t seed,
                                    int search_rounds = 30);

// BIP constants, resolvent square functions on rays of angle omega and their
// transposes, the two-sided constant, the calculus constant on Σ(sigma) and the
// implication chain between them.
SuiteReport sector_equivalence_suite(const Operator& a, const SpaceSpec& space, double omega,
                                     double sigma, const LabOptions& opts = {});

// Resolvent square functions on Re λ = ±b, group decay norms, the calculus
// constant on the strip of half-width b and the bound 2bC² against it.
SuiteReport strip_group_suite(const Operator& b, const SpaceSpec& space, double half_width,
                              const LabOptions& opts = {});

// Ratios ‖ψ(·A)x‖ / ‖φ(·A)x‖ in γ(ℝ+, dt/t) over a vector test set, compared with the
// constant obtained from the factorization through the Mellin-type operators.
SuiteReport square_function_comparison(const Operator& a, const HFunction& psi, const HFunction& phi,
                                       const SpaceSpec& space, const LabOptions& opts = {});

enum class TorusSemigroup { heat, poisson };
std::string to_string(TorusSemigroup s);
TorusSemigroup torus_semigroup_from_string(const std::string& s);

// g-function of the discrete torus ℤ_N with generator −Δ (heat) or (−Δ)^{1/2} (Poisson).
SuiteReport g_function_experiment(int torus_size, double p, double beta, TorusSemigroup semigroup,
                                  const LabOptions& opts = {});
// Runs the experiment for every (N, p) pair and checks stability of the constants in N.
SuiteReport g_function_sweep(const std::vector<int>& torus_sizes, const std::vector<double>& ps,
                             double beta, TorusSemigroup semigroup, const LabOptions& opts = {},
                             double stability_tolerance = 0.10);

// B = −i log A: group identity, log-resolvent and half-power representations and the
// two-sided comparison of the sector and strip square functions on angle a (0 picks a midpoint).
SuiteReport log_bridge_suite(const Operator& a, const SpaceSpec& space, double angle = 0.0,
                             const LabOptions& opts = {});

}  // namespace hinf
