#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hinfty/operator_core.hpp"

namespace hinf {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr long kDefaultBudget = 20000;
inline constexpr int kJackknifeBatches = 20;

// ℓp^n over ℂ.
struct SpaceSpec {
    double p = 2.0;
    int n = 1;

    SpaceSpec() = default;
    SpaceSpec(double p_, int n_);

    double dual_p() const;
    SpaceSpec dual() const { return SpaceSpec(dual_p(), n); }
    bool hilbert() const { return p == 2.0; }
    double norm(const Vector& x) const;

    json to_json() const;
    static SpaceSpec from_json(const json& j);
};

double lp_norm(const Vector& x, double p);
double conjugate_exponent(double p);

// w with ‖w‖_{p'} = 1 and Σ w_i y_i = ‖y‖_p (bilinear pairing, no conjugation).
Vector duality_map(const Vector& y, double p);

enum class SumKind { rademacher, gaussian, real_gaussian };
enum class EstimateMethod { exact_hilbert, rademacher_enum, gaussian_mc, randomized_search };

std::string to_string(EstimateMethod m);

struct BoundEstimate {
    double value = 0.0;
    double std_error = 0.0;
    EstimateMethod method = EstimateMethod::exact_hilbert;
    long samples = 0;
    std::uint64_t seed = 0;
    json witnesses = json::array();

    json to_json() const;
};

// (E‖Σ ε_k x_k‖²)^{1/2}; the vectors are the columns of `columns`.
BoundEstimate randomized_sum_norm(const Matrix& columns, const SpaceSpec& space, SumKind kind,
                                  long budget = kDefaultBudget, std::uint64_t seed = 0);
BoundEstimate randomized_sum_norm(const std::vector<Vector>& vectors, const SpaceSpec& space,
                                  SumKind kind, long budget = kDefaultBudget,
                                  std::uint64_t seed = 0);

// Exact (E‖Σ ε_k x_k‖²)^{1/2} over all 4^m patterns ε_k ∈ {±1, ±i}.
double rademacher_enumeration(const Matrix& columns, double p);

enum class BoundKind { r, gamma };

struct BoundOptions {
    int m_max = 4;
    int restarts = 8;
    int ascent_iterations = 40;
    long budget = kDefaultBudget;
    long search_budget = 2000;
    std::uint64_t seed = 0;
};

struct FamilyBound {
    BoundEstimate estimate;
    std::optional<double> hilbert_exact;  // sup_k ‖T_k‖ when p = 2
};

// Lower bound for the R- (or γ-) bound of a finite operator family.
FamilyBound bound_estimate(const std::vector<Matrix>& family, const SpaceSpec& space,
                           BoundKind kind, const BoundOptions& opts = {});

enum class ContractionScalars { complex_disk, real_unit };

struct ContractionReport {
    int trials = 0;
    double max_ratio = 0.0;
    double limit = 0.0;
    json worst = json::object();
};

// Throws ViolationFound if some trial exceeds the limit (2 for complex
// scalars, 1 for real scalars in [0,1]).
ContractionReport contraction_principle_check(const SpaceSpec& space, int trials,
                                              std::uint64_t seed,
                                              ContractionScalars scalars,
                                              int max_terms = 8);

enum class AverageProfile { l1, linf };

struct AverageReport {
    double averaged_bound = 0.0;
    double averaged_stderr = 0.0;
    double input_bound = 0.0;
    double limit = 0.0;
};

// Family {Σ_j w_j h_j N(t_j)} with ‖h‖ ≤ 1 in the chosen profile, compared
// against twice the input constant.
AverageReport convex_average_check(const std::vector<Matrix>& family,
                                   const std::vector<double>& weights, AverageProfile profile,
                                   const SpaceSpec& space, int averaged_members,
                                   std::uint64_t seed, const BoundOptions& opts = {});

}  // namespace hinf
