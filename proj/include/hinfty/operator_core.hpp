#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <functional>
#include <json.hpp>
#include <map>
#include <optional>
#include <vector>

#include "hinfty/errors.hpp"

namespace hinf {

using Scalar = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using json = nlohmann::json;

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr Scalar kI{0.0, 1.0};

struct SpaceSpec;

struct EigenDecomposition {
    Vector values;
    Matrix vectors;   // right eigenvectors, columns
    Matrix inverse;   // vectors^{-1}, rows are left eigenvectors
};

// Dense square matrix with spectral metadata computed once at construction.
class Operator {
public:
    Operator() = default;
    explicit Operator(Matrix entries);

    static Operator diagonal(const Vector& d);
    static Operator from_json(const json& j);
    json to_json() const;

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& matrix() const { return entries_; }
    const Vector& eigenvalues() const { return eigenvalues_; }
    const std::optional<EigenDecomposition>& eig() const { return eig_; }
    bool is_normal() const { return normal_; }
    bool is_injective() const { return min_singular_ > 0.0; }
    double min_singular_value() const { return min_singular_; }
    double norm() const { return norm2_; }
    double frobenius() const { return entries_.norm(); }

    // max |arg λ| over the spectrum; zero eigenvalues are ignored when
    // `skip_zero` is set.
    double spectral_angle(bool skip_zero = false) const;
    double spectral_width() const;  // max |Re λ|
    double min_modulus() const;     // smallest nonzero |λ|
    double max_modulus() const;

    // Apply a scalar function through the cached eigendecomposition.
    Matrix eig_apply(const std::function<Scalar(Scalar)>& f) const;

private:
    Matrix entries_;
    Vector eigenvalues_;
    std::optional<EigenDecomposition> eig_;
    bool normal_ = false;
    double min_singular_ = 0.0;
    double norm2_ = 0.0;
};

// (λI − A)^{-1}
Matrix resolvent(const Operator& a, Scalar lambda);

struct SectorProfile {
    double omega_spec = 0.0;
    // Sampled maxima; each entry is a lower bound for the true supremum.
    std::map<double, double> sup_bound;
    std::map<double, double> r_bound;
    std::map<double, double> almost_r_bound;
};

struct SectorProfileOptions {
    int nodes_per_decade = 40;
    double decades_beyond = 6.0;
    bool with_r_bounds = true;
    int r_family_size = 24;
    int r_m_max = 4;
    int r_restarts = 6;
    std::uint64_t seed = 1;
};

SectorProfile sector_profile(const Operator& a, const std::vector<double>& angles,
                             int rays_per_angle, const SpaceSpec& space,
                             const SectorProfileOptions& opts = {});

struct StripProfile {
    double w_spec = 0.0;
    std::map<double, double> resolvent_bound;  // b → sampled sup ‖R(λ)‖, |Re λ| ≥ b
};

StripProfile strip_profile(const Operator& b, const std::vector<double>& widths,
                           int nodes_per_decade = 40);

// Induced ℓp → ℓp norm; exact for p ∈ {1, 2, ∞}, a lower bound otherwise
// (power iteration on the duality map). The witness attains the value.
struct NormWitness {
    double value = 0.0;
    Vector x;
};
NormWitness operator_norm_witness(const Matrix& t, double p, std::uint64_t seed = 7);
double operator_norm(const Matrix& t, double p);

Matrix matrix_from_json(const json& j);
json matrix_to_json(const Matrix& m);

}  // namespace hinf
