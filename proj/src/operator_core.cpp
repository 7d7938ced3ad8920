#include "hinfty/operator_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "hinfty/banach_geometry.hpp"

namespace hinf {

namespace {

bool all_finite(const Matrix& m) {
    return m.real().allFinite() && m.imag().allFinite();
}

std::vector<double> log_nodes(double lo, double hi, int per_decade) {
    const double dlo = std::log10(lo), dhi = std::log10(hi);
    const int count = std::max(2, static_cast<int>(std::ceil((dhi - dlo) * per_decade)) + 1);
    std::vector<double> out(count);
    for (int k = 0; k < count; ++k)
        out[k] = std::pow(10.0, dlo + (dhi - dlo) * k / (count - 1));
    return out;
}

}  // namespace

Operator::Operator(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols() || entries_.rows() == 0)
        throw std::invalid_argument("operator must be a nonempty square matrix");
    if (!all_finite(entries_)) throw std::invalid_argument("operator entries must be finite");

    Eigen::JacobiSVD<Matrix> svd(entries_);
    const auto& sv = svd.singularValues();
    norm2_ = sv(0);
    min_singular_ = sv(sv.size() - 1);

    Eigen::ComplexEigenSolver<Matrix> es(entries_);
    eigenvalues_ = es.eigenvalues();
    const double fro = entries_.norm();
    if (es.info() == Eigen::Success) {
        Eigen::PartialPivLU<Matrix> lu(es.eigenvectors());
        Matrix inv = lu.inverse();
        const double cond = es.eigenvectors().norm() * inv.norm();
        Matrix rebuilt = es.eigenvectors() * eigenvalues_.asDiagonal() * inv;
        if (all_finite(inv) && cond < 1e8 && (rebuilt - entries_).norm() <= 1e-10 * std::max(fro, 1e-300))
            eig_ = EigenDecomposition{eigenvalues_, es.eigenvectors(), std::move(inv)};
    }
    if (fro == 0.0 && !eig_) {
        const int n = dim();
        eig_ = EigenDecomposition{eigenvalues_, Matrix::Identity(n, n), Matrix::Identity(n, n)};
    }

    Matrix ah = entries_.adjoint();
    normal_ = (ah * entries_ - entries_ * ah).norm() <= 1e-12 * fro * fro;
}

Operator Operator::diagonal(const Vector& d) {
    return Operator(Matrix(d.asDiagonal()));
}

Operator Operator::from_json(const json& j) {
    return Operator(matrix_from_json(j));
}

json Operator::to_json() const {
    return matrix_to_json(entries_);
}

double Operator::spectral_angle(bool skip_zero) const {
    const double tiny = 1e-14 * std::max(norm2_, 1e-300);
    double angle = 0.0;
    for (Scalar l : eigenvalues_) {
        if (std::abs(l) <= tiny) {
            if (skip_zero) continue;
            return kPi;
        }
        angle = std::max(angle, std::abs(std::arg(l)));
    }
    return angle;
}

double Operator::spectral_width() const {
    double w = 0.0;
    for (Scalar l : eigenvalues_) w = std::max(w, std::abs(l.real()));
    return w;
}

double Operator::min_modulus() const {
    const double tiny = 1e-14 * std::max(norm2_, 1e-300);
    double m = kInf;
    for (Scalar l : eigenvalues_)
        if (std::abs(l) > tiny) m = std::min(m, std::abs(l));
    return std::isfinite(m) ? m : 1.0;
}

double Operator::max_modulus() const {
    double m = 0.0;
    for (Scalar l : eigenvalues_) m = std::max(m, std::abs(l));
    return m;
}

Matrix Operator::eig_apply(const std::function<Scalar(Scalar)>& f) const {
    if (!eig_) throw Error("operator has no reliable eigendecomposition");
    Vector fv(dim());
    for (int k = 0; k < dim(); ++k) fv(k) = f(eig_->values(k));
    return eig_->vectors * fv.asDiagonal() * eig_->inverse;
}

Matrix resolvent(const Operator& a, Scalar lambda) {
    const int n = a.dim();
    Matrix shifted = lambda * Matrix::Identity(n, n) - a.matrix();
    const double threshold = 1e-12 * (std::abs(lambda) + a.norm());

    Eigen::PartialPivLU<Matrix> lu(shifted);
    Matrix inv = lu.inverse();
    bool ok = all_finite(inv);
    // 1/‖inv‖_F is a lower bound for the smallest singular value.
    if (ok && 1.0 / inv.norm() <= threshold) {
        Eigen::JacobiSVD<Matrix> svd(shifted);
        ok = svd.singularValues()(n - 1) > threshold;
    }
    if (!ok) throw SpectrumHit("resolvent evaluated too close to the spectrum");

    const Matrix eye = Matrix::Identity(n, n);
    Matrix residual = eye - shifted * inv;
    if (residual.norm() > 1e-12 * n) {
        inv += inv * residual;
        residual = eye - shifted * inv;
    }
    if (residual.norm() > 1e-10 * n) throw SpectrumHit("resolvent solve is not accurate");
    return inv;
}

SectorProfile sector_profile(const Operator& a, const std::vector<double>& angles,
                             int rays_per_angle, const SpaceSpec& space,
                             const SectorProfileOptions& opts) {
    if (!a.is_injective()) throw NotSectorial("operator is not injective");
    SectorProfile prof;
    prof.omega_spec = a.spectral_angle();
    if (prof.omega_spec >= kPi) throw NotSectorial("spectrum meets the negative real axis");

    const double decades = std::pow(10.0, opts.decades_beyond);
    const auto radii = log_nodes(a.min_modulus() / decades, a.max_modulus() * decades,
                                 opts.nodes_per_decade);

    std::vector<double> sorted(angles.begin(), angles.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double running = 0.0;
    std::uint64_t salt = 0;
    for (double sigma : sorted) {
        if (sigma <= prof.omega_spec || sigma > kPi) continue;
        std::vector<double> ray_angles;
        const int rays = std::max(1, rays_per_angle);
        for (int k = 0; k < rays; ++k)
            ray_angles.push_back(rays == 1 ? sigma : sigma + k * (kPi - sigma) / (rays - 1));

        double raw = 0.0;
        Scalar best_lambda = 0.0;
        for (double th : ray_angles)
            for (int sign : {-1, 1}) {
                if (sign < 0 && th == kPi) continue;
                for (double r : radii) {
                    Scalar lam = std::polar(r, sign * th);
                    double v = (lam * resolvent(a, lam)).jacobiSvd().singularValues()(0);
                    if (v > raw) {
                        raw = v;
                        best_lambda = lam;
                    }
                }
            }
        running = std::max(running, raw);
        prof.sup_bound[sigma] = running;

        if (!opts.with_r_bounds) continue;
        std::vector<Matrix> fam_r, fam_almost;
        auto add = [&](Scalar lam) {
            Matrix r = resolvent(a, lam);
            fam_r.push_back(lam * r);
            fam_almost.push_back(lam * a.matrix() * r * r);
        };
        add(best_lambda);
        const int per_ray = std::max(2, opts.r_family_size / 2);
        for (int sign : {-1, 1})
            for (int k = 0; k < per_ray; ++k) {
                double r = radii.front() * std::pow(radii.back() / radii.front(),
                                                    static_cast<double>(k) / (per_ray - 1));
                add(std::polar(r, sign * sigma));
            }
        BoundOptions bo;
        bo.m_max = opts.r_m_max;
        bo.restarts = opts.r_restarts;
        bo.seed = opts.seed + (salt++);
        prof.r_bound[sigma] = bound_estimate(fam_r, space, BoundKind::r, bo).estimate.value;
        prof.almost_r_bound[sigma] = bound_estimate(fam_almost, space, BoundKind::r, bo).estimate.value;
    }
    return prof;
}

StripProfile strip_profile(const Operator& b, const std::vector<double>& widths,
                           int nodes_per_decade) {
    StripProfile prof;
    prof.w_spec = b.spectral_width();
    const double top = 1e6 * (1.0 + b.norm());
    std::vector<double> heights{0.0};
    for (double h : log_nodes(1e-6 * (1.0 + b.norm()), top, nodes_per_decade)) {
        heights.push_back(h);
        heights.push_back(-h);
    }
    for (Scalar l : b.eigenvalues()) heights.push_back(l.imag());

    std::vector<double> sorted(widths.begin(), widths.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    double running = 0.0;
    for (double w : sorted) {
        if (w <= prof.w_spec) continue;
        for (int sign : {-1, 1})
            for (double h : heights) {
                Scalar lam(sign * w, h);
                running = std::max(running, resolvent(b, lam).jacobiSvd().singularValues()(0));
            }
        prof.resolvent_bound[w] = running;
    }
    return prof;
}

NormWitness operator_norm_witness(const Matrix& t, double p, std::uint64_t seed) {
    const int n = static_cast<int>(t.cols());
    NormWitness out;
    out.x = Vector::Zero(n);
    if (n == 0) return out;
    if (p == 2.0) {
        Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeThinV);
        out.value = svd.singularValues()(0);
        out.x = svd.matrixV().col(0);
        return out;
    }
    if (p == 1.0) {
        Eigen::Index j = 0;
        out.value = t.cwiseAbs().colwise().sum().maxCoeff(&j);
        out.x(j) = 1.0;
        return out;
    }
    if (std::isinf(p)) {
        Eigen::Index i = 0;
        out.value = t.cwiseAbs().rowwise().sum().maxCoeff(&i);
        for (int j = 0; j < n; ++j) {
            const double m = std::abs(t(i, j));
            out.x(j) = m > 0 ? std::conj(t(i, j)) / m : Scalar(1.0);
        }
        return out;
    }

    const double q = conjugate_exponent(p);
    std::vector<Vector> starts;
    starts.push_back(Vector::Ones(n));
    {
        Eigen::Index j = 0;
        RealVector cn(n);
        for (int c = 0; c < n; ++c) cn(c) = lp_norm(t.col(c), p);
        cn.maxCoeff(&j);
        Vector e = Vector::Zero(n);
        e(j) = 1.0;
        starts.push_back(e);
    }
    {
        Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeThinV);
        starts.push_back(svd.matrixV().col(0));
    }
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    for (int k = 0; k < 24; ++k) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v(i) = Scalar(nd(rng), nd(rng));
        starts.push_back(v);
    }

    const Matrix tt = t.transpose();
    for (Vector x : starts) {
        x /= lp_norm(x, p);
        for (int it = 0; it < 100; ++it) {
            Vector y = t * x;
            const double val = lp_norm(y, p);
            if (val > out.value) {
                out.value = val;
                out.x = x;
            }
            if (val == 0.0) break;
            Vector z = tt * duality_map(y, p);
            const double zq = lp_norm(z, q);
            if (zq <= std::abs(z.dot(x.conjugate())) * (1.0 + 1e-12)) break;
            x = duality_map(z, q);
        }
    }
    return out;
}

double operator_norm(const Matrix& t, double p) {
    return operator_norm_witness(t, p).value;
}

Matrix matrix_from_json(const json& j) {
    if (!j.is_object()) throw std::invalid_argument("matrix JSON must be an object");
    if (j.contains("diag_re")) {
        const auto re = j.at("diag_re").get<std::vector<double>>();
        std::vector<double> im(re.size(), 0.0);
        if (j.contains("diag_im")) im = j.at("diag_im").get<std::vector<double>>();
        if (im.size() != re.size()) throw std::invalid_argument("diag_re/diag_im size mismatch");
        Vector d(re.size());
        for (size_t k = 0; k < re.size(); ++k) d(k) = Scalar(re[k], im[k]);
        return d.asDiagonal();
    }
    const auto re = j.at("re").get<std::vector<std::vector<double>>>();
    std::vector<std::vector<double>> im;
    if (j.contains("im")) im = j.at("im").get<std::vector<std::vector<double>>>();
    const size_t rows = re.size();
    const size_t cols = rows ? re[0].size() : 0;
    if (j.contains("dim") && (j.at("dim").get<size_t>() != rows || cols != rows))
        throw std::invalid_argument("matrix shape does not match dim");
    Matrix m(rows, cols);
    for (size_t r = 0; r < rows; ++r) {
        if (re[r].size() != cols) throw std::invalid_argument("ragged matrix rows");
        for (size_t c = 0; c < cols; ++c) {
            double ip = 0.0;
            if (!im.empty()) {
                if (im.size() != rows || im[r].size() != cols)
                    throw std::invalid_argument("re/im shape mismatch");
                ip = im[r][c];
            }
            m(r, c) = Scalar(re[r][c], ip);
        }
    }
    return m;
}

json matrix_to_json(const Matrix& m) {
    json re = json::array(), im = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json rr = json::array(), ri = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            rr.push_back(m(r, c).real());
            ri.push_back(m(r, c).imag());
        }
        re.push_back(rr);
        im.push_back(ri);
    }
    json out{{"re", re}, {"im", im}};
    if (m.rows() == m.cols()) out["dim"] = m.rows();
    return out;
}

}  // namespace hinf
