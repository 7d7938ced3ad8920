#include "hinfty/functional_calculus.hpp"

#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <cmath>
#include <mutex>
#include <random>
#include <stdexcept>

namespace hinf {

std::string to_string(DomainKind d) { return d == DomainKind::sector ? "sector" : "strip"; }

std::string to_string(FunctionClass c) {
    switch (c) {
        case FunctionClass::h0: return "H0";
        case FunctionClass::h1: return "H1";
        case FunctionClass::hinf: return "Hinf";
    }
    return "Hinf";
}

std::string to_string(PowerMethod m) {
    switch (m) {
        case PowerMethod::eig: return "eig";
        case PowerMethod::dunford_regularized: return "dunford-regularized";
        case PowerMethod::balakrishnan: return "balakrishnan";
    }
    return "eig";
}

namespace {

const double kLn10 = std::log(10.0);

bool finite(Scalar z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

// Boundary point of the function's domain: sector rays at ±σ (radius r),
// strip lines at ±a (height y). Sectors with σ ≥ π are sampled just inside the
// cut, where functions analytic off (−∞, 0] may have their singularities.
Scalar boundary_point(const HFunction& f, double param, int side) {
    if (f.domain == DomainKind::sector) return std::polar(param, side * std::min(f.angle, kPi - 0.05));
    return Scalar(side * f.angle, param);
}

// Max of g over a sorted parameter grid, refined by golden-section search
// around the best few grid maxima.
double refined_max(const std::function<double(double)>& g, const std::vector<double>& grid) {
    std::vector<double> v(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) v[i] = g(grid[i]);
    std::vector<std::size_t> peaks;
    for (std::size_t i = 1; i + 1 < grid.size(); ++i)
        if (v[i] >= v[i - 1] && v[i] >= v[i + 1]) peaks.push_back(i);
    std::sort(peaks.begin(), peaks.end(), [&](auto a, auto b) { return v[a] > v[b]; });
    double best = *std::max_element(v.begin(), v.end());
    const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
    for (std::size_t q = 0; q < std::min<std::size_t>(peaks.size(), 4); ++q) {
        double lo = grid[peaks[q] - 1], hi = grid[peaks[q] + 1];
        double x1 = hi - ratio * (hi - lo), x2 = lo + ratio * (hi - lo);
        double f1 = g(x1), f2 = g(x2);
        for (int it = 0; it < 60; ++it) {
            if (f1 > f2) {
                hi = x2; x2 = x1; f2 = f1; x1 = hi - ratio * (hi - lo); f1 = g(x1);
            } else {
                lo = x1; x1 = x2; f1 = f2; x2 = lo + ratio * (hi - lo); f2 = g(x2);
            }
        }
        best = std::max({best, f1, f2});
    }
    return best;
}

Matrix identity(int n) { return Matrix::Identity(n, n); }

// Plain LU inverse of zI − A; contour nodes stay a fixed angular distance
// away from the spectrum so no refinement is needed.
Matrix fast_resolvent(const Matrix& a, Scalar z) {
    Matrix shifted = z * identity(static_cast<int>(a.rows())) - a;
    return Eigen::PartialPivLU<Matrix>(shifted).inverse();
}

double op_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    return Eigen::JacobiSVD<Matrix>(m).singularValues()(0);
}

}  // namespace

double HFunction::sup_norm_estimate() const {
    // Sector rays are sampled in log-radius, strip lines in height.
    std::vector<double> grid;
    for (int k = -1000; k <= 1000; ++k) grid.push_back(k * 0.025);
    double best = 0.0;
    for (int side : {-1, 1}) {
        auto g = [&](double s) {
            return std::abs(eval(boundary_point(*this, domain == DomainKind::sector ? std::exp(s) : s, side)));
        };
        best = std::max(best, refined_max(g, grid));
    }
    return best;
}

void HFunction::validate() const {
    if (!eval) throw std::invalid_argument("function has no evaluator");
    for (int side : {-1, 1})
        for (int k = 0; k < 32; ++k) {
            const double param = domain == DomainKind::sector ? std::pow(10.0, -4.0 + 8.0 * k / 31.0) : -20.0 + 40.0 * k / 31.0;
            if (!finite(eval(boundary_point(*this, param, side))))
                throw std::invalid_argument(name + ": not finite on the domain boundary");
        }
    if (cls != FunctionClass::h0 || decay <= 0.0) return;
    // |f|·weight^{-decay} must stay bounded; compare the window edges against the middle.
    auto ratio = [&](double param, int side) {
        const Scalar z = boundary_point(*this, param, side);
        const double weight = domain == DomainKind::sector
                                  ? std::pow(std::min(std::abs(z), 1.0 / std::abs(z)), decay)
                                  : std::exp(-decay * std::abs(param));
        return std::abs(eval(z)) / weight;
    };
    double middle = 1e-300, edge = 0.0;
    for (int side : {-1, 1})
        for (int k = -60; k <= 60; ++k) {
            const double s = k / 10.0;  // decades, or heights in units of 10/decay
            const double param = domain == DomainKind::sector ? std::pow(10.0, s) : s * 2.0 / decay;
            const double r = ratio(param, side);
            if (std::abs(k) <= 20) middle = std::max(middle, r);
            else edge = std::max(edge, r);
        }
    if (edge > 100.0 * middle) throw std::invalid_argument(name + ": declared decay not observed");
}

HFunction product(const HFunction& f, const HFunction& g) {
    if (f.domain != g.domain) throw AngleConflict("product of functions on different domain kinds");
    HFunction h;
    h.name = f.name + "*" + g.name;
    h.eval = [a = f.eval, b = g.eval](Scalar z) { return a(z) * b(z); };
    h.domain = f.domain;
    h.angle = std::min(f.angle, g.angle);
    if (f.cls == FunctionClass::h0 || g.cls == FunctionClass::h0) h.cls = FunctionClass::h0;
    else if (f.cls == FunctionClass::h1 || g.cls == FunctionClass::h1) h.cls = FunctionClass::h1;
    else h.cls = FunctionClass::hinf;
    h.decay = f.decay + g.decay;
    h.params = json{{"factors", json::array({f.params, g.params})}};
    return h;
}

HFunction lift_to_strip(const HFunction& f) {
    if (f.domain != DomainKind::sector) throw AngleConflict("only sector functions can be lifted");
    HFunction h = f;
    h.name = "lifted:" + f.name;
    h.domain = DomainKind::strip;
    h.eval = [g = f.eval](Scalar z) {
        // Far out on the lines e^{iz} leaves the double range; H0 functions vanish there.
        if (std::abs(z.imag()) > 700.0) return Scalar(0.0);
        return g(std::exp(kI * z));
    };
    h.params = json{{"lifted", f.params}};
    return h;
}

namespace {

HFunction make(std::string name, std::function<Scalar(Scalar)> eval, DomainKind d, double angle, FunctionClass c,
               double decay, json params) {
    HFunction f;
    f.name = std::move(name);
    f.eval = std::move(eval);
    f.domain = d;
    f.angle = angle;
    f.cls = c;
    f.decay = decay;
    f.params = std::move(params);
    return f;
}

Scalar read_complex(const json& j) {
    if (j.is_number()) return j.get<double>();
    return Scalar(j.at(0).get<double>(), j.at(1).get<double>());
}

HFunction rational(std::vector<Scalar> zeros, std::vector<Scalar> poles, Scalar scale, double angle) {
    if (poles.size() != zeros.size() + 2) throw std::invalid_argument("rational H0 function needs #poles = #zeros + 2");
    json pj = json::array(), zj = json::array();
    for (Scalar z : zeros) zj.push_back({z.real(), z.imag()});
    for (Scalar p : poles) pj.push_back({p.real(), p.imag()});
    auto eval = [zeros, poles, scale](Scalar l) {
        Scalar v = scale * l;
        // interleave factors so large |λ| does not overflow
        for (std::size_t k = 0; k < poles.size(); ++k) {
            if (k < zeros.size()) v *= (l - zeros[k]);
            v /= (l - poles[k]);
        }
        return v;
    };
    return make("rational", eval, DomainKind::sector, angle, FunctionClass::h0, 1.0,
                json{{"name", "rational"}, {"zeros", zj}, {"poles", pj}, {"scale", {scale.real(), scale.imag()}}, {"angle", angle}});
}

}  // namespace

HFunction make_function(const std::string& name, const json& params) {
    auto num = [&](const char* key, double dflt) { return params.contains(key) ? params.at(key).get<double>() : dflt; };
    json tagged = params;
    tagged["name"] = name;
    if (name == "phi")
        return make(name, [](Scalar l) { return l / ((1.0 + l) * (1.0 + l)); }, DomainKind::sector, kPi, FunctionClass::h0, 1.0, tagged);
    if (name == "sqrt_resolvent")
        return make(name, [](Scalar l) { return std::sqrt(l) / (1.0 + l); }, DomainKind::sector, kPi, FunctionClass::h0, 0.5, tagged);
    if (name == "power_ratio") {
        const double al = num("alpha", 0.5), be = num("beta", 1.0);
        if (!(al > 0.0 && be > al)) throw std::invalid_argument("power_ratio needs 0 < alpha < beta");
        return make(name, [al, be](Scalar l) { return std::pow(l, al) * std::pow(1.0 + l, -be); }, DomainKind::sector, kPi,
                    FunctionClass::h0, std::min(al, be - al), tagged);
    }
    if (name == "g_beta") {
        const double be = num("beta", 1.0);
        if (!(be > 0.0)) throw std::invalid_argument("g_beta needs beta > 0");
        return make(name, [be](Scalar l) { return std::pow(l, be) * std::exp(-l); }, DomainKind::sector, num("angle", 1.4),
                    FunctionClass::h0, be, tagged);
    }
    if (name == "rho") {
        const double n = num("n", 10.0);
        return make(name, [n](Scalar l) { return n / (n + l) - 1.0 / (1.0 + n * l); }, DomainKind::sector, kPi, FunctionClass::h0,
                    1.0, tagged);
    }
    if (name == "imaginary_power") {
        const double s = num("s", 1.0);
        return make(name, [s](Scalar l) { return std::exp(kI * s * std::log(l)); }, DomainKind::sector, num("angle", kPi),
                    FunctionClass::hinf, 0.0, tagged);
    }
    if (name == "group") {
        const double t = num("t", 1.0);
        return make(name, [t](Scalar l) { return std::exp(t * l); }, DomainKind::strip, num("a", 1.0), FunctionClass::hinf, 0.0,
                    tagged);
    }
    if (name == "rational") {
        std::vector<Scalar> zeros, poles;
        for (const auto& z : params.value("zeros", json::array())) zeros.push_back(read_complex(z));
        for (const auto& p : params.value("poles", json::array())) poles.push_back(read_complex(p));
        return rational(zeros, poles, params.contains("scale") ? read_complex(params.at("scale")) : Scalar(1.0), num("angle", kPi));
    }
    if (name == "lifted") return lift_to_strip(make_function(params.at("base").at("name"), params.at("base")));
    throw std::invalid_argument("unknown function name: " + name);
}

std::vector<HFunction> sector_test_pack(int size, double sigma, std::uint64_t seed) {
    if (!(sigma > 0.0 && sigma < kPi)) throw AngleConflict("test pack sector must be proper");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::vector<HFunction> pack;
    for (int i = 0; i < size; ++i) {
        const int poles_count = 2 + i % 5;  // degree ≤ 6
        std::vector<Scalar> zeros, poles;
        for (int k = 0; k < poles_count; ++k) {
            const double r = std::pow(10.0, -1.5 + 3.0 * uni(rng));
            const double gap = sigma + (0.15 + 0.85 * uni(rng)) * (kPi - sigma);
            poles.push_back(std::polar(r, uni(rng) < 0.5 ? gap : -gap));
        }
        for (int k = 0; k + 2 < poles_count; ++k)
            zeros.push_back(std::polar(std::pow(10.0, -1.5 + 3.0 * uni(rng)), kPi * (2.0 * uni(rng) - 1.0)));
        HFunction f = rational(zeros, poles, 1.0, sigma);
        const double sup = f.sup_norm_estimate();
        f = rational(zeros, poles, 1.0 / sup, sigma);
        f.name = "pack" + std::to_string(i);
        f.params["pack_index"] = i;
        f.params["seed"] = seed;
        pack.push_back(std::move(f));
    }
    return pack;
}

std::vector<HFunction> strip_test_pack(int size, double a, std::uint64_t seed) {
    const int groups = std::min(size, 6);
    std::vector<HFunction> pack;
    for (auto& f : sector_test_pack(size - groups, std::min(a, kPi - 1e-3), seed)) {
        HFunction g = lift_to_strip(f);
        g.angle = a;
        pack.push_back(std::move(g));
    }
    const double times[] = {0.5, -0.5, 1.0, -1.0, 2.0, -2.0};
    for (int k = 0; k < groups; ++k) {
        const double t = times[k];
        HFunction g = make("group", [t, a](Scalar l) { return std::exp(t * l - std::abs(t) * a); }, DomainKind::strip, a,
                           FunctionClass::hinf, 0.0, json{{"name", "group"}, {"t", t}, {"a", a}, {"normalized", true}});
        pack.push_back(std::move(g));
    }
    return pack;
}

json ContourSpec::to_json() const {
    return json{{"kind", hinf::to_string(kind)},       {"angle", angle},
                {"nodes_per_decade", nodes_per_decade}, {"window_decades", window_decades},
                {"max_extra_decades", max_extra_decades}, {"tail_tolerance", tail_tolerance},
                {"strip_step", strip_step}};
}

namespace {

// Integration lattice: node pairs at u_k = k·h on both contour branches.
struct Lattice {
    DomainKind kind = DomainKind::sector;
    double angle = 0.0;  // γ or b
    double h = 0.0;
    double yc = 0.0, scale = 1.0;  // strip sinh map
    long k_lo = 0, k_hi = 0;
    long block = 1;
    long max_blocks = 0;
    long k_min = 0, k_max = 0;  // hard limits

    void nodes(long k, Scalar z[2], Scalar dz[2]) const {
        const double u = k * h;
        if (kind == DomainKind::sector) {
            const double r = std::exp(u);
            z[0] = std::polar(r, -angle);
            dz[0] = z[0] * h;
            z[1] = std::polar(r, angle);
            dz[1] = -z[1] * h;
        } else {
            const double y = yc + scale * std::sinh(u);
            const double w = scale * std::cosh(u) * h;
            z[0] = Scalar(angle, y);
            dz[0] = kI * w;
            z[1] = Scalar(-angle, y);
            dz[1] = -kI * w;
        }
    }
};

Lattice make_lattice(const Operator& a, DomainKind kind, double function_angle, const ContourSpec& spec, double window) {
    Lattice lat;
    lat.kind = kind;
    if (kind == DomainKind::sector) {
        const double omega = a.spectral_angle(true);
        if (!(function_angle > omega)) throw AngleConflict("function sector does not contain the spectrum");
        lat.angle = spec.angle > 0.0 ? spec.angle : 0.5 * (omega + function_angle);
        if (!(lat.angle > omega && lat.angle < function_angle)) throw AngleConflict("contour angle outside (ω(A), σ)");
        if (lat.angle >= kPi) throw AngleConflict("contour angle must be below π");
        lat.h = kLn10 / spec.nodes_per_decade;
        const double rmin = a.min_modulus(), rmax = std::max(a.max_modulus(), rmin);
        lat.k_lo = static_cast<long>(std::floor((std::log(rmin) - window * kLn10) / lat.h));
        lat.k_hi = static_cast<long>(std::ceil((std::log(rmax) + window * kLn10) / lat.h));
        lat.block = spec.nodes_per_decade;
        lat.max_blocks = static_cast<long>(spec.max_extra_decades);
        lat.k_min = static_cast<long>(std::floor(-690.0 / lat.h));
        lat.k_max = -lat.k_min;
    } else {
        const double w = a.spectral_width();
        if (!(function_angle > w)) throw AngleConflict("function strip does not contain the spectrum");
        lat.angle = spec.angle > 0.0 ? spec.angle : 0.5 * (w + function_angle);
        if (!(lat.angle > w && lat.angle < function_angle)) throw AngleConflict("contour line outside (w(B), a)");
        const double d = std::min(lat.angle - w, function_angle - lat.angle);
        double ylo = kInf, yhi = -kInf;
        for (Scalar l : a.eigenvalues()) {
            ylo = std::min(ylo, l.imag());
            yhi = std::max(yhi, l.imag());
        }
        lat.yc = 0.5 * (ylo + yhi);
        const double spread = 0.5 * (yhi - ylo);
        lat.scale = std::max(d, spread);
        lat.h = spec.strip_step > 0.0 ? spec.strip_step
                                      : std::min(0.1, 2.0 * kPi * (d / std::hypot(lat.scale, spread + d)) / 36.0);
        // Window in height: spread plus 15 units per "decade" of the sector analogue.
        const double reach = spread + d + 15.0 * window;
        const long k_end = static_cast<long>(std::ceil(std::asinh(reach / lat.scale) / lat.h));
        lat.k_lo = -k_end;
        lat.k_hi = k_end;
        lat.block = std::max(1L, static_cast<long>(std::lround(0.5 / lat.h)));
        lat.k_max = static_cast<long>(std::floor(std::asinh(690.0 / lat.scale) / lat.h));
        lat.k_min = -lat.k_max;
        lat.max_blocks = (lat.k_max - k_end) / lat.block;
        lat.k_lo = std::max(lat.k_lo, lat.k_min);
        lat.k_hi = std::min(lat.k_hi, lat.k_max);
    }
    return lat;
}

using TermFn = std::function<Matrix(Scalar z, Scalar dz)>;

Matrix lattice_sum(const Lattice& lat, long from, long to, const TermFn& term, int n) {
    Matrix s = Matrix::Zero(n, n);
    Scalar z[2], dz[2];
    for (long k = from; k <= to; ++k) {
        lat.nodes(k, z, dz);
        s += term(z[0], dz[0]);
        s += term(z[1], dz[1]);
    }
    return s;
}

// Trapezoid sum over the lattice, extended block by block on each side until
// the outermost block is below the tolerance relative to the total.
Matrix adaptive_integral(const Lattice& lat, const ContourSpec& spec, const TermFn& term, int n) {
    Matrix total = lattice_sum(lat, lat.k_lo, lat.k_hi, term, n);
    double mass = total.norm();
    long lo = lat.k_lo, hi = lat.k_hi;
    for (int side : {-1, 1}) {
        for (long b = 1;; ++b) {
            const long from = side < 0 ? lo - lat.block : hi + 1;
            const long to = side < 0 ? lo - 1 : hi + lat.block;
            if ((side < 0 && from < lat.k_min) || (side > 0 && to > lat.k_max) || b > lat.max_blocks) {
                throw TailNotConverged("contour tail did not converge within the window cap");
            }
            Matrix blk = lattice_sum(lat, from, to, term, n);
            total += blk;
            if (side < 0) lo = from;
            else hi = to;
            mass = std::max(mass, total.norm());
            const double ref = std::max(total.norm(), 1e-6 * mass);
            if (blk.norm() <= spec.tail_tolerance * ref || (blk.norm() == 0.0 && ref == 0.0)) break;
            if (b == lat.max_blocks && blk.norm() <= 1e-8 * ref) break;
        }
    }
    return total;
}

TermFn scalar_term(const Matrix& a, const std::function<Scalar(Scalar)>& f) {
    return [&a, f](Scalar z, Scalar dz) -> Matrix {
        const Scalar v = f(z);
        if (v == 0.0) return Matrix::Zero(a.rows(), a.cols());
        if (!finite(v)) throw TailNotConverged("function not finite on the contour");
        return (v * dz / (2.0 * kPi * kI)) * fast_resolvent(a, z);
    };
}

void require_integrable(const HFunction& f) {
    if (f.cls == FunctionClass::hinf)
        throw std::invalid_argument(f.name + ": bounded functions need the regularized calculus");
}

Matrix phi_inverse(const Operator& a) {
    if (!a.is_injective()) throw NotSectorial("operator is not injective");
    const int n = a.dim();
    return 2.0 * identity(n) + a.matrix() + a.matrix().inverse();
}

}  // namespace

ContourCache::ContourCache(const Operator& a, DomainKind kind, double function_angle, ContourSpec spec,
                           double window_decades)
    : a_(a), kind_(kind) {
    spec.kind = kind;
    const Lattice lat = make_lattice(a, kind, function_angle, spec, window_decades);
    angle_ = lat.angle;
    Scalar z[2], dz[2];
    for (long k = lat.k_lo; k <= lat.k_hi; ++k) {
        lat.nodes(k, z, dz);
        const int blk = k < lat.k_lo + lat.block ? -1 : (k > lat.k_hi - lat.block ? 1 : 0);
        for (int s = 0; s < 2; ++s) {
            z_.push_back(z[s]);
            dz_.push_back(dz[s]);
            block_.push_back(blk);
        }
    }
    if (a.dim() <= 16) {
        res_.reserve(z_.size());
        for (Scalar node : z_) res_.push_back(fast_resolvent(a.matrix(), node));
    }
}

Matrix ContourCache::resolvent_at(std::size_t j) const {
    return res_.empty() ? fast_resolvent(a_.matrix(), z_[j]) : res_[j];
}

Matrix ContourCache::integrate(const std::function<Matrix(Scalar)>& f) const {
    const int n = a_.dim();
    Matrix total = Matrix::Zero(n, n), tail_lo = total, tail_hi = total;
    for (std::size_t j = 0; j < z_.size(); ++j) {
        Matrix w = f(z_[j]);
        if (w.isZero(0.0)) continue;
        Matrix term = (dz_[j] / (2.0 * kPi * kI)) * (w * resolvent_at(j));
        total += term;
        if (block_[j] < 0) tail_lo += term;
        if (block_[j] > 0) tail_hi += term;
    }
    const double ref = total.norm();
    if (std::max(tail_lo.norm(), tail_hi.norm()) > 1e-8 * std::max(ref, 1e-300) && ref > 0.0)
        throw TailNotConverged("cached contour window too short for this function");
    return total;
}

Matrix ContourCache::integrate(const std::function<Scalar(Scalar)>& f) const {
    const int n = a_.dim();
    Matrix total = Matrix::Zero(n, n), tail_lo = total, tail_hi = total;
    for (std::size_t j = 0; j < z_.size(); ++j) {
        const Scalar v = f(z_[j]);
        if (v == 0.0) continue;
        if (!finite(v)) throw TailNotConverged("function not finite on the contour");
        Matrix term = (v * dz_[j] / (2.0 * kPi * kI)) * resolvent_at(j);
        total += term;
        if (block_[j] < 0) tail_lo += term;
        if (block_[j] > 0) tail_hi += term;
    }
    const double ref = total.norm();
    if (std::max(tail_lo.norm(), tail_hi.norm()) > 1e-8 * std::max(ref, 1e-300) && ref > 0.0)
        throw TailNotConverged("cached contour window too short for this function");
    return total;
}

Matrix dunford(const HFunction& f, const Operator& a, const ContourSpec& spec_in) {
    require_integrable(f);
    ContourSpec spec = spec_in;
    spec.kind = f.domain;
    const int n = a.dim();
    if (f.domain == DomainKind::sector && a.max_modulus() == 0.0) return Matrix::Zero(n, n);  // f(0) = 0 for H0
    const Lattice lat = make_lattice(a, f.domain, f.angle, spec, spec.window_decades);
    return adaptive_integral(lat, spec, scalar_term(a.matrix(), f.eval), n);
}

Matrix calculus(const HFunction& f, const Operator& a, const ContourSpec& spec) {
    if (f.cls != FunctionClass::hinf) return dunford(f, a, spec);
    if (f.domain == DomainKind::sector) {
        const HFunction reg = product(make_function("phi"), f);
        return phi_inverse(a) * dunford(reg, a, spec);
    }
    // Strip regularizer 1/cos²(κλ) is H0 on S(2a); its inverse is entire.
    const double kappa = kPi / (4.0 * f.angle);
    HFunction reg;
    reg.name = "strip-regularizer";
    reg.eval = [kappa](Scalar z) {
        const Scalar c = std::cos(kappa * z);
        return 1.0 / (c * c);
    };
    reg.domain = DomainKind::strip;
    reg.angle = 2.0 * f.angle;
    reg.cls = FunctionClass::h0;
    reg.decay = 2.0 * kappa;
    const Matrix ikb = (kI * kappa) * a.matrix();
    const Matrix cosb = 0.5 * (ikb.exp() + (-ikb).exp());
    return cosb * cosb * dunford(product(reg, f), a, spec);
}

Matrix calculus_richardson(const HFunction& f, const Operator& a, const std::vector<int>& ns) {
    if (f.domain != DomainKind::sector) throw std::invalid_argument("Richardson regularization is defined on sectors");
    if (ns.empty()) throw std::invalid_argument("need at least one regularization index");
    const double spread = std::max({1.0, a.max_modulus(), 1.0 / a.min_modulus()});
    std::vector<Matrix> values;
    std::vector<double> steps;
    for (int n : ns) {
        const double m = n * spread;
        HFunction reg = make_function("rho", json{{"n", m}});
        values.push_back(dunford(product(reg, f), a));
        steps.push_back(1.0 / m);
    }
    // Neville extrapolation to step 0 (the error is a power series in 1/n).
    for (std::size_t level = 1; level < values.size(); ++level)
        for (std::size_t i = values.size() - 1; i >= level; --i) {
            const double hi = steps[i - level], hj = steps[i];
            values[i] = (values[i] * hi - values[i - 1] * hj) / (hi - hj);
        }
    return values.back();
}

namespace {

// ∫_0^∞ t^{z−1/2} (t + A)^{-1} dt: trapezoid in log t plus series tails.
Matrix balakrishnan_integral(const Operator& a, Scalar z) {
    const int n = a.dim();
    const double h = kLn10 / 60.0;
    const double rmin = a.min_modulus(), rmax = std::max(a.max_modulus(), rmin);
    const long k0 = static_cast<long>(std::floor((std::log(rmin) - 12.0 * kLn10) / h));
    const long k1 = static_cast<long>(std::ceil((std::log(rmax) + 12.0 * kLn10) / h));
    const Scalar w = z + 0.5;
    Matrix sum = Matrix::Zero(n, n);
    for (long k = k0; k <= k1; ++k) {
        const double t = std::exp(k * h);
        const double edge = (k == k0 || k == k1) ? 0.5 : 1.0;
        sum += (edge * h * std::exp(w * (k * h))) * fast_resolvent(-a.matrix(), t);  // (t + A)^{-1}
    }
    const Matrix inv = a.matrix().inverse();
    const double t0 = std::exp(k0 * h), t1 = std::exp(k1 * h);
    Matrix pw = inv;
    for (int j = 0; j < 3; ++j) {
        sum += ((j % 2 ? -1.0 : 1.0) * std::pow(t0, w + double(j)) / (w + double(j))) * pw;
        pw = pw * inv;
    }
    pw = identity(n);
    for (int j = 0; j < 3; ++j) {
        sum += ((j % 2 ? -1.0 : 1.0) * std::pow(t1, z - 0.5 - double(j)) / (0.5 + double(j) - z)) * pw;
        pw = pw * a.matrix();
    }
    return sum;
}

Scalar displayed_coefficient(Scalar z) { return std::sin(kPi * (z - 0.5)) / kPi; }

int calibrate_sign() {
    const Operator one = Operator::diagonal(Vector::Ones(1));
    const Scalar integral = balakrishnan_integral(one, 0.0)(0, 0);
    for (int sign : {1, -1})
        if (std::abs(double(sign) * displayed_coefficient(0.0) * integral - 1.0) <= 1e-8) return sign;
    throw SignConventionCalibrationFailed("neither sign of the fractional power representation reproduces a^0 = 1");
}

}  // namespace

int balakrishnan_sign() {
    static std::once_flag once;
    static int sign = 0;
    std::call_once(once, [] { sign = calibrate_sign(); });
    return sign;
}

Matrix power(const Operator& a, Scalar z, PowerMethod method) {
    if (!a.is_injective()) throw NotSectorial("powers need an injective operator");
    if (a.spectral_angle() >= kPi) throw NotSectorial("spectrum meets the negative real axis");
    switch (method) {
        case PowerMethod::eig:
            if (a.eig()) return a.eig_apply([z](Scalar l) { return std::exp(z * std::log(l)); });
            return (z * a.matrix().log()).exp();
        case PowerMethod::dunford_regularized: {
            if (!(std::abs(z.real()) < 1.0)) throw std::invalid_argument("regularized power needs |Re z| < 1");
            HFunction g = make_function("phi");
            g.eval = [z](Scalar l) { return std::exp(z * std::log(l)) * l / ((1.0 + l) * (1.0 + l)); };
            g.decay = 1.0 - std::abs(z.real());
            g.name = "phi*power";
            return phi_inverse(a) * dunford(g, a);
        }
        case PowerMethod::balakrishnan: {
            if (!(std::abs(z.real()) < 0.5)) throw std::invalid_argument("the representation needs |Re z| < 1/2");
            const Scalar c = double(balakrishnan_sign()) * displayed_coefficient(z);
            return c * balakrishnan_integral(a, z) * a.matrix().sqrt();
        }
    }
    throw std::invalid_argument("unknown power method");
}

Matrix log_operator(const Operator& a) {
    if (a.spectral_angle() > kPi - 1e-2) throw AngleConflict("spectrum too close to the negative axis for log");
    HFunction g = make_function("phi");
    g.eval = [](Scalar l) { return std::log(l) * l / ((1.0 + l) * (1.0 + l)); };
    g.decay = 0.9;
    g.name = "phi*log";
    return phi_inverse(a) * dunford(g, a);
}

LogResolventCheck log_resolvent_check(const Operator& a, Scalar z) {
    if (!(std::abs(z.imag()) > kPi)) throw std::invalid_argument("needs |Im z| > π");
    const int n = a.dim();
    const double omega = a.spectral_angle();
    const double dist = std::min(std::abs(z.imag()) - kPi, kPi - omega);
    const double h = std::min(0.05, 2.0 * kPi * dist / 40.0);
    const double t_lo = std::log(a.min_modulus()) - 40.0, t_hi = std::log(std::max(a.max_modulus(), 1e-300)) + 40.0;
    const long m = static_cast<long>(std::ceil((t_hi - t_lo) / h));
    auto weight = [z](double t) { return -1.0 / (kPi * kPi + (z - t) * (z - t)); };
    Matrix sum = Matrix::Zero(n, n);
    for (long k = 0; k <= m; ++k) {
        const double t = t_lo + k * h;
        const double edge = (k == 0 || k == m) ? 0.5 : 1.0;
        const double et = std::exp(t);
        sum += (edge * h * weight(t) * et) * fast_resolvent(-a.matrix(), et);
    }
    const double t_end = t_lo + m * h;
    // Euler–Maclaurin end term of the scalar part (the matrix factor is I there).
    const Scalar dweight = -2.0 * (z - t_end) / std::pow(kPi * kPi + (z - t_end) * (z - t_end), 2);
    sum -= (h * h / 12.0) * dweight * identity(n);
    // ∫_{t_end}^∞ −1/(π² + (z−t)²) dt
    sum += (-(0.5 * kPi - std::atan((t_end - z) / kPi)) / kPi) * identity(n);
    LogResolventCheck out;
    out.integral = sum;
    out.reference = (z * identity(n) - log_operator(a)).inverse();
    out.residual = op_norm(out.integral - out.reference);
    return out;
}

HalfPowerCheck log_half_power_check(const Operator& a, double t, double strip_a) {
    const Matrix l = log_operator(a);
    const Operator logop(l);
    double w = 0.0, re_lo = std::log(t), re_hi = std::log(t);
    for (Scalar e : logop.eigenvalues()) {
        w = std::max(w, std::abs(e.imag()));
        re_lo = std::min(re_lo, e.real());
        re_hi = std::max(re_hi, e.real());
    }
    if (!(strip_a > w && strip_a < kPi)) throw AngleConflict("strip line must separate the spectrum of log A from ±iπ");
    const int n = a.dim();
    const double d = std::min(kPi - strip_a, strip_a - w);
    const double h = std::min(0.05, 2.0 * kPi * d / 40.0);
    const double s_lo = re_lo - 80.0, s_hi = re_hi + 80.0;
    const long m = static_cast<long>(std::ceil((s_hi - s_lo) / h));
    auto g = [t](Scalar z) { return std::sqrt(t) * std::exp(0.5 * z) / (t + std::exp(z)); };
    Matrix sum = Matrix::Zero(n, n);
    for (long k = 0; k <= m; ++k) {
        const double s = s_lo + k * h;
        const Scalar lower(s, -strip_a), upper(s, strip_a);
        sum += (h * g(lower)) * fast_resolvent(l, lower);   // left to right
        sum -= (h * g(upper)) * fast_resolvent(l, upper);   // right to left
    }
    HalfPowerCheck out;
    out.integral = sum / (2.0 * kPi * kI);
    out.reference = std::sqrt(t) * a.matrix().sqrt() * (t * identity(n) + a.matrix()).inverse();
    out.residual = op_norm(out.integral - out.reference) / std::max(op_norm(out.reference), 1e-300);
    return out;
}

Matrix semigroup(const Operator& a, double t) {
    if (t < 0.0) throw std::invalid_argument("semigroup time must be nonnegative");
    if (a.spectral_angle(true) >= 0.5 * kPi) throw AngleConflict("semigroup needs ω(A) < π/2");
    if (t == 0.0) return identity(a.dim());
    if (a.is_normal() && a.eig()) return a.eig_apply([t](Scalar l) { return std::exp(-t * l); });
    return (-t * a.matrix()).exp();
}

Matrix group(const Operator& b, double t) {
    if (t == 0.0) return identity(b.dim());
    if (b.is_normal() && b.eig()) return b.eig_apply([t](Scalar l) { return std::exp(t * l); });
    return (t * b.matrix()).exp();
}

Matrix operator_valued_calculus(const std::function<Matrix(Scalar)>& family, const HFunction& phi, const Operator& a,
                                const ContourSpec& spec_in) {
    require_integrable(phi);
    ContourSpec spec = spec_in;
    spec.kind = phi.domain;
    const Lattice lat = make_lattice(a, phi.domain, phi.angle, spec, spec.window_decades);
    // Commutation on a few sampled contour pairs.
    Scalar z[2], dz[2];
    const long mid = (lat.k_lo + lat.k_hi) / 2, quarter = (lat.k_hi - lat.k_lo) / 4;
    for (long kl : {mid - quarter, mid, mid + quarter})
        for (long km : {mid - quarter, mid + quarter}) {
            lat.nodes(kl, z, dz);
            const Matrix f = family(z[0]);
            lat.nodes(km, z, dz);
            const Matrix r = fast_resolvent(a.matrix(), z[1]);
            if ((f * r - r * f).norm() > 1e-8 * std::max(1e-300, f.norm() * r.norm()))
                throw NotCommuting("family does not commute with the resolvent");
        }
    const Matrix& am = a.matrix();
    TermFn term = [&](Scalar zz, Scalar dzz) -> Matrix {
        const Scalar v = phi(zz);
        if (v == 0.0) return Matrix::Zero(am.rows(), am.cols());
        return (v * dzz / (2.0 * kPi * kI)) * (family(zz) * fast_resolvent(am, zz));
    };
    return adaptive_integral(lat, spec, term, a.dim());
}

Matrix joint_calculus(const std::function<Scalar(Scalar, Scalar)>& f, const Operator& a, const Operator& b,
                      const HFunction& phi, const HFunction& psi) {
    require_integrable(phi);
    require_integrable(psi);
    const int n = a.dim();
    if (b.dim() != n) throw std::invalid_argument("joint calculus needs operators of equal size");
    const Matrix comm = a.matrix() * b.matrix() - b.matrix() * a.matrix();
    if (comm.norm() > 1e-8 * std::max(1e-300, a.frobenius() * b.frobenius()))
        throw NotCommuting("A and B do not commute");
    // Windows long enough for the declared decay of each regularizer.
    auto window = [](const HFunction& f) {
        const double d = f.decay > 0.0 ? f.decay : 0.5;
        return std::min(30.0, (f.domain == DomainKind::sector ? 11.0 : 2.0) / d + 1.0);
    };
    const ContourCache ca(a, phi.domain, phi.angle, {}, window(phi)), cb(b, psi.domain, psi.angle, {}, window(psi));
    std::vector<Matrix> rb(cb.nodes().size());
    std::vector<Scalar> wb(cb.nodes().size());
    for (std::size_t k = 0; k < rb.size(); ++k) {
        rb[k] = cb.resolvent_at(k);
        wb[k] = psi(cb.nodes()[k]) * cb.weights()[k] / (2.0 * kPi * kI);
    }
    Matrix total = Matrix::Zero(n, n);
    for (std::size_t j = 0; j < ca.nodes().size(); ++j) {
        const Scalar lam = ca.nodes()[j];
        const Scalar wa = phi(lam) * ca.weights()[j] / (2.0 * kPi * kI);
        if (wa == 0.0) continue;
        Matrix inner = Matrix::Zero(n, n);
        for (std::size_t k = 0; k < rb.size(); ++k)
            if (wb[k] != 0.0) inner += (f(lam, cb.nodes()[k]) * wb[k]) * rb[k];
        total += wa * (ca.resolvent_at(j) * inner);
    }
    return total;
}

}  // namespace hinf
