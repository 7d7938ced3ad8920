#include "hinfty/hinfty_lab.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unsupported/Eigen/FFT>
#include <unsupported/Eigen/MatrixFunctions>

namespace hinf {

// ---------------------------------------------------------------------------
// Report plumbing

json SuiteCheck::to_json() const {
    return json{{"id", id}, {"lhs", lhs}, {"rhs", rhs}, {"tolerance", tolerance}, {"margin", margin}, {"pass", pass}};
}

bool SuiteReport::passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const SuiteCheck& c) { return c.pass; });
}

const SuiteCheck& SuiteReport::check(const std::string& id) const {
    for (const auto& c : checks)
        if (c.id == id) return c;
    throw std::out_of_range("no check named " + id);
}

double SuiteReport::constant(const std::string& name) const {
    for (const auto& c : constants)
        if (c.name == name) return c.value;
    throw std::out_of_range("no constant named " + name);
}

SuiteCheck& SuiteReport::add_check(const std::string& id, double lhs, double rhs, double tolerance) {
    SuiteCheck c;
    c.id = id;
    c.lhs = lhs;
    c.rhs = rhs;
    c.tolerance = tolerance;
    c.margin = rhs - lhs;
    c.pass = std::isfinite(lhs) && !std::isnan(rhs) && lhs <= rhs + tolerance;
    checks.push_back(c);
    return checks.back();
}

void SuiteReport::add_constant(const std::string& name, double value, double std_error, const std::string& method) {
    constants.push_back(SuiteConstant{name, value, std_error, method});
}

void SuiteReport::add_constant(const std::string& name, const BoundEstimate& est) {
    add_constant(name, est.value, est.std_error, to_string(est.method));
}

json SuiteReport::to_json() const {
    json cj = json::array(), kj = json::array(), sj = json::object();
    for (const auto& c : constants)
        cj.push_back(json{{"name", c.name}, {"value", c.value}, {"std_error", c.std_error}, {"method", c.method}});
    for (const auto& c : checks) kj.push_back(c.to_json());
    for (const auto& [name, pts] : series) {
        json arr = json::array();
        for (const auto& [x, y] : pts) arr.push_back(json::array({x, y}));
        sj[name] = arr;
    }
    return json{{"suite", suite},     {"operator", operator_descriptor}, {"space", space},
                {"constants", cj},    {"checks", kj},                    {"series", sj},
                {"details", details}, {"runtime_seconds", runtime_seconds}, {"seeds", seeds},
                {"passed", passed()}};
}

SuiteReport SuiteReport::from_json(const json& j) {
    SuiteReport r;
    r.suite = j.at("suite").get<std::string>();
    r.operator_descriptor = j.value("operator", json::object());
    r.space = j.value("space", json::object());
    const json constants = j.value("constants", json::array()), checks = j.value("checks", json::array());
    for (const auto& c : constants)
        r.constants.push_back(SuiteConstant{c.at("name").get<std::string>(), c.at("value").get<double>(),
                                            c.value("std_error", 0.0), c.value("method", std::string())});
    for (const auto& c : checks) {
        SuiteCheck k;
        k.id = c.at("id").get<std::string>();
        k.lhs = c.at("lhs").get<double>();
        k.rhs = c.at("rhs").get<double>();
        k.tolerance = c.value("tolerance", 0.0);
        k.margin = c.value("margin", k.rhs - k.lhs);
        k.pass = c.at("pass").get<bool>();
        r.checks.push_back(k);
    }
    const json series = j.value("series", json::object());
    for (const auto& [name, pts] : series.items()) {
        auto& dst = r.series[name];
        for (const auto& p : pts) dst.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
    }
    r.details = j.value("details", json::object());
    r.runtime_seconds = j.value("runtime_seconds", 0.0);
    r.seeds = j.value("seeds", std::vector<std::uint64_t>{});
    return r;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return buf;
}

std::string SuiteReport::to_csv() const {
    std::string out = "suite,check,lhs,rhs,margin,pass\n";
    for (const auto& c : checks)
        out += suite + "," + c.id + "," + format_number(c.lhs) + "," + format_number(c.rhs) + "," +
               format_number(c.margin) + "," + (c.pass ? "true" : "false") + "\n";
    return out;
}

std::string to_string(TorusSemigroup s) { return s == TorusSemigroup::heat ? "heat" : "poisson"; }

TorusSemigroup torus_semigroup_from_string(const std::string& s) {
    if (s == "heat") return TorusSemigroup::heat;
    if (s == "poisson") return TorusSemigroup::poisson;
    throw std::invalid_argument("unknown semigroup: " + s);
}

// ---------------------------------------------------------------------------
// Numerical helpers

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

const double kLn10 = std::log(10.0);

// Runs body(i) for i < count on the available cores; results must be written by index.
template <class Body>
void parallel_for(int count, Body&& body) {
    const int workers = std::min<int>(count, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex guard;
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    body(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(guard);
                    if (!failure) failure = std::current_exception();
                }
            }
        });
    for (auto& t : pool) t.join();
    if (failure) std::rethrow_exception(failure);
}

Matrix inverse_of(const Matrix& m) { return Eigen::PartialPivLU<Matrix>(m).inverse(); }

Matrix shifted_resolvent(const Matrix& a, Scalar z) {
    return inverse_of(z * Matrix::Identity(a.rows(), a.cols()) - a);
}

Matrix principal_sqrt(const Operator& a) {
    if (a.eig()) return a.eig_apply([](Scalar l) { return std::sqrt(l); });
    return a.matrix().sqrt();
}

double spectral_norm(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(m);
    return svd.singularValues()(0);
}

// Node operators M_j with positive weights w_j. The square function of x is the
// γ-norm of the columns √w_j M_j x.
struct NodeFamily {
    std::vector<Matrix> ops;
    std::vector<double> weights;

    Matrix embed(const Vector& x) const {
        Matrix cols(x.size(), static_cast<Eigen::Index>(ops.size()));
        for (std::size_t j = 0; j < ops.size(); ++j) cols.col(j) = std::sqrt(weights[j]) * (ops[j] * x);
        return cols;
    }
    Matrix gram() const {
        const Eigen::Index n = ops.empty() ? 0 : ops.front().cols();
        Matrix g = Matrix::Zero(n, n);
        for (std::size_t j = 0; j < ops.size(); ++j) g += weights[j] * (ops[j].adjoint() * ops[j]);
        return 0.5 * (g + g.adjoint());
    }
    NodeFamily transposed() const {
        NodeFamily t;
        t.weights = weights;
        for (const auto& m : ops) t.ops.push_back(m.transpose());
        return t;
    }
    NodeFamily scaled(double c) const {
        NodeFamily t = *this;
        for (auto& m : t.ops) m *= c;
        return t;
    }
};

// Columns with the same Gaussian-sum distribution, of rank at most the numerical rank.
Matrix compress_columns(const Matrix& x) {
    if (x.cols() <= x.rows()) return x;
    Eigen::SelfAdjointEigenSolver<Matrix> es(x * x.adjoint());
    const RealVector ev = es.eigenvalues().cwiseMax(0.0);
    const double cut = 1e-15 * std::max(ev.maxCoeff(), 1e-300);
    std::vector<int> keep;
    for (int k = 0; k < ev.size(); ++k)
        if (ev(k) > cut) keep.push_back(k);
    Matrix f(x.rows(), std::max<std::size_t>(keep.size(), 1));
    f.setZero();
    for (std::size_t c = 0; c < keep.size(); ++c) f.col(c) = es.eigenvectors().col(keep[c]) * std::sqrt(ev(keep[c]));
    return f;
}

BoundEstimate gamma_of(const Matrix& cols, const SpaceSpec& space, long budget, std::uint64_t seed) {
    if (space.hilbert()) {
        BoundEstimate e;
        e.value = cols.norm();
        e.seed = seed;
        return e;
    }
    return randomized_sum_norm(compress_columns(cols), space, SumKind::gaussian, budget, seed);
}

// Deterministic vectors for sampled constants on non-Hilbert spaces.
std::vector<Vector> test_vectors(const Operator& a, int random_count, std::uint64_t seed) {
    const int n = a.dim();
    std::vector<Vector> v;
    for (int i = 0; i < std::min(n, 8); ++i) v.push_back(Vector::Unit(n, i));
    if (n > 1) v.push_back(Vector::Ones(n));
    if (a.eig() && n > 1 && n <= 8)
        for (int i = 0; i < n; ++i) v.push_back(a.eig()->vectors.col(i));
    std::mt19937_64 rng(seed ^ 0x5eedULL);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int k = 0; k < random_count && n > 1; ++k) {
        Vector x(n);
        for (int i = 0; i < n; ++i) x(i) = Scalar(nd(rng), nd(rng));
        v.push_back(x);
    }
    return v;
}

struct SquareConstants {
    double upper = 0.0, upper_se = 0.0;      // sup ‖Sx‖ / ‖x‖
    double inverse = 0.0, inverse_se = 0.0;  // sup ‖x‖ / ‖Sx‖
    std::string method;
};

SquareConstants square_constants(const NodeFamily& fam, const SpaceSpec& space, const std::vector<Vector>& vectors,
                                 long budget, std::uint64_t seed) {
    SquareConstants sc;
    if (space.hilbert()) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(fam.gram(), Eigen::EigenvaluesOnly);
        const double lo = std::max(es.eigenvalues().minCoeff(), 0.0), hi = es.eigenvalues().maxCoeff();
        sc.upper = std::sqrt(hi);
        sc.inverse = lo > 0.0 ? 1.0 / std::sqrt(lo) : kInf;
        sc.method = to_string(EstimateMethod::exact_hilbert);
        return sc;
    }
    sc.method = to_string(EstimateMethod::gaussian_mc);
    for (const Vector& x : vectors) {
        const double nx = space.norm(x);
        if (nx == 0.0) continue;
        const BoundEstimate e = gamma_of(fam.embed(x), space, budget, seed);
        const double r = e.value / nx, se = e.std_error / nx;
        if (r > sc.upper) sc.upper = r, sc.upper_se = se;
        const double inv = r > 0.0 ? 1.0 / r : kInf;
        if (inv > sc.inverse) sc.inverse = inv, sc.inverse_se = r > 0.0 ? se / (r * r) : 0.0;
    }
    return sc;
}

struct RatioRange {
    double min = 0.0, min_se = 0.0;
    double max = 0.0, max_se = 0.0;
    std::string method;
};

// Extremes over x of ‖S_num x‖ / ‖S_den x‖.
RatioRange square_ratio_range(const NodeFamily& num, const NodeFamily& den, const SpaceSpec& space,
                              const std::vector<Vector>& vectors, long budget, std::uint64_t seed) {
    RatioRange rr;
    if (space.hilbert()) {
        const Matrix gd = den.gram(), gn = num.gram();
        Eigen::LLT<Matrix> llt(gd);
        if (llt.info() != Eigen::Success) throw NotSectorial("denominator square function is degenerate");
        const Matrix linv = Matrix(llt.matrixL()).inverse();
        Matrix c = linv * gn * linv.adjoint();
        c = 0.5 * (c + c.adjoint());
        Eigen::SelfAdjointEigenSolver<Matrix> es(c, Eigen::EigenvaluesOnly);
        rr.min = std::sqrt(std::max(es.eigenvalues().minCoeff(), 0.0));
        rr.max = std::sqrt(std::max(es.eigenvalues().maxCoeff(), 0.0));
        rr.method = to_string(EstimateMethod::exact_hilbert);
        return rr;
    }
    rr.method = to_string(EstimateMethod::gaussian_mc);
    rr.min = kInf;
    for (const Vector& x : vectors) {
        const BoundEstimate en = gamma_of(num.embed(x), space, budget, seed);
        const BoundEstimate ed = gamma_of(den.embed(x), space, budget, seed);
        if (ed.value == 0.0) continue;
        const double r = en.value / ed.value;
        const double se = r * (en.std_error / std::max(en.value, 1e-300) + ed.std_error / ed.value);
        if (r > rr.max) rr.max = r, rr.max_se = se;
        if (r < rr.min) rr.min = r, rr.min_se = se;
    }
    return rr;
}

// A^{1/2} R(t e^{±iω}, A) on a geometric grid in t with arc-length weights.
// ray = +1 (angle ω), −1 (angle −ω) or 0 (both rays).
NodeFamily sector_family(const Operator& a, const Matrix& sqrt_a, double omega, int ray) {
    const double gap = std::max(omega - a.spectral_angle(true), 1e-3);
    const double h = std::min(kLn10 / 40.0, 2.0 * kPi * gap / 30.0);
    const int npd = std::min(4000, static_cast<int>(std::ceil(kLn10 / h)));
    const double lo = a.min_modulus() * 1e-10, hi = a.max_modulus() * 1e10;
    const GridSpec g = ray_dt_grid(lo, hi, npd);
    NodeFamily fam;
    const Matrix& m = a.matrix();
    for (int j = 0; j < g.size(); ++j)
        for (int s : {1, -1}) {
            if (ray != 0 && s != ray) continue;
            fam.ops.push_back(sqrt_a * shifted_resolvent(m, std::polar(g.t(j), s * omega)));
            fam.weights.push_back(g.w(j));
        }
    return fam;
}

// R(±b + iy, B) on the sinh-mapped lines with arc-length weights; line = +1, −1 or 0 (both).
NodeFamily strip_family(const Operator& b, double half_width, int line) {
    const double d = half_width - b.spectral_width();
    double ylo = kInf, yhi = -kInf;
    for (Scalar l : b.eigenvalues()) ylo = std::min(ylo, l.imag()), yhi = std::max(yhi, l.imag());
    const double center = 0.5 * (ylo + yhi), spread = 0.5 * (yhi - ylo);
    const double scale = std::max(d, spread);
    const double h = std::min(0.1, 2.0 * kPi * (d / std::hypot(scale, spread + d)) / 36.0);
    const GridSpec g = strip_boundary_grid(half_width, center, scale, 36.0, h);
    NodeFamily fam;
    for (int j = 0; j < g.size(); ++j) {
        const int side = g.branch[j] == 0 ? 1 : -1;
        if (line != 0 && side != line) continue;
        fam.ops.push_back(shifted_resolvent(b.matrix(), g.z(j)));
        fam.weights.push_back(g.w(j));
    }
    return fam;
}

// e^{−a|t|} T_t on a symmetric midpoint grid.
NodeFamily group_decay_family(const Operator& b, double a) {
    const double d = a - b.spectral_width();
    const double half = 40.0 / d;
    const int m = 4000;
    const GridSpec g = symmetric_line_grid(half, m);
    NodeFamily fam;
    for (int j = 0; j < g.size(); ++j) {
        const double t = g.t(j);
        fam.ops.push_back(std::exp(-a * std::abs(t)) * group(b, t));
        fam.weights.push_back(g.w(j));
    }
    return fam;
}

double tolerance_for(const SpaceSpec& space, double scale, double se) {
    return space.hilbert() ? 1e-6 * std::max(scale, 1e-300) : 3.0 * se + 1e-9 * scale;
}

json operator_descriptor(const Operator& a) {
    return json{{"dim", a.dim()},
                {"spectral_angle", a.spectral_angle(true)},
                {"spectral_width", a.spectral_width()},
                {"normal", a.is_normal()},
                {"matrix", a.to_json()}};
}

// Angles θ_k = lo + (hi − lo)·2^{−6(count−1−k)/(count−1)}: geometric in the gap above lo.
std::vector<double> sweep_angles(double lo, double hi, int count) {
    std::vector<double> out;
    for (int k = 0; k < count; ++k) {
        const double frac = count == 1 ? 1.0 : std::pow(2.0, -6.0 * (count - 1 - k) / double(count - 1));
        out.push_back(lo + (hi - lo) * frac);
    }
    return out;
}

Matrix apply_function(const Operator& a, const std::function<Scalar(Scalar)>& f, const ContourCache* cache) {
    if (a.eig() && (a.is_normal() || cache == nullptr)) return a.eig_apply(f);
    return cache->integrate(f);
}

// Perturbs the poles (kept a tenth of the remaining angle outside the sector) and zeros of a rational member.
HFunction perturb_rational(const HFunction& f, double angle, std::mt19937_64& rng) {
    std::normal_distribution<double> nd(0.0, 1.0);
    auto read = [](const json& z) { return Scalar(z.at(0).get<double>(), z.at(1).get<double>()); };
    json zeros = json::array(), poles = json::array();
    const double floor_angle = angle + 0.1 * (kPi - angle);
    for (const auto& p : f.params.at("poles")) {
        Scalar q = read(p) * std::exp(Scalar(0.25 * nd(rng), 0.1 * nd(rng)));
        double arg = std::arg(q);
        if (std::abs(arg) < floor_angle) arg = arg < 0 ? -floor_angle : floor_angle;
        q = std::polar(std::abs(q), arg);
        poles.push_back({q.real(), q.imag()});
    }
    for (const auto& z : f.params.at("zeros")) {
        const Scalar q = read(z) * std::exp(Scalar(0.25 * nd(rng), 0.3 * nd(rng)));
        zeros.push_back({q.real(), q.imag()});
    }
    HFunction g = make_function("rational", json{{"zeros", zeros}, {"poles", poles}, {"angle", angle}});
    const double sup = g.sup_norm_estimate();
    return make_function("rational", json{{"zeros", zeros}, {"poles", poles}, {"angle", angle}, {"scale", {1.0 / sup, 0.0}}});
}

}  // namespace

// ---------------------------------------------------------------------------
// Calculus constant

std::vector<HFunction> conformal_stress_functions(double sigma, double lo, double hi, int count) {
    if (!(sigma > 0.0 && sigma < kPi)) throw AngleConflict("stress functions need a proper sector");
    const double kappa = kPi / (2.0 * sigma);
    const double reg = 1e2 * std::max(hi / lo, 1.0);
    std::vector<HFunction> out;
    for (int k = 0; k < count; ++k) {
        const double mu = count == 1 ? std::sqrt(lo * hi) : lo * std::pow(hi / lo, double(k) / (count - 1));
        const double scale = mu * std::sqrt(reg);
        // ρ(λ/s) with ρ(z) = n/(n+z) − 1/(1+nz): ≈ 1 on [mu/reg, mu·reg].
        auto base = [kappa, mu, scale, reg](Scalar l) {
            const Scalar w = std::pow(l / mu, kappa);
            const Scalar z = l / scale;
            return (w - 1.0) / (w + 1.0) * (reg / (reg + z) - 1.0 / (1.0 + reg * z));
        };
        HFunction f;
        f.name = "conformal" + std::to_string(k);
        f.domain = DomainKind::sector;
        f.angle = sigma;
        f.cls = FunctionClass::h0;
        f.decay = 1.0;
        f.eval = base;
        const double sup = f.sup_norm_estimate();
        f.eval = [base, sup](Scalar l) { return base(l) / sup; };
        f.params = json{{"name", "conformal"}, {"center", mu}, {"kappa", kappa}, {"regularizer", reg}, {"angle", sigma}};
        out.push_back(std::move(f));
    }
    return out;
}

BoundEstimate hinfty_bound_estimate(const Operator& op, DomainKind domain, double angle, const SpaceSpec& space,
                                    int pack_size, std::uint64_t seed, int search_rounds) {
    if (space.n != op.dim()) throw std::invalid_argument("space dimension differs from the operator");
    if (domain == DomainKind::sector) {
        if (!(angle > op.spectral_angle(true)) || !(angle < kPi))
            throw AngleConflict("calculus sector must contain the spectrum and be proper");
    } else if (!(angle > op.spectral_width())) {
        throw AngleConflict("calculus strip must contain the spectrum");
    }
    std::vector<HFunction> pack =
        domain == DomainKind::sector ? sector_test_pack(pack_size, angle, seed) : strip_test_pack(pack_size, angle, seed);
    const std::size_t random_members = pack.size();
    if (domain == DomainKind::sector)
        for (auto& f : conformal_stress_functions(angle, op.min_modulus(), op.max_modulus(), op.dim() > 1 ? 5 : 1))
            pack.push_back(std::move(f));

    std::unique_ptr<ContourCache> cache;
    const bool direct = op.eig() && op.is_normal();
    if (!direct && domain == DomainKind::sector) cache = std::make_unique<ContourCache>(op, domain, angle, ContourSpec{}, 20.0);

    auto ratio_of = [&](const HFunction& f) {
        Matrix value;
        if (direct) value = op.eig_apply(f.eval);
        else if (domain == DomainKind::sector) value = cache->integrate(f.eval);
        else value = calculus(f, op);
        return operator_norm(value, space.p);
    };

    std::vector<double> ratios(pack.size());
    parallel_for(static_cast<int>(pack.size()), [&](int i) { ratios[i] = ratio_of(pack[i]); });

    BoundEstimate est;
    est.method = EstimateMethod::randomized_search;
    est.seed = seed;
    est.samples = static_cast<long>(pack.size()) + 1;
    // The unit function is in the calculus class and has sup-norm one.
    est.value = operator_norm(Matrix::Identity(op.dim(), op.dim()), space.p);
    json best_witness = json{{"function", "unit"}, {"ratio", est.value}};
    for (std::size_t i = 0; i < pack.size(); ++i)
        if (ratios[i] > est.value) {
            est.value = ratios[i];
            best_witness = json{{"function", pack[i].name}, {"ratio", ratios[i]}, {"params", pack[i].params}};
        }

    if (domain == DomainKind::sector && search_rounds > 0 && random_members > 0) {
        std::vector<std::size_t> order(random_members);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](auto x, auto y) { return ratios[x] > ratios[y]; });
        std::vector<HFunction> leaders;
        std::vector<double> leader_ratio;
        for (std::size_t k = 0; k < std::min<std::size_t>(3, order.size()); ++k) {
            leaders.push_back(pack[order[k]]);
            leader_ratio.push_back(ratios[order[k]]);
        }
        std::mt19937_64 rng(seed ^ 0xa11ce5eedULL);
        for (int r = 0; r < search_rounds; ++r) {
            const std::size_t k = r % leaders.size();
            HFunction cand;
            double ratio = 0.0;
            try {
                cand = perturb_rational(leaders[k], angle, rng);
                ratio = ratio_of(cand);
            } catch (const TailNotConverged&) {
                continue;
            }
            ++est.samples;
            if (ratio > leader_ratio[k]) {
                leaders[k] = cand;
                leader_ratio[k] = ratio;
                if (ratio > est.value) {
                    est.value = ratio;
                    best_witness = json{{"function", "search" + std::to_string(r)}, {"ratio", ratio}, {"params", cand.params}};
                }
            }
        }
    }
    est.witnesses.push_back(best_witness);
    return est;
}

// ---------------------------------------------------------------------------
// Sector suite

SuiteReport sector_equivalence_suite(const Operator& a, const SpaceSpec& space, double omega, double sigma,
                                     const LabOptions& opts) {
    const auto t0 = Clock::now();
    if (space.n != a.dim()) throw std::invalid_argument("space dimension differs from the operator");
    if (!a.is_injective()) throw NotSectorial("square functions need an injective operator");
    const double spec_angle = a.spectral_angle(true);
    if (!(omega > spec_angle) || omega > kPi) throw AngleConflict("ray angle must exceed the spectral angle");
    if (!(sigma > spec_angle) || !(sigma < kPi)) throw AngleConflict("calculus sector must contain the spectrum");

    SuiteReport rep;
    rep.suite = "sector_equivalence";
    rep.operator_descriptor = operator_descriptor(a);
    rep.space = space.to_json();
    rep.seeds = {opts.seed};
    rep.details = json{{"omega", omega}, {"sigma", sigma}, {"pack_size", opts.pack_size}};

    const Matrix sqrt_a = principal_sqrt(a);
    const std::vector<Vector> vecs = test_vectors(a, opts.random_vectors, opts.seed);
    const std::string norm_method = (space.p == 1.0 || space.p == 2.0 || std::isinf(space.p)) ? "exact-norm" : "norm-lower-bound";

    // Imaginary powers on s ∈ [−4, 4].
    std::vector<std::pair<double, double>> power_norms;
    for (int k = -32; k <= 32; ++k) {
        const double s = k / 8.0;
        power_norms.emplace_back(s, operator_norm(power(a, Scalar(0.0, s), PowerMethod::eig), space.p));
    }
    auto bip_constant = [&](double theta) {
        double c = 0.0;
        for (const auto& [s, nrm] : power_norms) c = std::max(c, nrm * std::exp(-theta * std::abs(s)));
        return c;
    };
    rep.add_constant("C1_bip", bip_constant(sigma), 0.0, norm_method);

    // Square functions on the ray of angle ω and their transposes.
    const NodeFamily fam = sector_family(a, sqrt_a, omega, 1);
    const SquareConstants sq = square_constants(fam, space, vecs, opts.budget, opts.seed);
    const SquareConstants dual = square_constants(fam.transposed(), space.dual(), vecs, opts.budget, opts.seed + 1);
    rep.add_constant("C2_square_upper", sq.upper, sq.upper_se, sq.method);
    rep.add_constant("C2_dual_upper", dual.upper, dual.upper_se, dual.method);
    rep.add_constant("C3_lower", sq.inverse, sq.inverse_se, sq.method);
    rep.add_constant("C3_upper", sq.upper, sq.upper_se, sq.method);
    rep.add_constant("C3_two_sided", std::max(sq.upper, sq.inverse), std::max(sq.upper_se, sq.inverse_se), sq.method);
    // ‖x‖ ≤ ‖Sx‖ · sup_y ‖S′y‖ / ‖y‖ by the reproducing identity and Hölder.
    rep.add_check("lower_le_dual_upper", sq.inverse, dual.upper,
                  tolerance_for(space, dual.upper, sq.inverse_se + dual.upper_se));

    // Calculus constant on Σ(σ).
    const BoundEstimate hinf = hinfty_bound_estimate(a, DomainKind::sector, sigma, space, opts.pack_size, opts.seed,
                                                     opts.search_rounds);
    rep.add_constant("C4_hinfty", hinf);
    rep.details["hinfty_witness"] = hinf.witnesses;

    // Implication chain at an angle strictly between the spectrum and σ.
    const double omega_c = 0.5 * (spec_angle + sigma);
    const SquareConstants single_c = square_constants(sector_family(a, sqrt_a, omega_c, 1), space, vecs, opts.budget, opts.seed);
    const SquareConstants both_c = square_constants(sector_family(a, sqrt_a, omega_c, 0), space, vecs, opts.budget, opts.seed);
    const KernelOperator k = hilbert_kernel(sector_boundary_grid(omega_c, 1e-6, 1e6, 32), HilbertVariant::sector_k);
    const double k_norm = k.l2_norm_estimate();
    rep.add_constant("K_norm", k_norm, 0.0, k.l2_norm_exact() ? "exact-discrete" : "estimate");
    const double chain = single_c.inverse * (1.0 + k_norm) * both_c.upper;
    rep.add_check("calculus_le_chain", hinf.value, chain, tolerance_for(space, chain, single_c.inverse_se + both_c.upper_se));
    rep.details["chain_angle"] = omega_c;

    // Dilation invariance A → cA.
    {
        const double c = opts.scale_factor;
        const Operator ca(c * a.matrix());
        const NodeFamily fam_c = sector_family(ca, std::sqrt(c) * sqrt_a, omega, 1);
        const SquareConstants sq_c = square_constants(fam_c, space, vecs, opts.budget, opts.seed);
        const double tol_u = space.hilbert() ? 0.0 : 3.0 * (sq.upper_se + sq_c.upper_se);
        const double tol_l = space.hilbert() ? 0.0 : 3.0 * (sq.inverse_se + sq_c.inverse_se);
        rep.add_check("dilation_upper", std::abs(sq_c.upper - sq.upper), 1e-8 * sq.upper, tol_u);
        rep.add_check("dilation_lower", std::abs(sq_c.inverse - sq.inverse), 1e-8 * sq.inverse, tol_l);
    }

    // Angle sweep between the spectral angle and π.
    auto& bip_series = rep.series["bip_constant_vs_angle"];
    auto& sq_series = rep.series["square_upper_vs_angle"];
    for (double theta : sweep_angles(spec_angle, kPi, opts.sweep_angles)) {
        bip_series.emplace_back(theta, bip_constant(theta));
        sq_series.emplace_back(theta, square_constants(sector_family(a, sqrt_a, theta, 1), space, vecs, opts.budget,
                                                       opts.seed)
                                          .upper);
    }
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

// ---------------------------------------------------------------------------
// Strip suite

SuiteReport strip_group_suite(const Operator& b, const SpaceSpec& space, double half_width, const LabOptions& opts) {
    const auto t0 = Clock::now();
    if (space.n != b.dim()) throw std::invalid_argument("space dimension differs from the operator");
    if (!(half_width > b.spectral_width())) throw AngleConflict("strip must contain the spectrum");
    const double a = half_width;

    SuiteReport rep;
    rep.suite = "strip_group";
    rep.operator_descriptor = operator_descriptor(b);
    rep.space = space.to_json();
    rep.seeds = {opts.seed};
    rep.details = json{{"half_width", a}, {"pack_size", opts.pack_size}};
    const std::vector<Vector> vecs = test_vectors(b, opts.random_vectors, opts.seed);

    double c_res = 0.0, c_res_se = 0.0, c_lower = 0.0;
    std::string method;
    for (int side : {1, -1}) {
        const NodeFamily fam = strip_family(b, a, side);
        const SquareConstants sq = square_constants(fam, space, vecs, opts.budget, opts.seed);
        const SquareConstants dual = square_constants(fam.transposed(), space.dual(), vecs, opts.budget, opts.seed + 1);
        const std::string tag = side > 0 ? "right" : "left";
        rep.add_constant("resolvent_upper_" + tag, sq.upper, sq.upper_se, sq.method);
        rep.add_constant("resolvent_dual_upper_" + tag, dual.upper, dual.upper_se, dual.method);
        rep.add_constant("resolvent_lower_" + tag, sq.inverse, sq.inverse_se, sq.method);
        if (sq.upper > c_res) c_res = sq.upper, c_res_se = sq.upper_se;
        if (dual.upper > c_res) c_res = dual.upper, c_res_se = dual.upper_se;
        c_lower = std::max(c_lower, sq.inverse);
        method = sq.method;
    }
    rep.add_constant("C_resolvent", c_res, c_res_se, method);
    rep.add_constant("C_two_sided", std::max(c_res, c_lower), c_res_se, method);

    const SquareConstants grp = square_constants(group_decay_family(b, a), space, vecs, opts.budget, opts.seed);
    rep.add_constant("group_decay_upper", grp.upper, grp.upper_se, grp.method);
    rep.add_constant("group_decay_lower", grp.inverse, grp.inverse_se, grp.method);

    const BoundEstimate hinf = hinfty_bound_estimate(b, DomainKind::strip, a, space, opts.pack_size, opts.seed, 0);
    rep.add_constant("C_hinfty_strip", hinf);
    rep.details["hinfty_witness"] = hinf.witnesses;
    const double bound = 2.0 * a * c_res * c_res;
    rep.add_check("strip_calculus_le_2aC2", hinf.value, bound, 1e-9 * bound);
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

// ---------------------------------------------------------------------------
// Square-function comparison

namespace {

// ∫_0^∞ |f(t e^{iθ})| dt/t by the trapezoid rule in log t.
double haar_abs_integral(const std::function<Scalar(Scalar)>& f, double theta) {
    const double h = kLn10 / 40.0;
    double sum = 0.0;
    for (int k = -16 * 40; k <= 16 * 40; ++k) sum += std::abs(f(std::polar(std::exp(k * h), theta)));
    return sum * h;
}

Scalar haar_integral(const std::function<Scalar(double)>& f) {
    const double h = kLn10 / 40.0;
    Scalar sum = 0.0;
    for (int k = -16 * 40; k <= 16 * 40; ++k) sum += f(std::exp(k * h));
    return sum * h;
}

}  // namespace

SuiteReport square_function_comparison(const Operator& a, const HFunction& psi, const HFunction& phi,
                                       const SpaceSpec& space, const LabOptions& opts) {
    const auto t0 = Clock::now();
    if (space.n != a.dim()) throw std::invalid_argument("space dimension differs from the operator");
    if (psi.domain != DomainKind::sector || phi.domain != DomainKind::sector)
        throw std::invalid_argument("comparison functions must live on sectors");
    if (!a.is_injective()) throw NotSectorial("square functions need an injective operator");
    const double spec_angle = a.spectral_angle(true);
    const double sigma = std::min(psi.angle, phi.angle);
    if (!(sigma > spec_angle)) throw AngleConflict("function sector does not contain the spectrum");
    const double decay = std::min(psi.decay, phi.decay);
    if (!(decay > 0.0)) throw std::invalid_argument("comparison functions must decay at 0 and ∞");

    SuiteReport rep;
    rep.suite = "square_function_comparison";
    rep.operator_descriptor = operator_descriptor(a);
    rep.space = space.to_json();
    rep.seeds = {opts.seed};
    rep.details = json{{"psi", psi.params}, {"phi", phi.params}};

    const double decades = std::clamp(std::ceil(6.0 / decay), 8.0, 30.0);
    const double gap = sigma - spec_angle;
    const double h = std::min(kLn10 / 40.0, 2.0 * kPi * gap / 30.0);
    const int npd = std::min(2000, static_cast<int>(std::ceil(kLn10 / h)));
    const GridSpec g = ray_haar_grid(std::pow(10.0, -decades) / a.max_modulus(), std::pow(10.0, decades) / a.min_modulus(), npd);

    std::unique_ptr<ContourCache> cache;
    if (!a.eig()) cache = std::make_unique<ContourCache>(a, DomainKind::sector, sigma, ContourSpec{}, decades + 6.0);
    auto family_of = [&](const HFunction& f) {
        NodeFamily fam;
        fam.ops.resize(g.size());
        fam.weights.assign(g.w.data(), g.w.data() + g.size());
        parallel_for(g.size(), [&](int j) {
            const double t = g.t(j);
            fam.ops[j] = apply_function(a, [&f, t](Scalar l) { return f.eval(t * l); }, cache.get());
        });
        return fam;
    };
    const NodeFamily fam_psi = family_of(psi), fam_phi = family_of(phi);
    const std::vector<Vector> vecs = test_vectors(a, opts.random_vectors, opts.seed);
    const RatioRange rr = square_ratio_range(fam_psi, fam_phi, space, vecs, opts.budget, opts.seed);
    rep.add_constant("ratio_min", rr.min, rr.min_se, rr.method);
    rep.add_constant("ratio_max", rr.max, rr.max_se, rr.method);

    // Homogeneity under x → c x.
    {
        const Vector x = vecs.front();
        const double c = 3.75;
        const double r1 = gamma_of(fam_psi.embed(x), space, opts.budget, opts.seed).value /
                          gamma_of(fam_phi.embed(x), space, opts.budget, opts.seed).value;
        const double r2 = gamma_of(fam_psi.embed(c * x), space, opts.budget, opts.seed).value /
                          gamma_of(fam_phi.embed(c * x), space, opts.budget, opts.seed).value;
        rep.add_check("homogeneity", std::abs(r2 - r1), 1e-10 * r1);
    }

    // Factorization constant through 𝒦 (analysis with the numerator), the multiplier
    // M(λ) = λ^{1/2}A^{1/2}R(λ, A), ℒ (synthesis with g) and N(t) = h(tA), where
    // h(λ) = λ^{1/2}/(1+λ) and g = c·h with ∫ g h (denominator) dt/t = 1.
    const double gamma = 0.5 * (spec_angle + sigma);
    auto aux = [](Scalar l) { return std::sqrt(l) / (1.0 + l); };
    const Matrix sqrt_a = principal_sqrt(a);
    std::vector<Matrix> m_family, n_family;
    {
        const GridSpec mg = ray_haar_grid(a.min_modulus() * 1e-6, a.max_modulus() * 1e6, 10);
        for (int j = 0; j < mg.size(); ++j)
            for (int s : {1, -1}) {
                const Scalar l = std::polar(mg.t(j), s * gamma);
                m_family.push_back(std::sqrt(l) * sqrt_a * shifted_resolvent(a.matrix(), l));
            }
        const GridSpec ng = ray_haar_grid(1e-6 / a.max_modulus(), 1e6 / a.min_modulus(), 10);
        for (int j = 0; j < ng.size(); ++j) {
            const double t = ng.t(j);
            n_family.push_back(apply_function(a, [&aux, t](Scalar l) { return aux(t * l); }, cache.get()));
        }
    }
    auto family_bound = [&](const std::vector<Matrix>& fam) {
        if (space.hilbert()) {
            double best = 0.0;
            for (const auto& m : fam) best = std::max(best, spectral_norm(m));
            return best;
        }
        BoundOptions bo;
        bo.seed = opts.seed;
        bo.budget = opts.budget;
        return bound_estimate(fam, space, BoundKind::gamma, bo).estimate.value;
    };
    const double m_bound = family_bound(m_family);
    const double n_bound = family_bound(n_family);
    auto predicted = [&](const HFunction& num, const HFunction& den) {
        const Scalar pairing = haar_integral([&](double t) { return aux(t) * aux(t) * den.eval(t); });
        if (std::abs(pairing) < 1e-14) throw std::invalid_argument("auxiliary pairing vanishes");
        const double c = 1.0 / std::abs(pairing);
        const double ip = haar_abs_integral(num.eval, gamma), im = haar_abs_integral(num.eval, -gamma);
        const double jp = c * haar_abs_integral(aux, gamma), jm = c * haar_abs_integral(aux, -gamma);
        const double analysis = std::hypot(ip, im) / (2.0 * kPi);
        const double synthesis = std::hypot(jp, jm);
        return std::array<double, 3>{analysis * m_bound * synthesis * n_bound, analysis, synthesis};
    };
    const auto up = predicted(psi, phi);
    const auto down = predicted(phi, psi);
    rep.add_constant("analysis_norm_bound", up[1], 0.0, "schur-bound");
    rep.add_constant("synthesis_norm_bound", up[2], 0.0, "schur-bound");
    rep.add_constant("multiplier_M_bound", m_bound, 0.0, space.hilbert() ? "sampled-sup" : "gamma-bound-estimate");
    rep.add_constant("multiplier_N_bound", n_bound, 0.0, space.hilbert() ? "sampled-sup" : "gamma-bound-estimate");
    rep.add_constant("predicted_upper", up[0], 0.0, "factorization");
    rep.add_constant("predicted_lower", down[0], 0.0, "factorization");
    rep.add_check("ratio_max_le_predicted", rr.max, up[0], 3.0 * rr.max_se);
    rep.add_check("inverse_ratio_min_le_predicted", rr.min > 0 ? 1.0 / rr.min : kInf, down[0],
                  rr.min > 0 ? 3.0 * rr.min_se / (rr.min * rr.min) : 0.0);
    rep.details["comparison_angle"] = gamma;
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

// ---------------------------------------------------------------------------
// g-functions on the discrete torus

namespace {

struct TorusVector {
    std::string name;
    Vector values;
    bool stable_family = true;  // the same continuum function for every N
};

std::vector<TorusVector> torus_vectors(int n, bool with_noise, std::uint64_t seed) {
    std::vector<TorusVector> out;
    auto wave = [n](int m, bool cosine) {
        Vector v(n);
        for (int j = 0; j < n; ++j) {
            const double x = 2.0 * kPi * m * j / n;
            v(j) = cosine ? std::cos(x) : std::sin(x);
        }
        return v;
    };
    out.push_back({"mode_1", wave(1, true)});
    if (n >= 8) out.push_back({"mode_n8", wave(n / 8, true)});
    // Seeded trigonometric polynomials with frequencies 1..6: independent of N.
    std::mt19937_64 rng(seed ^ 0x7019ULL);
    std::normal_distribution<double> nd(0.0, 1.0);
    for (int k = 0; k < 2; ++k) {
        Vector v = Vector::Zero(n);
        for (int m = 1; m <= std::min(6, n / 2 - 1 > 0 ? n / 2 - 1 : 1); ++m) {
            const double ca = nd(rng), sa = nd(rng);
            v += ca * wave(m, true) + sa * wave(m, false);
        }
        out.push_back({"trig_" + std::to_string(k), v});
    }
    if (with_noise) {
        std::mt19937_64 nrng(seed ^ (0x9015eULL + static_cast<std::uint64_t>(n)));
        for (int k = 0; k < 3; ++k) {
            Vector v(n);
            for (int j = 0; j < n; ++j) v(j) = nd(nrng);
            v.array() -= v.mean();
            out.push_back({"noise_" + std::to_string(k), v, false});
        }
    }
    return out;
}

}  // namespace

SuiteReport g_function_experiment(int torus_size, double p, double beta, TorusSemigroup semigroup, const LabOptions& opts) {
    const auto t0 = Clock::now();
    const int n = torus_size;
    if (n < 4 || (n & (n - 1)) != 0) throw std::invalid_argument("torus size must be a power of two ≥ 4");
    if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("g-function experiments need 1 < p < ∞");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    const SpaceSpec space(p, n);

    SuiteReport rep;
    rep.suite = "g_function";
    rep.operator_descriptor = json{{"torus_size", n}, {"semigroup", to_string(semigroup)}};
    rep.space = space.to_json();
    rep.seeds = {opts.seed};
    rep.details = json{{"beta", beta}};

    RealVector lambda(n);
    for (int m = 0; m < n; ++m) {
        const double s = std::sin(kPi * m / n);
        lambda(m) = semigroup == TorusSemigroup::heat ? 4.0 * s * s : 2.0 * std::abs(s);
    }
    const double lmin = lambda.segment(1, n - 1).minCoeff(), lmax = lambda.maxCoeff();
    const double t_lo = std::pow(10.0, -8.0 / beta) / lmax;
    const double t_hi = (40.0 + 10.0 * beta) / lmin;
    const GridSpec g = ray_haar_grid(t_lo, t_hi, 24);
    auto gb = [beta](double x) { return x > 0.0 ? std::pow(x, beta) * std::exp(-x) : 0.0; };

    Eigen::FFT<double> fft;
    auto g_columns = [&](const Vector& f) {
        std::vector<std::complex<double>> fv(f.data(), f.data() + n), fhat, back;
        fft.fwd(fhat, fv);
        Matrix cols(n, g.size());
        std::vector<std::complex<double>> mult(n);
        for (int j = 0; j < g.size(); ++j) {
            for (int m = 0; m < n; ++m) mult[m] = fhat[m] * gb(g.t(j) * lambda(m));
            fft.inv(back, mult);
            const double sw = std::sqrt(g.w(j));
            for (int i = 0; i < n; ++i) cols(i, j) = sw * back[i];
        }
        return cols;
    };

    const double exact_l2 = std::sqrt(std::tgamma(2.0 * beta)) / std::pow(2.0, beta);
    double upper = 0.0, upper_se = 0.0, inverse = 0.0, inverse_se = 0.0;
    json ratios = json::object();
    const auto vecs = torus_vectors(n, space.hilbert(), opts.seed);
    std::vector<double> r(vecs.size()), se(vecs.size());
    for (std::size_t k = 0; k < vecs.size(); ++k) {
        const BoundEstimate e = gamma_of(g_columns(vecs[k].values), space, opts.budget, opts.seed);
        const double nf = space.norm(vecs[k].values);
        r[k] = e.value / nf;
        se[k] = e.std_error / nf;
        ratios[vecs[k].name] = r[k];
        if (space.hilbert()) rep.add_check("exact_ratio_" + vecs[k].name, std::abs(r[k] - exact_l2), 1e-6);
        if (!vecs[k].stable_family) continue;
        if (r[k] > upper) upper = r[k], upper_se = se[k];
        if (1.0 / r[k] > inverse) inverse = 1.0 / r[k], inverse_se = se[k] / (r[k] * r[k]);
    }
    const std::string method = to_string(space.hilbert() ? EstimateMethod::exact_hilbert : EstimateMethod::gaussian_mc);
    rep.add_constant("upper", upper, upper_se, method);
    rep.add_constant("lower", inverse, inverse_se, method);
    if (space.hilbert()) rep.add_constant("exact_l2_ratio", exact_l2, 0.0, "closed-form");
    rep.details["ratios"] = ratios;

    // Mean projection: the constant vector is annihilated.
    const Vector ones = Vector::Ones(n);
    const double g_const = g_columns(ones).norm();
    rep.add_check("constant_vector_annihilated", g_const, 1e-12 * std::sqrt(double(n)));
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

SuiteReport g_function_sweep(const std::vector<int>& torus_sizes, const std::vector<double>& ps, double beta,
                             TorusSemigroup semigroup, const LabOptions& opts, double stability_tolerance) {
    const auto t0 = Clock::now();
    SuiteReport rep;
    rep.suite = "g_function_sweep";
    rep.operator_descriptor = json{{"torus_sizes", torus_sizes}, {"semigroup", to_string(semigroup)}};
    rep.space = json{{"p", ps}};
    rep.seeds = {opts.seed};
    rep.details = json{{"beta", beta}, {"runs", json::array()}};
    for (double p : ps) {
        std::vector<double> uppers, lowers;
        const std::string ptag = format_number(p);
        for (int n : torus_sizes) {
            const SuiteReport sub = g_function_experiment(n, p, beta, semigroup, opts);
            for (const auto& c : sub.checks) {
                SuiteCheck copy = c;
                copy.id = "N" + std::to_string(n) + "_p" + ptag + "_" + c.id;
                rep.checks.push_back(copy);
            }
            uppers.push_back(sub.constant("upper"));
            lowers.push_back(sub.constant("lower"));
            rep.series["upper_p" + ptag].emplace_back(n, uppers.back());
            rep.series["lower_p" + ptag].emplace_back(n, lowers.back());
            rep.details["runs"].push_back(sub.to_json());
        }
        auto spread = [](const std::vector<double>& v) {
            const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
            return (*hi - *lo) / *lo;
        };
        if (torus_sizes.size() > 1) {
            rep.add_check("stable_upper_p" + ptag, spread(uppers), stability_tolerance);
            rep.add_check("stable_lower_p" + ptag, spread(lowers), stability_tolerance);
        }
    }
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

// ---------------------------------------------------------------------------
// Logarithm bridge

SuiteReport log_bridge_suite(const Operator& a, const SpaceSpec& space, double angle, const LabOptions& opts) {
    const auto t0 = Clock::now();
    if (space.n != a.dim()) throw std::invalid_argument("space dimension differs from the operator");
    if (!a.is_injective()) throw NotSectorial("the logarithm needs an injective operator");
    const double spec_angle = a.spectral_angle();
    const double theta = angle > 0.0 ? angle : 0.5 * (spec_angle + kPi);
    if (!(theta > spec_angle) || !(theta < kPi)) throw AngleConflict("bridge angle must lie between the spectral angle and π");

    SuiteReport rep;
    rep.suite = "log_bridge";
    rep.operator_descriptor = operator_descriptor(a);
    rep.space = space.to_json();
    rep.seeds = {opts.seed};
    rep.details = json{{"angle", theta}};

    const Matrix log_a = log_operator(a);
    const Operator b(Matrix(-kI * log_a));
    rep.details["generator"] = matrix_to_json(b.matrix());

    for (double t : {1.0, -1.0, 0.5}) {
        const Matrix lhs = power(a, Scalar(0.0, t), PowerMethod::eig);
        const Matrix rhs = group(b, -t);
        rep.add_check("group_identity_t" + format_number(t), (lhs - rhs).norm() / lhs.norm(), 1e-7);
    }
    const LogResolventCheck lr = log_resolvent_check(a, Scalar(0.0, 4.0));
    rep.add_check("log_resolvent_z4i", lr.residual, 1e-6);
    const HalfPowerCheck hp = log_half_power_check(a, 1.0, theta);
    rep.add_check("half_power_t1", hp.residual, 1e-5);

    const Matrix sqrt_a = principal_sqrt(a);
    const NodeFamily sector = sector_family(a, sqrt_a, theta, 0);
    const NodeFamily strip = strip_family(b, theta, 0);
    const std::vector<Vector> vecs = test_vectors(a, opts.random_vectors, opts.seed);
    const RatioRange rr = square_ratio_range(sector, strip, space, vecs, opts.budget, opts.seed);
    rep.add_constant("sector_over_strip_min", rr.min, rr.min_se, rr.method);
    rep.add_constant("sector_over_strip_max", rr.max, rr.max_se, rr.method);
    const double root = std::sqrt(2.0 * kPi);
    rep.add_check("sector_le_root2pi_strip", rr.max, root, 3.0 * rr.max_se);
    rep.add_check("strip_le_root2pi_sector", rr.min > 0 ? 1.0 / rr.min : kInf, root,
                  rr.min > 0 ? 3.0 * rr.min_se / (rr.min * rr.min) : 0.0);
    rep.runtime_seconds = seconds_since(t0);
    return rep;
}

}  // namespace hinf
