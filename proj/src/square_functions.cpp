#include "hinfty/square_functions.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <random>
#include <sstream>
#include <stdexcept>

namespace hinf {

std::string to_string(GridKind k) {
    switch (k) {
        case GridKind::interval: return "interval";
        case GridKind::ray_dt: return "ray-dt";
        case GridKind::ray_haar: return "ray-haar";
        case GridKind::line: return "line";
        case GridKind::sector_boundary: return "sector-boundary";
        case GridKind::strip_boundary: return "strip-boundary";
        case GridKind::custom: return "custom";
    }
    return "custom";
}

GridKind grid_kind_from_string(const std::string& s) {
    for (GridKind k : {GridKind::interval, GridKind::ray_dt, GridKind::ray_haar, GridKind::line,
                       GridKind::sector_boundary, GridKind::strip_boundary, GridKind::custom})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown grid kind: " + s);
}

double GridSpec::window_measure() const {
    switch (kind) {
        case GridKind::ray_haar: return std::log(hi / lo);
        case GridKind::sector_boundary:
        case GridKind::strip_boundary: return 2.0 * (hi - lo);
        case GridKind::custom: return w.sum();
        default: return hi - lo;
    }
}

bool GridSpec::compatible(const GridSpec& o) const {
    if (kind != o.kind || size() != o.size()) return false;
    for (int j = 0; j < size(); ++j) {
        if (std::abs(t(j) - o.t(j)) > 1e-12 * (1.0 + std::abs(t(j)))) return false;
        if (std::abs(w(j) - o.w(j)) > 1e-12 * (1.0 + std::abs(w(j)))) return false;
        if (branch[j] != o.branch[j]) return false;
    }
    return true;
}

bool GridSpec::uniform_spacing(double rel_tol) const {
    if (size() < 2) return true;
    const bool logarithmic = kind == GridKind::ray_haar;
    auto coord = [&](int j) { return logarithmic ? std::log(t(j)) : t(j); };
    const double h = coord(1) - coord(0);
    for (int j = 1; j < size(); ++j)
        if (std::abs(coord(j) - coord(j - 1) - h) > rel_tol * std::abs(h) * 10.0 + 1e-14) return false;
    return true;
}

json GridSpec::to_json() const {
    json j{{"kind", to_string(kind)}, {"params", params}};
    if (kind == GridKind::custom) {
        j["t"] = std::vector<double>(t.data(), t.data() + t.size());
        j["w"] = std::vector<double>(w.data(), w.data() + w.size());
    }
    return j;
}

GridSpec GridSpec::from_json(const json& j) {
    const GridKind k = grid_kind_from_string(j.at("kind").get<std::string>());
    const json& p = j.at("params");
    switch (k) {
        case GridKind::interval: return interval_grid(p.at("a"), p.at("b"), p.at("nodes"));
        case GridKind::line: return line_grid(p.at("x0"), p.at("h"), p.at("nodes"));
        case GridKind::ray_haar: return ray_haar_grid(p.at("lo"), p.at("hi"), p.at("nodes_per_decade"));
        case GridKind::ray_dt: return ray_dt_grid(p.at("lo"), p.at("hi"), p.at("nodes_per_decade"));
        case GridKind::sector_boundary:
            return sector_boundary_grid(p.at("omega"), p.at("lo"), p.at("hi"), p.at("nodes_per_decade"));
        case GridKind::strip_boundary:
            return strip_boundary_grid(p.at("b"), p.at("center"), p.at("scale"), p.at("u_max"), p.at("h"));
        case GridKind::custom: {
            GridSpec g;
            auto tv = j.at("t").get<std::vector<double>>();
            auto wv = j.at("w").get<std::vector<double>>();
            if (tv.size() != wv.size()) throw std::invalid_argument("custom grid t/w size mismatch");
            g.t = Eigen::Map<RealVector>(tv.data(), tv.size());
            g.w = Eigen::Map<RealVector>(wv.data(), wv.size());
            g.branch.assign(tv.size(), 0);
            g.z = g.t.cast<Scalar>();
            g.dz = g.w.cast<Scalar>();
            g.lo = tv.empty() ? 0.0 : tv.front();
            g.hi = tv.empty() ? 0.0 : tv.back();
            return g;
        }
    }
    throw std::invalid_argument("unknown grid kind");
}

namespace {

GridSpec real_grid(GridKind kind, RealVector t, RealVector w, double lo, double hi, json params) {
    GridSpec g;
    g.kind = kind;
    g.t = std::move(t);
    g.w = std::move(w);
    g.branch.assign(g.t.size(), 0);
    g.z = g.t.cast<Scalar>();
    g.dz = g.w.cast<Scalar>();
    g.lo = lo;
    g.hi = hi;
    g.params = std::move(params);
    return g;
}

int decade_nodes(double lo, double hi, int per_decade) {
    if (!(lo > 0.0) || !(hi > lo)) throw std::invalid_argument("ray window must satisfy 0 < lo < hi");
    return std::max(1, static_cast<int>(std::lround(std::log10(hi / lo) * per_decade)));
}

// Geometric nodes t_j with cells of length exactly t_j·h tiling [lo, hi].
void geometric_cells(double lo, double hi, int m, RealVector& t, RealVector& w) {
    const double h = std::log(hi / lo) / m;
    const double t0 = lo * std::expm1(h) / h;
    t.resize(m);
    w.resize(m);
    for (int j = 0; j < m; ++j) {
        t(j) = t0 * std::exp(j * h);
        w(j) = t(j) * h;
    }
}

}  // namespace

GridSpec interval_grid(double a, double b, int nodes) {
    if (nodes < 1 || !(b > a)) throw std::invalid_argument("interval grid needs b > a and nodes >= 1");
    const double h = (b - a) / nodes;
    RealVector t(nodes);
    for (int j = 0; j < nodes; ++j) t(j) = a + (j + 0.5) * h;
    return real_grid(GridKind::interval, t, RealVector::Constant(nodes, h), a, b,
                     json{{"a", a}, {"b", b}, {"nodes", nodes}});
}

GridSpec line_grid(double x0, double h, int nodes) {
    if (nodes < 1 || !(h > 0)) throw std::invalid_argument("line grid needs h > 0 and nodes >= 1");
    RealVector t(nodes);
    for (int j = 0; j < nodes; ++j) t(j) = x0 + j * h;
    return real_grid(GridKind::line, t, RealVector::Constant(nodes, h), x0 - 0.5 * h,
                     x0 - 0.5 * h + nodes * h, json{{"x0", x0}, {"h", h}, {"nodes", nodes}});
}

GridSpec symmetric_line_grid(double half_width, int nodes) {
    const double h = 2.0 * half_width / nodes;
    return line_grid(-half_width + 0.5 * h, h, nodes);
}

GridSpec ray_haar_grid(double lo, double hi, int nodes_per_decade) {
    const int m = decade_nodes(lo, hi, nodes_per_decade);
    const double h = std::log(hi / lo) / m;
    RealVector t(m);
    for (int j = 0; j < m; ++j) t(j) = lo * std::exp((j + 0.5) * h);
    GridSpec g = real_grid(GridKind::ray_haar, t, RealVector::Constant(m, h), lo, hi,
                           json{{"lo", lo}, {"hi", hi}, {"nodes_per_decade", nodes_per_decade}});
    g.dz = (g.t * h).cast<Scalar>();
    return g;
}

GridSpec ray_dt_grid(double lo, double hi, int nodes_per_decade) {
    RealVector t, w;
    geometric_cells(lo, hi, decade_nodes(lo, hi, nodes_per_decade), t, w);
    return real_grid(GridKind::ray_dt, t, w, lo, hi,
                     json{{"lo", lo}, {"hi", hi}, {"nodes_per_decade", nodes_per_decade}});
}

GridSpec sector_boundary_grid(double omega, double lo, double hi, int nodes_per_decade) {
    if (!(omega > 0.0) || omega > kPi) throw std::invalid_argument("sector angle must lie in (0, π]");
    RealVector t, w;
    const int m = decade_nodes(lo, hi, nodes_per_decade);
    geometric_cells(lo, hi, m, t, w);
    GridSpec g;
    g.kind = GridKind::sector_boundary;
    g.t.resize(2 * m);
    g.w.resize(2 * m);
    g.z.resize(2 * m);
    g.dz.resize(2 * m);
    g.branch.resize(2 * m);
    const Scalar lower = std::polar(1.0, -omega), upper = std::polar(1.0, omega);
    for (int j = 0; j < m; ++j) {
        g.t(j) = t(j);
        g.w(j) = w(j);
        g.z(j) = t(j) * lower;
        g.dz(j) = w(j) * lower;
        g.branch[j] = 0;
        const int k = m + j, src = m - 1 - j;
        g.t(k) = t(src);
        g.w(k) = w(src);
        g.z(k) = t(src) * upper;
        g.dz(k) = -w(src) * upper;
        g.branch[k] = 1;
    }
    g.lo = lo;
    g.hi = hi;
    g.params = json{{"omega", omega}, {"lo", lo}, {"hi", hi}, {"nodes_per_decade", nodes_per_decade}};
    return g;
}

GridSpec strip_boundary_grid(double b, double center, double scale, double u_max, double h) {
    if (!(b > 0.0) || !(scale > 0.0) || !(u_max > 0.0) || !(h > 0.0))
        throw std::invalid_argument("strip grid parameters must be positive");
    const int m = 2 * std::max(1, static_cast<int>(std::ceil(u_max / h)));
    const double hh = 2.0 * u_max / m;
    GridSpec g;
    g.kind = GridKind::strip_boundary;
    g.t.resize(2 * m);
    g.w.resize(2 * m);
    g.z.resize(2 * m);
    g.dz.resize(2 * m);
    g.branch.resize(2 * m);
    double total = 0.0;
    for (int j = 0; j < m; ++j) {
        const double u = -u_max + (j + 0.5) * hh;
        const double y = center + scale * std::sinh(u);
        const double wt = scale * std::cosh(u) * hh;
        total += wt;
        g.t(j) = y;
        g.w(j) = wt;
        g.z(j) = Scalar(b, y);
        g.dz(j) = kI * wt;
        g.branch[j] = 0;
        const int k = 2 * m - 1 - j;
        g.t(k) = y;
        g.w(k) = wt;
        g.z(k) = Scalar(-b, y);
        g.dz(k) = -kI * wt;
        g.branch[k] = 1;
    }
    // Cells tile the window by cumulative weights.
    g.lo = center - 0.5 * total;
    g.hi = center + 0.5 * total;
    g.params = json{{"b", b}, {"center", center}, {"scale", scale}, {"u_max", u_max}, {"h", h}};
    return g;
}

SampledFunction::SampledFunction(GridSpec g, Matrix v, SpaceSpec s)
    : grid(std::move(g)), values(std::move(v)), space(s) {
    if (values.cols() != grid.size()) throw GridMismatch("value count differs from node count");
    if (values.rows() != space.n) throw std::invalid_argument("value length differs from the space dimension");
    if (!values.real().allFinite() || !values.imag().allFinite())
        throw std::invalid_argument("sampled values must be finite");
}

namespace {

std::string fmt(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double parse_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc()) throw std::invalid_argument("bad number in CSV: " + s);
    return v;
}

}  // namespace

std::string SampledFunction::to_csv() const {
    std::string out = "# grid " + grid.to_json().dump() + "\n";
    out += "t,w";
    const int n = space.n;
    for (int i = 1; i <= n; ++i) out += ",re_" + std::to_string(i);
    for (int i = 1; i <= n; ++i) out += ",im_" + std::to_string(i);
    out += "\n";
    for (int j = 0; j < grid.size(); ++j) {
        out += fmt(grid.t(j)) + "," + fmt(grid.w(j));
        for (int i = 0; i < n; ++i) out += "," + fmt(values(i, j).real());
        for (int i = 0; i < n; ++i) out += "," + fmt(values(i, j).imag());
        out += "\n";
    }
    return out;
}

SampledFunction SampledFunction::from_csv(const std::string& text, const SpaceSpec& space) {
    std::istringstream in(text);
    std::string line;
    json grid_json;
    std::vector<std::vector<double>> rows;
    bool header_seen = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line.rfind("# grid ", 0) == 0) {
            grid_json = json::parse(line.substr(7));
            continue;
        }
        if (!header_seen) {
            header_seen = true;
            continue;
        }
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) row.push_back(parse_double(cell));
        if (static_cast<int>(row.size()) != 2 + 2 * space.n)
            throw std::invalid_argument("CSV row width does not match the space dimension");
        rows.push_back(std::move(row));
    }
    const int m = static_cast<int>(rows.size());
    RealVector t(m), w(m);
    Matrix values(space.n, m);
    for (int j = 0; j < m; ++j) {
        t(j) = rows[j][0];
        w(j) = rows[j][1];
        for (int i = 0; i < space.n; ++i) values(i, j) = Scalar(rows[j][2 + i], rows[j][2 + space.n + i]);
    }
    GridSpec grid;
    if (!grid_json.is_null()) {
        grid = GridSpec::from_json(grid_json);
        if (grid.size() != m) throw GridMismatch("CSV rows do not match the recorded grid");
        grid.t = t;
        grid.w = w;
    } else {
        grid = GridSpec::from_json(json{{"kind", "custom"},
                                        {"params", json::object()},
                                        {"t", std::vector<double>(t.data(), t.data() + m)},
                                        {"w", std::vector<double>(w.data(), w.data() + m)}});
    }
    return SampledFunction(std::move(grid), std::move(values), space);
}

SampledFunction sample(const GridSpec& grid, const SpaceSpec& space, const NodeFunction& f) {
    Matrix values(space.n, grid.size());
    for (int j = 0; j < grid.size(); ++j) values.col(j) = f(grid.t(j), grid.z(j), grid.branch[j]);
    return SampledFunction(grid, std::move(values), space);
}

Matrix embed_matrix(const SampledFunction& f) {
    return f.values * f.grid.w.cwiseSqrt().cast<Scalar>().asDiagonal();
}

BoundEstimate gamma_norm(const SampledFunction& f, long budget, std::uint64_t seed) {
    return randomized_sum_norm(embed_matrix(f), f.space, SumKind::gaussian, budget, seed);
}

DualBracket gamma_dual_norm(const SampledFunction& g, long budget, std::uint64_t seed) {
    DualBracket br;
    const Matrix mg = embed_matrix(g);
    if (g.space.hilbert()) {
        br.lower = br.upper = mg.norm();
        br.exact = true;
        return br;
    }
    const BoundEstimate up = gamma_norm(g, budget, seed);
    br.upper = up.value;
    br.upper_stderr = up.std_error;
    if (mg.norm() == 0.0) return br;

    // Pairing candidates f with embed U in X = ℓ_p: value |tr(Uᵀ M_g)| / ‖U‖_γ.
    const SpaceSpec x = g.space.dual();
    const long search = std::max(200L, std::min(budget, 4000L));
    auto score = [&](const Matrix& u, long b, std::uint64_t s, double* se) {
        const BoundEstimate nu = randomized_sum_norm(u, x, SumKind::gaussian, b, s);
        const double pair = std::abs((u.array() * mg.array()).sum());
        if (se) *se = pair / nu.value * (nu.std_error / nu.value);
        return nu.value > 0 ? pair / nu.value : 0.0;
    };
    std::vector<Matrix> cands;
    cands.push_back(mg.conjugate());
    const double q = g.space.p;
    Matrix dual_like = mg.conjugate();
    for (Eigen::Index i = 0; i < mg.size(); ++i) {
        const double a = std::abs(mg(i));
        dual_like(i) = a > 0 ? std::conj(mg(i)) * std::pow(a, q - 2.0) : Scalar(0.0);
    }
    cands.push_back(dual_like);
    Matrix best = cands[0];
    double best_score = -1.0;
    for (const auto& c : cands) {
        const double s = score(c, search, seed + 17, nullptr);
        if (s > best_score) best_score = s, best = c;
    }
    std::mt19937_64 rng(seed + 29);
    std::normal_distribution<double> nd;
    double step = 0.3;
    for (int it = 0; it < 30 && step > 1e-3; ++it) {
        Matrix trial = best;
        for (Eigen::Index i = 0; i < trial.size(); ++i)
            trial(i) *= std::exp(Scalar(step * nd(rng), step * nd(rng)));
        const double s = score(trial, search, seed + 17, nullptr);
        if (s > best_score)
            best_score = s, best = trial;
        else
            step *= 0.8;
    }
    double se = 0.0;
    br.lower = score(best, budget, seed + 31, &se);
    br.lower_stderr = se;
    return br;
}

HolderResult holder_pairing(const SampledFunction& f, const SampledFunction& g, long budget,
                            std::uint64_t seed) {
    if (!f.grid.compatible(g.grid)) throw GridMismatch("pairing needs identical grids");
    if (f.space.n != g.space.n || std::abs(1.0 / f.space.p + 1.0 / g.space.p - 1.0) > 1e-12)
        throw std::invalid_argument("g must take values in the dual space of f");
    HolderResult res;
    for (int j = 0; j < f.grid.size(); ++j) {
        const Scalar local = (f.values.col(j).array() * g.values.col(j).array()).sum();
        res.pairing += f.grid.w(j) * local;
        res.abs_integral += f.grid.w(j) * std::abs(local);
    }
    const BoundEstimate nf = gamma_norm(f, budget, seed);
    const DualBracket bg = gamma_dual_norm(g, budget, seed + 1);
    res.bound = nf.value * bg.upper;
    res.bound_stderr = nf.value * bg.upper_stderr + bg.upper * nf.std_error;
    if (res.abs_integral > res.bound * (1.0 + 1e-12) + 3.0 * res.bound_stderr + 1e-300)
        throw ViolationFound("Hölder pairing inequality violated",
                             json{{"abs_integral", res.abs_integral}, {"bound", res.bound},
                                  {"stderr", res.bound_stderr}});
    return res;
}

MultiplierResult pointwise_multiplier(const std::vector<Matrix>& family, const SampledFunction& f,
                                      bool transpose, long budget, std::uint64_t seed) {
    if (static_cast<int>(family.size()) != f.grid.size())
        throw GridMismatch("one multiplier matrix per node is required");
    std::vector<Matrix> acting;
    acting.reserve(family.size());
    Matrix values(f.space.n, f.grid.size());
    for (int j = 0; j < f.grid.size(); ++j) {
        acting.push_back(transpose ? Matrix(family[j].transpose()) : family[j]);
        values.col(j) = acting.back() * f.values.col(j);
    }
    MultiplierResult res;
    res.image = SampledFunction(f.grid, std::move(values), f.space);
    res.image_norm = gamma_norm(res.image, budget, seed);
    res.input_norm = gamma_norm(f, budget, seed);
    BoundOptions bo;
    bo.seed = seed + 3;
    bo.budget = budget;
    res.family_bound = bound_estimate(acting, f.space, BoundKind::gamma, bo).estimate;
    const double k = res.family_bound.value;
    res.rhs = k * res.input_norm.value;
    const double se = res.image_norm.std_error + k * res.input_norm.std_error +
                      res.input_norm.value * res.family_bound.std_error;
    if (res.image_norm.value > res.rhs * (1.0 + 1e-12) + 3.0 * se + 1e-300)
        throw ViolationFound("pointwise multiplier inequality violated",
                             json{{"lhs", res.image_norm.value}, {"rhs", res.rhs}, {"stderr", se}});
    return res;
}

}  // namespace hinf
