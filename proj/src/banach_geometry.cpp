#include "hinfty/banach_geometry.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hinf {

double conjugate_exponent(double p) {
    if (p == 1.0) return kInf;
    if (std::isinf(p)) return 1.0;
    return p / (p - 1.0);
}

SpaceSpec::SpaceSpec(double p_, int n_) : p(p_), n(n_) {
    if (!(p >= 1.0)) throw std::invalid_argument("exponent p must satisfy p >= 1");
    if (n < 1) throw std::invalid_argument("dimension must be positive");
}

double SpaceSpec::dual_p() const { return conjugate_exponent(p); }

double SpaceSpec::norm(const Vector& x) const { return lp_norm(x, p); }

json SpaceSpec::to_json() const {
    json j{{"n", n}};
    if (std::isinf(p))
        j["p"] = "inf";
    else
        j["p"] = p;
    return j;
}

SpaceSpec SpaceSpec::from_json(const json& j) {
    double p = 2.0;
    const auto& jp = j.at("p");
    if (jp.is_string()) {
        if (jp.get<std::string>() != "inf") throw std::invalid_argument("p must be a number or \"inf\"");
        p = kInf;
    } else {
        p = jp.get<double>();
    }
    return SpaceSpec(p, j.value("n", 1));
}

double lp_norm(const Vector& x, double p) {
    if (x.size() == 0) return 0.0;
    if (p == 2.0) return x.norm();
    const RealVector a = x.cwiseAbs();
    const double scale = a.maxCoeff();
    if (scale == 0.0 || std::isinf(p)) return scale;
    if (p == 1.0) return a.sum();
    return scale * std::pow((a / scale).array().pow(p).sum(), 1.0 / p);
}

Vector duality_map(const Vector& y, double p) {
    const int n = static_cast<int>(y.size());
    Vector w = Vector::Zero(n);
    const double ny = lp_norm(y, p);
    if (ny == 0.0) return w;
    auto phase = [](Scalar v) { return std::abs(v) > 0 ? std::conj(v) / std::abs(v) : Scalar(0.0); };
    if (std::isinf(p)) {
        Eigen::Index k = 0;
        y.cwiseAbs().maxCoeff(&k);
        w(k) = phase(y(k));
        return w;
    }
    if (p == 1.0) {
        for (int i = 0; i < n; ++i) w(i) = phase(y(i));
        return w;
    }
    for (int i = 0; i < n; ++i) w(i) = phase(y(i)) * std::pow(std::abs(y(i)) / ny, p - 1.0);
    return w;
}

std::string to_string(EstimateMethod m) {
    switch (m) {
        case EstimateMethod::exact_hilbert: return "exact-hilbert";
        case EstimateMethod::rademacher_enum: return "rademacher-enum";
        case EstimateMethod::gaussian_mc: return "gaussian-mc";
        case EstimateMethod::randomized_search: return "randomized-search";
    }
    return "unknown";
}

json BoundEstimate::to_json() const {
    return json{{"value", value},           {"stderr", std_error}, {"method", to_string(method)},
                {"samples", samples},       {"seed", seed},        {"witnesses", witnesses}};
}

namespace {

// Squared p-norms of the columns of a real modulus matrix.
Eigen::ArrayXd column_norms_sq(const Eigen::MatrixXd& mod, double p) {
    if (p == 2.0) return mod.array().square().colwise().sum().transpose();
    if (std::isinf(p)) return mod.array().colwise().maxCoeff().square().transpose();
    if (p == 1.0) return mod.array().colwise().sum().square().transpose();
    return mod.array().pow(p).colwise().sum().pow(2.0 / p).transpose();
}

struct Kahan {
    double sum = 0.0, c = 0.0;
    void add(double v) {
        const double y = v - c;
        const double t = sum + y;
        c = (t - sum) - y;
        sum = t;
    }
};

void enumerate(const Matrix& x, double p, int k, Vector& partial, double& acc) {
    if (k == x.cols()) {
        const double v = lp_norm(partial, p);
        acc += v * v;
        return;
    }
    static const Scalar units[4] = {Scalar(1, 0), Scalar(0, 1), Scalar(-1, 0), Scalar(0, -1)};
    for (const Scalar& u : units) {
        partial += u * x.col(k);
        enumerate(x, p, k + 1, partial, acc);
        partial -= u * x.col(k);
    }
}

// Square root factor of the covariance of Σ g_k x_k for complex Gaussian g.
Matrix gaussian_factor(const Matrix& x) {
    if (x.cols() <= x.rows()) return x;
    Eigen::SelfAdjointEigenSolver<Matrix> es(x * x.adjoint());
    RealVector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * d.asDiagonal();
}

}  // namespace

double rademacher_enumeration(const Matrix& x, double p) {
    const int m = static_cast<int>(x.cols());
    if (m == 0) return 0.0;
    // ε_1 = 1 by phase invariance of the norm.
    Vector partial = x.col(0);
    double acc = 0.0;
    enumerate(x, p, 1, partial, acc);
    return std::sqrt(acc / std::pow(4.0, m - 1));
}

BoundEstimate randomized_sum_norm(const Matrix& x, const SpaceSpec& space, SumKind kind,
                                  long budget, std::uint64_t seed) {
    if (budget < 1) throw BudgetTooSmall("budget must be at least 1");
    if (x.rows() != space.n && x.cols() > 0)
        throw std::invalid_argument("vector length does not match the space dimension");
    BoundEstimate est;
    est.seed = seed;
    const int m = static_cast<int>(x.cols());
    const int n = static_cast<int>(x.rows());
    if (m == 0) return est;
    if (space.hilbert()) {
        est.value = x.norm();
        est.method = EstimateMethod::exact_hilbert;
        return est;
    }
    if (m == 1) {
        est.value = lp_norm(x.col(0), space.p);
        est.method = EstimateMethod::rademacher_enum;
        est.samples = 1;
        return est;
    }
    if (kind == SumKind::rademacher && m <= 10) {
        est.value = rademacher_enumeration(x, space.p);
        est.method = EstimateMethod::rademacher_enum;
        est.samples = static_cast<long>(std::pow(4.0, m - 1));
        return est;
    }
    if (budget < 100) throw BudgetTooSmall("Monte-Carlo estimation needs at least 100 samples");

    const Matrix factor = kind == SumKind::gaussian ? gaussian_factor(x) : x;
    const int k = static_cast<int>(factor.cols());
    const bool real_factor = factor.imag().cwiseAbs().maxCoeff() == 0.0;
    const Eigen::MatrixXd fre = factor.real();

    std::vector<double> batch_sum(kJackknifeBatches, 0.0);
    std::vector<long> batch_count(kJackknifeBatches, 0);
    for (int b = 0; b < kJackknifeBatches; ++b) {
        const long s = budget / kJackknifeBatches + (b < budget % kJackknifeBatches ? 1 : 0);
        batch_count[b] = s;
        if (s == 0) continue;
        std::seed_seq sq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                         static_cast<std::uint32_t>(b)};
        std::mt19937_64 rng(sq);
        Eigen::MatrixXd mod(n, s);
        if (kind == SumKind::rademacher) {
            std::uniform_int_distribution<int> quarter(0, 3);
            static const Scalar units[4] = {Scalar(1, 0), Scalar(0, 1), Scalar(-1, 0), Scalar(0, -1)};
            Matrix g(k, s);
            for (long c = 0; c < s; ++c)
                for (int r = 0; r < k; ++r) g(r, c) = units[quarter(rng)];
            mod = (factor * g).cwiseAbs();
        } else if (kind == SumKind::real_gaussian) {
            std::normal_distribution<double> nd(0.0, 1.0);
            Eigen::MatrixXd g(k, s);
            for (long c = 0; c < s; ++c)
                for (int r = 0; r < k; ++r) g(r, c) = nd(rng);
            mod = real_factor ? Eigen::MatrixXd((fre * g).cwiseAbs()) : Eigen::MatrixXd((factor * g.cast<Scalar>()).cwiseAbs());
        } else {
            std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
            Eigen::MatrixXd gr(k, s), gi(k, s);
            for (long c = 0; c < s; ++c)
                for (int r = 0; r < k; ++r) {
                    gr(r, c) = nd(rng);
                    gi(r, c) = nd(rng);
                }
            if (real_factor) {
                Eigen::MatrixXd yr = fre * gr, yi = fre * gi;
                mod = (yr.array().square() + yi.array().square()).sqrt().matrix();
            } else {
                Matrix g(k, s);
                g.real() = gr;
                g.imag() = gi;
                mod = (factor * g).cwiseAbs();
            }
        }
        Kahan acc;
        const Eigen::ArrayXd sq_norms = column_norms_sq(mod, space.p);
        for (Eigen::Index c = 0; c < sq_norms.size(); ++c) acc.add(sq_norms(c));
        batch_sum[b] = acc.sum;
    }

    Kahan total;
    for (double v : batch_sum) total.add(v);
    est.value = std::sqrt(total.sum / budget);
    std::vector<double> theta;
    for (int b = 0; b < kJackknifeBatches; ++b)
        if (batch_count[b] > 0)
            theta.push_back(std::sqrt((total.sum - batch_sum[b]) / (budget - batch_count[b])));
    const double nb = static_cast<double>(theta.size());
    double mean = 0.0;
    for (double t : theta) mean += t / nb;
    double var = 0.0;
    for (double t : theta) var += (t - mean) * (t - mean);
    est.std_error = std::sqrt((nb - 1.0) / nb * var);
    if (est.std_error == 0.0) est.std_error = std::numeric_limits<double>::min();
    est.method = EstimateMethod::gaussian_mc;
    est.samples = budget;
    return est;
}

BoundEstimate randomized_sum_norm(const std::vector<Vector>& vectors, const SpaceSpec& space,
                                  SumKind kind, long budget, std::uint64_t seed) {
    Matrix x(space.n, static_cast<Eigen::Index>(vectors.size()));
    for (size_t k = 0; k < vectors.size(); ++k) {
        if (vectors[k].size() != space.n)
            throw std::invalid_argument("vector length does not match the space dimension");
        x.col(k) = vectors[k];
    }
    return randomized_sum_norm(x, space, kind, budget, seed);
}

namespace {

struct Candidate {
    std::vector<int> idx;
    Matrix x;  // n × m
    double ratio = 0.0;
};

class RatioEvaluator {
public:
    RatioEvaluator(const std::vector<Matrix>& fam, const SpaceSpec& space, BoundKind kind,
                   int m_max, long search_budget, std::uint64_t seed)
        : fam_(fam), space_(space), kind_(kind) {
        if (kind_ == BoundKind::gamma && !space_.hilbert()) {
            std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
            std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
            crn_.resize(m_max, search_budget);
            for (long c = 0; c < search_budget; ++c)
                for (int r = 0; r < m_max; ++r) crn_(r, c) = Scalar(nd(rng), nd(rng));
        }
    }

    Matrix image(const Candidate& c) const {
        Matrix y(c.x.rows(), c.x.cols());
        for (size_t i = 0; i < c.idx.size(); ++i) y.col(i) = fam_[c.idx[i]] * c.x.col(i);
        return y;
    }

    double sum_norm(const Matrix& cols) const {
        if (space_.hilbert()) return cols.norm();
        if (cols.cols() == 1) return lp_norm(cols.col(0), space_.p);
        if (kind_ == BoundKind::r) return rademacher_enumeration(cols, space_.p);
        Matrix y = cols * crn_.topRows(cols.cols());
        return std::sqrt(column_norms_sq(y.cwiseAbs(), space_.p).mean());
    }

    double ratio(const Candidate& c) const {
        const double den = sum_norm(c.x);
        return den > 0 ? sum_norm(image(c)) / den : 0.0;
    }

private:
    const std::vector<Matrix>& fam_;
    SpaceSpec space_;
    BoundKind kind_;
    Matrix crn_;
};

}  // namespace

FamilyBound bound_estimate(const std::vector<Matrix>& family, const SpaceSpec& space,
                           BoundKind kind, const BoundOptions& opts) {
    if (family.empty()) throw std::invalid_argument("operator family is empty");
    const int n = space.n;
    for (const auto& t : family)
        if (t.rows() != n || t.cols() != n) throw std::invalid_argument("family member has wrong shape");
    const int m_max = std::clamp(opts.m_max, 1, 10);
    const int fam_size = static_cast<int>(family.size());

    FamilyBound out;
    RatioEvaluator eval(family, space, kind, m_max, std::max(100L, opts.search_budget), opts.seed);

    Candidate best;
    std::vector<Vector> witness_x(fam_size);
    for (int k = 0; k < fam_size; ++k) {
        NormWitness w = operator_norm_witness(family[k], space.p, opts.seed + k);
        witness_x[k] = w.x;
        if (best.idx.empty() || w.value > best.ratio) {
            best.idx = {k};
            best.x = w.x;
            best.ratio = w.value;
        }
    }
    const double single_best = best.ratio;

    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> nd;
    std::uniform_int_distribution<int> pick(0, fam_size - 1);
    std::uniform_int_distribution<int> pick_m(std::min(2, m_max), m_max);
    auto random_vector = [&]() {
        Vector v(n);
        for (int i = 0; i < n; ++i) v(i) = Scalar(nd(rng), nd(rng));
        return Vector(v / lp_norm(v, space.p));
    };

    if (m_max >= 2 && !space.hilbert()) {
        for (int r = 0; r < opts.restarts; ++r) {
            Candidate c;
            const int m = pick_m(rng);
            c.x.resize(n, m);
            for (int i = 0; i < m; ++i) {
                c.idx.push_back(pick(rng));
                c.x.col(i) = (r % 2 == 0) ? witness_x[c.idx[i]] : random_vector();
            }
            c.ratio = eval.ratio(c);
            double step = 0.5;
            for (int it = 0; it < opts.ascent_iterations && step > 1e-4; ++it) {
                bool improved = false;
                for (int i = 0; i < m; ++i) {
                    Candidate trial = c;
                    trial.x.col(i) += step * lp_norm(c.x.col(i), space.p) * random_vector();
                    if (it % 3 == 2) trial.idx[i] = pick(rng);
                    trial.ratio = eval.ratio(trial);
                    if (trial.ratio > c.ratio) {
                        c = std::move(trial);
                        improved = true;
                    }
                }
                if (!improved) step *= 0.5;
            }
            if (c.ratio > best.ratio) best = c;
        }
    }

    BoundEstimate& est = out.estimate;
    est.seed = opts.seed;
    est.value = best.ratio;
    const int m_best = static_cast<int>(best.idx.size());
    if (space.hilbert()) {
        est.method = EstimateMethod::exact_hilbert;
    } else if (kind == BoundKind::r || m_best == 1) {
        est.method = EstimateMethod::rademacher_enum;
        est.samples = static_cast<long>(std::pow(4.0, m_best - 1));
    } else {
        // Re-evaluate the winner on fresh samples to remove selection bias;
        // numerator and denominator share the samples, ratio stderr by jackknife.
        const Matrix img = eval.image(best);
        std::mt19937_64 fresh(opts.seed + 101);
        std::normal_distribution<double> gd(0.0, std::sqrt(0.5));
        std::vector<double> num_b(kJackknifeBatches, 0.0), den_b(kJackknifeBatches, 0.0);
        for (int b = 0; b < kJackknifeBatches; ++b) {
            const long s = opts.budget / kJackknifeBatches + (b < opts.budget % kJackknifeBatches ? 1 : 0);
            Matrix g(m_best, s);
            for (long c = 0; c < s; ++c)
                for (int r = 0; r < m_best; ++r) g(r, c) = Scalar(gd(fresh), gd(fresh));
            num_b[b] = column_norms_sq((img * g).cwiseAbs(), space.p).sum();
            den_b[b] = column_norms_sq((best.x * g).cwiseAbs(), space.p).sum();
        }
        double num_t = 0.0, den_t = 0.0;
        for (int b = 0; b < kJackknifeBatches; ++b) num_t += num_b[b], den_t += den_b[b];
        const double v = std::sqrt(num_t / den_t);
        std::vector<double> theta;
        for (int b = 0; b < kJackknifeBatches; ++b)
            theta.push_back(std::sqrt((num_t - num_b[b]) / (den_t - den_b[b])));
        double mean = 0.0, var = 0.0;
        for (double t : theta) mean += t / kJackknifeBatches;
        for (double t : theta) var += (t - mean) * (t - mean);
        const double rel = std::sqrt((kJackknifeBatches - 1.0) / kJackknifeBatches * var) / v;
        if (v >= single_best) {
            est.value = v;
            est.std_error = v * rel;
            est.method = EstimateMethod::gaussian_mc;
            est.samples = opts.budget;
        } else {
            est.value = single_best;
            est.method = EstimateMethod::rademacher_enum;
            est.samples = 1;
            best.idx.resize(1);
        }
    }
    est.witnesses.push_back(json{{"m", best.idx.size()}, {"indices", best.idx}, {"ratio", est.value}});

    if (space.hilbert()) {
        double sup = 0.0;
        for (const auto& t : family) sup = std::max(sup, t.jacobiSvd().singularValues()(0));
        out.hilbert_exact = sup;
        if (est.value > sup * (1.0 + 1e-12) + 3.0 * est.std_error)
            throw ViolationFound("estimate exceeds the exact Hilbert-space bound",
                                 json{{"estimate", est.value}, {"exact", sup}});
    }
    return out;
}

ContractionReport contraction_principle_check(const SpaceSpec& space, int trials,
                                              std::uint64_t seed, ContractionScalars scalars,
                                              int max_terms) {
    ContractionReport rep;
    rep.trials = trials;
    rep.limit = scalars == ContractionScalars::complex_disk ? 2.0 : 1.0;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> nd;
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::uniform_int_distribution<int> pick_m(1, std::clamp(max_terms, 1, 10));
    const int n = space.n;
    for (int t = 0; t < trials; ++t) {
        const int m = pick_m(rng);
        Matrix x(n, m);
        for (int c = 0; c < m; ++c)
            for (int r = 0; r < n; ++r) x(r, c) = Scalar(nd(rng), nd(rng));
        Vector a(m);
        for (int c = 0; c < m; ++c) {
            if (scalars == ContractionScalars::real_unit) {
                a(c) = ud(rng);
            } else {
                const double rad = ud(rng) < 0.5 ? 1.0 : std::sqrt(ud(rng));
                a(c) = std::polar(rad, 2.0 * kPi * ud(rng));
            }
        }
        Matrix ax = x * a.asDiagonal();
        const double den = space.hilbert() ? x.norm() : rademacher_enumeration(x, space.p);
        const double num = space.hilbert() ? ax.norm() : rademacher_enumeration(ax, space.p);
        const double ratio = num / den;
        if (ratio > rep.max_ratio) {
            rep.max_ratio = ratio;
            rep.worst = json{{"trial", t}, {"m", m}, {"ratio", ratio}};
        }
        if (ratio > rep.limit * (1.0 + 1e-12)) {
            json w{{"trial", t}, {"ratio", ratio}, {"limit", rep.limit},
                   {"scalars_re", std::vector<double>(a.real().data(), a.real().data() + m)},
                   {"scalars_im", std::vector<double>(a.imag().data(), a.imag().data() + m)},
                   {"vectors", matrix_to_json(x)}};
            throw ViolationFound("contraction principle violated", w);
        }
    }
    return rep;
}

AverageReport convex_average_check(const std::vector<Matrix>& family,
                                   const std::vector<double>& weights, AverageProfile profile,
                                   const SpaceSpec& space, int averaged_members,
                                   std::uint64_t seed, const BoundOptions& opts) {
    if (family.empty() || family.size() != weights.size())
        throw std::invalid_argument("family and weights must be nonempty and of equal length");
    const int count = static_cast<int>(family.size());
    const int n = space.n;
    AverageReport rep;

    if (profile == AverageProfile::l1) {
        rep.input_bound = space.hilbert() ? bound_estimate(family, space, BoundKind::r, opts).hilbert_exact.value()
                                          : bound_estimate(family, space, BoundKind::r, opts).estimate.value;
    } else {
        for (int j = 0; j < count; ++j) rep.input_bound += weights[j] * operator_norm(family[j], space.p);
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::vector<Matrix> averaged;
    for (int s = 0; s < averaged_members; ++s) {
        Vector h(count);
        for (int j = 0; j < count; ++j)
            h(j) = std::polar(s == 0 ? 1.0 : ud(rng), s == 0 ? 0.0 : 2.0 * kPi * ud(rng));
        if (profile == AverageProfile::l1) {
            double mass = 0.0;
            for (int j = 0; j < count; ++j) mass += weights[j] * std::abs(h(j));
            h /= mass;
        }
        Matrix avg = Matrix::Zero(n, n);
        for (int j = 0; j < count; ++j) avg += weights[j] * h(j) * family[j];
        averaged.push_back(avg);
    }
    BoundOptions o = opts;
    o.seed = seed + 1;
    const BoundEstimate est = bound_estimate(averaged, space, BoundKind::r, o).estimate;
    rep.averaged_bound = est.value;
    rep.averaged_stderr = est.std_error;
    rep.limit = 2.0 * rep.input_bound;
    if (rep.averaged_bound > rep.limit * (1.0 + 1e-12) + 3.0 * rep.averaged_stderr)
        throw ViolationFound("averaged family exceeds twice the input bound",
                             json{{"averaged", rep.averaged_bound}, {"limit", rep.limit}});
    return rep;
}

}  // namespace hinf
