#include "huberfactor/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>

#include "huberfactor/errors.hpp"

namespace huberfactor {

namespace {

constexpr Index kBurnIn = 50;

enum Stream : std::uint64_t { kLoadings = 1, kInnovations = 2, kReturnScales = 3 };

double standard_normal(Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    return normal(rng);
}

double open_uniform(Rng& rng) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double u = 0.0;
    while (u == 0.0) u = unif(rng);
    return u;
}

void require_nu(double nu, const char* who) {
    if (!(nu > 0.0) || !std::isfinite(nu)) {
        throw ParameterError(std::string(who) + ": nu must be positive and finite");
    }
}

// (f_t', v_t') for one (extended) time index, drawn from its own stream.
void draw_innovations(const InnovationLaw& law, Index r, Index n, Rng& rng, Eigen::Ref<Vector> f,
                      Eigen::Ref<Vector> v) {
    using K = InnovationLaw::Kind;
    switch (law.kind) {
        case K::gaussian:
            for (Index j = 0; j < r; ++j) f(j) = standard_normal(rng);
            for (Index i = 0; i < n; ++i) v(i) = standard_normal(rng);
            break;
        case K::mvt: {
            const Vector joint = gen_mvt(law.nu, r + n, rng);
            f = joint.head(r);
            v = joint.tail(n);
            break;
        }
        case K::gaussian_factors_mvt_errors:
            for (Index j = 0; j < r; ++j) f(j) = standard_normal(rng);
            v = gen_mvt(law.nu, n, rng);
            break;
        case K::alpha_stable:
            for (Index j = 0; j < r; ++j) f(j) = gen_alpha_stable(law.alpha, 0.0, 1.0, 0.0, rng);
            for (Index i = 0; i < n; ++i) v(i) = gen_alpha_stable(law.alpha, 0.0, 1.0, 0.0, rng);
            break;
        case K::skew_t_factors_stable_errors:
            for (Index j = 0; j < r; ++j) f(j) = gen_skew_t(law.nu, law.skew, rng);
            for (Index i = 0; i < n; ++i) v(i) = gen_alpha_stable(law.alpha, 0.0, 1.0, 0.0, rng);
            break;
    }
}

}  // namespace

std::string InnovationLaw::name() const {
    switch (kind) {
        case Kind::gaussian: return "gaussian";
        case Kind::mvt: return "mvt(" + format_double(nu) + ")";
        case Kind::gaussian_factors_mvt_errors: return "gaussian_factors_mvt_errors(" + format_double(nu) + ")";
        case Kind::alpha_stable: return "alpha_stable(" + format_double(alpha) + ")";
        case Kind::skew_t_factors_stable_errors:
            return "skew_t_factors_stable_errors(" + format_double(alpha) + "," + format_double(skew) + "," +
                   format_double(nu) + ")";
    }
    return "unknown";
}

bool InnovationLaw::finite_variance() const {
    switch (kind) {
        case Kind::gaussian: return true;
        case Kind::mvt:
        case Kind::gaussian_factors_mvt_errors: return nu > 2.0;
        case Kind::alpha_stable: return alpha >= 2.0;
        case Kind::skew_t_factors_stable_errors: return alpha >= 2.0 && nu > 2.0;
    }
    return false;
}

void SimConfig::validate() const {
    if (n < 1 || t < 1 || r < 1) throw ParameterError("SimConfig: N, T and r must be positive");
    if (!(theta >= 0.0)) throw ParameterError("SimConfig: theta must be non-negative");
    if (!(rho >= 0.0 && rho < 1.0)) throw ParameterError("SimConfig: rho must lie in [0, 1)");
    if (!(beta >= 0.0 && beta < 1.0)) throw ParameterError("SimConfig: beta must lie in [0, 1)");
    if (j < 0 || j > n) throw ParameterError("SimConfig: J must lie in [0, N]");
    using K = InnovationLaw::Kind;
    if (dist.kind != K::gaussian && dist.kind != K::alpha_stable) require_nu(dist.nu, "SimConfig");
    if ((dist.kind == K::alpha_stable || dist.kind == K::skew_t_factors_stable_errors) &&
        !(dist.alpha > 0.0 && dist.alpha <= 2.0)) {
        throw ParameterError("SimConfig: alpha must lie in (0, 2]");
    }
}

SimConfig scenario_config(char scenario, int case_id, Index n, Index t, std::uint64_t seed) {
    SimConfig cfg;
    cfg.n = n;
    cfg.t = t;
    cfg.r = 3;
    cfg.theta = 1.0;
    cfg.seed = seed;
    const char s = static_cast<char>(std::toupper(static_cast<unsigned char>(scenario)));
    const bool correlated = s == 'B' || s == 'D';
    if (s == 'A' || s == 'B') {
        switch (case_id) {
            case 1: cfg.dist = InnovationLaw::gaussian(); break;
            case 2: cfg.dist = InnovationLaw::mvt(3.0); break;
            case 3: cfg.dist = InnovationLaw::gaussian_factors_mvt_errors(3.0); break;
            case 4: cfg.dist = InnovationLaw::alpha_stable(1.9); break;
            case 5: cfg.dist = InnovationLaw::skew_t_factors_stable_errors(1.9, 20.0, 3.0); break;
            default:
                throw ParameterError("scenario " + std::string(1, s) + " has cases 1-5, got " +
                                     std::to_string(case_id));
        }
    } else if (s == 'C' || s == 'D') {
        switch (case_id) {
            case 1: cfg.dist = InnovationLaw::gaussian(); break;
            case 2: cfg.dist = InnovationLaw::mvt(5.0); break;
            case 3: cfg.dist = InnovationLaw::mvt(3.0); break;
            default:
                throw ParameterError("scenario " + std::string(1, s) + " has cases 1-3, got " +
                                     std::to_string(case_id));
        }
    } else {
        throw ParameterError("unknown scenario '" + std::string(1, scenario) + "' (valid: A, B, C, D)");
    }
    if (correlated) {
        cfg.rho = 0.5;
        cfg.beta = 0.2;
        cfg.j = std::min<Index>(std::max<Index>(10, n / 20), n);
    }
    return cfg;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
    auto mix = [](std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    };
    return mix(mix(mix(master) ^ stream) ^ index);
}

double gen_alpha_stable(double alpha, double skew, double scale, double loc, Rng& rng) {
    if (!(alpha > 0.0 && alpha <= 2.0)) {
        throw ParameterError("gen_alpha_stable: alpha must lie in (0, 2], got " + std::to_string(alpha));
    }
    if (!(skew >= -1.0 && skew <= 1.0)) throw ParameterError("gen_alpha_stable: skew must lie in [-1, 1]");
    if (!(scale > 0.0)) throw ParameterError("gen_alpha_stable: scale must be positive");
    using std::numbers::pi;
    if (alpha == 2.0) {
        return loc + scale * std::numbers::sqrt2 * standard_normal(rng);
    }
    const double v = pi * (open_uniform(rng) - 0.5);
    std::exponential_distribution<double> exponential(1.0);
    double w = 0.0;
    while (w == 0.0) w = exponential(rng);

    if (alpha == 1.0) {
        const double half_pi = 0.5 * pi;
        const double shifted = half_pi + skew * v;
        const double x =
            (2.0 / pi) * (shifted * std::tan(v) - skew * std::log(half_pi * w * std::cos(v) / shifted));
        return scale * x + (2.0 / pi) * skew * scale * std::log(scale) + loc;
    }
    const double tan_term = skew * std::tan(0.5 * pi * alpha);
    const double b = std::atan(tan_term) / alpha;
    const double s = std::pow(1.0 + tan_term * tan_term, 1.0 / (2.0 * alpha));
    const double x = s * std::sin(alpha * (v + b)) / std::pow(std::cos(v), 1.0 / alpha) *
                     std::pow(std::cos(v - alpha * (v + b)) / w, (1.0 - alpha) / alpha);
    return scale * x + loc;
}

Vector gen_mvt(double nu, Index dim, Rng& rng) {
    require_nu(nu, "gen_mvt");
    if (dim < 1) throw ParameterError("gen_mvt: dim must be positive");
    std::chi_squared_distribution<double> chi2(nu);
    double w = 0.0;
    while (w == 0.0) w = chi2(rng);
    const double mix = 1.0 / std::sqrt(w / nu);
    Vector out(dim);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (Index k = 0; k < dim; ++k) out(k) = normal(rng) * mix;
    return out;
}

double gen_skew_t(double nu, double alpha_skew, Rng& rng) {
    require_nu(nu, "gen_skew_t");
    if (!std::isfinite(alpha_skew)) throw ParameterError("gen_skew_t: skewness parameter must be finite");
    const double delta = alpha_skew / std::sqrt(1.0 + alpha_skew * alpha_skew);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double u0 = normal(rng);
    const double u1 = delta * u0 + std::sqrt(1.0 - delta * delta) * normal(rng);
    const double z = u0 > 0.0 ? u1 : -u1;
    std::chi_squared_distribution<double> chi2(nu);
    double w = 0.0;
    while (w == 0.0) w = chi2(rng);
    return z / std::sqrt(w / nu);
}

GroundTruth gen_scenario(const SimConfig& cfg) {
    cfg.validate();
    const Index n = cfg.n;
    const Index r = cfg.r;
    const Index steps = cfg.t + kBurnIn;

    Matrix loadings(n, r);
    for (Index i = 0; i < n; ++i) {
        Rng rng(derive_seed(cfg.seed, kLoadings, static_cast<std::uint64_t>(i)));
        for (Index k = 0; k < r; ++k) loadings(i, k) = standard_normal(rng);
    }

    Matrix factors(cfg.t, r);
    Matrix errors(n, cfg.t);
    Vector f(r), v(n), e = Vector::Zero(n), window_sum(n), prefix(n + 1);
    const double b = cfg.beta;
    for (Index s = 0; s < steps; ++s) {
        Rng rng(derive_seed(cfg.seed, kInnovations, static_cast<std::uint64_t>(s)));
        draw_innovations(cfg.dist, r, n, rng, f, v);

        prefix(0) = 0.0;
        for (Index i = 0; i < n; ++i) prefix(i + 1) = prefix(i) + v(i);
        for (Index i = 0; i < n; ++i) {
            const Index lo = std::max<Index>(i - cfg.j, 0);
            const Index hi = std::min<Index>(i + cfg.j, n - 1);
            window_sum(i) = b == 0.0 ? 0.0 : b * (prefix(hi + 1) - prefix(lo));
        }
        e = cfg.rho * e + (1.0 - b) * v + window_sum;

        const Index t = s - kBurnIn;
        if (t >= 0) {
            factors.row(t) = f.transpose();
            errors.col(t) = e;
        }
    }
    const double scale = std::sqrt((1.0 - cfg.rho * cfg.rho) / (1.0 + 2.0 * static_cast<double>(cfg.j) * b * b));
    Matrix y = loadings * factors.transpose();
    if (cfg.theta > 0.0) y += std::sqrt(cfg.theta) * scale * errors;
    return {std::move(loadings), std::move(factors), Panel(std::move(y))};
}

GroundTruth gen_factor_returns(const ReturnSimConfig& cfg) {
    if (cfg.n < 1 || cfg.t < 1 || cfg.r < 1) throw ParameterError("ReturnSimConfig: N, T and r must be positive");
    require_nu(cfg.nu, "gen_factor_returns");
    const Index n = cfg.n;
    const Index r = cfg.r;

    Matrix loadings(n, r);
    Vector idio_scale(n);
    for (Index i = 0; i < n; ++i) {
        Rng rng(derive_seed(cfg.seed, kLoadings, static_cast<std::uint64_t>(i)));
        loadings(i, 0) = 1.0 + 0.3 * standard_normal(rng);
        for (Index k = 1; k < r; ++k) loadings(i, k) = standard_normal(rng);
        Rng scale_rng(derive_seed(cfg.seed, kReturnScales, static_cast<std::uint64_t>(i)));
        idio_scale(i) = 1.0 + 2.0 * open_uniform(scale_rng);
    }
    // Percent-like magnitudes: market factor sd 4, others sd 2.
    const double t_sd = std::sqrt(cfg.nu > 2.0 ? cfg.nu / (cfg.nu - 2.0) : 1.0);
    Matrix factors(cfg.t, r);
    Matrix noise(n, cfg.t);
    for (Index t = 0; t < cfg.t; ++t) {
        Rng rng(derive_seed(cfg.seed, kInnovations, static_cast<std::uint64_t>(t)));
        const Vector f = gen_mvt(cfg.nu, r, rng) / t_sd;
        factors(t, 0) = 4.0 * f(0);
        for (Index k = 1; k < r; ++k) factors(t, k) = 2.0 * f(k);
        for (Index i = 0; i < n; ++i) noise(i, t) = idio_scale(i) * gen_mvt(cfg.nu, 1, rng)(0) / t_sd;
    }
    Matrix y = loadings * factors.transpose() + noise;
    return {std::move(loadings), std::move(factors), Panel(std::move(y))};
}

}  // namespace huberfactor
