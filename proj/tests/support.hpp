#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include "gew/data.hpp"
#include "gew/model.hpp"
#include "gew/posterior.hpp"
#include "gew/util.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

namespace gew::testing
{

/// Kolmogorov-Smirnov distance between the empirical CDF of `xs` and `cdf`.
inline double ks_statistic(std::vector<double> xs, const std::function<double(double)>& cdf)
{
    std::sort(xs.begin(), xs.end());
    const double n = static_cast<double>(xs.size());
    double d = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i)
    {
        const double f = cdf(xs[i]);
        d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
    }
    return d;
}

inline double gamma_cdf(double shape, double rate, double x)
{
    return x <= 0.0 ? 0.0 : boost::math::gamma_p(shape, rate * x);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

inline double uniform_cdf(double lo, double hi, double x) { return std::clamp((x - lo) / (hi - lo), 0.0, 1.0); }

/// CDF of the prior of one parameter (gamma or uniform, beta truncated to
/// positive values for a uniform that straddles zero).
inline double prior_cdf(const PriorSpec& p, double x)
{
    if (const auto* u = std::get_if<UniformPrior>(&p))
        return uniform_cdf(u->lo, u->hi, x);
    const auto& g = std::get<GammaPrior>(p);
    return gamma_cdf(g.shape, g.rate, x);
}

/// Random dataset with arbitrary (non-model) failure times so that the
/// likelihood oracle is not tied to the simulator.  Times span several
/// decades to exercise the power sums.
inline AltDataset random_dataset(Rng& rng, std::size_t groups, CensoringKind kind)
{
    AltDataset d;
    d.use_stress = default_use_stress();
    for (std::size_t i = 0; i < groups; ++i)
    {
        TestGroup g;
        g.label = "g" + std::to_string(i + 1);
        g.stress = StressLevel::make(300.0 + 15.0 * static_cast<double>(i) + rng.uniform(0.0, 10.0),
                                     rng.uniform(0.2, 0.95));
        g.n = 2 + static_cast<std::size_t>(rng.uniform() * 30.0);
        g.scheme = kind;
        const std::size_t r = kind == CensoringKind::Complete
                                  ? g.n
                                  : 1 + static_cast<std::size_t>(rng.uniform() * static_cast<double>(g.n));
        for (std::size_t j = 0; j < r; ++j)
            g.failures.push_back(std::exp(rng.uniform(-1.0, 7.0)));
        std::sort(g.failures.begin(), g.failures.end());
        if (kind == CensoringKind::TypeI)
            g.tau = g.failures.back() * rng.uniform(1.0, 3.0);
        else if (kind == CensoringKind::TypeII)
            g.tau = g.failures.back();
        d.groups.push_back(std::move(g));
    }
    validate(d);
    return d;
}

/// Log-likelihood summed one observation at a time from the density and
/// reliability functions.
inline double naive_log_likelihood(const GewParams& p, const AltDataset& d)
{
    double ll = 0.0;
    for (const auto& g : d.groups)
    {
        for (double x : g.failures)
            ll += gew_log_pdf(p, g.stress, x);
        if (g.censored_count() > 0)
            ll += static_cast<double>(g.censored_count()) * gew_log_reliability(p, g.stress, g.tau);
    }
    return ll;
}

/// Uniform draw inside the support of one conditional, kept away from the
/// edges so that finite differences stay inside.
inline double interior_point(Rng& rng, const Support& s, double unbounded_scale = 10.0)
{
    double lo = s.lo;
    double hi = std::isfinite(s.hi) ? s.hi : lo + unbounded_scale;
    if (!std::isfinite(lo))
        lo = hi - 2.0 * unbounded_scale;
    const double pad = 1e-3 * (hi - lo);
    return rng.uniform(lo + pad, hi - pad);
}

} // namespace gew::testing
