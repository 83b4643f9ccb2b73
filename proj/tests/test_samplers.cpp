#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "gew/errors.hpp"
#include "gew/samplers.hpp"
#include "support.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace gew;

namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

UnivariateTarget gamma_target(double shape, double rate)
{
    UnivariateTarget t;
    t.name = "gamma";
    t.lo = 0.0;
    t.eval = [=](double x) -> LogDensityPoint {
        if (!(x > 0.0))
            return {-kInf, 0.0};
        return {(shape - 1.0) * std::log(x) - rate * x, (shape - 1.0) / x - rate, -(shape - 1.0) / (x * x)};
    };
    return t;
}

UnivariateTarget normal_target(double lo = -kInf, double hi = kInf, double mu = 0.0)
{
    UnivariateTarget t;
    t.name = "normal";
    t.lo = lo;
    t.hi = hi;
    t.eval = [=](double x) -> LogDensityPoint {
        if (!(x > lo && x < hi) && !(x == lo && std::isfinite(lo)))
            return {-kInf, 0.0};
        return {-0.5 * (x - mu) * (x - mu), -(x - mu), -1.0};
    };
    return t;
}

UnivariateTarget exponential_target(double hi)
{
    UnivariateTarget t;
    t.name = "exp";
    t.lo = 0.0;
    t.hi = hi;
    t.eval = [=](double x) -> LogDensityPoint {
        if (!(x >= 0.0 && x < hi))
            return {-kInf, 0.0};
        return {-x, -1.0, 0.0};
    };
    return t;
}

struct Moments
{
    double mean;
    double var;
};

Moments moments(const std::vector<double>& xs)
{
    double m = 0.0;
    for (double x : xs)
        m += x;
    m /= static_cast<double>(xs.size());
    double v = 0.0;
    for (double x : xs)
        v += (x - m) * (x - m);
    return {m, v / static_cast<double>(xs.size() - 1)};
}

SufficientStats unit_stats(const std::vector<double>& failures)
{
    AltDataset d;
    TestGroup g;
    g.stress.temperature = 1.0;
    g.stress.v = 0.0;
    g.n = failures.size();
    g.failures = failures;
    d.groups.push_back(g);
    return sufficient_stats(d);
}

AltDataset fixture_like(std::uint64_t seed)
{
    const std::vector<PlannedGroup> plan{{StressLevel::make(378.0, 0.6), 25},
                                         {StressLevel::make(378.0, 0.85), 25},
                                         {StressLevel::make(398.0, 0.6), 25},
                                         {StressLevel::make(398.0, 0.85), 25}};
    return simulate_dataset({14.0, 7.0, 0.6, 0.6, 1.95}, plan, CensoringScheme::type_i(100.0), seed);
}

double draw_prior(const PriorSpec& p, Rng& rng)
{
    if (const auto* u = std::get_if<UniformPrior>(&p))
        return rng.uniform(std::max(u->lo, 0.0), u->hi);
    const auto& g = std::get<GammaPrior>(p);
    std::gamma_distribution<double> dist(g.shape, 1.0 / g.rate);
    return dist(rng.engine());
}
} // namespace

TEST_CASE("ARS reproduces gamma(3, 2) moments")
{
    SamplerConfig cfg;
    Rng rng(1);
    const auto t = gamma_target(3.0, 2.0);
    std::vector<double> xs;
    for (int i = 0; i < 20000; ++i)
        xs.push_back(ars_sample(t, cfg, rng));
    const auto m = moments(xs);
    CHECK(std::abs(m.mean - 1.5) < 3.0 * std::sqrt(0.75 / 20000.0));
    // sd of the sample variance: sqrt((mu4 - sigma^4) / n) with mu4 = 5 sigma^4
    CHECK(std::abs(m.var - 0.75) < 3.0 * std::sqrt(4.0 * 0.75 * 0.75 / 20000.0));
}

TEST_CASE("ARS on a truncated exponential")
{
    SamplerConfig cfg;
    Rng rng(2);
    const auto t = exponential_target(100.0);
    std::vector<double> xs;
    for (int i = 0; i < 20000; ++i)
        xs.push_back(ars_sample(t, cfg, rng));
    CHECK(std::abs(moments(xs).mean - 1.0) < 3.0 / std::sqrt(20000.0));
    CHECK(testing::ks_statistic(xs, [](double x) { return -std::expm1(-x); }) < 0.02);
}

TEST_CASE("ARS stays inside a bounded support")
{
    SamplerConfig cfg;
    Rng rng(3);
    const auto t = normal_target(2.0, 3.0, 0.0);
    for (int i = 0; i < 5000; ++i)
    {
        const double x = ars_sample(t, cfg, rng);
        REQUIRE(x >= 2.0);
        REQUIRE(x < 3.0);
    }
}

TEST_CASE("ARS detects a non-log-concave target")
{
    UnivariateTarget t;
    t.name = "bimodal";
    t.lo = -10.0;
    t.hi = 10.0;
    t.eval = [](double x) -> LogDensityPoint {
        const double a = std::exp(-0.5 * (x - 4.0) * (x - 4.0));
        const double b = std::exp(-0.5 * (x + 4.0) * (x + 4.0));
        const double da = -(x - 4.0) * a, db = -(x + 4.0) * b;
        return {std::log(a + b), (da + db) / (a + b)};
    };
    SamplerConfig cfg;
    Rng rng(4);
    CHECK_THROWS_AS(
        [&] {
            for (int i = 0; i < 2000; ++i)
                ars_sample(t, cfg, rng);
        }(),
        ConcavityError);
}

TEST_CASE("ARS budget is enforced")
{
    SamplerConfig cfg;
    cfg.ars_max_trials = 0;
    CHECK_THROWS(cfg.validate());
    SamplerConfig ok;
    CHECK_NOTHROW(ok.validate());
}

TEST_CASE("envelope hull lies above and squeeze below the target")
{
    const auto t = gamma_target(2.5, 0.5);
    std::vector<ArsEnvelope::Point> pts;
    for (double x : {0.5, 3.0, 9.0})
    {
        const auto e = t.eval(x);
        pts.push_back({x, e.logpdf, e.grad});
    }
    ArsEnvelope env("gamma", 0.0, kInf, pts);
    Rng rng(6);
    for (int i = 0; i < 1000; ++i)
    {
        const double x = rng.uniform(1e-6, 40.0);
        const double h = t.logpdf(x);
        CHECK(env.upper(x) >= h - 1e-12);
        CHECK(env.lower(x) <= h + 1e-12);
    }
    // inserting a point keeps the invariants
    const auto e = t.eval(20.0);
    env.insert({20.0, e.logpdf, e.grad});
    CHECK(env.points().size() == 4);
    for (int i = 0; i < 100; ++i)
        CHECK(env.sample(rng) > 0.0);
}

TEST_CASE("slice sampler on a standard normal")
{
    SamplerConfig cfg;
    Rng rng(7);
    const auto t = normal_target();
    std::vector<double> xs;
    double x = 0.0;
    for (int i = 0; i < 50000; ++i)
        xs.push_back(x = slice_sample(t, x, cfg, rng));
    const auto m = moments(xs);
    CHECK(std::abs(m.mean) < 0.05);
    CHECK(m.var > 0.9);
    CHECK(m.var < 1.1);
}

TEST_CASE("slice width wider than the support")
{
    SamplerConfig cfg;
    cfg.slice_width = 50.0;
    Rng rng(8);
    const auto t = normal_target(0.0, 0.5, 0.2);
    double x = 0.25;
    for (int i = 0; i < 5000; ++i)
    {
        x = slice_sample(t, x, cfg, rng);
        REQUIRE(x >= 0.0);
        REQUIRE(x < 0.5);
    }
}

TEST_CASE("slice sampler is deterministic and rejects a bad start")
{
    SamplerConfig cfg;
    const auto t = gamma_target(2.0, 1.0);
    Rng a(9), b(9);
    CHECK(slice_sample(t, 1.3, cfg, a) == slice_sample(t, 1.3, cfg, b));
    CHECK_THROWS(slice_sample(t, -1.0, cfg, a));
}

TEST_CASE("gibbs with nothing to keep")
{
    const auto d = fixture_like(1);
    const auto prior = PriorConfig::preset("GEW1");
    const auto s = sufficient_stats(d);
    const auto out = gibbs_run(s, prior, {}, choose_initial_state(s, prior), 10, 0);
    CHECK(out.empty());
    CHECK(out.deviance.empty());
}

TEST_CASE("conjugate-like theta1 conditional")
{
    // other parameters pinned within 1e-9 of (0, 0, 0, 1)
    const std::vector<double> xs{0.5, 1.0, 1.5, 2.0, 3.0};
    const auto s = unit_stats(xs);
    auto prior = PriorConfig::uniform_all(0.0, 1e-9);
    prior[Param::Theta1] = GammaPrior{2.0, 1.0};
    prior[Param::Beta] = UniformPrior{1.0, 1.0 + 1e-9};

    // oracle: theta^(a-1) exp(-(b + r) theta - S exp(-theta)) normalised on a fine grid
    const double r = 5.0, S = 8.0;
    const int n_grid = 400000;
    const double top = 20.0, step = top / n_grid;
    std::vector<double> cdf(n_grid + 1, 0.0);
    auto dens = [&](double th) { return th <= 0.0 ? 0.0 : th * std::exp(-(1.0 + r) * th - S * std::exp(-th)); };
    for (int i = 1; i <= n_grid; ++i)
        cdf[i] = cdf[i - 1] + 0.5 * step * (dens((i - 1) * step) + dens(i * step));
    for (auto& c : cdf)
        c /= cdf.back();
    auto oracle = [&](double th) {
        const double pos = std::clamp(th / step, 0.0, static_cast<double>(n_grid) - 1.0);
        const auto i = static_cast<std::size_t>(pos);
        return cdf[i] + (pos - static_cast<double>(i)) * (cdf[i + 1] - cdf[i]);
    };

    SamplerConfig cfg;
    cfg.seed = 12;
    const GewParams init{1.0, 5e-10, 5e-10, 5e-10, 1.0 + 5e-10};
    const auto out = gibbs_run(s, prior, cfg, init, 100, 20000);
    CHECK(out.method[0] == "ars");
    CHECK(testing::ks_statistic(out.column(Param::Theta1), oracle) < 0.02);
}

TEST_CASE("prior-only sweep preserves the prior")
{
    const auto s = unit_stats({1.0});
    for (const std::string name : {"GEW2_3", "GEW3"})
    {
        const auto prior = PriorConfig::preset(name);
        GibbsOptions opts;
        opts.use_likelihood = false;
        Rng init_rng(31);
        std::array<std::vector<double>, 5> cols;
        for (int rep = 0; rep < 5000; ++rep)
        {
            GewParams init;
            for (Param p : kAllParams)
                init.set(p, draw_prior(prior[p], init_rng));
            SamplerConfig cfg;
            cfg.seed = static_cast<std::uint64_t>(rep) + 1;
            const auto out = gibbs_run(s, prior, cfg, init, 0, 1, opts);
            for (Param p : kAllParams)
                cols[index(p)].push_back(out.draws[0][index(p)]);
        }
        for (Param p : kAllParams)
        {
            INFO(name << " " << to_string(p));
            const double ks = testing::ks_statistic(cols[index(p)],
                                                    [&](double x) { return testing::prior_cdf(prior[p], x); });
            // 1% critical value at n = 5000 is 0.023
            CHECK(ks < 0.025);
        }
    }
}

TEST_CASE("gibbs chains are reproducible and stay in support")
{
    const auto d = fixture_like(3);
    const auto s = sufficient_stats(d);
    const auto prior = PriorConfig::preset("GEW1");
    SamplerConfig cfg;
    cfg.seed = 5;
    const auto init = choose_initial_state(s, prior);
    const auto a = gibbs_run(s, prior, cfg, init, 200, 500);
    const auto b = gibbs_run(s, prior, cfg, init, 200, 500);
    CHECK(a.draws == b.draws);
    CHECK(a.deviance == b.deviance);
    for (std::size_t m = 0; m < a.size(); ++m)
    {
        REQUIRE(in_joint_support(a.state(m), prior));
        REQUIRE(a.deviance[m] == deviance(a.state(m), s));
    }
    cfg.seed = 6;
    CHECK(gibbs_run(s, prior, cfg, init, 200, 500).draws != a.draws);
}

TEST_CASE("slice gibbs agrees with ARS gibbs in distribution")
{
    const auto d = fixture_like(3);
    const auto s = sufficient_stats(d);
    const auto prior = PriorConfig::preset("GEW1");
    SamplerConfig ars, slice;
    slice.method = SamplerMethod::Slice;
    const auto init = choose_initial_state(s, prior);
    const auto a = gibbs_run(s, prior, ars, init, 1000, 4000);
    const auto b = gibbs_run(s, prior, slice, init, 1000, 4000);
    CHECK(b.method[4] == "slice");
    const auto ma = moments(a.column(Param::Beta));
    const auto mb = moments(b.column(Param::Beta));
    CHECK(std::abs(ma.mean - mb.mean) < 0.1 * ma.mean);
}

TEST_CASE("ineligible conditional falls back to slice")
{
    const auto d = fixture_like(3);
    const auto s = sufficient_stats(d);
    auto prior = PriorConfig::preset("GEW2_3");
    prior[Param::Theta2] = GammaPrior{0.5, 0.1};
    std::vector<std::string> messages;
    GibbsOptions opts;
    opts.on_log = [&](const std::string& m) { messages.push_back(m); };
    const auto out = gibbs_run(s, prior, {}, choose_initial_state(s, prior), 10, 20, opts);
    CHECK(out.method[0] == "ars");
    CHECK(out.method[1] == "slice");
    CHECK_FALSE(messages.empty());
    CHECK(out.log == messages);
}

TEST_CASE("initial state falls back when the prior centre has no mass")
{
    const auto d = fixture_like(3);
    const auto s = sufficient_stats(d);
    const auto prior = PriorConfig::preset("GEW1");
    const auto init = choose_initial_state(s, prior);
    CHECK(in_joint_support(init, prior));
    CHECK(std::isfinite(log_posterior(init, s, prior)));
}

TEST_CASE("parallel chains match sequential chains")
{
    const auto d = fixture_like(4);
    const auto s = sufficient_stats(d);
    const auto prior = PriorConfig::preset("GEW1");
    SamplerConfig cfg;
    cfg.seed = 9;
    const std::vector<GewParams> inits{choose_initial_state(s, prior)};
    const auto seq = run_chains(s, prior, cfg, inits, 100, 200, 3, 1);
    const auto par = run_chains(s, prior, cfg, inits, 100, 200, 3, 3);
    REQUIRE(seq.size() == 3);
    for (std::size_t c = 0; c < 3; ++c)
    {
        CHECK(seq[c].draws == par[c].draws);
        CHECK(seq[c].meta.chain_index == c);
    }
    CHECK(seq[0].draws != seq[1].draws);
}

TEST_CASE("sampler method names")
{
    CHECK(parse_sampler_method("ARS") == SamplerMethod::Ars);
    CHECK(parse_sampler_method("slice") == SamplerMethod::Slice);
    CHECK_THROWS(parse_sampler_method("nuts"));
}
