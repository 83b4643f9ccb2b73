#pragma once

#include "gew/chain.hpp"
#include "gew/data.hpp"
#include "gew/posterior.hpp"
#include "gew/util.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace gew
{

/// Log density and its derivatives at one point.  `hess` may be NaN when the
/// target does not provide it.
struct LogDensityPoint
{
    double logpdf;
    double grad;
    double hess = std::numeric_limits<double>::quiet_NaN();
};

/// A univariate unnormalised log density on (lo, hi).  `eval` returns
/// -inf logpdf off support.  Full conditionals and synthetic test densities
/// both plug in here.
struct UnivariateTarget
{
    std::string name = "x";
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    std::function<LogDensityPoint(double)> eval;
    /// Optional: builds x -> logpdf(x) - logpdf(ref) evaluated without
    /// cancellation.
    std::function<std::function<LogDensityPoint(double)>(double ref)> relative_to;

    double logpdf(double x) const { return eval(x).logpdf; }

    /// Same density shifted so that logpdf(ref) = 0, when the target can do
    /// that accurately; otherwise an unchanged copy.
    UnivariateTarget recentred(double ref) const;

    /// Views a conditional; `t` must outlive the returned object.
    static UnivariateTarget from(const ConditionalTarget& t);
};

enum class SamplerMethod
{
    Ars,
    Slice,
};

std::string_view to_string(SamplerMethod m);
SamplerMethod parse_sampler_method(std::string_view name);

struct SamplerConfig
{
    SamplerMethod method = SamplerMethod::Ars;
    double slice_width = 1.0;
    std::size_t slice_max_doublings = 64;
    std::size_t slice_max_shrinks = 200;
    std::size_t ars_max_points = 50;
    std::size_t ars_max_trials = 10000;
    std::uint64_t seed = 1;

    void validate() const;
};

/// Piecewise-linear upper hull from tangents and lower squeeze from chords
/// of a log-concave density.
class ArsEnvelope
{
  public:
    struct Point
    {
        double x;
        double h;
        double g;
    };

    ArsEnvelope(std::string name, double lo, double hi, std::vector<Point> points);

    const std::vector<Point>& points() const { return points_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }

    double upper(double x) const;
    double lower(double x) const;

    /// Draw from the normalised exponentiated hull.
    double sample(Rng& rng) const;

    /// Inserts an evaluated point, checking slope monotonicity and that the
    /// new point sits under the current hull.  Throws ConcavityError.
    void insert(const Point& p);

  private:
    void rebuild();
    std::size_t piece_of(double x) const;

    std::string name_;
    double lo_;
    double hi_;
    std::vector<Point> points_;
    std::vector<double> z_;        // piece boundaries, size K+1
    std::vector<double> log_mass_; // per piece
    std::vector<double> cum_;      // normalised cumulative masses
};

/// Starting abscissae: mode by safeguarded Newton on the derivative, then
/// points a curvature scale either side.  `hint` seeds the search.
std::vector<ArsEnvelope::Point> ars_initial_points(const UnivariateTarget& t, std::optional<double> hint = {});

/// One exact draw by adaptive rejection sampling.
double ars_sample(const UnivariateTarget& t, const SamplerConfig& cfg, Rng& rng, std::optional<double> hint = {});
double ars_sample(const ConditionalTarget& t, const SamplerConfig& cfg, Rng& rng);

/// One transition of the doubling slice sampler with shrinkage.
double slice_sample(const UnivariateTarget& t, double current, const SamplerConfig& cfg, Rng& rng);
double slice_sample(const ConditionalTarget& t, double current, const SamplerConfig& cfg, Rng& rng);

struct GibbsOptions
{
    /// Switch off the likelihood to sample the prior (invariance checks).
    bool use_likelihood = true;
    LikelihoodOptions likelihood;
    std::uint64_t chain_index = 0;
    ChainMetadata meta;
    std::function<void(const std::string&)> on_log;
};

/// Gibbs sampler cycling theta1..theta4, beta.  Discards n_burn sweeps and
/// keeps n_keep states with their deviance.
ChainOutput gibbs_run(const SufficientStats& stats, const PriorConfig& prior, const SamplerConfig& cfg,
                      const GewParams& init, std::size_t n_burn, std::size_t n_keep, const GibbsOptions& opts = {});
ChainOutput gibbs_run(const AltDataset& d, const PriorConfig& prior, const SamplerConfig& cfg, const GewParams& init,
                      std::size_t n_burn, std::size_t n_keep, const GibbsOptions& opts = {});

/// Initial state: the prior means / midpoints, or a unit state when that
/// point has zero posterior density.
GewParams choose_initial_state(const SufficientStats& stats, const PriorConfig& prior, bool use_likelihood = true,
                               const LikelihoodOptions& lik = {});

/// Runs `n_chains` independent chains on at most `workers` threads.  Chain c
/// uses rng stream (cfg.seed, c).
std::vector<ChainOutput> run_chains(const SufficientStats& stats, const PriorConfig& prior, const SamplerConfig& cfg,
                                    const std::vector<GewParams>& inits, std::size_t n_burn, std::size_t n_keep,
                                    std::size_t n_chains, std::size_t workers = 0, const GibbsOptions& opts = {});

} // namespace gew
