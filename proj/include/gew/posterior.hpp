#pragma once

#include "gew/data.hpp"
#include "gew/model.hpp"

#include <array>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace gew
{

struct UniformPrior
{
    double lo;
    double hi;
};

struct GammaPrior
{
    double shape;
    double rate;
};

using PriorSpec = std::variant<UniformPrior, GammaPrior>;

std::string describe(const PriorSpec& p);

/// Parses "uniform(lo,hi)" / "U(lo,hi)" / "gamma(shape,rate)" / "G(shape,rate)".
PriorSpec parse_prior_spec(std::string_view text);

/// Log prior density with normalising constants dropped: 0 inside a uniform
/// interval, (shape-1) ln x - rate x for a gamma, -inf off support.
double log_prior_term(const PriorSpec& p, double x);

/// Prior families of the four model variants, by where the uniform and gamma
/// priors sit.
enum class ModelFamily
{
    AllUniform,      // GEW1
    AllGamma,        // GEW2
    UniformGammaBeta, // GEW3: uniform thetas, gamma beta
    GammaUniformBeta, // GEW4: gamma thetas, uniform beta
    Mixed,
};

std::string_view model_label(ModelFamily f);

struct PriorConfig
{
    std::string name;
    std::array<PriorSpec, 5> priors;

    const PriorSpec& operator[](Param p) const { return priors[index(p)]; }
    PriorSpec& operator[](Param p) { return priors[index(p)]; }

    ModelFamily family() const;
    void validate() const;

    static PriorConfig uniform_all(double lo, double hi, std::string name = "custom");
    static PriorConfig gamma_all(double shape, double rate, std::string name = "custom");

    /// Table presets: GEW1, GEW2_1 .. GEW2_5, GEW3, GEW4.
    static PriorConfig preset(std::string_view name);
    static const std::vector<std::string>& preset_names();
};

/// Open or closed interval on which a full conditional lives.
struct Support
{
    double lo;
    double hi;
};

Support support(const PriorConfig& prior, Param p);

/// Prior mean of a gamma, midpoint of a uniform (restricted to beta > 0).
GewParams default_initial_state(const PriorConfig& prior);

bool in_joint_support(const GewParams& p, const PriorConfig& prior);

struct LikelihoodOptions
{
    /// Keep the parameter-free prod T_i^{r_i} factor of the exact likelihood.
    bool include_temperature_factor = true;
};

struct LogLikelihood
{
    double value;
    bool overflow; // a cumulative hazard was not representable; value is -inf
};

/// Grouped censored Weibull log-likelihood built from the sufficient sums.
LogLikelihood log_likelihood_checked(const GewParams& p, const SufficientStats& s, const LikelihoodOptions& opts = {});
double log_likelihood(const GewParams& p, const SufficientStats& s, const LikelihoodOptions& opts = {});

/// Deviance D = -2 ln L.
double deviance(const GewParams& p, const SufficientStats& s, const LikelihoodOptions& opts = {});

double log_prior(const GewParams& p, const PriorConfig& prior);
double log_posterior(const GewParams& p, const SufficientStats& s, const PriorConfig& prior,
                     const LikelihoodOptions& opts = {});

/// Conditions under which every full conditional is log-concave: at least
/// one failure overall, and gamma shapes >= 1 on the theta priors.  With the
/// likelihood switched off the beta prior shape must also be >= 1.
struct Eligibility
{
    bool eligible = true;
    std::array<bool, 5> per_param{true, true, true, true, true};
    std::vector<std::string> reasons;
};

Eligibility ars_eligibility(const PriorConfig& prior, const SufficientStats& s, bool use_likelihood = true);

/// ln[(n_i - r_i) tau_i^beta + sum_j x_ij^beta] for each group, formed around
/// the largest log time so that no power overflows.
std::vector<double> log_power_sums(const SufficientStats& s, double beta);

/// Full conditional of one parameter with the other four frozen.  Holds
/// references to `stats` and `prior`; both must outlive the target.
class ConditionalTarget
{
  public:
    ConditionalTarget(Param which, const GewParams& state, const SufficientStats& stats, const PriorConfig& prior,
                      bool use_likelihood = true);

    /// Same, reusing power sums already computed at `state.beta`.
    ConditionalTarget(Param which, const GewParams& state, const SufficientStats& stats, const PriorConfig& prior,
                      std::span<const double> log_sums, bool use_likelihood = true);

    Param which() const { return which_; }
    const GewParams& state() const { return state_; }
    const SufficientStats& stats() const { return *stats_; }
    const PriorConfig& prior() const { return *prior_; }
    bool uses_likelihood() const { return use_likelihood_; }
    Support support() const { return support_; }

    bool in_support(double v) const;
    bool in_interior(double v) const;

    /// -inf off support.
    double logpdf(double v) const;
    /// Throw DomainError unless v is in the open interior of the support.
    double grad(double v) const;
    double hess(double v) const;

    struct Derivs
    {
        double logpdf;
        double grad;
        double hess;
    };
    Derivs evaluate(double v) const;

    /// logpdf(v) - logpdf(ref) formed without cancellation, for densities
    /// whose absolute log level dwarfs their local variation.  `ref` may sit on
    /// a closed support boundary.  Keeps a reference to this target.
    class RelativeDensity
    {
      public:
        Derivs operator()(double v) const;
        double reference() const { return ref_; }

      private:
        friend class ConditionalTarget;
        const ConditionalTarget* target_ = nullptr;
        double ref_ = 0.0;
        std::vector<double> weight_; // hazard contribution of each term at ref
        std::vector<double> rate_;   // its log-derivative in the parameter
    };

    RelativeDensity relative_to(double ref) const;
    Derivs evaluate_relative(double v, double ref) const { return relative_to(ref)(v); }

  private:
    void precompute(std::span<const double> log_sums);
    Derivs evaluate_theta(double v) const;
    Derivs evaluate_beta(double v) const;

    Param which_;
    GewParams state_;
    const SufficientStats* stats_;
    const PriorConfig* prior_;
    bool use_likelihood_;
    Support support_;
    double linear_coeff_ = 0.0;
    // theta targets: per-group offset b_i and slope d_i so that the hazard
    // sum is sum_i exp(b_i - d_i v)
    std::vector<double> offsets_;
    std::vector<double> slopes_;
    // beta target: per-group ln alpha_i
    std::vector<double> log_alpha_;
};

double conditional_logpdf(const ConditionalTarget& t, double value);
double conditional_grad(const ConditionalTarget& t, double value);
double conditional_hess(const ConditionalTarget& t, double value);

struct ConcavityViolation
{
    double point;
    double hess;
};

struct ConcavityReport
{
    Param which;
    bool eligible;
    std::vector<std::string> reasons;
    std::size_t points_checked = 0;
    double max_hess;
    std::vector<ConcavityViolation> violations;

    bool passed() const { return violations.empty(); }
};

inline constexpr double kConcavityTolerance = 1e-12;

ConcavityReport verify_log_concavity(const ConditionalTarget& t, std::span<const double> grid);

/// Analytic derivatives against Richardson-extrapolated central differences
/// of the log density.
struct DerivativeCheck
{
    double point;
    double grad;
    double grad_fd;
    double hess;
    double hess_fd;
    double grad_error; // |analytic - numeric| / max(|analytic|, abs_tol / rel_tol)
    double hess_error;
    bool passed;
};

DerivativeCheck check_derivatives(const ConditionalTarget& t, double v, double rel_tol = 1e-5, double abs_tol = 1e-8);

} // namespace gew
