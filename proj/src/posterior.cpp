#include "gew/posterior.hpp"

#include "gew/errors.hpp"
#include "gew/util.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gew
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts...
{
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Prior contribution to a conditional and its first two derivatives.
void add_prior_terms(const PriorSpec& spec, double v, double& lp, double& g, double& h)
{
    if (const auto* gp = std::get_if<GammaPrior>(&spec))
    {
        const double a1 = gp->shape - 1.0;
        if (a1 != 0.0)
        {
            lp += a1 * std::log(v);
            g += a1 / v;
            h -= a1 / (v * v);
        }
        lp -= gp->rate * v;
        g -= gp->rate;
    }
}

double coefficient(Param p, const GroupStats& g)
{
    switch (p)
    {
    case Param::Theta1: return 1.0;
    case Param::Theta2: return 1.0 / g.temperature;
    case Param::Theta3: return g.v;
    case Param::Theta4: return g.v / g.temperature;
    case Param::Beta: return 0.0;
    }
    return 0.0;
}

double group_log_alpha(const GewParams& p, const GroupStats& g)
{
    return g.log_temperature - p.theta1 - p.theta2 / g.temperature - p.theta3 * g.v -
           p.theta4 * g.v / g.temperature;
}

} // namespace

std::string describe(const PriorSpec& p)
{
    return std::visit(Overloaded{
                          [](const UniformPrior& u) {
                              return "uniform(" + format_double(u.lo) + "," + format_double(u.hi) + ")";
                          },
                          [](const GammaPrior& g) {
                              return "gamma(" + format_double(g.shape) + "," + format_double(g.rate) + ")";
                          },
                      },
                      p);
}

PriorSpec parse_prior_spec(std::string_view text)
{
    const std::string t = to_lower(trim(text));
    const auto open = t.find('(');
    const auto close = t.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw ValidationError(ValidationKind::Parse, "bad prior spec '" + std::string(text) + "'");
    const std::string kind = trim(t.substr(0, open));
    const auto args = split(t.substr(open + 1, close - open - 1), ',');
    if (args.size() != 2)
        throw ValidationError(ValidationKind::Parse, "prior spec needs two arguments: '" + std::string(text) + "'");
    double a = 0.0, b = 0.0;
    try
    {
        a = parse_double(args[0]);
        b = parse_double(args[1]);
    }
    catch (const std::invalid_argument&)
    {
        throw ValidationError(ValidationKind::Parse, "bad prior arguments in '" + std::string(text) + "'");
    }
    if (kind == "uniform" || kind == "u" || kind == "unif")
        return UniformPrior{a, b};
    if (kind == "gamma" || kind == "g")
        return GammaPrior{a, b};
    throw ValidationError(ValidationKind::Parse, "unknown prior family '" + kind + "'");
}

double log_prior_term(const PriorSpec& p, double x)
{
    return std::visit(Overloaded{
                          [x](const UniformPrior& u) { return (x >= u.lo && x <= u.hi) ? 0.0 : -kInf; },
                          [x](const GammaPrior& g) {
                              if (!(x > 0.0) || !std::isfinite(x))
                                  return -kInf;
                              const double a1 = g.shape - 1.0;
                              return (a1 != 0.0 ? a1 * std::log(x) : 0.0) - g.rate * x;
                          },
                      },
                      p);
}

std::string_view model_label(ModelFamily f)
{
    switch (f)
    {
    case ModelFamily::AllUniform: return "GEW1";
    case ModelFamily::AllGamma: return "GEW2";
    case ModelFamily::UniformGammaBeta: return "GEW3";
    case ModelFamily::GammaUniformBeta: return "GEW4";
    case ModelFamily::Mixed: return "mixed";
    }
    return "?";
}

ModelFamily PriorConfig::family() const
{
    auto is_gamma = [](const PriorSpec& s) { return std::holds_alternative<GammaPrior>(s); };
    bool thetas_gamma = true, thetas_uniform = true;
    for (std::size_t j = 0; j < 4; ++j)
    {
        thetas_gamma = thetas_gamma && is_gamma(priors[j]);
        thetas_uniform = thetas_uniform && !is_gamma(priors[j]);
    }
    const bool beta_gamma = is_gamma(priors[4]);
    if (thetas_uniform && !beta_gamma)
        return ModelFamily::AllUniform;
    if (thetas_gamma && beta_gamma)
        return ModelFamily::AllGamma;
    if (thetas_uniform && beta_gamma)
        return ModelFamily::UniformGammaBeta;
    if (thetas_gamma && !beta_gamma)
        return ModelFamily::GammaUniformBeta;
    return ModelFamily::Mixed;
}

void PriorConfig::validate() const
{
    for (Param p : kAllParams)
    {
        const auto& spec = (*this)[p];
        const std::string name(to_string(p));
        if (const auto* u = std::get_if<UniformPrior>(&spec))
        {
            if (!std::isfinite(u->lo) || !std::isfinite(u->hi) || !(u->hi > u->lo))
                throw ValidationError(ValidationKind::Parse, name + ": uniform prior needs finite hi > lo");
            if (p == Param::Beta && !(u->hi > 0.0))
                throw ValidationError(ValidationKind::Parse, "beta: uniform prior must overlap (0, inf)");
        }
        else
        {
            const auto& g = std::get<GammaPrior>(spec);
            if (!(g.shape > 0.0) || !(g.rate > 0.0) || !std::isfinite(g.shape) || !std::isfinite(g.rate))
                throw ValidationError(ValidationKind::Parse, name + ": gamma prior needs shape > 0 and rate > 0");
        }
    }
}

PriorConfig PriorConfig::uniform_all(double lo, double hi, std::string name)
{
    PriorConfig c{std::move(name), {}};
    c.priors.fill(UniformPrior{lo, hi});
    return c;
}

PriorConfig PriorConfig::gamma_all(double shape, double rate, std::string name)
{
    PriorConfig c{std::move(name), {}};
    c.priors.fill(GammaPrior{shape, rate});
    return c;
}

const std::vector<std::string>& PriorConfig::preset_names()
{
    static const std::vector<std::string> names{"GEW1",   "GEW2_1", "GEW2_2", "GEW2_3",
                                                "GEW2_4", "GEW2_5", "GEW3",   "GEW4"};
    return names;
}

PriorConfig PriorConfig::preset(std::string_view name)
{
    std::string key(name);
    std::replace(key.begin(), key.end(), '.', '_');
    key = to_lower(key);
    if (key == "gew1")
        return uniform_all(0.0, 100.0, "GEW1");
    if (key == "gew2_1")
        return gamma_all(1.0, 0.00001, "GEW2_1");
    if (key == "gew2_2")
        return gamma_all(1.0, 0.001, "GEW2_2");
    if (key == "gew2_3")
        return gamma_all(2.5, 0.5, "GEW2_3");
    if (key == "gew2_4")
        return gamma_all(5.0, 1.0, "GEW2_4");
    if (key == "gew2_5")
        return gamma_all(25.0, 5.0, "GEW2_5");
    if (key == "gew3")
    {
        auto c = uniform_all(0.0, 100.0, "GEW3");
        c[Param::Beta] = GammaPrior{1.0, 0.001};
        return c;
    }
    if (key == "gew4")
    {
        auto c = gamma_all(1.0, 0.001, "GEW4");
        c[Param::Beta] = UniformPrior{0.0, 100.0};
        return c;
    }
    throw ValidationError(ValidationKind::Parse, "unknown prior preset '" + std::string(name) + "'");
}

Support support(const PriorConfig& prior, Param p)
{
    const auto& spec = prior[p];
    if (const auto* u = std::get_if<UniformPrior>(&spec))
    {
        if (p == Param::Beta)
            return {std::max(u->lo, 0.0), u->hi};
        return {u->lo, u->hi};
    }
    return {0.0, kInf};
}

GewParams default_initial_state(const PriorConfig& prior)
{
    GewParams state;
    for (Param p : kAllParams)
    {
        const auto& spec = prior[p];
        if (const auto* u = std::get_if<UniformPrior>(&spec))
        {
            const Support s = support(prior, p);
            state.set(p, 0.5 * (s.lo + s.hi));
            (void)u;
        }
        else
        {
            const auto& g = std::get<GammaPrior>(spec);
            state.set(p, g.shape / g.rate);
        }
    }
    return state;
}

bool in_joint_support(const GewParams& p, const PriorConfig& prior)
{
    if (!(p.beta > 0.0))
        return false;
    for (Param q : kAllParams)
        if (!std::isfinite(log_prior_term(prior[q], p.get(q))))
            return false;
    return true;
}

std::vector<double> log_power_sums(const SufficientStats& s, double beta)
{
    std::vector<double> out;
    out.reserve(s.groups.size());
    for (const auto& g : s.groups)
    {
        const double m = g.max_log_time;
        double sum = 0.0;
        for (double l : g.log_times)
            sum += std::exp(beta * (l - m));
        if (g.censored > 0.0)
            sum += g.censored * std::exp(beta * (g.log_tau - m));
        out.push_back(beta * m + std::log(sum));
    }
    return out;
}

LogLikelihood log_likelihood_checked(const GewParams& p, const SufficientStats& s, const LikelihoodOptions& opts)
{
    if (!(p.beta > 0.0) || !std::isfinite(p.beta))
        throw DomainError("beta must be positive and finite");
    double value = s.sum_r * std::log(p.beta) - p.theta1 * s.sum_r - p.theta2 * s.sum_r_over_T -
                   p.theta3 * s.sum_rV - p.theta4 * s.sum_rV_over_T + (p.beta - 1.0) * s.sum_log_times;
    if (opts.include_temperature_factor)
        value += s.sum_r_log_T;

    const auto sums = log_power_sums(s, p.beta);
    for (std::size_t i = 0; i < s.groups.size(); ++i)
    {
        const double hazard = std::exp(group_log_alpha(p, s.groups[i]) + sums[i]);
        if (!std::isfinite(hazard))
            return {-kInf, true};
        value -= hazard;
    }
    return {value, false};
}

double log_likelihood(const GewParams& p, const SufficientStats& s, const LikelihoodOptions& opts)
{
    return log_likelihood_checked(p, s, opts).value;
}

double deviance(const GewParams& p, const SufficientStats& s, const LikelihoodOptions& opts)
{
    return -2.0 * log_likelihood(p, s, opts);
}

double log_prior(const GewParams& p, const PriorConfig& prior)
{
    double lp = 0.0;
    for (Param q : kAllParams)
        lp += log_prior_term(prior[q], p.get(q));
    if (!(p.beta > 0.0))
        return -kInf;
    return lp;
}

double log_posterior(const GewParams& p, const SufficientStats& s, const PriorConfig& prior,
                     const LikelihoodOptions& opts)
{
    const double lp = log_prior(p, prior);
    if (!std::isfinite(lp))
        return -kInf;
    return log_likelihood(p, s, opts) + lp;
}

Eligibility ars_eligibility(const PriorConfig& prior, const SufficientStats& s, bool use_likelihood)
{
    Eligibility e;
    const bool has_failures = s.sum_r >= 1.0;
    if (use_likelihood && !has_failures)
    {
        e.reasons.push_back("no failures in the data: log-concavity needs sum r_i >= 1");
        e.per_param.fill(false);
    }
    for (Param p : kAllParams)
    {
        const auto* g = std::get_if<GammaPrior>(&prior[p]);
        if (!g)
            continue;
        // The beta conditional picks up -(sum r_i)/beta^2 from the likelihood,
        // which absorbs any shape > 0 once there is a failure.
        const bool needs_shape = p != Param::Beta || !use_likelihood;
        if (needs_shape && g->shape < 1.0)
        {
            e.per_param[index(p)] = false;
            e.reasons.push_back(std::string(to_string(p)) + " gamma shape " + format_double(g->shape) +
                                " < 1: log-concavity needs shape >= 1");
        }
    }
    e.eligible = std::all_of(e.per_param.begin(), e.per_param.end(), [](bool b) { return b; });
    return e;
}

ConditionalTarget::ConditionalTarget(Param which, const GewParams& state, const SufficientStats& stats,
                                     const PriorConfig& prior, bool use_likelihood)
    : which_(which), state_(state), stats_(&stats), prior_(&prior), use_likelihood_(use_likelihood),
      support_(gew::support(prior, which))
{
    if (use_likelihood_ && which_ != Param::Beta)
        precompute(log_power_sums(stats, state.beta));
    else
        precompute({});
}

ConditionalTarget::ConditionalTarget(Param which, const GewParams& state, const SufficientStats& stats,
                                     const PriorConfig& prior, std::span<const double> log_sums,
                                     bool use_likelihood)
    : which_(which), state_(state), stats_(&stats), prior_(&prior), use_likelihood_(use_likelihood),
      support_(gew::support(prior, which))
{
    if (use_likelihood_ && which_ != Param::Beta && log_sums.size() != stats.groups.size())
        throw DomainError("power sums do not match the number of groups");
    precompute(log_sums);
}

void ConditionalTarget::precompute(std::span<const double> log_sums)
{
    if (!use_likelihood_)
        return;
    const auto& groups = stats_->groups;
    if (which_ == Param::Beta)
    {
        log_alpha_.reserve(groups.size());
        for (const auto& g : groups)
            log_alpha_.push_back(group_log_alpha(state_, g));
        return;
    }
    linear_coeff_ = stats_->coefficient_sum(which_);
    GewParams others = state_;
    others.set(which_, 0.0);
    offsets_.reserve(groups.size());
    slopes_.reserve(groups.size());
    for (std::size_t i = 0; i < groups.size(); ++i)
    {
        offsets_.push_back(group_log_alpha(others, groups[i]) + log_sums[i]);
        slopes_.push_back(coefficient(which_, groups[i]));
    }
}

bool ConditionalTarget::in_support(double v) const
{
    if (!std::isfinite(v))
        return false;
    if (std::holds_alternative<GammaPrior>((*prior_)[which_]) || which_ == Param::Beta)
        if (!(v > 0.0))
            return false;
    return v >= support_.lo && v <= support_.hi;
}

bool ConditionalTarget::in_interior(double v) const
{
    return std::isfinite(v) && v > support_.lo && v < support_.hi;
}

ConditionalTarget::Derivs ConditionalTarget::evaluate_theta(double v) const
{
    double lp = -linear_coeff_ * v;
    double g = -linear_coeff_;
    double h = 0.0;
    for (std::size_t i = 0; i < offsets_.size(); ++i)
    {
        const double d = slopes_[i];
        const double e = std::exp(offsets_[i] - d * v);
        lp -= e;
        if (d != 0.0)
        {
            g += d * e;
            h -= d * d * e;
        }
    }
    return {lp, g, h};
}

ConditionalTarget::Derivs ConditionalTarget::evaluate_beta(double v) const
{
    const auto& s = *stats_;
    const double lv = std::log(v);
    double lp = s.sum_r * lv + (v - 1.0) * s.sum_log_times;
    double g = s.sum_r / v + s.sum_log_times;
    double h = -s.sum_r / (v * v);
    for (std::size_t i = 0; i < s.groups.size(); ++i)
    {
        const auto& gr = s.groups[i];
        const double m = gr.max_log_time;
        double s0 = 0.0, s1 = 0.0, s2 = 0.0;
        for (double l : gr.log_times)
        {
            const double e = std::exp(v * (l - m));
            s0 += e;
            s1 += e * l;
            s2 += e * l * l;
        }
        if (gr.censored > 0.0)
        {
            const double l = gr.log_tau;
            const double e = gr.censored * std::exp(v * (l - m));
            s0 += e;
            s1 += e * l;
            s2 += e * l * l;
        }
        const double f = std::exp(log_alpha_[i] + v * m);
        if (!std::isfinite(f))
            return {-kInf, -kInf, -kInf};
        lp -= f * s0;
        g -= f * s1;
        h -= f * s2;
    }
    return {lp, g, h};
}

ConditionalTarget::Derivs ConditionalTarget::evaluate(double v) const
{
    if (!in_support(v))
        return {-kInf, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    Derivs d{0.0, 0.0, 0.0};
    if (use_likelihood_)
        d = which_ == Param::Beta ? evaluate_beta(v) : evaluate_theta(v);
    add_prior_terms((*prior_)[which_], v, d.logpdf, d.grad, d.hess);
    return d;
}

ConditionalTarget::RelativeDensity ConditionalTarget::relative_to(double ref) const
{
    RelativeDensity r;
    r.target_ = this;
    r.ref_ = ref;
    if (!use_likelihood_)
        return r;
    if (which_ != Param::Beta)
    {
        // hazard_i(v) = exp(b_i - d_i ref) exp(-d_i (v - ref))
        for (std::size_t i = 0; i < offsets_.size(); ++i)
        {
            r.weight_.push_back(std::exp(offsets_[i] - slopes_[i] * ref));
            r.rate_.push_back(-slopes_[i]);
        }
        return r;
    }
    // hazard(v) = sum over terms of alpha_i c x^ref exp((v - ref) ln x)
    for (std::size_t i = 0; i < stats_->groups.size(); ++i)
    {
        const auto& g = stats_->groups[i];
        const double m = g.max_log_time;
        const double scale = std::exp(log_alpha_[i] + ref * m);
        for (double l : g.log_times)
        {
            r.weight_.push_back(scale * std::exp(ref * (l - m)));
            r.rate_.push_back(l);
        }
        if (g.censored > 0.0)
        {
            r.weight_.push_back(scale * g.censored * std::exp(ref * (g.log_tau - m)));
            r.rate_.push_back(g.log_tau);
        }
    }
    return r;
}

ConditionalTarget::Derivs ConditionalTarget::RelativeDensity::operator()(double v) const
{
    const ConditionalTarget& t = *target_;
    if (!t.in_support(v))
        return {-kInf, std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    const double dv = v - ref_;
    double lp = 0.0, g = 0.0, h = 0.0;
    if (t.use_likelihood_)
    {
        if (t.which_ == Param::Beta)
        {
            const auto& s = *t.stats_;
            lp = s.sum_r * std::log(v / ref_) + dv * s.sum_log_times;
            g = s.sum_r / v + s.sum_log_times;
            h = -s.sum_r / (v * v);
        }
        else
        {
            lp = -t.linear_coeff_ * dv;
            g = -t.linear_coeff_;
        }
        // Each term contributes -w expm1(k dv) to the log density; its value
        // at v is w (1 + expm1(k dv)).
        for (std::size_t j = 0; j < weight_.size(); ++j)
        {
            const double k = rate_[j];
            const double em = std::expm1(k * dv);
            const double at_v = weight_[j] + weight_[j] * em;
            lp -= weight_[j] * em;
            g -= k * at_v;
            h -= k * k * at_v;
        }
        if (std::isnan(lp))
            lp = -kInf;
    }
    if (const auto* gp = std::get_if<GammaPrior>(&(*t.prior_)[t.which_]))
    {
        const double a1 = gp->shape - 1.0;
        if (a1 != 0.0)
        {
            lp += a1 * std::log(v / ref_);
            g += a1 / v;
            h -= a1 / (v * v);
        }
        lp -= gp->rate * dv;
        g -= gp->rate;
    }
    return {lp, g, h};
}

double ConditionalTarget::logpdf(double v) const
{
    return evaluate(v).logpdf;
}

double ConditionalTarget::grad(double v) const
{
    if (!in_interior(v))
        throw DomainError(std::string(to_string(which_)) + ": derivative requested off the open support");
    return evaluate(v).grad;
}

double ConditionalTarget::hess(double v) const
{
    if (!in_interior(v))
        throw DomainError(std::string(to_string(which_)) + ": derivative requested off the open support");
    return evaluate(v).hess;
}

double conditional_logpdf(const ConditionalTarget& t, double value)
{
    return t.logpdf(value);
}

double conditional_grad(const ConditionalTarget& t, double value)
{
    return t.grad(value);
}

double conditional_hess(const ConditionalTarget& t, double value)
{
    return t.hess(value);
}

ConcavityReport verify_log_concavity(const ConditionalTarget& t, std::span<const double> grid)
{
    const Eligibility e = ars_eligibility(t.prior(), t.stats(), t.uses_likelihood());
    ConcavityReport report{t.which(), e.per_param[index(t.which())], e.reasons, 0, -kInf, {}};
    for (double v : grid)
    {
        if (!t.in_interior(v))
            continue;
        const double h = t.hess(v);
        ++report.points_checked;
        if (std::isnan(h))
            continue;
        report.max_hess = std::max(report.max_hess, h);
        if (h > kConcavityTolerance)
            report.violations.push_back({v, h});
    }
    return report;
}

namespace
{

// Ridders' extrapolation of a central-difference estimate built by `diff`
// for successively smaller steps.
template <class Diff>
double ridders(Diff diff, double h0)
{
    constexpr int n = 10;
    constexpr double con = 1.4, con2 = con * con;
    double a[n][n];
    double h = h0;
    a[0][0] = diff(h);
    double err = kInf, best = a[0][0];
    for (int i = 1; i < n; ++i)
    {
        h /= con;
        a[0][i] = diff(h);
        double fac = con2;
        for (int j = 1; j <= i; ++j)
        {
            a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
            fac *= con2;
            const double e = std::max(std::fabs(a[j][i] - a[j - 1][i]), std::fabs(a[j][i] - a[j - 1][i - 1]));
            if (e <= err)
            {
                err = e;
                best = a[j][i];
            }
        }
        if (std::fabs(a[i][i] - a[i - 1][i - 1]) >= 2.0 * err)
            break;
    }
    return best;
}

} // namespace

DerivativeCheck check_derivatives(const ConditionalTarget& t, double v, double rel_tol, double abs_tol)
{
    const auto d = t.evaluate(v);
    if (!t.in_interior(v) || !std::isfinite(d.logpdf))
        throw DomainError("derivative check needs an interior point with finite density");
    const Support s = t.support();
    double room = 0.1 * std::max(1.0, std::fabs(v));
    if (std::isfinite(s.lo))
        room = std::min(room, 0.5 * (v - s.lo));
    if (std::isfinite(s.hi))
        room = std::min(room, 0.5 * (s.hi - v));

    const double f0 = d.logpdf;
    const double g_fd = ridders([&](double h) { return (t.logpdf(v + h) - t.logpdf(v - h)) / (2.0 * h); }, room);
    const double h_fd =
        ridders([&](double h) { return ((t.logpdf(v + h) - f0) + (t.logpdf(v - h) - f0)) / (h * h); }, room);

    auto error = [&](double a, double b) {
        const double diff = std::fabs(a - b);
        if (diff <= abs_tol)
            return 0.0;
        return diff / std::max(std::fabs(a), abs_tol / rel_tol);
    };
    DerivativeCheck c{v, d.grad, g_fd, d.hess, h_fd, error(d.grad, g_fd), error(d.hess, h_fd), false};
    c.passed = c.grad_error <= rel_tol && c.hess_error <= rel_tol;
    return c;
}

} // namespace gew
