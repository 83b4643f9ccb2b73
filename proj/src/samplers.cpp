#include "gew/samplers.hpp"

#include "gew/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <thread>

namespace gew
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

bool finite(double x)
{
    return std::isfinite(x);
}

// Log of the integral of exp(u) over [l, r] where u is linear with slope g,
// u(l) = ul and u(r) = ur.
double log_piece_mass(double l, double r, double ul, double ur, double g)
{
    const double w = r - l;
    if (!(w > 0.0))
        return -kInf;
    if (g == 0.0 || (finite(w) && std::fabs(g * w) < 1e-10))
        return 0.5 * (ul + ur) + std::log(w);
    if (g > 0.0)
        return ur - std::log(g) + std::log1p(-std::exp(-g * w));
    return ul - std::log(-g) + std::log1p(-std::exp(g * w));
}

} // namespace

UnivariateTarget UnivariateTarget::from(const ConditionalTarget& t)
{
    UnivariateTarget u;
    u.name = std::string(to_string(t.which()));
    u.lo = t.support().lo;
    u.hi = t.support().hi;
    u.eval = [&t](double x) {
        const auto d = t.evaluate(x);
        return LogDensityPoint{d.logpdf, d.grad, d.hess};
    };
    u.relative_to = [&t](double ref) -> std::function<LogDensityPoint(double)> {
        return [rel = t.relative_to(ref)](double x) {
            const auto d = rel(x);
            return LogDensityPoint{d.logpdf, d.grad, d.hess};
        };
    };
    return u;
}

UnivariateTarget UnivariateTarget::recentred(double ref) const
{
    if (!relative_to)
        return *this;
    UnivariateTarget r = *this;
    r.eval = relative_to(ref);
    return r;
}

std::string_view to_string(SamplerMethod m)
{
    return m == SamplerMethod::Ars ? "ars" : "slice";
}

SamplerMethod parse_sampler_method(std::string_view name)
{
    const std::string n = to_lower(trim(name));
    if (n == "ars")
        return SamplerMethod::Ars;
    if (n == "slice")
        return SamplerMethod::Slice;
    throw ValidationError(ValidationKind::Parse, "unknown sampler '" + std::string(name) + "' (ars|slice)");
}

void SamplerConfig::validate() const
{
    if (!(slice_width > 0.0) || !finite(slice_width))
        throw ValidationError(ValidationKind::Parse, "slice width must be positive");
    if (slice_max_doublings == 0 || slice_max_shrinks == 0)
        throw ValidationError(ValidationKind::Parse, "slice step limits must be positive");
    if (ars_max_points < 3 || ars_max_trials == 0)
        throw ValidationError(ValidationKind::Parse, "ARS needs at least 3 envelope points and 1 trial");
}

// ---------------------------------------------------------------------------
// ARS envelope

ArsEnvelope::ArsEnvelope(std::string name, double lo, double hi, std::vector<Point> points)
    : name_(std::move(name)), lo_(lo), hi_(hi), points_(std::move(points))
{
    if (points_.empty())
        throw DomainError(name_ + ": envelope needs at least one point");
    std::sort(points_.begin(), points_.end(), [](const Point& a, const Point& b) { return a.x < b.x; });
    for (std::size_t j = 0; j + 1 < points_.size(); ++j)
    {
        const double tol = 1e-8 * std::max({1.0, std::fabs(points_[j].g), std::fabs(points_[j + 1].g)});
        if (points_[j + 1].g - points_[j].g > tol)
            throw ConcavityError(name_, "slopes increase between " + format_double(points_[j].x) + " and " +
                                            format_double(points_[j + 1].x));
    }
    rebuild();
}

void ArsEnvelope::rebuild()
{
    const std::size_t k = points_.size();
    if (!finite(lo_) && !(points_.front().g > 0.0))
        throw DomainError(name_ + ": leftmost abscissa of an unbounded envelope needs a positive slope");
    if (!finite(hi_) && !(points_.back().g < 0.0))
        throw DomainError(name_ + ": rightmost abscissa of an unbounded envelope needs a negative slope");

    z_.assign(k + 1, 0.0);
    z_[0] = lo_;
    z_[k] = hi_;
    for (std::size_t j = 0; j + 1 < k; ++j)
    {
        const Point& a = points_[j];
        const Point& b = points_[j + 1];
        const double dg = a.g - b.g;
        double z = 0.5 * (a.x + b.x);
        if (dg > 1e-12 * std::max(std::fabs(a.g), std::fabs(b.g)))
        {
            const double cand = a.x + (b.h - a.h - b.g * (b.x - a.x)) / dg;
            if (finite(cand))
                z = cand;
        }
        z_[j + 1] = std::clamp(z, a.x, b.x);
    }

    log_mass_.assign(k, -kInf);
    double top = -kInf;
    for (std::size_t j = 0; j < k; ++j)
    {
        const Point& p = points_[j];
        const double l = z_[j], r = z_[j + 1];
        const double ul = finite(l) ? p.h + p.g * (l - p.x) : -kInf;
        const double ur = finite(r) ? p.h + p.g * (r - p.x) : -kInf;
        log_mass_[j] = log_piece_mass(l, r, ul, ur, p.g);
        top = std::max(top, log_mass_[j]);
    }
    if (!finite(top))
        throw DomainError(name_ + ": envelope has no finite mass");
    cum_.assign(k, 0.0);
    double acc = 0.0;
    for (std::size_t j = 0; j < k; ++j)
    {
        acc += std::exp(log_mass_[j] - top);
        cum_[j] = acc;
    }
    for (double& c : cum_)
        c /= acc;
}

std::size_t ArsEnvelope::piece_of(double x) const
{
    // z_[j] <= x <= z_[j+1]
    const auto it = std::upper_bound(z_.begin() + 1, z_.end() - 1, x);
    return static_cast<std::size_t>(it - (z_.begin() + 1));
}

double ArsEnvelope::upper(double x) const
{
    if (x < lo_ || x > hi_)
        return -kInf;
    const Point& p = points_[piece_of(x)];
    return p.h + p.g * (x - p.x);
}

double ArsEnvelope::lower(double x) const
{
    if (x < points_.front().x || x > points_.back().x)
        return -kInf;
    auto it = std::lower_bound(points_.begin(), points_.end(), x, [](const Point& p, double v) { return p.x < v; });
    if (it->x == x)
        return it->h;
    const Point& b = *it;
    const Point& a = *(it - 1);
    const double t = (x - a.x) / (b.x - a.x);
    return a.h + t * (b.h - a.h);
}

double ArsEnvelope::sample(Rng& rng) const
{
    const double u = rng.uniform();
    std::size_t j = static_cast<std::size_t>(std::lower_bound(cum_.begin(), cum_.end(), u) - cum_.begin());
    j = std::min(j, cum_.size() - 1);
    while (!finite(log_mass_[j]) && j + 1 < cum_.size())
        ++j;
    const Point& p = points_[j];
    const double l = z_[j], r = z_[j + 1];
    const double w = r - l;
    const double v = rng.uniform();
    double x;
    if (p.g == 0.0 || (finite(w) && std::fabs(p.g * w) < 1e-10))
        x = l + v * w;
    else if (p.g > 0.0)
        x = r + std::log1p(v * std::expm1(-p.g * w)) / p.g;
    else
        x = l + std::log1p(v * std::expm1(p.g * w)) / p.g;
    return std::clamp(x, l, r);
}

void ArsEnvelope::insert(const Point& p)
{
    auto it = std::lower_bound(points_.begin(), points_.end(), p.x, [](const Point& a, double v) { return a.x < v; });
    if (it != points_.end() && it->x == p.x)
        return;
    const double hull = upper(p.x);
    if (p.h > hull + 1e-7 * std::max(1.0, std::fabs(p.h)))
        throw ConcavityError(name_, "log density " + format_double(p.h) + " above the tangent hull " +
                                        format_double(hull) + " at " + format_double(p.x));
    const double tol = 1e-8 * std::max(1.0, std::fabs(p.g));
    if (it != points_.begin() && p.g > (it - 1)->g + tol * std::max(1.0, std::fabs((it - 1)->g)))
        throw ConcavityError(name_, "slope increases at " + format_double(p.x));
    if (it != points_.end() && p.g < it->g - tol * std::max(1.0, std::fabs(it->g)))
        throw ConcavityError(name_, "slope increases at " + format_double(p.x));
    points_.insert(it, p);
    rebuild();
}

// ---------------------------------------------------------------------------
// ARS initial abscissae

namespace
{

struct Probe
{
    double x;
    LogDensityPoint e;
};

double interior_start(const UnivariateTarget& t, std::optional<double> hint)
{
    auto ok = [&](double x) { return x > t.lo && x < t.hi && finite(x) && finite(t.logpdf(x)); };
    if (hint && ok(*hint))
        return *hint;
    std::vector<double> tries;
    if (finite(t.lo) && finite(t.hi))
    {
        for (int i = 1; i < 64; ++i)
            tries.push_back(t.lo + (t.hi - t.lo) * (i % 2 ? 0.5 + i / 128.0 : 0.5 - i / 128.0));
    }
    else
    {
        const double base = finite(t.lo) ? t.lo : (finite(t.hi) ? t.hi : 0.0);
        const double sign = finite(t.lo) ? 1.0 : -1.0;
        tries.push_back(finite(t.lo) || finite(t.hi) ? base + sign : 0.0);
        for (int k = -20; k <= 40; ++k)
        {
            tries.push_back(base + sign * std::ldexp(1.0, k));
            if (!finite(t.lo) && !finite(t.hi))
                tries.push_back(-std::ldexp(1.0, k));
        }
    }
    for (double x : tries)
        if (ok(x))
            return x;
    throw DomainError(t.name + ": no interior point with finite log density");
}

double default_scale(const UnivariateTarget& t, double x)
{
    if (finite(t.lo) && finite(t.hi))
        return 0.25 * (t.hi - t.lo);
    return std::max(1.0, std::fabs(x)) * 0.1;
}

double curvature_scale(const UnivariateTarget& t, const LogDensityPoint& e, double x)
{
    if (finite(e.hess) && e.hess < 0.0)
    {
        const double s = 1.0 / std::sqrt(-e.hess);
        if (finite(s) && s > 0.0)
            return s;
    }
    return default_scale(t, x);
}

// Locates the mode of a log-concave target.  Points with -inf log density are
// on the far side of the mode from the finite start.
double find_mode(const UnivariateTarget& t, double x0)
{
    LogDensityPoint e0 = t.eval(x0);
    if (e0.grad == 0.0)
        return x0;
    const double dir = e0.grad > 0.0 ? 1.0 : -1.0;
    const double edge = dir > 0 ? t.hi : t.lo;

    // Expand until the derivative changes sign or the support edge is hit.
    double inner = x0; // derivative points outward from here
    double outer = edge;
    double step = (finite(e0.hess) && e0.hess < 0.0) ? std::fabs(e0.grad / e0.hess) : default_scale(t, x0);
    if (!(step > 0.0) || !finite(step))
        step = default_scale(t, x0);
    step = std::max(step, 1e-6 * std::max(1.0, std::fabs(x0)));
    bool bracketed = false;
    if (finite(edge))
    {
        const LogDensityPoint ee = t.eval(edge);
        if (finite(ee.logpdf) && finite(ee.grad))
        {
            if (ee.grad * dir >= 0.0)
                return edge; // monotone up to a closed boundary
            outer = edge;
            bracketed = true;
        }
    }
    for (int it = 0; it < 4000 && !bracketed; ++it)
    {
        double y = inner + dir * step;
        if (finite(edge) && (dir > 0 ? y >= edge : y <= edge))
            y = inner + 0.5 * (edge - inner);
        if (finite(edge) && (y == inner || std::fabs(edge - y) <= 1e-14 * std::max(1.0, std::fabs(edge))))
            return inner; // monotone up to the boundary
        const LogDensityPoint e = t.eval(y);
        if (!finite(e.logpdf) || e.grad * dir <= 0.0)
        {
            outer = y;
            bracketed = true;
            if (finite(e.logpdf) && e.grad == 0.0)
                return y;
            break;
        }
        inner = y;
        step *= 2.0;
    }
    if (!bracketed)
        throw DomainError(t.name + ": could not bracket the mode");

    // Safeguarded Newton inside (inner, outer).
    double x = inner;
    LogDensityPoint e = t.eval(x);
    double best = inner;
    for (int it = 0; it < 200; ++it)
    {
        double next;
        if (finite(e.logpdf) && finite(e.hess) && e.hess < 0.0)
            next = x - e.grad / e.hess;
        else
            next = 0.5 * (inner + outer);
        const double lo_b = std::min(inner, outer), hi_b = std::max(inner, outer);
        if (!(next > lo_b && next < hi_b))
            next = 0.5 * (inner + outer);
        const double tol = 1e-12 * std::max(1.0, std::fabs(next));
        if (std::fabs(next - x) <= tol && finite(e.logpdf))
            return next;
        if (hi_b - lo_b <= tol)
            return best;
        x = next;
        e = t.eval(x);
        if (!finite(e.logpdf) || e.grad * dir < 0.0)
            outer = x;
        else if (e.grad == 0.0)
            return x;
        else
        {
            inner = x;
            best = x;
        }
        if (finite(e.logpdf) && e.grad * dir < 0.0)
            best = x;
    }
    return best;
}

} // namespace

namespace
{

struct ArsStart
{
    UnivariateTarget target; // recentred on the anchor when possible
    std::vector<ArsEnvelope::Point> points;
    std::optional<double> point_mass; // all mass within rounding of a boundary
};

ArsStart prepare_ars(const UnivariateTarget& raw, std::optional<double> hint)
{
    const double x0 = interior_start(raw, hint);
    const double mode = find_mode(raw, x0);
    const bool at_edge = (mode == raw.lo || mode == raw.hi) && finite(mode);
    double anchor = mode;
    if (!at_edge && (!(mode > raw.lo) || !(mode < raw.hi) || !finite(raw.logpdf(mode))))
        anchor = x0;

    ArsStart out{raw.recentred(anchor), {}, std::nullopt};
    const UnivariateTarget& t = out.target;
    const LogDensityPoint ea = t.eval(anchor);

    std::vector<Probe> probes;
    auto add = [&](double x) {
        if (!(x > t.lo && x < t.hi))
            return false;
        const LogDensityPoint e = t.eval(x);
        if (!finite(e.logpdf) || !finite(e.grad))
            return false;
        probes.push_back({x, e});
        return true;
    };

    double s = curvature_scale(t, ea, anchor);
    if (at_edge)
    {
        // Monotone towards a closed boundary: abscissae a few e-folds inside.
        if (std::fabs(ea.grad) > 0.0 && finite(ea.grad))
            s = std::min(s, 1.0 / std::fabs(ea.grad));
        if (finite(t.lo) && finite(t.hi))
            s = std::min(s, 0.25 * (t.hi - t.lo));
        const double side = mode == t.lo ? 1.0 : -1.0;
        if (anchor + side * 8.0 * s == anchor + side * 4.0 * s)
        {
            out.point_mass = anchor;
            return out;
        }
        for (double k : {0.5, 2.0, 8.0})
            add(anchor + side * k * s);
        for (int it = 0; it < 200 && probes.empty(); ++it)
        {
            s *= 0.5;
            add(anchor + side * s);
        }
        if (probes.empty())
            throw DomainError(t.name + ": no usable abscissa next to the boundary mode");
    }
    else
    {
        probes.push_back({anchor, ea});
        for (double side : {-1.0, 1.0})
        {
            double x = anchor + side * s;
            const double edge = side < 0 ? t.lo : t.hi;
            if (finite(edge) && (side < 0 ? x <= edge : x >= edge))
                x = anchor + 0.5 * (edge - anchor);
            add(x);
        }
    }

    // Unbounded sides need an abscissa with slope pointing back to the mode.
    auto extend = [&](double side) {
        auto extreme = [&]() -> const Probe& {
            return *std::max_element(probes.begin(), probes.end(),
                                     [&](const Probe& a, const Probe& b) { return side * a.x < side * b.x; });
        };
        double step = s;
        for (int it = 0; it < 400; ++it)
        {
            const Probe& p = extreme();
            if (side * p.e.grad < 0.0)
                return;
            const double y = p.x + side * step;
            if (add(y))
                step *= 2.0;
            else
                step *= 0.5;
        }
        throw DomainError(t.name + ": density does not decay on an unbounded side");
    };
    if (!finite(t.lo))
        extend(-1.0);
    if (!finite(t.hi))
        extend(1.0);

    std::sort(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) { return a.x < b.x; });
    probes.erase(std::unique(probes.begin(), probes.end(), [](const Probe& a, const Probe& b) { return a.x == b.x; }),
                 probes.end());
    out.points.reserve(probes.size());
    for (const auto& p : probes)
        out.points.push_back({p.x, p.e.logpdf, p.e.grad});
    return out;
}

} // namespace

std::vector<ArsEnvelope::Point> ars_initial_points(const UnivariateTarget& t, std::optional<double> hint)
{
    auto start = prepare_ars(t, hint);
    if (start.point_mass)
        throw DomainError(t.name + ": density is concentrated within rounding of the boundary " +
                          format_double(*start.point_mass));
    return std::move(start.points);
}

double ars_sample(const UnivariateTarget& raw, const SamplerConfig& cfg, Rng& rng, std::optional<double> hint)
{
    ArsStart start = prepare_ars(raw, hint);
    if (start.point_mass)
        return *start.point_mass;
    const UnivariateTarget& t = start.target;
    ArsEnvelope env(t.name, t.lo, t.hi, std::move(start.points));
    for (std::size_t trial = 0; trial < cfg.ars_max_trials; ++trial)
    {
        const double x = env.sample(rng);
        const double lu = std::log(rng.uniform());
        const double up = env.upper(x);
        if (lu <= env.lower(x) - up)
            return x;
        const LogDensityPoint e = t.eval(x);
        const bool accept = lu <= e.logpdf - up;
        if (finite(e.logpdf) && finite(e.grad) && env.points().size() < cfg.ars_max_points)
            env.insert({x, e.logpdf, e.grad});
        if (accept)
            return x;
    }
    throw BudgetError(t.name + ": adaptive rejection sampling exhausted " + std::to_string(cfg.ars_max_trials) +
                      " trials");
}

double ars_sample(const ConditionalTarget& t, const SamplerConfig& cfg, Rng& rng)
{
    return ars_sample(UnivariateTarget::from(t), cfg, rng, t.state().get(t.which()));
}

// ---------------------------------------------------------------------------
// Slice sampling with doubling

double slice_sample(const UnivariateTarget& raw, double x0, const SamplerConfig& cfg, Rng& rng)
{
    const UnivariateTarget t = raw.recentred(x0);
    const double f0 = t.logpdf(x0);
    if (!finite(f0))
        throw DomainError(t.name + ": slice sampler started at a point with non-finite log density");
    const double y = f0 + std::log(rng.uniform());
    const double w = cfg.slice_width;

    double left = x0 - w * rng.uniform();
    double right = left + w;
    double fl = t.logpdf(left), fr = t.logpdf(right);
    std::size_t k = cfg.slice_max_doublings;
    while (y < fl || y < fr)
    {
        if (k == 0)
            throw BudgetError(t.name + ": slice interval still growing after " +
                              std::to_string(cfg.slice_max_doublings) + " doublings");
        if (rng.uniform() < 0.5)
        {
            left -= right - left;
            fl = t.logpdf(left);
        }
        else
        {
            right += right - left;
            fr = t.logpdf(right);
        }
        --k;
    }

    // Acceptance test that keeps the doubling scheme reversible.
    auto acceptable = [&](double x1) {
        double l = left, r = right;
        bool differ = false;
        double gl = fl, gr = fr;
        bool have_l = true, have_r = true;
        while (r - l > 1.1 * w)
        {
            const double m = 0.5 * (l + r);
            if ((x0 < m && x1 >= m) || (x0 >= m && x1 < m))
                differ = true;
            if (x1 < m)
            {
                r = m;
                have_r = false;
            }
            else
            {
                l = m;
                have_l = false;
            }
            if (differ)
            {
                if (!have_l)
                {
                    gl = t.logpdf(l);
                    have_l = true;
                }
                if (!have_r)
                {
                    gr = t.logpdf(r);
                    have_r = true;
                }
                if (y >= gl && y >= gr)
                    return false;
            }
        }
        return true;
    };

    double l = left, r = right;
    for (std::size_t it = 0; it < cfg.slice_max_shrinks; ++it)
    {
        const double x1 = l + rng.uniform() * (r - l);
        if (y < t.logpdf(x1) && acceptable(x1))
            return x1;
        if (x1 < x0)
            l = x1;
        else
            r = x1;
    }
    throw BudgetError(t.name + ": slice shrinkage did not terminate");
}

double slice_sample(const ConditionalTarget& t, double current, const SamplerConfig& cfg, Rng& rng)
{
    return slice_sample(UnivariateTarget::from(t), current, cfg, rng);
}

// ---------------------------------------------------------------------------
// Gibbs

GewParams choose_initial_state(const SufficientStats& stats, const PriorConfig& prior, bool use_likelihood,
                               const LikelihoodOptions& lik)
{
    auto usable = [&](const GewParams& p) {
        if (!in_joint_support(p, prior))
            return false;
        if (!use_likelihood)
            return true;
        return finite(log_posterior(p, stats, prior, lik));
    };
    GewParams p = default_initial_state(prior);
    if (usable(p))
        return p;
    GewParams unit;
    for (Param q : kAllParams)
    {
        const Support s = support(prior, q);
        unit.set(q, (s.lo < 1.0 && 1.0 < s.hi) ? 1.0 : (finite(s.hi) ? 0.5 * (s.lo + s.hi) : s.lo + 1.0));
    }
    if (usable(unit))
        return unit;
    throw DomainError("no default initial state has positive posterior density; set the initial values explicitly");
}

ChainOutput gibbs_run(const SufficientStats& stats, const PriorConfig& prior, const SamplerConfig& cfg,
                      const GewParams& init, std::size_t n_burn, std::size_t n_keep, const GibbsOptions& opts)
{
    prior.validate();
    cfg.validate();
    if (opts.use_likelihood && stats.sum_r < 1.0)
        throw ValidationError(ValidationKind::NoFailures, "Gibbs sampling needs at least one observed failure");
    if (!in_joint_support(init, prior))
        throw DomainError("initial state lies outside the prior support");

    ChainOutput out;
    out.meta = opts.meta;
    out.meta.seed = cfg.seed;
    out.meta.chain_index = opts.chain_index;
    if (out.meta.prior.empty())
    {
        for (Param p : kAllParams)
            out.meta.prior += (p == Param::Theta1 ? "" : ";") + std::string(to_string(p)) + "~" + describe(prior[p]);
    }
    if (out.meta.model.empty())
        out.meta.model = prior.name;

    auto note = [&](const std::string& msg) {
        out.log.push_back(msg);
        if (opts.on_log)
            opts.on_log(msg);
    };

    std::array<SamplerMethod, 5> method;
    method.fill(cfg.method);
    if (cfg.method == SamplerMethod::Ars)
    {
        const Eligibility e = ars_eligibility(prior, stats, opts.use_likelihood);
        for (Param p : kAllParams)
            if (!e.per_param[index(p)])
            {
                method[index(p)] = SamplerMethod::Slice;
                note(std::string(to_string(p)) + ": conditional not provably log-concave, using slice sampling");
            }
        for (const auto& r : e.reasons)
            note(r);
    }
    for (Param p : kAllParams)
        out.method[index(p)] = std::string(to_string(method[index(p)]));

    const bool record_deviance = !stats.groups.empty();
    out.draws.reserve(n_keep);
    out.deviance.reserve(n_keep);

    Rng rng(cfg.seed, opts.chain_index);
    GewParams state = init;
    std::vector<double> sums;
    const std::size_t total = n_burn + n_keep;
    for (std::size_t it = 0; it < total; ++it)
    {
        try
        {
            if (opts.use_likelihood)
                sums = log_power_sums(stats, state.beta);
            for (Param p : kAllParams)
            {
                const ConditionalTarget t = p == Param::Beta
                                                ? ConditionalTarget(p, state, stats, prior, opts.use_likelihood)
                                                : ConditionalTarget(p, state, stats, prior, sums, opts.use_likelihood);
                const double next = method[index(p)] == SamplerMethod::Ars ? ars_sample(t, cfg, rng)
                                                                           : slice_sample(t, state.get(p), cfg, rng);
                state.set(p, next);
            }
        }
        catch (const SamplerError&)
        {
            throw;
        }
        catch (const Error& e)
        {
            throw SamplerError(e.what(), static_cast<long>(it));
        }
        if (it >= n_burn)
        {
            out.draws.push_back(state.to_array());
            out.deviance.push_back(record_deviance ? deviance(state, stats, opts.likelihood)
                                                   : std::numeric_limits<double>::quiet_NaN());
        }
    }
    return out;
}

ChainOutput gibbs_run(const AltDataset& d, const PriorConfig& prior, const SamplerConfig& cfg, const GewParams& init,
                      std::size_t n_burn, std::size_t n_keep, const GibbsOptions& opts)
{
    validate(d, opts.use_likelihood);
    const SufficientStats stats = sufficient_stats(d);
    GibbsOptions o = opts;
    if (o.meta.dataset_digest.empty())
        o.meta.dataset_digest = dataset_digest(d);
    o.meta.v_transform = std::string(to_string(d.transform));
    return gibbs_run(stats, prior, cfg, init, n_burn, n_keep, o);
}

std::vector<ChainOutput> run_chains(const SufficientStats& stats, const PriorConfig& prior, const SamplerConfig& cfg,
                                    const std::vector<GewParams>& inits, std::size_t n_burn, std::size_t n_keep,
                                    std::size_t n_chains, std::size_t workers, const GibbsOptions& opts)
{
    if (n_chains == 0)
        throw ValidationError(ValidationKind::Parse, "need at least one chain");
    if (!inits.empty() && inits.size() != 1 && inits.size() != n_chains)
        throw ValidationError(ValidationKind::Parse, "expected 1 or " + std::to_string(n_chains) + " initial states");
    const GewParams fallback =
        inits.empty() ? choose_initial_state(stats, prior, opts.use_likelihood, opts.likelihood) : inits.front();

    std::vector<ChainOutput> chains(n_chains);
    std::vector<std::exception_ptr> errors(n_chains);
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t c = next++; c < n_chains; c = next++)
        {
            try
            {
                GibbsOptions o = opts;
                o.chain_index = c;
                const GewParams& init = inits.size() == n_chains ? inits[c] : fallback;
                chains[c] = gibbs_run(stats, prior, cfg, init, n_burn, n_keep, o);
            }
            catch (...)
            {
                errors[c] = std::current_exception();
            }
        }
    };
    const std::size_t pool = std::clamp<std::size_t>(workers == 0 ? n_chains : workers, 1, n_chains);
    if (pool == 1)
        work();
    else
    {
        std::vector<std::jthread> threads;
        threads.reserve(pool);
        for (std::size_t i = 0; i < pool; ++i)
            threads.emplace_back(work);
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return chains;
}

} // namespace gew
