#include "gew/inference.hpp"

#include "gew/diagnostics.hpp"
#include "gew/errors.hpp"
#include "gew/util.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace gew
{

namespace
{

void check_times(std::span<const double> times)
{
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        if (!(times[i] >= 0.0) || !std::isfinite(times[i]))
            throw DomainError("reliability times must be finite and non-negative");
        if (i > 0 && times[i] < times[i - 1])
            throw DomainError("reliability times must be increasing");
    }
}

// ln alpha at the use stress for every draw.
std::vector<double> use_log_alpha(std::span<const std::array<double, 5>> draws, const StressLevel& use)
{
    std::vector<double> out;
    out.reserve(draws.size());
    for (const auto& d : draws)
        out.push_back(eyring_log_alpha(GewParams::from_array(d), use));
    return out;
}

double draw_reliability(double log_alpha, double beta, double t)
{
    if (t == 0.0)
        return 1.0;
    return std::exp(-std::exp(log_alpha + beta * std::log(t)));
}

} // namespace

ReliabilityCurve predictive_reliability(std::span<const std::array<double, 5>> draws, const StressLevel& use,
                                        std::span<const double> times)
{
    if (draws.empty())
        throw DomainError("predictive reliability needs at least one posterior draw");
    check_times(times);
    const auto la = use_log_alpha(draws, use);
    ReliabilityCurve c{{times.begin(), times.end()}, {}, use, draws.size()};
    c.reliability.reserve(times.size());
    const double m = static_cast<double>(draws.size());
    for (double t : times)
    {
        double s = 0.0;
        for (std::size_t k = 0; k < draws.size(); ++k)
            s += draw_reliability(la[k], draws[k][4], t);
        c.reliability.push_back(std::clamp(s / m, 0.0, 1.0));
    }
    return c;
}

ReliabilityCurve predictive_reliability(std::span<const ChainOutput> chains, const StressLevel& use,
                                        std::span<const double> times)
{
    const auto draws = pooled_draws(chains);
    return predictive_reliability(std::span<const std::array<double, 5>>(draws), use, times);
}

ReliabilityBand reliability_quantile_band(std::span<const std::array<double, 5>> draws, const StressLevel& use,
                                          std::span<const double> times, std::span<const double> levels)
{
    if (draws.empty())
        throw DomainError("reliability band needs at least one posterior draw");
    check_times(times);
    for (double p : levels)
        if (!(p >= 0.0 && p <= 1.0))
            throw DomainError("band levels must lie in [0, 1]");
    const auto la = use_log_alpha(draws, use);
    ReliabilityBand b{{times.begin(), times.end()}, {levels.begin(), levels.end()}, {}};
    b.values.assign(levels.size(), std::vector<double>(times.size()));
    std::vector<double> r(draws.size());
    for (std::size_t i = 0; i < times.size(); ++i)
    {
        for (std::size_t k = 0; k < draws.size(); ++k)
            r[k] = draw_reliability(la[k], draws[k][4], times[i]);
        std::sort(r.begin(), r.end());
        for (std::size_t l = 0; l < levels.size(); ++l)
            b.values[l][i] = quantile_sorted(r, levels[l]);
    }
    return b;
}

ReliabilityBand reliability_quantile_band(std::span<const ChainOutput> chains, const StressLevel& use,
                                          std::span<const double> times, std::span<const double> levels)
{
    const auto draws = pooled_draws(chains);
    return reliability_quantile_band(std::span<const std::array<double, 5>>(draws), use, times, levels);
}

std::vector<double> geometric_grid(double lo, double hi, std::size_t n)
{
    if (!(lo > 0.0) || !(hi > lo) || n < 2)
        throw DomainError("geometric grid needs 0 < lo < hi and at least two points");
    std::vector<double> g(n);
    const double step = std::log(hi / lo) / static_cast<double>(n - 1);
    for (std::size_t i = 0; i < n; ++i)
        g[i] = lo * std::exp(step * static_cast<double>(i));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> default_time_grid()
{
    return geometric_grid(1.0, 5000.0, 200);
}

void write_reliability_csv(std::ostream& out, const ReliabilityCurve& c, const ReliabilityBand* band,
                           const std::vector<std::string>& header)
{
    for (const auto& h : header)
        out << "# " << h << '\n';
    out << "# use_temperature=" << format_double(c.use_stress.temperature)
        << "\n# use_stress=" << format_double(c.use_stress.nonthermal) << "\n# draws=" << c.draws << '\n';
    out << "time,reliability";
    if (band)
        for (double l : band->levels)
            out << ",q" << format_double(l);
    out << '\n';
    for (std::size_t i = 0; i < c.times.size(); ++i)
    {
        out << format_double(c.times[i]) << ',' << format_double(c.reliability[i]);
        if (band)
            for (const auto& row : band->values)
                out << ',' << format_double(row[i]);
        out << '\n';
    }
}

} // namespace gew
