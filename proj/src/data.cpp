#include "gew/data.hpp"

#include "gew/errors.hpp"
#include "gew/util.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace gew
{

std::string_view to_string(CensoringKind k)
{
    switch (k)
    {
    case CensoringKind::Complete: return "complete";
    case CensoringKind::TypeI: return "type1";
    case CensoringKind::TypeII: return "type2";
    }
    return "?";
}

CensoringKind parse_censoring(std::string_view name)
{
    const std::string n = to_lower(name);
    if (n == "complete" || n == "none")
        return CensoringKind::Complete;
    if (n == "type1" || n == "type-i" || n == "typei" || n == "i")
        return CensoringKind::TypeI;
    if (n == "type2" || n == "type-ii" || n == "typeii" || n == "ii")
        return CensoringKind::TypeII;
    throw ValidationError(ValidationKind::Parse, "unknown censoring scheme '" + std::string(name) + "'");
}

std::size_t AltDataset::total_failures() const
{
    std::size_t r = 0;
    for (const auto& g : groups)
        r += g.failures.size();
    return r;
}

std::size_t AltDataset::total_items() const
{
    std::size_t n = 0;
    for (const auto& g : groups)
        n += g.n;
    return n;
}

StressLevel default_use_stress(VTransform t)
{
    return StressLevel::make(350.0, 0.3, t);
}

void validate(const TestGroup& g)
{
    const std::string where = "group '" + g.label + "': ";
    if (!(g.stress.temperature > 0.0) || !std::isfinite(g.stress.temperature))
        throw ValidationError(ValidationKind::BadStress, where + "temperature must be positive (kelvin)");
    if (!std::isfinite(g.stress.v))
        throw ValidationError(ValidationKind::BadStress, where + "transformed stress is not finite");
    if (g.n == 0)
        throw ValidationError(ValidationKind::Infeasible, where + "no items on test");
    if (g.failures.size() > g.n)
        throw ValidationError(ValidationKind::FailuresExceedItems, where + "more failures than items");
    for (double x : g.failures)
        if (!(x > 0.0) || !std::isfinite(x))
            throw ValidationError(ValidationKind::NonPositiveTime, where + "failure times must be positive");
    switch (g.scheme)
    {
    case CensoringKind::Complete:
        if (g.failures.size() != g.n)
            throw ValidationError(ValidationKind::InconsistentCensoring, where + "complete sample has survivors");
        break;
    case CensoringKind::TypeI:
        if (!(g.tau > 0.0) || !std::isfinite(g.tau))
            throw ValidationError(ValidationKind::InconsistentCensoring, where + "type-I censoring time must be positive");
        for (double x : g.failures)
            if (x > g.tau)
                throw ValidationError(ValidationKind::FailureAfterCensor, where + "failure after the censoring time");
        break;
    case CensoringKind::TypeII:
        if (g.failures.empty())
            throw ValidationError(ValidationKind::InconsistentCensoring, where + "type-II group needs a failure");
        if (g.tau != *std::max_element(g.failures.begin(), g.failures.end()))
            throw ValidationError(ValidationKind::InconsistentCensoring,
                                  where + "type-II censoring time must equal the last failure time");
        break;
    }
}

void validate(const AltDataset& d, bool require_failures)
{
    if (d.groups.empty())
        throw ValidationError(ValidationKind::NoGroups, "no groups");
    for (std::size_t i = 0; i < d.groups.size(); ++i)
    {
        validate(d.groups[i]);
        for (std::size_t j = 0; j < i; ++j)
            if (d.groups[i].stress.temperature == d.groups[j].stress.temperature &&
                d.groups[i].stress.nonthermal == d.groups[j].stress.nonthermal)
                throw ValidationError(ValidationKind::DuplicateStress, "duplicate stress combination in groups '" +
                                                                          d.groups[j].label + "' and '" +
                                                                          d.groups[i].label + "'");
    }
    if (require_failures && d.total_failures() == 0)
        throw ValidationError(ValidationKind::NoFailures, "dataset has no failures");
}

namespace
{

struct PendingGroup
{
    std::string label;
    double temperature;
    double stress;
    std::vector<double> failures;
    std::vector<std::size_t> failure_rows;
    std::vector<double> censored;
    std::vector<std::size_t> censored_rows;
};

double parse_field(const std::string& text, const std::string& column, std::size_t row)
{
    try
    {
        return parse_double(text);
    }
    catch (const std::invalid_argument&)
    {
        throw ValidationError(ValidationKind::Parse, "cannot parse " + column + " value '" + text + "'", row);
    }
}

TestGroup finish_group(PendingGroup& p, const LoadOptions& opts)
{
    TestGroup g;
    g.label = p.label;
    g.stress = StressLevel::make(p.temperature, p.stress, opts.transform);
    g.n = p.failures.size() + p.censored.size();
    g.failures = p.failures;
    g.scheme = opts.scheme.kind;

    switch (opts.scheme.kind)
    {
    case CensoringKind::Complete:
        if (!p.censored.empty())
            throw ValidationError(ValidationKind::InconsistentCensoring,
                                  "censored row in a complete sample", p.censored_rows.front());
        break;
    case CensoringKind::TypeI:
    {
        std::optional<double> tau = opts.scheme.tau;
        for (std::size_t k = 0; k < p.censored.size(); ++k)
        {
            if (!tau)
                tau = p.censored[k];
            else if (p.censored[k] != *tau)
                throw ValidationError(ValidationKind::InconsistentCensoring,
                                      "type-I censored rows in one group must share the censoring time",
                                      p.censored_rows[k]);
        }
        if (!tau)
            tau = p.failures.empty() ? 0.0 : *std::max_element(p.failures.begin(), p.failures.end());
        g.tau = *tau;
        for (std::size_t k = 0; k < p.failures.size(); ++k)
            if (p.failures[k] > g.tau)
                throw ValidationError(ValidationKind::FailureAfterCensor, "failure after the type-I censoring time",
                                      p.failure_rows[k]);
        break;
    }
    case CensoringKind::TypeII:
    {
        if (opts.scheme.failures)
        {
            if (*opts.scheme.failures > g.n)
                throw ValidationError(ValidationKind::FailuresExceedItems,
                                      "group '" + g.label + "': type-II r exceeds the number of items");
            if (*opts.scheme.failures != p.failures.size())
                throw ValidationError(ValidationKind::InconsistentCensoring,
                                      "group '" + g.label + "': failure count differs from type-II r");
        }
        if (p.failures.empty())
            throw ValidationError(ValidationKind::InconsistentCensoring,
                                  "group '" + g.label + "': type-II group needs a failure");
        g.tau = *std::max_element(p.failures.begin(), p.failures.end());
        for (std::size_t k = 0; k < p.censored.size(); ++k)
            if (p.censored[k] != g.tau)
                throw ValidationError(ValidationKind::InconsistentCensoring,
                                      "type-II censored rows must carry the last failure time", p.censored_rows[k]);
        break;
    }
    }
    validate(g);
    return g;
}

} // namespace

AltDataset parse_dataset(std::istream& in, const LoadOptions& opts)
{
    std::string line;
    std::size_t row = 0;
    std::vector<std::string> header;
    std::size_t header_row = 0;

    while (std::getline(in, line))
    {
        ++row;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        for (auto& h : split(t, ','))
            header.push_back(to_lower(trim(h)));
        header_row = row;
        break;
    }
    if (header.empty())
        throw ValidationError(ValidationKind::NoGroups, "no groups");

    auto column = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(header.begin(), header.end(), to_lower(name));
        if (it == header.end())
            throw ValidationError(ValidationKind::MissingColumn, "missing column '" + name + "'", header_row);
        return static_cast<std::size_t>(it - header.begin());
    };
    const std::size_t c_group = column(opts.columns.group);
    const std::size_t c_temp = column(opts.columns.temperature);
    const std::size_t c_stress = column(opts.columns.stress);
    const std::size_t c_time = column(opts.columns.time);
    const std::size_t c_event = column(opts.columns.event);

    std::vector<PendingGroup> pending;
    while (std::getline(in, line))
    {
        ++row;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        auto fields = split(t, ',');
        if (fields.size() != header.size())
            throw ValidationError(ValidationKind::Parse,
                                  "expected " + std::to_string(header.size()) + " fields, got " +
                                      std::to_string(fields.size()),
                                  row);
        for (auto& f : fields)
            f = trim(f);

        const double temp = parse_field(fields[c_temp], opts.columns.temperature, row);
        const double stress = parse_field(fields[c_stress], opts.columns.stress, row);
        const double time = parse_field(fields[c_time], opts.columns.time, row);
        if (!(temp > 0.0) || !std::isfinite(temp))
            throw ValidationError(ValidationKind::BadStress, "temperature must be positive (kelvin)", row);
        if (!std::isfinite(stress))
            throw ValidationError(ValidationKind::BadStress, "stress must be finite", row);
        if (!(time > 0.0) || !std::isfinite(time))
            throw ValidationError(ValidationKind::NonPositiveTime,
                                  "time must be positive, got '" + fields[c_time] + "'", row);
        const std::string& ev = fields[c_event];
        if (ev != "0" && ev != "1")
            throw ValidationError(ValidationKind::BadEvent, "event must be 0 or 1, got '" + ev + "'", row);

        auto it = std::find_if(pending.begin(), pending.end(), [&](const PendingGroup& g) {
            return g.temperature == temp && g.stress == stress;
        });
        if (it == pending.end())
        {
            pending.push_back(PendingGroup{fields[c_group], temp, stress, {}, {}, {}, {}});
            it = std::prev(pending.end());
        }
        if (ev == "1")
        {
            it->failures.push_back(time);
            it->failure_rows.push_back(row);
        }
        else
        {
            it->censored.push_back(time);
            it->censored_rows.push_back(row);
        }
    }
    if (pending.empty())
        throw ValidationError(ValidationKind::NoGroups, "no groups");

    AltDataset d;
    d.transform = opts.transform;
    d.use_stress = opts.use_stress ? *opts.use_stress : default_use_stress(opts.transform);
    for (auto& p : pending)
        d.groups.push_back(finish_group(p, opts));
    validate(d, opts.require_failures);
    return d;
}

AltDataset load_dataset(const std::filesystem::path& path, const LoadOptions& opts)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open dataset '" + path.string() + "'");
    return parse_dataset(in, opts);
}

void write_dataset(std::ostream& out, const AltDataset& d, const std::vector<std::string>& header_comments)
{
    for (const auto& c : header_comments)
        out << "# " << c << '\n';
    out << "group,temperature_K,stress,time,event\n";
    for (std::size_t i = 0; i < d.groups.size(); ++i)
    {
        const auto& g = d.groups[i];
        const std::string label = g.label.empty() ? "g" + std::to_string(i + 1) : g.label;
        const std::string prefix =
            label + ',' + format_double(g.stress.temperature) + ',' + format_double(g.stress.nonthermal) + ',';
        for (double x : g.failures)
            out << prefix << format_double(x) << ",1\n";
        for (std::size_t k = 0; k < g.censored_count(); ++k)
            out << prefix << format_double(g.tau) << ",0\n";
    }
}

void write_dataset(const std::filesystem::path& path, const AltDataset& d,
                   const std::vector<std::string>& header_comments)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write dataset '" + path.string() + "'");
    write_dataset(out, d, header_comments);
    if (!out)
        throw IoError("failed writing dataset '" + path.string() + "'");
}

std::string dataset_digest(const AltDataset& d)
{
    std::ostringstream s;
    s << "scheme";
    for (const auto& g : d.groups)
        s << ',' << to_string(g.scheme);
    s << '\n';
    write_dataset(s, d);
    return fnv1a_hex(s.str());
}

double SufficientStats::coefficient_sum(Param p) const
{
    switch (p)
    {
    case Param::Theta1: return sum_r;
    case Param::Theta2: return sum_r_over_T;
    case Param::Theta3: return sum_rV;
    case Param::Theta4: return sum_rV_over_T;
    case Param::Beta: return 0.0;
    }
    return 0.0;
}

SufficientStats sufficient_stats(const AltDataset& d)
{
    SufficientStats s;
    for (const auto& g : d.groups)
    {
        GroupStats gs;
        gs.temperature = g.stress.temperature;
        gs.v = g.stress.v;
        gs.log_temperature = std::log(g.stress.temperature);
        gs.n = g.n;
        gs.r = g.failures.size();
        gs.censored = static_cast<double>(g.n - gs.r);
        gs.tau = g.tau;
        gs.log_tau = g.tau > 0.0 ? std::log(g.tau) : 0.0;
        gs.times = g.failures;
        gs.log_times.reserve(g.failures.size());
        gs.max_log_time = -INFINITY;
        for (double x : g.failures)
        {
            const double lx = std::log(x);
            gs.log_times.push_back(lx);
            gs.sum_log_times += lx;
            gs.max_log_time = std::max(gs.max_log_time, lx);
        }
        if (gs.censored > 0.0)
            gs.max_log_time = std::max(gs.max_log_time, gs.log_tau);

        const double r = static_cast<double>(gs.r);
        s.sum_r += r;
        s.sum_r_over_T += r / gs.temperature;
        s.sum_rV += r * gs.v;
        s.sum_rV_over_T += r * gs.v / gs.temperature;
        s.sum_log_times += gs.sum_log_times;
        s.sum_r_log_T += r * gs.log_temperature;
        s.groups.push_back(std::move(gs));
    }
    return s;
}

AltDataset simulate_dataset(const GewParams& truth, const std::vector<PlannedGroup>& plan,
                            const CensoringScheme& scheme, std::uint64_t seed,
                            std::optional<StressLevel> use_stress, VTransform transform)
{
    if (plan.empty())
        throw ValidationError(ValidationKind::Infeasible, "simulation plan is empty");
    if (!(truth.beta > 0.0))
        throw ValidationError(ValidationKind::Infeasible, "true beta must be positive");
    if (scheme.kind == CensoringKind::TypeI && (!scheme.tau || !(*scheme.tau > 0.0)))
        throw ValidationError(ValidationKind::Infeasible, "type-I simulation needs a positive censoring time");
    if (scheme.kind == CensoringKind::TypeII && (!scheme.failures || *scheme.failures == 0))
        throw ValidationError(ValidationKind::Infeasible, "type-II simulation needs r >= 1");

    Rng rng(seed);
    AltDataset d;
    d.transform = transform;
    d.use_stress = use_stress ? *use_stress : default_use_stress(transform);
    for (std::size_t i = 0; i < plan.size(); ++i)
    {
        const auto& pg = plan[i];
        if (pg.n == 0)
            throw ValidationError(ValidationKind::Infeasible, "planned group with no items");
        if (scheme.kind == CensoringKind::TypeII && *scheme.failures > pg.n)
            throw ValidationError(ValidationKind::FailuresExceedItems, "type-II r exceeds the planned group size");

        const WeibullParams w{eyring_alpha(truth, pg.stress), truth.beta};
        std::vector<double> times(pg.n);
        for (auto& x : times)
            x = weibull_inverse_reliability(w, rng.uniform());
        std::sort(times.begin(), times.end());

        TestGroup g;
        g.label = "g" + std::to_string(i + 1);
        g.stress = pg.stress;
        g.n = pg.n;
        g.scheme = scheme.kind;
        switch (scheme.kind)
        {
        case CensoringKind::Complete: g.failures = times; break;
        case CensoringKind::TypeI:
            g.tau = *scheme.tau;
            for (double x : times)
                if (x <= g.tau)
                    g.failures.push_back(x);
            break;
        case CensoringKind::TypeII:
            g.failures.assign(times.begin(), times.begin() + static_cast<std::ptrdiff_t>(*scheme.failures));
            g.tau = g.failures.back();
            break;
        }
        d.groups.push_back(std::move(g));
    }
    validate(d, false);
    return d;
}

} // namespace gew
