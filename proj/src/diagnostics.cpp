#include "gew/diagnostics.hpp"

#include "gew/errors.hpp"
#include "gew/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>

namespace gew
{

namespace
{

double mean_of(std::span<const double> x)
{
    double s = 0.0;
    for (double v : x)
        s += v;
    return s / static_cast<double>(x.size());
}

// Sample variance, n - 1 denominator.
double var_of(std::span<const double> x, double m)
{
    double s = 0.0;
    for (double v : x)
        s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

double cov_of(std::span<const double> x, std::span<const double> y)
{
    const double mx = mean_of(x), my = mean_of(y);
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i)
        s += (x[i] - mx) * (y[i] - my);
    return s / static_cast<double>(x.size() - 1);
}

void write_header(std::ostream& out, const std::vector<std::string>& header)
{
    for (const auto& h : header)
        out << "# " << h << '\n';
}

std::string fixed(double v, int prec = 6)
{
    if (!std::isfinite(v))
        return format_double(v);
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", prec, v);
    return buf;
}

} // namespace

std::vector<std::array<double, 5>> pooled_draws(std::span<const ChainOutput> chains)
{
    std::vector<std::array<double, 5>> out;
    for (const auto& c : chains)
        out.insert(out.end(), c.draws.begin(), c.draws.end());
    return out;
}

DicReport dic(std::span<const ChainOutput> chains, const SufficientStats& stats, const LikelihoodOptions& opts)
{
    DicReport r;
    std::array<double, 5> mean{};
    double dsum = 0.0;
    for (const auto& c : chains)
    {
        if (c.deviance.size() != c.draws.size())
            throw DomainError("chain deviance and draws differ in length");
        for (std::size_t m = 0; m < c.size(); ++m)
        {
            dsum += c.deviance[m];
            for (std::size_t j = 0; j < 5; ++j)
                mean[j] += c.draws[m][j];
            ++r.draws;
        }
    }
    if (r.draws == 0)
        throw DomainError("DIC needs at least one retained draw");
    const double n = static_cast<double>(r.draws);
    for (double& v : mean)
        v /= n;
    r.dbar = dsum / n;
    r.dhat = deviance(GewParams::from_array(mean), stats, opts);
    r.p_d = r.dbar - r.dhat;
    r.dic = r.dbar + r.p_d;
    return r;
}

double quantile_sorted(std::span<const double> sorted, double p)
{
    if (sorted.empty())
        throw DomainError("quantile of an empty sample");
    if (!(p >= 0.0 && p <= 1.0))
        throw DomainError("quantile level outside [0, 1]");
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0 || sorted[lo] == sorted[hi])
        return sorted[lo];
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

SummaryRow summarize(std::span<const ChainOutput> chains, Param p)
{
    std::vector<double> x;
    for (const auto& c : chains)
        for (const auto& row : c.draws)
            x.push_back(row[index(p)]);
    if (x.empty())
        throw DomainError("summary of an empty chain");
    SummaryRow r{p};
    r.draws = x.size();
    r.mean = mean_of(x);
    r.sd = x.size() > 1 ? std::sqrt(var_of(x, r.mean)) : 0.0;
    std::sort(x.begin(), x.end());
    r.q025 = quantile_sorted(x, 0.025);
    r.median = quantile_sorted(x, 0.5);
    r.q975 = quantile_sorted(x, 0.975);
    return r;
}

SummaryTable summarize(std::span<const ChainOutput> chains)
{
    SummaryTable t;
    for (Param p : kAllParams)
        t.push_back(summarize(chains, p));
    return t;
}

GelmanRubinDetail gelman_rubin_detail(std::span<const std::vector<double>> chains, Param p)
{
    const std::size_t m = chains.size();
    if (m < 2)
        throw DomainError("Gelman-Rubin needs at least two chains");
    const std::size_t n = chains[0].size();
    for (const auto& c : chains)
        if (c.size() != n)
            throw DomainError("Gelman-Rubin needs chains of equal length");
    if (n < 10)
        throw DomainError("Gelman-Rubin needs at least 10 draws per chain");

    std::vector<double> means(m), vars(m), means_sq(m);
    for (std::size_t j = 0; j < m; ++j)
    {
        means[j] = mean_of(chains[j]);
        vars[j] = var_of(chains[j], means[j]);
        means_sq[j] = means[j] * means[j];
        if (!(vars[j] > 0.0))
            throw DomainError("degenerate chain: zero within-chain variance for " + std::string(to_string(p)));
    }
    const double dn = static_cast<double>(n), dm = static_cast<double>(m);
    const double grand = mean_of(means);
    GelmanRubinDetail d{p, m, n};
    d.within = mean_of(vars);
    d.between = dn * var_of(means, grand);
    d.pooled_var = (dn - 1.0) / dn * d.within + (dm + 1.0) / (dm * dn) * d.between;

    const double a = (dn - 1.0) / dn;
    const double b = (dm + 1.0) / (dm * dn);
    d.var_pooled = a * a / dm * var_of(vars, mean_of(vars)) + b * b * 2.0 / (dm - 1.0) * d.between * d.between +
                   2.0 * (dm + 1.0) * (dn - 1.0) / (dm * dn * dn) * dn / dm *
                       (cov_of(vars, means_sq) - 2.0 * grand * cov_of(vars, means));
    d.df = 2.0 * d.pooled_var * d.pooled_var / d.var_pooled;
    const double ratio = d.pooled_var / d.within;
    if (std::isfinite(d.df) && d.df > 0.0)
        d.rhat = std::sqrt((d.df + 3.0) / (d.df + 1.0) * ratio);
    else
    {
        d.corrected = false;
        d.rhat = std::sqrt(ratio);
    }
    return d;
}

GelmanRubinDetail gelman_rubin_detail(std::span<const ChainOutput> chains, Param p)
{
    std::vector<std::vector<double>> cols;
    cols.reserve(chains.size());
    for (const auto& c : chains)
        cols.push_back(c.column(p));
    return gelman_rubin_detail(std::span<const std::vector<double>>(cols), p);
}

double gelman_rubin(std::span<const ChainOutput> chains, Param p)
{
    return gelman_rubin_detail(chains, p).rhat;
}

double gelman_rubin(std::span<const std::vector<double>> chains)
{
    return gelman_rubin_detail(chains).rhat;
}

double deviance_recheck(const ChainOutput& chain, const SufficientStats& stats, const LikelihoodOptions& opts)
{
    double worst = 0.0;
    for (std::size_t m = 0; m < chain.size(); ++m)
    {
        const double d = deviance(chain.state(m), stats, opts);
        const double stored = chain.deviance[m];
        if (d == stored)
            continue;
        worst = std::max(worst, std::isfinite(d - stored) ? std::fabs(d - stored) : INFINITY);
    }
    return worst;
}

void write_chain_csv(std::ostream& out, const ChainOutput& c, std::size_t n_burn)
{
    out << "# model=" << c.meta.model << '\n'
        << "# seed=" << c.meta.seed << '\n'
        << "# chain=" << c.meta.chain_index << '\n'
        << "# v_transform=" << c.meta.v_transform << '\n'
        << "# prior=" << c.meta.prior << '\n'
        << "# dataset_digest=" << c.meta.dataset_digest << '\n'
        << "# sampler=";
    for (std::size_t j = 0; j < 5; ++j)
        out << (j ? "," : "") << c.method[j];
    out << '\n' << "# n_burn=" << n_burn << '\n';
    out << "iteration,theta1,theta2,theta3,theta4,beta,deviance\n";
    for (std::size_t m = 0; m < c.size(); ++m)
    {
        out << (n_burn + m + 1);
        for (double v : c.draws[m])
            out << ',' << format_double(v);
        out << ',' << format_double(c.deviance[m]) << '\n';
    }
}

ChainOutput read_chain_csv(std::istream& in)
{
    ChainOutput c;
    std::string line;
    std::vector<std::string> columns;
    std::map<std::string, std::size_t> pos;
    std::size_t row = 0;
    while (std::getline(in, line))
    {
        ++row;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        const std::string t = trim(line);
        if (t.empty())
            continue;
        if (t.front() == '#')
        {
            const std::string body = trim(t.substr(1));
            const auto eq = body.find('=');
            if (eq == std::string::npos)
                continue;
            const std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
            try
            {
                if (key == "model")
                    c.meta.model = value;
                else if (key == "seed")
                    c.meta.seed = static_cast<std::uint64_t>(parse_integer(value));
                else if (key == "chain")
                    c.meta.chain_index = static_cast<std::uint64_t>(parse_integer(value));
                else if (key == "v_transform")
                    c.meta.v_transform = value;
                else if (key == "prior")
                    c.meta.prior = value;
                else if (key == "dataset_digest")
                    c.meta.dataset_digest = value;
                else if (key == "sampler")
                {
                    const auto parts = split(value, ',');
                    for (std::size_t j = 0; j < std::min<std::size_t>(5, parts.size()); ++j)
                        c.method[j] = trim(parts[j]);
                }
            }
            catch (const std::invalid_argument&)
            {
                throw ValidationError(ValidationKind::Parse, "bad chain header '" + key + "'", row);
            }
            continue;
        }
        if (columns.empty())
        {
            for (const auto& name : split(t, ','))
                columns.push_back(to_lower(trim(name)));
            for (std::size_t i = 0; i < columns.size(); ++i)
                pos[columns[i]] = i;
            for (const char* need : {"theta1", "theta2", "theta3", "theta4", "beta", "deviance"})
                if (!pos.count(need))
                    throw ValidationError(ValidationKind::MissingColumn, std::string("chain file lacks column ") + need,
                                          row);
            continue;
        }
        const auto cells = split(t, ',');
        if (cells.size() != columns.size())
            throw ValidationError(ValidationKind::Parse, "wrong number of fields in chain file", row);
        std::array<double, 5> draw{};
        try
        {
            for (Param p : kAllParams)
                draw[index(p)] = parse_double(cells[pos.at(std::string(to_string(p)))]);
            c.deviance.push_back(parse_double(cells[pos.at("deviance")]));
        }
        catch (const std::invalid_argument&)
        {
            throw ValidationError(ValidationKind::Parse, "non-numeric value in chain file", row);
        }
        c.draws.push_back(draw);
    }
    if (columns.empty())
        throw ValidationError(ValidationKind::MissingColumn, "chain file has no header row");
    return c;
}

ChainOutput read_chain_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open chain file '" + path + "'");
    return read_chain_csv(in);
}

void write_summary_csv(std::ostream& out, const SummaryTable& t, const std::vector<std::string>& header)
{
    write_header(out, header);
    out << "parameter,mean,sd,p2.5,median,p97.5,draws\n";
    for (const auto& r : t)
        out << to_string(r.param) << ',' << format_double(r.mean) << ',' << format_double(r.sd) << ','
            << format_double(r.q025) << ',' << format_double(r.median) << ',' << format_double(r.q975) << ','
            << r.draws << '\n';
}

void write_summary_text(std::ostream& out, const SummaryTable& t, const std::vector<std::string>& header)
{
    write_header(out, header);
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-10s %14s %14s %14s %14s %14s\n", "parameter", "mean", "sd", "2.5%", "median",
                  "97.5%");
    out << buf;
    for (const auto& r : t)
    {
        std::snprintf(buf, sizeof buf, "%-10s %14s %14s %14s %14s %14s\n", std::string(to_string(r.param)).c_str(),
                      fixed(r.mean).c_str(), fixed(r.sd).c_str(), fixed(r.q025).c_str(), fixed(r.median).c_str(),
                      fixed(r.q975).c_str());
        out << buf;
    }
}

void write_dic_csv(std::ostream& out, const DicReport& r, const std::vector<std::string>& header)
{
    write_header(out, header);
    out << "dbar,dhat,p_d,dic,draws\n"
        << format_double(r.dbar) << ',' << format_double(r.dhat) << ',' << format_double(r.p_d) << ','
        << format_double(r.dic) << ',' << r.draws << '\n';
}

void write_dic_text(std::ostream& out, const DicReport& r, const std::vector<std::string>& header)
{
    write_header(out, header);
    out << "Dbar  " << fixed(r.dbar, 3) << '\n'
        << "Dhat  " << fixed(r.dhat, 3) << '\n'
        << "pD    " << fixed(r.p_d, 3) << '\n'
        << "DIC   " << fixed(r.dic, 3) << '\n';
}

void write_gelman_rubin_csv(std::ostream& out, const std::vector<GelmanRubinDetail>& rows,
                            const std::vector<std::string>& header)
{
    write_header(out, header);
    out << "parameter,rhat,corrected,W,B,V,var_V,df,chains,draws\n";
    for (const auto& d : rows)
        out << to_string(d.param) << ',' << format_double(d.rhat) << ',' << (d.corrected ? 1 : 0) << ','
            << format_double(d.within) << ',' << format_double(d.between) << ',' << format_double(d.pooled_var) << ','
            << format_double(d.var_pooled) << ',' << format_double(d.df) << ',' << d.chains << ',' << d.draws << '\n';
}

} // namespace gew
