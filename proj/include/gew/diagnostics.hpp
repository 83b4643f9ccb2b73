#pragma once

#include "gew/chain.hpp"
#include "gew/posterior.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gew
{

struct DicReport
{
    double dbar = 0.0; // posterior mean deviance
    double dhat = 0.0; // deviance at the posterior mean
    double p_d = 0.0;
    double dic = 0.0;
    std::size_t draws = 0;
};

/// DIC from the stored deviances of all chains pooled; D(theta-bar) uses the
/// pooled per-parameter mean.
DicReport dic(std::span<const ChainOutput> chains, const SufficientStats& stats, const LikelihoodOptions& opts = {});

struct SummaryRow
{
    Param param;
    double mean = 0.0;
    double sd = 0.0;
    double q025 = 0.0;
    double median = 0.0;
    double q975 = 0.0;
    std::size_t draws = 0;
};

using SummaryTable = std::vector<SummaryRow>;

/// Empirical quantile of sorted data, linear interpolation between order
/// statistics at position (n - 1) p.
double quantile_sorted(std::span<const double> sorted, double p);

SummaryRow summarize(std::span<const ChainOutput> chains, Param p);
SummaryTable summarize(std::span<const ChainOutput> chains);

/// Pieces of the corrected potential scale reduction factor.
struct GelmanRubinDetail
{
    Param param;
    std::size_t chains = 0;
    std::size_t draws = 0;  // per chain
    double within = 0.0;    // W
    double between = 0.0;   // B
    double pooled_var = 0.0; // V-hat
    double var_pooled = 0.0; // Var(V-hat)
    double df = 0.0;        // d
    double rhat = 0.0;      // corrected factor
    bool corrected = true;  // false when d was not finite
};

GelmanRubinDetail gelman_rubin_detail(std::span<const std::vector<double>> chains, Param p = Param::Theta1);
GelmanRubinDetail gelman_rubin_detail(std::span<const ChainOutput> chains, Param p);
double gelman_rubin(std::span<const ChainOutput> chains, Param p);
double gelman_rubin(std::span<const std::vector<double>> chains);

/// Largest |stored - recomputed| deviance over a chain.
double deviance_recheck(const ChainOutput& chain, const SufficientStats& stats, const LikelihoodOptions& opts = {});

std::vector<std::array<double, 5>> pooled_draws(std::span<const ChainOutput> chains);

// Writers.  `header` lines are emitted as "# " comments.
void write_chain_csv(std::ostream& out, const ChainOutput& chain, std::size_t n_burn = 0);
ChainOutput read_chain_csv(std::istream& in);
ChainOutput read_chain_csv(const std::string& path);

void write_summary_csv(std::ostream& out, const SummaryTable& t, const std::vector<std::string>& header = {});
void write_summary_text(std::ostream& out, const SummaryTable& t, const std::vector<std::string>& header = {});
void write_dic_csv(std::ostream& out, const DicReport& r, const std::vector<std::string>& header = {});
void write_dic_text(std::ostream& out, const DicReport& r, const std::vector<std::string>& header = {});
void write_gelman_rubin_csv(std::ostream& out, const std::vector<GelmanRubinDetail>& rows,
                            const std::vector<std::string>& header = {});

} // namespace gew
