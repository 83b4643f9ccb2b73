#pragma once

#include "gew/chain.hpp"
#include "gew/model.hpp"

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace gew
{

struct ReliabilityCurve
{
    std::vector<double> times;
    std::vector<double> reliability;
    StressLevel use_stress;
    std::size_t draws = 0;
};

/// Monte-Carlo predictive reliability at `use`: for each t, the mean over all
/// pooled draws of exp(-alpha(use) t^beta).
ReliabilityCurve predictive_reliability(std::span<const ChainOutput> chains, const StressLevel& use,
                                        std::span<const double> times);
ReliabilityCurve predictive_reliability(std::span<const std::array<double, 5>> draws, const StressLevel& use,
                                        std::span<const double> times);

struct ReliabilityBand
{
    std::vector<double> times;
    std::vector<double> levels;
    std::vector<std::vector<double>> values; // values[level][time]
};

/// Per-time empirical quantiles of the per-draw reliabilities.
ReliabilityBand reliability_quantile_band(std::span<const ChainOutput> chains, const StressLevel& use,
                                          std::span<const double> times, std::span<const double> levels);
ReliabilityBand reliability_quantile_band(std::span<const std::array<double, 5>> draws, const StressLevel& use,
                                          std::span<const double> times, std::span<const double> levels);

/// Geometric grid from `lo` to `hi` inclusive.
std::vector<double> geometric_grid(double lo, double hi, std::size_t n);
std::vector<double> default_time_grid();

/// CSV with columns time, reliability and one column per band level.
void write_reliability_csv(std::ostream& out, const ReliabilityCurve& c, const ReliabilityBand* band = nullptr,
                           const std::vector<std::string>& header = {});

} // namespace gew
