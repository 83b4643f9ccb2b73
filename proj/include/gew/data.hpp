#pragma once

#include "gew/model.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace gew
{

enum class CensoringKind
{
    Complete,
    TypeI,
    TypeII,
};

std::string_view to_string(CensoringKind k);
CensoringKind parse_censoring(std::string_view name);

/// Censoring plan.  For type-I a common censoring time may be given; when it
/// is absent the loader takes tau from the censored rows.  For type-II an
/// expected failure count per group may be given and is then enforced.
struct CensoringScheme
{
    CensoringKind kind = CensoringKind::Complete;
    std::optional<double> tau;
    std::optional<std::size_t> failures;

    static CensoringScheme complete() { return {}; }
    static CensoringScheme type_i(double tau) { return {CensoringKind::TypeI, tau, std::nullopt}; }
    static CensoringScheme type_ii(std::size_t r) { return {CensoringKind::TypeII, std::nullopt, r}; }
};

/// Items tested at one stress combination.  `tau` is the censoring time of the
/// n - r survivors: user-supplied for type-I, the largest failure time for
/// type-II, unused (0) for complete samples.
struct TestGroup
{
    std::string label;
    StressLevel stress;
    std::size_t n = 0;
    std::vector<double> failures;
    CensoringKind scheme = CensoringKind::Complete;
    double tau = 0.0;

    std::size_t failure_count() const { return failures.size(); }
    std::size_t censored_count() const { return n - failures.size(); }
};

struct AltDataset
{
    std::vector<TestGroup> groups;
    StressLevel use_stress;
    VTransform transform = VTransform::Log;

    std::size_t total_failures() const;
    std::size_t total_items() const;
};

/// Default normal-use condition for temperature-humidity tests (350 K, 0.3).
StressLevel default_use_stress(VTransform t = VTransform::Log);

/// Enforces the TestGroup and AltDataset invariants.  Throws ValidationError.
void validate(const TestGroup& g);
void validate(const AltDataset& d, bool require_failures = true);

struct ColumnMap
{
    std::string group = "group";
    std::string temperature = "temperature_K";
    std::string stress = "stress";
    std::string time = "time";
    std::string event = "event";
};

struct LoadOptions
{
    ColumnMap columns;
    CensoringScheme scheme;
    VTransform transform = VTransform::Log;
    std::optional<StressLevel> use_stress;
    bool require_failures = true;
};

AltDataset load_dataset(const std::filesystem::path& path, const LoadOptions& opts = {});
AltDataset parse_dataset(std::istream& in, const LoadOptions& opts = {});

void write_dataset(std::ostream& out, const AltDataset& d, const std::vector<std::string>& header_comments = {});
void write_dataset(const std::filesystem::path& path, const AltDataset& d,
                   const std::vector<std::string>& header_comments = {});

/// Digest of the canonical CSV serialisation (comments excluded).
std::string dataset_digest(const AltDataset& d);

/// Per-group quantities the grouped likelihood needs.  Times are stored both
/// raw and logged; `max_log_time` bounds every log time and the log censoring
/// time so that power sums can be formed without overflow.
struct GroupStats
{
    double temperature = 0.0;
    double v = 0.0;
    double log_temperature = 0.0;
    std::size_t n = 0;
    std::size_t r = 0;
    double censored = 0.0; // n - r as a real
    double tau = 0.0;
    double log_tau = 0.0;
    std::vector<double> times;
    std::vector<double> log_times;
    double sum_log_times = 0.0;
    double max_log_time = 0.0;
};

struct SufficientStats
{
    double sum_r = 0.0;
    double sum_r_over_T = 0.0;
    double sum_rV = 0.0;
    double sum_rV_over_T = 0.0;
    double sum_log_times = 0.0;
    double sum_r_log_T = 0.0;
    std::vector<GroupStats> groups;

    /// Linear coefficient of theta_j in the log-likelihood (the four sums above).
    double coefficient_sum(Param p) const;
};

SufficientStats sufficient_stats(const AltDataset& d);

struct PlannedGroup
{
    StressLevel stress;
    std::size_t n;
};

/// Draws lifetimes by inverting the reliability function,
/// x = (-ln U / alpha)^(1/beta), then applies the censoring plan.  Failure
/// times within each group are returned sorted.
AltDataset simulate_dataset(const GewParams& truth, const std::vector<PlannedGroup>& plan,
                            const CensoringScheme& scheme, std::uint64_t seed,
                            std::optional<StressLevel> use_stress = std::nullopt,
                            VTransform transform = VTransform::Log);

} // namespace gew
