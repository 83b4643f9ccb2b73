#pragma once

#include "gew/data.hpp"
#include "gew/diagnostics.hpp"
#include "gew/errors.hpp"
#include "gew/inference.hpp"
#include "gew/posterior.hpp"
#include "gew/samplers.hpp"

#include <array>
#include <exception>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gew
{

/// Bad configuration key, value or combination.
class ConfigError : public Error
{
  public:
    using Error::Error;
};

enum ExitCode : int
{
    kExitOk = 0,
    kExitUsage = 1,
    kExitIo = 2,
    kExitValidation = 3,
    kExitNumerical = 4,
};

int exit_code_for(const std::exception& e);

struct RunConfig
{
    std::string model = "GEW1";
    std::array<std::optional<PriorSpec>, 5> prior_overrides{};
    VTransform v_transform = VTransform::Log;
    SamplerConfig sampler;
    std::size_t n_burn = 50000;
    std::size_t n_keep = 200000;
    std::size_t n_chains = 1;
    std::size_t workers = 0;

    double use_temperature = 350.0;
    double use_stress = 0.3;
    std::vector<double> times;              // explicit grid; empty means time_grid
    std::array<double, 3> time_grid{1.0, 5000.0, 200.0};
    std::vector<double> band_levels{0.025, 0.5, 0.975};

    std::string input;
    std::string output_dir = "gew_out";
    std::string chains_dir;  // predict / summarize; defaults to output_dir
    std::string dataset_out; // simulate; defaults to <output_dir>/dataset.csv

    CensoringKind censoring = CensoringKind::TypeI;
    std::optional<double> tau;
    std::optional<std::size_t> failures;
    bool temperature_factor = true;
    std::array<std::optional<double>, 5> init{};

    std::array<double, 5> truth{3.0, 7.0, 0.6, 0.6, 1.95};
    std::string plan = "378:0.6:100;378:0.85:100;398:0.6:100;398:0.85:100";

    std::size_t check_states = 100;

    PriorConfig prior() const;
    CensoringScheme scheme() const;
    StressLevel use_level() const;
    std::vector<double> time_points() const;
    std::vector<PlannedGroup> planned_groups() const;
    LikelihoodOptions likelihood() const { return {temperature_factor}; }

    /// Checks every value against the library invariants.  Throws ConfigError.
    void validate() const;

    /// Every setting as (key, value), in a fixed order.
    std::vector<std::pair<std::string, std::string>> effective() const;
};

/// Applies one "key = value" setting.  Throws ConfigError for unknown keys or
/// bad values.
void apply_setting(RunConfig& cfg, std::string_view key, std::string_view value);

/// Applies "key=value" or "key = value" text.
void apply_assignment(RunConfig& cfg, std::string_view assignment);

/// Flat key = value file; '#' starts a comment line.
void load_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// GEW_SEED and GEW_OUTPUT_DIR.
void apply_environment(RunConfig& cfg);

/// Files produced by a command, with their FNV-1a digests.
struct RunArtifacts
{
    std::vector<std::pair<std::string, std::string>> files; // (name, digest)
    std::string manifest_digest;
};

RunArtifacts cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err);
RunArtifacts cmd_simulate(const RunConfig& cfg, std::ostream& out);
/// Returns true when every eligible conditional passed.
bool cmd_check(const RunConfig& cfg, std::ostream& out);
RunArtifacts cmd_predict(const RunConfig& cfg, std::ostream& out);
void cmd_summarize(const RunConfig& cfg, std::ostream& out);

/// chain_<k>.csv files of a run directory, ordered by k.
std::vector<std::filesystem::path> chain_files(const std::filesystem::path& dir);

/// Entry point shared by the gew binary and the tests.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace gew
