#include "gew/cli.hpp"

#include <CLI11.hpp>

#include <map>
#include <ostream>

namespace gew
{

namespace
{

struct Flags
{
    std::string config;
    std::vector<std::string> sets;
    std::vector<std::pair<std::string, std::string>> direct; // filled after parsing
};

void add_common(CLI::App* cmd, Flags& f, std::map<std::string, std::string>& direct)
{
    cmd->add_option("-c,--config", f.config, "Flat key = value configuration file");
    cmd->add_option("-s,--set", f.sets, "Override one setting, KEY=VALUE (repeatable)");
    auto opt = [&](const std::string& flags, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
            flags, [&direct, key](const std::string& v) { direct[key] = v; }, help);
    };
    opt("-i,--input", "input", "Dataset CSV");
    opt("-o,--output-dir", "output_dir", "Output directory");
    opt("-m,--model", "model", "Prior preset: GEW1, GEW2_1..GEW2_5, GEW3, GEW4");
    opt("--seed", "seed", "Random seed");
    opt("--v-transform", "v_transform", "identity | log | reciprocal");
    opt("--censoring", "censoring", "complete | type1 | type2");
    opt("--use-temperature", "use_temperature", "Normal-use temperature (K)");
    opt("--use-stress", "use_stress", "Normal-use non-thermal stress");
}

void add_sampling(CLI::App* cmd, std::map<std::string, std::string>& direct)
{
    auto opt = [&](const std::string& flags, const std::string& key, const std::string& help) {
        cmd->add_option_function<std::string>(
            flags, [&direct, key](const std::string& v) { direct[key] = v; }, help);
    };
    opt("--n-burn", "n_burn", "Burn-in sweeps");
    opt("--n-keep", "n_keep", "Retained sweeps per chain");
    opt("--chains", "n_chains", "Number of chains");
    opt("--workers", "workers", "Worker threads (0 = one per chain)");
    opt("--sampler", "sampler", "ars | slice");
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Bayesian accelerated life testing with the generalized Eyring-Weibull model", "gew"};
    app.require_subcommand(1);
    Flags flags;
    std::map<std::string, std::string> direct;

    auto* fit = app.add_subcommand("fit", "Run the Gibbs sampler and write chains, summaries, DIC and reliability");
    add_common(fit, flags, direct);
    add_sampling(fit, direct);

    auto* sim = app.add_subcommand("simulate", "Simulate a censored dataset from known parameters");
    add_common(sim, flags, direct);
    sim->add_option_function<std::string>(
        "--out", [&direct](const std::string& v) { direct["dataset_out"] = v; }, "Dataset file to write");
    sim->add_option_function<std::string>(
        "--plan", [&direct](const std::string& v) { direct["plan"] = v; }, "T:S:n;T:S:n;...");
    sim->add_option_function<std::string>(
        "--tau", [&direct](const std::string& v) { direct["tau"] = v; }, "Type-I censoring time");
    sim->add_option_function<std::string>(
        "--failures", [&direct](const std::string& v) { direct["failures"] = v; }, "Type-II failure count");

    auto* check = app.add_subcommand("check", "Verify log-concavity and analytic derivatives of the conditionals");
    add_common(check, flags, direct);
    check->add_option_function<std::string>(
        "--states", [&direct](const std::string& v) { direct["check_states"] = v; }, "Random states to probe");

    auto* predict = app.add_subcommand("predict", "Predictive reliability at use stress from stored chains");
    add_common(predict, flags, direct);
    predict->add_option_function<std::string>(
        "--chains-dir", [&direct](const std::string& v) { direct["chains_dir"] = v; }, "Directory of chain CSVs");

    auto* summ = app.add_subcommand("summarize", "Posterior summary, Gelman-Rubin and DIC of stored chains");
    add_common(summ, flags, direct);
    summ->add_option_function<std::string>(
        "--chains-dir", [&direct](const std::string& v) { direct["chains_dir"] = v; }, "Directory of chain CSVs");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try
    {
        RunConfig cfg;
        if (!flags.config.empty())
            load_config_file(cfg, flags.config);
        apply_environment(cfg);
        for (const auto& s : flags.sets)
            apply_assignment(cfg, s);
        for (const auto& [k, v] : direct)
            apply_setting(cfg, k, v);

        if (fit->parsed())
            cmd_fit(cfg, out, err);
        else if (sim->parsed())
            cmd_simulate(cfg, out);
        else if (check->parsed())
            return cmd_check(cfg, out) ? kExitOk : kExitNumerical;
        else if (predict->parsed())
            cmd_predict(cfg, out);
        else if (summ->parsed())
            cmd_summarize(cfg, out);
        return kExitOk;
    }
    catch (const std::exception& e)
    {
        err << "gew: error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

} // namespace gew
