#include "gew/cli.hpp"

#include "gew/util.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

namespace gew
{

namespace fs = std::filesystem;

int exit_code_for(const std::exception& e)
{
    if (dynamic_cast<const ConfigError*>(&e))
        return kExitUsage;
    if (dynamic_cast<const IoError*>(&e))
        return kExitIo;
    if (dynamic_cast<const ValidationError*>(&e))
        return kExitValidation;
    return kExitNumerical;
}

namespace
{

double to_double(std::string_view key, std::string_view v)
{
    try
    {
        return parse_double(v);
    }
    catch (const std::invalid_argument&)
    {
        throw ConfigError(std::string(key) + ": expected a number, got '" + std::string(v) + "'");
    }
}

std::size_t to_count(std::string_view key, std::string_view v)
{
    long long n = 0;
    try
    {
        n = parse_integer(v);
    }
    catch (const std::invalid_argument&)
    {
        throw ConfigError(std::string(key) + ": expected an integer, got '" + std::string(v) + "'");
    }
    if (n < 0)
        throw ConfigError(std::string(key) + ": must not be negative");
    return static_cast<std::size_t>(n);
}

bool to_bool(std::string_view key, std::string_view v)
{
    const std::string s = to_lower(v);
    if (s == "1" || s == "true" || s == "yes" || s == "on")
        return true;
    if (s == "0" || s == "false" || s == "no" || s == "off")
        return false;
    throw ConfigError(std::string(key) + ": expected true or false");
}

std::vector<double> to_list(std::string_view key, std::string_view v)
{
    std::vector<double> out;
    for (const auto& part : split(v, ','))
        if (!trim(part).empty())
            out.push_back(to_double(key, trim(part)));
    return out;
}

std::string join(const std::vector<double>& v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i)
        s += (i ? "," : "") + format_double(v[i]);
    return s;
}

std::optional<Param> param_suffix(std::string_view key, std::string_view prefix)
{
    if (key.substr(0, prefix.size()) != prefix)
        return std::nullopt;
    const auto name = key.substr(prefix.size());
    for (Param p : kAllParams)
        if (name == to_string(p))
            return p;
    throw ConfigError("unknown parameter in '" + std::string(key) + "'");
}

template <class F>
auto as_config_error(F f) -> decltype(f())
{
    try
    {
        return f();
    }
    catch (const ValidationError& e)
    {
        throw ConfigError(e.what());
    }
}

// Writes files into the output directory and removes them again unless the
// run is committed.
class OutputSet
{
  public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir))
    {
        std::error_code ec;
        if (!fs::exists(dir_, ec))
        {
            if (!fs::create_directories(dir_, ec))
                throw IoError("cannot create output directory '" + dir_.string() + "'");
            created_dir_ = true;
        }
        else if (!fs::is_directory(dir_, ec))
            throw IoError("output path '" + dir_.string() + "' is not a directory");
    }

    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;

    ~OutputSet()
    {
        if (committed_)
            return;
        std::error_code ec;
        for (const auto& f : written_)
            fs::remove(dir_ / f, ec);
        if (created_dir_)
            fs::remove(dir_, ec); // only succeeds when empty
    }

    std::string write(const std::string& name, const std::string& content)
    {
        const fs::path path = dir_ / name;
        written_.push_back(name);
        std::ofstream f(path, std::ios::binary);
        if (!f)
            throw IoError("cannot write '" + path.string() + "'");
        f << content;
        f.close();
        if (!f)
            throw IoError("error writing '" + path.string() + "'");
        const std::string digest = fnv1a_hex(content);
        files_.emplace_back(name, digest);
        return digest;
    }

    const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }
    void commit() { committed_ = true; }

  private:
    fs::path dir_;
    bool created_dir_ = false;
    bool committed_ = false;
    std::vector<std::string> written_;
    std::vector<std::pair<std::string, std::string>> files_;
};

std::vector<std::string> provenance(const RunConfig& cfg)
{
    return {"model=" + cfg.prior().name, "seed=" + std::to_string(cfg.sampler.seed),
            "v_transform=" + std::string(to_string(cfg.v_transform))};
}

AltDataset load_input(const RunConfig& cfg, bool require_failures)
{
    if (cfg.input.empty())
        throw ConfigError("no input dataset given (set input)");
    LoadOptions opts;
    opts.scheme = cfg.scheme();
    opts.transform = cfg.v_transform;
    opts.use_stress = cfg.use_level();
    opts.require_failures = require_failures;
    return load_dataset(cfg.input, opts);
}

std::string manifest_text(const RunConfig& cfg, std::string_view command,
                          const std::vector<std::pair<std::string, std::string>>& extra,
                          const std::vector<std::pair<std::string, std::string>>& files)
{
    std::ostringstream m;
    m << "# gew run manifest\n";
    m << "format=1\n";
    m << "command=" << command << '\n';
    for (const auto& [k, v] : cfg.effective())
        m << k << '=' << v << '\n';
    for (const auto& [k, v] : extra)
        m << k << '=' << v << '\n';
    for (const auto& [name, digest] : files)
        m << "output." << name << '=' << digest << '\n';
    return m.str();
}

std::vector<ChainOutput> read_chains(const RunConfig& cfg)
{
    const fs::path dir = cfg.chains_dir.empty() ? fs::path(cfg.output_dir) : fs::path(cfg.chains_dir);
    const auto files = chain_files(dir);
    if (files.empty())
        throw IoError("no chain_<k>.csv files in '" + dir.string() + "'");
    std::vector<ChainOutput> chains;
    for (const auto& f : files)
        chains.push_back(read_chain_csv(f.string()));
    return chains;
}

} // namespace

// ---------------------------------------------------------------------------
// RunConfig

PriorConfig RunConfig::prior() const
{
    PriorConfig p = as_config_error([&] { return PriorConfig::preset(model); });
    bool changed = false;
    for (Param q : kAllParams)
        if (prior_overrides[index(q)])
        {
            p[q] = *prior_overrides[index(q)];
            changed = true;
        }
    if (changed)
        p.name += "+custom";
    return p;
}

CensoringScheme RunConfig::scheme() const
{
    return {censoring, tau, failures};
}

StressLevel RunConfig::use_level() const
{
    return as_config_error([&] { return StressLevel::make(use_temperature, use_stress, v_transform); });
}

std::vector<double> RunConfig::time_points() const
{
    if (!times.empty())
        return times;
    try
    {
        return geometric_grid(time_grid[0], time_grid[1], static_cast<std::size_t>(time_grid[2]));
    }
    catch (const DomainError& e)
    {
        throw ConfigError(std::string("time_grid: ") + e.what());
    }
}

std::vector<PlannedGroup> RunConfig::planned_groups() const
{
    std::vector<PlannedGroup> out;
    for (const auto& item : split(plan, ';'))
    {
        if (trim(item).empty())
            continue;
        const auto f = split(trim(item), ':');
        if (f.size() != 3)
            throw ConfigError("plan entries look like temperature:stress:n, got '" + item + "'");
        const double t = to_double("plan", trim(f[0]));
        const double s = to_double("plan", trim(f[1]));
        const std::size_t n = to_count("plan", trim(f[2]));
        out.push_back({as_config_error([&] { return StressLevel::make(t, s, v_transform); }), n});
    }
    if (out.empty())
        throw ConfigError("plan is empty");
    return out;
}

void RunConfig::validate() const
{
    as_config_error([&] {
        prior().validate();
        sampler.validate();
    });
    if (n_chains == 0)
        throw ConfigError("n_chains must be at least 1");
    if (!(use_temperature > 0.0))
        throw ConfigError("use_temperature must be positive");
    use_level();
    const auto t = time_points();
    for (std::size_t i = 0; i < t.size(); ++i)
        if (!(t[i] >= 0.0) || (i > 0 && t[i] < t[i - 1]))
            throw ConfigError("times must be non-negative and increasing");
    for (double l : band_levels)
        if (!(l >= 0.0 && l <= 1.0))
            throw ConfigError("band_levels must lie in [0, 1]");
    if (censoring == CensoringKind::TypeII && failures && *failures == 0)
        throw ConfigError("failures must be at least 1 for type-II censoring");
    if (tau && !(*tau > 0.0))
        throw ConfigError("tau must be positive");
    const PriorConfig p = prior();
    for (Param q : kAllParams)
        if (init[index(q)] && !std::isfinite(log_prior_term(p[q], *init[index(q)])))
            throw ConfigError("init." + std::string(to_string(q)) + " lies outside the prior support");
}

std::vector<std::pair<std::string, std::string>> RunConfig::effective() const
{
    std::vector<std::pair<std::string, std::string>> e;
    const PriorConfig p = prior();
    e.emplace_back("model", model);
    e.emplace_back("family", std::string(model_label(p.family())));
    for (Param q : kAllParams)
        e.emplace_back("prior." + std::string(to_string(q)), describe(p[q]));
    e.emplace_back("v_transform", std::string(to_string(v_transform)));
    e.emplace_back("temperature_factor", temperature_factor ? "true" : "false");
    e.emplace_back("sampler", std::string(to_string(sampler.method)));
    e.emplace_back("slice_width", format_double(sampler.slice_width));
    e.emplace_back("slice_max_doublings", std::to_string(sampler.slice_max_doublings));
    e.emplace_back("ars_max_points", std::to_string(sampler.ars_max_points));
    e.emplace_back("ars_max_trials", std::to_string(sampler.ars_max_trials));
    e.emplace_back("seed", std::to_string(sampler.seed));
    e.emplace_back("n_burn", std::to_string(n_burn));
    e.emplace_back("n_keep", std::to_string(n_keep));
    e.emplace_back("n_chains", std::to_string(n_chains));
    e.emplace_back("workers", std::to_string(workers));
    for (Param q : kAllParams)
        e.emplace_back("init." + std::string(to_string(q)),
                       init[index(q)] ? format_double(*init[index(q)]) : std::string("default"));
    e.emplace_back("use_temperature", format_double(use_temperature));
    e.emplace_back("use_stress", format_double(use_stress));
    if (times.empty())
        e.emplace_back("time_grid", join({time_grid.begin(), time_grid.end()}));
    else
        e.emplace_back("times", join(times));
    e.emplace_back("band_levels", join(band_levels));
    e.emplace_back("censoring", std::string(to_string(censoring)));
    e.emplace_back("tau", tau ? format_double(*tau) : std::string("auto"));
    e.emplace_back("failures", failures ? std::to_string(*failures) : std::string("auto"));
    e.emplace_back("input", input.empty() ? std::string() : fs::path(input).filename().string());
    return e;
}

void apply_setting(RunConfig& cfg, std::string_view raw_key, std::string_view raw_value)
{
    const std::string key = to_lower(trim(raw_key));
    const std::string value = trim(raw_value);
    if (auto p = param_suffix(key, "prior."))
    {
        if (value.empty() || to_lower(value) == "default")
            cfg.prior_overrides[index(*p)].reset();
        else
            cfg.prior_overrides[index(*p)] = as_config_error([&] { return parse_prior_spec(value); });
    }
    else if (auto p = param_suffix(key, "init."))
    {
        if (value.empty() || to_lower(value) == "default")
            cfg.init[index(*p)].reset();
        else
            cfg.init[index(*p)] = to_double(key, value);
    }
    else if (auto p = param_suffix(key, "truth."))
        cfg.truth[index(*p)] = to_double(key, value);
    else if (key == "model")
    {
        as_config_error([&] { return PriorConfig::preset(value); });
        cfg.model = value;
    }
    else if (key == "v_transform")
        cfg.v_transform = as_config_error([&] { return parse_vtransform(value); });
    else if (key == "sampler")
        cfg.sampler.method = as_config_error([&] { return parse_sampler_method(value); });
    else if (key == "slice_width")
        cfg.sampler.slice_width = to_double(key, value);
    else if (key == "slice_max_doublings")
        cfg.sampler.slice_max_doublings = to_count(key, value);
    else if (key == "ars_max_points")
        cfg.sampler.ars_max_points = to_count(key, value);
    else if (key == "ars_max_trials")
        cfg.sampler.ars_max_trials = to_count(key, value);
    else if (key == "seed")
        cfg.sampler.seed = to_count(key, value);
    else if (key == "n_burn")
        cfg.n_burn = to_count(key, value);
    else if (key == "n_keep")
        cfg.n_keep = to_count(key, value);
    else if (key == "n_chains" || key == "chains")
        cfg.n_chains = to_count(key, value);
    else if (key == "workers")
        cfg.workers = to_count(key, value);
    else if (key == "use_temperature")
        cfg.use_temperature = to_double(key, value);
    else if (key == "use_stress")
        cfg.use_stress = to_double(key, value);
    else if (key == "times")
        cfg.times = to_list(key, value);
    else if (key == "time_grid")
    {
        const auto g = to_list(key, value);
        if (g.size() != 3 || g[2] != std::floor(g[2]))
            throw ConfigError("time_grid is lo,hi,count");
        cfg.time_grid = {g[0], g[1], g[2]};
        cfg.times.clear();
    }
    else if (key == "band_levels")
        cfg.band_levels = to_list(key, value);
    else if (key == "input")
        cfg.input = value;
    else if (key == "output_dir")
        cfg.output_dir = value;
    else if (key == "chains_dir")
        cfg.chains_dir = value;
    else if (key == "dataset_out")
        cfg.dataset_out = value;
    else if (key == "censoring")
        cfg.censoring = as_config_error([&] { return parse_censoring(value); });
    else if (key == "tau")
    {
        if (to_lower(value) == "auto" || value.empty())
            cfg.tau.reset();
        else
            cfg.tau = to_double(key, value);
    }
    else if (key == "failures")
    {
        if (to_lower(value) == "auto" || value.empty())
            cfg.failures.reset();
        else
            cfg.failures = to_count(key, value);
    }
    else if (key == "temperature_factor")
        cfg.temperature_factor = to_bool(key, value);
    else if (key == "plan")
        cfg.plan = value;
    else if (key == "check_states")
        cfg.check_states = to_count(key, value);
    else
        throw ConfigError("unknown setting '" + key + "'");
}

void apply_assignment(RunConfig& cfg, std::string_view assignment)
{
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos)
        throw ConfigError("expected key=value, got '" + std::string(assignment) + "'");
    apply_setting(cfg, assignment.substr(0, eq), assignment.substr(eq + 1));
}

void load_config_file(RunConfig& cfg, const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot open config file '" + path.string() + "'");
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line))
    {
        ++row;
        const std::string t = trim(line);
        if (t.empty() || t.front() == '#')
            continue;
        try
        {
            apply_assignment(cfg, t);
        }
        catch (const ConfigError& e)
        {
            throw ConfigError(path.string() + ":" + std::to_string(row) + ": " + e.what());
        }
    }
}

void apply_environment(RunConfig& cfg)
{
    if (const char* s = std::getenv("GEW_SEED"); s && *s)
        apply_setting(cfg, "seed", s);
    if (const char* d = std::getenv("GEW_OUTPUT_DIR"); d && *d)
        apply_setting(cfg, "output_dir", d);
}

std::vector<fs::path> chain_files(const fs::path& dir)
{
    std::vector<std::pair<long long, fs::path>> found;
    std::error_code ec;
    if (!fs::is_directory(dir, ec))
        throw IoError("'" + dir.string() + "' is not a directory");
    for (const auto& entry : fs::directory_iterator(dir))
    {
        const std::string name = entry.path().filename().string();
        if (name.rfind("chain_", 0) != 0 || entry.path().extension() != ".csv")
            continue;
        try
        {
            found.emplace_back(parse_integer(name.substr(6, name.size() - 10)), entry.path());
        }
        catch (const std::invalid_argument&)
        {
        }
    }
    std::sort(found.begin(), found.end());
    std::vector<fs::path> out;
    for (auto& f : found)
        out.push_back(std::move(f.second));
    return out;
}

// ---------------------------------------------------------------------------
// Commands

RunArtifacts cmd_fit(const RunConfig& cfg, std::ostream& out, std::ostream& err)
{
    cfg.validate();
    const PriorConfig prior = cfg.prior();
    const AltDataset data = load_input(cfg, true);
    const SufficientStats stats = sufficient_stats(data);
    const LikelihoodOptions lik = cfg.likelihood();

    GewParams init = choose_initial_state(stats, prior, true, lik);
    for (Param q : kAllParams)
        if (cfg.init[index(q)])
            init.set(q, *cfg.init[index(q)]);
    if (!std::isfinite(log_posterior(init, stats, prior, lik)))
        throw DomainError("initial state has zero posterior density");

    GibbsOptions opts;
    opts.likelihood = lik;
    opts.meta.model = prior.name;
    opts.meta.dataset_digest = dataset_digest(data);
    opts.meta.v_transform = std::string(to_string(cfg.v_transform));
    SamplerConfig sc = cfg.sampler;

    const auto chains = run_chains(stats, prior, sc, {init}, cfg.n_burn, cfg.n_keep, cfg.n_chains, cfg.workers, opts);
    for (const auto& c : chains)
        for (const auto& line : c.log)
            err << "chain " << c.meta.chain_index + 1 << ": " << line << '\n';

    OutputSet files(cfg.output_dir);
    const auto header = provenance(cfg);
    for (const auto& c : chains)
    {
        std::ostringstream s;
        write_chain_csv(s, c, cfg.n_burn);
        files.write("chain_" + std::to_string(c.meta.chain_index + 1) + ".csv", s.str());
    }

    if (cfg.n_keep > 0)
    {
        const SummaryTable table = summarize(chains);
        const DicReport d = dic(chains, stats, lik);
        std::ostringstream sc_csv, sc_txt, dc, dt;
        write_summary_csv(sc_csv, table, header);
        write_summary_text(sc_txt, table, header);
        write_dic_csv(dc, d, header);
        write_dic_text(dt, d, header);
        files.write("summary.csv", sc_csv.str());
        files.write("summary.txt", sc_txt.str());
        files.write("dic.csv", dc.str());
        files.write("dic.txt", dt.str());
        out << sc_txt.str() << '\n' << dt.str();

        if (cfg.n_chains >= 2)
        {
            std::vector<GelmanRubinDetail> rows;
            for (Param q : kAllParams)
            {
                try
                {
                    rows.push_back(gelman_rubin_detail(chains, q));
                    if (!rows.back().corrected)
                        err << "warning: " << to_string(q)
                            << ": degrees-of-freedom estimate not finite, reporting the uncorrected factor\n";
                }
                catch (const DomainError& e)
                {
                    err << "warning: Gelman-Rubin skipped for " << to_string(q) << ": " << e.what() << '\n';
                }
            }
            std::ostringstream g;
            write_gelman_rubin_csv(g, rows, header);
            files.write("gelman_rubin.csv", g.str());
        }

        const auto times = cfg.time_points();
        const StressLevel use = cfg.use_level();
        const auto curve = predictive_reliability(chains, use, times);
        const auto band = reliability_quantile_band(chains, use, times, cfg.band_levels);
        std::ostringstream r;
        write_reliability_csv(r, curve, &band, header);
        files.write("reliability.csv", r.str());
    }

    const std::string manifest =
        manifest_text(cfg, "fit", {{"dataset_digest", dataset_digest(data)}}, files.files());
    files.write("manifest.txt", manifest);
    files.commit();

    RunArtifacts a;
    a.files = files.files();
    a.manifest_digest = fnv1a_hex(manifest);
    out << "manifest digest " << a.manifest_digest << '\n';
    return a;
}

RunArtifacts cmd_simulate(const RunConfig& cfg, std::ostream& out)
{
    cfg.validate();
    const auto plan = cfg.planned_groups();
    const GewParams truth = GewParams::from_array(cfg.truth);
    const AltDataset d = simulate_dataset(truth, plan, cfg.scheme(), cfg.sampler.seed, cfg.use_level(),
                                          cfg.v_transform);
    const fs::path target = cfg.dataset_out.empty() ? fs::path(cfg.output_dir) / "dataset.csv" : fs::path(cfg.dataset_out);

    std::vector<std::string> header = provenance(cfg);
    std::string truth_text;
    for (Param q : kAllParams)
        truth_text += (q == Param::Theta1 ? "" : ",") + std::string(to_string(q)) + "=" +
                      format_double(truth.get(q));
    header.push_back("truth " + truth_text);
    header.push_back("censoring=" + std::string(to_string(cfg.censoring)));

    std::ostringstream s;
    write_dataset(s, d, header);
    OutputSet files(target.has_parent_path() ? target.parent_path() : fs::path("."));
    const std::string digest = files.write(target.filename().string(), s.str());
    files.commit();
    out << "wrote " << target.string() << " (" << d.groups.size() << " groups, " << d.total_items() << " items, "
        << d.total_failures() << " failures)\n";
    RunArtifacts a;
    a.files = files.files();
    a.manifest_digest = digest;
    return a;
}

bool cmd_check(const RunConfig& cfg, std::ostream& out)
{
    cfg.validate();
    const PriorConfig prior = cfg.prior();
    const AltDataset data = load_input(cfg, false);
    const SufficientStats stats = sufficient_stats(data);
    const LikelihoodOptions lik = cfg.likelihood();
    const Eligibility elig = ars_eligibility(prior, stats, true);

    out << "model " << prior.name << " (" << model_label(prior.family()) << ")\n";
    out << "failures " << stats.sum_r << " in " << stats.groups.size() << " groups\n";
    out << "ARS eligibility: " << (elig.eligible ? "eligible" : "NOT eligible") << '\n';
    for (const auto& r : elig.reasons)
        out << "  reason: " << r << '\n';

    // States to probe: a short slice-sampled chain when the posterior is
    // proper, otherwise jittered copies of the default initial state.
    Rng rng(cfg.sampler.seed, 0x636865636bULL);
    std::vector<GewParams> states;
    const std::size_t n_states = std::max<std::size_t>(cfg.check_states, 1);
    if (stats.sum_r >= 1.0)
    {
        SamplerConfig sc = cfg.sampler;
        sc.method = SamplerMethod::Slice;
        GibbsOptions o;
        o.likelihood = lik;
        const GewParams init = choose_initial_state(stats, prior, true, lik);
        const auto chain = gibbs_run(stats, prior, sc, init, 500, n_states * 5, o);
        for (std::size_t m = 4; m < chain.size(); m += 5)
            states.push_back(chain.state(m));
    }
    else
    {
        const GewParams base = choose_initial_state(stats, prior, false, lik);
        for (std::size_t k = 0; k < n_states; ++k)
        {
            GewParams s = base;
            for (Param q : kAllParams)
            {
                const double v = base.get(q) * rng.uniform(0.5, 1.5);
                if (std::isfinite(log_prior_term(prior[q], v)))
                    s.set(q, v);
            }
            states.push_back(s);
        }
    }

    bool ok = true;
    char buf[512];
    for (Param q : kAllParams)
    {
        std::size_t points = 0, violations = 0, deriv_fail = 0, deriv_points = 0;
        double max_hess = -INFINITY, worst_g = 0.0, worst_h = 0.0;
        for (const auto& s : states)
        {
            const ConditionalTarget t(q, s, stats, prior, true);
            std::vector<double> grid;
            const double c = s.get(q);
            for (int k = 0; k < 10; ++k)
            {
                const double v = c * rng.uniform(0.5, 1.5) + rng.uniform(-0.05, 0.05);
                if (t.in_interior(v) && std::isfinite(t.logpdf(v)))
                    grid.push_back(v);
            }
            const auto rep = verify_log_concavity(t, grid);
            points += rep.points_checked;
            violations += rep.violations.size();
            max_hess = std::max(max_hess, rep.max_hess);
            if (t.in_interior(c) && std::isfinite(t.logpdf(c)))
            {
                const auto dc = check_derivatives(t, c);
                ++deriv_points;
                worst_g = std::max(worst_g, dc.grad_error);
                worst_h = std::max(worst_h, dc.hess_error);
                if (!dc.passed)
                    ++deriv_fail;
            }
        }
        const bool eligible = elig.per_param[index(q)];
        const bool concave_ok = violations == 0;
        const bool deriv_ok = deriv_fail == 0;
        if ((eligible && !concave_ok) || !deriv_ok)
            ok = false;
        std::snprintf(buf, sizeof buf,
                      "%-7s %-12s concavity %s (%zu points, max hess %.3e, %zu violations)  derivatives %s "
                      "(%zu states, worst rel. err grad %.2e hess %.2e)\n",
                      std::string(to_string(q)).c_str(), eligible ? "eligible" : "not-eligible",
                      concave_ok ? "pass" : (eligible ? "FAIL" : "violated"), points, max_hess, violations,
                      deriv_ok ? "pass" : "FAIL", deriv_points, worst_g, worst_h);
        out << buf;
    }
    out << "overall " << (ok ? "PASS" : "FAIL") << '\n';
    return ok;
}

RunArtifacts cmd_predict(const RunConfig& cfg, std::ostream& out)
{
    cfg.validate();
    const auto chains = read_chains(cfg);
    const auto times = cfg.time_points();
    const StressLevel use = cfg.use_level();
    const auto curve = predictive_reliability(chains, use, times);
    const auto band = reliability_quantile_band(chains, use, times, cfg.band_levels);

    std::vector<std::string> header{"model=" + chains.front().meta.model,
                                    "seed=" + std::to_string(chains.front().meta.seed),
                                    "v_transform=" + chains.front().meta.v_transform};
    if (chains.front().meta.v_transform != to_string(cfg.v_transform))
        throw ConfigError("chains were fitted with v_transform=" + chains.front().meta.v_transform +
                          " but the config says " + std::string(to_string(cfg.v_transform)));
    std::ostringstream r;
    write_reliability_csv(r, curve, &band, header);
    OutputSet files(cfg.output_dir);
    files.write("predict_reliability.csv", r.str());
    files.commit();
    out << "predictive reliability at T=" << format_double(use.temperature) << " S=" << format_double(use.nonthermal)
        << " from " << curve.draws << " draws\n";
    char buf[128];
    for (std::size_t i = 0; i < curve.times.size(); i += std::max<std::size_t>(1, curve.times.size() / 10))
    {
        std::snprintf(buf, sizeof buf, "  t=%-12.4g R=%.6f\n", curve.times[i], curve.reliability[i]);
        out << buf;
    }
    RunArtifacts a;
    a.files = files.files();
    return a;
}

void cmd_summarize(const RunConfig& cfg, std::ostream& out)
{
    const auto chains = read_chains(cfg);
    const std::vector<std::string> header{"model=" + chains.front().meta.model,
                                          "seed=" + std::to_string(chains.front().meta.seed),
                                          "v_transform=" + chains.front().meta.v_transform,
                                          "chains=" + std::to_string(chains.size())};
    write_summary_text(out, summarize(chains), header);
    if (chains.size() >= 2)
    {
        out << "\nBrooks-Gelman corrected scale reduction\n";
        char buf[128];
        for (Param q : kAllParams)
        {
            try
            {
                const auto d = gelman_rubin_detail(chains, q);
                std::snprintf(buf, sizeof buf, "%-10s %.6f%s\n", std::string(to_string(q)).c_str(), d.rhat,
                              d.corrected ? "" : " (uncorrected)");
            }
            catch (const DomainError& e)
            {
                std::snprintf(buf, sizeof buf, "%-10s n/a (%s)\n", std::string(to_string(q)).c_str(), e.what());
            }
            out << buf;
        }
    }
    if (!cfg.input.empty())
    {
        const AltDataset data = load_input(cfg, true);
        out << '\n';
        write_dic_text(out, dic(chains, sufficient_stats(data), cfg.likelihood()));
    }
}

} // namespace gew
