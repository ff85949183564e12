// qlw: confidence bounds on individual welfare loss from price increases.
//
//   qlw ci       --input data.csv --out res/
//   qlw welfare  --intervals res/intervals.csv --queries households.csv --sum-to 1
//   qlw simulate --seed 7 --n 1000 --theta 0.2,0.3,0.5 --out sim/
//   qlw mc       --seed 42 --table 1 --reps 500 --out mc/
//   qlw diagnose --input data.csv
//
// Every flag may also come from --config FILE (key = value lines); flags
// given on the command line win.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qlw/cli.hpp"
#include "qlw/errors.hpp"

namespace {

struct Flag {
    const char* name;
    const char* help;
};

// Keys shared by all subcommands; RunConfig::set does the validation.
const std::vector<Flag> kFlags = {
    {"alpha", "overall significance level in (0,1) (default 0.1)"},
    {"grid-nodes", "number of grid nodes for the xi inversion"},
    {"grid-lo", "lowest theta on the xi grid"},
    {"grid-hi", "highest theta on the xi grid"},
    {"mode", "interval used for welfare bounds: xi | ls | intersect (default intersect)"},
    {"ls", "least-squares estimator: auto | ols | tsls (auto = tsls when an instrument column exists)"},
    {"seed", "random seed (required for simulate and mc)"},
    {"jitter", "half-width of uniform noise added to the independence variable (0 = off)"},
    {"sum-to", "impose sum(theta) = value in the welfare bounds"},
    {"floor", "positivity floor for theta (default 1e-6)"},
    {"out", "output directory (default .)"},
    {"input", "micro-data CSV: good_id, price, quantity[, instrument]"},
    {"queries", "per-individual (delta, ystar) CSV, wide or long format"},
    {"intervals", "interval table written by 'qlw ci'"},
    {"reps", "Monte Carlo replications (default 500)"},
    {"table", "Monte Carlo design: 1 (three goods) or 2 (many goods)"},
    {"goods", "number of goods for table 2 (default 10)"},
    {"n", "sample size for simulate (default 1000)"},
    {"sample-sizes", "comma-separated sample sizes for mc"},
    {"theta", "comma-separated true thetas for simulate"},
    {"endogeneity", "simulate endogenous prices with this weight on the shock, in [0,1]"},
    {"threads", "worker threads (0 = all cores)"},
    {"profiles", "ci: write the xi profile of every good (true|false)"},
    {"text-table", "also write an aligned text table next to the CSV (true|false)"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Confidence bounds on individual welfare loss under random quasilinear demand"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "show help for all subcommands");

    std::map<std::string, std::string> given;
    std::string config_path;
    bool print_config = false;

    const std::vector<std::pair<std::string, std::string>> commands = {
        {"ci", "per-good confidence intervals (xi, ls, intersect) and xi profiles"},
        {"welfare", "per-individual welfare-loss bounds from intervals or raw data"},
        {"simulate", "write a synthetic data set from the demand model"},
        {"mc", "Monte Carlo tables"},
        {"diagnose", "boundary statistics predicting the shape of the xi confidence set"},
    };
    std::vector<CLI::App*> subs;
    for (const auto& [name, help] : commands) {
        CLI::App* sub = app.add_subcommand(name, help);
        for (const Flag& f : kFlags) {
            sub->add_option_function<std::string>(
                std::string("--") + f.name, [&given, key = std::string(f.name)](const std::string& v) { given[key] = v; },
                f.help);
        }
        sub->add_option("--config", config_path, "read settings from a key = value file");
        sub->add_flag("--print-config", print_config, "print the resolved configuration and exit");
        subs.push_back(sub);
    }

    CLI11_PARSE(app, argc, argv);

    qlw::cli::RunConfig config;
    try {
        if (!config_path.empty()) config = qlw::cli::load_config(config_path);
        for (CLI::App* sub : subs) {
            if (sub->parsed()) config.command = sub->get_name();
        }
        for (const auto& [key, value] : given) config.set(key, value);
    } catch (const qlw::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return qlw::exit_code(e.kind());
    }

    if (print_config) {
        std::cout << qlw::cli::to_text(config);
        return 0;
    }
    return qlw::cli::run(config, std::cout, std::cerr);
}
