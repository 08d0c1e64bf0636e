#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <string>

#include "sda/pipeline.hpp"

namespace {

void add_common_flags(CLI::App* cmd, sda::RunConfig& cfg, std::string& outcome,
                      std::string& outcome_kind, std::string& delimiter) {
    cmd->add_option("--input", cfg.input_path, "input CSV/TSV path");
    cmd->add_option("--outcome", outcome,
                    "outcome column name (time,event pair for survival)");
    cmd->add_option("--outcome-kind", outcome_kind, "continuous|categorical|survival")
        ->default_val("continuous");
    cmd->add_option("--delimiter", delimiter, "cell delimiter")->default_val(",");
    cmd->add_option("--seed", cfg.seed, "RNG seed");
    cmd->add_option("--workers", cfg.workers, "worker threads (0 = all cores)");
    cmd->add_option("--out", cfg.out_prefix, "output file prefix");
}

void finalize_outcome(sda::RunConfig& cfg, const std::string& outcome,
                      const std::string& outcome_kind, const std::string& delimiter) {
    if (delimiter == "\\t" || delimiter == "tab")
        cfg.delimiter = '\t';
    else if (delimiter.size() == 1)
        cfg.delimiter = delimiter[0];
    else
        throw sda::ConfigError("delimiter must be a single character");

    if (outcome_kind == "continuous")
        cfg.outcome.kind = sda::OutcomeKind::continuous;
    else if (outcome_kind == "categorical")
        cfg.outcome.kind = sda::OutcomeKind::categorical;
    else if (outcome_kind == "survival")
        cfg.outcome.kind = sda::OutcomeKind::survival;
    else
        throw sda::ConfigError("outcome-kind must be continuous, categorical, or survival");

    if (cfg.outcome.kind == sda::OutcomeKind::survival) {
        const auto comma = outcome.find(',');
        if (comma == std::string::npos)
            throw sda::ConfigError("survival outcome needs 'time,event' column pair");
        cfg.outcome.time_column = outcome.substr(0, comma);
        cfg.outcome.event_column = outcome.substr(comma + 1);
    } else {
        cfg.outcome.column = outcome;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Model-free conditional association testing for high-dimensional data"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");  // keep --h free for the slice count

    sda::RunConfig cfg;
    if (const char* env = std::getenv("SDA_WORKERS")) cfg.workers = std::atoi(env);

    std::string outcome, outcome_kind = "continuous", delimiter = ",";

    CLI::App* test = app.add_subcommand("test", "test each variable's conditional association");
    test->set_help_flag("--help", "print help");
    add_common_flags(test, cfg, outcome, outcome_kind, delimiter);
    test->add_option("--stat", cfg.stat, "ks|cvm|both")->default_val("cvm");
    int h_flag = 0;
    test->add_option("--h", h_flag, "slice count (default ceil(n^(1/3)))");
    test->add_option("--draws", cfg.l_draws, "bootstrap draws (default 1000; 10000 with --fdr-q)");
    test->add_option("--alpha", cfg.alpha, "test level")->default_val(0.05);
    double fdr_q = 0.0;
    test->add_option("--fdr-q", fdr_q, "Benjamini-Hochberg FDR level");
    int screen_keep = 0;
    test->add_option("--screen-keep", screen_keep, "pre-select candidates by outcome correlation");
    std::string gamma;
    test->add_option("--gamma", gamma, "SIS conditioning fraction in (0,1), or 'auto'");
    test->add_flag("--dump-fits", cfg.dump_fits, "write nodewise fit details");
    test->add_flag("--dump-slices", cfg.dump_slices, "write the slice plan");
    test->add_flag("--scale", cfg.scale, "scale predictors to unit variance");

    CLI::App* simulate = app.add_subcommand("simulate", "run a Monte-Carlo power scenario");
    simulate->add_option("--scenario", cfg.scenario, "builtin scenario name or JSON file");
    simulate->add_option("--seed", cfg.seed, "RNG seed override");
    simulate->add_option("--workers", cfg.workers, "worker threads (0 = all cores)");
    simulate->add_option("--out", cfg.out_prefix, "output file prefix");

    CLI::App* screen = app.add_subcommand("screen", "correlation screening only");
    add_common_flags(screen, cfg, outcome, outcome_kind, delimiter);
    int screen_keep2 = 0;
    screen->add_option("--screen-keep", screen_keep2, "keep this many outcome-ranked predictors");
    std::string gamma2;
    screen->add_option("--gamma", gamma2, "SIS fraction in (0,1), or 'auto'");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (test->parsed()) {
            cfg.command = "test";
            if (h_flag > 0) cfg.h = h_flag;
            if (fdr_q > 0.0) cfg.fdr_q = fdr_q;
            if (screen_keep > 0) cfg.screen_keep = screen_keep;
            if (!gamma.empty()) cfg.gamma = gamma;
        } else if (simulate->parsed()) {
            cfg.command = "simulate";
        } else {
            cfg.command = "screen";
            if (screen_keep2 > 0) cfg.screen_keep = screen_keep2;
            if (!gamma2.empty()) cfg.gamma = gamma2;
        }
        if (cfg.command != "simulate") {
            if (cfg.input_path.empty()) throw sda::ConfigError("--input is required");
            if (outcome.empty()) throw sda::ConfigError("--outcome is required");
            finalize_outcome(cfg, outcome, outcome_kind, delimiter);
        }
    } catch (const sda::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    return sda::dispatch(cfg);
}
