#include "sda/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iostream>
#include <numeric>
#include <set>

#include "sda/io.hpp"
#include "sda/parallel.hpp"
#include "sda/screening.hpp"

namespace sda {

using nlohmann::json;

namespace {

json config_to_json(const RunConfig& cfg) {
    // workers, the output prefix, and timestamps are execution detail: they
    // never change numeric output, so they live in the "execution" block and
    // stay out of the reproducibility echo.
    json j{{"command", cfg.command},
           {"input", cfg.input_path},
           {"delimiter", std::string(1, cfg.delimiter)},
           {"stat", cfg.stat},
           {"l_draws", cfg.l_draws},
           {"alpha", cfg.alpha},
           {"seed", cfg.seed},
           {"dump_fits", cfg.dump_fits},
           {"dump_slices", cfg.dump_slices},
           {"scale", cfg.scale}};
    switch (cfg.outcome.kind) {
        case OutcomeKind::continuous:
            j["outcome"] = cfg.outcome.column;
            j["outcome_kind"] = "continuous";
            break;
        case OutcomeKind::categorical:
            j["outcome"] = cfg.outcome.column;
            j["outcome_kind"] = "categorical";
            break;
        case OutcomeKind::survival:
            j["outcome"] = cfg.outcome.time_column + "," + cfg.outcome.event_column;
            j["outcome_kind"] = "survival";
            break;
    }
    if (cfg.h) j["h"] = *cfg.h;
    if (cfg.fdr_q) j["fdr_q"] = *cfg.fdr_q;
    if (cfg.screen_keep) j["screen_keep"] = *cfg.screen_keep;
    if (cfg.gamma) j["gamma"] = *cfg.gamma;
    if (!cfg.scenario.empty()) j["scenario"] = cfg.scenario;
    return j;
}

std::string timestamp_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

void write_json_file(const json& j, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << j.dump(2) << "\n";
}

double resolve_gamma(const std::string& text, int n) {
    if (text == "auto") return static_cast<double>(n - 2) / (n - 1);
    char* end = nullptr;
    const double g = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size() || g <= 0.0 || g >= 1.0)
        throw ConfigError("gamma must be in (0,1) or 'auto', got '" + text + "'");
    return g;
}

int effective_h(const RunConfig& cfg, const Dataset& d) {
    if (d.y.kind == OutcomeKind::categorical) {
        const std::set<std::string> distinct(d.y.labels.begin(), d.y.labels.end());
        const int h = static_cast<int>(distinct.size());
        if (cfg.h && *cfg.h != h)
            throw ConfigError("h=" + std::to_string(*cfg.h) +
                              " conflicts with categorical outcome (" + std::to_string(h) +
                              " labels)");
        return h;
    }
    int h = cfg.h ? *cfg.h : default_h(d.n());
    const int max_h = std::max(1, d.n() / 2);  // keep at least two observations per slice
    if (h > max_h) {
        std::cerr << "warning: h clamped from " << h << " to " << max_h << "\n";
        h = max_h;
    }
    return h;
}

struct VariableRow {
    int index = -1;
    TestOutcome ks, cvm;
    bool has_ks = false, has_cvm = false;
    std::string error;
};

void write_results_csv(const std::vector<VariableRow>& rows, const RunConfig& cfg,
                       const Dataset& d, const json& config_echo, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "# config: " << config_echo.dump() << "\n";
    out << "index,name,kind,statistic,p_value,critical_value,alpha,rejected,L,seed,H,"
           "degenerate_slices,conditioning_size,lasso_lambda,lasso_l1_norm,lasso_active,status\n";
    auto emit = [&](const VariableRow& row, const TestOutcome& o) {
        out << row.index + 1 << ',' << d.column_names[row.index] << ',' << to_string(o.kind) << ','
            << format_double(o.statistic) << ',' << format_double(o.p_value) << ','
            << format_double(o.critical_value) << ',' << format_double(o.alpha) << ','
            << (o.rejected ? 1 : 0) << ',' << o.bootstrap_draws << ',' << o.seed << ','
            << o.h_count << ',';
        for (std::size_t k = 0; k < o.degenerate_slices.size(); ++k)
            out << (k ? ";" : "") << o.degenerate_slices[k] + 1;
        out << ',' << o.conditioning_size << ',' << format_double(o.lasso_lambda) << ','
            << format_double(o.lasso_l1_norm) << ',' << o.lasso_active << ",ok\n";
    };
    for (const auto& row : rows) {
        if (!row.error.empty()) {
            out << row.index + 1 << ',' << d.column_names[row.index]
                << ",,,,,,,,,,,,,,,error: " << row.error << "\n";
            continue;
        }
        if (row.has_ks) emit(row, row.ks);
        if (row.has_cvm) emit(row, row.cvm);
    }
}

}  // namespace

int run_test(const RunConfig& cfg) {
    if (cfg.stat != "ks" && cfg.stat != "cvm" && cfg.stat != "both")
        throw ConfigError("stat must be ks, cvm, or both");
    if (cfg.alpha <= 0.0 || cfg.alpha >= 1.0) throw ConfigError("alpha must be in (0,1)");
    if (cfg.fdr_q && (*cfg.fdr_q <= 0.0 || *cfg.fdr_q >= 1.0))
        throw ConfigError("fdr-q must be in (0,1)");

    Dataset d = load_csv(cfg.input_path, cfg.outcome, cfg.delimiter);
    validate(d);
    d = center_columns(d);
    if (cfg.scale) d = scale_columns(d);
    for (int j : d.constant_columns)
        std::cerr << "warning: column " << d.column_names[j]
                  << " is constant; its test will fail as degenerate\n";

    const int l_draws = cfg.l_draws > 0 ? cfg.l_draws : (cfg.fdr_q ? 10000 : 1000);
    const int h = effective_h(cfg, d);

    std::vector<int> candidates;
    if (cfg.screen_keep) {
        candidates = outcome_screen(d, std::min(*cfg.screen_keep, d.p()), CorrMethod::spearman);
        std::sort(candidates.begin(), candidates.end());
    } else {
        candidates.resize(d.p());
        std::iota(candidates.begin(), candidates.end(), 0);
    }

    std::optional<double> gamma;
    if (cfg.gamma) gamma = resolve_gamma(*cfg.gamma, d.n());

    std::vector<VariableRow> rows(candidates.size());
    parallel_for(static_cast<int>(candidates.size()), cfg.workers, [&](int k) {
        VariableRow& row = rows[k];
        row.index = candidates[k];
        try {
            std::optional<std::vector<int>> screen;
            if (gamma) screen = sis_screen(d, row.index, *gamma, CorrMethod::pearson).kept;
            auto [ks, cvm] = test_variable_both(d, row.index, h, l_draws, cfg.alpha, screen,
                                                cfg.seed);
            row.ks = ks;
            row.cvm = cvm;
            row.has_ks = cfg.stat != "cvm";
            row.has_cvm = cfg.stat != "ks";
        } catch (const std::runtime_error& e) {
            row.error = e.what();
            std::cerr << "warning: variable " << d.column_names[row.index] << ": " << e.what()
                      << "\n";
        }
    });

    if (gamma)
        for (const auto& row : rows)
            if (row.error.empty())
                std::cerr << "variable " << d.column_names[row.index] << ": conditioning set size "
                          << row.cvm.conditioning_size << "\n";

    const json config_echo = config_to_json(cfg);
    write_results_csv(rows, cfg, d, config_echo, cfg.out_prefix + "_results.csv");

    json summary{{"config", config_echo},
                 {"execution",
                  {{"workers", resolve_workers(cfg.workers)},
                   {"out", cfg.out_prefix},
                   {"timestamp", timestamp_now()}}},
                 {"n", d.n()},
                 {"p", d.p()},
                 {"h", h},
                 {"l_draws", l_draws}};
    json outcome_records = json::array();
    for (const auto& row : rows) {
        if (!row.error.empty()) {
            outcome_records.push_back(json{{"index", row.index + 1}, {"error", row.error}});
            continue;
        }
        if (row.has_ks) outcome_records.push_back(outcome_to_json(row.ks));
        if (row.has_cvm) outcome_records.push_back(outcome_to_json(row.cvm));
    }
    summary["results"] = outcome_records;

    if (cfg.fdr_q) {
        for (const std::string kind : {std::string("ks"), std::string("cvm")}) {
            if (cfg.stat != "both" && cfg.stat != kind) continue;
            std::vector<double> pvals;
            std::vector<int> indices;
            for (const auto& row : rows) {
                if (!row.error.empty()) continue;
                pvals.push_back(kind == "ks" ? row.ks.p_value : row.cvm.p_value);
                indices.push_back(row.index);
            }
            if (pvals.empty()) continue;
            const FdrReport fdr = bh_adjust(pvals, *cfg.fdr_q);
            write_fdr_csv(fdr, indices, cfg.out_prefix + "_fdr_" + kind + ".csv");
            json rejected = json::array();
            for (int r : fdr.rejected) rejected.push_back(indices[r] + 1);
            summary["fdr_" + kind] = json{{"q", fdr.q},
                                          {"threshold_rank", fdr.threshold_rank},
                                          {"rejected", rejected}};
        }
    }

    if (cfg.dump_slices) {
        const SlicePlan plan = make_slices(d.y, h);
        write_json_file(plan_to_json(plan), cfg.out_prefix + "_slices.json");
    }
    if (cfg.dump_fits) {
        json fits = json::array();
        std::optional<double> g = gamma;
        for (const auto& row : rows) {
            if (!row.error.empty()) continue;
            std::optional<std::vector<int>> screen;
            if (g) screen = sis_screen(d, row.index, *g, CorrMethod::pearson).kept;
            fits.push_back(fit_to_json(nodewise_fit(d, row.index, screen, 10, cfg.seed)));
        }
        write_json_file(fits, cfg.out_prefix + "_fits.json");
    }

    write_json_file(summary, cfg.out_prefix + "_summary.json");
    return 0;
}

int run_simulate(const RunConfig& cfg) {
    if (cfg.scenario.empty()) throw ConfigError("simulate needs --scenario");

    ScenarioConfig scenario;
    bool builtin = false;
    for (const auto& name : builtin_scenario_names())
        if (name == cfg.scenario) builtin = true;
    if (builtin) {
        scenario = builtin_scenario(cfg.scenario);
    } else {
        std::ifstream in(cfg.scenario);
        if (!in) throw ConfigError("scenario not found (no builtin or file): " + cfg.scenario);
        json j;
        try {
            in >> j;
        } catch (const json::exception& e) {
            throw ConfigError("scenario file does not parse: " + std::string(e.what()));
        }
        scenario = scenario_from_json(j);
    }
    scenario.workers = cfg.workers;

    const PowerReport report = run_scenario(scenario);
    write_power_csv(report, cfg.out_prefix + "_power.csv");
    write_power_table_csv(report, cfg.out_prefix + "_table.csv");

    json meta{{"config", config_to_json(cfg)},
              {"report", power_report_to_json(report)},
              {"execution",
               {{"workers", resolve_workers(cfg.workers)},
                {"timestamp", timestamp_now()},
                {"runtime_seconds", report.runtime_seconds}}}};
    write_json_file(meta, cfg.out_prefix + "_summary.json");
    return 0;
}

int run_screen(const RunConfig& cfg) {
    Dataset d = load_csv(cfg.input_path, cfg.outcome, cfg.delimiter);
    validate(d);
    d = center_columns(d);

    if (!cfg.screen_keep && !cfg.gamma)
        throw ConfigError("screen needs --screen-keep and/or --gamma");

    const json config_echo = config_to_json(cfg);
    std::vector<int> candidates;

    if (cfg.screen_keep) {
        candidates = outcome_screen(d, std::min(*cfg.screen_keep, d.p()), CorrMethod::spearman);
        std::ofstream out(cfg.out_prefix + "_screen.csv");
        if (!out) throw DataError("cannot write file");
        out << "# config: " << config_echo.dump() << "\n";
        out << "rank,index,name\n";
        for (std::size_t k = 0; k < candidates.size(); ++k)
            out << k + 1 << ',' << candidates[k] + 1 << ',' << d.column_names[candidates[k]]
                << "\n";
    } else {
        candidates.resize(d.p());
        std::iota(candidates.begin(), candidates.end(), 0);
    }

    if (cfg.gamma) {
        const double gamma = resolve_gamma(*cfg.gamma, d.n());
        std::ofstream out(cfg.out_prefix + "_sis.csv");
        if (!out) throw DataError("cannot write file");
        out << "# config: " << config_echo.dump() << "\n";
        out << "target_index,target_name,conditioning_size,kept_index,abs_corr\n";
        for (int i : candidates) {
            const ScreenSet s = sis_screen(d, i, gamma, CorrMethod::pearson);
            std::cerr << "variable " << d.column_names[i] << ": conditioning set size "
                      << s.kept.size() << "\n";
            for (std::size_t k = 0; k < s.kept.size(); ++k)
                out << i + 1 << ',' << d.column_names[i] << ',' << s.kept.size() << ','
                    << s.kept[k] + 1 << ',' << format_double(s.correlations[k]) << "\n";
        }
    }

    json summary{{"config", config_echo},
                 {"execution",
                  {{"workers", resolve_workers(cfg.workers)},
                   {"out", cfg.out_prefix},
                   {"timestamp", timestamp_now()}}},
                 {"n", d.n()},
                 {"p", d.p()}};
    if (cfg.screen_keep) {
        json kept = json::array();
        for (int c : candidates) kept.push_back(c + 1);
        summary["kept"] = kept;
    }
    write_json_file(summary, cfg.out_prefix + "_summary.json");
    return 0;
}

int dispatch(const RunConfig& cfg) {
    try {
        if (cfg.command == "test") return run_test(cfg);
        if (cfg.command == "simulate") return run_simulate(cfg);
        if (cfg.command == "screen") return run_screen(cfg);
        throw ConfigError("unknown command: " + cfg.command);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace sda
