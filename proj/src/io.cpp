#include "sda/io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>

namespace sda {

using nlohmann::json;

std::string format_double(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json fit_to_json(const LassoFit& fit) {
    json active = json::array(), coefs = json::array();
    for (int pos : fit.active_set) {
        const int global = fit.conditioning.empty() ? pos : fit.conditioning[pos];
        active.push_back(global + 1);
        coefs.push_back(fit.coefficients(pos));
    }
    return json{{"target_index", fit.target_index + 1},
                {"lambda", fit.lambda},
                {"active_set", active},
                {"coefficients", coefs},
                {"l1_norm", fit.l1_norm},
                {"exact_fit", fit.exact_fit},
                {"conditioning_size", fit.conditioning.size()}};
}

json plan_to_json(const SlicePlan& plan) {
    json j{{"h", plan.h_count}, {"counts", plan.counts}, {"tie_warning", plan.tie_warning}};
    switch (plan.kind) {
        case OutcomeKind::continuous:
            j["kind"] = "continuous";
            j["cut_points"] = plan.cut_points;
            break;
        case OutcomeKind::categorical:
            j["kind"] = "categorical";
            j["labels"] = plan.slice_labels;
            break;
        case OutcomeKind::survival:
            j["kind"] = "survival";
            j["censored_slices"] = plan.censored_slices;
            j["censored_cuts"] = plan.censored_cuts;
            j["event_cuts"] = plan.event_cuts;
            break;
    }
    return j;
}

json outcome_to_json(const TestOutcome& out) {
    json degenerate = json::array();
    for (int h : out.degenerate_slices) degenerate.push_back(h + 1);
    return json{{"index", out.target_index + 1},
                {"kind", to_string(out.kind)},
                {"statistic", out.statistic},
                {"p_value", out.p_value},
                {"critical_value", out.critical_value},
                {"alpha", out.alpha},
                {"rejected", out.rejected},
                {"L", out.bootstrap_draws},
                {"seed", out.seed},
                {"H", out.h_count},
                {"degenerate_slices", degenerate},
                {"conditioning_size", out.conditioning_size},
                {"lasso_lambda", out.lasso_lambda},
                {"lasso_l1_norm", out.lasso_l1_norm},
                {"lasso_active", out.lasso_active},
                {"exact_fit", out.exact_fit}};
}

json screen_to_json(const ScreenSet& s) {
    json kept = json::array();
    for (int j : s.kept) kept.push_back(j + 1);
    return json{{"target_index", s.target_index + 1},
                {"gamma", s.gamma},
                {"kept", kept},
                {"correlations", s.correlations}};
}

namespace {

std::string setting_name(CoefSetting s) {
    switch (s) {
        case CoefSetting::s1: return "S1";
        case CoefSetting::s2: return "S2";
        case CoefSetting::none: return "null";
    }
    return "?";
}

std::string regression_name(RegressionModel m) {
    switch (m) {
        case RegressionModel::r1: return "R1";
        case RegressionModel::r2: return "R2";
        case RegressionModel::r3: return "R3";
        case RegressionModel::r4: return "R4";
    }
    return "?";
}

}  // namespace

json scenario_to_json(const ScenarioConfig& cfg) {
    json precision{{"p", cfg.precision.p}, {"pd_floor", cfg.precision.pd_floor}};
    if (cfg.precision.kind == PrecisionSpec::Kind::block_diagonal) {
        precision["kind"] = "block";
        precision["q"] = cfg.precision.block_size;
    } else {
        precision["kind"] = "smallworld";
        precision["e"] = cfg.precision.neighbors;
        precision["rewire_prob"] = cfg.precision.rewire_prob;
    }
    json j{{"name", cfg.name},
           {"n", cfg.n},
           {"p", cfg.p},
           {"precision", precision},
           {"setting", setting_name(cfg.setting)},
           {"q", cfg.q},
           {"regression", regression_name(cfg.regression)},
           {"replicates", cfg.replicates},
           {"alpha", cfg.alpha},
           {"seed", cfg.seed},
           {"l_draws", cfg.l_draws},
           {"max_test_covariates", cfg.max_test_covariates}};
    if (cfg.h_override) j["h"] = *cfg.h_override;
    if (!cfg.test_indices.empty()) {
        json idx = json::array();
        for (int i : cfg.test_indices) idx.push_back(i + 1);
        j["test_indices"] = idx;
    }
    return j;
}

ScenarioConfig scenario_from_json(const json& j) {
    ScenarioConfig cfg;
    cfg.name = j.value("name", "custom");
    cfg.n = j.at("n").get<int>();
    cfg.p = j.at("p").get<int>();

    const json& prec = j.at("precision");
    const std::string kind = prec.at("kind").get<std::string>();
    cfg.precision.p = cfg.p;
    if (kind == "block") {
        cfg.precision.kind = PrecisionSpec::Kind::block_diagonal;
        cfg.precision.block_size = prec.at("q").get<int>();
    } else if (kind == "smallworld") {
        cfg.precision.kind = PrecisionSpec::Kind::small_world;
        cfg.precision.neighbors = prec.at("e").get<int>();
        cfg.precision.rewire_prob = prec.value("rewire_prob", 0.25);
    } else {
        throw ConfigError("unknown precision kind: " + kind);
    }
    cfg.precision.pd_floor = prec.value("pd_floor", 0.1);

    const std::string setting = j.value("setting", "null");
    if (setting == "S1") cfg.setting = CoefSetting::s1;
    else if (setting == "S2") cfg.setting = CoefSetting::s2;
    else if (setting == "null") cfg.setting = CoefSetting::none;
    else throw ConfigError("unknown coefficient setting: " + setting);
    cfg.q = j.value("q", 5);

    const std::string regression = j.value("regression", "R1");
    if (regression == "R1") cfg.regression = RegressionModel::r1;
    else if (regression == "R2") cfg.regression = RegressionModel::r2;
    else if (regression == "R3") cfg.regression = RegressionModel::r3;
    else if (regression == "R4") cfg.regression = RegressionModel::r4;
    else throw ConfigError("unknown regression model: " + regression);

    cfg.replicates = j.value("replicates", 200);
    cfg.alpha = j.value("alpha", 0.05);
    cfg.seed = j.value("seed", 1ull);
    cfg.l_draws = j.value("l_draws", 1000);
    cfg.max_test_covariates = j.value("max_test_covariates", 100);
    if (j.contains("h")) cfg.h_override = j.at("h").get<int>();
    if (j.contains("test_indices"))
        for (int i : j.at("test_indices")) cfg.test_indices.push_back(i - 1);
    return cfg;
}

json power_report_to_json(const PowerReport& report) {
    json groups = json::array();
    for (const auto& g : report.groups)
        groups.push_back(json{{"beta", g.beta},
                              {"members", g.member_count},
                              {"ks_rate", g.ks_rate},
                              {"cvm_rate", g.cvm_rate},
                              {"ks_se", g.ks_se},
                              {"cvm_se", g.cvm_se}});
    json j{{"scenario", scenario_to_json(report.config)},
           {"tested_covariates", report.tested_covariates},
           {"groups", groups},
           {"ks_variable_rates", report.ks_variable_rates},
           {"cvm_variable_rates", report.cvm_variable_rates}};
    json tested = json::array();
    if (report.config.test_indices.empty())
        for (int i = 0; i < report.tested_covariates; ++i) tested.push_back(i + 1);
    else
        for (int i : report.config.test_indices) tested.push_back(i + 1);
    j["tested_indices"] = tested;
    if (!report.delta_repairs.empty()) j["delta_repairs"] = report.delta_repairs;
    return j;
}

void write_fdr_csv(const FdrReport& report, const std::vector<int>& variable_indices,
                   const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "index,p_value,adjusted_p,rejected\n";
    std::vector<char> rejected(report.p_values.size(), 0);
    for (int r : report.rejected) rejected[r] = 1;
    for (std::size_t k = 0; k < report.p_values.size(); ++k) {
        const int index = k < variable_indices.size() ? variable_indices[k] + 1
                                                      : static_cast<int>(k) + 1;
        out << index << ',' << format_double(report.p_values[k]) << ','
            << format_double(report.adjusted[k]) << ',' << (rejected[k] ? 1 : 0) << "\n";
    }
}

void write_power_csv(const PowerReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    out << "# scenario: " << scenario_to_json(report.config).dump() << "\n";
    out << "setting,n,p,regression,group_beta,members,ks_rate,cvm_rate,ks_se,cvm_se\n";
    const auto& cfg = report.config;
    for (const auto& g : report.groups) {
        out << setting_name(cfg.setting) << ',' << cfg.n << ',' << cfg.p << ','
            << regression_name(cfg.regression) << ',' << format_double(g.beta) << ','
            << g.member_count << ',' << format_double(g.ks_rate) << ','
            << format_double(g.cvm_rate) << ',' << format_double(g.ks_se) << ','
            << format_double(g.cvm_se) << "\n";
    }
}

void write_power_table_csv(const PowerReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write file: " + path);
    const auto& cfg = report.config;
    out << "# scenario: " << scenario_to_json(report.config).dump() << "\n";
    out << "setting,n,p,regression,stat";
    const double order[6] = {0.2, -0.4, 0.6, -0.8, 1.0, 0.0};
    for (double beta : order) out << ",beta_" << format_double(beta);
    out << "\n";
    for (const std::string stat : {"ks", "cvm"}) {
        out << setting_name(cfg.setting) << ',' << cfg.n << ',' << cfg.p << ','
            << regression_name(cfg.regression) << ',' << stat;
        for (double beta : order) {
            bool found = false;
            for (const auto& g : report.groups) {
                if (g.beta == beta) {
                    out << ',' << format_double(stat == "ks" ? g.ks_rate : g.cvm_rate);
                    found = true;
                    break;
                }
            }
            if (!found) out << ",";
        }
        out << "\n";
    }
}

}  // namespace sda
