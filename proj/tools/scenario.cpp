#include "scenario.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mep/hedging.hpp"
#include "mep/implied_vol.hpp"

namespace mep::cli {

namespace {

using nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// field access with path-carrying errors
// ---------------------------------------------------------------------------

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

const ordered_json& require(const ordered_json& obj, const std::string& key,
                            const std::string& path) {
    if (!obj.is_object() || !obj.contains(key))
        throw ScenarioError(join(path, key), "missing required field");
    return obj.at(key);
}

double require_number(const ordered_json& obj, const std::string& key, const std::string& path) {
    const ordered_json& v = require(obj, key, path);
    if (!v.is_number()) throw ScenarioError(join(path, key), "expected a number");
    return v.get<double>();
}

int require_int(const ordered_json& obj, const std::string& key, const std::string& path) {
    const ordered_json& v = require(obj, key, path);
    if (!v.is_number_integer()) throw ScenarioError(join(path, key), "expected an integer");
    return v.get<int>();
}

std::string require_string(const ordered_json& obj, const std::string& key,
                           const std::string& path) {
    const ordered_json& v = require(obj, key, path);
    if (!v.is_string()) throw ScenarioError(join(path, key), "expected a string");
    return v.get<std::string>();
}

int optional_int(const ordered_json& obj, const std::string& key, const std::string& path,
                 int fallback) {
    if (!obj.contains(key)) return fallback;
    return require_int(obj, key, path);
}

// ---------------------------------------------------------------------------
// block parsers
// ---------------------------------------------------------------------------

MarketTerms parse_terms(const ordered_json& doc) {
    const ordered_json& block = require(doc, "terms", "");
    try {
        return MarketTerms(require_number(block, "x0", "terms"),
                           require_number(block, "r", "terms"),
                           require_number(block, "t", "terms"));
    } catch (const ScenarioError&) {
        throw;
    } catch (const InvalidParameterError& e) {
        throw ScenarioError("terms", e.what());
    }
}

PayoffKind parse_kind(const std::string& name, const std::string& path) {
    if (name == "call") return PayoffKind::EuropeanCall;
    if (name == "put") return PayoffKind::EuropeanPut;
    if (name == "binary_call") return PayoffKind::BinaryCall;
    if (name == "binary_put") return PayoffKind::BinaryPut;
    throw ScenarioError(path, "unknown payoff kind '" + name +
                                  "' (expected call|put|binary_call|binary_put)");
}

PayoffSpec parse_payoff(const ordered_json& doc) {
    const ordered_json& block = require(doc, "payoff", "");
    const PayoffKind kind = parse_kind(require_string(block, "kind", "payoff"), "payoff.kind");
    try {
        return PayoffSpec(kind, require_number(block, "strike", "payoff"));
    } catch (const ScenarioError&) {
        throw;
    } catch (const InvalidParameterError& e) {
        throw ScenarioError("payoff.strike", e.what());
    }
}

VolBelief parse_belief(const ordered_json& doc) {
    const ordered_json& block = require(doc, "belief", "");
    try {
        return VolBelief(require_number(block, "mu_ln", "belief"),
                         require_number(block, "s_ln", "belief"),
                         optional_int(block, "n_nodes", "belief", 32));
    } catch (const ScenarioError&) {
        throw;
    } catch (const InvalidParameterError& e) {
        throw ScenarioError("belief", e.what());
    }
}

MomentSpec parse_moments(const ordered_json& doc) {
    const ordered_json& block = require(doc, "moments", "");
    try {
        return MomentSpec(require_number(block, "m1", "moments"),
                          require_number(block, "variance", "moments"),
                          require_number(block, "third", "moments"),
                          require_number(block, "fourth", "moments"));
    } catch (const ScenarioError&) {
        throw;
    } catch (const InvalidParameterError& e) {
        throw ScenarioError("moments", e.what());
    }
}

/// model.type selects the subjective density; "bs" (certain vol) is handled
/// separately by the commands that accept it.
Density parse_density(const ordered_json& doc, const MarketTerms& terms) {
    const ordered_json& block = require(doc, "model", "");
    const std::string type = require_string(block, "type", "model");
    if (type == "expected_return")
        return from_expected_return(terms, require_number(block, "sigma", "model"));
    if (type == "lognormal")
        return LogNormalDist(require_number(block, "nu", "model"),
                             require_number(block, "sigma_hat", "model"));
    if (type == "maxent") return maxent_fit(parse_moments(doc), terms.x0);
    throw ScenarioError("model.type", "unknown density type '" + type +
                                          "' (expected expected_return|lognormal|maxent)");
}

Eigen::ArrayXd parse_strikes(const ordered_json& doc) {
    const ordered_json& block = require(doc, "strikes", "");
    if (block.contains("values")) {
        const ordered_json& values = block.at("values");
        if (!values.is_array()) throw ScenarioError("strikes.values", "expected an array");
        Eigen::ArrayXd strikes(values.size());
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!values[i].is_number())
                throw ScenarioError("strikes.values", "expected numbers");
            strikes[static_cast<Eigen::Index>(i)] = values[i].get<double>();
            if (!(strikes[static_cast<Eigen::Index>(i)] > 0.0))
                throw ScenarioError("strikes.values", "strikes must be > 0");
            if (i > 0 && strikes[static_cast<Eigen::Index>(i)] <=
                             strikes[static_cast<Eigen::Index>(i - 1)])
                throw ScenarioError("strikes.values", "strikes must be strictly increasing");
        }
        return strikes;
    }
    const double lo = require_number(block, "lo", "strikes");
    const double hi = require_number(block, "hi", "strikes");
    const int count = require_int(block, "count", "strikes");
    if (count < 1) throw ScenarioError("strikes.count", "must be >= 1");
    if (!(lo > 0.0) || !(hi >= lo)) throw ScenarioError("strikes", "need 0 < lo <= hi");
    if (count == 1) return Eigen::ArrayXd::Constant(1, lo);
    return Eigen::ArrayXd::LinSpaced(count, lo, hi);
}

LossBenchmark parse_benchmark(const ordered_json& doc) {
    if (!doc.contains("loss_benchmark")) return LossBenchmark::FinancedCost;
    const std::string name = require_string(doc, "loss_benchmark", "");
    if (name == "financed") return LossBenchmark::FinancedCost;
    if (name == "raw") return LossBenchmark::RawCost;
    throw ScenarioError("loss_benchmark", "expected financed|raw");
}

// ---------------------------------------------------------------------------
// rendering
// ---------------------------------------------------------------------------

std::string fmt(double v) {
    char buffer[40];
    std::snprintf(buffer, sizeof(buffer), "%.12g", v);
    return buffer;
}

std::string csv_comment(const Scenario& scenario) {
    return "# mep " + std::string(kToolVersion) + " scenario=" + scenario.hash +
           " command=" + scenario.command + "\n";
}

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

std::string render_csv(const Scenario& scenario, const Table& table) {
    std::string out = csv_comment(scenario);
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
        if (c) out += ',';
        out += table.columns[c];
    }
    out += '\n';
    for (const auto& row : table.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += fmt(row[c]);
        }
        out += '\n';
    }
    return out;
}

std::string render_table_tree(const Scenario& scenario, const Table& table) {
    ordered_json doc;
    doc["tool"] = std::string("mep ") + kToolVersion;
    doc["scenario"] = scenario.hash;
    doc["command"] = scenario.command;
    doc["columns"] = table.columns;
    ordered_json rows = ordered_json::array();
    for (const auto& row : table.rows) rows.push_back(row);
    doc["rows"] = rows;
    return doc.dump(2) + "\n";
}

std::string render_tree(const Scenario& scenario, const ordered_json& result) {
    ordered_json doc;
    doc["tool"] = std::string("mep ") + kToolVersion;
    doc["scenario"] = scenario.hash;
    doc["command"] = scenario.command;
    doc["result"] = result;
    return doc.dump(2) + "\n";
}

std::string render_tree_as_csv(const Scenario& scenario, const ordered_json& result) {
    std::string out = csv_comment(scenario) + "key,value\n";
    for (const auto& [key, value] : result.items()) {
        if (value.is_array()) {
            for (std::size_t i = 0; i < value.size(); ++i)
                out += key + "[" + std::to_string(i) + "]," + fmt(value[i].get<double>()) + "\n";
        } else if (value.is_number()) {
            out += key + "," + fmt(value.get<double>()) + "\n";
        } else {
            out += key + "," + value.dump() + "\n";
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

ordered_json run_price(const Scenario& scenario) {
    const MarketTerms terms = parse_terms(scenario.doc);
    const PayoffSpec payoff = parse_payoff(scenario.doc);
    const ordered_json& model = require(scenario.doc, "model", "");
    const std::string type = require_string(model, "type", "model");

    ordered_json result;
    if (type == "bs") {
        result["value"] = bs_price(terms, require_number(model, "sigma", "model"), payoff);
    } else if (type == "belief") {
        result["value"] = marginal_price(terms, payoff, parse_belief(scenario.doc));
    } else {
        result["value"] = expected_payoff_price(parse_density(scenario.doc, terms), payoff, terms);
    }
    result["forward"] = terms.forward();
    result["discount"] = terms.discount();
    return result;
}

ordered_json run_greeks(const Scenario& scenario) {
    const MarketTerms terms = parse_terms(scenario.doc);
    const PayoffSpec payoff = parse_payoff(scenario.doc);
    const ordered_json& model = require(scenario.doc, "model", "");
    const std::string type = require_string(model, "type", "model");

    HedgeReport report{0.0, 0.0, 0.0, std::nullopt};
    if (type == "bs")
        report = hedge_report(terms, require_number(model, "sigma", "model"), payoff);
    else if (type == "belief")
        report = hedge_report(terms, payoff, parse_belief(scenario.doc));
    else
        throw ScenarioError("model.type", "greeks expects bs|belief");

    ordered_json result;
    result["value"] = report.value;
    result["dvds"] = report.dvds;
    result["hedge_units"] = report.hedge_units;
    if (report.belief_sensitivities) {
        result["d_mu_ln"] = report.belief_sensitivities->first;
        result["d_s_ln"] = report.belief_sensitivities->second;
    }
    return result;
}

Table run_curve(const Scenario& scenario) {
    const MarketTerms terms = parse_terms(scenario.doc);
    const VolBelief belief = parse_belief(scenario.doc);
    const PayoffKind kind = parse_kind(
        require_string(require(scenario.doc, "payoff", ""), "kind", "payoff"), "payoff.kind");
    const Eigen::ArrayXd strikes = parse_strikes(scenario.doc);

    Table table;
    table.columns = {"strike", "certain_price", "marginal_price"};
    for (const PriceCurvePoint& row : price_curve(terms, belief, strikes, kind))
        table.rows.push_back({row.strike, row.certain_price, row.marginal_price});
    return table;
}

Table run_skew(const Scenario& scenario) {
    const MarketTerms terms = parse_terms(scenario.doc);
    const VolBelief belief = parse_belief(scenario.doc);
    const PayoffKind kind = parse_kind(
        require_string(require(scenario.doc, "payoff", ""), "kind", "payoff"), "payoff.kind");
    const Eigen::ArrayXd strikes = parse_strikes(scenario.doc);

    const double forward = terms.forward();
    Table table;
    table.columns = {"strike", "moneyness", "implied_vol", "price"};
    for (const SkewPoint& point : skew_curve(terms, belief, strikes, kind))
        table.rows.push_back(
            {point.strike, point.strike / forward, point.implied_sigma, point.price});
    return table;
}

ordered_json run_maxent_fit(const Scenario& scenario) {
    const MarketTerms terms = parse_terms(scenario.doc);
    const MaxEntDist dist = maxent_fit(parse_moments(scenario.doc), terms.x0);
    const MomentSpec fitted = maxent_moments(dist);

    ordered_json result;
    result["lambda"] = {dist.lambda[0], dist.lambda[1], dist.lambda[2], dist.lambda[3]};
    result["log_norm"] = dist.log_norm;
    result["y_lo"] = dist.y_lo;
    result["y_hi"] = dist.y_hi;
    result["x0"] = dist.x0;
    result["fitted_m1"] = fitted.m1_target;
    result["fitted_variance"] = fitted.variance;
    result["fitted_third"] = fitted.third;
    result["fitted_fourth"] = fitted.fourth;
    return result;
}

ordered_json run_optimize(const Scenario& scenario) {
    const MarketTerms terms = parse_terms(scenario.doc);
    const Density subjective = parse_density(scenario.doc, terms);

    const ordered_json& list = require(scenario.doc, "instruments", "");
    if (!list.is_array() || list.empty())
        throw ScenarioError("instruments", "expected a non-empty array");
    std::vector<Instrument> instruments;
    for (std::size_t i = 0; i < list.size(); ++i) {
        const std::string path = "instruments[" + std::to_string(i) + "]";
        const PayoffKind kind = parse_kind(require_string(list[i], "kind", path), path + ".kind");
        try {
            const PayoffSpec payoff(kind, require_number(list[i], "strike", path));
            instruments.emplace_back(payoff, require_number(list[i], "market_value", path),
                                     expected_payoff_price(subjective, payoff, terms));
        } catch (const ScenarioError&) {
            throw;
        } catch (const InvalidParameterError& e) {
            throw ScenarioError(path, e.what());
        }
    }

    const ordered_json& limits_block = require(scenario.doc, "limits", "");
    const RiskLimits limits(require_number(limits_block, "y", "limits"),
                            require_number(limits_block, "z", "limits"));

    const ordered_json& bounds_block = require(scenario.doc, "bounds", "");
    if (!bounds_block.is_array() || bounds_block.size() != instruments.size())
        throw ScenarioError("bounds", "expected one [lo, hi] pair per instrument");
    std::vector<std::pair<double, double>> bounds;
    for (std::size_t i = 0; i < bounds_block.size(); ++i) {
        const auto& pair = bounds_block[i];
        if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
            throw ScenarioError("bounds[" + std::to_string(i) + "]", "expected [lo, hi]");
        bounds.emplace_back(pair[0].get<double>(), pair[1].get<double>());
    }

    OptimizeOptions options;
    options.refine_rounds = optional_int(scenario.doc, "refine_rounds", "", 0);
    options.benchmark = parse_benchmark(scenario.doc);

    const Allocation allocation = optimize(instruments, subjective, terms, limits, bounds,
                                           require_int(scenario.doc, "resolution", ""), options);

    ordered_json result;
    ordered_json n = ordered_json::array();
    ordered_json subjective_values = ordered_json::array();
    for (Eigen::Index i = 0; i < allocation.n.size(); ++i) n.push_back(allocation.n[i]);
    for (const Instrument& inst : instruments) subjective_values.push_back(inst.subjective_value);
    result["n"] = n;
    result["objective"] = allocation.objective;
    result["loss_probability"] = allocation.loss_prob;
    result["expected_shortfall"] = allocation.exp_shortfall;
    result["subjective_values"] = subjective_values;
    return result;
}

}  // namespace

std::string fnv1a_hex(const std::string& bytes) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return buffer;
}

OutputFormat default_format(const std::string& command) {
    return command == "curve" || command == "skew" ? OutputFormat::Csv : OutputFormat::Tree;
}

Scenario parse_scenario(const std::string& text) {
    Scenario scenario;
    scenario.doc = ordered_json::parse(text);  // parse_error carries the position
    scenario.hash = fnv1a_hex(text);
    if (!scenario.doc.is_object()) throw ScenarioError("", "scenario must be a JSON object");
    scenario.command = require_string(scenario.doc, "command", "");
    static const char* kCommands[] = {"price", "curve", "skew", "maxent-fit", "greeks",
                                      "optimize"};
    bool known = false;
    for (const char* c : kCommands) known = known || scenario.command == c;
    if (!known)
        throw ScenarioError("command", "unknown command '" + scenario.command +
                                           "' (expected price|curve|skew|maxent-fit|greeks|"
                                           "optimize)");

    if (scenario.doc.contains("output")) {
        const ordered_json& output = scenario.doc.at("output");
        if (output.contains("path")) scenario.output_path = require_string(output, "path", "output");
        if (output.contains("format")) {
            const std::string format = require_string(output, "format", "output");
            if (format == "csv")
                scenario.output_format = OutputFormat::Csv;
            else if (format == "tree")
                scenario.output_format = OutputFormat::Tree;
            else
                throw ScenarioError("output.format", "expected csv|tree");
        }
    }
    return scenario;
}

Scenario load_scenario(const std::string& path) {
    std::ifstream file(path, std::ios::binary);
    if (!file) throw ScenarioError("scenario", "cannot open '" + path + "'");
    std::ostringstream buffer;
    buffer << file.rdbuf();
    return parse_scenario(buffer.str());
}

std::string render_output(const Scenario& scenario, OutputFormat format) {
    if (scenario.command == "curve" || scenario.command == "skew") {
        const Table table = scenario.command == "curve" ? run_curve(scenario) : run_skew(scenario);
        return format == OutputFormat::Csv ? render_csv(scenario, table)
                                           : render_table_tree(scenario, table);
    }
    ordered_json result;
    if (scenario.command == "price")
        result = run_price(scenario);
    else if (scenario.command == "greeks")
        result = run_greeks(scenario);
    else if (scenario.command == "maxent-fit")
        result = run_maxent_fit(scenario);
    else
        result = run_optimize(scenario);
    return format == OutputFormat::Csv ? render_tree_as_csv(scenario, result)
                                       : render_tree(scenario, result);
}

namespace {

void write_error_record(const std::string& type, const std::string& message,
                        const std::string& field = "") {
    ordered_json record;
    record["error"]["type"] = type;
    record["error"]["message"] = message;
    if (!field.empty()) record["error"]["field"] = field;
    std::cerr << record.dump() << "\n";
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
    CLI::App app{"mep: derivatives pricing under explicit subjective densities"};
    std::string scenario_path;
    std::string out_path;
    std::string format_name;
    bool quiet = false;
    app.add_option("--scenario", scenario_path, "scenario document (JSON)")->required();
    app.add_option("--out", out_path, "output path (default: scenario's, else stdout)");
    app.add_option("--format", format_name, "output format")
        ->check(CLI::IsMember({"csv", "tree"}));
    app.add_flag("--quiet", quiet, "suppress the summary line");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        write_error_record("parse", e.what());
        return 2;
    }

    try {
        const Scenario scenario = load_scenario(scenario_path);

        OutputFormat format = default_format(scenario.command);
        if (scenario.output_format) format = *scenario.output_format;
        if (!format_name.empty())
            format = format_name == "csv" ? OutputFormat::Csv : OutputFormat::Tree;

        std::string path = out_path;
        if (path.empty() && scenario.output_path) path = *scenario.output_path;

        const std::string document = render_output(scenario, format);
        if (path.empty() || path == "-") {
            std::cout << document;
        } else {
            std::ofstream file(path, std::ios::binary);
            if (!file) throw ScenarioError("out", "cannot write '" + path + "'");
            file << document;
            if (!quiet)
                std::cout << "wrote " << path << " (" << scenario.command << ", "
                          << (format == OutputFormat::Csv ? "csv" : "tree") << ")\n";
        }
        return 0;
    } catch (const nlohmann::json::parse_error& e) {
        write_error_record("parse", e.what());
        return 2;
    } catch (const ScenarioError& e) {
        write_error_record("validation", e.what(), e.field);
        return 2;
    } catch (const InfeasibleError& e) {
        write_error_record("infeasible", e.what());
        return 4;
    } catch (const NumericalError& e) {
        write_error_record("numerical", e.what());
        return 3;
    } catch (const InvalidParameterError& e) {
        write_error_record("validation", e.what());
        return 2;
    } catch (const std::exception& e) {
        write_error_record("internal", e.what());
        return 3;
    }
}

}  // namespace mep::cli
