#include "toricost/cli.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "toricost/costs.hpp"
#include "toricost/errors.hpp"
#include "toricost/io.hpp"
#include "toricost/systems.hpp"
#include "toricost/toricity.hpp"
#include "toricost/transport.hpp"

namespace toricost
{

namespace
{

struct RunConfig
{
    std::string system;
    std::vector<std::string> params;
    std::string cost = "chordal-sq";
    std::string t;
    std::string grid;
    std::size_t n_samples = 100000;
    std::uint64_t seed = 42;
    IntegratorConfig integrator;
    std::string output;
    std::string sidecar;
    std::string format = "json";
};

struct TransportArgs
{
    std::string source;
    std::string target;
    std::string cost = "chordal-sq";
    double epsilon_rel = 0.01;
    std::string plan;
    std::string report;
};

struct PlotArgs
{
    std::string input;
    std::string output;
};

double parse_number(const std::string& s)
{
    std::size_t used = 0;
    double v = 0.0;
    try
    {
        v = std::stod(s, &used);
    }
    catch (const std::exception&)
    {
        throw ValidationError("not a number: '" + s + "'");
    }
    if (used != s.size() || !std::isfinite(v))
        throw ValidationError("not a finite number: '" + s + "'");
    return v;
}

std::vector<std::string> split(const std::string& s, char delim)
{
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, delim))
        out.push_back(cur);
    if (!s.empty() && s.back() == delim)
        out.emplace_back();
    return out;
}

SystemParams parse_params(const std::vector<std::string>& items)
{
    SystemParams p;
    for (const auto& item : items)
    {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0)
            throw ValidationError("parameter '" + item + "' must look like key=value");
        p[item.substr(0, eq)] = parse_number(item.substr(eq + 1));
    }
    return p;
}

TimeVector parse_time(const std::string& s, std::size_t n)
{
    const auto parts = split(s, ',');
    if (parts.size() != n)
        throw ValidationError("--t needs " + std::to_string(n) + " comma-separated entries");
    TimeVector t(n);
    for (std::size_t k = 0; k < n; ++k)
        t[k] = parse_number(parts[k]);
    return t;
}

// "tmin:tmax:steps" per axis, axes separated by commas; empty = default.
ScanGrid parse_grid(const std::string& s, std::size_t n)
{
    if (s.empty())
        return ScanGrid::default_for(n);
    const auto axes_spec = split(s, ',');
    std::vector<AxisRange> axes;
    for (const auto& spec : axes_spec)
    {
        const auto parts = split(spec, ':');
        if (parts.size() != 3)
            throw ValidationError("grid axis '" + spec + "' must look like tmin:tmax:steps");
        const double steps = parse_number(parts[2]);
        if (steps < 2 || steps != std::floor(steps) || steps > 1e6)
            throw ValidationError("grid axis '" + spec + "' needs an integer step count >= 2");
        axes.push_back({parse_number(parts[0]), parse_number(parts[1]),
                        static_cast<std::size_t>(steps)});
    }
    if (axes.size() == 1 && n > 1)
        axes.assign(n, axes.front());
    if (axes.size() != n)
        throw ValidationError("grid has " + std::to_string(axes.size()) + " axes, system needs "
                              + std::to_string(n));
    return ScanGrid(std::move(axes));
}

std::string sidecar_path(const RunConfig& cfg)
{
    return cfg.sidecar.empty() ? cfg.output + ".json" : cfg.sidecar;
}

void emit(const std::string& path, const std::string& content, std::ostream& out)
{
    if (path.empty())
        out << content;
    else
        write_file_atomic(path, content);
}

void add_system_options(CLI::App* cmd, RunConfig& cfg)
{
    cmd->add_option("--system", cfg.system, "catalog system id")->required();
    cmd->add_option("--param", cfg.params, "system parameter key=value (repeatable)");
    cmd->add_option("--cost", cfg.cost, "chordal or chordal-sq")->capture_default_str();
    cmd->add_option("--samples", cfg.n_samples, "Monte Carlo sample count")->capture_default_str();
    cmd->add_option("--seed", cfg.seed, "random seed")->capture_default_str();
    cmd->add_option("--step", cfg.integrator.step_size, "integrator step size")
        ->capture_default_str();
    cmd->add_option("--newton-tol", cfg.integrator.newton_tol, "implicit solve tolerance")
        ->capture_default_str();
    cmd->add_option("--newton-max-iter", cfg.integrator.newton_max_iter,
                    "implicit solve iteration cap")
        ->capture_default_str();
}

struct Prepared
{
    SystemDef sys;
    CostFunction cost;
};

Prepared prepare(const RunConfig& cfg)
{
    cfg.integrator.validate();
    if (cfg.n_samples < 100)
        throw ValidationError("--samples must be at least 100");
    SystemDef sys = build(cfg.system, parse_params(cfg.params));
    CostFunction cost = make_cost(cfg.cost, sys.chart);
    return {std::move(sys), std::move(cost)};
}

int cmd_systems(const std::string& format, std::ostream& out)
{
    if (format == "json")
    {
        Json list = Json::array();
        for (const auto& e : catalog())
        {
            const SystemDef sys = e.builder(e.defaults);
            Json params = Json::object();
            for (const auto& [k, v] : e.defaults)
                params[k] = v;
            list.push_back(Json{{"id", e.id},
                                {"dimension", sys.chart.dimension()},
                                {"expected_verdict", to_string(e.expected_verdict(e.defaults))},
                                {"parameters", params},
                                {"description", e.description}});
        }
        out << dump_json(list);
        return exit_code::ok;
    }
    out << fmt::format("{:<20} {:>3}  {:<14} {}\n", "id", "dim", "expected", "parameters");
    for (const auto& e : catalog())
    {
        const SystemDef sys = e.builder(e.defaults);
        std::string params;
        for (const auto& [k, v] : e.defaults)
            params += (params.empty() ? "" : " ") + k + "=" + fmt::format("{:g}", v);
        out << fmt::format("{:<20} {:>3}  {:<14} {}\n", e.id, sys.chart.dimension(),
                           to_string(e.expected_verdict(e.defaults)), params);
    }
    return exit_code::ok;
}

int cmd_cost(const RunConfig& cfg, std::ostream& out)
{
    const Prepared p = prepare(cfg);
    const TimeVector t = parse_time(cfg.t, p.sys.components.size());
    const CostEstimate e
        = periodicity_cost(p.sys, t, p.cost, cfg.n_samples, cfg.seed, cfg.integrator);
    std::string content;
    if (cfg.format == "csv")
    {
        for (std::size_t k = 0; k < t.size(); ++k)
            content += fmt::format("t_{},", k + 1);
        content += "value,std_error\n";
        for (const double v : t)
            content += format_double(v) + ",";
        content += format_double(e.value) + "," + format_double(e.std_error) + "\n";
    }
    else
        content = dump_json(to_json(e, cfg.system, cfg.cost));
    emit(cfg.output, content, out);
    return exit_code::ok;
}

int cmd_scan(const RunConfig& cfg, std::ostream& out)
{
    const Prepared p = prepare(cfg);
    const ScanGrid grid = parse_grid(cfg.grid, p.sys.components.size());
    const ScanResult r = scan(p.sys, p.cost, grid, cfg.n_samples, cfg.seed, cfg.integrator);
    const std::string sidecar = dump_json(scan_sidecar(r, cfg.system, cfg.cost, cfg.n_samples, cfg.seed));
    write_file_atomic(cfg.output, scan_csv(r));
    write_file_atomic(sidecar_path(cfg), sidecar);
    out << "verdict " << to_string(r.verdict) << "\n";
    out << "zeros " << r.zeros.size() << "\n";
    return exit_code::ok;
}

int cmd_classify(const RunConfig& cfg, std::ostream& out)
{
    const Prepared p = prepare(cfg);
    const ScanGrid grid = parse_grid(cfg.grid, p.sys.components.size());
    const Classification c = classify(p.sys, p.cost, grid, cfg.n_samples, cfg.seed, cfg.integrator);

    Json j;
    j["system"] = cfg.system;
    j["cost"] = cfg.cost;
    j["n_samples"] = cfg.n_samples;
    j["seed"] = cfg.seed;
    j["verdict"] = to_string(c.verdict);
    j["period"] = c.period ? Json(std::vector<double>(c.period->begin(), c.period->end()))
                           : Json(nullptr);
    j["normalized_verdict"] = to_string(c.scan.verdict);
    j["zero_threshold"] = c.scan.zero_threshold;
    j["positivity_margin"] = c.scan.positivity_margin;
    j["report"] = c.report;
    if (!cfg.output.empty())
        write_file_atomic(cfg.output, dump_json(j));

    out << "verdict " << to_string(c.verdict) << "\n";
    if (c.period)
    {
        out << "period";
        for (const double v : *c.period)
            out << " " << format_double(v);
        out << "\n";
    }
    return c.verdict == Verdict::Inconclusive ? exit_code::inconclusive : exit_code::ok;
}

int cmd_transport(const TransportArgs& args, std::ostream& out)
{
    const DiscreteMeasure source = measure_from_json(Json::parse(read_file(args.source)));
    const DiscreteMeasure target = measure_from_json(Json::parse(read_file(args.target)));
    if (!(args.epsilon_rel > 0.0))
        throw ValidationError("--epsilon must be positive");
    const Matrix costs = cost_matrix(source, target, ambient_cost(args.cost));
    const double scale = cost_scale(costs);
    // All-zero costs: any positive epsilon gives the same (optimal) plan.
    const double epsilon = args.epsilon_rel * (scale > 0.0 ? scale : 1.0);
    const BoundReport r = verify_monge_kantorovich_bound(source, target, costs, epsilon);

    Json j;
    j["monge_cost"] = r.monge_cost;
    j["kantorovich_cost"] = r.kantorovich_cost;
    j["graph_plan_cost"] = r.graph_plan_cost;
    j["sinkhorn_cost"] = r.sinkhorn_cost;
    j["epsilon"] = epsilon;
    j["cost_scale"] = scale;
    j["holds"] = r.holds;
    j["assignment"] = r.monge_map.assignment;
    const std::string report = dump_json(j);

    if (!args.plan.empty())
        write_file_atomic(args.plan, matrix_csv(r.kantorovich_plan.matrix));
    emit(args.report, report, out);
    return exit_code::ok;
}

int cmd_plot(const PlotArgs& args)
{
    const ScanTable table = parse_scan_csv(read_file(args.input));
    write_file_atomic(args.output, render_svg(table));
    return exit_code::ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Periodicity costs of integrable Hamiltonian systems", "toricost"};
    app.require_subcommand(1);

    std::string systems_format = "text";
    auto* systems = app.add_subcommand("systems", "list the system catalog");
    systems->add_option("--format", systems_format, "text or json")
        ->check(CLI::IsMember({"text", "json"}));

    RunConfig cost_cfg;
    auto* cost = app.add_subcommand("cost", "estimate the periodicity cost C_t");
    add_system_options(cost, cost_cfg);
    cost->add_option("--t", cost_cfg.t, "time vector, comma separated (radians)")->required();
    cost->add_option("--output", cost_cfg.output, "output file (default stdout)");
    cost->add_option("--format", cost_cfg.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));

    RunConfig scan_cfg;
    auto* scan_cmd = app.add_subcommand("scan", "evaluate C_t over a time grid");
    add_system_options(scan_cmd, scan_cfg);
    scan_cmd->add_option("--grid", scan_cfg.grid, "tmin:tmax:steps per axis, comma separated");
    scan_cmd->add_option("--output", scan_cfg.output, "scan CSV path")->required();
    scan_cmd->add_option("--sidecar", scan_cfg.sidecar, "JSON sidecar path (default <output>.json)");

    RunConfig classify_cfg;
    auto* classify_cmd = app.add_subcommand("classify", "toric / non-toric verdict");
    add_system_options(classify_cmd, classify_cfg);
    classify_cmd->add_option("--grid", classify_cfg.grid,
                             "tmin:tmax:steps per axis, comma separated");
    classify_cmd->add_option("--output", classify_cfg.output, "JSON report path");

    TransportArgs transport_args;
    auto* transport = app.add_subcommand("transport", "Monge vs Kantorovich on two measures");
    transport->add_option("--source", transport_args.source, "source measure JSON")->required();
    transport->add_option("--target", transport_args.target, "target measure JSON")->required();
    transport->add_option("--cost", transport_args.cost, "chordal or chordal-sq")
        ->capture_default_str();
    transport->add_option("--epsilon", transport_args.epsilon_rel,
                          "entropic regularization relative to the mean cost")
        ->capture_default_str();
    transport->add_option("--plan", transport_args.plan, "optimal plan CSV path");
    transport->add_option("--report", transport_args.report, "bound report path (default stdout)");

    PlotArgs plot_args;
    auto* plot = app.add_subcommand("plot", "render a scan CSV to SVG");
    plot->add_option("--input", plot_args.input, "scan CSV")->required();
    plot->add_option("--output", plot_args.output, "SVG path")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try
    {
        app.parse(reversed);
    }
    catch (const CLI::CallForHelp&)
    {
        out << app.help();
        return exit_code::ok;
    }
    catch (const CLI::ParseError& e)
    {
        err << "toricost: " << e.what() << "\n";
        return exit_code::validation;
    }

    try
    {
        if (systems->parsed())
            return cmd_systems(systems_format, out);
        if (cost->parsed())
            return cmd_cost(cost_cfg, out);
        if (scan_cmd->parsed())
            return cmd_scan(scan_cfg, out);
        if (classify_cmd->parsed())
            return cmd_classify(classify_cfg, out);
        if (transport->parsed())
            return cmd_transport(transport_args, out);
        if (plot->parsed())
            return cmd_plot(plot_args);
    }
    catch (const ValidationError& e)
    {
        err << "toricost: " << e.what() << "\n";
        return exit_code::validation;
    }
    catch (const nlohmann::json::exception& e)
    {
        err << "toricost: invalid JSON: " << e.what() << "\n";
        return exit_code::validation;
    }
    catch (const NumericError& e)
    {
        err << "toricost: numeric failure: " << e.what() << "\n";
        return exit_code::numeric;
    }
    catch (const std::exception& e)
    {
        err << "toricost: " << e.what() << "\n";
        return exit_code::internal;
    }
    return exit_code::internal;
}

}  // namespace toricost
