#include "fter/harness.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace fter {

namespace fs = std::filesystem;
using nlohmann::json;

SignalModel RunSpec::signal_model() const {
    SignalModel model = signal ? *signal : scenario_signal(scenario);
    model.noise = model.noise.with_seed(seed);
    return model;
}

void RunSpec::validate() const {
    cfg.validate();
    if (!signal && (scenario < 1 || scenario > 3))
        throw ContractError("unknown scenario id " + std::to_string(scenario));
    if (methods.empty()) throw ContractError("at least one method is required");
    if (!(t_end >= 0) || !std::isfinite(t_end)) throw ContractError("t_end must be >= 0");
    if (!(window_max() >= t_min)) throw ContractError("window upper bound must be >= lower bound");
    if (oracle_step && !(*oracle_step > 0)) throw ContractError("oracle step must be positive");
}

RunSpec preset_run_spec(int scenario) {
    RunSpec spec;
    spec.scenario = scenario;
    switch (scenario) {
        case 1:
            spec.cfg = preset_config(25.0, 0.1);
            spec.t_end = 25;
            break;
        case 2:
            spec.cfg = preset_config(98.0, 0.1);
            spec.t_end = 25;
            break;
        case 3:
            spec.cfg = preset_config(98.0, 0.1);
            spec.t_end = 100;
            break;
        default:
            throw ContractError("unknown scenario id " + std::to_string(scenario));
    }
    spec.t_min = 10;
    return spec;
}

namespace {

SignalModel signal_from_json(const json& j) {
    SignalModel model;
    model.name = j.value("name", std::string("inline"));
    if (j.contains("poly")) model.base.poly = j.at("poly").get<std::vector<double>>();
    if (j.contains("sines")) {
        for (const auto& s : j.at("sines"))
            model.base.sines.push_back(
                {s.at("amplitude").get<double>(), s.at("frequency").get<double>(), s.value("phase", 0.0)});
    }
    if (j.contains("noise")) {
        for (const auto& term : j.at("noise")) {
            const std::string type = term.at("type").get<std::string>();
            if (type == "gaussian")
                model.noise.terms.emplace_back(GaussianNoise{term.at("sigma").get<double>(), 0});
            else if (type == "cosine")
                model.noise.terms.emplace_back(CosineNoise{term.at("amplitude").get<double>(),
                                                           term.at("frequency").get<double>(),
                                                           term.value("phase", 0.0)});
            else
                throw ContractError("unknown noise type '" + type + "'");
        }
    }
    if (j.contains("L_true")) model.L_true = j.at("L_true").get<double>();
    return model;
}

}  // namespace

RunSpec run_spec_from_json(const json& j, RunSpec spec) {
    if (!j.is_object()) throw ContractError("config must be a JSON object");
    if (j.contains("scenario")) {
        const int id = j.at("scenario").get<int>();
        const RunSpec preset = preset_run_spec(id);
        spec.scenario = id;
        spec.cfg = preset.cfg;
        spec.t_end = preset.t_end;
    }
    if (j.contains("signal")) spec.signal = signal_from_json(j.at("signal"));
    if (j.contains("n")) spec.cfg.n = j.at("n").get<int>();
    if (j.contains("nf")) spec.cfg.nf = j.at("nf").get<int>();
    if (j.contains("L")) spec.cfg.L = j.at("L").get<double>();
    if (j.contains("tau")) spec.cfg.tau = j.at("tau").get<double>();
    if (j.contains("lambdas")) {
        const auto v = j.at("lambdas").get<std::vector<double>>();
        spec.cfg.lambdas = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    if (j.contains("t_end")) spec.t_end = j.at("t_end").get<double>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("window")) {
        const auto w = j.at("window").get<std::vector<double>>();
        if (w.size() != 2) throw ContractError("window must be [t_min, t_max]");
        spec.t_min = w[0];
        spec.t_max = w[1];
    }
    if (j.contains("m_definition")) spec.m_definition = parse_m_definition(j.at("m_definition").get<std::string>());
    if (j.contains("methods")) {
        spec.methods.clear();
        for (const auto& m : j.at("methods")) spec.methods.push_back(parse_method(m.get<std::string>()));
    }
    if (j.contains("out")) spec.out_dir = j.at("out").get<std::string>();
    if (j.contains("oracle_step")) spec.oracle_step = j.at("oracle_step").get<double>();
    return spec;
}

RunSpec run_spec_from_json(const json& j) {
    const int id = j.is_object() ? j.value("scenario", 1) : 1;
    return run_spec_from_json(j, preset_run_spec(id));
}

namespace {

std::vector<ErrorTrace> run_all(const RunSpec& spec) {
    spec.validate();
    const SignalModel model = spec.signal_model();
    std::vector<ErrorTrace> traces;
    for (Method m : spec.methods) {
        ErrorTrace tr = run(spec.cfg, m, model, spec.t_end);
        tr.scenario = spec.scenario;
        tr.seed = spec.seed;
        traces.push_back(std::move(tr));
    }
    return traces;
}

}  // namespace

RunResult execute_run(const RunSpec& spec) {
    RunResult result;
    result.traces = run_all(spec);
    if (spec.oracle_step) result.oracle = continuous_oracle(spec, *spec.oracle_step);
    result.table = metrics_table(result.traces, spec.t_min, spec.window_max(), spec.m_definition);
    return result;
}

std::string trace_file_name(const std::string& method) {
    std::string name;
    for (char ch : method) name.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    return "trace_" + name + ".csv";
}

namespace {

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ContractError("cannot open output file " + path.string());
    return os;
}

}  // namespace

RunResult run_scenario(const RunSpec& spec) {
    RunResult result;
    result.traces = run_all(spec);
    if (spec.oracle_step) result.oracle = continuous_oracle(spec, *spec.oracle_step);

    const fs::path dir(spec.out_dir);
    fs::create_directories(dir);
    for (const auto& tr : result.traces) {
        auto os = open_out(dir / trace_file_name(tr.method));
        write_trace_csv(os, tr);
    }
    if (result.oracle) {
        auto os = open_out(dir / "trace_oracle.csv");
        write_trace_csv(os, *result.oracle);
    }

    result.table = metrics_table(result.traces, spec.t_min, spec.window_max(), spec.m_definition);
    {
        auto os = open_out(dir / "metrics.csv");
        write_metrics_csv(os, result.table);
    }
    {
        auto os = open_out(dir / "metrics.json");
        os << metrics_json(result.table).dump(2) << '\n';
    }
    return result;
}

ErrorTrace continuous_oracle(const RunSpec& spec, double fine_step) {
    spec.validate();
    const Config& cfg = spec.cfg;
    if (!(fine_step > 0) || fine_step > cfg.tau / 100 * (1 + 1e-12))
        throw ContractError("oracle fine step must be in (0, tau/100]");

    const long substeps = static_cast<long>(std::ceil(cfg.tau / fine_step - 1e-9));
    const double h = cfg.tau / static_cast<double>(substeps);
    const long steps = step_count(spec.t_end, cfg.tau);
    const int nf = cfg.nf;
    const int m = cfg.m();
    const int nz = cfg.n + 1;

    const SignalModel model = spec.signal_model();
    Sampler sampler(model, cfg.tau);

    ErrorTrace trace;
    trace.tau = cfg.tau;
    trace.method = "ORACLE";
    trace.scenario = spec.scenario;
    trace.seed = spec.seed;
    trace.z.resize(steps + 1, nz);
    trace.sigma.resize(steps + 1, nz);

    Eigen::VectorXd x = Eigen::VectorXd::Zero(cfg.dim());
    Eigen::VectorXd dx(cfg.dim());
    for (long k = 0; k <= steps; ++k) {
        const StepInput in = sampler.sample(k);
        trace.t.push_back(in.t);
        trace.g.push_back(in.g);
        trace.xi.push_back(sign(x[0]));
        trace.z.row(k) = x.tail(nz).transpose();
        trace.sigma.row(k) = (x.tail(nz) - true_state(model, cfg.n, in.t)).transpose();
        if (k == steps) break;

        const double held = sampler.gaussian_at(k);
        for (long j = 0; j < substeps; ++j) {
            const double t = in.t + static_cast<double>(j) * h;
            const double g = model.f0(t) + sampler.deterministic_noise(t) + held;
            const double w1 = x[0];
            for (int i = 0; i < m; ++i) dx[i] = psi(i, cfg, w1) + x[i + 1];
            dx[m] = psi(m, cfg, w1);
            dx[nf - 1] -= g;
            x += h * dx;
        }
        if (!x.allFinite()) throw NumericalError("oracle diverged at step " + std::to_string(k), k);
    }
    return trace;
}

void SweepSpec::validate() const {
    if (!(tau_min > 0) || !(tau_max >= tau_min)) throw ContractError("sweep requires 0 < tau_min <= tau_max");
    if (spacing == SweepSpacing::Linear && !(step > 0)) throw ContractError("sweep step must be positive");
    if (spacing == SweepSpacing::Log && points < 1) throw ContractError("sweep needs at least one point");
    base.validate();
}

SweepSpec full_grid_sweep(RunSpec base) {
    SweepSpec s;
    s.tau_min = 1e-4;
    s.tau_max = 1.0;
    s.spacing = SweepSpacing::Linear;
    s.step = 1e-4;
    s.base = std::move(base);
    return s;
}

std::vector<double> tau_grid(const SweepSpec& spec) {
    std::vector<double> grid;
    if (spec.tau_min == spec.tau_max) return {spec.tau_min};
    if (spec.spacing == SweepSpacing::Linear) {
        const long count = static_cast<long>(std::floor((spec.tau_max - spec.tau_min) / spec.step + 1e-9)) + 1;
        for (long i = 0; i < count; ++i) grid.push_back(spec.tau_min + static_cast<double>(i) * spec.step);
    } else {
        if (spec.points == 1) return {spec.tau_min};
        const double ratio = std::log(spec.tau_max / spec.tau_min);
        for (int i = 0; i < spec.points; ++i)
            grid.push_back(spec.tau_min * std::exp(ratio * i / (spec.points - 1)));
        grid.back() = spec.tau_max;
    }
    return grid;
}

std::vector<SweepRow> sweep_tau(const SweepSpec& spec) {
    spec.validate();
    const SignalModel model = spec.base.signal_model();
    std::vector<SweepRow> rows;
    for (double tau : tau_grid(spec)) {
        Config cfg = spec.base.cfg;
        cfg.tau = tau;
        for (Method method : spec.base.methods) {
            SweepRow row;
            row.tau = tau;
            row.method = method;
            row.Y = Eigen::VectorXd::Constant(cfg.n + 1, std::numeric_limits<double>::quiet_NaN());
            try {
                row.Y = run_metrics(cfg, method, model, spec.base.t_end, spec.base.t_min, spec.base.window_max(),
                                    spec.base.m_definition)
                            .Y;
            } catch (const NumericalError& err) {
                row.status = "diverged@" + std::to_string(err.step());
            } catch (const EmptyWindowError&) {
                row.status = "empty-window";
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_trace_csv(std::ostream& os, const ErrorTrace& trace) {
    const int n = trace.order();
    os << "k,t,g";
    for (int i = 0; i <= n; ++i) os << ",z" << i;
    for (int i = 0; i <= n; ++i) os << ",sigma" << i;
    os << ",xi\n";
    for (std::size_t k = 0; k < trace.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        os << k << ',' << format_double(trace.t[k]) << ',' << format_double(trace.g[k]);
        for (int i = 0; i <= n; ++i) os << ',' << format_double(trace.z(r, i));
        for (int i = 0; i <= n; ++i) os << ',' << format_double(trace.sigma(r, i));
        os << ',' << format_double(trace.xi[k]) << '\n';
    }
}

void write_metrics_csv(std::ostream& os, const MetricsTable& table) {
    os << "metric";
    for (const auto& c : table.columns) os << ',' << c.method;
    os << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        os << table.row_label(r);
        for (std::size_t c = 0; c < table.columns.size(); ++c) os << ',' << format_double(table.value(r, c));
        os << '\n';
    }
}

json metrics_json(const MetricsTable& table) {
    json j;
    j["scenario"] = table.scenario;
    json methods = json::array();
    for (const auto& c : table.columns) {
        json col;
        col["method"] = c.method;
        col["Y"] = std::vector<double>(c.Y.data(), c.Y.data() + c.Y.size());
        col["M"] = std::vector<double>(c.M.data(), c.M.data() + c.M.size());
        methods.push_back(col);
        j["window"] = {c.t_min, c.t_max};
        j["m_definition"] = to_string(c.definition);
    }
    j["methods"] = methods;
    return j;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, int n) {
    os << "tau,method";
    for (int i = 0; i <= n; ++i) os << ",Y" << i;
    os << ",status\n";
    for (const auto& row : rows) {
        os << format_double(row.tau) << ',' << to_string(row.method);
        for (int i = 0; i <= n; ++i) os << ',' << format_double(row.Y[i]);
        os << ',' << row.status << '\n';
    }
}

std::string format_table(const MetricsTable& table) {
    std::ostringstream os;
    os << std::setw(6) << "";
    for (const auto& c : table.columns) os << std::setw(18) << c.method;
    os << '\n';
    for (std::size_t r = 0; r < table.rows(); ++r) {
        os << std::setw(6) << table.row_label(r);
        for (std::size_t c = 0; c < table.columns.size(); ++c)
            os << std::setw(18) << std::setprecision(6) << table.value(r, c);
        os << '\n';
    }
    return os.str();
}

}  // namespace fter
