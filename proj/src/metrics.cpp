#include "fter/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace fter {

MDefinition parse_m_definition(const std::string& text) {
    if (text == "rms" || text == "RMS") return MDefinition::RMS;
    if (text == "ms" || text == "mse" || text == "mean-square" || text == "MeanSquare")
        return MDefinition::MeanSquare;
    throw ContractError("unknown M definition '" + text + "' (expected rms or mean-square)");
}

std::string to_string(MDefinition def) {
    return def == MDefinition::RMS ? "rms" : "mean-square";
}

bool in_window(double t, double t_min, double t_max) {
    const double lo = t_min - 1e-9 * std::max(1.0, std::abs(t_min));
    const double hi = t_max + 1e-9 * std::max(1.0, std::abs(t_max));
    return t >= lo && t <= hi;
}

namespace {

void check_index(const ErrorTrace& trace, int i) {
    if (i < 0 || i > trace.order()) throw std::out_of_range("derivative index outside trace");
}

}  // namespace

double y_index(const ErrorTrace& trace, int i, double t_min, double t_max) {
    check_index(trace, i);
    double y = 0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (!in_window(trace.t[k], t_min, t_max)) continue;
        y = std::max(y, std::abs(trace.sigma(static_cast<Eigen::Index>(k), i)));
        ++hits;
    }
    if (hits == 0) throw EmptyWindowError("metrics window contains no samples");
    return y;
}

double m_index(const ErrorTrace& trace, int i, double t_min, double t_max, MDefinition def) {
    check_index(trace, i);
    double sum = 0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < trace.size(); ++k) {
        if (!in_window(trace.t[k], t_min, t_max)) continue;
        const double s = trace.sigma(static_cast<Eigen::Index>(k), i);
        sum += s * s;
        ++hits;
    }
    if (hits == 0) throw EmptyWindowError("metrics window contains no samples");
    const double ms = sum / static_cast<double>(hits);
    return def == MDefinition::RMS ? std::sqrt(ms) : ms;
}

Metrics compute_metrics(const ErrorTrace& trace, double t_min, double t_max, MDefinition def) {
    MetricsAccumulator acc(trace.order(), t_min, t_max);
    for (std::size_t k = 0; k < trace.size(); ++k)
        acc.add(trace.t[k], trace.sigma.row(static_cast<Eigen::Index>(k)).transpose());
    Metrics out = acc.result(def);
    out.method = trace.method;
    return out;
}

int MetricsTable::order() const {
    return columns.empty() ? -1 : static_cast<int>(columns.front().Y.size()) - 1;
}

std::string MetricsTable::row_label(std::size_t row) const {
    const std::size_t per = static_cast<std::size_t>(order() + 1);
    return (row < per ? "Y" : "M") + std::to_string(row % per);
}

double MetricsTable::value(std::size_t row, std::size_t column) const {
    const std::size_t per = static_cast<std::size_t>(order() + 1);
    const Metrics& c = columns.at(column);
    const auto i = static_cast<Eigen::Index>(row % per);
    return row < per ? c.Y[i] : c.M[i];
}

const Metrics& MetricsTable::at(const std::string& method) const {
    for (const auto& c : columns)
        if (c.method == method) return c;
    throw std::out_of_range("no metrics column for method " + method);
}

MetricsTable metrics_table(const std::vector<ErrorTrace>& traces, double t_min, double t_max,
                           MDefinition def) {
    MetricsTable table;
    if (traces.empty()) return table;
    table.scenario = traces.front().scenario;
    for (const auto& tr : traces) {
        if (tr.scenario != table.scenario || tr.order() != traces.front().order())
            throw ContractError("metrics_table: traces belong to different scenarios");
        table.columns.push_back(compute_metrics(tr, t_min, t_max, def));
    }
    return table;
}

MetricsAccumulator::MetricsAccumulator(int n, double t_min, double t_max)
    : t_min_(t_min),
      t_max_(t_max),
      max_abs_(Eigen::VectorXd::Zero(n + 1)),
      sum_sq_(Eigen::VectorXd::Zero(n + 1)) {}

void MetricsAccumulator::add(double t, const Eigen::Ref<const Eigen::VectorXd>& sigma) {
    if (!in_window(t, t_min_, t_max_)) return;
    max_abs_ = max_abs_.cwiseMax(sigma.cwiseAbs());
    sum_sq_ += sigma.cwiseAbs2();
    ++count_;
}

Metrics MetricsAccumulator::result(MDefinition def) const {
    if (count_ == 0) throw EmptyWindowError("metrics window contains no samples");
    Metrics out;
    out.t_min = t_min_;
    out.t_max = t_max_;
    out.definition = def;
    out.Y = max_abs_;
    const Eigen::VectorXd ms = sum_sq_ / static_cast<double>(count_);
    out.M = def == MDefinition::RMS ? Eigen::VectorXd(ms.cwiseSqrt()) : ms;
    return out;
}

}  // namespace fter
