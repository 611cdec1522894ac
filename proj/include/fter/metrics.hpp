/**
 * @file metrics.hpp
 * @brief Error traces and the window indices Y_i (max |sigma_i|) and M_i.
 */
#pragma once

#include "fter/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace fter {

/// Estimation history of one run. Row k of z/sigma belongs to time t[k].
struct ErrorTrace {
    double tau = 0;
    std::string method;
    int scenario = 0;
    std::uint64_t seed = 0;

    std::vector<double> t;
    std::vector<double> g;
    Eigen::MatrixXd z;      // rows: steps, cols: z_0..z_n
    Eigen::MatrixXd sigma;  // z - true state
    std::vector<double> xi;

    std::size_t size() const { return t.size(); }
    int order() const { return static_cast<int>(z.cols()) - 1; }
};

enum class MDefinition { RMS, MeanSquare };

MDefinition parse_m_definition(const std::string& text);
std::string to_string(MDefinition def);

class EmptyWindowError : public ContractError {
public:
    using ContractError::ContractError;
};

double y_index(const ErrorTrace& trace, int i, double t_min, double t_max);
double m_index(const ErrorTrace& trace, int i, double t_min, double t_max,
               MDefinition def = MDefinition::RMS);

struct Metrics {
    std::string method;
    Eigen::VectorXd Y;
    Eigen::VectorXd M;
    double t_min = 0;
    double t_max = 0;
    MDefinition definition = MDefinition::RMS;
};

Metrics compute_metrics(const ErrorTrace& trace, double t_min, double t_max,
                        MDefinition def = MDefinition::RMS);

/// Rows Y_0..Y_n then M_0..M_n; one column per method, in input order.
struct MetricsTable {
    int scenario = 0;
    std::vector<Metrics> columns;

    int order() const;
    std::size_t rows() const { return static_cast<std::size_t>(2 * (order() + 1)); }
    std::string row_label(std::size_t row) const;
    double value(std::size_t row, std::size_t column) const;
    const Metrics& at(const std::string& method) const;
};

MetricsTable metrics_table(const std::vector<ErrorTrace>& traces, double t_min, double t_max,
                           MDefinition def = MDefinition::RMS);

/// Streaming Y/M over a window, for runs too long to keep as a trace.
class MetricsAccumulator {
public:
    MetricsAccumulator(int n, double t_min, double t_max);

    void add(double t, const Eigen::Ref<const Eigen::VectorXd>& sigma);
    std::size_t count() const { return count_; }
    Metrics result(MDefinition def = MDefinition::RMS) const;

private:
    double t_min_, t_max_;
    Eigen::VectorXd max_abs_, sum_sq_;
    std::size_t count_ = 0;
};

/// Window membership with a small tolerance on the float sample times.
bool in_window(double t, double t_min, double t_max);

}  // namespace fter
