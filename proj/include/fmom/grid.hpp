#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace fmom {

/// One statistic per (lag m, holding period n) cell. Rows follow `m_values`,
/// columns follow `n_values`; cells without enough history are missing.
struct GridResult {
    std::vector<int> m_values;
    std::vector<int> n_values;
    Eigen::MatrixXd cells;
    Eigen::MatrixXi observations;  // PNL months behind each cell
    std::string statistic;

    double at(int m, int n) const;
    int observations_at(int m, int n) const;
};

}  // namespace fmom
