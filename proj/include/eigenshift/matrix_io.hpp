#pragma once

#include <Eigen/Dense>
#include <string>

#include "json.hpp"

namespace eigenshift {

// Matrices travel as JSON arrays of row arrays, or as CSV whose first line
// holds the row count followed by one comma-separated line per row. Both
// writers emit shortest round-trip decimal forms, so load(save(M)) == M
// bit for bit (well within the 1e-15 relative fidelity contract).

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

void save_matrix_json(const std::string& path, const Eigen::MatrixXd& M);
Eigen::MatrixXd load_matrix_json(const std::string& path);

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& M);
Eigen::MatrixXd load_matrix_csv(const std::string& path);

// %.17g rendering shared by the CSV writer and the report emitters.
std::string format_double(double v);

}  // namespace eigenshift
