#include "eigenshift/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "eigenshift/errors.hpp"

namespace eigenshift {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json matrix_to_json(const Eigen::MatrixXd& M) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty())
    throw ShapeError("matrix JSON must be a nonempty array of rows");
  const std::size_t n = j.size();
  if (!j[0].is_array() || j[0].empty())
    throw ShapeError("matrix JSON rows must be nonempty arrays");
  const std::size_t m = j[0].size();
  Eigen::MatrixXd M(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (std::size_t i = 0; i < n; ++i) {
    if (!j[i].is_array() || j[i].size() != m)
      throw ShapeError("matrix JSON rows have inconsistent lengths");
    for (std::size_t k = 0; k < m; ++k) {
      if (!j[i][k].is_number())
        throw ShapeError("matrix JSON entries must be numbers");
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) =
          j[i][k].get<double>();
    }
  }
  return M;
}

void save_matrix_json(const std::string& path, const Eigen::MatrixXd& M) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << matrix_to_json(M).dump() << "\n";
}

Eigen::MatrixXd load_matrix_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open for reading: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ShapeError(std::string("bad matrix JSON: ") + e.what());
  }
  return matrix_from_json(j);
}

void save_matrix_csv(const std::string& path, const Eigen::MatrixXd& M) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path);
  out << M.rows() << "\n";
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    for (Eigen::Index j = 0; j < M.cols(); ++j) {
      if (j) out << ",";
      out << format_double(M(i, j));
    }
    out << "\n";
  }
}

Eigen::MatrixXd load_matrix_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open for reading: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ShapeError("empty CSV: " + path);
  long rows = 0;
  try {
    rows = std::stol(line);
  } catch (const std::exception&) {
    throw ShapeError("CSV header must be the row count: " + path);
  }
  if (rows <= 0) throw ShapeError("CSV row count must be positive");

  std::vector<std::vector<double>> data;
  data.reserve(static_cast<std::size_t>(rows));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    data.push_back(std::move(row));
  }
  if (static_cast<long>(data.size()) != rows)
    throw ShapeError("CSV row count does not match header");
  const std::size_t m = data[0].size();
  Eigen::MatrixXd M(rows, static_cast<Eigen::Index>(m));
  for (long i = 0; i < rows; ++i) {
    if (data[static_cast<std::size_t>(i)].size() != m)
      throw ShapeError("CSV rows have inconsistent lengths");
    for (std::size_t j = 0; j < m; ++j)
      M(i, static_cast<Eigen::Index>(j)) = data[static_cast<std::size_t>(i)][j];
  }
  return M;
}

}  // namespace eigenshift
