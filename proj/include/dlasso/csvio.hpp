#pragma once

#include <Eigen/Dense>
#include <iosfwd>
#include <string>
#include <vector>

namespace dlasso::csv {

// Headerless numeric matrix; fields split on commas and/or whitespace.
Eigen::MatrixXd read_matrix(const std::string& path);
Eigen::VectorXd read_vector(const std::string& path);

void write_matrix(const std::string& path, const Eigen::MatrixXd& m);

// Shortest round-trippable decimal representation; used everywhere CSV
// output must be byte-reproducible.
std::string format_double(double v);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;  // non-numeric cells become NaN

  int column(const std::string& name) const;  // -1 when absent
  std::vector<double> column_values(const std::string& name) const;
};

// Reads a CSV with a header row; numeric cells parsed as doubles.
Table read_table(const std::string& path);

}  // namespace dlasso::csv
