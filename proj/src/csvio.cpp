#include "dlasso/csvio.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dlasso::csv {

namespace {
std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',' || ch == ' ' || ch == '\t' || ch == '\r') {
      if (!cur.empty()) {
        out.push_back(cur);
        cur.clear();
      } else if (ch == ',') {
        out.emplace_back();
      }
    } else {
      cur.push_back(ch);
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

std::vector<std::vector<double>> read_rows(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;
    std::vector<double> row;
    row.reserve(fields.size());
    for (const auto& f : fields) {
      try {
        std::size_t used = 0;
        const double v = std::stod(f, &used);
        if (used != f.size()) throw std::invalid_argument(f);
        row.push_back(v);
      } catch (const std::exception&) {
        throw std::invalid_argument("'" + path + "' line " +
                                    std::to_string(lineno) +
                                    ": not a number: '" + f + "'");
      }
    }
    if (!rows.empty() && rows.front().size() != row.size()) {
      throw std::invalid_argument("'" + path + "' line " +
                                  std::to_string(lineno) +
                                  ": ragged row width");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("'" + path + "' is empty");
  return rows;
}
}  // namespace

Eigen::MatrixXd read_matrix(const std::string& path) {
  const auto rows = read_rows(path);
  Eigen::MatrixXd m(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          rows[r][c];
    }
  }
  return m;
}

Eigen::VectorXd read_vector(const std::string& path) {
  const Eigen::MatrixXd m = read_matrix(path);
  if (m.cols() == 1) return m.col(0);
  if (m.rows() == 1) return m.row(0).transpose();
  throw std::invalid_argument("'" + path + "': expected a single column");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_matrix(const std::string& path, const Eigen::MatrixXd& m) {
  std::ofstream out(path);
  if (!out) throw std::invalid_argument("cannot write '" + path + "'");
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out << ',';
      out << format_double(m(r, c));
    }
    out << '\n';
  }
}

int Table::column(const std::string& name) const {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> Table::column_values(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw std::invalid_argument("no column '" + name + "'");
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

Table read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open '" + path + "'");
  Table t;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::invalid_argument("'" + path + "' is empty");
  }
  for (auto& f : split_fields(line)) t.header.push_back(f);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        row.push_back(std::nan(""));
      }
    }
    while (row.size() < t.header.size()) row.push_back(std::nan(""));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace dlasso::csv
