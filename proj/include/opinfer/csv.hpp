#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace opinfer {

/// 17 significant digits; "nan", "inf", "-inf" for non-finite values.
std::string format_double(double value);

/// Plain comma-separated matrix, one row per line, no header.
void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& M);
Eigen::MatrixXd read_matrix_csv(std::istream& is);

void write_matrix_csv_file(const std::string& path, const Eigen::MatrixXd& M);
Eigen::MatrixXd read_matrix_csv_file(const std::string& path);

/// Splits one CSV line on commas (no quoting support; fields are numeric or tags).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace opinfer
