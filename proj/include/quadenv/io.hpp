#pragma once

#include <Eigen/Core>
#include <string>

namespace quadenv {

/// Shortest decimal string that round-trips to the same double.
std::string format_double(double v);

/// Vectors: one value per line. Matrices: comma-separated, row-major, no
/// header. Parsing requires every field to be a finite number.
void write_vector_csv(const std::string& path, const Eigen::VectorXd& v);
Eigen::VectorXd read_vector_csv(const std::string& path);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_matrix_csv(const std::string& path);

}  // namespace quadenv
