#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace fmatch {

struct SpectralBasis;

// FMMAT1: little-endian binary matrix.
//   bytes 0..5   magic "FMMAT1"
//   uint64 rows, uint64 cols
//   rows*cols float64, row-major
void write_fmmat(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd read_fmmat(const std::string& path);
std::string serialize_fmmat(const Eigen::MatrixXd& m);
Eigen::MatrixXd parse_fmmat(const std::string& data, const std::string& name = "<memory>");

// FMSB1: little-endian spectral basis container.
//   bytes 0..4   magic "FMSB1"
//   uint64 n, uint64 k
//   n float64    mass diagonal
//   k float64    eigenvalues (ascending)
//   n*k float64  eigenfunctions, row-major
void write_fmsb(const std::string& path, const SpectralBasis& basis);
SpectralBasis read_fmsb(const std::string& path);

// Plain comma-separated matrix. `header` controls whether a first line of
// column labels is written / expected. Reading detects a header line
// automatically unless `expect_header` forces it. Non-finite entries are
// rejected with their cell coordinates.
void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>* header = nullptr);
Eigen::MatrixXd read_csv_matrix(const std::string& path,
                                std::vector<std::string>* header_out = nullptr);

} // namespace fmatch
