#include "fmatch/serialize.hpp"

#include "fmatch/errors.hpp"
#include "fmatch/spectral.hpp"
#include "fmatch/util.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <vector>

namespace fmatch {

namespace {

// All binary containers are little-endian on disk; this code assumes a
// little-endian host (x86-64 / aarch64-le) and writes native doubles.

void put_u64(std::string& out, std::uint64_t v) {
  char buf[8];
  std::memcpy(buf, &v, 8);
  out.append(buf, 8);
}

void put_doubles(std::string& out, const double* p, std::size_t count) {
  out.append(reinterpret_cast<const char*>(p), count * sizeof(double));
}

struct BinReader {
  const std::string& data;
  const std::string& name;
  std::size_t pos = 0;

  void expect_magic(const char* magic, std::size_t len) {
    if (data.size() < len || std::memcmp(data.data(), magic, len) != 0)
      throw InputError(name + ": bad magic (expected " + std::string(magic, len) + ")");
    pos = len;
  }
  std::uint64_t u64() {
    if (pos + 8 > data.size()) throw InputError(name + ": truncated header");
    std::uint64_t v;
    std::memcpy(&v, data.data() + pos, 8);
    pos += 8;
    return v;
  }
  void doubles(double* dst, std::size_t count) {
    std::size_t bytes = count * sizeof(double);
    if (pos + bytes > data.size())
      throw InputError(name + strf(": truncated payload (need %zu bytes, have %zu)",
                                   bytes, data.size() - pos));
    std::memcpy(dst, data.data() + pos, bytes);
    pos += bytes;
  }
  void expect_end() {
    if (pos != data.size())
      throw InputError(name + strf(": %zu trailing bytes", data.size() - pos));
  }
};

} // namespace

std::string serialize_fmmat(const Eigen::MatrixXd& m) {
  std::string out;
  out.append("FMMAT1", 6);
  put_u64(out, static_cast<std::uint64_t>(m.rows()));
  put_u64(out, static_cast<std::uint64_t>(m.cols()));
  // row-major payload
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double v = m(r, c);
      put_doubles(out, &v, 1);
    }
  return out;
}

Eigen::MatrixXd parse_fmmat(const std::string& data, const std::string& name) {
  BinReader rd{data, name};
  rd.expect_magic("FMMAT1", 6);
  std::uint64_t rows = rd.u64();
  std::uint64_t cols = rd.u64();
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> m(rows, cols);
  rd.doubles(m.data(), rows * cols);
  rd.expect_end();
  return m;
}

void write_fmmat(const std::string& path, const Eigen::MatrixXd& m) {
  atomic_write_file(path, serialize_fmmat(m));
}

Eigen::MatrixXd read_fmmat(const std::string& path) {
  return parse_fmmat(read_file(path), path);
}

void write_fmsb(const std::string& path, const SpectralBasis& basis) {
  std::string out;
  out.append("FMSB1", 5);
  put_u64(out, static_cast<std::uint64_t>(basis.phi.rows()));
  put_u64(out, static_cast<std::uint64_t>(basis.k));
  put_doubles(out, basis.mass.data(), static_cast<std::size_t>(basis.mass.size()));
  put_doubles(out, basis.lambda.data(), static_cast<std::size_t>(basis.lambda.size()));
  for (Eigen::Index r = 0; r < basis.phi.rows(); ++r)
    for (Eigen::Index c = 0; c < basis.phi.cols(); ++c) {
      double v = basis.phi(r, c);
      put_doubles(out, &v, 1);
    }
  atomic_write_file(path, out);
}

SpectralBasis read_fmsb(const std::string& path) {
  std::string data = read_file(path);
  BinReader rd{data, path};
  rd.expect_magic("FMSB1", 5);
  std::uint64_t n = rd.u64();
  std::uint64_t k = rd.u64();
  SpectralBasis basis;
  basis.k = static_cast<int>(k);
  basis.mass.resize(static_cast<Eigen::Index>(n));
  rd.doubles(basis.mass.data(), n);
  basis.lambda.resize(static_cast<Eigen::Index>(k));
  rd.doubles(basis.lambda.data(), k);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> phi(n, k);
  rd.doubles(phi.data(), n * k);
  rd.expect_end();
  basis.phi = phi;
  return basis;
}

void write_csv_matrix(const std::string& path, const Eigen::MatrixXd& m,
                      const std::vector<std::string>* header) {
  std::string out;
  if (header) {
    for (std::size_t i = 0; i < header->size(); ++i) {
      if (i) out += ",";
      out += (*header)[i];
    }
    out += "\n";
  }
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      if (c) out += ",";
      out += fmt_double(m(r, c));
    }
    out += "\n";
  }
  atomic_write_file(path, out);
}

Eigen::MatrixXd read_csv_matrix(const std::string& path, std::vector<std::string>* header_out) {
  std::string data = read_file(path);
  std::vector<std::vector<double>> rows;
  std::vector<std::string> header;
  std::size_t pos = 0;
  long line_no = 0;
  bool first_content_line = true;
  std::size_t ncols = 0;
  while (pos < data.size()) {
    std::size_t end = data.find('\n', pos);
    std::string line = data.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
    pos = end == std::string::npos ? data.size() : end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      std::size_t comma = line.find(',', start);
      cells.push_back(line.substr(start, comma == std::string::npos ? std::string::npos
                                                                    : comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }

    if (first_content_line) {
      // Header detection: a line whose first cell does not parse as a number.
      double v = 0.0;
      const std::string& c0 = cells[0];
      auto res = std::from_chars(c0.data(), c0.data() + c0.size(), v);
      bool numeric = res.ec == std::errc() && res.ptr == c0.data() + c0.size();
      first_content_line = false;
      if (!numeric) {
        header = cells;
        ncols = cells.size();
        continue;
      }
    }
    if (ncols == 0) ncols = cells.size();
    if (cells.size() != ncols)
      throw ParseError(path, line_no,
                       strf("row has %zu cells, expected %zu", cells.size(), ncols));
    std::vector<double> row(ncols);
    for (std::size_t c = 0; c < ncols; ++c) {
      const std::string& cell = cells[c];
      std::size_t b = cell.find_first_not_of(" \t");
      std::size_t e = cell.find_last_not_of(" \t");
      if (b == std::string::npos) throw ParseError(path, line_no, strf("empty cell %zu", c));
      double v = 0.0;
      auto res = std::from_chars(cell.data() + b, cell.data() + e + 1, v);
      if (res.ec != std::errc() || res.ptr != cell.data() + e + 1)
        throw ParseError(path, line_no, strf("cell %zu is not a number: '%s'", c, cell.c_str()));
      // from_chars accepts "inf"/"nan"; callers expecting finite data check below
      row[c] = v;
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw InputError(path + ": empty CSV");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncols));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < ncols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  if (header_out) *header_out = header;
  return m;
}

} // namespace fmatch
