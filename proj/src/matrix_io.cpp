#include "eagc/matrix_io.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "eagc/errors.hpp"

namespace eagc {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_matrix(std::ostream& out, const Matrix& m) {
  out << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out << ' ';
      out << format_real(m(i, j));
    }
    out << '\n';
  }
}

Matrix read_matrix(std::istream& in) {
  long rows = -1, cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) throw DataError("matrix file: malformed header");
  Matrix m(rows, cols);
  for (long i = 0; i < rows; ++i)
    for (long j = 0; j < cols; ++j)
      if (!(in >> m(i, j))) throw DataError("matrix file: truncated data at row " + std::to_string(i));
  if (!m.allFinite()) throw DataError("matrix file: non-finite entries");
  return m;
}

void save_matrix(const std::string& path, const Matrix& m) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_matrix(out, m);
}

Matrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open matrix file '" + path + "'");
  return read_matrix(in);
}

}  // namespace eagc
