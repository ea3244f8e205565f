#pragma once

// Text matrix format: a `rows cols` header line, then one line of
// space-separated values per row. Values are written with 17 significant
// digits so a write/read cycle reproduces every double exactly.

#include <iosfwd>
#include <string>

#include "eagc/numerics.hpp"

namespace eagc {

std::string format_real(double v);

void write_matrix(std::ostream& out, const Matrix& m);
Matrix read_matrix(std::istream& in);

void save_matrix(const std::string& path, const Matrix& m);
Matrix load_matrix(const std::string& path);

}  // namespace eagc
