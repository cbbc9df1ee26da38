#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "kltensor/tensor.hpp"

namespace kltensor {

/// Malformed text input. `line()` is 1-based, 0 when not tied to a line.
class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }
  /// The message without the line prefix.
  const std::string& detail() const { return detail_; }

 private:
  std::size_t line_;
  std::string detail_;
};

// COO text format:
//   N
//   J_1 ... J_N
//   i_1 ... i_N value      (0-based indices, one entry per line)
// Lines whose first non-blank character is '#' are comments.
SparseTensor read_coo(std::istream& in);
SparseTensor read_coo_file(const std::filesystem::path& path);
void write_coo(std::ostream& out, const SparseTensor& t);
void write_coo_file(const std::filesystem::path& path, const SparseTensor& t);

/// Shortest text that round-trips is not required; values are written with
/// 17 significant digits so reading them back is bit-exact.
std::string format_double(double v);
double parse_double(std::string_view token, std::size_t line);

}  // namespace kltensor
