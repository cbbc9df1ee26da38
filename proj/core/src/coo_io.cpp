#include "kltensor/coo_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string_view>

namespace kltensor {

ParseError::ParseError(std::size_t line, const std::string& what)
    : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
      line_(line),
      detail_(what) {}

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

double parse_double(std::string_view token, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ParseError(line, "invalid number '" + std::string(token) + "'");
  }
  return v;
}

namespace {

std::size_t parse_size(std::string_view token, std::size_t line) {
  std::size_t v = 0;
  auto res = std::from_chars(token.data(), token.data() + token.size(), v);
  if (res.ec != std::errc{} || res.ptr != token.data() + token.size()) {
    throw ParseError(line, "invalid integer '" + std::string(token) + "'");
  }
  return v;
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

bool is_skippable(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

}  // namespace

SparseTensor read_coo(std::istream& in) {
  std::size_t lineno = 0;
  std::size_t order = 0;
  std::vector<std::size_t> shape;
  std::vector<Index> indices;
  std::vector<double> values;
  int stage = 0;

  for (std::string line; std::getline(in, line);) {
    ++lineno;
    if (is_skippable(line)) continue;
    const auto tokens = split_ws(line);
    if (stage == 0) {
      if (tokens.size() != 1) throw ParseError(lineno, "expected the number of modes");
      order = parse_size(tokens[0], lineno);
      if (order == 0) throw ParseError(lineno, "number of modes must be positive");
      stage = 1;
    } else if (stage == 1) {
      if (tokens.size() != order) {
        throw ParseError(lineno, "expected " + std::to_string(order) + " mode sizes");
      }
      for (const auto& tok : tokens) {
        const std::size_t dim = parse_size(tok, lineno);
        if (dim == 0) throw ParseError(lineno, "mode sizes must be positive");
        shape.push_back(dim);
      }
      stage = 2;
    } else {
      if (tokens.size() != order + 1) {
        throw ParseError(lineno, "expected " + std::to_string(order) + " indices and a value");
      }
      for (std::size_t n = 0; n < order; ++n) {
        const std::size_t i = parse_size(tokens[n], lineno);
        if (i >= shape[n]) {
          throw ParseError(lineno, "index " + std::to_string(i) + " out of range for mode " +
                                       std::to_string(n));
        }
        indices.push_back(static_cast<Index>(i));
      }
      const double v = parse_double(tokens[order], lineno);
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ParseError(lineno, "values must be finite and nonnegative");
      }
      values.push_back(v);
    }
  }
  if (stage < 2) throw ParseError(lineno, "missing header (mode count and sizes)");
  return SparseTensor(std::move(shape), std::move(indices), std::move(values));
}

SparseTensor read_coo_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_coo(in);
}

void write_coo(std::ostream& out, const SparseTensor& t) {
  out << t.order() << '\n';
  for (std::size_t n = 0; n < t.order(); ++n) out << (n ? " " : "") << t.dim(n);
  out << '\n';
  for (std::size_t e = 0; e < t.nnz(); ++e) {
    for (Index i : t.index(e)) out << i << ' ';
    out << format_double(t.value(e)) << '\n';
  }
}

void write_coo_file(const std::filesystem::path& path, const SparseTensor& t) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_coo(out, t);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

}  // namespace kltensor
