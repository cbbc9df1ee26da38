#include "kltensor/model_io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "kltensor/coo_io.hpp"

namespace kltensor {

namespace {

constexpr std::string_view kMagic = "kltensor-model";

struct Line {
  std::size_t number = 0;
  std::vector<std::string> tokens;
};

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  Line next() {
    Line line;
    if (!try_next(line)) throw ParseError(lineno_, "unexpected end of model file");
    return line;
  }

  bool try_next(Line& out) {
    for (std::string raw; std::getline(in_, raw);) {
      ++lineno_;
      const auto pos = raw.find_first_not_of(" \t\r");
      if (pos == std::string::npos || raw[pos] == '#') continue;
      std::istringstream ss(raw);
      out.tokens.clear();
      for (std::string tok; ss >> tok;) out.tokens.push_back(tok);
      out.number = lineno_;
      return true;
    }
    return false;
  }

 private:
  std::istream& in_;
  std::size_t lineno_ = 0;
};

std::size_t to_size(const std::string& tok, std::size_t line) {
  std::size_t v = 0;
  auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
    throw ParseError(line, "invalid integer '" + tok + "'");
  }
  return v;
}

void expect_keyword(const Line& line, std::string_view keyword, std::size_t min_tokens) {
  if (line.tokens.empty() || line.tokens[0] != keyword || line.tokens.size() < min_tokens) {
    throw ParseError(line.number, "expected '" + std::string(keyword) + "'");
  }
}

}  // namespace

void write_model(std::ostream& out, const ModelFile& file) {
  const CpdModel& m = file.model;
  out << kMagic << ' ' << kModelFormatVersion << '\n';
  out << "shape";
  for (std::size_t d : m.shape()) out << ' ' << d;
  out << "\nrank " << m.rank() << "\nweights";
  for (Eigen::Index k = 0; k < m.weights().size(); ++k) out << ' ' << format_double(m.weights()[k]);
  out << '\n';
  if (file.labels) {
    if (file.labels->size() != m.rank()) throw std::invalid_argument("one label per component");
    out << "labels";
    for (const auto& l : *file.labels) {
      if (l.empty() || l.find_first_of(" \t\r\n") != std::string::npos) {
        throw std::invalid_argument("labels must be non-empty and contain no whitespace");
      }
      out << ' ' << l;
    }
    out << '\n';
  }
  for (std::size_t n = 0; n < m.order(); ++n) {
    out << "factor " << n << '\n';
    for (std::size_t k = 0; k < m.rank(); ++k) {
      const auto col = m.column(n, k);
      for (std::size_t j = 0; j < col.size(); ++j) out << (j ? " " : "") << format_double(col[j]);
      out << '\n';
    }
  }
  if (file.binspec) {
    out << "binspec " << file.binspec->features.size() << '\n';
    for (const auto& f : file.binspec->features) {
      out << f.name << ' ' << format_double(f.min) << ' ' << format_double(f.width) << ' '
          << f.count << '\n';
    }
  }
  out << "end\n";
}

void write_model_file(const std::filesystem::path& path, const ModelFile& file) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_model(out, file);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

ModelFile read_model(std::istream& in) {
  LineReader reader(in);

  Line line = reader.next();
  if (line.tokens.size() != 2 || line.tokens[0] != kMagic) {
    throw ParseError(line.number, "not a kltensor model file");
  }
  if (to_size(line.tokens[1], line.number) != kModelFormatVersion) {
    throw ParseError(line.number, "unsupported model format version " + line.tokens[1]);
  }

  line = reader.next();
  expect_keyword(line, "shape", 2);
  std::vector<std::size_t> shape;
  for (std::size_t i = 1; i < line.tokens.size(); ++i) {
    shape.push_back(to_size(line.tokens[i], line.number));
  }

  line = reader.next();
  expect_keyword(line, "rank", 2);
  const std::size_t rank = to_size(line.tokens[1], line.number);
  if (rank == 0) throw ParseError(line.number, "rank must be positive");

  line = reader.next();
  expect_keyword(line, "weights", 1);
  if (line.tokens.size() != rank + 1) throw ParseError(line.number, "expected one weight per component");
  Eigen::VectorXd weights(static_cast<Eigen::Index>(rank));
  for (std::size_t k = 0; k < rank; ++k) {
    weights[static_cast<Eigen::Index>(k)] = parse_double(line.tokens[k + 1], line.number);
  }

  std::optional<std::vector<std::string>> labels;
  line = reader.next();
  if (!line.tokens.empty() && line.tokens[0] == "labels") {
    if (line.tokens.size() != rank + 1) throw ParseError(line.number, "expected one label per component");
    labels.emplace(line.tokens.begin() + 1, line.tokens.end());
    line = reader.next();
  }

  std::vector<Eigen::MatrixXd> factors;
  for (std::size_t n = 0; n < shape.size(); ++n) {
    if (n > 0) line = reader.next();
    expect_keyword(line, "factor", 2);
    if (to_size(line.tokens[1], line.number) != n) {
      throw ParseError(line.number, "factors must appear in mode order");
    }
    Eigen::MatrixXd f(static_cast<Eigen::Index>(shape[n]), static_cast<Eigen::Index>(rank));
    for (std::size_t k = 0; k < rank; ++k) {
      const Line col = reader.next();
      if (col.tokens.size() != shape[n]) {
        throw ParseError(col.number, "expected " + std::to_string(shape[n]) + " column values");
      }
      for (std::size_t j = 0; j < shape[n]; ++j) {
        f(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)) =
            parse_double(col.tokens[j], col.number);
      }
    }
    factors.push_back(std::move(f));
  }

  std::optional<BinSpec> binspec;
  line = reader.next();
  if (!line.tokens.empty() && line.tokens[0] == "binspec") {
    expect_keyword(line, "binspec", 2);
    const std::size_t features = to_size(line.tokens[1], line.number);
    std::ostringstream body;
    std::vector<std::size_t> numbers;
    for (std::size_t f = 0; f < features; ++f) {
      const Line fl = reader.next();
      numbers.push_back(fl.number);
      for (const auto& tok : fl.tokens) body << tok << ' ';
      body << '\n';
    }
    std::istringstream body_in(body.str());
    try {
      binspec = read_binspec(body_in);
    } catch (const ParseError& e) {
      const std::size_t at = e.line() >= 1 && e.line() <= numbers.size() ? numbers[e.line() - 1]
                                                                         : line.number;
      throw ParseError(at, e.detail());
    }
    line = reader.next();
  }
  expect_keyword(line, "end", 1);

  try {
    return ModelFile{CpdModel(std::move(shape), std::move(weights), std::move(factors)),
                     std::move(labels), std::move(binspec)};
  } catch (const std::invalid_argument& e) {
    throw ParseError(0, std::string("invalid model: ") + e.what());
  }
}

ModelFile read_model_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_model(in);
}

ModelFile to_model_file(const ClassConditionalModel& model) {
  return ModelFile{to_cpd_model(model), model.labels, model.binspec};
}

ClassConditionalModel to_classifier(const ModelFile& file) {
  if (!file.binspec) throw std::invalid_argument("model has no bin spec attached");
  if (file.binspec->shape() != file.model.shape()) {
    throw std::invalid_argument("bin spec does not match the model shape");
  }
  ClassConditionalModel out = from_unsupervised(file.model, *file.binspec);
  if (file.labels) out.labels = *file.labels;
  return out;
}

}  // namespace kltensor
