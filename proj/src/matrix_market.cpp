#include "kryrank/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace kryrank {

namespace {

enum class Layout { kCoordinate, kArray };
enum class Field { kReal, kInteger, kPattern };
enum class Structure { kGeneral, kSymmetric, kSkew };

struct Header {
  Layout layout;
  Field field;
  Structure structure;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); });
}

Header parse_header(const std::string& line) {
  const auto tok = split(line);
  if (tok.size() != 5 || lower(std::string(tok[0])) != "%%matrixmarket") {
    throw ParseError("expected '%%MatrixMarket matrix <format> <field> <symmetry>'", 1);
  }
  if (lower(std::string(tok[1])) != "matrix") throw ParseError("only 'matrix' objects are supported", 1);

  Header h{};
  const std::string layout = lower(std::string(tok[2]));
  if (layout == "coordinate") {
    h.layout = Layout::kCoordinate;
  } else if (layout == "array") {
    h.layout = Layout::kArray;
  } else {
    throw ParseError("unknown format '" + std::string(tok[2]) + "'", 1);
  }

  const std::string field = lower(std::string(tok[3]));
  if (field == "complex") throw UnsupportedFormat("complex Matrix Market files are not supported");
  if (field == "real" || field == "double") {
    h.field = Field::kReal;
  } else if (field == "integer") {
    h.field = Field::kInteger;
  } else if (field == "pattern") {
    h.field = Field::kPattern;
  } else {
    throw ParseError("unknown field '" + std::string(tok[3]) + "'", 1);
  }
  if (h.field == Field::kPattern && h.layout == Layout::kArray) throw ParseError("pattern field needs coordinate format", 1);

  const std::string sym = lower(std::string(tok[4]));
  if (sym == "general") {
    h.structure = Structure::kGeneral;
  } else if (sym == "symmetric") {
    h.structure = Structure::kSymmetric;
  } else if (sym == "skew-symmetric") {
    h.structure = Structure::kSkew;
  } else if (sym == "hermitian") {
    throw UnsupportedFormat("hermitian Matrix Market files are not supported");
  } else {
    throw ParseError("unknown symmetry '" + std::string(tok[4]) + "'", 1);
  }
  return h;
}

template <typename T>
T parse_number(std::string_view tok, std::size_t line) {
  T value{};
  const char* first = tok.data();
  const char* last = tok.data() + tok.size();
  if (!tok.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last) throw ParseError("bad number '" + std::string(tok) + "'", line);
  return value;
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  /// Next non-comment, non-blank line; false at end of input.
  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++number_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (blank(line) || line.front() == '%') continue;
      return true;
    }
    return false;
  }

  std::size_t number() const noexcept { return number_; }
  void set_number(std::size_t n) { number_ = n; }

 private:
  std::istream& in_;
  std::size_t number_ = 0;
};

struct Entry {
  Eigen::Index row;
  Eigen::Index col;
  double value;
  std::size_t line;
};

ObservationMatrixd read_coordinate(LineReader& reader, const Header& h, Eigen::Index rows, Eigen::Index cols,
                                   long long declared) {
  std::vector<Entry> entries;
  entries.reserve(static_cast<std::size_t>(declared) * (h.structure == Structure::kGeneral ? 1 : 2));
  const std::size_t want = h.field == Field::kPattern ? 2 : 3;
  std::string line;
  for (long long e = 0; e < declared; ++e) {
    if (!reader.next(line)) {
      throw ParseError("expected " + std::to_string(declared) + " entries, found " + std::to_string(e),
                       reader.number() + 1);
    }
    const auto tok = split(line);
    if (tok.size() != want) throw ParseError("expected " + std::to_string(want) + " fields", reader.number());
    const auto i = parse_number<long long>(tok[0], reader.number());
    const auto j = parse_number<long long>(tok[1], reader.number());
    if (i < 1 || i > rows || j < 1 || j > cols) throw ParseError("index out of range", reader.number());
    double v = 1.0;
    if (h.field == Field::kInteger) {
      v = static_cast<double>(parse_number<long long>(tok[2], reader.number()));
    } else if (h.field == Field::kReal) {
      v = parse_number<double>(tok[2], reader.number());
    }
    const Eigen::Index r = static_cast<Eigen::Index>(i - 1);
    const Eigen::Index c = static_cast<Eigen::Index>(j - 1);
    if (h.structure != Structure::kGeneral) {
      if (h.structure == Structure::kSkew && r == c) throw ParseError("skew-symmetric diagonal entry", reader.number());
      if (r != c) entries.push_back({c, r, h.structure == Structure::kSkew ? -v : v, reader.number()});
    }
    entries.push_back({r, c, v, reader.number()});
  }
  if (reader.next(line)) throw ParseError("more entries than declared", reader.number());

  std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    if (entries[k].row == entries[k - 1].row && entries[k].col == entries[k - 1].col) {
      throw ParseError("duplicate entry (" + std::to_string(entries[k].row + 1) + ", " +
                           std::to_string(entries[k].col + 1) + ")",
                       std::max(entries[k].line, entries[k - 1].line));
    }
  }
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(entries.size());
  for (const auto& e : entries) triplets.emplace_back(e.row, e.col, e.value);
  SparseRows<double> s(rows, cols);
  s.setFromTriplets(triplets.begin(), triplets.end());
  return ObservationMatrixd(std::move(s));
}

ObservationMatrixd read_array(LineReader& reader, const Header& h, Eigen::Index rows, Eigen::Index cols) {
  if (h.structure != Structure::kGeneral && rows != cols) throw ParseError("symmetric array must be square", reader.number());
  Matrix<double> m = Matrix<double>::Zero(rows, cols);
  std::string line;
  auto read_value = [&]() {
    if (!reader.next(line)) throw ParseError("too few array values", reader.number() + 1);
    const auto tok = split(line);
    if (tok.size() != 1) throw ParseError("expected one value per line", reader.number());
    return h.field == Field::kInteger ? static_cast<double>(parse_number<long long>(tok[0], reader.number()))
                                      : parse_number<double>(tok[0], reader.number());
  };
  for (Eigen::Index j = 0; j < cols; ++j) {
    const Eigen::Index first = h.structure == Structure::kGeneral ? 0 : (h.structure == Structure::kSkew ? j + 1 : j);
    for (Eigen::Index i = first; i < rows; ++i) {
      const double v = read_value();
      m(i, j) = v;
      if (h.structure == Structure::kSymmetric) m(j, i) = v;
      if (h.structure == Structure::kSkew) m(j, i) = -v;
    }
  }
  if (reader.next(line)) throw ParseError("more array values than declared", reader.number());
  return ObservationMatrixd(std::move(m));
}

}  // namespace

ObservationMatrixd read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty input", 1);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const Header h = parse_header(line);

  LineReader reader(in);
  reader.set_number(1);
  if (!reader.next(line)) throw ParseError("missing size line", reader.number() + 1);
  const auto tok = split(line);
  const std::size_t want = h.layout == Layout::kCoordinate ? 3 : 2;
  if (tok.size() != want) throw ParseError("size line needs " + std::to_string(want) + " integers", reader.number());
  const auto rows = parse_number<long long>(tok[0], reader.number());
  const auto cols = parse_number<long long>(tok[1], reader.number());
  if (rows < 1 || cols < 1) throw ParseError("matrix dimensions must be positive", reader.number());
  if (h.layout == Layout::kArray) {
    return read_array(reader, h, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  }
  const auto nnz = parse_number<long long>(tok[2], reader.number());
  if (nnz < 0 || nnz > rows * cols) throw ParseError("entry count out of range", reader.number());
  if (h.structure != Structure::kGeneral && rows != cols) throw ParseError("symmetric matrix must be square", reader.number());
  return read_coordinate(reader, h, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols), nnz);
}

ObservationMatrixd load_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  return read_matrix_market(in);
}

std::string format_double(double value, int digits) {
  char buf[64];
  const auto res = digits > 0 ? std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, digits)
                              : std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

void write_matrix_market_array(std::ostream& out, const Matrix<double>& m) {
  out << "%%MatrixMarket matrix array real general\n" << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) out << format_double(m(i, j), 17) << '\n';
}

void save_matrix_market_array(const std::filesystem::path& path, const Matrix<double>& m) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_matrix_market_array(out, m);
}

void write_matrix_market(std::ostream& out, const ObservationMatrixd& x) {
  if (!x.is_sparse()) {
    write_matrix_market_array(out, x.dense());
    return;
  }
  const auto& s = x.sparse();
  out << "%%MatrixMarket matrix coordinate real general\n"
      << s.rows() << ' ' << s.cols() << ' ' << s.nonZeros() << '\n';
  for (Eigen::Index r = 0; r < s.outerSize(); ++r) {
    for (SparseRows<double>::InnerIterator it(s, r); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << format_double(it.value(), 17) << '\n';
    }
  }
}

void save_matrix_market(const std::filesystem::path& path, const ObservationMatrixd& x) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_matrix_market(out, x);
}

}  // namespace kryrank
