#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "semigroup_lab/core.hpp"

namespace semigroup_lab::io {

enum class Format { matrix_market, csv };

inline Format parse_format(std::string_view s) {
  if (s == "mm" || s == "matrix_market" || s == "mtx") return Format::matrix_market;
  if (s == "csv") return Format::csv;
  throw InputError("unknown matrix format '" + std::string(s) + "' (expected mm or csv)");
}

inline Format format_from_path(const std::string& path) {
  auto dot = path.rfind('.');
  std::string ext = dot == std::string::npos ? "" : path.substr(dot + 1);
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == "csv") return Format::csv;
  return Format::matrix_market;
}

/// Shortest text that reads back to the same binary64: 17 significant digits.
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline bool parse_real(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

[[noreturn]] inline void parse_fail(std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << "parse error at line " << line << ": " << what;
  throw InputError(os.str());
}

inline std::vector<std::string> lower_words(const std::string& line) {
  std::vector<std::string> words;
  std::istringstream is(line);
  std::string w;
  while (is >> w) {
    std::transform(w.begin(), w.end(), w.begin(), [](unsigned char c) { return std::tolower(c); });
    words.push_back(w);
  }
  return words;
}

}  // namespace detail

/// Parses "a", "a+bi", "a-bi", "bi", "i" (j is accepted for i).
inline bool parse_complex(std::string_view token, Complex& out) {
  std::string_view s = detail::trim(token);
  if (s.empty()) return false;
  if (s.back() != 'i' && s.back() != 'j') {
    double re;
    if (!detail::parse_real(s, re)) return false;
    out = {re, 0.0};
    return true;
  }
  std::string_view body = s.substr(0, s.size() - 1);
  std::size_t split = std::string_view::npos;
  for (std::size_t k = 1; k < body.size(); ++k)
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') split = k;
  auto imag_part = [](std::string_view v, double& im) {
    if (v.empty() || v == "+") { im = 1.0; return true; }
    if (v == "-") { im = -1.0; return true; }
    return detail::parse_real(v, im);
  };
  double re = 0.0, im = 0.0;
  if (split == std::string_view::npos) {
    if (!imag_part(body, im)) return false;
  } else {
    if (!detail::parse_real(body.substr(0, split), re)) return false;
    if (!imag_part(body.substr(split), im)) return false;
  }
  out = {re, im};
  return true;
}

inline std::string format_complex(Complex z) {
  if (z.imag() == 0.0) return format_double(z.real());
  std::string im = format_double(z.imag());
  if (im.front() != '-') im.insert(im.begin(), '+');
  return format_double(z.real()) + im + "i";
}

inline LinearOperator read_matrix_market(std::istream& in, const std::string& label = {}) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) detail::parse_fail(1, "empty input");
  ++lineno;
  auto header = detail::lower_words(line);
  if (header.size() != 5 || header[0] != "%%matrixmarket" || header[1] != "matrix")
    detail::parse_fail(lineno, "expected '%%MatrixMarket matrix <layout> <field> general'");
  bool coordinate = header[2] == "coordinate";
  if (!coordinate && header[2] != "array") detail::parse_fail(lineno, "layout must be coordinate or array");
  bool complex_field = header[3] == "complex";
  if (!complex_field && header[3] != "real" && header[3] != "integer")
    detail::parse_fail(lineno, "field must be real, integer or complex");
  if (header[4] != "general") detail::parse_fail(lineno, "only general symmetry is supported");

  auto next_data_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++lineno;
      auto t = detail::trim(out);
      if (t.empty() || t.front() == '%') continue;
      return true;
    }
    return false;
  };
  auto numbers = [&](const std::string& l, std::size_t expected) {
    std::vector<double> v;
    std::istringstream is(l);
    std::string tok;
    while (is >> tok) {
      double x;
      if (!detail::parse_real(tok, x)) detail::parse_fail(lineno, "bad number '" + tok + "'");
      v.push_back(x);
    }
    if (v.size() != expected) {
      std::ostringstream os;
      os << "expected " << expected << " fields, got " << v.size();
      detail::parse_fail(lineno, os.str());
    }
    return v;
  };

  if (!next_data_line(line)) detail::parse_fail(lineno, "missing size line");
  auto size = numbers(line, coordinate ? 3 : 2);
  long rows = static_cast<long>(size[0]);
  long cols = static_cast<long>(size[1]);
  if (rows < 1 || cols < 1 || size[0] != rows || size[1] != cols) detail::parse_fail(lineno, "bad dimensions");
  if (rows != cols) {
    std::ostringstream os;
    os << "shape error: matrix is " << rows << "x" << cols << ", expected square";
    throw InputError(os.str());
  }
  Matrix m = Matrix::Zero(rows, cols);
  std::size_t width = complex_field ? 2 : 1;
  if (coordinate) {
    long nnz = static_cast<long>(size[2]);
    for (long k = 0; k < nnz; ++k) {
      if (!next_data_line(line)) detail::parse_fail(lineno, "unexpected end of entries");
      auto v = numbers(line, 2 + width);
      long i = static_cast<long>(v[0]) - 1, j = static_cast<long>(v[1]) - 1;
      if (i < 0 || j < 0 || i >= rows || j >= cols) detail::parse_fail(lineno, "index out of range");
      m(i, j) += Complex(v[2], complex_field ? v[3] : 0.0);
    }
  } else {
    for (long j = 0; j < cols; ++j)
      for (long i = 0; i < rows; ++i) {
        if (!next_data_line(line)) detail::parse_fail(lineno, "unexpected end of entries");
        auto v = numbers(line, width);
        m(i, j) = Complex(v[0], complex_field ? v[1] : 0.0);
      }
  }
  if (next_data_line(line)) detail::parse_fail(lineno, "trailing data after entries");
  return LinearOperator(std::move(m), label);
}

/// One row per line; entries are reals or "a+bi" tokens. A row with twice as many
/// columns as there are rows is read as paired real/imag columns.
inline LinearOperator read_csv(std::istream& in, const std::string& label = {}) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_of_row;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.emplace_back(detail::trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    rows.push_back(std::move(cells));
    line_of_row.push_back(lineno);
  }
  if (rows.empty()) throw InputError("parse error at line 1: empty csv");
  const std::size_t n = rows.size();
  const std::size_t width = rows.front().size();
  bool paired = width == 2 * n;
  if (!paired && width != n) {
    std::ostringstream os;
    os << "shape error: csv has " << n << " rows and " << width << " columns, expected square";
    throw InputError(os.str());
  }
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != width) {
      std::ostringstream os;
      os << "expected " << width << " columns, got " << rows[i].size();
      detail::parse_fail(line_of_row[i], os.str());
    }
    for (std::size_t j = 0; j < n; ++j) {
      Complex z;
      if (paired) {
        double re, im;
        if (!detail::parse_real(rows[i][2 * j], re) || !detail::parse_real(rows[i][2 * j + 1], im))
          detail::parse_fail(line_of_row[i], "bad real/imag pair in column " + std::to_string(2 * j + 1));
        z = {re, im};
      } else if (!parse_complex(rows[i][j], z)) {
        detail::parse_fail(line_of_row[i], "bad entry '" + rows[i][j] + "'");
      }
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = z;
    }
  }
  return LinearOperator(std::move(m), label);
}

inline void write_matrix_market(std::ostream& out, const LinearOperator& a) {
  const Matrix& m = a.matrix();
  bool complex_field = !m.imag().isZero(0.0);
  out << "%%MatrixMarket matrix array " << (complex_field ? "complex" : "real") << " general\n";
  out << m.rows() << " " << m.cols() << "\n";
  for (Eigen::Index j = 0; j < m.cols(); ++j)
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      out << format_double(m(i, j).real());
      if (complex_field) out << " " << format_double(m(i, j).imag());
      out << "\n";
    }
}

inline void write_csv(std::ostream& out, const LinearOperator& a) {
  const Matrix& m = a.matrix();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j > 0) out << ",";
      out << format_complex(m(i, j));
    }
    out << "\n";
  }
}

inline LinearOperator load_matrix(const std::string& path, Format format) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open matrix file '" + path + "'");
  return format == Format::csv ? read_csv(in, path) : read_matrix_market(in, path);
}

inline LinearOperator load_matrix(const std::string& path) { return load_matrix(path, format_from_path(path)); }

inline void save_matrix(const LinearOperator& a, const std::string& path, Format format) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write matrix file '" + path + "'");
  if (format == Format::csv) write_csv(out, a);
  else write_matrix_market(out, a);
  if (!out) throw InputError("failed writing matrix file '" + path + "'");
}

}  // namespace semigroup_lab::io
