#pragma once

// Matrix Market exchange format: dense `array` and sparse `coordinate`
// layouts, `real` and `complex` fields, `general` symmetry (plus `symmetric`,
// `skew-symmetric` and `hermitian` on input). The writer always emits dense
// arrays with 17 significant digits so values round-trip bit-exactly.

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "rkp/matrix.hpp"

namespace rkp {

enum class MmField { Real, Complex };

namespace detail {

inline std::string lower(std::string s) {
  for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

struct MmHeader {
  bool coordinate = false;
  MmField field = MmField::Real;
  std::string symmetry = "general";
};

inline MmHeader parse_header(const std::string& line) {
  std::istringstream hs(line);
  std::string banner, object, format, field, symmetry;
  hs >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket" || lower(object) != "matrix")
    throw Error(ErrorKind::Parse, "missing %%MatrixMarket matrix banner");
  MmHeader h;
  format = lower(format);
  field = lower(field);
  h.symmetry = lower(symmetry);
  if (format == "coordinate") h.coordinate = true;
  else if (format != "array") throw Error(ErrorKind::Parse, "unsupported format '" + format + "'");
  if (field == "real" || field == "double" || field == "integer") h.field = MmField::Real;
  else if (field == "complex") h.field = MmField::Complex;
  else throw Error(ErrorKind::Parse, "unsupported field '" + field + "'");
  if (h.symmetry != "general" && h.symmetry != "symmetric" && h.symmetry != "skew-symmetric" &&
      h.symmetry != "hermitian")
    throw Error(ErrorKind::Parse, "unsupported symmetry '" + h.symmetry + "'");
  return h;
}

template <Scalar T>
T read_value(std::istream& in, MmField field) {
  double re = 0.0, im = 0.0;
  if (!(in >> re)) throw Error(ErrorKind::Parse, "truncated matrix data");
  if (field == MmField::Complex && !(in >> im)) throw Error(ErrorKind::Parse, "truncated complex entry");
  if constexpr (is_complex_v<T>) {
    return {re, im};
  } else {
    if (im != 0.0) throw Error(ErrorKind::Parse, "complex entry in a real matrix");
    return re;
  }
}

template <Scalar T>
void mirror(Matrix<T>& m, index_t i, index_t j, const std::string& symmetry) {
  if (i == j || symmetry == "general") return;
  if (symmetry == "symmetric") m(j, i) = m(i, j);
  else if (symmetry == "skew-symmetric") m(j, i) = -m(i, j);
  else m(j, i) = conj(m(i, j));
}

}  // namespace detail

/// Field declared in a Matrix Market stream's banner, without consuming data.
inline MmField peek_matrix_market_field(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  std::string line;
  std::getline(in, line);
  return detail::parse_header(line).field;
}

template <Scalar T>
Matrix<T> read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw Error(ErrorKind::Parse, "empty Matrix Market stream");
  const detail::MmHeader h = detail::parse_header(line);
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '%') continue;
    break;
  }
  std::istringstream size_line(line);
  index_t rows = 0, cols = 0, nnz = 0;
  if (!(size_line >> rows >> cols) || rows < 0 || cols < 0)
    throw Error(ErrorKind::Parse, "bad size line '" + line + "'");
  if (h.coordinate && !(size_line >> nnz)) throw Error(ErrorKind::Parse, "coordinate size line lacks nnz");

  Matrix<T> m(rows, cols);
  const bool general = h.symmetry == "general";
  if (h.coordinate) {
    for (index_t e = 0; e < nnz; ++e) {
      index_t i = 0, j = 0;
      if (!(in >> i >> j)) throw Error(ErrorKind::Parse, "truncated coordinate entry");
      if (i < 1 || i > rows || j < 1 || j > cols) throw Error(ErrorKind::Parse, "coordinate index out of range");
      m(i - 1, j - 1) = detail::read_value<T>(in, h.field);
      detail::mirror(m, i - 1, j - 1, h.symmetry);
    }
  } else {
    for (index_t j = 0; j < cols; ++j) {
      for (index_t i = general ? 0 : j; i < rows; ++i) {
        if (h.symmetry == "skew-symmetric" && i == j) continue;
        m(i, j) = detail::read_value<T>(in, h.field);
        detail::mirror(m, i, j, h.symmetry);
      }
    }
  }
  for (const T& v : m.data())
    if (!is_finite(v)) throw Error(ErrorKind::NonFinite, "non-finite Matrix Market entry");
  return m;
}

template <Scalar T>
Matrix<T> read_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path + "'");
  return read_matrix_market<T>(in);
}

template <Scalar T>
void write_matrix_market(std::ostream& out, const Matrix<T>& m) {
  out << "%%MatrixMarket matrix array " << (is_complex_v<T> ? "complex" : "real") << " general\n";
  out << m.rows() << ' ' << m.cols() << '\n';
  for (index_t j = 0; j < m.cols(); ++j) {
    for (index_t i = 0; i < m.rows(); ++i) {
      if constexpr (is_complex_v<T>) {
        out << detail::format_double(m(i, j).real()) << ' ' << detail::format_double(m(i, j).imag()) << '\n';
      } else {
        out << detail::format_double(m(i, j)) << '\n';
      }
    }
  }
}

template <Scalar T>
void write_matrix_market(const std::string& path, const Matrix<T>& m) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
  write_matrix_market(out, m);
  if (!out) throw Error(ErrorKind::Io, "write to '" + path + "' failed");
}

}  // namespace rkp
