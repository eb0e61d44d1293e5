#pragma once

// Matrix Market coordinate format, real general, 1-based indices.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "emqs/incidence.hpp"
#include "emqs/error.hpp"

namespace emqs::mm {

/// Explicitly stored entries, sorted by (row, col).
inline std::vector<Triplet> canonical_triplets(const SparseMatrix& m) {
  std::vector<Triplet> t;
  t.reserve(std::size_t(m.nonZeros()));
  for (Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
      t.emplace_back(it.row(), it.col(), it.value());
  std::sort(t.begin(), t.end(), [](const Triplet& a, const Triplet& b) {
    return std::tie(a.row(), a.col()) < std::tie(b.row(), b.col());
  });
  return t;
}

inline void write(std::ostream& os, const SparseMatrix& m, const std::string& comment = {}) {
  os << "%%MatrixMarket matrix coordinate real general\n";
  if (!comment.empty()) {
    std::istringstream lines(comment);
    for (std::string line; std::getline(lines, line);) os << "% " << line << '\n';
  }
  const auto t = canonical_triplets(m);
  os << m.rows() << ' ' << m.cols() << ' ' << t.size() << '\n';
  char buf[64];
  for (const auto& e : t) {
    // %.17g round-trips every double exactly.
    std::snprintf(buf, sizeof buf, "%.17g", e.value());
    os << e.row() + 1 << ' ' << e.col() + 1 << ' ' << buf << '\n';
  }
}

inline void write_file(const std::string& path, const SparseMatrix& m,
                       const std::string& comment = {}) {
  std::ofstream f(path);
  if (!f) throw Error("cannot open '" + path + "' for writing");
  write(f, m, comment);
  if (!f) throw Error("write to '" + path + "' failed");
}

inline SparseMatrix read(std::istream& is, const std::string& origin = "<stream>") {
  std::string line;
  if (!std::getline(is, line)) throw Error(origin + ": empty Matrix Market file");
  std::istringstream hdr(line);
  std::string banner, object, format, field, symmetry;
  hdr >> banner >> object >> format >> field >> symmetry;
  auto lower = [](std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s;
  };
  if (banner != "%%MatrixMarket" || lower(object) != "matrix" || lower(format) != "coordinate")
    throw Error(origin + ": expected a '%%MatrixMarket matrix coordinate' header");
  if (lower(field) != "real" && lower(field) != "integer")
    throw Error(origin + ": unsupported field '" + field + "'");
  if (lower(symmetry) != "general")
    throw Error(origin + ": unsupported symmetry '" + symmetry + "'");

  while (std::getline(is, line))
    if (!line.empty() && line[0] != '%') break;
  Index rows = 0, cols = 0, nnz = 0;
  {
    std::istringstream sz(line);
    if (!(sz >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0)
      throw Error(origin + ": malformed size line");
  }
  std::vector<Triplet> t;
  t.reserve(std::size_t(nnz));
  for (Index k = 0; k < nnz; ++k) {
    Index r = 0, c = 0;
    double v = 0.0;
    if (!(is >> r >> c >> v))
      throw Error(origin + ": expected " + std::to_string(nnz) + " entries, got " +
                  std::to_string(k));
    if (r < 1 || r > rows || c < 1 || c > cols)
      throw Error(origin + ": entry " + std::to_string(k + 1) + " is out of range");
    t.emplace_back(r - 1, c - 1, v);
  }
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  m.makeCompressed();
  return m;
}

inline SparseMatrix read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error("cannot open '" + path + "'");
  return read(f, path);
}

}  // namespace emqs::mm
