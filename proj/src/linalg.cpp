#include "slabdsa/linalg.hpp"

#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include "slabdsa/errors.hpp"

namespace slabdsa {

double cond2(const Mat& a) {
  Eigen::JacobiSVD<Mat> svd(a);
  const auto& s = svd.singularValues();
  if (s.size() == 0) return 1.0;
  const double smin = s(s.size() - 1);
  if (smin == 0.0) return std::numeric_limits<double>::infinity();
  return s(0) / smin;
}

double norm2(const Mat& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Mat> svd(a);
  return svd.singularValues()(0);
}

double max_abs(const Mat& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

double max_abs(const SpMat& a) {
  double m = 0.0;
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

void write_matrix_market(const SpMat& a, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << a.rows() << ' ' << a.cols() << ' ' << a.nonZeros() << '\n';
  char buf[64];
  // Row-major traversal keeps the file independent of the storage order.
  Eigen::SparseMatrix<double, Eigen::RowMajor> r(a);
  for (int i = 0; i < r.outerSize(); ++i) {
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(r, i); it; ++it) {
      std::snprintf(buf, sizeof buf, "%.16e", it.value());
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << buf << '\n';
    }
  }
}

SpMat read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("%%MatrixMarket", 0) != 0)
    fail(ErrorCode::Io, "missing Matrix Market banner");
  if (line.find("coordinate") == std::string::npos || line.find("real") == std::string::npos)
    fail(ErrorCode::Io, "only coordinate real matrices are supported");
  while (std::getline(in, line) && !line.empty() && line[0] == '%') {
  }
  std::istringstream hdr(line);
  long rows = 0, cols = 0, nnz = 0;
  if (!(hdr >> rows >> cols >> nnz)) fail(ErrorCode::Io, "bad Matrix Market size line");
  Triplets t;
  t.reserve(nnz);
  for (long k = 0; k < nnz; ++k) {
    long i = 0, j = 0;
    double v = 0.0;
    if (!(in >> i >> j >> v)) fail(ErrorCode::Io, "truncated Matrix Market data");
    t.emplace_back(static_cast<int>(i - 1), static_cast<int>(j - 1), v);
  }
  SpMat a(rows, cols);
  a.setFromTriplets(t.begin(), t.end());
  return a;
}

SpMat pruned(const SpMat& a, double rel_tol) {
  SpMat b = a;
  const double ref = rel_tol * max_abs(a);
  b.prune([ref](int, int, double v) { return std::abs(v) > ref; });
  return b;
}

}  // namespace slabdsa
