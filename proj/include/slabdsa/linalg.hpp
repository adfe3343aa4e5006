#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <iosfwd>
#include <vector>

namespace slabdsa {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;
using Triplets = std::vector<Triplet>;

// Angular flux, one block of length n_dofs per direction.
using AngularFlux = std::vector<Vec>;

// 2-norm condition number from singular values.
double cond2(const Mat& a);

// Spectral norm.
double norm2(const Mat& a);

// Max-abs entry; 0 for empty matrices.
double max_abs(const Mat& a);
double max_abs(const SpMat& a);

// Coordinate Matrix Market, real general, 1-based indices, 17 significant digits.
void write_matrix_market(const SpMat& a, std::ostream& out);
SpMat read_matrix_market(std::istream& in);

// Drops explicit zeros below tol relative to the largest entry.
SpMat pruned(const SpMat& a, double rel_tol = 0.0);

}  // namespace slabdsa
