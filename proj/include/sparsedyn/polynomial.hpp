#pragma once

#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace sparsedyn {

// Sparse polynomial: exponent vector -> coefficient. Exponents may be
// negative only in inputs to functions that say so.
using Polynomial = std::map<std::vector<int>, double>;

// Substitutes v_j = scale_j * w_j + offset_j into p and expands. Every
// exponent must be nonnegative; throws a parameter error otherwise.
Polynomial affine_substitute(const Polynomial& p, const Eigen::VectorXd& scale, const Eigen::VectorXd& offset);

// Drops coefficients whose magnitude is at most rel_tol times the largest.
Polynomial prune(const Polynomial& p, double rel_tol);

bool has_negative_exponent(const Polynomial& p);

}  // namespace sparsedyn
