#include "sparsedyn/polynomial.hpp"

#include <cmath>

#include "sparsedyn/error.hpp"

namespace sparsedyn {
namespace {

double binomial(int n, int k) {
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// Expands c * prod_j (scale_j w_j + offset_j)^{a_j} into out.
void expand(const std::vector<int>& a, double c, std::size_t j, std::vector<int>& current, const Eigen::VectorXd& scale,
            const Eigen::VectorXd& offset, Polynomial& out) {
  if (j == a.size()) {
    out[current] += c;
    return;
  }
  const auto jj = static_cast<Eigen::Index>(j);
  for (int b = 0; b <= a[j]; ++b) {
    const double factor = binomial(a[j], b) * std::pow(scale[jj], b) * std::pow(offset[jj], a[j] - b);
    if (factor == 0.0) continue;
    current[j] = b;
    expand(a, c * factor, j + 1, current, scale, offset, out);
  }
  current[j] = 0;
}

}  // namespace

bool has_negative_exponent(const Polynomial& p) {
  for (const auto& [a, c] : p) {
    for (int e : a) {
      if (e < 0) return true;
    }
  }
  return false;
}

Polynomial affine_substitute(const Polynomial& p, const Eigen::VectorXd& scale, const Eigen::VectorXd& offset) {
  if (has_negative_exponent(p)) fail(ErrorKind::kParameter, "affine substitution needs nonnegative exponents");
  Polynomial out;
  for (const auto& [a, c] : p) {
    if (static_cast<Eigen::Index>(a.size()) != scale.size() || scale.size() != offset.size()) {
      fail(ErrorKind::kSchema, "polynomial arity does not match substitution");
    }
    std::vector<int> current(a.size(), 0);
    expand(a, c, 0, current, scale, offset, out);
  }
  return out;
}

Polynomial prune(const Polynomial& p, double rel_tol) {
  double largest = 0.0;
  for (const auto& [a, c] : p) largest = std::max(largest, std::abs(c));
  Polynomial out;
  for (const auto& [a, c] : p) {
    if (std::abs(c) > rel_tol * largest) out[a] = c;
  }
  return out;
}

}  // namespace sparsedyn
