#include "euclid/intrinsic/knn.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include "euclid/common/error.h"
#include "euclid/common/parallel.h"

namespace euclid {
namespace {

void CheckArgs(const Matrix& queries, const Matrix& references, int k,
               bool exclude_self) {
  if (queries.rows() != references.rows()) {
    throw ShapeError("knn: query and reference dimensions differ");
  }
  if (exclude_self && queries.cols() != references.cols()) {
    throw ShapeError("knn: exclude_self needs queries == references");
  }
  const Eigen::Index candidates = references.cols() - (exclude_self ? 1 : 0);
  if (k < 1 || candidates < k) {
    throw RangeError("knn: need at least k=" + std::to_string(k) +
                     " reference points, have " + std::to_string(candidates));
  }
}

// Scratch is reused across queries handled by one thread.
double QueryValue(const Matrix& queries, const Matrix& references, Eigen::Index i,
                  int k, double eps, bool exclude_self, std::vector<double>& d2) {
  d2.clear();
  for (Eigen::Index j = 0; j < references.cols(); ++j) {
    if (exclude_self && j == i) continue;
    d2.push_back((queries.col(i) - references.col(j)).squaredNorm());
  }
  std::nth_element(d2.begin(), d2.begin() + (k - 1), d2.end());
  std::sort(d2.begin(), d2.begin() + k);
  double acc = 0.0;
  for (int n = 0; n < k; ++n) acc += std::log(d2[n] + eps);
  return acc / k;
}

}  // namespace

Matrix KnnLogDistance(const Matrix& queries, const Matrix& references, int k,
                      double eps, bool exclude_self) {
  CheckArgs(queries, references, k, exclude_self);
  Matrix out(1, queries.cols());
  const Eigen::Index n = queries.cols();
#pragma omp parallel
  {
    std::vector<double> d2;
    d2.reserve(static_cast<std::size_t>(references.cols()));
#pragma omp for schedule(static)
    for (Eigen::Index i = 0; i < n; ++i) {
      out(0, i) = QueryValue(queries, references, i, k, eps, exclude_self, d2);
    }
  }
  return out;
}

Matrix KnnLogDistanceSerial(const Matrix& queries, const Matrix& references,
                            int k, double eps, bool exclude_self) {
  CheckArgs(queries, references, k, exclude_self);
  Matrix out(1, queries.cols());
  std::vector<double> d2;
  for (Eigen::Index i = 0; i < queries.cols(); ++i) {
    out(0, i) = QueryValue(queries, references, i, k, eps, exclude_self, d2);
  }
  return out;
}

}  // namespace euclid
