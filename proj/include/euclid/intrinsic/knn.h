#pragma once

#include "euclid/nn/types.h"

namespace euclid {

// For each query column q, the mean over its k nearest reference columns r of
// log(|q - r|^2 + eps). Returns 1 x Q.
//
// With exclude_self the query and reference sets must be the same matrix and
// column i is never its own neighbour.
//
// Throws RangeError if fewer than k candidate references exist.
Matrix KnnLogDistance(const Matrix& queries, const Matrix& references, int k,
                      double eps, bool exclude_self = false);

// Single-threaded reference with the same contract; kept for tests and the
// benchmark.
Matrix KnnLogDistanceSerial(const Matrix& queries, const Matrix& references,
                            int k, double eps, bool exclude_self = false);

}  // namespace euclid
