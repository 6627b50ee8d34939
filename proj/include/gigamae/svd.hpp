#pragma once

#include "gigamae/tensor.hpp"

namespace gigamae {

struct SvdResult {
    MatD u;                // n x k, orthonormal columns
    std::vector<double> s; // non-negative, non-increasing
    MatD v;                // d x k, orthonormal columns
};

// Forward-only truncated SVD via eigendecomposition of the smaller Gram
// matrix. Signs are canonicalized so the largest-magnitude loading of each
// right singular vector is positive.
SvdResult svd_topk(const MatD& m, int k);

}  // namespace gigamae
