#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace gigamae {

// 64-byte-aligned allocator for matrix storage. Eigen's vectorized kernels
// peel loop heads/tails based on the runtime address; pinning the alignment
// keeps floating-point summation order independent of heap layout, which
// makes repeated runs bit-identical.
template <typename T>
struct AlignedAlloc {
    using value_type = T;
    static constexpr std::size_t alignment = 64;

    AlignedAlloc() = default;
    template <typename U>
    AlignedAlloc(const AlignedAlloc<U>&) {}

    T* allocate(std::size_t n) {
        return static_cast<T*>(::operator new(n * sizeof(T), std::align_val_t(alignment)));
    }
    void deallocate(T* p, std::size_t) noexcept {
        ::operator delete(p, std::align_val_t(alignment));
    }
    bool operator==(const AlignedAlloc&) const { return true; }
    bool operator!=(const AlignedAlloc&) const { return false; }
};

// Dense row-major matrix. Scalar is double in tests/oracles, float in the
// optional training fast path.
template <typename S>
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<S, AlignedAlloc<S>> d;

    Mat() = default;
    Mat(int r, int c, S fill = S(0)) : rows(r), cols(c), d(size_t(r) * c, fill) {}

    S& operator()(int i, int j) { return d[size_t(i) * cols + j]; }
    S operator()(int i, int j) const { return d[size_t(i) * cols + j]; }

    size_t size() const { return d.size(); }

    using EigenMat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    Eigen::Map<EigenMat> map() { return {d.data(), rows, cols}; }
    Eigen::Map<const EigenMat> map() const { return {d.data(), rows, cols}; }

    bool all_finite() const {
        for (S v : d)
            if (!std::isfinite(double(v))) return false;
        return true;
    }

    static Mat zeros(int r, int c) { return Mat(r, c); }

    static Mat identity(int n) {
        Mat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = S(1);
        return m;
    }

    template <typename Rng>
    static Mat randn(int r, int c, Rng& rng, double stddev = 1.0) {
        std::normal_distribution<double> dist(0.0, stddev);
        Mat m(r, c);
        for (auto& v : m.d) v = S(dist(rng));
        return m;
    }

    template <typename T>
    Mat<T> cast() const {
        Mat<T> m(rows, cols);
        for (size_t i = 0; i < d.size(); ++i) m.d[i] = T(d[i]);
        return m;
    }
};

using MatD = Mat<double>;
using MatF = Mat<float>;

// splitmix64; used to derive independent sub-seeds from the one global seed.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace gigamae
