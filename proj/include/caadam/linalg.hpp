#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>
#include <span>
#include <vector>

namespace caadam {

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
    Matrix(std::initializer_list<std::initializer_list<double>> rows);

    static Matrix zeros_like(const Matrix& other) { return Matrix(other.rows_, other.cols_); }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> values() noexcept { return data_; }
    std::span<const double> values() const noexcept { return data_; }
    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    bool same_shape(const Matrix& other) const noexcept {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }
    bool all_finite() const noexcept;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class ElementOp { add, sub, mul, div };

/// Matrix product. Throws ShapeError when a.cols() != b.rows().
Matrix matmul(const Matrix& a, const Matrix& b);

/// a^T * b without materializing the transpose.
Matrix matmul_at_b(const Matrix& a, const Matrix& b);

/// a * b^T without materializing the transpose.
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

/// Pointwise arithmetic on equally shaped matrices. Division producing a
/// non-finite value throws NonFiniteError.
Matrix elementwise(const Matrix& a, const Matrix& b, ElementOp op);

Matrix transpose(const Matrix& a);

/// Rows of `source` selected by `indices`, in order.
Matrix gather_rows(const Matrix& source, std::span<const std::size_t> indices);

/// Deterministic random source.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard (the 10000th draw from the default seed 5489 is
/// 9981545732273789042). Every derived quantity (uniform doubles, bounded
/// integers, normals) is computed here from raw 64-bit draws rather than via
/// the <random> distributions, whose algorithms differ between standard
/// library implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

    std::uint64_t seed() const noexcept { return seed_; }
    std::uint64_t next_u64() { return engine_(); }

    /// Uniform double in [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, bound) without modulo bias.
    std::uint64_t below(std::uint64_t bound);
    /// Standard normal via Box-Muller.
    double normal();

    /// Independent child generator for a named stream. The child seed depends
    /// only on this generator's seed and `stream`, never on how many values
    /// have been drawn.
    Rng split(std::uint64_t stream) const;

    /// Fisher-Yates shuffle driven by below().
    void shuffle(std::span<std::size_t> items);

private:
    std::uint64_t seed_;
    std::mt19937_64 engine_;
    bool has_spare_normal_ = false;
    double spare_normal_ = 0.0;
};

/// SplitMix64 finalizer, used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x) noexcept;

/// Glorot/Xavier uniform initialization: entries in [-L, L] with
/// L = sqrt(6 / (fan_in + fan_out)). Shape (fan_in, fan_out).
Matrix glorot_uniform(Rng& rng, std::size_t fan_in, std::size_t fan_out);

}  // namespace caadam
