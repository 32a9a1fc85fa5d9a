#pragma once

#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace msf {

/// Dense bit matrix over GF(2). Rows are packed into 64-bit words
/// (row-major), so row XOR and popcount-heavy loops stay cheap.
/// A vector is represented as a 1-row matrix. Values are immutable in
/// spirit: all free functions below leave their inputs untouched.
class BinaryMatrix {
  public:
    BinaryMatrix() = default;
    BinaryMatrix(std::size_t rows, std::size_t cols);

    static BinaryMatrix identity(std::size_t n);
    /// 1-row matrix with ones at the given column indices.
    static BinaryMatrix row_vector(std::size_t cols, std::span<const std::size_t> support);
    static BinaryMatrix row_vector(std::size_t cols, std::initializer_list<std::size_t> support);

    /// Parses the text literal format: one row per line, characters '0'/'1',
    /// no separators. Throws std::invalid_argument on ragged or bad input.
    static BinaryMatrix parse(const std::string& text);
    std::string to_text() const;

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    bool get(std::size_t r, std::size_t c) const;
    void set(std::size_t r, std::size_t c, bool v);

    std::size_t row_weight(std::size_t r) const;
    std::vector<std::size_t> row_support(std::size_t r) const;
    std::span<const std::uint64_t> row_words(std::size_t r) const;

    void xor_row_into(std::size_t src, std::size_t dst);
    void xor_row_into(const BinaryMatrix& other, std::size_t src, std::size_t dst);
    void swap_rows(std::size_t a, std::size_t b);

    BinaryMatrix transposed() const;
    BinaryMatrix row_slice(std::size_t first, std::size_t count) const;
    /// [this; below] vertical stack.
    BinaryMatrix stacked(const BinaryMatrix& below) const;

    /// Mod-2 matrix product.
    BinaryMatrix operator*(const BinaryMatrix& rhs) const;
    /// Entrywise XOR (mod-2 sum).
    BinaryMatrix operator+(const BinaryMatrix& rhs) const;
    bool operator==(const BinaryMatrix& rhs) const = default;

    bool is_zero() const;

    /// GF(2) inner product of row r with the single row of v.
    bool row_dot(std::size_t r, const BinaryMatrix& v) const;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::size_t wpr_ = 0;  // words per row
    std::vector<std::uint64_t> bits_;

    void check_bounds(std::size_t r, std::size_t c) const;
};

/// GF(2) rank via row reduction on a scratch copy.
std::size_t rank(const BinaryMatrix& m);

/// Reduced row-echelon form; canonical for a given row span, zero rows last.
BinaryMatrix row_echelon(const BinaryMatrix& m);

/// Basis of {g : m * g^T = 0 (mod 2)}, one basis vector per row.
/// Row count is cols(m) - rank(m); a full-rank square input yields a
/// 0-row matrix.
BinaryMatrix nullspace_basis(const BinaryMatrix& m);

enum class SolveSide { left, right };

/// Solves X*a = b (left) or a*X = b (right) over GF(2). Underdetermined
/// systems return an arbitrary valid solution (free variables set to 0);
/// returns nullopt when b is outside the relevant span.
std::optional<BinaryMatrix> solve_linear(const BinaryMatrix& a, const BinaryMatrix& b, SolveSide side);

/// True when every row of v lies in the row span of m.
bool in_row_span(const BinaryMatrix& m, const BinaryMatrix& v);

}  // namespace msf
