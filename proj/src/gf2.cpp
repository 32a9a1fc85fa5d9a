#include "msf/gf2.hpp"

#include <bit>
#include <sstream>
#include <stdexcept>

namespace msf {

BinaryMatrix::BinaryMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), wpr_((cols + 63) / 64), bits_(rows * ((cols + 63) / 64), 0) {}

BinaryMatrix BinaryMatrix::identity(std::size_t n) {
    BinaryMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

BinaryMatrix BinaryMatrix::row_vector(std::size_t cols, std::span<const std::size_t> support) {
    BinaryMatrix m(1, cols);
    for (std::size_t c : support) m.set(0, c, true);
    return m;
}

BinaryMatrix BinaryMatrix::row_vector(std::size_t cols, std::initializer_list<std::size_t> support) {
    return row_vector(cols, std::span<const std::size_t>(support.begin(), support.size()));
}

BinaryMatrix BinaryMatrix::parse(const std::string& text) {
    std::vector<std::string> lines;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) throw std::invalid_argument("BinaryMatrix::parse: empty input");
    BinaryMatrix m(lines.size(), lines[0].size());
    for (std::size_t r = 0; r < lines.size(); ++r) {
        if (lines[r].size() != m.cols_) throw std::invalid_argument("BinaryMatrix::parse: ragged rows");
        for (std::size_t c = 0; c < m.cols_; ++c) {
            char ch = lines[r][c];
            if (ch != '0' && ch != '1') throw std::invalid_argument("BinaryMatrix::parse: bad character");
            if (ch == '1') m.set(r, c, true);
        }
    }
    return m;
}

std::string BinaryMatrix::to_text() const {
    std::string out;
    out.reserve(rows_ * (cols_ + 1));
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) out += get(r, c) ? '1' : '0';
        out += '\n';
    }
    return out;
}

void BinaryMatrix::check_bounds(std::size_t r, std::size_t c) const {
    if (r >= rows_ || c >= cols_) throw std::out_of_range("BinaryMatrix: index out of range");
}

bool BinaryMatrix::get(std::size_t r, std::size_t c) const {
    check_bounds(r, c);
    return (bits_[r * wpr_ + c / 64] >> (c % 64)) & 1u;
}

void BinaryMatrix::set(std::size_t r, std::size_t c, bool v) {
    check_bounds(r, c);
    std::uint64_t& w = bits_[r * wpr_ + c / 64];
    std::uint64_t mask = std::uint64_t(1) << (c % 64);
    w = v ? (w | mask) : (w & ~mask);
}

std::size_t BinaryMatrix::row_weight(std::size_t r) const {
    std::size_t w = 0;
    for (std::size_t i = 0; i < wpr_; ++i) w += std::popcount(bits_[r * wpr_ + i]);
    return w;
}

std::vector<std::size_t> BinaryMatrix::row_support(std::size_t r) const {
    std::vector<std::size_t> out;
    for (std::size_t c = 0; c < cols_; ++c)
        if (get(r, c)) out.push_back(c);
    return out;
}

std::span<const std::uint64_t> BinaryMatrix::row_words(std::size_t r) const {
    return {bits_.data() + r * wpr_, wpr_};
}

void BinaryMatrix::xor_row_into(std::size_t src, std::size_t dst) {
    for (std::size_t i = 0; i < wpr_; ++i) bits_[dst * wpr_ + i] ^= bits_[src * wpr_ + i];
}

void BinaryMatrix::xor_row_into(const BinaryMatrix& other, std::size_t src, std::size_t dst) {
    if (other.cols_ != cols_) throw std::invalid_argument("xor_row_into: column mismatch");
    for (std::size_t i = 0; i < wpr_; ++i) bits_[dst * wpr_ + i] ^= other.bits_[src * wpr_ + i];
}

void BinaryMatrix::swap_rows(std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t i = 0; i < wpr_; ++i) std::swap(bits_[a * wpr_ + i], bits_[b * wpr_ + i]);
}

BinaryMatrix BinaryMatrix::transposed() const {
    BinaryMatrix t(cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
        for (std::size_t c = 0; c < cols_; ++c)
            if (get(r, c)) t.set(c, r, true);
    return t;
}

BinaryMatrix BinaryMatrix::row_slice(std::size_t first, std::size_t count) const {
    if (first + count > rows_) throw std::out_of_range("row_slice: out of range");
    BinaryMatrix m(count, cols_);
    for (std::size_t r = 0; r < count; ++r)
        for (std::size_t i = 0; i < wpr_; ++i) m.bits_[r * wpr_ + i] = bits_[(first + r) * wpr_ + i];
    return m;
}

BinaryMatrix BinaryMatrix::stacked(const BinaryMatrix& below) const {
    if (below.cols_ != cols_) throw std::invalid_argument("stacked: column mismatch");
    BinaryMatrix m(rows_ + below.rows_, cols_);
    std::copy(bits_.begin(), bits_.end(), m.bits_.begin());
    std::copy(below.bits_.begin(), below.bits_.end(), m.bits_.begin() + rows_ * wpr_);
    return m;
}

BinaryMatrix BinaryMatrix::operator*(const BinaryMatrix& rhs) const {
    if (cols_ != rhs.rows_) throw std::invalid_argument("operator*: dimension mismatch");
    BinaryMatrix out(rows_, rhs.cols_);
    for (std::size_t r = 0; r < rows_; ++r) {
        for (std::size_t c = 0; c < cols_; ++c) {
            if (get(r, c)) out.xor_row_into(rhs, c, r);
        }
    }
    return out;
}

BinaryMatrix BinaryMatrix::operator+(const BinaryMatrix& rhs) const {
    if (rows_ != rhs.rows_ || cols_ != rhs.cols_) throw std::invalid_argument("operator+: shape mismatch");
    BinaryMatrix out = *this;
    for (std::size_t i = 0; i < bits_.size(); ++i) out.bits_[i] ^= rhs.bits_[i];
    return out;
}

bool BinaryMatrix::is_zero() const {
    for (std::uint64_t w : bits_)
        if (w) return false;
    return true;
}

bool BinaryMatrix::row_dot(std::size_t r, const BinaryMatrix& v) const {
    if (v.rows() != 1 || v.cols() != cols_) throw std::invalid_argument("row_dot: shape mismatch");
    std::uint64_t acc = 0;
    auto a = row_words(r);
    auto b = v.row_words(0);
    for (std::size_t i = 0; i < wpr_; ++i) acc ^= a[i] & b[i];
    return std::popcount(acc) & 1u;
}

namespace {

// In-place row echelon reduction; returns the pivot column per pivot row.
std::vector<std::size_t> reduce(BinaryMatrix& m) {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
        std::size_t sel = row;
        while (sel < m.rows() && !m.get(sel, col)) ++sel;
        if (sel == m.rows()) continue;
        m.swap_rows(sel, row);
        for (std::size_t r = 0; r < m.rows(); ++r) {
            if (r != row && m.get(r, col)) m.xor_row_into(row, r);
        }
        pivots.push_back(col);
        ++row;
    }
    return pivots;
}

}  // namespace

std::size_t rank(const BinaryMatrix& m) {
    BinaryMatrix scratch = m;
    return reduce(scratch).size();
}

BinaryMatrix row_echelon(const BinaryMatrix& m) {
    BinaryMatrix scratch = m;
    reduce(scratch);
    return scratch;
}

BinaryMatrix nullspace_basis(const BinaryMatrix& m) {
    BinaryMatrix scratch = m;
    std::vector<std::size_t> pivots = reduce(scratch);
    std::vector<bool> is_pivot(m.cols(), false);
    for (std::size_t c : pivots) is_pivot[c] = true;

    BinaryMatrix basis(m.cols() - pivots.size(), m.cols());
    std::size_t out = 0;
    for (std::size_t free_col = 0; free_col < m.cols(); ++free_col) {
        if (is_pivot[free_col]) continue;
        basis.set(out, free_col, true);
        // Back-substitute: pivot row r constrains pivot column pivots[r].
        for (std::size_t r = 0; r < pivots.size(); ++r) {
            if (scratch.get(r, free_col)) basis.set(out, pivots[r], true);
        }
        ++out;
    }
    return basis;
}

namespace {

// Solves a*X = b columnwise via elimination on [a | b].
std::optional<BinaryMatrix> solve_right(const BinaryMatrix& a, const BinaryMatrix& b) {
    if (a.rows() != b.rows()) throw std::invalid_argument("solve_linear: dimension mismatch");
    BinaryMatrix aug(a.rows(), a.cols() + b.cols());
    for (std::size_t r = 0; r < a.rows(); ++r) {
        for (std::size_t c = 0; c < a.cols(); ++c)
            if (a.get(r, c)) aug.set(r, c, true);
        for (std::size_t c = 0; c < b.cols(); ++c)
            if (b.get(r, c)) aug.set(r, a.cols() + c, true);
    }

    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < a.cols() && row < aug.rows(); ++col) {
        std::size_t sel = row;
        while (sel < aug.rows() && !aug.get(sel, col)) ++sel;
        if (sel == aug.rows()) continue;
        aug.swap_rows(sel, row);
        for (std::size_t r = 0; r < aug.rows(); ++r)
            if (r != row && aug.get(r, col)) aug.xor_row_into(row, r);
        pivots.push_back(col);
        ++row;
    }
    // Rows with no pivot must have an all-zero b part, else no solution.
    for (std::size_t r = pivots.size(); r < aug.rows(); ++r) {
        for (std::size_t c = 0; c < b.cols(); ++c)
            if (aug.get(r, a.cols() + c)) return std::nullopt;
    }

    BinaryMatrix x(a.cols(), b.cols());
    for (std::size_t r = 0; r < pivots.size(); ++r) {
        for (std::size_t c = 0; c < b.cols(); ++c)
            if (aug.get(r, a.cols() + c)) x.set(pivots[r], c, true);
    }
    return x;
}

}  // namespace

std::optional<BinaryMatrix> solve_linear(const BinaryMatrix& a, const BinaryMatrix& b, SolveSide side) {
    if (side == SolveSide::right) return solve_right(a, b);
    // X*a = b  <=>  a^T * X^T = b^T
    auto xt = solve_right(a.transposed(), b.transposed());
    if (!xt) return std::nullopt;
    return xt->transposed();
}

bool in_row_span(const BinaryMatrix& m, const BinaryMatrix& v) {
    if (v.cols() != m.cols()) throw std::invalid_argument("in_row_span: column mismatch");
    return rank(m) == rank(m.stacked(v));
}

}  // namespace msf
