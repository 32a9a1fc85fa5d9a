#include "msf/protocol.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <map>
#include <mutex>

#include "msf/realization.hpp"

namespace msf {

std::size_t ProtocolCode::output_units() const {
    return kind == CodeKind::toffoli ? 1 : k;
}

std::size_t ProtocolCode::unit_bits_out() const {
    return kind == CodeKind::toffoli ? 3 : 1;
}

std::string ProtocolCode::name() const {
    switch (kind) {
        case CodeKind::bravyi_haah: return "bh:" + std::to_string(bh_k);
        case CodeKind::toffoli: return "toffoli";
        case CodeKind::reed_muller: return "rm";
    }
    return "?";
}

void validate(const ProtocolCode& code) {
    if (code.g0.cols() != code.n || code.g1.cols() != code.n)
        throw std::logic_error(code.name() + ": column count does not match n");
    if (code.g1.rows() != code.k) throw std::logic_error(code.name() + ": g1 row count != k");
    const BinaryMatrix g = code.g0.stacked(code.g1);
    if (rank(g) != g.rows()) throw std::logic_error(code.name() + ": stacked G is rank deficient");

    // All single errors detected: no all-zero column in g0.
    for (std::size_t c = 0; c < code.n; ++c) {
        bool hit = false;
        for (std::size_t r = 0; r < code.g0.rows() && !hit; ++r) hit = code.g0.get(r, c);
        if (!hit) throw std::logic_error(code.name() + ": single error on qubit is undetected");
    }

    // Postselection rows live inside the dual of the stacked G.
    if (!in_row_span(nullspace_basis(g), code.g0))
        throw std::logic_error(code.name() + ": g0 is not contained in the dual space");

    if (code.kind == CodeKind::toffoli) return;  // converts species, not triorthogonal
    for (std::size_t i = 0; i < g.rows(); ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            const bool ip = g.row_dot(i, g.row_slice(j, 1));
            const bool expect = (i == j) && i >= code.g0.rows();
            if (ip != expect) throw std::logic_error(code.name() + ": triorthogonality violated");
        }
    }
}

namespace {

constexpr std::size_t kBhHead = 8;

std::uint32_t slice_bits(const BinaryMatrix& m, std::size_t row, std::size_t first,
                         std::size_t count) {
    std::uint32_t v = 0;
    for (std::size_t c = 0; c < count; ++c)
        if (m.get(row, first + c)) v |= 1u << c;
    return v;
}

// Logical rows are defined modulo the postselection span; pick the coset
// representative supported on the 8 head columns plus the row's own cell.
// The head must avoid qubits 0-2 (measured in the X basis by the
// realization plan), which selects a unique common pattern.
BinaryMatrix canonical_logical_rows(const BinaryMatrix& g0, const BinaryMatrix& g1, int k) {
    const std::size_t n = g1.cols();
    BinaryMatrix canon(g1.rows(), n);
    std::uint32_t common_head = 0;
    for (std::size_t j = 0; j < g1.rows(); ++j) {
        bool found = false;
        std::uint32_t best_head = 0;
        BinaryMatrix best(1, n);
        for (std::uint32_t s = 0; s < (1u << g0.rows()); ++s) {
            BinaryMatrix rep = g1.row_slice(j, 1);
            for (std::size_t r = 0; r < g0.rows(); ++r)
                if ((s >> r) & 1u) rep.xor_row_into(g0, r, 0);
            bool contained = true;
            for (std::size_t jj = 0; contained && jj < g1.rows(); ++jj)
                if (jj != j && slice_bits(rep, 0, kBhHead + 3 * jj, 3) != 0) contained = false;
            if (!contained) continue;
            const std::uint32_t head = slice_bits(rep, 0, 0, kBhHead);
            if ((head & 0x7u) != 0) continue;
            if (!found || head < best_head) {
                found = true;
                best_head = head;
                best = rep;
            }
        }
        if (!found)
            throw std::logic_error("bravyi_haah: logical row has no cell-local representative for k=" +
                                   std::to_string(k));
        if (j == 0)
            common_head = best_head;
        else if (best_head != common_head)
            throw std::logic_error("bravyi_haah: logical rows lack a common head pattern");
        for (std::size_t c : best.row_support(0)) canon.set(j, c, true);
    }
    return canon;
}

ProtocolCode make_bravyi_haah(int k) {
    const BinaryMatrix gp = build_g_perp(k);
    const std::size_t n = gp.cols();

    // Postselection rows: the intersection of rowspan(g_perp) with its own
    // dual, i.e. c*g_perp with (g_perp g_perp^T) c^T = 0. Triorthogonality
    // forces this space to be exactly the span of G0.
    const BinaryMatrix s = gp * gp.transposed();
    const BinaryMatrix c = nullspace_basis(s);
    if (c.rows() != 3)
        throw std::logic_error("bravyi_haah: postselection space has dimension " +
                               std::to_string(c.rows()));
    const BinaryMatrix g0 = row_echelon(c * gp);

    // Logical rows: g1 = w + q*g_perp with (g_perp g_perp^T) q^T = g_perp w^T.
    const BinaryMatrix w = bh_w_matrix(k);
    auto qt = solve_linear(s, gp * w.transposed(), SolveSide::right);
    if (!qt) throw std::logic_error("bravyi_haah: no logical representatives for this k");
    const BinaryMatrix g1 = canonical_logical_rows(g0, w + qt->transposed() * gp, k);

    ProtocolCode code{g0, g1, n, std::size_t(k), CodeKind::bravyi_haah, k};
    validate(code);
    return code;
}

}  // namespace

ProtocolCode bravyi_haah(int k) {
    if (k < 2 || (k - 2) % 4 != 0)
        throw std::invalid_argument("bravyi_haah: k must satisfy k = 2 mod 4 (transversal-T family)");
    static std::mutex mu;
    static std::map<int, ProtocolCode> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(k);
    if (it == cache.end()) it = cache.emplace(k, make_bravyi_haah(k)).first;
    return it->second;
}

ProtocolCode toffoli_code() {
    ProtocolCode code{
        BinaryMatrix::parse("11111111\n"),
        BinaryMatrix::parse("11110000\n"
                            "11001100\n"
                            "10101010\n"),
        8,
        3,
        CodeKind::toffoli,
        0,
    };
    validate(code);
    return code;
}

ProtocolCode reed_muller_code() {
    ProtocolCode code{
        BinaryMatrix::parse("111111110000000\n"
                            "111100001111000\n"
                            "110011001100110\n"
                            "101010101010101\n"),
        BinaryMatrix::parse("111111111111111\n"),
        15,
        1,
        CodeKind::reed_muller,
        0,
    };
    validate(code);
    return code;
}

namespace {

struct ColumnSyndromes {
    std::vector<std::uint8_t> check;   // g0 column patterns
    std::vector<std::uint64_t> logic;  // g1 column patterns
};

ColumnSyndromes column_syndromes(const ProtocolCode& code) {
    if (code.g0.rows() > 8 || code.k > 63)
        throw std::invalid_argument("protocol too large for packed syndromes");
    ColumnSyndromes cs;
    cs.check.assign(code.n, 0);
    cs.logic.assign(code.n, 0);
    for (std::size_t c = 0; c < code.n; ++c) {
        for (std::size_t r = 0; r < code.g0.rows(); ++r)
            if (code.g0.get(r, c)) cs.check[c] |= std::uint8_t(1u << r);
        for (std::size_t r = 0; r < code.k; ++r)
            if (code.g1.get(r, c)) cs.logic[c] |= std::uint64_t(1) << r;
    }
    return cs;
}

}  // namespace

std::uint64_t EtaFunction::total() const {
    std::uint64_t t = 0;
    for (const auto& [y, c] : counts) t += c;
    return t;
}

std::uint64_t EtaFunction::marginal(std::size_t j) const {
    std::uint64_t t = 0;
    for (const auto& [y, c] : counts)
        if ((y >> j) & 1u) t += c;
    return t;
}

EtaFunction eta(const ProtocolCode& code) {
    const ColumnSyndromes cs = column_syndromes(code);
    const std::size_t n = code.n;
    EtaFunction out;
    // Minimal undetected weight: 2 for the distance-2 families, 3 for
    // Reed-Muller (all weight-2 inputs trip a check there).
    for (int w = 2; w <= 3; ++w) {
        bool any_undetected = false;
        auto record = [&](std::uint8_t synd, std::uint64_t y) {
            if (synd) return;
            any_undetected = true;
            if (y) ++out.counts[y];
        };
        if (w == 2) {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    record(cs.check[i] ^ cs.check[j], cs.logic[i] ^ cs.logic[j]);
        } else {
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = i + 1; j < n; ++j)
                    for (std::size_t l = j + 1; l < n; ++l)
                        record(cs.check[i] ^ cs.check[j] ^ cs.check[l],
                               cs.logic[i] ^ cs.logic[j] ^ cs.logic[l]);
        }
        if (any_undetected) {
            out.input_weight = w;
            return out;
        }
    }
    throw std::logic_error("eta: no undetected input of weight <= 3");
}

BigInt sum_eta_power(const ProtocolCode& code, unsigned m) {
    if (m < 1) throw std::invalid_argument("sum_eta_power: m must be >= 1");
    const EtaFunction e = eta(code);
    BigInt total = 0;
    for (const auto& [y, c] : e.counts) total += boost::multiprecision::pow(BigInt(c), m);
    return total;
}

double OutputDistribution::p_any_error() const {
    double t = 0;
    for (const auto& [y, p] : p_out) t += p;
    return t;
}

OutputDistribution block_distribution(const ProtocolCode& code, double eps,
                                      std::optional<int> w_max, double max_tail) {
    if (eps < 0 || eps >= 1) throw std::invalid_argument("block_distribution: eps outside [0,1)");
    const ColumnSyndromes cs = column_syndromes(code);
    const std::size_t n = code.n;
    const std::size_t k = code.k;

    // Weight-indexed probabilities eps^w (1-eps)^(n-w).
    std::vector<long double> pw(n + 1);
    pw[0] = std::pow(1.0L - eps, static_cast<long double>(n));
    for (std::size_t w = 1; w <= n; ++w) pw[w] = pw[w - 1] * eps / (1.0L - eps);

    const bool dense_bins = k <= 20;
    std::vector<long double> binvec(dense_bins ? (std::size_t(1) << k) : 0, 0.0L);
    std::map<std::uint64_t, long double> binmap;
    long double psuc = 0;
    auto acc = [&](std::uint8_t synd, std::uint64_t y, std::size_t w) {
        if (synd) return;
        psuc += pw[w];
        if (!y) return;
        if (dense_bins)
            binvec[y] += pw[w];
        else
            binmap[y] += pw[w];
    };

    long double tail = 0;
    if (!w_max) {
        if (n > 26) throw std::invalid_argument("block_distribution: exhaustive mode needs n <= 26");
        acc(0, 0, 0);
        std::uint32_t x = 0;
        std::uint8_t synd = 0;
        std::uint64_t y = 0;
        int wt = 0;
        for (std::uint64_t i = 1; i < (std::uint64_t(1) << n); ++i) {
            const int j = std::countr_zero(i);
            x ^= std::uint32_t(1) << j;
            synd ^= cs.check[std::size_t(j)];
            y ^= cs.logic[std::size_t(j)];
            wt += ((x >> j) & 1u) ? 1 : -1;
            acc(synd, y, std::size_t(wt));
        }
    } else {
        if (*w_max < 0) throw std::invalid_argument("block_distribution: negative cutoff");
        const std::size_t wm = std::min<std::size_t>(std::size_t(*w_max), n);
        acc(0, 0, 0);
        std::function<void(std::size_t, std::uint8_t, std::uint64_t, std::size_t)> dfs =
            [&](std::size_t start, std::uint8_t synd, std::uint64_t y, std::size_t w) {
                for (std::size_t pos = start; pos < n; ++pos) {
                    const std::uint8_t s2 = synd ^ cs.check[pos];
                    const std::uint64_t y2 = y ^ cs.logic[pos];
                    acc(s2, y2, w + 1);
                    if (w + 1 < wm) dfs(pos + 1, s2, y2, w + 1);
                }
            };
        if (wm >= 1) dfs(0, 0, 0, 0);
        // Mass above the cutoff: sum of C(n,w) eps^w (1-eps)^(n-w).
        long double term = pw[0];
        for (std::size_t w = 0; w < n; ++w) {
            term = term * static_cast<long double>(n - w) / static_cast<long double>(w + 1) * eps / (1.0L - eps);
            if (w + 1 > wm) tail += term;
        }
        if (tail > max_tail)
            throw TailTooLarge("block_distribution: truncated mass " + std::to_string(double(tail)) +
                               " exceeds " + std::to_string(max_tail));
    }

    OutputDistribution od;
    od.exhaustive = !w_max.has_value();
    od.tail_bound = double(tail);
    od.p_success = double(psuc);
    od.marginal_qubit_error.assign(k, 0.0);
    auto emit = [&](std::uint64_t y, long double mass) {
        if (mass == 0) return;
        od.p_out[y] = double(mass / psuc);
        for (std::size_t j = 0; j < k; ++j)
            if ((y >> j) & 1u) od.marginal_qubit_error[j] += double(mass / psuc);
    };
    if (dense_bins) {
        for (std::uint64_t y = 1; y < binvec.size(); ++y) emit(y, binvec[y]);
    } else {
        for (const auto& [y, mass] : binmap) emit(y, mass);
    }
    return od;
}

namespace {

// Distinct weights of the span of the given rows (rows assumed independent),
// walked in Gray-code order.
std::vector<int> span_weights(const BinaryMatrix& rows) {
    const std::size_t r = rows.rows();
    if (r > 24) throw std::invalid_argument("span_weights: span too large");
    const std::size_t words = rows.cols() == 0 ? 1 : (rows.cols() + 63) / 64;
    std::vector<std::uint64_t> cur(words, 0);
    std::vector<int> out(std::size_t(1) << r, 0);
    for (std::uint64_t i = 1; i < (std::uint64_t(1) << r); ++i) {
        const std::size_t j = std::size_t(std::countr_zero(i));
        auto row = rows.row_words(j);
        int w = 0;
        for (std::size_t t = 0; t < words; ++t) {
            cur[t] ^= row[t];
            w += std::popcount(cur[t]);
        }
        out[std::size_t(i ^ (i >> 1))] = w;
    }
    return out;
}

}  // namespace

double success_probability_exact(const ProtocolCode& code, double eps) {
    const std::vector<int> weights = span_weights(code.g0);
    const long double lx = std::log1p(-2.0L * eps);
    long double s = 0;
    for (int w : weights) s += std::exp(lx * w);
    return double(s / static_cast<long double>(weights.size()));
}

double qubit_error_exact(const ProtocolCode& code, std::size_t j, double eps) {
    if (j >= code.k) throw std::out_of_range("qubit_error_exact: bad output index");
    if (eps == 0) return 0;
    const std::size_t r0 = code.g0.rows();
    const std::size_t words = (code.n + 63) / 64;
    const long double lx = std::log1p(-2.0L * eps);
    auto lrow = code.g1.row_words(j);

    // Walk span(g0); for each element u accumulate x^|u| and the stabilized
    // difference x^|u| - x^|u+l_j| = -x^|u| expm1((|u+l_j|-|u|) log x).
    std::vector<std::uint64_t> cur(words, 0);
    long double den = 1;  // u = 0 term of sum x^|u|
    long double num = -std::expm1(lx * static_cast<long double>(code.g1.row_weight(j)));
    for (std::uint64_t i = 1; i < (std::uint64_t(1) << r0); ++i) {
        auto row = code.g0.row_words(std::size_t(std::countr_zero(i)));
        int wu = 0, wul = 0;
        for (std::size_t t = 0; t < words; ++t) {
            cur[t] ^= row[t];
            wu += std::popcount(cur[t]);
            wul += std::popcount(cur[t] ^ lrow[t]);
        }
        const long double pu = std::exp(lx * wu);
        den += pu;
        num += -pu * std::expm1(lx * (wul - wu));
    }
    return double(num / (2.0L * den));
}

namespace {

// Generic small-span difference form of the conditional global error.
double global_error_small_span(const ProtocolCode& code, double eps) {
    const std::size_t r0 = code.g0.rows();
    const std::size_t k = code.k;
    if (r0 + k > 20) throw std::invalid_argument("global_error_small_span: span too large");
    const std::size_t words = (code.n + 63) / 64;
    const long double lx = std::log1p(-2.0L * eps);

    // Materialize coset representatives g_S for S != 0.
    std::vector<std::vector<std::uint64_t>> reps;
    {
        std::vector<std::uint64_t> cur(words, 0);
        for (std::uint64_t i = 1; i < (std::uint64_t(1) << k); ++i) {
            auto row = code.g1.row_words(std::size_t(std::countr_zero(i)));
            for (std::size_t t = 0; t < words; ++t) cur[t] ^= row[t];
            reps.push_back(cur);
        }
    }

    long double num = 0, den = 0;
    std::vector<std::uint64_t> u(words, 0);
    for (std::uint64_t i = 0; i < (std::uint64_t(1) << r0); ++i) {
        if (i) {
            auto row = code.g0.row_words(std::size_t(std::countr_zero(i)));
            for (std::size_t t = 0; t < words; ++t) u[t] ^= row[t];
        }
        int wu = 0;
        for (std::size_t t = 0; t < words; ++t) wu += std::popcount(u[t]);
        const long double pu = std::exp(lx * wu);
        den += pu;
        for (const auto& rep : reps) {
            int wus = 0;
            for (std::size_t t = 0; t < words; ++t) wus += std::popcount(u[t] ^ rep[t]);
            num += -pu * std::expm1(lx * (wus - wu));
        }
    }
    return double(num / (den * static_cast<long double>(std::uint64_t(1) << k)));
}

struct BhCellView {
    // Per span(g0) element: head weight pair and per-cell weight pairs.
    std::vector<int> head_w0, head_w1;              // |head(u)|, |head(u)+h|
    std::vector<std::vector<int>> cell_w0, cell_w1;  // per u, per cell
    std::size_t span_size = 0;
    int k = 0;
};

// Validates and extracts the head/cell structure used by the per-cell
// weight recursion: every logical row must touch only the head plus its own
// three-column cell, with a common head pattern.
BhCellView bh_cell_view(const ProtocolCode& code) {
    const int k = code.bh_k;
    BhCellView view;
    view.k = k;
    const std::uint32_t h = slice_bits(code.g1, 0, 0, kBhHead);
    for (int j = 0; j < k; ++j) {
        if (slice_bits(code.g1, std::size_t(j), 0, kBhHead) != h)
            throw std::logic_error("bravyi_haah: logical rows lack a common head pattern");
        for (int jj = 0; jj < k; ++jj) {
            const std::uint32_t cell =
                slice_bits(code.g1, std::size_t(j), kBhHead + 3 * std::size_t(jj), 3);
            if (jj != j && cell != 0)
                throw std::logic_error("bravyi_haah: logical row leaks outside its cell");
        }
    }

    const std::size_t r0 = code.g0.rows();
    view.span_size = std::size_t(1) << r0;
    view.head_w0.resize(view.span_size);
    view.head_w1.resize(view.span_size);
    view.cell_w0.assign(view.span_size, std::vector<int>(std::size_t(k)));
    view.cell_w1.assign(view.span_size, std::vector<int>(std::size_t(k)));
    for (std::uint64_t s = 0; s < view.span_size; ++s) {
        std::uint32_t head = 0;
        std::vector<std::uint32_t> cells(std::size_t(k), 0);
        for (std::size_t r = 0; r < r0; ++r) {
            if (!((s >> r) & 1u)) continue;
            head ^= slice_bits(code.g0, r, 0, kBhHead);
            for (int j = 0; j < k; ++j)
                cells[std::size_t(j)] ^= slice_bits(code.g0, r, kBhHead + 3 * std::size_t(j), 3);
        }
        view.head_w0[s] = std::popcount(head);
        view.head_w1[s] = std::popcount(head ^ h);
        for (int j = 0; j < k; ++j) {
            const std::uint32_t cg =
                slice_bits(code.g1, std::size_t(j), kBhHead + 3 * std::size_t(j), 3);
            view.cell_w0[s][std::size_t(j)] = std::popcount(cells[std::size_t(j)]);
            view.cell_w1[s][std::size_t(j)] = std::popcount(cells[std::size_t(j)] ^ cg);
        }
    }
    return view;
}

// Conditional global error of a Bravyi-Haah round for any k, via the parity
// split of the coset sum over the translational cells.
double global_error_bh(const ProtocolCode& code, double eps) {
    const BhCellView view = bh_cell_view(code);
    const long double lx = std::log1p(-2.0L * eps);

    long double num = 0, den = 0;
    for (std::size_t s = 0; s < view.span_size; ++s) {
        int wu = view.head_w0[s];
        long double t_log = 0;   // log prod (1+x^d_j)/2
        long double t_neg = 1;   // prod (1-x^d_j)/2
        for (int j = 0; j < view.k; ++j) {
            wu += view.cell_w0[s][std::size_t(j)];
            const long double dl =
                lx * (view.cell_w1[s][std::size_t(j)] - view.cell_w0[s][std::size_t(j)]);
            t_log += std::log1p(std::expm1(dl) / 2.0L);
            t_neg *= -std::expm1(dl) / 2.0L;
        }
        const long double dh = lx * (view.head_w1[s] - view.head_w0[s]);
        const long double one_minus_a = -std::expm1(t_log + std::log1p(std::expm1(dh) / 2.0L));
        const long double b = t_neg * (-std::expm1(dh) / 2.0L);
        const long double pu = std::exp(lx * wu);
        num += pu * (one_minus_a - b);
        den += pu;
    }
    return double(num / den);
}

}  // namespace

double global_error_exact(const ProtocolCode& code, double eps) {
    if (eps == 0) return 0;
    if (code.kind == CodeKind::bravyi_haah) return global_error_bh(code, eps);
    return global_error_small_span(code, eps);
}

double weight_enumerator_undetected(int k, double eps) {
    // Dual-coset weight enumerators in powers of (1-2 eps), normalized as
    // the probability, conditioned on acceptance, that the output of one
    // round carries any error. Matches exhaustive enumeration at k = 2.
    return global_error_exact(bravyi_haah(k), eps);
}

}  // namespace msf
