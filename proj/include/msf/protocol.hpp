#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "msf/gf2.hpp"

namespace msf {

using BigInt = boost::multiprecision::cpp_int;

enum class CodeKind { bravyi_haah, toffoli, reed_muller };

/// An n -> k block protocol as a G-matrix black box: the block accepts an
/// input error pattern x iff g0*x = 0 (mod 2) and then emits y = g1*x.
struct ProtocolCode {
    BinaryMatrix g0;  // postselection rows
    BinaryMatrix g1;  // logical/output rows
    std::size_t n = 0;
    std::size_t k = 0;  // rows of g1
    CodeKind kind{};
    int bh_k = 0;  // Bravyi-Haah family parameter, 0 for other kinds

    /// Output magic states per block: k for Bravyi-Haah (T states), 1 for
    /// the Toffoli converter (one 3-qubit state) and Reed-Muller.
    std::size_t output_units() const;
    /// Bits carried by one output unit (3 for a Toffoli state, else 1).
    std::size_t unit_bits_out() const;
    std::string name() const;
};

/// (3k+8) -> k code for k = 2, 6, 10, ... (k == 2 mod 4). Built as the dual
/// complement of the sparse generator family in realization.hpp; throws
/// std::invalid_argument for other k.
ProtocolCode bravyi_haah(int k);

/// 8 T states -> 1 Toffoli state. Not triorthogonal.
ProtocolCode toffoli_code();

/// 15 -> 1 punctured Reed-Muller code.
ProtocolCode reed_muller_code();

/// Structural checks: shapes, G0 inside the dual of the stacked G,
/// triorthogonality (except Toffoli), detection of all single errors.
/// Throws std::logic_error with a description on violation.
void validate(const ProtocolCode& code);

/// Undetected minimal-weight input census: counts input patterns x of the
/// code's minimal undetected weight (2 for distance-2 codes, 3 for
/// Reed-Muller) with g0*x = 0, binned by output pattern y = g1*x.
/// y = 0 entries are never stored.
struct EtaFunction {
    std::map<std::uint64_t, std::uint64_t> counts;
    int input_weight = 2;

    std::uint64_t total() const;
    /// Sum of counts over patterns with output bit j set.
    std::uint64_t marginal(std::size_t j) const;
};

EtaFunction eta(const ProtocolCode& code);

/// Exact integer sum over y of eta(y)^m.
BigInt sum_eta_power(const ProtocolCode& code, unsigned m);

/// Single-round output statistics at i.i.d. input error eps.
struct OutputDistribution {
    double p_success = 0;
    std::map<std::uint64_t, double> p_out;  // conditional on success, y != 0
    std::vector<double> marginal_qubit_error;
    double tail_bound = 0;  // bound on probability mass above the cutoff
    bool exhaustive = false;

    double p_any_error() const;  // sum of p_out over y != 0
};

class TailTooLarge : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Sums Pr(x) = eps^|x| (1-eps)^(n-|x|) over accepted inputs, binned by
/// output pattern. w_max = nullopt enumerates all 2^n inputs (n <= 26 only);
/// otherwise only |x| <= w_max with the remaining mass reported as
/// tail_bound. Throws TailTooLarge when tail_bound > max_tail.
OutputDistribution block_distribution(const ProtocolCode& code, double eps,
                                      std::optional<int> w_max = 6, double max_tail = 1e-6);

/// Exact block acceptance probability via the dual-coset identity
/// Pr(g0 x = 0) = 2^-r sum_{u in span(g0)} (1-2 eps)^|u|.
double success_probability_exact(const ProtocolCode& code, double eps);

/// Exact probability, conditioned on acceptance, that output qubit j
/// carries an error.
double qubit_error_exact(const ProtocolCode& code, std::size_t j, double eps);

/// Exact probability, conditioned on acceptance, that the output carries
/// any error. Cheap for Toffoli/Reed-Muller; for Bravyi-Haah evaluated by
/// a per-cell weight recursion over the translational tail.
double global_error_exact(const ProtocolCode& code, double eps);

/// Global undetected-error probability of one Bravyi-Haah round, computed
/// from dual-coset weight enumerators in powers of (1-2 eps). Normalized so
/// it equals the exhaustive block_distribution error rate (the k = 2 case is
/// checked to 1e-12 in the test suite).
double weight_enumerator_undetected(int k, double eps);

}  // namespace msf
