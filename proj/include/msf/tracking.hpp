#pragma once

#include <cstdint>
#include <vector>

#include "msf/protocol.hpp"

namespace msf {

enum class CheckMode { block, module };

/// Per-level analytic summary of a multi-round factory chain.
struct RoundReport {
    enum class Rate { exact, leading_order };

    double p_suc = 1;    // module: conditional module success; block: per-block acceptance
    double eps_glo = 0;  // global infidelity of the branch this level emits
    std::uint64_t branch_width = 1;  // output units of the branch
    Rate method = Rate::exact;
};

/// Log-domain A/B weights and the exact leading coefficient per level.
struct TrackingState {
    int level = 0;
    double log_a = 0;  // log (1-eps)^(n1 n2 ... nl)
    double log_b = 0;  // log C_l eps^(2^l) (1-eps)^(m_l - 2^l)
    BigInt c = 1;
    std::uint64_t m = 1;  // raw states per branch, n1 n2 ... nl
};

/// Correlated-error tracking through module-checked rounds. Valid for the
/// distance-2 families (Bravyi-Haah, Toffoli); Reed-Muller rounds are
/// rejected since their leading undetected errors have weight 3.
std::vector<TrackingState> module_tracking_states(const std::vector<ProtocolCode>& rounds, double eps);
std::vector<RoundReport> track_module_checked(const std::vector<ProtocolCode>& rounds, double eps);

/// Exact integer C_L = prod_j sum_v eta_j(v)^(2^(L-j)) for 1-3 rounds.
BigInt leading_coefficient(const std::vector<ProtocolCode>& rounds);

/// Independent per-qubit iteration of block-checked rounds: exact coset
/// rates where the round operates on single T states, eta-derived leading
/// order once units carry three qubits; the choice is recorded per round.
std::vector<RoundReport> track_block_checked(const std::vector<ProtocolCode>& rounds, double eps);

/// Expected raw magic states consumed per output state.
double cost(const std::vector<ProtocolCode>& rounds, double eps, CheckMode mode);

/// Cached eta evaluation (protocol constructions are deterministic).
const EtaFunction& cached_eta(const ProtocolCode& code);
BigInt cached_sum_eta_power(const ProtocolCode& code, unsigned m);

/// Key/value serialization of a chain report, one line per level.
std::string render_reports(const std::vector<ProtocolCode>& rounds,
                           const std::vector<RoundReport>& reports);

}  // namespace msf
