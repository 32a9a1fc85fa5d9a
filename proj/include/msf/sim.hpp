#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "msf/protocol.hpp"
#include "msf/tracking.hpp"

namespace msf {

/// splitmix64 stream keyed by (seed, stream index). One independent stream
/// per trial, so parallel and serial runs agree bit-exactly.
class TrialRng {
  public:
    TrialRng(std::uint64_t seed, std::uint64_t stream);
    std::uint64_t next();
    double next_double();                      // uniform in [0, 1)
    std::uint64_t below(std::uint64_t bound);  // uniform in [0, bound)

  private:
    std::uint64_t state_;
};

enum class SimMethod { brute, rare };
enum class ShufflePolicy { canonical, random_within_branch };

struct FactoryRound {
    ProtocolCode code;
    CheckMode mode = CheckMode::module;
    int attempts = 1;
};

/// Ordered list of distillation rounds, first round fed by raw states.
struct FactorySpec {
    std::vector<FactoryRound> rounds;

    std::vector<ProtocolCode> codes() const;
};

struct SimConfig {
    FactorySpec factory;
    double eps = 0;
    std::uint64_t trials = 1;
    std::uint64_t seed = 0;
    SimMethod method = SimMethod::brute;
    ShufflePolicy shuffle = ShufflePolicy::canonical;
};

/// Trial classifications of the final-round module, plus the corrupt-branch
/// rate feeding the rare-events estimator.
struct SimCounts {
    std::uint64_t n_success = 0;
    std::uint64_t n_fail = 0;
    std::uint64_t n_error = 0;
    /// For brute runs: observed corrupt-branch rate of the penultimate
    /// round's output. For rare runs: the input rate echoed back.
    double round2_branch_error_rate = 0;
    // Raw tallies behind round2_branch_error_rate (brute runs only).
    std::uint64_t penultimate_branches = 0;
    std::uint64_t penultimate_corrupt = 0;

    std::uint64_t trials() const { return n_success + n_fail + n_error; }
};

struct SimEstimate {
    double p_suc_3 = 0;
    double eps_glo_3 = 0;
    double stderr_ = 0;
    /// Rule-of-three one-sided 95% bound when no ERROR was observed,
    /// otherwise eps_glo_3 + 3 stderr.
    double eps_upper = 0;
};

class InvalidPreselection : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Interleaves branch qubits across blocks: block t receives qubit t of
/// every branch, as input position i for branch i. The random policy first
/// applies an independent uniform permutation within each branch. Returns
/// one 1-row matrix of block inputs per block. Throws on width mismatch.
std::vector<BinaryMatrix> firewall_shuffle(const std::vector<BinaryMatrix>& branches,
                                           ShufflePolicy policy, TrialRng& rng);

/// Alg.-1 style sampling of the factory: round-1 blocks retried until their
/// checks pass, intermediate modules regenerated on failure, final-round
/// module classified as SUCCESS / FAIL / ERROR. 2 or 3 rounds; deterministic
/// given (seed, config) and independent of thread count. Branch widths per
/// lane are limited to 64 units.
SimCounts simulate_brute(const SimConfig& config);

/// Rare-events sampling for 3-round factories: draws the number of corrupt
/// final-round input branches conditioned on >= 2 (rate taken from
/// round2_stats), actively simulates only corrupt subtrees, pads the rest
/// with zeros. Throws InvalidPreselection when the input rate cannot yield
/// two corrupt branches.
SimCounts simulate_rare(const SimConfig& config, const SimCounts& round2_stats);

/// Rare-events estimator: p_num is the probability of >= 2 corrupt branches
/// among n3, combined with the SUCCESS/FAIL/ERROR frequencies.
SimEstimate estimate(const SimCounts& counts, std::size_t n3);

/// Thread count used by the simulators: MSF_THREADS when set, otherwise the
/// hardware concurrency.
unsigned sim_thread_count();

}  // namespace msf
