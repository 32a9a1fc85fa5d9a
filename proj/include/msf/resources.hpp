#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msf/tracking.hpp"

namespace msf {

/// Physical-layer model parameters.
struct ResourceParams {
    double p_g = 1e-3;             // physical gate error
    double t_sc = 1e-3;            // seconds per surface-code stabilizer round
    double t_meas_ff_ratio = 0.1;  // t_meas/ff as a fraction of t_sc
    double eps_in_factor = 0.4;    // raw magic-state error = factor * p_g (state injection)
    double p_suc_alg = 0.9;        // target whole-algorithm success probability

    double t_meas_ff() const { return t_meas_ff_ratio * t_sc; }
    double eps_in() const { return eps_in_factor * p_g; }
};

/// Plain key/value parameter file (pg=..., tsc=..., one per line, '#'
/// comments). Unknown keys are rejected.
ResourceParams load_resource_params(const std::string& text);
std::string save_resource_params(const ResourceParams& p);

class Unachievable : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class FactoryInvalid : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};
class NoValidFactory : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Logical failure rate d (100 p_g)^((d+1)/2) per logical time step (d
/// stabilizer rounds). Requires p_g < 1e-2 (formula diverges at threshold).
double logical_error(int d, double p_g);

/// Smallest odd distance d >= 3 with logical_error(d, p_g) <= p_target.
int required_distance(double p_target, double p_g);

/// Per-state error target 1 - p_suc_alg^(1/n_iterations).
double epsilon_target(double p_suc_alg, double n_iterations);

enum class MagicKind { t_state, toffoli };

/// Candidate factory: ordered protocol rounds, shared checking mode, and
/// clock-rate-zoning attempt counts t_i per round.
struct FactoryDesign {
    std::vector<ProtocolCode> rounds;
    CheckMode mode = CheckMode::module;
    std::vector<int> attempts;

    std::string name() const;
};

struct RoundLayout {
    std::string protocol;
    int d = 3;                     // code distance (odd)
    std::uint64_t blocks = 0;      // block instances in this round
    std::uint64_t logical_qubits = 0;  // Q_i including logical ancillas
    int attempts = 1;              // t_i
    int tau_steps = 11;            // logical steps per attempt (11/12/13)
    double time_seconds = 0;       // T_i = tau_i * t_i
    double p_round = 1;            // all block slots filled within t_i tries
};

struct FactoryLayout {
    FactoryDesign design;
    MagicKind output_kind = MagicKind::t_state;
    std::vector<RoundLayout> rounds;
    std::uint64_t states_per_iteration = 1;  // output units per factory iteration
    double eps_glo = 0;                      // per-iteration global output error
    double eps_target = 0;
    double volume_per_state = 0;   // qubit-rounds per output unit
    double volume_per_request = 0; // qubit-rounds per requested state (x7 for 7T-per-Toffoli)
    std::uint64_t physical_data_qubits = 0;  // sum Q_i d_i^2 (syndrome ancillas excluded)
    double rate_per_tsc = 0;       // average delivered units per surface cycle
};

/// Surface-code distances per round: module mode protects the correlated
/// error budget (encoding error <= 0.1 eps_glo_i / width_i per qubit per
/// round), block mode works backwards from the target through the
/// leading-order inverses, trimming rounds the raw input already covers.
/// Distances are clamped monotone nondecreasing. Throws FactoryInvalid when
/// the chain cannot reach eps_target.
std::vector<int> balanced_investment(const FactoryDesign& design, const ResourceParams& params,
                                     double eps_target);

/// Probability that `blocks` slots all produce output within `attempts`
/// tries of per-attempt success p_block.
double round_success_probability(double p_block, int attempts, std::uint64_t blocks);

/// Full layout: distances, qubit census, times, success probabilities and
/// the spacetime volume sum Q_i tau_i t_i d_i^3 / prod(k_i P_i).
FactoryLayout layout_factory(const FactoryDesign& design, const ResourceParams& params,
                             double eps_target, MagicKind kind);

/// Spacetime volume of an explicit layout (qubit-rounds per output unit).
double spacetime_volume(const FactoryLayout& layout);

/// argmin-volume layout over 1-3 rounds of Bravyi-Haah/Reed-Muller/Toffoli
/// factories, both checking modes, attempt grids; Toffoli requests also
/// evaluate the 7-parallel-T realization. Ties break toward fewer physical
/// qubits, then fewer rounds.
FactoryLayout optimize_factory(const ResourceParams& params, double n_states, MagicKind kind);

/// Modular-exponentiation-dominated factoring task: 40 N^3 sequential
/// Toffoli gates.
struct ShorTask {
    std::uint64_t bits = 1000;

    double toffoli_count() const;
    double toffoli_depth() const { return toffoli_count(); }
};

struct TimeOptimalResult {
    FactoryLayout layout;
    std::uint64_t copies = 1;             // parallel factory instances
    std::uint64_t physical_data_qubits = 0;
    double runtime_seconds = 0;           // 40 N^3 t_meas/ff
    double required_rate_per_tsc = 0;
};

/// Smallest factory (physical data qubits) that sustains one Toffoli per
/// t_meas/ff on average for the whole task.
TimeOptimalResult time_optimal_sizing(const ShorTask& task, const ResourceParams& params);

struct ScalingPoint {
    double n_states = 0;
    double volume_per_state = 0;  // per requested unit
    double cnot_volume = 0;       // 2 d^3 at the same target fidelity
};

struct ScalingFit {
    double a = 0, b = 0, c = 0;  // V ~ a log(N)^b + c
};

std::vector<ScalingPoint> scaling_curve(const ResourceParams& params,
                                        const std::vector<double>& n_grid, MagicKind kind);
ScalingFit fit_scaling(const std::vector<ScalingPoint>& points);

/// Minimum cost (raw states per output) achieving each target error, for
/// yield-curve comparisons of the two checking modes.
struct YieldPoint {
    double eps_target = 0;
    double cost_block = 0;   // infinity when unreachable
    double cost_module = 0;
    std::string best_block;
    std::string best_module;
};

std::vector<YieldPoint> yield_curve(double eps_in, const std::vector<double>& targets);

}  // namespace msf
