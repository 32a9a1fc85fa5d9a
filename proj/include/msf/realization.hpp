#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "msf/gf2.hpp"
#include "msf/protocol.hpp"

namespace msf {

/// Sparse generator matrix for the Z/X measurement stages of the
/// Bravyi-Haah realization: (2k+5) x (3k+8), all rows weight 4 except one
/// weight-(k+2) row. Reproduces the fixed k=2 and k=6 forms bit-exactly.
BinaryMatrix build_g_perp(int k);

struct Rmq {
    BinaryMatrix r;  // g_perp * r = identity
    BinaryMatrix m;  // m * g_perp = g0
    BinaryMatrix q;  // g1 = w + q * g_perp
};

/// Solves the three defining identities for the given parameter. Any valid
/// witness is acceptable; identities are re-checked before returning.
Rmq derive_rmq(int k);

/// The W pattern entering g1 = w + q*g_perp: row j has ones at columns
/// 0, 1 and 8+3j (0-based).
BinaryMatrix bh_w_matrix(int k);

/// One entangling gate: ancilla node -> data qubit, executed in time slot
/// `color`. Ancilla ids above the per-row ancilla range belong to the cat
/// state used for the long measurement row.
struct ColoredSchedule {
    struct Edge {
        int ancilla;
        int data;
        int color;
    };
    std::vector<Edge> edges;
    int depth = 0;
    int ancilla_count = 0;
};

class DepthExceeded : public std::runtime_error {
  public:
    DepthExceeded(const std::string& what, ColoredSchedule found)
        : std::runtime_error(what), best_found(std::move(found)) {}
    ColoredSchedule best_found;
};

/// Proper edge coloring of the measurement graph defined by the rows of
/// `meas_rows`: each weight-<=4 row uses a single ancilla; rows longer than
/// 4 use one cat-state qubit per data qubit (edges mutually parallel).
/// No vertex is touched twice within one color. Throws DepthExceeded when
/// the target cannot be met.
ColoredSchedule edge_color_schedule(const BinaryMatrix& meas_rows, int target_depth);

/// Full gauge-based realization plan of a Bravyi-Haah block: measurement
/// stages, corrections and output bookkeeping.
struct RealizationPlan {
    ProtocolCode code;
    BinaryMatrix g_perp;
    BinaryMatrix r;
    BinaryMatrix m;
    BinaryMatrix q;
    BinaryMatrix w;
    std::vector<std::size_t> o_set;  // output qubits (0-based)
    std::vector<std::size_t> x_set;  // measured in X basis
    std::vector<std::size_t> z_set;  // measured in Z basis
    BinaryMatrix h_z;  // k x |z_set| X-correction selector
    BinaryMatrix h_x;  // k x |x_set| Z-correction selector
    ColoredSchedule schedule;  // one measurement stage; X stage mirrors it
};

RealizationPlan gauge_msd_plan(int k);

/// Classical Z-error semantics of the plan: an input pattern x is detected
/// iff m*(g_perp*x) != 0; conditioned on acceptance the output pattern is
/// w*x + q*(g_perp*x). Equal to the black-box (g0, g1) action.
bool plan_detects(const RealizationPlan& plan, const BinaryMatrix& x);
BinaryMatrix plan_output(const RealizationPlan& plan, const BinaryMatrix& x);

/// Renders the plan as the structured schedule listing consumed by
/// downstream tooling: one line per step with qubit indices and colors.
std::string plan_listing(const RealizationPlan& plan);

/// Fixed sparse dual used for the Reed-Muller measurement stages (max row
/// weight 4, max column weight 5).
BinaryMatrix reed_muller_g_perp();

/// Measurement-stage schedules for the other protocol families.
ColoredSchedule reed_muller_schedule();        // depth 5
ColoredSchedule toffoli_z_schedule();          // depth 4
ColoredSchedule toffoli_x_schedule();          // depth 5, two ancillas

struct TimingParams {
    double t_g = 0;        // physical 2-qubit gate time
    double t_a = 0;        // A-gate injection time
    double t_prep = 0;     // single qubit preparation
    double t_measure = 0;  // single qubit measurement
    double t_sc = 0;       // one round of surface-code stabilizer measurements
    int d = 3;             // code distance

    double t_cnot() const { return t_g + d * t_sc; }
};

struct BlockTiming {
    double t_block = 0;             // 8 t_cnot + t_A + 2 t_prep + 3 t_measure
    double t_block_asymptotic = 0;  // 8 d t_sc
    std::size_t logical_qubits = 0;
    std::size_t physical_qubits = 0;   // logical_qubits * d^2 data qubits
    double spacetime_leading = 0;      // (48k+112) d^3 for Bravyi-Haah
};

/// Logical-qubit census: 6k+14 for Bravyi-Haah (3k+8 data, 3k+6 ancillas),
/// 12 for Toffoli (8+4), 25 for Reed-Muller (15+10).
std::size_t logical_qubits_per_block(CodeKind kind, int k);

BlockTiming block_time(const TimingParams& params, CodeKind kind, int k);

}  // namespace msf
