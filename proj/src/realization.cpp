#include "msf/realization.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <stdexcept>
#include <tuple>

namespace msf {

namespace {

void check_bh_k(int k) {
    if (k < 2 || (k - 2) % 4 != 0)
        throw std::invalid_argument("Bravyi-Haah parameter must satisfy k = 2 mod 4, k >= 2");
}

}  // namespace

BinaryMatrix build_g_perp(int k) {
    check_bh_k(k);
    const std::size_t n = 3 * std::size_t(k) + 8;
    const std::size_t rows = 2 * std::size_t(k) + 5;
    BinaryMatrix gp(rows, n);
    auto put = [&](std::size_t r, std::initializer_list<std::size_t> cols) {
        for (std::size_t c : cols) gp.set(r, c, true);
    };
    // Head and bridge rows are k-independent; the tail is a chain of
    // overlapping weight-4 pairs, one pair per added output.
    put(0, {0, 3, 5, 6});
    put(1, {1, 3, 4, 6});
    put(2, {2, 3, 4, 5});
    put(3, {4, 7, 8, 9});
    put(4, {5, 7, 8, 10});
    put(5, {6, 7, 9, 10});
    for (std::size_t t = 0; t + 1 < std::size_t(k); ++t) {
        put(6 + 2 * t, {8 + 3 * t, 9 + 3 * t, 11 + 3 * t, 12 + 3 * t});
        put(7 + 2 * t, {9 + 3 * t, 10 + 3 * t, 12 + 3 * t, 13 + 3 * t});
    }
    // Single long row of weight k+2, covered by a cat-state ancilla.
    gp.set(rows - 1, 2, true);
    gp.set(rows - 1, 6, true);
    for (std::size_t t = 0; t < std::size_t(k); ++t) gp.set(rows - 1, 8 + 3 * t, true);
    return gp;
}

BinaryMatrix bh_w_matrix(int k) {
    check_bh_k(k);
    BinaryMatrix w(std::size_t(k), 3 * std::size_t(k) + 8);
    for (std::size_t j = 0; j < std::size_t(k); ++j) {
        w.set(j, 0, true);
        w.set(j, 1, true);
        w.set(j, 8 + 3 * j, true);
    }
    return w;
}

Rmq derive_rmq(int k) {
    const BinaryMatrix gp = build_g_perp(k);
    const ProtocolCode code = bravyi_haah(k);
    const BinaryMatrix w = bh_w_matrix(k);

    auto r = solve_linear(gp, BinaryMatrix::identity(gp.rows()), SolveSide::right);
    if (!r) throw std::logic_error("derive_rmq: g_perp is not full rank");
    auto m = solve_linear(gp, code.g0, SolveSide::left);
    if (!m) throw std::logic_error("derive_rmq: g0 is outside the span of g_perp");
    auto q = solve_linear(gp, code.g1 + w, SolveSide::left);
    if (!q) throw std::logic_error("derive_rmq: g1 + w is outside the span of g_perp");

    if (gp * (*r) != BinaryMatrix::identity(gp.rows()))
        throw std::logic_error("derive_rmq: r identity failed");
    if ((*m) * gp != code.g0) throw std::logic_error("derive_rmq: m identity failed");
    if (w + (*q) * gp != code.g1) throw std::logic_error("derive_rmq: q identity failed");
    return Rmq{std::move(*r), std::move(*m), std::move(*q)};
}

namespace {

// Bipartite proper edge coloring with max-degree many colors: greedy
// assignment, fixing collisions by flipping an alternating two-color path.
ColoredSchedule color_bipartite(const std::vector<std::pair<int, int>>& edges, int n_ancilla,
                                int n_data, int target_depth) {
    std::vector<int> deg_a(std::size_t(n_ancilla), 0), deg_d(std::size_t(n_data), 0);
    for (auto [a, d] : edges) {
        ++deg_a[std::size_t(a)];
        ++deg_d[std::size_t(d)];
    }
    int delta = 0;
    for (int v : deg_a) delta = std::max(delta, v);
    for (int v : deg_d) delta = std::max(delta, v);
    const int colors = delta;

    // color -> edge index occupying that slot, -1 when free
    std::vector<std::vector<int>> at_a(std::size_t(n_ancilla), std::vector<int>(std::size_t(colors), -1));
    std::vector<std::vector<int>> at_d(std::size_t(n_data), std::vector<int>(std::size_t(colors), -1));
    std::vector<int> edge_color(edges.size(), -1);

    auto free_color = [&](const std::vector<int>& slots) {
        for (int c = 0; c < colors; ++c)
            if (slots[std::size_t(c)] < 0) return c;
        return -1;
    };

    for (std::size_t e = 0; e < edges.size(); ++e) {
        auto [a, d] = edges[e];
        const int ca = free_color(at_a[std::size_t(a)]);
        const int cd = free_color(at_d[std::size_t(d)]);
        if (at_d[std::size_t(d)][std::size_t(ca)] >= 0) {
            // Free ca at d by flipping the ca/cd alternating path from d.
            // The path cannot reach a, so ca stays free there. Collect the
            // path first, then swap the two colors atomically.
            std::vector<int> path;
            int cur = at_d[std::size_t(d)][std::size_t(ca)];
            bool on_ancilla = true;
            int look = cd;
            while (cur >= 0) {
                path.push_back(cur);
                auto [pa, pd] = edges[std::size_t(cur)];
                cur = on_ancilla ? at_a[std::size_t(pa)][std::size_t(look)]
                                 : at_d[std::size_t(pd)][std::size_t(look)];
                on_ancilla = !on_ancilla;
                look = look == ca ? cd : ca;
            }
            for (int pe : path) {
                auto [pa, pd] = edges[std::size_t(pe)];
                const int c = edge_color[std::size_t(pe)];
                at_a[std::size_t(pa)][std::size_t(c)] = -1;
                at_d[std::size_t(pd)][std::size_t(c)] = -1;
            }
            for (int pe : path) {
                auto [pa, pd] = edges[std::size_t(pe)];
                const int c = edge_color[std::size_t(pe)] == ca ? cd : ca;
                edge_color[std::size_t(pe)] = c;
                at_a[std::size_t(pa)][std::size_t(c)] = pe;
                at_d[std::size_t(pd)][std::size_t(c)] = pe;
            }
        }
        edge_color[e] = ca;
        at_a[std::size_t(a)][std::size_t(ca)] = int(e);
        at_d[std::size_t(d)][std::size_t(ca)] = int(e);
    }

    ColoredSchedule sched;
    sched.ancilla_count = n_ancilla;
    sched.depth = colors;
    sched.edges.reserve(edges.size());
    for (std::size_t e = 0; e < edges.size(); ++e)
        sched.edges.push_back({edges[e].first, edges[e].second, edge_color[e]});
    std::sort(sched.edges.begin(), sched.edges.end(), [](const auto& x, const auto& y) {
        return std::tie(x.color, x.ancilla, x.data) < std::tie(y.color, y.ancilla, y.data);
    });
    if (colors > target_depth)
        throw DepthExceeded("edge coloring needs " + std::to_string(colors) + " > " +
                                std::to_string(target_depth) + " time slots",
                            sched);
    return sched;
}

// Greedy weight-reduced basis of the row span (span must be small).
BinaryMatrix sparsest_basis(const BinaryMatrix& basis) {
    if (basis.rows() >= 20) throw std::invalid_argument("sparsest_basis: span too large");
    std::vector<std::pair<std::size_t, std::uint32_t>> elems;
    auto combine = [&](std::uint32_t s) {
        BinaryMatrix v(1, basis.cols());
        for (std::size_t r = 0; r < basis.rows(); ++r)
            if ((s >> r) & 1u) v.xor_row_into(basis, r, 0);
        return v;
    };
    for (std::uint32_t s = 1; s < (1u << basis.rows()); ++s) elems.emplace_back(combine(s).row_weight(0), s);
    std::sort(elems.begin(), elems.end());

    BinaryMatrix sparse(basis.rows(), basis.cols());
    std::size_t out = 0;
    for (auto [wt, s] : elems) {
        BinaryMatrix v = combine(s);
        BinaryMatrix trial = out == 0 ? v : sparse.row_slice(0, out).stacked(v);
        if (rank(trial) == out + 1) {
            for (std::size_t c : v.row_support(0)) sparse.set(out, c, true);
            if (++out == basis.rows()) break;
        }
    }
    return sparse;
}

}  // namespace

ColoredSchedule edge_color_schedule(const BinaryMatrix& meas_rows, int target_depth) {
    std::vector<std::pair<int, int>> edges;
    int ancilla = 0;
    for (std::size_t r = 0; r < meas_rows.rows(); ++r) {
        auto support = meas_rows.row_support(r);
        if (support.size() <= 4) {
            for (std::size_t c : support) edges.emplace_back(ancilla, int(c));
            ++ancilla;
        } else {
            // Cat-state measurement: one dedicated ancilla qubit per data
            // qubit, so these edges never collide on the ancilla side. The
            // cat state itself is merged concurrently and adds no depth.
            for (std::size_t c : support) edges.emplace_back(ancilla++, int(c));
        }
    }
    return color_bipartite(edges, ancilla, int(meas_rows.cols()), target_depth);
}

RealizationPlan gauge_msd_plan(int k) {
    check_bh_k(k);
    RealizationPlan plan;
    plan.code = bravyi_haah(k);
    plan.g_perp = build_g_perp(k);
    Rmq rmq = derive_rmq(k);
    plan.r = std::move(rmq.r);
    plan.m = std::move(rmq.m);
    plan.q = std::move(rmq.q);
    plan.w = bh_w_matrix(k);

    plan.x_set = {0, 1, 2};
    for (std::size_t c = 3; c <= 7; ++c) plan.z_set.push_back(c);
    for (std::size_t j = 0; j < std::size_t(k); ++j) {
        plan.o_set.push_back(8 + 3 * j);
        plan.z_set.push_back(9 + 3 * j);
        plan.z_set.push_back(10 + 3 * j);
    }
    std::sort(plan.z_set.begin(), plan.z_set.end());

    // Pauli-correction selectors: row j of h_z (h_x) restricts the logical
    // row (its W representative) to the measured Z (X) qubits.
    plan.h_z = BinaryMatrix(std::size_t(k), plan.z_set.size());
    plan.h_x = BinaryMatrix(std::size_t(k), plan.x_set.size());
    for (std::size_t j = 0; j < std::size_t(k); ++j) {
        for (std::size_t c = 0; c < plan.z_set.size(); ++c)
            if (plan.code.g1.get(j, plan.z_set[c])) plan.h_z.set(j, c, true);
        for (std::size_t c = 0; c < plan.x_set.size(); ++c)
            if (plan.w.get(j, plan.x_set[c])) plan.h_x.set(j, c, true);
    }

    plan.schedule = edge_color_schedule(plan.g_perp, 4);
    return plan;
}

bool plan_detects(const RealizationPlan& plan, const BinaryMatrix& x) {
    return !(plan.m * (plan.g_perp * x.transposed())).is_zero();
}

BinaryMatrix plan_output(const RealizationPlan& plan, const BinaryMatrix& x) {
    BinaryMatrix xt = x.transposed();
    BinaryMatrix out = plan.w * xt + plan.q * (plan.g_perp * xt);
    return out.transposed();
}

std::string plan_listing(const RealizationPlan& plan) {
    std::string out;
    char buf[128];
    auto emit = [&](const char* fmt, auto... args) {
        std::snprintf(buf, sizeof buf, fmt, args...);
        out += buf;
    };
    emit("block bh:%d n=%zu k=%zu ancillas=%d depth=%d\n", plan.code.bh_k, plan.code.n,
         plan.code.k, plan.schedule.ancilla_count, plan.schedule.depth);
    for (int stage = 0; stage < 2; ++stage) {
        const char* basis = stage == 0 ? "Z" : "X";
        for (const auto& e : plan.schedule.edges)
            emit("stage=%s step=%d gate=c%s ancilla=%d data=%d\n", basis, e.color, basis, e.ancilla,
                 e.data);
        if (stage == 0) out += "corr A[R*mu]\n";
    }
    out += "check M*gamma==0\n";
    for (std::size_t q : plan.x_set) emit("measure basis=X qubit=%zu\n", q);
    for (std::size_t q : plan.z_set) emit("measure basis=Z qubit=%zu\n", q);
    for (std::size_t j = 0; j < plan.o_set.size(); ++j)
        emit("output slot=%zu qubit=%zu\n", j, plan.o_set[j]);
    out += "corr X[Hz*mz] Z[Hx*mx+Q*gamma]\n";
    return out;
}

BinaryMatrix reed_muller_g_perp() {
    return BinaryMatrix::parse(
        "000011110000000\n"
        "000000001111000\n"
        "000000001100110\n"
        "000000001010101\n"
        "111100000000000\n"
        "110011000000000\n"
        "101010100000000\n"
        "011000000110000\n"
        "001010000010100\n"
        "100010001000100\n");
}

ColoredSchedule reed_muller_schedule() { return edge_color_schedule(reed_muller_g_perp(), 5); }

ColoredSchedule toffoli_z_schedule() {
    const ProtocolCode tof = toffoli_code();
    // All four dual generators can be taken at weight 4.
    return edge_color_schedule(sparsest_basis(nullspace_basis(tof.g0.stacked(tof.g1))), 4);
}

ColoredSchedule toffoli_x_schedule() {
    // Single weight-8 X check split across two of the four ancillas: four
    // entangling slots each, plus one merge slot.
    ColoredSchedule sched;
    sched.ancilla_count = 2;
    for (int d = 0; d < 8; ++d) sched.edges.push_back({d / 4, d, d % 4});
    sched.depth = 5;
    return sched;
}

std::size_t logical_qubits_per_block(CodeKind kind, int k) {
    switch (kind) {
        case CodeKind::bravyi_haah: return 6 * std::size_t(k) + 14;
        case CodeKind::toffoli: return 12;
        case CodeKind::reed_muller: return 25;
    }
    throw std::logic_error("unknown code kind");
}

BlockTiming block_time(const TimingParams& params, CodeKind kind, int k) {
    if (params.d < 1) throw std::invalid_argument("block_time: distance must be positive");
    BlockTiming out;
    out.t_block = 8 * params.t_cnot() + params.t_a + 2 * params.t_prep + 3 * params.t_measure;
    out.t_block_asymptotic = 8.0 * params.d * params.t_sc;
    out.logical_qubits = logical_qubits_per_block(kind, k);
    out.physical_qubits = out.logical_qubits * std::size_t(params.d) * std::size_t(params.d);
    if (kind == CodeKind::bravyi_haah)
        out.spacetime_leading = (48.0 * k + 112.0) * params.d * params.d * params.d;
    else
        out.spacetime_leading = 8.0 * double(out.logical_qubits) * params.d * params.d * params.d;
    return out;
}

}  // namespace msf
