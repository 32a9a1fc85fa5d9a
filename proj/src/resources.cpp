#include "msf/resources.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <functional>
#include <map>
#include <sstream>

#include "msf/realization.hpp"

namespace msf {

namespace {

int tau_steps_for(const ProtocolCode& code) {
    switch (code.kind) {
        case CodeKind::bravyi_haah: return 11;
        case CodeKind::toffoli: return 12;
        case CodeKind::reed_muller: return 13;
    }
    return 11;
}

// Per-unit error leaving each block-checked round, inverted from the
// rendered report (eps_glo = 1 - (1-p)^width).
std::vector<double> block_unit_chain(const std::vector<RoundReport>& reports) {
    std::vector<double> p;
    for (const auto& rep : reports)
        p.push_back(-std::expm1(std::log1p(-rep.eps_glo) / double(rep.branch_width)));
    return p;
}

}  // namespace

double logical_error(int d, double p_g) {
    if (d < 3 || d % 2 == 0) throw std::invalid_argument("logical_error: d must be odd and >= 3");
    if (p_g >= 1e-2) throw Unachievable("logical_error: formula diverges for p_g >= 1e-2");
    return double(d) * std::pow(100.0 * p_g, (d + 1) / 2);
}

int required_distance(double p_target, double p_g) {
    if (p_target <= 0 || p_target >= 1) throw std::invalid_argument("required_distance: bad target");
    for (int d = 3; d < 20001; d += 2)
        if (logical_error(d, p_g) <= p_target) return d;
    throw Unachievable("required_distance: no distance below 20001 suffices");
}

double epsilon_target(double p_suc_alg, double n_iterations) {
    if (p_suc_alg <= 0 || p_suc_alg > 1) throw std::invalid_argument("epsilon_target: bad p_suc");
    if (n_iterations < 1) throw std::invalid_argument("epsilon_target: iterations < 1");
    return -std::expm1(std::log(p_suc_alg) / n_iterations);
}

std::string FactoryDesign::name() const {
    std::string out = mode == CheckMode::module ? "module[" : "block[";
    for (std::size_t i = 0; i < rounds.size(); ++i) {
        if (i) out += ",";
        out += rounds[i].name();
        if (i < attempts.size() && attempts[i] != 1) out += "x" + std::to_string(attempts[i]);
    }
    return out + "]";
}

double round_success_probability(double p_block, int attempts, std::uint64_t blocks) {
    if (attempts < 1) throw std::invalid_argument("round_success_probability: attempts < 1");
    if (p_block <= 0) return 0;
    if (p_block >= 1) return 1;
    const double fail_all = std::exp(attempts * std::log1p(-p_block));
    return std::exp(double(blocks) * std::log1p(-fail_all));
}

namespace {

struct ChainInfo {
    std::vector<RoundReport> reports;
    std::vector<double> unit_error_in;   // per-unit error entering each round
    std::vector<bool> toffoli_units;     // round operates on 3-qubit units
    std::uint64_t states_per_iteration = 1;
    std::uint64_t qubits_per_iteration = 1;
    double eps_glo = 0;
};

ChainInfo analyze_chain(const FactoryDesign& design, double eps_in) {
    ChainInfo info;
    info.reports = design.mode == CheckMode::module
                       ? track_module_checked(design.rounds, eps_in)
                       : track_block_checked(design.rounds, eps_in);
    bool tof = false;
    double p = eps_in;
    const std::vector<double> chain = design.mode == CheckMode::block
                                          ? block_unit_chain(info.reports)
                                          : std::vector<double>();
    for (std::size_t i = 0; i < design.rounds.size(); ++i) {
        info.unit_error_in.push_back(p);
        info.toffoli_units.push_back(tof);
        if (design.rounds[i].kind == CodeKind::toffoli) tof = true;
        if (design.mode == CheckMode::block) {
            p = chain[i];
        } else {
            // Conditional per-unit rate entering the next module check: the
            // branch global spread over its width.
            const auto& rep = info.reports[i];
            p = -std::expm1(std::log1p(-rep.eps_glo) / double(rep.branch_width));
        }
    }
    info.states_per_iteration = info.reports.back().branch_width;
    info.qubits_per_iteration = info.states_per_iteration * (tof ? 3 : 1);
    info.eps_glo = info.reports.back().eps_glo;
    return info;
}

int distance_for_budget(double budget, double steps, double p_g) {
    if (budget <= 0) throw FactoryInvalid("balanced_investment: empty error budget");
    return required_distance(std::min(0.999, budget / steps), p_g);
}

// Leading-order required input quality for a round that must emit per-unit
// error `out`.
double invert_round(const ProtocolCode& code, double out) {
    const EtaFunction& e = cached_eta(code);
    if (code.kind == CodeKind::reed_muller) return std::cbrt(out / double(e.total()));
    std::uint64_t coef = e.total();
    if (code.kind == CodeKind::bravyi_haah) {
        coef = 0;
        for (std::size_t j = 0; j < code.k; ++j) coef = std::max(coef, e.marginal(j));
    }
    return std::sqrt(out / double(coef));
}

std::uint64_t block_logical_qubits(const ProtocolCode& code, bool toffoli_units) {
    return logical_qubits_per_block(code.kind, code.bh_k) * (toffoli_units ? 3 : 1);
}

}  // namespace

std::vector<int> balanced_investment(const FactoryDesign& design, const ResourceParams& params,
                                     double eps_target) {
    if (design.rounds.empty()) throw std::invalid_argument("balanced_investment: no rounds");
    const double eps_in = params.eps_in();
    const ChainInfo info = analyze_chain(design, eps_in);
    if (info.eps_glo > eps_target)
        throw FactoryInvalid(design.name() + ": global error " + std::to_string(info.eps_glo) +
                             " misses target");

    const std::size_t r = design.rounds.size();
    std::vector<int> d(r, 3);
    if (design.mode == CheckMode::module) {
        // Intermediate rounds protect the correlated-error budget; the last
        // round is encoded for the target itself.
        for (std::size_t i = 0; i < r; ++i) {
            const auto& rep = info.reports[i];
            const std::uint64_t qubits =
                rep.branch_width *
                ((design.rounds[i].kind == CodeKind::toffoli || info.toffoli_units[i]) ? 3 : 1);
            const double local = i + 1 == r ? eps_target : rep.eps_glo;
            const double budget = 0.1 * local / double(qubits);
            d[i] = distance_for_budget(budget, tau_steps_for(design.rounds[i]), params.p_g);
        }
    } else {
        // Backward recursion from the per-qubit target; rounds whose
        // required input the raw states already meet are dropped.
        std::size_t start = 0;
        std::vector<double> req(r, 0);
        {
            const double p_top =
                -std::expm1(std::log1p(-eps_target) / double(info.qubits_per_iteration));
            double need = p_top;
            for (std::size_t i = r; i-- > 0;) {
                req[i] = need;
                need = invert_round(design.rounds[i], need);
                if (i > 0 && need >= eps_in) {
                    start = i;
                    break;
                }
            }
        }
        if (start > 0) {
            // Verify the shortened chain with the exact forward rates.
            FactoryDesign suffix = design;
            suffix.rounds.assign(design.rounds.begin() + std::ptrdiff_t(start), design.rounds.end());
            suffix.attempts.clear();
            const ChainInfo fwd = analyze_chain(suffix, eps_in);
            if (fwd.eps_glo > eps_target) start = 0;
        }
        d.assign(r - start, 3);
        for (std::size_t i = start; i < r; ++i) {
            const double v = double(block_logical_qubits(design.rounds[i], info.toffoli_units[i])) *
                             tau_steps_for(design.rounds[i]);
            d[i - start] = distance_for_budget(0.1 * req[i], v, params.p_g);
        }
    }
    for (std::size_t i = 1; i < d.size(); ++i) d[i] = std::max(d[i], d[i - 1]);
    return d;
}

namespace {

// Attempt-independent part of a layout: trimmed design, distances, chain.
struct LayoutCore {
    FactoryDesign used;  // attempts not filled in
    std::vector<int> distances;
    ChainInfo info;
    std::vector<std::uint64_t> modules_after;
    double eps_target = 0;
};

LayoutCore make_layout_core(const FactoryDesign& design, const ResourceParams& params,
                            double eps_target) {
    LayoutCore core;
    core.eps_target = eps_target;
    core.distances = balanced_investment(design, params, eps_target);
    core.used = design;
    core.used.attempts.clear();
    if (core.distances.size() < design.rounds.size()) {
        const std::size_t drop = design.rounds.size() - core.distances.size();
        core.used.rounds.assign(design.rounds.begin() + std::ptrdiff_t(drop), design.rounds.end());
    }
    core.info = analyze_chain(core.used, params.eps_in());
    const std::size_t r = core.used.rounds.size();
    core.modules_after.assign(r, 1);
    for (std::size_t i = r - 1; i-- > 0;)
        core.modules_after[i] = core.modules_after[i + 1] * core.used.rounds[i + 1].n;
    return core;
}

FactoryLayout fill_layout(const LayoutCore& core, const std::vector<int>& attempts,
                          const ResourceParams& params, MagicKind kind) {
    FactoryLayout layout;
    layout.design = core.used;
    layout.design.attempts = attempts;
    layout.output_kind = kind;
    layout.eps_target = core.eps_target;
    layout.eps_glo = core.info.eps_glo;
    layout.states_per_iteration = core.info.states_per_iteration;

    const std::size_t r = core.used.rounds.size();
    double inv_denominator = 1;  // prod k_i P_i
    double volume_sum = 0;
    std::uint64_t width = 1;
    for (std::size_t i = 0; i < r; ++i) {
        const ProtocolCode& code = core.used.rounds[i];
        RoundLayout rl;
        rl.protocol = code.name();
        rl.d = core.distances[i];
        rl.attempts = i < attempts.size() ? attempts[i] : 1;
        rl.tau_steps = tau_steps_for(code);
        rl.blocks = width * core.modules_after[i];
        rl.logical_qubits = rl.blocks * block_logical_qubits(code, core.info.toffoli_units[i]);
        rl.time_seconds = double(rl.tau_steps) * rl.d * params.t_sc * rl.attempts;

        const double p_block = core.info.reports[i].p_suc;
        const std::uint64_t slots =
            core.used.mode == CheckMode::module ? core.modules_after[i] : rl.blocks;
        rl.p_round = round_success_probability(p_block, rl.attempts, slots);

        volume_sum += double(rl.logical_qubits) * rl.tau_steps * rl.attempts * std::pow(rl.d, 3);
        inv_denominator *= double(code.output_units()) * rl.p_round;
        layout.physical_data_qubits += rl.logical_qubits * std::uint64_t(rl.d) * std::uint64_t(rl.d);
        width *= code.output_units();
        layout.rounds.push_back(rl);
    }
    if (inv_denominator <= 0)
        throw FactoryInvalid(layout.design.name() + ": zero success probability");
    layout.volume_per_state = volume_sum / inv_denominator;
    layout.volume_per_request = layout.volume_per_state;
    const auto& last = layout.rounds.back();
    double p_all = 1;
    for (const auto& rl : layout.rounds) p_all *= rl.p_round;
    layout.rate_per_tsc = double(layout.states_per_iteration) * p_all /
                          (double(last.tau_steps) * last.d * last.attempts);
    return layout;
}

}  // namespace

FactoryLayout layout_factory(const FactoryDesign& design, const ResourceParams& params,
                             double eps_target, MagicKind kind) {
    std::vector<int> attempts = design.attempts;
    attempts.resize(design.rounds.size(), 1);
    const LayoutCore core = make_layout_core(design, params, eps_target);
    if (core.used.rounds.size() < attempts.size())
        attempts.erase(attempts.begin(),
                       attempts.begin() + std::ptrdiff_t(attempts.size() - core.used.rounds.size()));
    return fill_layout(core, attempts, params, kind);
}

double spacetime_volume(const FactoryLayout& layout) { return layout.volume_per_state; }

namespace {

std::vector<int> bh_grid() {
    std::vector<int> ks;
    for (int k = 2; k <= 50; k += 4) ks.push_back(k);
    return ks;
}

// Protocol menus per position. T-state factories draw from Bravyi-Haah and
// Reed-Muller; Toffoli factories place exactly one Toffoli round first or
// last (the validated orderings).
std::vector<std::vector<ProtocolCode>> round_sequences(MagicKind kind, std::size_t rounds) {
    std::vector<std::vector<ProtocolCode>> out;
    std::vector<ProtocolCode> t_menu;
    for (int k : bh_grid()) t_menu.push_back(bravyi_haah(k));
    t_menu.push_back(reed_muller_code());

    std::vector<std::vector<ProtocolCode>> t_seqs;
    std::vector<ProtocolCode> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t depth) {
        if (depth == 0) {
            t_seqs.push_back(cur);
            return;
        }
        for (const auto& code : t_menu) {
            cur.push_back(code);
            rec(depth - 1);
            cur.pop_back();
        }
    };

    if (kind == MagicKind::t_state) {
        rec(rounds);
        return t_seqs;
    }
    // Toffoli output: Tof alone, Tof followed by Bravyi-Haah rounds, or
    // Bravyi-Haah rounds followed by Tof.
    const ProtocolCode tof = toffoli_code();
    if (rounds == 1) {
        out.push_back({tof});
        return out;
    }
    std::vector<std::vector<ProtocolCode>> bh_seqs;
    {
        std::vector<ProtocolCode> bh_menu;
        for (int k : bh_grid()) bh_menu.push_back(bravyi_haah(k));
        std::function<void(std::size_t)> rec2 = [&](std::size_t depth) {
            if (depth == 0) {
                bh_seqs.push_back(cur);
                return;
            }
            for (const auto& code : bh_menu) {
                cur.push_back(code);
                rec2(depth - 1);
                cur.pop_back();
            }
        };
        rec2(rounds - 1);
    }
    for (const auto& seq : bh_seqs) {
        std::vector<ProtocolCode> first{tof};
        first.insert(first.end(), seq.begin(), seq.end());
        out.push_back(std::move(first));
        std::vector<ProtocolCode> last = seq;
        last.push_back(tof);
        out.push_back(std::move(last));
    }
    return out;
}

std::vector<std::vector<int>> attempt_grids(std::size_t rounds) {
    static const std::vector<int> options{1, 2, 3, 4};
    std::vector<std::vector<int>> out;
    std::vector<int> cur(rounds, 1);
    std::function<void(std::size_t)> rec = [&](std::size_t i) {
        if (i == rounds) {
            out.push_back(cur);
            return;
        }
        for (int t : options) {
            cur[i] = t;
            rec(i + 1);
        }
    };
    rec(0);
    return out;
}

bool sequence_has_rm(const std::vector<ProtocolCode>& seq) {
    for (const auto& c : seq)
        if (c.kind == CodeKind::reed_muller) return true;
    return false;
}

struct Candidate {
    FactoryLayout layout;
    double per_request = std::numeric_limits<double>::infinity();
    std::uint64_t request_factor = 1;  // states consumed per requested unit
};

template <typename Fn>
void for_each_valid_layout(const ResourceParams& params, double n_states, MagicKind kind, Fn&& fn) {
    for (std::size_t rounds = 1; rounds <= 3; ++rounds) {
        // A factory of T states can serve a Toffoli request with 7 parallel
        // T states per gate.
        std::vector<std::pair<MagicKind, std::uint64_t>> routes;
        routes.emplace_back(kind, 1);
        if (kind == MagicKind::toffoli) routes.emplace_back(MagicKind::t_state, 7);
        for (const auto& [route_kind, factor] : routes) {
            for (const auto& seq : round_sequences(route_kind, rounds)) {
                for (CheckMode mode : {CheckMode::module, CheckMode::block}) {
                    if (mode == CheckMode::module && sequence_has_rm(seq)) continue;
                    std::uint64_t per_iter = 1;
                    for (const auto& c : seq) per_iter *= c.output_units();
                    const double iterations =
                        std::max(1.0, n_states * double(factor) / double(per_iter));
                    const double eps_t = epsilon_target(params.p_suc_alg, iterations);
                    LayoutCore core;
                    try {
                        core = make_layout_core(FactoryDesign{seq, mode, {}}, params, eps_t);
                    } catch (const FactoryInvalid&) {
                        continue;
                    } catch (const Unachievable&) {
                        continue;
                    } catch (const std::invalid_argument&) {
                        continue;
                    }
                    for (const auto& attempts : attempt_grids(core.used.rounds.size())) {
                        try {
                            FactoryLayout layout = fill_layout(core, attempts, params, route_kind);
                            layout.volume_per_request = layout.volume_per_state * double(factor);
                            fn(layout, factor);
                        } catch (const FactoryInvalid&) {
                        }
                    }
                }
            }
        }
    }
}

}  // namespace

FactoryLayout optimize_factory(const ResourceParams& params, double n_states, MagicKind kind) {
    Candidate best;
    bool found = false;
    for_each_valid_layout(params, n_states, kind,
                          [&](const FactoryLayout& layout, std::uint64_t factor) {
                              const double v = layout.volume_per_request;
                              bool better = false;
                              if (!found || v < best.per_request * (1 - 1e-12)) {
                                  better = true;
                              } else if (v <= best.per_request * (1 + 1e-12)) {
                                  if (layout.physical_data_qubits <
                                      best.layout.physical_data_qubits)
                                      better = true;
                                  else if (layout.physical_data_qubits ==
                                               best.layout.physical_data_qubits &&
                                           layout.rounds.size() < best.layout.rounds.size())
                                      better = true;
                              }
                              if (better) {
                                  best.layout = layout;
                                  best.per_request = v;
                                  best.request_factor = factor;
                                  found = true;
                              }
                          });
    if (!found) throw NoValidFactory("optimize_factory: no candidate reaches the target");
    return best.layout;
}

double ShorTask::toffoli_count() const { return 40.0 * double(bits) * double(bits) * double(bits); }

TimeOptimalResult time_optimal_sizing(const ShorTask& task, const ResourceParams& params) {
    TimeOptimalResult best;
    best.physical_data_qubits = std::numeric_limits<std::uint64_t>::max();
    bool found = false;
    const double n_states = task.toffoli_count();
    for_each_valid_layout(
        params, n_states, MagicKind::toffoli, [&](const FactoryLayout& layout, std::uint64_t factor) {
            // One Toffoli-equivalent per t_meas/ff on average.
            const double required = double(factor) / params.t_meas_ff_ratio;
            if (layout.rate_per_tsc <= 0) return;
            const std::uint64_t copies =
                std::uint64_t(std::ceil(required / layout.rate_per_tsc - 1e-12));
            const std::uint64_t physical = copies * layout.physical_data_qubits;
            if (!found || physical < best.physical_data_qubits) {
                best.layout = layout;
                best.copies = copies;
                best.physical_data_qubits = physical;
                best.required_rate_per_tsc = required;
                found = true;
            }
        });
    if (!found) throw NoValidFactory("time_optimal_sizing: no candidate reaches the target");
    best.runtime_seconds = task.toffoli_count() * params.t_meas_ff();
    return best;
}

std::vector<ScalingPoint> scaling_curve(const ResourceParams& params,
                                        const std::vector<double>& n_grid, MagicKind kind) {
    std::vector<ScalingPoint> out;
    for (double n : n_grid) {
        if (n <= 1) continue;  // degenerate, excluded
        ScalingPoint pt;
        pt.n_states = n;
        pt.volume_per_state = optimize_factory(params, n, kind).volume_per_request;
        const int d = required_distance(epsilon_target(params.p_suc_alg, n), params.p_g);
        pt.cnot_volume = 2.0 * std::pow(double(d), 3);
        out.push_back(pt);
    }
    return out;
}

ScalingFit fit_scaling(const std::vector<ScalingPoint>& points) {
    if (points.size() < 3) throw std::invalid_argument("fit_scaling: need at least 3 points");
    auto solve_ac = [&](double b, double& a, double& c, double& rss) {
        double sxx = 0, sx = 0, sxy = 0, sy = 0, s1 = double(points.size());
        for (const auto& pt : points) {
            const double x = std::pow(std::log(pt.n_states), b);
            sxx += x * x;
            sx += x;
            sxy += x * pt.volume_per_state;
            sy += pt.volume_per_state;
        }
        const double det = sxx * s1 - sx * sx;
        a = (sxy * s1 - sx * sy) / det;
        c = (sxx * sy - sx * sxy) / det;
        rss = 0;
        for (const auto& pt : points) {
            const double x = std::pow(std::log(pt.n_states), b);
            const double e = pt.volume_per_state - (a * x + c);
            rss += e * e;
        }
    };
    ScalingFit fit;
    double best_rss = std::numeric_limits<double>::infinity();
    for (double b = 0.5; b <= 6.0; b += 0.01) {
        double a, c, rss;
        solve_ac(b, a, c, rss);
        if (rss < best_rss) {
            best_rss = rss;
            fit = {a, b, c};
        }
    }
    return fit;
}

std::vector<YieldPoint> yield_curve(double eps_in, const std::vector<double>& targets) {
    struct Entry {
        double per_qubit_error;
        double cost;
        std::string name;
    };
    std::vector<Entry> entries_block, entries_module;
    std::vector<ProtocolCode> menu;
    for (int k : bh_grid()) menu.push_back(bravyi_haah(k));

    std::vector<ProtocolCode> cur;
    std::function<void(std::size_t)> rec = [&](std::size_t depth) {
        if (!cur.empty()) {
            for (CheckMode mode : {CheckMode::block, CheckMode::module}) {
                const auto reports = mode == CheckMode::block ? track_block_checked(cur, eps_in)
                                                              : track_module_checked(cur, eps_in);
                const auto& last = reports.back();
                const double per_qubit =
                    -std::expm1(std::log1p(-last.eps_glo) / double(last.branch_width));
                Entry e{per_qubit, cost(cur, eps_in, mode), FactoryDesign{cur, mode, {}}.name()};
                (mode == CheckMode::block ? entries_block : entries_module).push_back(e);
            }
        }
        if (depth == 3) return;
        for (const auto& code : menu) {
            cur.push_back(code);
            rec(depth + 1);
            cur.pop_back();
        }
    };
    rec(0);

    std::vector<YieldPoint> out;
    for (double t : targets) {
        YieldPoint pt;
        pt.eps_target = t;
        pt.cost_block = pt.cost_module = std::numeric_limits<double>::infinity();
        for (const auto& e : entries_block)
            if (e.per_qubit_error <= t && e.cost < pt.cost_block) {
                pt.cost_block = e.cost;
                pt.best_block = e.name;
            }
        for (const auto& e : entries_module)
            if (e.per_qubit_error <= t && e.cost < pt.cost_module) {
                pt.cost_module = e.cost;
                pt.best_module = e.name;
            }
        out.push_back(pt);
    }
    return out;
}

ResourceParams load_resource_params(const std::string& text) {
    ResourceParams p;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        while (!line.empty() && std::isspace(static_cast<unsigned char>(line.back()))) line.pop_back();
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw std::invalid_argument("params: expected key=value: " + line);
        const std::string key = line.substr(0, eq);
        const double value = std::stod(line.substr(eq + 1));
        if (key == "pg")
            p.p_g = value;
        else if (key == "tsc")
            p.t_sc = value;
        else if (key == "tmeasff_ratio")
            p.t_meas_ff_ratio = value;
        else if (key == "epsin_factor")
            p.eps_in_factor = value;
        else if (key == "psucalg")
            p.p_suc_alg = value;
        else
            throw std::invalid_argument("params: unknown key " + key);
    }
    return p;
}

std::string save_resource_params(const ResourceParams& p) {
    char buf[256];
    std::snprintf(buf, sizeof buf,
                  "pg=%.5e\ntsc=%.5e\ntmeasff_ratio=%.5e\nepsin_factor=%.5e\npsucalg=%.5e\n", p.p_g,
                  p.t_sc, p.t_meas_ff_ratio, p.eps_in_factor, p.p_suc_alg);
    return buf;
}

}  // namespace msf
