#include "msf/sim.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace msf {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;

std::uint64_t mix64(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
}

}  // namespace

TrialRng::TrialRng(std::uint64_t seed, std::uint64_t stream)
    : state_(mix64(mix64(seed + kGolden) ^ (stream * 0xBF58476D1CE4E5B9ull + kGolden))) {}

std::uint64_t TrialRng::next() {
    state_ += kGolden;
    return mix64(state_);
}

double TrialRng::next_double() { return double(next() >> 11) * 0x1.0p-53; }

std::uint64_t TrialRng::below(std::uint64_t bound) {
    return std::uint64_t((static_cast<unsigned __int128>(next()) * bound) >> 64);
}

unsigned sim_thread_count() {
    if (const char* env = std::getenv("MSF_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return unsigned(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc ? hc : 1;
}

std::vector<ProtocolCode> FactorySpec::codes() const {
    std::vector<ProtocolCode> out;
    out.reserve(rounds.size());
    for (const auto& r : rounds) out.push_back(r.code);
    return out;
}

std::vector<BinaryMatrix> firewall_shuffle(const std::vector<BinaryMatrix>& branches,
                                           ShufflePolicy policy, TrialRng& rng) {
    if (branches.empty()) throw std::invalid_argument("firewall_shuffle: no branches");
    const std::size_t width = branches.front().cols();
    for (const auto& b : branches)
        if (b.rows() != 1 || b.cols() != width)
            throw std::invalid_argument("firewall_shuffle: branch width mismatch");

    std::vector<BinaryMatrix> permuted;
    permuted.reserve(branches.size());
    for (const auto& b : branches) {
        if (policy == ShufflePolicy::canonical) {
            permuted.push_back(b);
            continue;
        }
        std::vector<std::size_t> perm(width);
        for (std::size_t i = 0; i < width; ++i) perm[i] = i;
        for (std::size_t i = width; i > 1; --i)
            std::swap(perm[i - 1], perm[std::size_t(rng.below(i))]);
        BinaryMatrix p(1, width);
        for (std::size_t i = 0; i < width; ++i)
            if (b.get(0, i)) p.set(0, perm[i], true);
        permuted.push_back(std::move(p));
    }

    // Canonical interleave: block t takes qubit t of branch i as input i.
    std::vector<BinaryMatrix> blocks;
    blocks.reserve(width);
    for (std::size_t t = 0; t < width; ++t) {
        BinaryMatrix in(1, branches.size());
        for (std::size_t i = 0; i < branches.size(); ++i)
            if (permuted[i].get(0, t)) in.set(0, i, true);
        blocks.push_back(std::move(in));
    }
    return blocks;
}

namespace {

// ---- samplers -----------------------------------------------------------

struct BinomialCdf {
    std::vector<double> cdf;
    std::size_t n = 0;

    int sample(TrialRng& rng) const {
        const double u = rng.next_double();
        for (std::size_t i = 0; i < cdf.size(); ++i)
            if (u < cdf[i]) return int(i);
        return int(std::min(cdf.size(), n));
    }
};

BinomialCdf make_binomial_cdf(std::size_t n, double p) {
    BinomialCdf b;
    b.n = n;
    long double term = std::pow(1.0L - (long double)p, static_cast<long double>(n));
    long double cum = 0;
    for (std::size_t k = 0;; ++k) {
        cum += term;
        b.cdf.push_back(double(cum));
        if (k == n || cum > 1.0L - 1e-17L) break;
        term *= static_cast<long double>(n - k) / static_cast<long double>(k + 1) * p / (1.0L - p);
    }
    return b;
}

// Binomial conditioned on count >= 2 (exact pmf ratios).
struct CondGe2 {
    std::vector<double> cdf;  // slot i corresponds to count i+2
    long double p_ge2 = 0;
    std::size_t n = 0;

    int sample(TrialRng& rng) const {
        const double u = rng.next_double();
        for (std::size_t i = 0; i < cdf.size(); ++i)
            if (u < cdf[i]) return int(i) + 2;
        return int(std::min(cdf.size() + 1, n));
    }
};

CondGe2 make_cond_ge2(std::size_t n, double p, const char* what) {
    if (n < 2 || p <= 0)
        throw InvalidPreselection(std::string(what) + ": cannot draw two corrupt branches");
    std::vector<long double> pmf(n + 1);
    long double term = std::pow(1.0L - (long double)p, static_cast<long double>(n));
    pmf[0] = term;
    for (std::size_t k = 0; k < n; ++k) {
        term *= static_cast<long double>(n - k) / static_cast<long double>(k + 1) * p / (1.0L - p);
        pmf[k + 1] = term;
    }
    CondGe2 c;
    c.n = n;
    for (std::size_t k = 2; k <= n; ++k) c.p_ge2 += pmf[k];
    if (!(c.p_ge2 > 0))
        throw InvalidPreselection(std::string(what) + ": conditional mass underflows");
    long double cum = 0;
    for (std::size_t k = 2; k <= n; ++k) {
        cum += pmf[k] / c.p_ge2;
        c.cdf.push_back(double(cum));
        if (cum > 1.0L - 1e-15L) break;
    }
    return c;
}

long double binom_tail_ge2(std::size_t n, double p) {
    if (p <= 0) return 0;
    std::vector<long double> pmf(n + 1);
    long double term = std::pow(1.0L - (long double)p, static_cast<long double>(n));
    pmf[0] = term;
    for (std::size_t k = 0; k < n; ++k) {
        term *= static_cast<long double>(n - k) / static_cast<long double>(k + 1) * p / (1.0L - p);
        pmf[k + 1] = term;
    }
    long double s = 0;
    for (std::size_t k = 2; k <= n; ++k) s += pmf[k];
    return s;
}

// ---- packed factory ------------------------------------------------------

struct PackedRound {
    std::size_t n = 0;          // inputs per block, in units
    std::size_t k = 0;          // logical rows
    std::size_t units_out = 0;  // output units per block
    bool toffoli = false;       // 1-lane units in, 3-lane unit out
    std::vector<std::uint8_t> c0;
    std::vector<std::uint64_t> c1;
};

struct Branch {
    std::array<std::uint64_t, 3> lane{0, 0, 0};

    bool corrupt() const { return (lane[0] | lane[1] | lane[2]) != 0; }
};

enum class Outcome { fail, error, success };

struct Engine {
    std::vector<PackedRound> rounds;
    std::vector<std::size_t> width_in;   // units entering each level
    std::vector<std::size_t> lanes_in;   // lanes of those units
    double eps = 0;
    ShufflePolicy shuffle = ShufflePolicy::canonical;

    BinomialCdf block_raw;               // Bin(n1, eps), block retries
    BinomialCdf tree2_raw;               // Bin(n1*n2, eps), level-2 subtree fast path
    // rare-events samplers
    CondGe2 cond_block;                  // Bin(n1, eps | >= 2)
    CondGe2 cond_r1;                     // corrupt level-1 branches per level-2 module
    CondGe2 cond_r3;                     // corrupt level-2 branches into the final module
    double eps1_analytic = 0;

    // scratch (per worker copy)
    std::vector<Branch> level1_out;      // n2 branches
    std::vector<Branch> level2_in;       // n3 branches
    std::vector<std::uint8_t> positions;
    std::vector<std::uint32_t> slots;
    std::vector<std::uint32_t> placed;
    std::vector<std::uint32_t> corrupt_slots;
    std::vector<std::uint32_t> slots3;
    std::vector<std::size_t> corrupt_idx;
};

Engine compile_engine(const SimConfig& config, bool rare) {
    const auto& rounds = config.factory.rounds;
    if (config.eps < 0 || config.eps >= 1) throw std::invalid_argument("simulate: eps outside [0,1)");
    if (rare && rounds.size() != 3)
        throw std::invalid_argument("rare method requires exactly 3 rounds");
    if (!rare && (rounds.size() < 2 || rounds.size() > 3))
        throw std::invalid_argument("brute method supports 2 or 3 rounds");
    if (config.trials < 1) throw std::invalid_argument("simulate: trials must be >= 1");

    Engine eng;
    eng.eps = config.eps;
    eng.shuffle = config.shuffle;
    std::size_t width = 1, lanes = 1;
    for (const auto& fr : rounds) {
        const ProtocolCode& code = fr.code;
        PackedRound pr;
        pr.n = code.n;
        pr.k = code.k;
        pr.units_out = code.output_units();
        pr.toffoli = code.kind == CodeKind::toffoli;
        if (pr.toffoli && lanes != 1)
            throw std::invalid_argument("simulate: Toffoli round needs single-qubit units");
        if (code.g0.rows() > 8 || code.k > 63)
            throw std::invalid_argument("simulate: code too large to pack");
        pr.c0.assign(code.n, 0);
        pr.c1.assign(code.n, 0);
        for (std::size_t c = 0; c < code.n; ++c) {
            for (std::size_t r = 0; r < code.g0.rows(); ++r)
                if (code.g0.get(r, c)) pr.c0[c] |= std::uint8_t(1u << r);
            for (std::size_t r = 0; r < code.k; ++r)
                if (code.g1.get(r, c)) pr.c1[c] |= std::uint64_t(1) << r;
        }
        eng.width_in.push_back(width);
        eng.lanes_in.push_back(lanes);
        eng.rounds.push_back(std::move(pr));
        width *= code.output_units();
        if (code.kind == CodeKind::toffoli) lanes = 3;
    }
    // Branches between rounds are packed into 64-bit lanes; the final
    // module's output is only inspected for errors, so it is unrestricted.
    for (std::size_t l = 1; l < eng.width_in.size(); ++l)
        if (eng.width_in[l] > 64)
            throw std::invalid_argument("simulate: branch width above 64 units");

    eng.block_raw = make_binomial_cdf(eng.rounds[0].n, config.eps);
    eng.tree2_raw = make_binomial_cdf(eng.rounds[0].n * eng.rounds[1].n, config.eps);
    if (rare) {
        eng.eps1_analytic = global_error_exact(rounds[0].code, config.eps);
        eng.cond_block = make_cond_ge2(eng.rounds[0].n, config.eps, "raw block");
        eng.cond_r1 = make_cond_ge2(eng.rounds[1].n, eng.eps1_analytic, "level-1 branches");
    }
    return eng;
}

void place_distinct(TrialRng& rng, std::uint64_t m, int w, std::vector<std::uint32_t>& out) {
    out.clear();
    for (int i = 0; i < w; ++i) {
        for (;;) {
            const std::uint32_t s = std::uint32_t(rng.below(m));
            if (std::find(out.begin(), out.end(), s) == out.end()) {
                out.push_back(s);
                break;
            }
        }
    }
}

void permute_branch(TrialRng& rng, Branch& b, std::size_t width, std::size_t lanes) {
    std::array<std::uint8_t, 64> perm;
    for (std::size_t i = 0; i < width; ++i) perm[i] = std::uint8_t(i);
    for (std::size_t i = width; i > 1; --i)
        std::swap(perm[i - 1], perm[std::size_t(rng.below(i))]);
    Branch out;
    for (std::size_t b_lane = 0; b_lane < lanes; ++b_lane) {
        const std::uint64_t bits = b.lane[b_lane];
        if (!bits) continue;
        for (std::size_t t = 0; t < width; ++t)
            if ((bits >> t) & 1u) out.lane[b_lane] |= std::uint64_t(1) << perm[t];
    }
    b = out;
}

// One module of round `level` over its input branches. Returns pass/fail;
// fills `out` with the packed output branch when given (intermediate levels
// only, width * units_out <= 64), or just raises `any_error` when not.
bool apply_module(Engine& eng, std::size_t level, std::vector<Branch>& branches, TrialRng& rng,
                  Branch* out, bool* any_error) {
    const PackedRound& rd = eng.rounds[level];
    const std::size_t width = eng.width_in[level];
    const std::size_t lanes = eng.lanes_in[level];
    if (out) *out = {};
    if (any_error) *any_error = false;

    eng.corrupt_idx.clear();
    for (std::size_t i = 0; i < branches.size(); ++i)
        if (branches[i].corrupt()) eng.corrupt_idx.push_back(i);
    if (eng.corrupt_idx.empty()) return true;

    if (eng.shuffle == ShufflePolicy::random_within_branch)
        for (std::size_t i : eng.corrupt_idx) permute_branch(rng, branches[i], width, lanes);

    for (std::size_t t = 0; t < width; ++t) {
        for (std::size_t lane = 0; lane < lanes; ++lane) {
            std::uint8_t synd = 0;
            std::uint64_t y = 0;
            for (std::size_t i : eng.corrupt_idx) {
                if ((branches[i].lane[lane] >> t) & 1u) {
                    synd ^= rd.c0[i];
                    y ^= rd.c1[i];
                }
            }
            if (synd) return false;
            if (!y) continue;
            if (any_error) *any_error = true;
            if (!out) continue;
            if (rd.toffoli) {
                for (std::size_t b = 0; b < 3; ++b)
                    if ((y >> b) & 1u) out->lane[b] |= std::uint64_t(1) << t;
            } else {
                for (std::size_t j = 0; j < rd.k; ++j)
                    if ((y >> j) & 1u) out->lane[lane] |= std::uint64_t(1) << (j * width + t);
            }
        }
    }
    return true;
}

// Round-1 block conditioned on passing its checks; `initial` holds the error
// positions of the first attempt, retries redraw from the raw distribution.
std::uint64_t condition_block(Engine& eng, TrialRng& rng, const std::uint8_t* initial,
                              std::size_t n_initial) {
    const PackedRound& rd = eng.rounds[0];
    const std::uint8_t* pos = initial;
    std::size_t cnt = n_initial;
    for (;;) {
        std::uint8_t synd = 0;
        std::uint64_t y = 0;
        for (std::size_t i = 0; i < cnt; ++i) {
            synd ^= rd.c0[pos[i]];
            y ^= rd.c1[pos[i]];
        }
        if (synd == 0) return y;
        const int w = eng.block_raw.sample(rng);
        eng.positions.resize(std::size_t(w));
        eng.slots.clear();
        for (int i = 0; i < w; ++i) {
            for (;;) {
                const std::uint32_t s = std::uint32_t(rng.below(rd.n));
                if (std::find(eng.slots.begin(), eng.slots.end(), s) == eng.slots.end()) {
                    eng.slots.push_back(s);
                    eng.positions[std::size_t(i)] = std::uint8_t(s);
                    break;
                }
            }
        }
        pos = eng.positions.data();
        cnt = eng.positions.size();
    }
}

void store_block_output(const PackedRound& rd, std::uint64_t y, std::size_t block_index,
                        Branch& branch) {
    if (!y) return;
    if (rd.toffoli) {
        for (std::size_t b = 0; b < 3; ++b)
            if ((y >> b) & 1u) branch.lane[b] |= std::uint64_t(1) << block_index;
    } else {
        branch.lane[0] = y;  // width_in == 1 at level 1: block output is the branch
        (void)block_index;
    }
}

// Level-2 branch conditioned on all its checks passing.
Branch gen_level2_branch(Engine& eng, TrialRng& rng, std::uint64_t* branches_seen,
                         std::uint64_t* branches_corrupt) {
    const std::size_t n1 = eng.rounds[0].n;
    const std::size_t n2 = eng.rounds[1].n;
    std::vector<std::uint32_t>& placed = eng.placed;
    for (;;) {
        const int w_tree = eng.tree2_raw.sample(rng);
        Branch out{};
        if (w_tree == 0) {
            if (branches_seen) ++*branches_seen;
            return out;
        }
        place_distinct(rng, std::uint64_t(n1) * n2, w_tree, placed);
        std::sort(placed.begin(), placed.end());
        eng.level1_out.assign(n2, Branch{});
        bool any = false;
        std::size_t at = 0;
        std::array<std::uint8_t, 64> init;
        for (std::size_t blk = 0; blk < n2 && at < placed.size(); ++blk) {
            std::size_t cnt = 0;
            while (at < placed.size() && placed[at] < (blk + 1) * n1)
                init[cnt++] = std::uint8_t(placed[at++] - blk * n1);
            if (cnt == 0) continue;
            const std::uint64_t y = condition_block(eng, rng, init.data(), cnt);
            store_block_output(eng.rounds[0], y, 0, eng.level1_out[blk]);
            any = any || y != 0;
        }
        if (!any) {
            if (branches_seen) ++*branches_seen;
            return out;
        }
        if (!apply_module(eng, 1, eng.level1_out, rng, &out, nullptr)) continue;
        if (branches_seen) {
            ++*branches_seen;
            if (out.corrupt()) ++*branches_corrupt;
        }
        return out;
    }
}

Outcome classify_final(Engine& eng, std::size_t level, std::vector<Branch>& branches,
                       TrialRng& rng) {
    bool any_error = false;
    if (!apply_module(eng, level, branches, rng, nullptr, &any_error)) return Outcome::fail;
    return any_error ? Outcome::error : Outcome::success;
}

Outcome brute2_trial(Engine& eng, TrialRng& rng) {
    const std::size_t n1 = eng.rounds[0].n;
    const std::size_t n2 = eng.rounds[1].n;
    const int w_tree = eng.tree2_raw.sample(rng);
    if (w_tree == 0) return Outcome::success;

    std::vector<std::uint32_t>& placed = eng.placed;
    place_distinct(rng, std::uint64_t(n1) * n2, w_tree, placed);
    std::sort(placed.begin(), placed.end());
    eng.level1_out.assign(n2, Branch{});
    bool any = false;
    std::size_t at = 0;
    std::array<std::uint8_t, 64> init;
    for (std::size_t blk = 0; blk < n2 && at < placed.size(); ++blk) {
        std::size_t cnt = 0;
        while (at < placed.size() && placed[at] < (blk + 1) * n1)
            init[cnt++] = std::uint8_t(placed[at++] - blk * n1);
        if (cnt == 0) continue;
        const std::uint64_t y = condition_block(eng, rng, init.data(), cnt);
        store_block_output(eng.rounds[0], y, 0, eng.level1_out[blk]);
        any = any || y != 0;
    }
    if (!any) return Outcome::success;
    return classify_final(eng, 1, eng.level1_out, rng);
}

Outcome brute3_trial(Engine& eng, TrialRng& rng, SimCounts& local) {
    const std::size_t n3 = eng.rounds[2].n;
    eng.level2_in.assign(n3, Branch{});
    for (std::size_t i = 0; i < n3; ++i)
        eng.level2_in[i] =
            gen_level2_branch(eng, rng, &local.penultimate_branches, &local.penultimate_corrupt);
    return classify_final(eng, 2, eng.level2_in, rng);
}

std::uint64_t gen_corrupt_block(Engine& eng, TrialRng& rng) {
    const PackedRound& rd = eng.rounds[0];
    std::vector<std::uint32_t>& slots = eng.slots;
    for (;;) {
        const int w = eng.cond_block.sample(rng);
        place_distinct(rng, rd.n, w, slots);
        std::uint8_t synd = 0;
        std::uint64_t y = 0;
        for (const std::uint32_t s : slots) {
            synd ^= rd.c0[s];
            y ^= rd.c1[s];
        }
        if (synd == 0 && y != 0) return y;
    }
}

Branch gen_corrupt_level2(Engine& eng, TrialRng& rng) {
    const std::size_t n2 = eng.rounds[1].n;
    std::vector<std::uint32_t>& corrupt_slots = eng.corrupt_slots;
    for (;;) {
        const int n1c = eng.cond_r1.sample(rng);
        place_distinct(rng, n2, n1c, corrupt_slots);
        eng.level1_out.assign(n2, Branch{});
        for (const std::uint32_t s : corrupt_slots) {
            const std::uint64_t y = gen_corrupt_block(eng, rng);
            store_block_output(eng.rounds[0], y, 0, eng.level1_out[s]);
        }
        Branch out;
        if (!apply_module(eng, 1, eng.level1_out, rng, &out, nullptr)) continue;
        if (out.corrupt()) return out;
    }
}

Outcome rare3_trial(Engine& eng, TrialRng& rng) {
    const std::size_t n3 = eng.rounds[2].n;
    const int n3c = eng.cond_r3.sample(rng);
    std::vector<std::uint32_t>& slots3 = eng.slots3;
    place_distinct(rng, n3, n3c, slots3);
    eng.level2_in.assign(n3, Branch{});
    for (const std::uint32_t s : slots3) eng.level2_in[s] = gen_corrupt_level2(eng, rng);
    return classify_final(eng, 2, eng.level2_in, rng);
}

SimCounts run_trials(const SimConfig& config, const Engine& proto,
                     Outcome (*trial)(Engine&, TrialRng&, SimCounts&)) {
    const unsigned threads =
        unsigned(std::min<std::uint64_t>(sim_thread_count(), config.trials));
    std::vector<SimCounts> partial(threads);
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            Engine eng = proto;  // private scratch per worker
            SimCounts& local = partial[w];
            const std::uint64_t begin = config.trials * w / threads;
            const std::uint64_t end = config.trials * (w + 1) / threads;
            for (std::uint64_t t = begin; t < end; ++t) {
                TrialRng rng(config.seed, t);
                switch (trial(eng, rng, local)) {
                    case Outcome::success: ++local.n_success; break;
                    case Outcome::fail: ++local.n_fail; break;
                    case Outcome::error: ++local.n_error; break;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    SimCounts total;
    for (const auto& p : partial) {
        total.n_success += p.n_success;
        total.n_fail += p.n_fail;
        total.n_error += p.n_error;
        total.penultimate_branches += p.penultimate_branches;
        total.penultimate_corrupt += p.penultimate_corrupt;
    }
    return total;
}

}  // namespace

SimCounts simulate_brute(const SimConfig& config) {
    Engine proto = compile_engine(config, false);
    SimCounts counts;
    if (config.factory.rounds.size() == 2) {
        counts = run_trials(config, proto, [](Engine& e, TrialRng& r, SimCounts&) {
            return brute2_trial(e, r);
        });
        // The final outputs are the penultimate branches of a 3-round run.
        counts.penultimate_branches = counts.n_success + counts.n_error;
        counts.penultimate_corrupt = counts.n_error;
    } else {
        counts = run_trials(config, proto, brute3_trial);
    }
    if (counts.penultimate_branches > 0)
        counts.round2_branch_error_rate =
            double(counts.penultimate_corrupt) / double(counts.penultimate_branches);
    return counts;
}

SimCounts simulate_rare(const SimConfig& config, const SimCounts& round2_stats) {
    Engine proto = compile_engine(config, true);
    const std::size_t n3 = proto.rounds[2].n;
    proto.cond_r3 = make_cond_ge2(n3, round2_stats.round2_branch_error_rate, "level-2 branches");
    SimCounts counts = run_trials(config, proto, [](Engine& e, TrialRng& r, SimCounts&) {
        return rare3_trial(e, r);
    });
    counts.round2_branch_error_rate = round2_stats.round2_branch_error_rate;
    return counts;
}

SimEstimate estimate(const SimCounts& counts, std::size_t n3) {
    const std::uint64_t trials = counts.trials();
    if (trials == 0) throw std::invalid_argument("estimate: no trials");
    const double e2 = counts.round2_branch_error_rate;
    const long double p_num = binom_tail_ge2(n3, e2);
    const long double p0 = std::pow(1.0L - (long double)e2, static_cast<long double>(n3));
    const double a3 = double(counts.n_success) / double(trials);
    const double b3 = double(counts.n_error) / double(trials);

    SimEstimate est;
    est.p_suc_3 = double(p0 + p_num * (a3 + b3));
    est.eps_glo_3 = double((long double)b3 * p_num / est.p_suc_3);
    const double se_b = std::sqrt(std::max(0.0, b3 * (1 - b3) / double(trials)));
    est.stderr_ = double((long double)se_b * p_num / est.p_suc_3);
    est.eps_upper = counts.n_error == 0
                        ? double(3.0L / static_cast<long double>(trials) * p_num / est.p_suc_3)
                        : est.eps_glo_3 + 3 * est.stderr_;
    return est;
}

}  // namespace msf
