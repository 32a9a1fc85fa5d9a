#include "msf/tracking.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>
#include <stdexcept>

namespace msf {

namespace {

double log_big(const BigInt& v) {
    if (v <= 0) throw std::invalid_argument("log_big: nonpositive");
    const std::size_t bits = boost::multiprecision::msb(v);
    if (bits < 900) return std::log(v.convert_to<double>());
    const std::uint64_t top = BigInt(v >> (bits - 62)).convert_to<std::uint64_t>();
    return std::log(double(top)) + double(bits - 62) * std::log(2.0);
}

double log_sum_exp(double a, double b) {
    if (a == -std::numeric_limits<double>::infinity()) return b;
    if (b == -std::numeric_limits<double>::infinity()) return a;
    const double hi = std::max(a, b), lo = std::min(a, b);
    return hi + std::log1p(std::exp(lo - hi));
}

void check_module_rounds(const std::vector<ProtocolCode>& rounds) {
    if (rounds.empty()) throw std::invalid_argument("tracking: no rounds");
    for (const auto& code : rounds) {
        if (cached_eta(code).input_weight != 2)
            throw std::invalid_argument("module tracking needs distance-2 rounds, got " + code.name());
    }
}

}  // namespace

const EtaFunction& cached_eta(const ProtocolCode& code) {
    static std::mutex mu;
    static std::map<std::string, EtaFunction> cache;
    std::lock_guard lock(mu);
    auto it = cache.find(code.name());
    if (it == cache.end()) it = cache.emplace(code.name(), eta(code)).first;
    return it->second;
}

BigInt cached_sum_eta_power(const ProtocolCode& code, unsigned m) {
    const EtaFunction& e = cached_eta(code);
    BigInt total = 0;
    for (const auto& [y, c] : e.counts) total += boost::multiprecision::pow(BigInt(c), m);
    return total;
}

std::vector<TrackingState> module_tracking_states(const std::vector<ProtocolCode>& rounds, double eps) {
    check_module_rounds(rounds);
    if (eps < 0 || eps >= 0.5) throw std::invalid_argument("tracking: eps outside [0, 0.5)");

    const double log1m = std::log1p(-eps);
    const double logeps = eps > 0 ? std::log(eps) : -std::numeric_limits<double>::infinity();

    std::vector<TrackingState> states;
    std::uint64_t m = 1;
    for (std::size_t l = 1; l <= rounds.size(); ++l) {
        TrackingState st;
        st.level = int(l);
        m *= rounds[l - 1].n;
        st.m = m;
        st.c = 1;
        for (std::size_t j = 1; j <= l; ++j)
            st.c *= cached_sum_eta_power(rounds[j - 1], 1u << (l - j));
        const double twol = double(std::uint64_t(1) << l);
        st.log_a = double(m) * log1m;
        st.log_b = eps > 0 ? log_big(st.c) + twol * logeps + (double(m) - twol) * log1m
                           : -std::numeric_limits<double>::infinity();
        states.push_back(std::move(st));
    }
    return states;
}

std::vector<RoundReport> track_module_checked(const std::vector<ProtocolCode>& rounds, double eps) {
    const std::vector<TrackingState> states = module_tracking_states(rounds, eps);
    std::vector<RoundReport> reports;
    double prev_lse = 0;  // log(A_0 + B_0) = log 1
    std::uint64_t width = 1;
    for (std::size_t l = 0; l < states.size(); ++l) {
        const double lse = log_sum_exp(states[l].log_a, states[l].log_b);
        RoundReport rep;
        rep.p_suc = std::exp(lse - double(rounds[l].n) * prev_lse);
        rep.eps_glo = std::exp(states[l].log_b - lse);
        width *= rounds[l].output_units();
        rep.branch_width = width;
        rep.method = RoundReport::Rate::exact;
        reports.push_back(rep);
        prev_lse = lse;
    }
    return reports;
}

BigInt leading_coefficient(const std::vector<ProtocolCode>& rounds) {
    if (rounds.empty() || rounds.size() > 3)
        throw std::invalid_argument("leading_coefficient: 1-3 rounds");
    check_module_rounds(rounds);
    const std::size_t l = rounds.size();
    BigInt c = 1;
    for (std::size_t j = 1; j <= l; ++j)
        c *= cached_sum_eta_power(rounds[j - 1], 1u << (l - j));
    return c;
}

namespace {

// Largest per-qubit marginal over output positions (identical across
// positions for the translational families, but not assumed).
double worst_qubit_error_exact(const ProtocolCode& code, double p) {
    double worst = 0;
    for (std::size_t j = 0; j < code.k; ++j)
        worst = std::max(worst, qubit_error_exact(code, j, p));
    return worst;
}

std::uint64_t worst_eta_marginal(const ProtocolCode& code) {
    const EtaFunction& e = cached_eta(code);
    std::uint64_t worst = 0;
    for (std::size_t j = 0; j < code.k; ++j) worst = std::max(worst, e.marginal(j));
    return worst;
}

}  // namespace

std::vector<RoundReport> track_block_checked(const std::vector<ProtocolCode>& rounds, double eps) {
    if (rounds.empty()) throw std::invalid_argument("tracking: no rounds");
    if (eps < 0 || eps >= 0.5) throw std::invalid_argument("tracking: eps outside [0, 0.5)");

    std::vector<RoundReport> reports;
    double p = eps;  // per-unit error entering the round
    bool toffoli_units = false;
    std::uint64_t width = 1;
    for (const auto& code : rounds) {
        RoundReport rep;
        rep.p_suc = success_probability_exact(code, p);
        if (code.kind == CodeKind::toffoli) {
            if (toffoli_units)
                throw std::invalid_argument("track_block_checked: Toffoli round needs T inputs");
            rep.method = RoundReport::Rate::exact;
            p = global_error_exact(code, p);
            toffoli_units = true;
        } else if (!toffoli_units) {
            rep.method = RoundReport::Rate::exact;
            p = worst_qubit_error_exact(code, p);
        } else {
            // Units carry three correlated qubits; only the eta-derived
            // leading order is tracked for them.
            rep.method = RoundReport::Rate::leading_order;
            p = double(worst_eta_marginal(code)) * p * p;
        }
        width *= code.output_units();
        rep.branch_width = width;
        rep.eps_glo = -std::expm1(double(width) * std::log1p(-p));
        reports.push_back(rep);
    }
    return reports;
}

double cost(const std::vector<ProtocolCode>& rounds, double eps, CheckMode mode) {
    if (rounds.empty()) throw std::invalid_argument("cost: no rounds");
    double total = 1;
    if (mode == CheckMode::module) {
        const auto reports = track_module_checked(rounds, eps);
        for (std::size_t l = 0; l < rounds.size(); ++l) {
            // A level-1 module is a single block whose acceptance is known
            // exactly; higher levels keep the tracked conditionals.
            const double p_suc =
                l == 0 ? success_probability_exact(rounds[0], eps) : reports[l].p_suc;
            total *= double(rounds[l].n) / (double(rounds[l].output_units()) * p_suc);
        }
    } else {
        double p = eps;
        bool toffoli_units = false;
        for (const auto& code : rounds) {
            const double psuc = success_probability_exact(code, p);
            total *= double(code.n) / (double(code.output_units()) * psuc);
            if (code.kind == CodeKind::toffoli) {
                p = global_error_exact(code, p);
                toffoli_units = true;
            } else if (!toffoli_units) {
                p = worst_qubit_error_exact(code, p);
            } else {
                p = double(worst_eta_marginal(code)) * p * p;
            }
        }
    }
    return total;
}

std::string render_reports(const std::vector<ProtocolCode>& rounds,
                           const std::vector<RoundReport>& reports) {
    std::string out;
    char buf[192];
    for (std::size_t l = 0; l < reports.size(); ++l) {
        std::snprintf(buf, sizeof buf,
                      "level=%zu protocol=%s p_suc=%.5e eps_glo=%.5e branch_width=%llu rate=%s\n",
                      l + 1, rounds[l].name().c_str(), reports[l].p_suc, reports[l].eps_glo,
                      static_cast<unsigned long long>(reports[l].branch_width),
                      reports[l].method == RoundReport::Rate::exact ? "exact" : "leading_order");
        out += buf;
    }
    return out;
}

}  // namespace msf
