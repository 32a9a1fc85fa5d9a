#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "msf/resources.hpp"

namespace msf {

inline constexpr const char* kToolVersion = "msf 0.1.0";

/// Scientific notation with 6 significant digits ('.' decimal separator).
std::string sci6(double v);

std::uint64_t fnv1a(std::string_view data);

/// CSV with a fixed header row; numeric cells must already be formatted.
class CsvWriter {
  public:
    explicit CsvWriter(const std::vector<std::string>& header);
    void add_row(const std::vector<std::string>& cells);
    const std::string& text() const { return text_; }

  private:
    std::string text_;
    std::size_t columns_;
};

/// Reproducibility record written next to every emitted file set: command,
/// parameters, seed, tool version and output digests. Re-running a manifest
/// reproduces byte-identical outputs.
struct RunManifest {
    std::string command;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::pair<std::string, std::uint64_t>> outputs;

    void add_output(const std::string& path, const std::string& content);
    std::string to_json() const;
};

/// One reference-vs-computed comparison line.
struct CompareRow {
    std::string label;
    double reference = 0;
    double computed = 0;
    double ratio = 0;
    bool pass = false;
};

/// Leading-coefficient table: census values against the closed forms, for
/// both table halves and k in {2,6,10,14}; exact integer equality required.
struct CoefficientRow {
    std::string family;
    std::vector<int> ks;
    BigInt computed;
    BigInt closed_form;
    bool match = false;
};

std::vector<CoefficientRow> coefficient_table_rows();
/// Large-k sanity: computed / (limit coefficient * prod k_i^2) at k = 50.
std::vector<CompareRow> coefficient_asymptote_rows();
std::string render_coefficient_table(const std::vector<CoefficientRow>& rows,
                                     const std::vector<CompareRow>& limits);

/// Shor-benchmark table: spacetime overhead per Toffoli and time-optimal
/// factory size/time against the published values (factor-2 acceptance band
/// on sizes, half-printed-digit band on runtimes).
struct ShorBenchRow {
    int bits;
    double p_g;
    CompareRow overhead;           // qubit-rounds per Toffoli
    CompareRow factory_qubits;     // time-optimal data qubits
    double runtime_seconds;
    std::string runtime_printed;   // published figure
    bool runtime_pass;
};

std::vector<ShorBenchRow> shor_bench_rows(const ResourceParams& base);
std::string render_shor_bench(const std::vector<ShorBenchRow>& rows);

}  // namespace msf
