#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "hklab/bounds.hpp"
#include "hklab/check.hpp"
#include "hklab/geometry.hpp"
#include "hklab/zoo.hpp"

namespace hklab {

/// A configuration error names the failing field; the CLI maps it to exit 2.
class ConfigError : public std::runtime_error {
  public:
    ConfigError(std::string field_, const std::string& msg)
        : std::runtime_error("field '" + field_ + "': " + msg), field(std::move(field_)) {}
    std::string field;
};

/// Missing hypothesis certificate for a conditional statement; exit 3.
class HypothesisError : public std::runtime_error {
  public:
    explicit HypothesisError(std::string statement_)
        : std::runtime_error("hypothesis not certified for statement '" + statement_ +
                             "' (run `certify` first or declare inline targets)"),
          statement(std::move(statement_)) {}
    std::string statement;
};

struct Scenario {
    // graph source: file or generator stanza
    std::string graph_file;
    std::optional<zoo::GeneratorSpec> generator;

    double metric_cap = 1.0;
    std::string metric_file;  // optional CSV override

    GeometryParams params;

    // SV certification window and targets
    double sv_r1 = 0.0, sv_r2 = 0.0;
    SVTargets targets;
    AscentBudget budget;

    std::vector<std::string> suite;
    std::vector<double> times;
    std::vector<std::pair<std::string, std::string>> pairs;  // explicit pairs by id
    int pair_sample = 0;                                     // or a seeded vertex sample
    std::vector<std::string> centers;                        // certification centers (ids)

    BoundVariant variant = BoundVariant::general;
    double degenerate_cap = 1.0;
    double degenerate_r1 = 1.0;

    std::uint64_t seed = 1;
    int jobs = 0;  // 0 = hardware concurrency

    std::string base_dir;  // directory of the scenario file, for relative paths
};

Scenario load_scenario(const std::string& path);
/// "logspace:a:b:n" or a comma list of times.
std::vector<double> parse_times(const std::string& spec);

/// Default statement ids, in execution order.
const std::vector<std::string>& default_suite();
bool statement_is_conditional(const std::string& statement);

/// Materialized scenario: graph, metric, spectral data, resolved grids.
struct Workbench {
    std::shared_ptr<const WeightedGraph> graph;
    IntrinsicMetric metric;
    HeatSystem heat;
    std::vector<int> sample_vertices;  // resolved pair sample
    BoundGrid grid;
};
Workbench open_workbench(const Scenario& scenario);

struct CertifyResult {
    std::vector<SVEstimate> estimates;
    bool all_pass = true;
};
CertifyResult run_certify(const Scenario& scenario, const Workbench& bench);

/// Certificates for the conditional statements: either loaded from a certify
/// output, or synthesized from inline targets. Throws HypothesisError naming
/// `statement` when neither is available.
std::map<int, CenterCertificate> resolve_certificates(const Scenario& scenario,
                                                      const Workbench& bench,
                                                      const std::string& certificates_path,
                                                      const std::string& statement);

struct VerifyResult {
    std::vector<CheckReport> reports;
    CheckSummary summary;
};
VerifyResult run_verify(const Scenario& scenario, const Workbench& bench,
                        const std::string& certificates_path);

struct ScanResult {
    std::vector<BoundReport> reports;
    BoundSummary summary;
};
ScanResult run_scan(const Scenario& scenario, const Workbench& bench,
                    const std::string& certificates_path);

}  // namespace hklab
