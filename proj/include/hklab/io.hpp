#pragma once

#include <string>
#include <vector>

#include "hklab/bounds.hpp"
#include "hklab/check.hpp"
#include "hklab/geometry.hpp"
#include "hklab/graph.hpp"
#include "hklab/semigroup.hpp"

namespace hklab {

inline constexpr const char* kVersion = "0.1.0";

/// Locale-independent shortest round-trip formatting; the same value always
/// prints the same bytes, which is what the determinism contract rests on.
std::string format_double(double v);

GraphData load_graph_json(const std::string& path);
void save_graph_json(const GraphData& data, const std::string& path);

/// CSV bodies are deterministic; the single header line carries the version.
void write_check_csv(const std::vector<CheckReport>& reports, const std::string& path);
void write_bound_csv(const std::vector<BoundReport>& reports, const std::string& path);
void write_kernel_csv(const WeightedGraph& g, const std::vector<KernelSlice>& slices,
                      const std::string& path);
void write_profile_csv(const WeightedGraph& g, const GeometryProfile& profile,
                       const std::string& path);

void write_sv_json(const WeightedGraph& g, const std::vector<SVEstimate>& estimates,
                   const std::string& path);
std::vector<SVEstimate> load_sv_json(const WeightedGraph& g, const std::string& path);

void write_check_summary_json(const std::vector<CheckReport>& reports, const std::string& path);
void write_bound_summary_json(const std::vector<BoundReport>& reports, const std::string& path);

/// Self-contained SVG: one log-margin polyline per pair over the time grid.
void write_margin_svg(const std::vector<BoundReport>& reports, const WeightedGraph& g,
                      const std::string& path);

std::vector<CheckReport> load_check_csv(const std::string& path);
std::vector<BoundReport> load_bound_csv(const std::string& path);

}  // namespace hklab
