#pragma once

#include <functional>
#include <string>

#include <json.hpp>

#include "ehlab/geodesic.hpp"
#include "ehlab/lift.hpp"

namespace ehlab {

using ojson = nlohmann::ordered_json;

// shortest round-trip decimal; "null" for non-finite (matching JSON)
std::string format_double(double v);

// Serializes with insertion-ordered keys and to_chars doubles so identical
// values always produce identical bytes.
std::string dump_json(const ojson& j, int indent = 2);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

// columns: t, chart_id, b1..bn, f1..fm, height, status (final row only)
std::string lift_trace_csv(const BundleAtlas& atlas, const LiftTrace& trace);

// lift schema plus velocity columns and arc_length before status
std::string geodesic_trace_csv(const GeodesicTrace& trace, int base_dim,
                               const std::function<double(int, const Vec&)>& height);

} // namespace ehlab
