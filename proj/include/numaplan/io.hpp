#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "numaplan/constraints.hpp"
#include "numaplan/domain.hpp"
#include "numaplan/oracle.hpp"
#include "numaplan/rate_model.hpp"
#include "numaplan/scaling.hpp"

namespace numaplan {

using Json = nlohmann::json;

/// All parsers throw ValidationError on malformed documents.
Topology parse_topology(const std::string& text);
Json topology_to_json(const Topology& topology);

MachineSpec parse_machine(const std::string& text);
Json machine_to_json(const MachineSpec& machine);

/// Plan document: {"replication": {op: k}, "placement": {replica id: socket}}.
/// Operators missing from "replication" keep the topology's count.
ExecutionPlan parse_plan(const std::string& text, const Topology& topology);
Json plan_to_json(const ExecutionPlan& plan, const Topology& topology);

Json report_to_json(const RateReport& report, const ExecutionPlan& plan, const Topology& topology, const MachineSpec& machine);
Json violations_to_json(const std::vector<ConstraintViolation>& violations);
Json trace_entry_to_json(const TraceEntry& entry, const Topology& topology);
Json oracle_to_json(const OracleResult& result, const Topology& topology);
Json replication_to_json(const std::vector<int>& replication, const Topology& topology);

/// Shortest round-trip decimal form, locale independent.
std::string format_number(double value);
std::string matrix_to_csv(const Matrix& matrix);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& content);
/// Pretty JSON with sorted keys and a trailing newline.
std::string dump(const Json& json);

}  // namespace numaplan
