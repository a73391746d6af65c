#include "numaplan/io.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace numaplan {

namespace {

double number(const Json& obj, const char* key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ValidationError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

double required_number(const Json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ValidationError(where + ": missing field '" + key + "'");
    return number(obj, key, 0.0);
}

Json parse_json(const std::string& text) {
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ValidationError(std::string("malformed JSON: ") + e.what());
    }
}

Matrix parse_matrix(const Json& doc, const char* key) {
    if (!doc.contains(key) || !doc.at(key).is_array()) throw ValidationError(std::string("missing matrix '") + key + "'");
    Matrix m;
    for (const auto& row : doc.at(key)) {
        if (!row.is_array()) throw ValidationError(std::string("non-square matrix ") + key);
        std::vector<double> values;
        for (const auto& v : row) {
            if (!v.is_number()) throw ValidationError(std::string("non-numeric entry in ") + key);
            values.push_back(v.get<double>());
        }
        m.push_back(std::move(values));
    }
    return m;
}

}  // namespace

Topology parse_topology(const std::string& text) {
    const Json doc = parse_json(text);
    try {
        if (!doc.is_object()) throw ValidationError("topology must be a JSON object");
        const double rate = required_number(doc, "external_rate", "topology");
        if (!doc.contains("operators") || !doc.at("operators").is_array()) throw ValidationError("topology: missing 'operators'");

        std::vector<EdgeSpec> edges;
        std::set<std::string> has_in;
        std::set<std::string> has_out;
        if (doc.contains("edges")) {
            for (const auto& e : doc.at("edges")) {
                EdgeSpec spec;
                spec.producer = e.at("from").get<std::string>();
                spec.consumer = e.at("to").get<std::string>();
                spec.sigma_in = number(e, "sigma_in", 1.0);
                spec.sigma_br = number(e, "sigma_br", 1.0);
                spec.sigma_out = number(e, "sigma_out", 1.0);
                if (e.contains("partition")) {
                    for (const auto& [key, value] : e.at("partition").items()) {
                        int index = 0;
                        const auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), index);
                        if (ec != std::errc{} || ptr != key.data() + key.size()) {
                            throw ValidationError("partition key '" + key + "' is not a replica index");
                        }
                        spec.partition[index] = value.get<double>();
                    }
                }
                has_out.insert(spec.producer);
                has_in.insert(spec.consumer);
                edges.push_back(std::move(spec));
            }
        }

        std::vector<OperatorSpec> operators;
        for (const auto& o : doc.at("operators")) {
            OperatorSpec op;
            op.id = o.at("id").get<std::string>();
            const std::string where = "operator '" + op.id + "'";
            op.exec_cost_ns = required_number(o, "Te_ns", where);
            op.tuple_bytes = number(o, "N_bytes", 0.0);
            op.mem_bytes = number(o, "M_bytes", 0.0);
            op.replication = o.value("replication", 1);
            op.is_spout = o.contains("spout") ? o.at("spout").get<bool>() : !has_in.contains(op.id);
            op.is_sink = o.contains("sink") ? o.at("sink").get<bool>() : !has_out.contains(op.id);
            operators.push_back(std::move(op));
        }
        return Topology(std::move(operators), std::move(edges), rate);
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("topology: ") + e.what());
    }
}

Json topology_to_json(const Topology& topology) {
    Json doc;
    doc["external_rate"] = topology.external_rate();
    doc["operators"] = Json::array();
    for (const auto& op : topology.operators()) {
        doc["operators"].push_back({{"id", op.id},
                                    {"Te_ns", op.exec_cost_ns},
                                    {"N_bytes", op.tuple_bytes},
                                    {"M_bytes", op.mem_bytes},
                                    {"replication", op.replication},
                                    {"spout", op.is_spout},
                                    {"sink", op.is_sink}});
    }
    doc["edges"] = Json::array();
    for (const auto& e : topology.edges()) {
        Json edge = {{"from", e.producer}, {"to", e.consumer}, {"sigma_in", e.sigma_in}, {"sigma_br", e.sigma_br},
                     {"sigma_out", e.sigma_out}};
        if (!e.partition.empty()) {
            Json partition = Json::object();
            for (const auto& [index, ratio] : e.partition) partition[std::to_string(index)] = ratio;
            edge["partition"] = partition;
        }
        doc["edges"].push_back(std::move(edge));
    }
    return doc;
}

MachineSpec parse_machine(const std::string& text) {
    const Json doc = parse_json(text);
    try {
        if (!doc.is_object()) throw ValidationError("machine must be a JSON object");
        MachineSpec m;
        m.sockets = doc.at("sockets").get<int>();
        m.cores_per_socket = doc.at("cores_per_socket").get<int>();
        m.core_budget_ns = number(doc, "core_budget_ns_per_s", 1e9);
        m.cacheline_bytes = number(doc, "cacheline_bytes", 64.0);
        m.dram_bandwidth = doc.at("dram_bandwidth_Bps").get<std::vector<double>>();
        m.latency = parse_matrix(doc, "latency_ns_per_line");
        m.channel_bandwidth = parse_matrix(doc, "channel_Bps");
        m.validate();
        return m;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("machine: ") + e.what());
    }
}

Json machine_to_json(const MachineSpec& machine) {
    return {{"sockets", machine.sockets},
            {"cores_per_socket", machine.cores_per_socket},
            {"core_budget_ns_per_s", machine.core_budget_ns},
            {"cacheline_bytes", machine.cacheline_bytes},
            {"dram_bandwidth_Bps", machine.dram_bandwidth},
            {"latency_ns_per_line", machine.latency},
            {"channel_Bps", machine.channel_bandwidth}};
}

ExecutionPlan parse_plan(const std::string& text, const Topology& topology) {
    const Json doc = parse_json(text);
    try {
        if (!doc.is_object()) throw ValidationError("plan must be a JSON object");
        std::vector<int> replication = topology.replication();
        if (doc.contains("replication")) {
            for (const auto& [id, k] : doc.at("replication").items()) {
                const int value = k.get<int>();
                if (value < 1) throw ValidationError("replication of '" + id + "' must be >= 1");
                replication[static_cast<std::size_t>(topology.index_of(id))] = value;
            }
        }
        ExecutionPlan plan;
        plan.graph = expand_execution_graph(topology, replication);
        plan.placement.assign(plan.graph.replica_count(), kUnplaced);
        if (doc.contains("placement")) {
            for (const auto& [id, socket] : doc.at("placement").items()) {
                plan.placement[static_cast<std::size_t>(plan.graph.replica_index(topology, id))] = socket.get<int>();
            }
        }
        return plan;
    } catch (const Json::exception& e) {
        throw ValidationError(std::string("plan: ") + e.what());
    }
}

Json replication_to_json(const std::vector<int>& replication, const Topology& topology) {
    Json out = Json::object();
    for (std::size_t i = 0; i < replication.size(); ++i) out[topology.op(static_cast<int>(i)).id] = replication[i];
    return out;
}

Json plan_to_json(const ExecutionPlan& plan, const Topology& topology) {
    Json placement = Json::object();
    for (std::size_t r = 0; r < plan.placement.size(); ++r) {
        placement[plan.graph.replica_id(topology, static_cast<int>(r))] = plan.placement[r];
    }
    return {{"replication", replication_to_json(plan.graph.replication(), topology)}, {"placement", placement}};
}

Json report_to_json(const RateReport& report, const ExecutionPlan& plan, const Topology& topology, const MachineSpec& machine) {
    Json replicas = Json::object();
    for (std::size_t r = 0; r < report.rates.size(); ++r) {
        const auto& rr = report.rates[r];
        replicas[plan.graph.replica_id(topology, static_cast<int>(r))] = {{"socket", plan.placement[r]},
                                                                          {"input_rate", rr.input_rate},
                                                                          {"total_rate", rr.total_rate},
                                                                          {"processed", rr.processed},
                                                                          {"output_rate", rr.output_rate},
                                                                          {"over_supplied", rr.over_supplied}};
    }
    Json bottlenecks = Json::array();
    for (int r : report.bottlenecks) bottlenecks.push_back(plan.graph.replica_id(topology, r));

    std::vector<double> cpu_util;
    std::vector<double> bw_util;
    for (std::size_t i = 0; i < report.usage.cpu.size(); ++i) {
        cpu_util.push_back(report.usage.cpu[i] / machine.socket_cpu_capacity());
        const double b = machine.dram_bandwidth[i];
        bw_util.push_back(b > 0.0 ? report.usage.bw[i] / b : 0.0);
    }
    return {{"throughput", report.throughput},
            {"bottlenecks", bottlenecks},
            {"replicas", replicas},
            {"usage",
             {{"cpu_ns_per_s", report.usage.cpu},
              {"cpu_utilization", cpu_util},
              {"dram_Bps", report.usage.bw},
              {"dram_utilization", bw_util},
              {"channel_Bps", report.usage.channel},
              {"replicas", report.usage.replicas}}}};
}

Json violations_to_json(const std::vector<ConstraintViolation>& violations) {
    Json out = Json::array();
    for (const auto& v : violations) {
        Json item = {{"kind", to_string(v.kind)}, {"socket", v.socket}, {"demand", v.demand}, {"capacity", v.capacity}};
        if (v.to_socket >= 0) item["to_socket"] = v.to_socket;
        if (!v.subject.empty()) item["subject"] = v.subject;
        out.push_back(std::move(item));
    }
    return out;
}

Json trace_entry_to_json(const TraceEntry& entry, const Topology& topology) {
    return {{"iteration", entry.iteration},
            {"parent", entry.parent < 0 ? Json(nullptr) : Json(entry.parent)},
            {"replication", replication_to_json(entry.replication, topology)},
            {"feasible", entry.feasible},
            {"throughput", entry.throughput},
            {"incumbent", entry.incumbent},
            {"bottlenecks", entry.bottlenecks}};
}

Json oracle_to_json(const OracleResult& result, const Topology& topology) {
    Json out = {{"feasible_count", result.feasible_count}, {"total_count", result.total_count}};
    if (result.best_value) {
        out["best_value"] = *result.best_value;
        out["best_plan"] = plan_to_json(result.best_plan, topology);
    } else {
        out["best_value"] = nullptr;
        out["best_plan"] = nullptr;
    }
    return out;
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return ec == std::errc{} ? std::string(buf, ptr) : std::string("nan");
}

std::string matrix_to_csv(const Matrix& matrix) {
    std::string out;
    for (const auto& row : matrix) {
        for (std::size_t j = 0; j < row.size(); ++j) {
            if (j) out += ',';
            out += format_number(row[j]);
        }
        out += '\n';
    }
    return out;
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError("cannot read '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ValidationError("cannot write '" + path.string() + "'");
    out << content;
}

std::string dump(const Json& json) { return json.dump(2) + "\n"; }

}  // namespace numaplan
