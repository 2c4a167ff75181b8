#include "hetsnn/snapshot.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hetsnn {

std::string format_double(double v) {
    if (!std::isfinite(v)) throw NumericError("cannot serialize a non-finite value");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

namespace {

void write_stdp(std::ostringstream& os, const StdpParams& p) {
    os << "{\"a_plus\":" << format_double(p.a_plus_gain) << ",\"a_minus\":" << format_double(p.a_minus_gain)
       << ",\"incr_plus\":" << format_double(p.trace_incr_plus) << ",\"incr_minus\":" << format_double(p.trace_incr_minus)
       << ",\"tau_plus\":" << format_double(p.tau_plus) << ",\"tau_minus\":" << format_double(p.tau_minus)
       << ",\"w_min\":" << format_double(p.w_min) << ",\"w_max\":" << format_double(p.w_max) << "}";
}

StdpParams read_stdp(const nlohmann::json& j) {
    StdpParams p;
    p.a_plus_gain = j.at("a_plus").get<double>();
    p.a_minus_gain = j.at("a_minus").get<double>();
    p.trace_incr_plus = j.at("incr_plus").get<double>();
    p.trace_incr_minus = j.at("incr_minus").get<double>();
    p.tau_plus = j.at("tau_plus").get<double>();
    p.tau_minus = j.at("tau_minus").get<double>();
    p.w_min = j.at("w_min").get<double>();
    p.w_max = j.at("w_max").get<double>();
    p.validate();
    return p;
}

}  // namespace

std::string serialize_model(const Model& model) {
    model.validate();
    const auto& g = model.graph;
    std::ostringstream os;
    os << "{\n\"nodes\":[";
    for (std::size_t i = 0; i < g.size(); ++i) {
        const Node& n = g.nodes()[i];
        os << (i ? ",\n" : "\n") << "{\"id\":" << n.id.value << ",\"pos\":[" << format_double(n.pos[0]) << ","
           << format_double(n.pos[1]) << "," << format_double(n.pos[2]) << "],\"sign\":"
           << (n.sign == NeuronSign::excitatory ? 1 : -1) << "}";
    }
    os << "],\n\"edges\":[";
    for (std::size_t e = 0; e < g.edges().size(); ++e) {
        const Edge& x = g.edges()[e];
        os << (e ? ",\n" : "\n") << "{\"src\":" << x.src.value << ",\"dst\":" << x.dst.value
           << ",\"w\":" << format_double(x.w) << "}";
    }
    os << "],\n\"input_edges\":[";
    for (std::size_t e = 0; e < g.input_edges().size(); ++e) {
        const InputEdge& x = g.input_edges()[e];
        os << (e ? ",\n" : "\n") << "{\"enc\":" << x.enc << ",\"dst\":" << x.dst.value << ",\"w\":" << format_double(x.w)
           << "}";
    }
    os << "],\n\"n_encoders\":" << g.n_encoders() << ",\n\"neurons\":[";
    for (std::size_t i = 0; i < model.neurons.size(); ++i) {
        const NeuronParams& p = model.neurons[i];
        os << (i ? ",\n" : "\n") << "{\"id\":" << g.nodes()[i].id.value << ",\"tau_m\":" << format_double(p.tau_m)
           << ",\"r_m\":" << format_double(p.r_m) << ",\"v_rest\":" << format_double(p.v_rest)
           << ",\"v_threshold\":" << format_double(p.v_threshold) << ",\"v_reset\":" << format_double(p.v_reset)
           << ",\"refractory\":" << format_double(p.refractory) << "}";
    }
    os << "],\n\"synapse_params\":[";
    for (std::size_t e = 0; e < model.stdp.recurrent.size(); ++e) {
        os << (e ? ",\n" : "\n");
        write_stdp(os, model.stdp.recurrent[e]);
    }
    os << "],\n\"input_synapse_params\":[";
    for (std::size_t e = 0; e < model.stdp.input.size(); ++e) {
        os << (e ? ",\n" : "\n");
        write_stdp(os, model.stdp.input[e]);
    }
    os << "]\n}\n";
    return os.str();
}

Model parse_model(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("snapshot is not valid JSON: ") + e.what());
    }
    try {
        std::vector<Node> nodes;
        for (const auto& n : j.at("nodes")) {
            Node node;
            node.id = NeuronId{n.at("id").get<std::uint32_t>()};
            const auto& pos = n.at("pos");
            if (pos.size() != 3) throw ConfigError("snapshot: pos must have three entries");
            for (std::size_t k = 0; k < 3; ++k) node.pos[k] = pos[k].get<double>();
            const int sign = n.at("sign").get<int>();
            if (sign != 1 && sign != -1) throw ConfigError("snapshot: sign must be 1 or -1");
            node.sign = sign == 1 ? NeuronSign::excitatory : NeuronSign::inhibitory;
            nodes.push_back(node);
        }
        std::vector<Edge> edges;
        for (const auto& e : j.at("edges")) {
            edges.push_back({NeuronId{e.at("src").get<std::uint32_t>()}, NeuronId{e.at("dst").get<std::uint32_t>()},
                             e.at("w").get<double>()});
        }
        std::vector<InputEdge> inputs;
        for (const auto& e : j.at("input_edges")) {
            inputs.push_back({e.at("enc").get<std::uint32_t>(), NeuronId{e.at("dst").get<std::uint32_t>()},
                              e.at("w").get<double>()});
        }
        Model m;
        m.graph = NetworkGraph(nodes, edges, inputs, j.at("n_encoders").get<std::uint32_t>());
        for (const auto& p : j.at("neurons")) {
            NeuronParams np;
            np.tau_m = p.at("tau_m").get<double>();
            np.r_m = p.at("r_m").get<double>();
            np.v_rest = p.at("v_rest").get<double>();
            np.v_threshold = p.at("v_threshold").get<double>();
            np.v_reset = p.at("v_reset").get<double>();
            np.refractory = p.at("refractory").get<double>();
            np.validate();
            m.neurons.push_back(np);
        }
        for (const auto& p : j.at("synapse_params")) m.stdp.recurrent.push_back(read_stdp(p));
        for (const auto& p : j.at("input_synapse_params")) m.stdp.input.push_back(read_stdp(p));
        // The graph reorders nodes and edges; a snapshot written by
        // serialize_model is already sorted, anything else is rejected.
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            if (!(nodes[i].id == m.graph.nodes()[i].id)) throw ConfigError("snapshot: nodes are not sorted by id");
        }
        for (std::size_t e = 0; e < edges.size(); ++e) {
            if (!(edges[e].src == m.graph.edges()[e].src && edges[e].dst == m.graph.edges()[e].dst)) {
                throw ConfigError("snapshot: edges are not sorted by (src, dst)");
            }
        }
        for (std::size_t e = 0; e < inputs.size(); ++e) {
            if (inputs[e].enc != m.graph.input_edges()[e].enc || !(inputs[e].dst == m.graph.input_edges()[e].dst)) {
                throw ConfigError("snapshot: input edges are not sorted by (enc, dst)");
            }
        }
        m.validate();
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("snapshot: ") + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream os;
    os << in.rdbuf();
    if (in.bad()) throw IoError("failed reading " + path.string());
    return os.str();
}

void save_model(const Model& model, const std::filesystem::path& path) { write_text_file(path, serialize_model(model)); }

Model load_model(const std::filesystem::path& path) { return parse_model(read_text_file(path)); }

}  // namespace hetsnn
