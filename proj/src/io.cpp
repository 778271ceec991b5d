#include "keg/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "keg/errors.hpp"

namespace keg {

std::string format_double(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void write_edges_csv(std::ostream& os, SampledGraph const& graph)
{
    os << "u_index,v_index,u_label,v_label,provenance\n";
    for (Edge const& e : graph.edges)
    {
        os << e.u << ',' << e.v << ',' << format_double(graph.labels[e.u]) << ','
           << format_double(graph.labels[e.v]) << ',' << to_string(e.provenance)
           << '\n';
    }
}

void write_latent_csv(std::ostream& os, SampledGraph const& graph)
{
    os << "index,label,latent\n";
    for (std::uint64_t i = 0; i < graph.num_vertices(); ++i)
    {
        os << i << ',' << format_double(graph.labels[i]) << ',';
        if (i < graph.latent.size() && graph.latent[i])
            os << format_double(*graph.latent[i]);
        os << '\n';
    }
}

nlohmann::json graph_metadata(SampledGraph const& graph)
{
    std::uint64_t by_kind[3] = {0, 0, 0};
    for (Edge const& e : graph.edges)
        ++by_kind[static_cast<int>(e.provenance)];
    nlohmann::json doc;
    doc["nu"] = graph.nu;
    doc["seed"] = graph.seed;
    doc["stream"] = graph.stream;
    doc["theta_max"] = graph.theta_max;
    doc["epsilon"] = graph.epsilon;
    if (graph.core_boundary)
        doc["core_boundary"] = *graph.core_boundary;
    else
        doc["core_boundary"] = nullptr;
    doc["counts"] = {{"vertices", graph.num_vertices()},
                     {"edges", graph.num_edges()},
                     {"W", by_kind[0]},
                     {"star", by_kind[1]},
                     {"isolated", by_kind[2]}};
    return doc;
}

nlohmann::json load_json_argument(std::string const& arg)
{
    std::string text;
    auto const first = arg.find_first_not_of(" \t\r\n");
    if (first != std::string::npos && arg[first] == '{')
    {
        text = arg;
    }
    else
    {
        std::ifstream in(arg);
        if (!in)
            throw ConfigError("cannot read '" + arg + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        text = ss.str();
    }
    try
    {
        return nlohmann::json::parse(text);
    }
    catch (nlohmann::json::parse_error const& err)
    {
        throw ConfigError(std::string("invalid JSON: ") + err.what());
    }
}

void write_text_file(std::string const& path, std::string const& text)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw ConfigError("cannot write '" + path + "'");
    out << text;
    if (!out)
        throw ConfigError("failed writing '" + path + "'");
}

}  // namespace keg
