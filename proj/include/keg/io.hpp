#pragma once

#include <ostream>
#include <string>

#include <nlohmann/json.hpp>

#include "keg/sampler.hpp"

namespace keg {

//! Text that reads back to the same double ("%.17g").
std::string format_double(double v);

//! Header u_index,v_index,u_label,v_label,provenance; LF line endings.
void write_edges_csv(std::ostream& os, SampledGraph const& graph);

//! Header index,label,latent; latent is empty for leaves and isolated edges.
void write_latent_csv(std::ostream& os, SampledGraph const& graph);

//! {nu, seed, stream, theta_max, epsilon, core_boundary, counts}
nlohmann::json graph_metadata(SampledGraph const& graph);

//! Parse inline JSON if the argument starts with '{', else read the file.
nlohmann::json load_json_argument(std::string const& arg);

//! Write text to a file, throwing ConfigError if it cannot be opened.
void write_text_file(std::string const& path, std::string const& text);

}  // namespace keg
