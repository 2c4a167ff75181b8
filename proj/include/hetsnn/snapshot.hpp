#pragma once

// JSON snapshots of a model: the graph (nodes, edges, input_edges, in that
// order) followed by the sampled neuron and synapse parameters.

#include "hetsnn/simulator.hpp"

#include <filesystem>
#include <string>

namespace hetsnn {

/// Weights and parameters are written with 17 significant digits.
std::string serialize_model(const Model& model);
/// Throws IoError on malformed JSON and ConfigError on invalid content.
Model parse_model(const std::string& text);

void save_model(const Model& model, const std::filesystem::path& path);
Model load_model(const std::filesystem::path& path);

/// Shortest text that is the %.17g rendering of v.
std::string format_double(double v);

/// Writes text to path, creating parent directories; throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace hetsnn
