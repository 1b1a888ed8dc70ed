#pragma once

#include <filesystem>
#include <string>

#include "simba/graph.hpp"

namespace simba {

// How node features are derived from the optional per-node files.
enum class FeatureMode {
    Auto,        // labels + attributes when both exist, whichever exists otherwise, degree when neither
    NodeLabels,  // one-hot node labels only
    Attributes,  // continuous attributes only
    Degree,      // [1, degree / max degree over the dataset]
};

struct ParseOptions {
    FeatureMode features = FeatureMode::Auto;
};

// Reads the TUDataset text layout from `directory`:
//   {name}_A.txt               "i, j" per line, 1-based global node ids
//   {name}_graph_indicator.txt graph id (1-based) of node i on line i
//   {name}_graph_labels.txt    one label per graph
//   {name}_node_labels.txt     optional, one integer per node
//   {name}_node_attributes.txt optional, comma separated reals per node
// Graph labels are remapped to a dense [0, C) range in ascending order of the
// raw value. Head/tail and splits are left empty.
GraphSet parse_tu_dataset(const std::filesystem::path& directory, const std::string& name,
                          const ParseOptions& options = {});

// Writes A, graph_indicator, graph_labels and node_attributes (the feature
// matrix, exact to the last bit). Edges are emitted in both directions.
void write_tu_dataset(const GraphSet& set, const std::filesystem::path& directory, const std::string& name);

}  // namespace simba
