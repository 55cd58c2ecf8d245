#pragma once

#include <iosfwd>
#include <string>

#include <gem/hetgraph.hpp>

namespace gem {

// on-disk bundle of a built graph, its feature matrix and the window it was
// built from; little-endian binary with magic "GEMGRPH" + version byte
struct GraphBundle {
    HeteroGraph graph;
    Matrix features;
    TimeWindow window;
};

void save_graph(std::ostream& out, const GraphBundle& bundle);
GraphBundle load_graph(std::istream& in);

void save_graph_file(const std::string& path, const GraphBundle& bundle);
GraphBundle load_graph_file(const std::string& path);

}  // namespace gem
