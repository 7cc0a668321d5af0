#include "netprobe/types.hpp"

#include "netprobe/error.hpp"

#include <string>

namespace netprobe {

void validate_node_set(const NodeSet& nodes, std::size_t n_nodes) {
  if (nodes.empty() || nodes.size() > 2) {
    throw Error(ErrorCode::InvalidArgument, "node set must hold one or two nodes");
  }
  for (auto j : nodes) {
    if (j >= n_nodes) {
      throw Error(ErrorCode::InvalidArgument,
                  "node " + std::to_string(j) + " out of range for " + std::to_string(n_nodes) +
                      " nodes");
    }
  }
  if (nodes.size() == 2 && nodes[0] == nodes[1]) {
    throw Error(ErrorCode::InvalidArgument, "node pair must be two distinct nodes");
  }
}

}  // namespace netprobe
