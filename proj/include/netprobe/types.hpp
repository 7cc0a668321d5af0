#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace netprobe {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Indices of the network nodes the probe is attached to (one node or a pair).
using NodeSet = std::vector<std::size_t>;

// Throws InvalidArgument unless `nodes` has one or two distinct entries below n_nodes.
void validate_node_set(const NodeSet& nodes, std::size_t n_nodes);

}  // namespace netprobe
