#pragma once

#include <string>
#include <vector>

#include "netfilter/errors.hpp"

namespace nf {

// Index bookkeeping for p nodes carrying k attributes each. Attribute vectors
// are stored node-major: node i (0-based) owns flat indices [i*k, (i+1)*k).
struct NodeLayout {
  int p = 0;
  int k = 1;
  std::vector<std::string> node_names;  // size p
  std::vector<std::string> attr_names;  // size k

  int dim() const { return p * k; }

  int flat(int node, int attr) const {
    check_node(node);
    if (attr < 0 || attr >= k) throw IndexOutOfRange("attribute index out of range");
    return node * k + attr;
  }

  std::vector<int> node_indices(int node) const {
    check_node(node);
    std::vector<int> idx(k);
    for (int a = 0; a < k; ++a) idx[a] = node * k + a;
    return idx;
  }

  // Flat indices for a set of nodes, in node order.
  std::vector<int> group_indices(const std::vector<int>& nodes) const {
    std::vector<int> idx;
    idx.reserve(nodes.size() * k);
    for (int node : nodes)
      for (int a : node_indices(node)) idx.push_back(a);
    return idx;
  }

  const std::string& node_name(int node) const {
    check_node(node);
    return node_names[node];
  }

  void check_node(int node) const {
    if (node < 0 || node >= p) throw NodeOutOfRange("node index out of range");
  }
};

// Builds a validated layout; empty name lists get defaults V1..Vp / A1..Ak.
NodeLayout make_layout(int p, int k, std::vector<std::string> node_names = {},
                       std::vector<std::string> attr_names = {});

}  // namespace nf
