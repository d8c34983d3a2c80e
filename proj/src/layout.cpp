#include "netfilter/layout.hpp"

#include <string>

namespace nf {

NodeLayout make_layout(int p, int k, std::vector<std::string> node_names,
                       std::vector<std::string> attr_names) {
  if (p < 1) throw InvalidConfig("layout needs at least one node");
  if (k < 1) throw InvalidConfig("layout needs at least one attribute per node");
  if (!node_names.empty() && static_cast<int>(node_names.size()) != p)
    throw DimensionMismatch("node name list does not match p");
  if (!attr_names.empty() && static_cast<int>(attr_names.size()) != k)
    throw DimensionMismatch("attribute name list does not match k");
  NodeLayout l;
  l.p = p;
  l.k = k;
  if (node_names.empty()) {
    l.node_names.reserve(p);
    for (int i = 0; i < p; ++i) l.node_names.push_back("V" + std::to_string(i + 1));
  } else {
    l.node_names = std::move(node_names);
  }
  if (attr_names.empty()) {
    l.attr_names.reserve(k);
    for (int a = 0; a < k; ++a) l.attr_names.push_back("A" + std::to_string(a + 1));
  } else {
    l.attr_names = std::move(attr_names);
  }
  return l;
}

}  // namespace nf
