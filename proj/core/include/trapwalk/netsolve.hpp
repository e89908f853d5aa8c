#pragma once

#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace trapwalk {

struct NetEdge {
  int u = 0;
  int v = 0;
  double c = 0.0;
};

// Finite weighted graph; parallel edges allowed, loops rejected.
class FiniteNetwork {
 public:
  FiniteNetwork(int vertices, std::vector<NetEdge> edges, std::optional<int> absorbing = std::nullopt);

  int size() const { return n_; }
  const std::vector<NetEdge>& edges() const { return edges_; }
  std::optional<int> absorbing() const { return absorbing_; }

  // Parses the fixture format described in docs/network_format.md.
  static FiniteNetwork parse(std::istream& in);
  static FiniteNetwork parse_string(const std::string& text);

 private:
  int n_;
  std::vector<NetEdge> edges_;
  std::optional<int> absorbing_;
};

// pi(x) = sum of conductances at x, unnormalized.
std::vector<double> stationary_measure(const FiniteNetwork& net);

// P_start[first absorbed at t], in the order of `absorbing_set`.
std::vector<double> exit_distribution(const FiniteNetwork& net, int start, const std::vector<int>& absorbing_set);

// Voltages with v(ground) = 0 and unit current injected at `source`.
std::vector<double> unit_current_voltages(const FiniteNetwork& net, int source, const std::vector<int>& ground);

// E_start[traversals of the counted edges (edge indices) up to absorption at the network's absorbing vertex].
double expected_crossings(const FiniteNetwork& net, int start, const std::vector<int>& counted_edges);

double effective_resistance(const FiniteNetwork& net, int a, int b);

}  // namespace trapwalk
