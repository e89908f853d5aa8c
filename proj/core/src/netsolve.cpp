#include "trapwalk/netsolve.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <algorithm>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace trapwalk {

namespace {

constexpr int kDenseLimit = 2000;

bool connected(int n, const std::vector<NetEdge>& edges) {
  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  int comps = n;
  for (const auto& e : edges) {
    int a = find(e.u), b = find(e.v);
    if (a != b) {
      parent[static_cast<std::size_t>(a)] = b;
      --comps;
    }
  }
  return comps == 1;
}

void check_vertex(const FiniteNetwork& net, int x) {
  if (x < 0 || x >= net.size()) throw std::invalid_argument("vertex id out of range");
}

// Solves the Dirichlet problem L v = b on the free vertices, v = 0 on `ground`.
std::vector<double> solve_grounded(const FiniteNetwork& net, const std::vector<int>& ground,
                                   const std::vector<double>& rhs) {
  const int n = net.size();
  std::vector<int> idx(static_cast<std::size_t>(n), -1);
  std::vector<char> grounded(static_cast<std::size_t>(n), 0);
  for (int g : ground) grounded[static_cast<std::size_t>(g)] = 1;
  int m = 0;
  for (int x = 0; x < n; ++x)
    if (!grounded[static_cast<std::size_t>(x)]) idx[static_cast<std::size_t>(x)] = m++;
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  if (m == 0) return out;
  Eigen::VectorXd b(m);
  for (int x = 0; x < n; ++x)
    if (idx[static_cast<std::size_t>(x)] >= 0) b(idx[static_cast<std::size_t>(x)]) = rhs[static_cast<std::size_t>(x)];
  Eigen::VectorXd v;
  if (m <= kDenseLimit) {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(m, m);
    for (const auto& e : net.edges()) {
      int a = idx[static_cast<std::size_t>(e.u)], c = idx[static_cast<std::size_t>(e.v)];
      if (a >= 0) L(a, a) += e.c;
      if (c >= 0) L(c, c) += e.c;
      if (a >= 0 && c >= 0) {
        L(a, c) -= e.c;
        L(c, a) -= e.c;
      }
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(L);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive()) throw std::runtime_error("singular network system");
    v = ldlt.solve(b);
  } else {
    std::vector<Eigen::Triplet<double>> t;
    for (const auto& e : net.edges()) {
      int a = idx[static_cast<std::size_t>(e.u)], c = idx[static_cast<std::size_t>(e.v)];
      if (a >= 0) t.emplace_back(a, a, e.c);
      if (c >= 0) t.emplace_back(c, c, e.c);
      if (a >= 0 && c >= 0) {
        t.emplace_back(a, c, -e.c);
        t.emplace_back(c, a, -e.c);
      }
    }
    Eigen::SparseMatrix<double> L(m, m);
    L.setFromTriplets(t.begin(), t.end());
    Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper> cg;
    cg.setTolerance(1e-13);
    cg.setMaxIterations(std::max(1000, 20 * m));
    cg.compute(L);
    v = cg.solve(b);
    if (cg.info() != Eigen::Success) throw std::runtime_error("network solve did not converge");
  }
  for (int x = 0; x < n; ++x)
    if (idx[static_cast<std::size_t>(x)] >= 0) out[static_cast<std::size_t>(x)] = v(idx[static_cast<std::size_t>(x)]);
  return out;
}

}  // namespace

FiniteNetwork::FiniteNetwork(int vertices, std::vector<NetEdge> edges, std::optional<int> absorbing)
    : n_(vertices), edges_(std::move(edges)), absorbing_(absorbing) {
  if (n_ < 1) throw std::invalid_argument("network needs at least one vertex");
  for (const auto& e : edges_) {
    if (e.u < 0 || e.u >= n_ || e.v < 0 || e.v >= n_) throw std::invalid_argument("edge endpoint out of range");
    if (e.u == e.v) throw std::invalid_argument("loops are not allowed");
    if (!(e.c > 0.0)) throw std::invalid_argument("conductances must be positive");
  }
  if (absorbing_ && (*absorbing_ < 0 || *absorbing_ >= n_)) throw std::invalid_argument("absorbing id out of range");
  if (!connected(n_, edges_)) throw std::invalid_argument("network is not connected");
}

FiniteNetwork FiniteNetwork::parse(std::istream& in) {
  int n = -1;
  std::vector<NetEdge> edges;
  std::optional<int> absorbing;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string key;
    if (!(ls >> key)) continue;
    auto fail = [&](const std::string& what) {
      throw std::invalid_argument("network line " + std::to_string(lineno) + ": " + what);
    };
    if (key == "vertices") {
      if (!(ls >> n)) fail("expected a vertex count");
    } else if (key == "edge") {
      NetEdge e;
      if (!(ls >> e.u >> e.v >> e.c)) fail("expected 'edge u v c'");
      edges.push_back(e);
    } else if (key == "absorbing") {
      int a;
      if (!(ls >> a)) fail("expected a vertex id");
      absorbing = a;
    } else {
      fail("unknown keyword '" + key + "'");
    }
    std::string extra;
    if (ls >> extra) fail("trailing token '" + extra + "'");
  }
  if (n < 0) throw std::invalid_argument("network has no 'vertices' line");
  return FiniteNetwork(n, std::move(edges), absorbing);
}

FiniteNetwork FiniteNetwork::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

std::vector<double> stationary_measure(const FiniteNetwork& net) {
  if (net.absorbing()) throw std::invalid_argument("stationary measure needs a network without absorption");
  std::vector<double> pi(static_cast<std::size_t>(net.size()), 0.0);
  for (const auto& e : net.edges()) {
    pi[static_cast<std::size_t>(e.u)] += e.c;
    pi[static_cast<std::size_t>(e.v)] += e.c;
  }
  return pi;
}

std::vector<double> unit_current_voltages(const FiniteNetwork& net, int source, const std::vector<int>& ground) {
  check_vertex(net, source);
  if (ground.empty()) throw std::invalid_argument("ground set is empty");
  for (int g : ground) {
    check_vertex(net, g);
    if (g == source) throw std::invalid_argument("source lies in the ground set");
  }
  std::vector<double> rhs(static_cast<std::size_t>(net.size()), 0.0);
  rhs[static_cast<std::size_t>(source)] = 1.0;
  return solve_grounded(net, ground, rhs);
}

std::vector<double> exit_distribution(const FiniteNetwork& net, int start, const std::vector<int>& absorbing_set) {
  // v(x) = G(start, x) / pi(x); absorption through (x, t) has probability c(x, t) v(x).
  std::vector<double> v = unit_current_voltages(net, start, absorbing_set);
  std::vector<int> slot(static_cast<std::size_t>(net.size()), -1);
  for (std::size_t i = 0; i < absorbing_set.size(); ++i) slot[static_cast<std::size_t>(absorbing_set[i])] = static_cast<int>(i);
  std::vector<double> out(absorbing_set.size(), 0.0);
  for (const auto& e : net.edges()) {
    int su = slot[static_cast<std::size_t>(e.u)], sv = slot[static_cast<std::size_t>(e.v)];
    if (su >= 0 && sv < 0) out[static_cast<std::size_t>(su)] += e.c * v[static_cast<std::size_t>(e.v)];
    if (sv >= 0 && su < 0) out[static_cast<std::size_t>(sv)] += e.c * v[static_cast<std::size_t>(e.u)];
  }
  return out;
}

double expected_crossings(const FiniteNetwork& net, int start, const std::vector<int>& counted_edges) {
  if (!net.absorbing()) throw std::invalid_argument("expected_crossings needs an absorbing vertex");
  std::vector<double> v = unit_current_voltages(net, start, {*net.absorbing()});
  double total = 0.0;
  for (int i : counted_edges) {
    if (i < 0 || static_cast<std::size_t>(i) >= net.edges().size()) throw std::invalid_argument("edge index out of range");
    const NetEdge& e = net.edges()[static_cast<std::size_t>(i)];
    total += e.c * (v[static_cast<std::size_t>(e.u)] + v[static_cast<std::size_t>(e.v)]);
  }
  return total;
}

double effective_resistance(const FiniteNetwork& net, int a, int b) {
  if (a == b) throw std::invalid_argument("effective resistance needs distinct vertices");
  return unit_current_voltages(net, a, {b})[static_cast<std::size_t>(a)];
}

}  // namespace trapwalk
