#include "trapwalk/env.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <unordered_set>

#include "trapwalk/rng.hpp"

namespace trapwalk {

ConductanceLaw ConductanceLaw::pareto(double gamma, double x_min) {
  ConductanceLaw l;
  l.gamma = gamma;
  l.x_min = x_min;
  return l;
}

ConductanceLaw ConductanceLaw::log_pareto(double gamma, double beta, double x_min) {
  ConductanceLaw l = pareto(gamma, x_min);
  l.slowly_varying = SlowlyVarying::log_power;
  l.beta = beta;
  return l;
}

ConductanceLaw ConductanceLaw::uniform(double lo, double hi) {
  ConductanceLaw l;
  l.family = LawFamily::uniform;
  l.lo = lo;
  l.hi = hi;
  return l;
}

ConductanceLaw ConductanceLaw::constant(double value) {
  ConductanceLaw l;
  l.family = LawFamily::constant;
  l.value = value;
  return l;
}

std::vector<std::string> ConductanceLaw::problems() const {
  std::vector<std::string> out;
  switch (family) {
    case LawFamily::pareto:
      if (!(gamma > 0.0 && gamma < 1.0)) out.push_back("gamma must lie in (0,1)");
      if (!(x_min > 0.0)) out.push_back("x_min must be positive");
      // beta <= gamma keeps log(e+t)^beta t^-gamma non-increasing.
      if (slowly_varying == SlowlyVarying::log_power && !(beta <= gamma))
        out.push_back("beta must not exceed gamma");
      break;
    case LawFamily::uniform:
      if (!(lo > 0.0 && hi > lo)) out.push_back("uniform law needs 0 < lo < hi");
      break;
    case LawFamily::constant:
      if (!(value > 0.0)) out.push_back("constant conductance must be positive");
      break;
  }
  return out;
}

void ConductanceLaw::validate() const {
  auto p = problems();
  if (!p.empty()) throw std::invalid_argument(p.front());
}

namespace {
double log_tail_pareto(const ConductanceLaw& l, double t) {
  double v = -l.gamma * (std::log(t) - std::log(l.x_min));
  if (l.slowly_varying == SlowlyVarying::log_power)
    v += l.beta * (std::log(std::log(std::numbers::e + t)) - std::log(std::log(std::numbers::e + l.x_min)));
  return v;
}
}  // namespace

double ConductanceLaw::tail(double t) const {
  switch (family) {
    case LawFamily::pareto:
      if (t <= x_min) return 1.0;
      if (std::isinf(t)) return 0.0;
      return std::exp(log_tail_pareto(*this, t));
    case LawFamily::uniform:
      if (t <= lo) return 1.0;
      if (t >= hi) return 0.0;
      return (hi - t) / (hi - lo);
    case LawFamily::constant:
      return t <= value ? 1.0 : 0.0;
  }
  return 0.0;
}

double ConductanceLaw::cdf(double t) const {
  if (family == LawFamily::constant) return t >= value ? 1.0 : 0.0;
  return 1.0 - tail(t);
}

double ConductanceLaw::lower_bound() const {
  switch (family) {
    case LawFamily::pareto: return x_min;
    case LawFamily::uniform: return lo;
    case LawFamily::constant: return value;
  }
  return 0.0;
}

double ConductanceLaw::quantile(double u) const {
  if (!(u > 0.0 && u <= 1.0)) throw std::invalid_argument("quantile level outside (0,1]");
  switch (family) {
    case LawFamily::pareto: {
      double s = std::log(x_min) - std::log(u) / gamma;
      if (slowly_varying == SlowlyVarying::constant) return std::exp(s);
      // Newton in s = log t on log T(e^s) = log u; T is strictly decreasing.
      double target = std::log(u);
      double lo_s = std::log(x_min);
      for (int it = 0; it < 100; ++it) {
        double t = std::exp(s);
        double f = log_tail_pareto(*this, t) - target;
        double L = std::log(std::numbers::e + t);
        double df = beta * t / ((std::numbers::e + t) * L) - gamma;
        double step = f / df;
        double ns = std::max(lo_s, s - step);
        if (std::abs(ns - s) <= 1e-14 * std::max(1.0, std::abs(s))) {
          s = ns;
          break;
        }
        s = ns;
      }
      return std::exp(s);
    }
    case LawFamily::uniform:
      return hi - u * (hi - lo);
    case LawFamily::constant:
      return value;
  }
  return value;
}

ConductanceField::ConductanceField(FieldConfig cfg,
                                   std::vector<std::pair<LatticeEdge, double>> pinned)
    : cfg_(std::move(cfg)), dim_(cfg_.dimension), pinned_(std::move(pinned)) {
  if (dim_ < 2 || dim_ > kMaxDim) throw std::invalid_argument("dimension must lie in [2, 6]");
  cfg_.law.validate();
  if (!(cfg_.K >= 1.0)) throw std::invalid_argument("K must be at least 1");
  if (!(cfg_.lambda >= 0.0)) throw std::invalid_argument("lambda must be non-negative");
  geo_ = Geometry(dim_, cfg_.direction, cfg_.lambda);
  cfg_.direction = geo_.direction();
  for (int i = 0; i < dim_; ++i) {
    if (geo_.dir(i) < -1e-15) throw std::invalid_argument("direction must have non-negative components");
    if (i > 0 && geo_.dir(i) > geo_.dir(i - 1) + 1e-15)
      throw std::invalid_argument("direction components must be non-increasing");
  }
  fast_pareto_ = cfg_.law.family == LawFamily::pareto && cfg_.law.slowly_varying == SlowlyVarying::constant;
  inv_gamma_ = 1.0 / cfg_.law.gamma;
  for (const auto& [e, c] : pinned_)
    if (!(c > 0.0)) throw std::invalid_argument("pinned conductance must be positive");
  std::sort(pinned_.begin(), pinned_.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
}

double ConductanceField::sampled_conductance(const LatticeEdge& e) const {
  if (cfg_.law.family == LawFamily::constant) return cfg_.law.value;
  std::uint64_t h = mix64(cfg_.seed ^ 0xC0D0C7A9CE5EEDULL);
  const Vertex& lo = e.first();
  for (int i = 0; i < dim_; ++i)
    h = mix64(h + (static_cast<std::uint64_t>(static_cast<std::uint32_t>(lo[i])) ^
                   (static_cast<std::uint64_t>(i) << 40)) * kGolden);
  h = mix64(h ^ (static_cast<std::uint64_t>(e.axis()) + 1) * 0xD6E8FEB86659FD93ULL);
  double u = to_unit_open0(h);
  if (fast_pareto_) return cfg_.law.x_min * std::exp(-std::log(u) * inv_gamma_);
  return cfg_.law.quantile(u);
}

double ConductanceField::conductance_of(const LatticeEdge& e) const {
  if (!pinned_.empty()) {
    auto it = std::lower_bound(pinned_.begin(), pinned_.end(), e,
                               [](const auto& p, const LatticeEdge& k) { return p.first < k; });
    if (it != pinned_.end() && it->first == e) return it->second;
  }
  return sampled_conductance(e);
}

ConductanceField ConductanceField::with_K(double K) const {
  FieldConfig c = cfg_;
  c.K = K;
  return ConductanceField(c, pinned_);
}

VertexClass classify_vertex(const ConductanceField& field, const Vertex& x) {
  for (int j = 0; j < 2 * field.dim(); ++j)
    if (!field.is_normal(field.conductance(x, j))) return VertexClass::closed;
  return VertexClass::open;
}

GoodCertificate certify_good(const ConductanceField& field, const Vertex& x, int depth,
                             std::size_t layer_cap) {
  if (depth < 2) throw std::invalid_argument("depth must be at least 2");
  GoodCertificate cert;
  if (!is_open(field, x)) {
    cert.status = GoodStatus::bad_certified;
    return cert;
  }
  const int d = field.dim();
  // layers[i]: open vertices reachable by a directed open path of length i; parents[i] index layer i-1.
  std::vector<std::vector<Vertex>> layers{{x}};
  std::vector<std::vector<std::size_t>> parents{{0}};
  for (int i = 0; i < depth; ++i) {
    const auto& cur = layers.back();
    std::vector<std::pair<Vertex, std::size_t>> next;
    for (std::size_t k = 0; k < cur.size(); ++k) {
      int branches = (i % 2 == 0) ? 1 : d;
      for (int j = 0; j < branches; ++j) next.emplace_back(neighbour(cur[k], j, d), k);
    }
    std::sort(next.begin(), next.end());
    std::vector<Vertex> layer;
    std::vector<std::size_t> par;
    for (const auto& [v, p] : next) {
      if (!layer.empty() && layer.back() == v) continue;
      if (!is_open(field, v)) continue;
      layer.push_back(v);
      par.push_back(p);
    }
    if (layer.empty()) {
      cert.status = GoodStatus::bad_certified;
      cert.depth = i;
      return cert;
    }
    if (layer.size() > layer_cap) {
      cert.status = GoodStatus::unknown;
      cert.depth = i;
      return cert;
    }
    layers.push_back(std::move(layer));
    parents.push_back(std::move(par));
  }
  cert.status = GoodStatus::good_certified;
  cert.depth = depth;
  cert.witness.resize(static_cast<std::size_t>(depth) + 1);
  std::size_t idx = 0;
  for (int i = depth; i >= 0; --i) {
    cert.witness[static_cast<std::size_t>(i)] = layers[static_cast<std::size_t>(i)][idx];
    idx = parents[static_cast<std::size_t>(i)][idx];
  }
  return cert;
}

BadCluster explore_bad_cluster(const ConductanceField& field, const Vertex& x, std::size_t cap,
                               int depth) {
  if (cap < 1) throw std::invalid_argument("cap must be at least 1");
  BadCluster out;
  out.anchor = x;
  auto bad = [&](const Vertex& v) {
    return certify_good(field, v, depth).status != GoodStatus::good_certified;
  };
  if (!bad(x)) return out;
  const int d = field.dim();
  std::unordered_set<Vertex, VertexHash> seen{x};
  std::deque<Vertex> queue{x};
  while (!queue.empty()) {
    Vertex v = queue.front();
    queue.pop_front();
    out.members.push_back(v);
    if (out.members.size() >= cap) {
      out.truncated = true;
      break;
    }
    for (int j = 0; j < 2 * d; ++j) {
      Vertex w = neighbour(v, j, d);
      if (!seen.insert(w).second) continue;
      if (bad(w)) queue.push_back(w);
    }
  }
  out.width = width(out.members, d);
  return out;
}

}  // namespace trapwalk
