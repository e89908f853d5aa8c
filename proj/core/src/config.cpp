#include "trapwalk/config.hpp"

#include <algorithm>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace trapwalk {

namespace pt = boost::property_tree;

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::exponent: return "exponent";
    case ExperimentKind::clock: return "clock";
    case ExperimentKind::fk: return "fk";
    case ExperimentKind::traps: return "traps";
    case ExperimentKind::oracle_suite: return "oracle_suite";
  }
  return "?";
}

namespace {

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> k = {
      {"field", {"dimension", "law", "gamma", "beta", "x_min", "lo", "hi", "value", "seed", "K", "lambda", "direction"}},
      {"walk",
       {"steps", "replicas", "replica_offset", "master_seed", "compress_threshold", "checkpoints_per_decade",
        "first_checkpoint", "stop_level"}},
      {"regen", {"alpha", "margin", "n_threshold", "delta", "notable_floor"}},
      {"outputs", {"directory", "formats"}},
      {"experiment", {"kind", "clock_n1", "clock_n2", "clock_replicas"}},
  };
  return k;
}

std::string fmt_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trim(std::string s) {
  auto b = s.find_first_not_of(" \t\r\n");
  auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
}

class Reader {
 public:
  Reader(const pt::ptree& tree, ConfigResult& out) : tree_(tree), out_(out) {}

  std::optional<std::string> raw(const std::string& sec, const std::string& key) {
    auto s = tree_.get_child_optional(sec);
    if (!s) return std::nullopt;
    auto v = s->get_optional<std::string>(key);
    if (!v) return std::nullopt;
    return trim(*v);
  }

  template <class T>
  void get(const std::string& sec, const std::string& key, T& dst, bool announce_default = false) {
    auto v = raw(sec, key);
    if (!v) {
      if (announce_default) out_.notices.push_back(sec + "." + key + " not set; default " + show(dst) + " applied");
      return;
    }
    if (!parse(*v, dst)) out_.errors.push_back(sec + "." + key + ": cannot parse '" + *v + "'");
  }

 private:
  static bool parse(const std::string& s, double& d) {
    if (s == "inf") {
      d = std::numeric_limits<double>::infinity();
      return true;
    }
    auto r = std::from_chars(s.data(), s.data() + s.size(), d);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
  }
  template <class I>
  static bool parse(const std::string& s, I& d) requires std::is_integral_v<I> {
    // Accept integral values written in scientific notation (1e6).
    if (s.find_first_of("eE.") != std::string::npos) {
      double x;
      if (!parse(s, x) || x != std::floor(x) || std::abs(x) > 9.0e18) return false;
      d = static_cast<I>(x);
      return true;
    }
    auto r = std::from_chars(s.data(), s.data() + s.size(), d);
    return r.ec == std::errc() && r.ptr == s.data() + s.size();
  }
  static bool parse(const std::string& s, std::string& d) {
    d = s;
    return true;
  }
  template <class T>
  static std::string show(const T& v) {
    if constexpr (std::is_same_v<T, double>)
      return fmt_double(v);
    else if constexpr (std::is_same_v<T, std::string>)
      return "'" + v + "'";
    else
      return std::to_string(v);
  }

  const pt::ptree& tree_;
  ConfigResult& out_;
};

}  // namespace

ConfigResult parse_config(const std::string& text) {
  ConfigResult out;
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::ini_parser::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    out.errors.push_back(std::string("syntax: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    return out;
  }
  for (const auto& [sec, body] : tree) {
    auto it = known_keys().find(sec);
    if (it == known_keys().end()) {
      if (body.empty())
        out.errors.push_back("key '" + sec + "' outside any section");
      else
        out.errors.push_back("unknown section [" + sec + "]");
      continue;
    }
    for (const auto& [key, val] : body)
      if (!it->second.count(key)) out.errors.push_back("unknown key " + sec + "." + key);
  }

  RunConfig c;
  Reader r(tree, out);

  // field
  std::string law = "pareto";
  r.get("field", "law", law);
  r.get("field", "dimension", c.field.dimension, true);
  r.get("field", "seed", c.field.seed);
  r.get("field", "K", c.field.K, true);
  r.get("field", "lambda", c.field.lambda, true);
  auto& L = c.field.law;
  r.get("field", "gamma", L.gamma);
  r.get("field", "beta", L.beta);
  r.get("field", "x_min", L.x_min);
  r.get("field", "lo", L.lo);
  r.get("field", "hi", L.hi);
  r.get("field", "value", L.value);
  if (law == "pareto") {
    L.family = LawFamily::pareto;
    L.slowly_varying = SlowlyVarying::constant;
  } else if (law == "log_pareto") {
    L.family = LawFamily::pareto;
    L.slowly_varying = SlowlyVarying::log_power;
  } else if (law == "uniform") {
    L.family = LawFamily::uniform;
  } else if (law == "constant") {
    L.family = LawFamily::constant;
  } else {
    out.errors.push_back("field.law: unknown law '" + law + "' (pareto, log_pareto, uniform, constant)");
  }
  for (const auto& p : L.problems()) out.errors.push_back("field.law: " + p);
  if (c.field.dimension < 2 || c.field.dimension > kMaxDim)
    out.errors.push_back("field.dimension: must lie in [2, " + std::to_string(kMaxDim) + "]");
  if (!(c.field.K >= 1.0)) out.errors.push_back("field.K: must be at least 1");
  if (!(c.field.lambda > 0.0)) out.errors.push_back("field.lambda: must be positive");

  const int d = std::clamp(c.field.dimension, 2, kMaxDim);
  c.field.direction.assign(static_cast<std::size_t>(d), 0.0);
  c.field.direction[0] = 1.0;
  if (auto v = r.raw("field", "direction")) {
    std::vector<double> dir;
    std::string s = *v;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream ds(s);
    double x;
    while (ds >> x) dir.push_back(x);
    if (!ds.eof() || dir.size() != static_cast<std::size_t>(d)) {
      out.errors.push_back("field.direction: need " + std::to_string(d) + " numbers");
    } else {
      double norm = 0.0;
      for (double y : dir) norm += y * y;
      norm = std::sqrt(norm);
      bool ok = norm > 0.0;
      for (std::size_t i = 0; i < dir.size() && ok; ++i) {
        if (dir[i] < 0.0) ok = false;
        if (i > 0 && dir[i] > dir[i - 1]) ok = false;
      }
      if (!ok) {
        out.errors.push_back("field.direction: components must be non-negative, non-increasing, not all zero");
      } else {
        // Already-unit input is kept bit for bit so to_ini output parses back unchanged.
        if (std::abs(norm - 1.0) > 1e-12) {
          out.notices.push_back("field.direction normalized to unit length");
          for (auto& y : dir) y /= norm;
        }
        c.field.direction = dir;
      }
    }
  } else {
    out.notices.push_back("field.direction not set; default e_1 applied");
  }

  // walk
  auto& w = c.walk;
  r.get("walk", "steps", w.steps, true);
  r.get("walk", "replicas", w.replicas, true);
  r.get("walk", "replica_offset", w.replica_offset);
  r.get("walk", "master_seed", w.master_seed, true);
  r.get("walk", "compress_threshold", w.compress_threshold);
  r.get("walk", "checkpoints_per_decade", w.checkpoints_per_decade);
  r.get("walk", "first_checkpoint", w.first_checkpoint);
  r.get("walk", "stop_level", w.stop_level);
  if (w.steps < 1) out.errors.push_back("walk.steps: must be at least 1");
  if (w.replicas < 1) out.errors.push_back("walk.replicas: must be at least 1");
  if (w.replica_offset < 0) out.errors.push_back("walk.replica_offset: must be non-negative");
  if (w.compress_threshold != 0.0 && !(w.compress_threshold > c.field.K))
    out.errors.push_back("walk.compress_threshold: must be 0 (off) or exceed field.K");
  if (w.checkpoints_per_decade < 1) out.errors.push_back("walk.checkpoints_per_decade: must be at least 1");
  if (w.first_checkpoint < 1) out.errors.push_back("walk.first_checkpoint: must be at least 1");
  if (w.stop_level < 0.0) out.errors.push_back("walk.stop_level: must be 0 (off) or positive");

  // regen
  auto& g = c.regen;
  g.alpha = d + 4.0;
  r.get("regen", "alpha", g.alpha, true);
  r.get("regen", "margin", g.margin_steps);
  r.get("regen", "n_threshold", g.n_threshold, true);
  r.get("regen", "delta", g.delta, true);
  r.get("regen", "notable_floor", g.notable_floor);
  if (!(g.alpha > d + 3.0)) out.errors.push_back("regen.alpha: must exceed d + 3");
  if (g.margin_steps < 0) out.errors.push_back("regen.margin: must be non-negative (0 selects the default)");
  if (!(g.n_threshold > c.field.K)) out.errors.push_back("regen.n_threshold: must exceed field.K");
  const double dmax = L.family == LawFamily::pareto ? 1.0 / (L.gamma + 3.0) : 1.0;
  if (!(g.delta > 0.0 && g.delta < dmax))
    out.errors.push_back("regen.delta: must lie in (0, " + fmt_double(dmax) + ")" +
                         (L.family == LawFamily::pareto ? " = (0, 1/(gamma+3))" : ""));
  if (g.notable_floor < 0.0) out.errors.push_back("regen.notable_floor: must be non-negative");

  // outputs
  r.get("outputs", "directory", c.outputs.directory);
  if (auto v = r.raw("outputs", "formats")) {
    std::string s = *v;
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream fs(s);
    std::string f;
    c.outputs.csv = c.outputs.json = false;
    while (fs >> f) {
      if (f == "csv")
        c.outputs.csv = true;
      else if (f == "json")
        c.outputs.json = true;
      else
        out.errors.push_back("outputs.formats: unknown format '" + f + "'");
    }
    if (!c.outputs.csv && !c.outputs.json) out.errors.push_back("outputs.formats: need csv and/or json");
  }

  // experiment
  std::string kind = "exponent";
  r.get("experiment", "kind", kind, true);
  const std::map<std::string, ExperimentKind> kinds = {{"exponent", ExperimentKind::exponent},
                                                       {"clock", ExperimentKind::clock},
                                                       {"fk", ExperimentKind::fk},
                                                       {"traps", ExperimentKind::traps},
                                                       {"oracle_suite", ExperimentKind::oracle_suite}};
  if (auto it = kinds.find(kind); it != kinds.end())
    c.experiment.kind = it->second;
  else
    out.errors.push_back("experiment.kind: unknown experiment '" + kind + "'");
  if (c.walk.stop_level > 0.0 &&
      (c.experiment.kind == ExperimentKind::exponent || c.experiment.kind == ExperimentKind::fk))
    out.errors.push_back("walk.stop_level: only clock and traps runs may stop on level (checkpoints need fixed times)");
  r.get("experiment", "clock_n1", c.experiment.clock_n1);
  r.get("experiment", "clock_n2", c.experiment.clock_n2);
  r.get("experiment", "clock_replicas", c.experiment.clock_replicas);
  if (c.experiment.clock_n1 < 1 || c.experiment.clock_n2 < 4 * c.experiment.clock_n1)
    out.errors.push_back("experiment.clock_n2: must be at least 4 * clock_n1 with clock_n1 >= 1");
  if (c.experiment.clock_replicas < 20) out.errors.push_back("experiment.clock_replicas: must be at least 20");

  if (out.errors.empty()) out.config = c;
  return out;
}

ConfigResult load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    ConfigResult r;
    r.errors.push_back("cannot open config file '" + path + "'");
    return r;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string to_ini(const RunConfig& c) {
  std::ostringstream o;
  const auto& L = c.field.law;
  o << "[field]\n";
  o << "dimension = " << c.field.dimension << "\n";
  switch (L.family) {
    case LawFamily::pareto:
      o << "law = " << (L.slowly_varying == SlowlyVarying::log_power ? "log_pareto" : "pareto") << "\n";
      o << "gamma = " << fmt_double(L.gamma) << "\n";
      if (L.slowly_varying == SlowlyVarying::log_power) o << "beta = " << fmt_double(L.beta) << "\n";
      o << "x_min = " << fmt_double(L.x_min) << "\n";
      break;
    case LawFamily::uniform:
      o << "law = uniform\nlo = " << fmt_double(L.lo) << "\nhi = " << fmt_double(L.hi) << "\n";
      break;
    case LawFamily::constant:
      o << "law = constant\nvalue = " << fmt_double(L.value) << "\n";
      break;
  }
  o << "seed = " << c.field.seed << "\n";
  o << "K = " << fmt_double(c.field.K) << "\n";
  o << "lambda = " << fmt_double(c.field.lambda) << "\n";
  o << "direction = ";
  for (std::size_t i = 0; i < c.field.direction.size(); ++i)
    o << (i ? ", " : "") << fmt_double(c.field.direction[i]);
  o << "\n\n[walk]\n";
  o << "steps = " << c.walk.steps << "\n";
  o << "replicas = " << c.walk.replicas << "\n";
  o << "replica_offset = " << c.walk.replica_offset << "\n";
  o << "master_seed = " << c.walk.master_seed << "\n";
  o << "compress_threshold = " << fmt_double(c.walk.compress_threshold) << "\n";
  o << "checkpoints_per_decade = " << c.walk.checkpoints_per_decade << "\n";
  o << "first_checkpoint = " << c.walk.first_checkpoint << "\n";
  o << "stop_level = " << fmt_double(c.walk.stop_level) << "\n";
  o << "\n[regen]\n";
  o << "alpha = " << fmt_double(c.regen.alpha) << "\n";
  o << "margin = " << c.regen.margin_steps << "\n";
  o << "n_threshold = " << fmt_double(c.regen.n_threshold) << "\n";
  o << "delta = " << fmt_double(c.regen.delta) << "\n";
  o << "notable_floor = " << fmt_double(c.regen.notable_floor) << "\n";
  o << "\n[outputs]\n";
  o << "directory = " << c.outputs.directory << "\n";
  o << "formats = " << (c.outputs.csv ? "csv" : "") << (c.outputs.csv && c.outputs.json ? ", " : "")
    << (c.outputs.json ? "json" : "") << "\n";
  o << "\n[experiment]\n";
  o << "kind = " << to_string(c.experiment.kind) << "\n";
  o << "clock_n1 = " << c.experiment.clock_n1 << "\n";
  o << "clock_n2 = " << c.experiment.clock_n2 << "\n";
  o << "clock_replicas = " << c.experiment.clock_replicas << "\n";
  return o.str();
}

std::vector<std::int64_t> checkpoint_times(const WalkSettings& w) {
  std::vector<std::int64_t> t;
  const double step = std::pow(10.0, 1.0 / w.checkpoints_per_decade);
  double x = static_cast<double>(w.first_checkpoint);
  while (x < static_cast<double>(w.steps)) {
    auto v = static_cast<std::int64_t>(std::llround(x));
    if (t.empty() || v > t.back()) t.push_back(v);
    x *= step;
  }
  if (t.empty() || t.back() != w.steps) t.push_back(w.steps);
  return t;
}

}  // namespace trapwalk
