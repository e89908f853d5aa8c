#include "trapwalk/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <charconv>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "trapwalk/oracles.hpp"
#include "trapwalk/regen.hpp"
#include "trapwalk/scaling.hpp"
#include "trapwalk/stats.hpp"
#include "trapwalk/trapmodel.hpp"
#include "trapwalk/version.hpp"
#include "trapwalk/walk.hpp"

namespace trapwalk {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kEnvStream = 0;
constexpr std::uint64_t kWalkStream = 1;
constexpr std::uint64_t kAuxStream = 2;
constexpr std::uint64_t kAnalysisStream = 7;

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::uint64_t hash_text(const std::string& s) {
  std::uint64_t h = 0x5EEDull;
  for (unsigned char c : s) h = hash_combine(h, c);
  return h;
}

bool needs_blocks(ExperimentKind k) {
  return k == ExperimentKind::clock || k == ExperimentKind::fk || k == ExperimentKind::traps;
}

std::vector<int> coords(const Vertex& v, int d) {
  std::vector<int> out(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) out[static_cast<std::size_t>(i)] = v[i];
  return out;
}

}  // namespace

std::string artifact_version() { return kTrapwalkVersion; }

ReplicaSeeds replica_seeds(const RunConfig& cfg, int index) {
  ReplicaSeeds s;
  s.index = index;
  const auto i = static_cast<std::uint64_t>(index);
  s.env_seed = derive_seed(cfg.field.seed, i, kEnvStream);
  s.walk_seed = derive_seed(cfg.walk.master_seed, i, kWalkStream);
  s.aux_seed = derive_seed(cfg.walk.master_seed, i, kAuxStream);
  return s;
}

std::string run_id_of(const RunConfig& cfg) {
  RunConfig c = cfg;
  c.outputs.directory.clear();
  return hex64(hash_text(to_ini(c)));
}

ReplicaOutput simulate_replica(const RunConfig& cfg, int index, const std::string& source) {
  const auto t0 = std::chrono::steady_clock::now();
  ReplicaOutput out;
  const ReplicaSeeds s = replica_seeds(cfg, index);
  FieldConfig fc = cfg.field;
  fc.seed = s.env_seed;
  ConductanceField field(fc);
  const int d = field.dim();
  const Geometry& geo = field.geometry();
  const ExperimentKind kind = cfg.experiment.kind;

  WalkRng rng(s.walk_seed);
  WalkOptions wo;
  if (cfg.walk.compress_threshold > 0.0) wo.compress_threshold = cfg.walk.compress_threshold;
  wo.checkpoints = checkpoint_times(cfg.walk);
  wo.record_path = needs_blocks(kind);
  if (cfg.walk.stop_level > 0.0) wo.stop_level = cfg.walk.stop_level;
  EnhancedTrajectory traj = run_walk(field, Vertex{}, cfg.walk.steps, rng, wo);

  out.row.replica = index;
  out.row.source = source;
  out.row.seeds = s;
  out.row.steps = traj.length();
  out.row.end = coords(traj.end(), d);
  out.row.end_level = geo.level(traj.end());
  out.row.stored_chunks = static_cast<std::int64_t>(traj.step_chunks() + traj.run_chunks());
  for (const auto& cp : traj.checkpoints()) {
    LevelRow r;
    r.replica = index;
    r.source = source;
    r.t = cp.time;
    r.x = coords(cp.position, d);
    r.level = geo.level(cp.position);
    out.levels.push_back(std::move(r));
  }

  if (needs_blocks(kind)) {
    RegenConfig rc = cfg.regen;
    rc.annotate = kind == ExperimentKind::traps;
    rc.keep_notable = false;
    RegenSequence seq = detect_regenerations(traj, field, rc);
    out.row.regenerations = static_cast<std::int64_t>(seq.taus.size());
    out.row.tau1 = seq.taus.empty() ? -1 : seq.taus.front();
    WalkRng aux(s.aux_seed);
    for (const auto& b : seq.blocks) {
      BlockRow r;
      r.replica = index;
      r.source = source;
      r.block = static_cast<std::int64_t>(b.index);
      r.start = b.start_time;
      r.end = b.end_time;
      r.duration = b.duration;
      r.disp = coords(b.displacement, d);
      if (rc.annotate) {
        r.chi = b.chi;
        r.max_conductance = b.max_conductance;
        r.vertices = static_cast<std::int64_t>(b.vertices_visited);
        r.edges_met = static_cast<std::int64_t>(b.edges_met);
        r.LT = b.flags.LT;
        r.SLT = b.flags.SLT;
        r.OLT = b.flags.OLT;
        r.NLT = b.flags.NLT;
        r.time_below_n = b.time_below_threshold;
        if (b.flags.LT && b.has_trap_edge) {
          TrapObservables o = collect_trap_observables(traj, field, b, aux);
          r.trap_conductance = o.trap_conductance;
          r.time_on_trap = o.T_on_edge;
          r.V_n = o.V_n;
          r.pi_bar = o.pi_bar;
          r.W_n = o.W_n;
          r.W_infty = o.W_infty_sample;
        }
      }
      out.blocks.push_back(std::move(r));
    }
  }
  out.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

Tables simulate(const RunConfig& cfg, int workers, const std::string& source, std::vector<double>* seconds) {
  const int n = cfg.walk.replicas;
  std::vector<ReplicaOutput> results(static_cast<std::size_t>(n));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(n));
  std::atomic<int> next{0};
  auto work = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        results[static_cast<std::size_t>(i)] = simulate_replica(cfg, cfg.walk.replica_offset + i, source);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  const int w = std::max(1, std::min(workers, n));
  if (w == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < w; ++k) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);
  Tables t;
  t.dim = cfg.field.dimension;
  for (auto& r : results) {
    t.replicas.push_back(r.row);
    t.levels.insert(t.levels.end(), r.levels.begin(), r.levels.end());
    t.blocks.insert(t.blocks.end(), r.blocks.begin(), r.blocks.end());
    if (seconds) seconds->push_back(r.seconds);
  }
  return t;
}

// ---------------------------------------------------------------- analysis

namespace {

json fit_json(const TailFit& f) {
  return {{"gamma_hat", f.gamma_hat}, {"k_used", f.k_used}, {"ci_half_width", f.ci_half_width}};
}

json vec_json(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json mat_json(const Eigen::MatrixXd& m) {
  json a = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

template <class F>
void section(json& report, const std::string& key, F&& f) {
  try {
    report[key] = f();
  } catch (const std::exception& e) {
    report[key] = {{"error", e.what()}};
  }
}

json analyze_exponent(const RunConfig& cfg, const Tables& t) {
  const auto cps = checkpoint_times(cfg.walk);
  std::vector<std::vector<double>> levels;
  std::vector<double> row;
  int current = -1;
  for (const auto& l : t.levels) {
    if (l.replica != current) {
      if (current >= 0) levels.push_back(row);
      row.clear();
      current = l.replica;
    }
    row.push_back(l.level);
  }
  if (current >= 0) levels.push_back(row);
  ExponentFit f = displacement_exponent(cps, levels);
  return {{"gamma_from_displacement", f.slope},
          {"slope_of_mean_level", f.slope_of_mean},
          {"replica_slope_sd", f.slope_sd},
          {"replicas_used", f.replicas_used},
          {"skipped_points", f.skipped_points}};
}

std::vector<double> durations_of(const Tables& t) {
  std::vector<double> d;
  for (const auto& b : t.blocks) d.push_back(static_cast<double>(b.duration));
  return d;
}

json analyze_clock(const RunConfig& cfg, const Tables& t) {
  json j;
  const auto dur = durations_of(t);
  j["blocks"] = dur.size();
  section(j, "hill", [&] {
    HillReport h = hill_default(dur);
    return json{{"k", fit_json(h.main)}, {"k_half", fit_json(h.half)}, {"k_twice", fit_json(h.twice)}};
  });
  section(j, "independence", [&] {
    std::vector<double> lv;
    for (const auto& b : t.blocks) {
      double s = 0.0;
      for (std::size_t i = 0; i < b.disp.size(); ++i) s += b.disp[i] * cfg.field.direction[i];
      lv.push_back(s);
    }
    return json{{"lag1_duration", autocorrelation(dur, 1)},
                {"lag1_level_displacement", autocorrelation(lv, 1)},
                {"band", 3.0 / std::sqrt(static_cast<double>(dur.size()))}};
  });
  section(j, "selfsimilarity", [&] {
    const auto& e = cfg.experiment;
    WalkRng rng(derive_seed(cfg.walk.master_seed, 0, kAnalysisStream));
    const double i1 = inv_scale(cfg.field.law, static_cast<double>(e.clock_n1));
    const double i2 = inv_scale(cfg.field.law, static_cast<double>(e.clock_n2));
    SelfSimilarity s = clock_selfsimilarity_test(dur, e.clock_n1, e.clock_n2, e.clock_replicas, i1, i2, rng);
    return json{{"n1", e.clock_n1},       {"n2", e.clock_n2},        {"replicas", e.clock_replicas},
                {"inv_n1", i1},           {"inv_n2", i2},            {"ks_statistic", s.ks.statistic},
                {"p_value", s.ks.p_value}, {"resampled", s.resampled}};
  });
  return j;
}

json analyze_fk(const RunConfig& cfg, const Tables& t) {
  const int d = t.dim;
  std::vector<Eigen::VectorXd> disp;
  std::vector<double> dur;
  for (const auto& b : t.blocks) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = b.disp[static_cast<std::size_t>(i)];
    disp.push_back(v);
    dur.push_back(static_cast<double>(b.duration));
  }
  const auto cps = checkpoint_times(cfg.walk);
  std::vector<std::vector<Eigen::VectorXd>> pos;
  int current = -1;
  for (const auto& l : t.levels) {
    if (l.replica != current) {
      pos.emplace_back();
      current = l.replica;
    }
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = l.x[static_cast<std::size_t>(i)];
    pos.back().push_back(v);
  }
  FkCheck f = transverse_fk_check(disp, dur, cfg.field.direction, cps, pos);
  json ms = json::array();
  for (double v : f.mean_sq_transverse) ms.push_back(v);
  return {{"transverse_slope", f.slope},
          {"transverse_slope_se", f.slope_se},
          {"v_hat", vec_json(f.v_hat)},
          {"v0_hat", vec_json(f.v0_hat)},
          {"sigma_hat", mat_json(f.sigma_hat)},
          {"Md_hat", mat_json(f.Md_hat)},
          {"projection_residual", f.projection_residual},
          {"sigma_rank_deficient", f.sigma_rank_deficient},
          {"mean_sq_transverse", ms},
          {"note",
           "Md_hat omits the scalar C_infty^(-gamma/2); the scalar C of the transverse limit is identified with "
           "|v| C_infty^(-gamma)"}};
}

json analyze_traps(const RunConfig& cfg, const Tables& t) {
  json j;
  const double n = cfg.regen.n_threshold;
  std::size_t lt = 0, slt = 0, olt = 0, lt2 = 0;
  double frac_trap = 0.0, frac_above = 0.0;
  std::vector<double> W, Winf, cmaxW;
  for (const auto& b : t.blocks) {
    if (b.max_conductance >= 2.0 * n) ++lt2;
    if (!b.LT) continue;
    ++lt;
    slt += b.SLT;
    olt += b.OLT;
    frac_trap += static_cast<double>(b.time_on_trap) / static_cast<double>(b.duration);
    frac_above += static_cast<double>(b.duration - b.time_below_n) / static_cast<double>(b.duration);
    W.push_back(b.W_n);
    Winf.push_back(b.W_infty);
    if (b.W_n > 0.0) cmaxW.push_back(b.max_conductance * b.W_n);
  }
  j["blocks"] = t.blocks.size();
  j["n"] = n;
  j["delta"] = cfg.regen.delta;
  j["lt_blocks"] = lt;
  j["olt_blocks"] = olt;
  j["slt_blocks"] = slt;
  j["slt_given_lt"] = lt ? static_cast<double>(slt) / static_cast<double>(lt) : -1.0;
  j["mean_fraction_on_trap_edge"] = lt ? frac_trap / static_cast<double>(lt) : -1.0;
  j["mean_fraction_at_or_above_n"] = lt ? frac_above / static_cast<double>(lt) : -1.0;
  section(j, "W_convergence", [&] {
    TestResult ks = ks_two_sample(W, Winf);
    return json{{"ks_statistic", ks.statistic}, {"p_value", ks.p_value}, {"samples", W.size()}};
  });
  section(j, "limit_constants", [&] {
    LimitConstants c = estimate_limit_constants(t.blocks.size(), W, n, cfg.field.law);
    json r{{"C1_hat", c.C1_hat}, {"C_infty_hat", c.C_infty_hat}};
    if (lt2 > 0)
      r["C1_hat_at_2n"] = (static_cast<double>(lt2) / static_cast<double>(t.blocks.size())) /
                          cfg.field.law.tail(2.0 * n);
    return r;
  });
  section(j, "cmax_W_tail", [&] { return fit_json(hill_default(cmaxW).main); });
  return j;
}

}  // namespace

std::string analyze(const RunConfig& cfg, const Tables& t) {
  json report;
  report["schema"] = "report/1";
  report["experiment"] = to_string(cfg.experiment.kind);
  report["gamma_config"] = cfg.field.law.family == LawFamily::pareto ? cfg.field.law.gamma : -1.0;
  report["replicas"] = t.replicas.size();
  std::int64_t steps = 0;
  for (const auto& r : t.replicas) steps += r.steps;
  report["total_steps"] = steps;
  switch (cfg.experiment.kind) {
    case ExperimentKind::exponent:
      section(report, "exponent", [&] { return analyze_exponent(cfg, t); });
      break;
    case ExperimentKind::clock:
      section(report, "clock", [&] { return analyze_clock(cfg, t); });
      break;
    case ExperimentKind::fk:
      section(report, "fk", [&] { return analyze_fk(cfg, t); });
      break;
    case ExperimentKind::traps:
      section(report, "traps", [&] { return analyze_traps(cfg, t); });
      break;
    case ExperimentKind::oracle_suite:
      break;
  }
  return report.dump(2) + "\n";
}

// ---------------------------------------------------------------- tables

std::string replicas_csv(const Tables& t) {
  std::ostringstream o;
  o << "replica,source,env_seed,walk_seed,aux_seed,steps";
  for (int i = 0; i < t.dim; ++i) o << ",end_" << i;
  o << ",end_level,regenerations,tau1,stored_chunks\n";
  for (const auto& r : t.replicas) {
    o << r.replica << ',' << r.source << ',' << r.seeds.env_seed << ',' << r.seeds.walk_seed << ','
      << r.seeds.aux_seed << ',' << r.steps;
    for (int v : r.end) o << ',' << v;
    o << ',' << num(r.end_level) << ',' << r.regenerations << ',' << r.tau1 << ',' << r.stored_chunks << '\n';
  }
  return o.str();
}

std::string levels_csv(const Tables& t) {
  std::ostringstream o;
  o << "replica,source,t";
  for (int i = 0; i < t.dim; ++i) o << ",x_" << i;
  o << ",level\n";
  for (const auto& r : t.levels) {
    o << r.replica << ',' << r.source << ',' << r.t;
    for (int v : r.x) o << ',' << v;
    o << ',' << num(r.level) << '\n';
  }
  return o.str();
}

std::string blocks_csv(const Tables& t) {
  std::ostringstream o;
  o << "replica,source,block,start,end,duration";
  for (int i = 0; i < t.dim; ++i) o << ",disp_" << i;
  o << ",chi,max_conductance,vertices,edges_met,LT,SLT,OLT,NLT,trap_conductance,time_on_trap,V_n,pi_bar,W_n,"
       "W_infty,time_below_n\n";
  for (const auto& r : t.blocks) {
    o << r.replica << ',' << r.source << ',' << r.block << ',' << r.start << ',' << r.end << ',' << r.duration;
    for (int v : r.disp) o << ',' << v;
    o << ',' << r.chi << ',' << num(r.max_conductance) << ',' << r.vertices << ',' << r.edges_met << ',' << r.LT
      << ',' << r.SLT << ',' << r.OLT << ',' << r.NLT << ',' << num(r.trap_conductance) << ',' << r.time_on_trap
      << ',' << r.V_n << ',' << num(r.pi_bar) << ',' << num(r.W_n) << ',' << num(r.W_infty) << ','
      << r.time_below_n << '\n';
  }
  return o.str();
}

namespace {

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::string cell;
    std::istringstream ls(line);
    while (std::getline(ls, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    rows.push_back(std::move(f));
  }
  return rows;
}

template <class T>
T as(const std::string& s) {
  T v{};
  if constexpr (std::is_floating_point_v<T>) {
    if (s == "inf") return std::numeric_limits<T>::infinity();
    if (s == "-inf") return -std::numeric_limits<T>::infinity();
  }
  auto r = std::from_chars(s.data(), s.data() + s.size(), v);
  if (r.ec != std::errc() || r.ptr != s.data() + s.size()) throw std::runtime_error("bad CSV value '" + s + "'");
  return v;
}

class Fields {
 public:
  Fields(const std::vector<std::string>& f, std::size_t expect) : f_(f) {
    if (f.size() != expect) throw std::runtime_error("CSV row has " + std::to_string(f.size()) + " fields, expected " +
                                                     std::to_string(expect));
  }
  template <class T>
  T next() {
    return as<T>(f_[i_++]);
  }
  std::string text() { return f_[i_++]; }

 private:
  const std::vector<std::string>& f_;
  std::size_t i_ = 0;
};

}  // namespace

Tables read_tables(const std::string& dir, int dim) {
  Tables t;
  t.dim = dim;
  const auto d = static_cast<std::size_t>(dim);
  for (const auto& row : read_csv(fs::path(dir) / "replicas.csv")) {
    Fields f(row, 10 + d);
    ReplicaRow r;
    r.replica = f.next<int>();
    r.source = f.text();
    r.seeds.index = r.replica;
    r.seeds.env_seed = f.next<std::uint64_t>();
    r.seeds.walk_seed = f.next<std::uint64_t>();
    r.seeds.aux_seed = f.next<std::uint64_t>();
    r.steps = f.next<std::int64_t>();
    for (std::size_t i = 0; i < d; ++i) r.end.push_back(f.next<int>());
    r.end_level = f.next<double>();
    r.regenerations = f.next<std::int64_t>();
    r.tau1 = f.next<std::int64_t>();
    r.stored_chunks = f.next<std::int64_t>();
    t.replicas.push_back(std::move(r));
  }
  for (const auto& row : read_csv(fs::path(dir) / "levels.csv")) {
    Fields f(row, 4 + d);
    LevelRow r;
    r.replica = f.next<int>();
    r.source = f.text();
    r.t = f.next<std::int64_t>();
    for (std::size_t i = 0; i < d; ++i) r.x.push_back(f.next<int>());
    r.level = f.next<double>();
    t.levels.push_back(std::move(r));
  }
  if (fs::exists(fs::path(dir) / "blocks.csv"))
    for (const auto& row : read_csv(fs::path(dir) / "blocks.csv")) {
      Fields f(row, 21 + d);
      BlockRow r;
      r.replica = f.next<int>();
      r.source = f.text();
      r.block = f.next<std::int64_t>();
      r.start = f.next<std::int64_t>();
      r.end = f.next<std::int64_t>();
      r.duration = f.next<std::int64_t>();
      for (std::size_t i = 0; i < d; ++i) r.disp.push_back(f.next<int>());
      r.chi = f.next<int>();
      r.max_conductance = f.next<double>();
      r.vertices = f.next<std::int64_t>();
      r.edges_met = f.next<std::int64_t>();
      r.LT = f.next<int>();
      r.SLT = f.next<int>();
      r.OLT = f.next<int>();
      r.NLT = f.next<int>();
      r.trap_conductance = f.next<double>();
      r.time_on_trap = f.next<std::int64_t>();
      r.V_n = f.next<std::int64_t>();
      r.pi_bar = f.next<double>();
      r.W_n = f.next<double>();
      r.W_infty = f.next<double>();
      r.time_below_n = f.next<std::int64_t>();
      t.blocks.push_back(std::move(r));
    }
  return t;
}

// ---------------------------------------------------------------- runs

namespace {

void prepare_dir(const fs::path& dir, bool overwrite) {
  if (dir.empty()) throw std::invalid_argument("no output directory given");
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw std::runtime_error(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir)) {
      if (!overwrite) throw std::runtime_error("output directory " + dir.string() + " is not empty (use overwrite)");
      for (const char* f : {"config.ini", "replicas.csv", "levels.csv", "blocks.csv", "report.json", "manifest.json"})
        fs::remove(dir / f);
    }
  }
  fs::create_directories(dir);
}

void write_file(const fs::path& p, const std::string& text, std::vector<std::string>& files) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
  files.push_back(p.filename().string());
}

json seeds_json(const std::vector<ReplicaRow>& rows) {
  json a = json::array();
  for (const auto& r : rows)
    a.push_back({{"replica", r.replica},
                 {"env_seed", r.seeds.env_seed},
                 {"walk_seed", r.seeds.walk_seed},
                 {"aux_seed", r.seeds.aux_seed},
                 {"source", r.source}});
  return a;
}

void write_outputs(const RunConfig& cfg, const Tables& t, const fs::path& dir, std::vector<std::string>& files) {
  if (cfg.outputs.csv) {
    write_file(dir / "replicas.csv", replicas_csv(t), files);
    write_file(dir / "levels.csv", levels_csv(t), files);
    if (needs_blocks(cfg.experiment.kind)) write_file(dir / "blocks.csv", blocks_csv(t), files);
  }
  if (cfg.outputs.json) write_file(dir / "report.json", analyze(cfg, t), files);
}

}  // namespace

RunSummary run_experiment(const RunConfig& cfg_in, const RunOptions& opts) {
  RunConfig cfg = cfg_in;
  const fs::path dir = opts.out_dir.empty() ? fs::path(cfg.outputs.directory) : fs::path(opts.out_dir);
  prepare_dir(dir, opts.overwrite);
  cfg.outputs.directory.clear();  // outputs must not depend on where they are written
  RunSummary s;
  s.out_dir = dir.string();
  s.run_id = run_id_of(cfg);
  const auto t0 = std::chrono::steady_clock::now();

  json manifest;
  manifest["schema"] = "manifest/1";
  manifest["artifact_version"] = artifact_version();
  manifest["run_id"] = s.run_id;
  manifest["experiment"] = to_string(cfg.experiment.kind);
  manifest["config_ini"] = to_ini(cfg);
  write_file(dir / "config.ini", to_ini(cfg), s.files);

  if (cfg.experiment.kind == ExperimentKind::oracle_suite) {
    json report;
    report["schema"] = "oracle_report/1";
    json checks = json::array();
    for (const auto& c : run_oracle_suite(cfg.walk.master_seed)) {
      checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value}, {"detail", c.detail}});
      s.all_passed = s.all_passed && c.passed;
    }
    report["checks"] = checks;
    report["all_passed"] = s.all_passed;
    write_file(dir / "report.json", report.dump(2) + "\n", s.files);
    manifest["replicas"] = json::array();
  } else {
    std::vector<double> secs;
    Tables t = simulate(cfg, opts.workers, s.run_id, &secs);
    write_outputs(cfg, t, dir, s.files);
    manifest["replicas"] = seeds_json(t.replicas);
    std::int64_t steps = 0;
    for (const auto& r : t.replicas) steps += r.steps;
    manifest["metrics"]["replica_seconds"] = secs;
    manifest["metrics"]["total_steps"] = steps;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  manifest["metrics"]["wall_seconds"] = wall;
  manifest["metrics"]["workers"] = opts.workers;
  if (manifest["metrics"].contains("total_steps"))
    manifest["metrics"]["steps_per_second"] =
        wall > 0 ? static_cast<double>(manifest["metrics"]["total_steps"].get<std::int64_t>()) / wall : 0.0;
  manifest["sources"] = json::array({{{"run_id", s.run_id}, {"directory", s.out_dir}}});
  manifest["files"] = s.files;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n", s.files);
  return s;
}

namespace {

struct LoadedRun {
  json manifest;
  RunConfig cfg;
};

LoadedRun load_manifest(const fs::path& p) {
  std::ifstream in(p);
  if (!in) throw std::runtime_error("cannot read manifest " + p.string());
  LoadedRun r;
  r.manifest = json::parse(in);
  ConfigResult c = parse_config(r.manifest.at("config_ini").get<std::string>());
  if (!c.config) {
    std::string msg = "manifest config invalid:";
    for (const auto& e : c.errors) msg += " " + e + ";";
    throw std::runtime_error(msg);
  }
  r.cfg = *c.config;
  return r;
}

}  // namespace

RunSummary rerun_from_manifest(const std::string& manifest_path, const RunOptions& opts) {
  LoadedRun r = load_manifest(manifest_path);
  if (r.manifest.value("merged", false)) throw std::runtime_error("a merged manifest cannot be rerun directly");
  RunOptions o = opts;
  if (o.out_dir.empty()) throw std::invalid_argument("rerun needs an output directory");
  return run_experiment(r.cfg, o);
}

RunSummary merge_runs(const std::vector<std::string>& dirs, const RunOptions& opts) {
  if (dirs.size() < 2) throw std::invalid_argument("merge needs at least two run directories");
  std::set<fs::path> seen_paths;
  std::set<int> seen_replicas;
  std::optional<RunConfig> base;
  std::string base_key, version;
  Tables merged;
  json sources = json::array();
  for (const auto& d : dirs) {
    const fs::path canon = fs::weakly_canonical(d);
    if (!seen_paths.insert(canon).second) throw std::runtime_error("duplicate provenance: " + d + " given twice");
    LoadedRun r = load_manifest(canon / "manifest.json");
    if (r.cfg.experiment.kind == ExperimentKind::oracle_suite)
      throw std::runtime_error("oracle_suite runs have no tables to merge");
    if (!r.cfg.outputs.csv) throw std::runtime_error(d + " was written without CSV tables");
    const std::string v = r.manifest.at("artifact_version").get<std::string>();
    RunConfig key = r.cfg;
    key.walk.replicas = 1;
    key.walk.replica_offset = 0;
    key.outputs.directory.clear();
    const std::string k = to_ini(key);
    if (!base) {
      base = r.cfg;
      base_key = k;
      version = v;
      merged.dim = r.cfg.field.dimension;
    } else {
      if (v != version) throw std::runtime_error("artifact version mismatch: " + v + " vs " + version);
      if (k != base_key) throw std::runtime_error("configuration mismatch between " + dirs.front() + " and " + d);
    }
    Tables t = read_tables(canon.string(), r.cfg.field.dimension);
    for (const auto& row : t.replicas)
      if (!seen_replicas.insert(row.replica).second)
        throw std::runtime_error("duplicate provenance: replica " + std::to_string(row.replica) + " appears twice");
    merged.replicas.insert(merged.replicas.end(), t.replicas.begin(), t.replicas.end());
    merged.levels.insert(merged.levels.end(), t.levels.begin(), t.levels.end());
    merged.blocks.insert(merged.blocks.end(), t.blocks.begin(), t.blocks.end());
    for (const auto& s : r.manifest.at("sources")) sources.push_back(s);
  }
  auto by_replica = [](const auto& a, const auto& b) { return a.replica < b.replica; };
  std::stable_sort(merged.replicas.begin(), merged.replicas.end(), by_replica);
  std::stable_sort(merged.levels.begin(), merged.levels.end(), by_replica);
  std::stable_sort(merged.blocks.begin(), merged.blocks.end(), by_replica);

  RunConfig cfg = *base;
  cfg.walk.replicas = static_cast<int>(merged.replicas.size());
  cfg.walk.replica_offset = merged.replicas.front().replica;
  const fs::path dir = opts.out_dir;
  prepare_dir(dir, opts.overwrite);
  cfg.outputs.directory.clear();
  RunSummary s;
  s.out_dir = dir.string();
  s.run_id = run_id_of(cfg);
  write_file(dir / "config.ini", to_ini(cfg), s.files);
  write_outputs(cfg, merged, dir, s.files);
  json manifest;
  manifest["schema"] = "manifest/1";
  manifest["artifact_version"] = version;
  manifest["run_id"] = s.run_id;
  manifest["experiment"] = to_string(cfg.experiment.kind);
  manifest["merged"] = true;
  manifest["config_ini"] = to_ini(cfg);
  manifest["replicas"] = seeds_json(merged.replicas);
  manifest["sources"] = sources;
  manifest["files"] = s.files;
  write_file(dir / "manifest.json", manifest.dump(2) + "\n", s.files);
  return s;
}

}  // namespace trapwalk
