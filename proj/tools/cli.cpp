#include "cli.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <CLI11.hpp>
#include <json.hpp>

#include "gmacldpc/alist.hpp"
#include "gmacldpc/code.hpp"
#include "gmacldpc/optimizer.hpp"
#include "gmacldpc/pexit.hpp"
#include "gmacldpc/protograph.hpp"
#include "gmacldpc/sim.hpp"
#include "gmacldpc/spreading.hpp"

namespace gmacldpc::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct KeyDoc {
  std::string key;
  std::string doc;
};

using KeyList = std::vector<KeyDoc>;

const KeyList kCodeKeys = {
    {"protograph", "base matrix: a protograph text file path or an inline array of rows"},
    {"alist", "parity-check matrix file in alist format (instead of protograph)"},
    {"lift_size", "lifting factor Z (default 91)"},
    {"lift_seed", "lifting seed (default 1)"},
    {"repetition", "send every bit of the lifted code twice (default false)"},
};

const KeyList kSimKeys = {
    {"users", "number of users T (default 1)"},
    {"ebn0_db", "list of Eb/N0 points in dB"},
    {"ebn0_start", "sweep start in dB (with ebn0_stop, ebn0_step)"},
    {"ebn0_stop", "sweep stop in dB, inclusive"},
    {"ebn0_step", "sweep step in dB (default 0.5)"},
    {"frames", "frames per point (default 1000)"},
    {"stop_after_errors", "stop a point after this many frame errors, 0 = never (default 100)"},
    {"outer_iterations", "joint decoder outer rounds (default 30)"},
    {"inner_iterations", "BP iterations per user per round (default 2)"},
    {"transmitted", "coded bits sent per user; trailing bits are punctured (default: code length)"},
    {"threads", "worker threads; results do not depend on it (default 1)"},
    {"seed", "master seed (default 1)"},
    {"out", "FER CSV path (default fer.csv)"},
};

const KeyList kSpreadKeys = {
    {"mode", "spread or split (default spread)"},
    {"chips", "slot length in chips for spread mode"},
    {"groups", "number of groups for split mode (default 2)"},
    {"signature", "signature JSON file to use instead of generating one"},
    {"signature_out", "write the signature used to this JSON file"},
};

const KeyList kPexitKeys = {
    {"protograph", "base matrix: a protograph text file path or an inline array of rows"},
    {"users", "number of users T (default 1)"},
    {"ebn0_db", "evolve at this Eb/N0 instead of searching for the threshold"},
    {"estimator", "state-information estimator: mean, mode or mixture (default mode)"},
    {"interferers", "interferer model: column_mixture or per_column (default column_mixture)"},
    {"samples", "Monte-Carlo samples per state-information estimate (default 10000)"},
    {"max_iters", "maximum evolution iterations (default 1000)"},
    {"target", "convergence target for the smallest APP information (default 0.9999)"},
    {"stall_window", "stop after this many iterations without progress, 0 = never (default 50)"},
    {"stall_tol", "progress tolerance for the stall test (default 1e-4)"},
    {"search_lo_db", "threshold search lower end (default -2)"},
    {"search_hi_db", "threshold search upper end (default 12)"},
    {"resolution_db", "threshold search resolution (default 0.01)"},
    {"seed", "sampling seed (default 1)"},
    {"out", "trajectory CSV path (default pexit_trajectory.csv)"},
};

const KeyList kOptimizeKeys = {
    {"rows", "base matrix rows (default 3)"},
    {"cols", "base matrix columns (default 4)"},
    {"max_multiplicity", "largest entry (default 3)"},
    {"users", "number of users T (default 2)"},
    {"initial_temperature", "annealing start temperature in dB (default 0.5)"},
    {"cooling", "temperature factor per step (default 0.98)"},
    {"steps", "proposals per chain (default 200)"},
    {"chains", "independent chains (default 1)"},
    {"start", "start matrix as inline rows or a protograph file (default: repetition of [[3,3]])"},
    {"estimator", "PEXIT estimator (default mode)"},
    {"interferers", "PEXIT interferer model (default column_mixture)"},
    {"samples", "PEXIT samples (default 10000)"},
    {"max_iters", "PEXIT iterations (default 1000)"},
    {"search_lo_db", "threshold search lower end (default -2)"},
    {"search_hi_db", "threshold search upper end (default 12)"},
    {"resolution_db", "threshold resolution (default 0.01)"},
    {"seed", "search seed (default 1)"},
    {"out", "protograph text output path (default optimized.proto)"},
    {"log", "JSON search log path (default <out>.log.json)"},
};

const KeyList kLiftKeys = {
    {"max_attempts", "sweeps of the 4-cycle removal pass (default 2000)"},
    {"six_cycle_sweeps", "sweeps of the 6-cycle thinning pass (default 20)"},
    {"out", "alist output path (default code.alist)"},
};

KeyList concat(std::initializer_list<const KeyList*> lists) {
  KeyList out;
  for (const auto* l : lists) out.insert(out.end(), l->begin(), l->end());
  return out;
}

std::string describe(const KeyList& keys) {
  std::ostringstream s;
  s << "\nConfig keys (JSON object):\n";
  for (const auto& k : keys) s << "  " << std::left << std::setw(20) << k.key << " " << k.doc << "\n";
  return s.str();
}

/// JSON config restricted to a known key set; relative file paths resolve
/// against the config file's directory.
class Config {
 public:
  Config(const std::string& path, const KeyList& keys) : dir_(fs::path(path).parent_path()) {
    std::ifstream f(path);
    if (!f) throw UsageError("cannot read config file '" + path + "'");
    try {
      j_ = json::parse(f);
    } catch (const json::parse_error& e) {
      throw UsageError("config file '" + path + "' is not valid JSON: " + e.what());
    }
    if (!j_.is_object()) throw UsageError("config file '" + path + "' must hold a JSON object");
    std::vector<std::string> unknown;
    for (const auto& [k, v] : j_.items()) {
      bool ok = false;
      for (const auto& d : keys) ok = ok || d.key == k;
      if (!ok) unknown.push_back(k);
    }
    if (!unknown.empty()) {
      std::string msg = "unknown config key(s):";
      for (const auto& k : unknown) msg += " '" + k + "'";
      msg += "\nvalid keys:";
      for (const auto& d : keys) msg += " " + d.key;
      throw UsageError(msg);
    }
  }

  bool has(const std::string& key) const { return j_.contains(key); }
  const json& raw(const std::string& key) const { return j_.at(key); }

  template <class T>
  T get(const std::string& key, T fallback) const {
    return has(key) ? value<T>(key) : fallback;
  }

  template <class T>
  T value(const std::string& key) const {
    if (!has(key)) throw UsageError("missing config key '" + key + "'");
    try {
      return j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw UsageError("config key '" + key + "' has the wrong type");
    }
  }

  /// Path of an input file named by the config; it must exist.
  std::string resolve(const std::string& p) const {
    fs::path q(p);
    auto full = q.is_absolute() || dir_.empty() ? q.string() : (dir_ / q).string();
    if (!fs::exists(full)) throw UsageError("input file '" + full + "' does not exist");
    return full;
  }

  void set(const std::string& key, json v) { j_[key] = std::move(v); }

 private:
  fs::path dir_;
  json j_;
};

Protograph protograph_from(const Config& c, const std::string& key) {
  const auto& v = c.raw(key);
  if (v.is_string()) return load_protograph(c.resolve(v.get<std::string>()));
  try {
    return Protograph(v.get<std::vector<std::vector<int>>>());
  } catch (const json::exception&) {
    throw UsageError("config key '" + key + "' must be a file path or an array of integer rows");
  }
}

LiftedCode code_from(const Config& c, const LiftOptions& opts = {}) {
  if (c.has("alist") == c.has("protograph")) throw UsageError("give exactly one of 'protograph' and 'alist'");
  std::optional<LiftedCode> code;
  if (c.has("alist")) {
    code.emplace(load_alist(c.resolve(c.value<std::string>("alist"))));
  } else {
    const auto Z = c.get<std::size_t>("lift_size", 91);
    code.emplace(lift(protograph_from(c, "protograph"), Z, c.get<std::uint64_t>("lift_seed", 1), opts));
  }
  if (c.get<bool>("repetition", false)) return build_repetition_baseline(*code);
  return std::move(*code);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw std::runtime_error("failed writing '" + path + "'");
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", x);
  return buf;
}

PexitOptions pexit_options(const Config& c) {
  PexitOptions o;
  if (c.has("estimator")) o.estimator = parse_estimator(c.value<std::string>("estimator"));
  if (c.has("interferers")) o.interferers = parse_interferer_model(c.value<std::string>("interferers"));
  o.samples = c.get<std::size_t>("samples", o.samples);
  o.max_iters = c.get<int>("max_iters", o.max_iters);
  if (c.has("target")) o.target = c.value<double>("target");
  if (c.has("stall_window")) o.stall_window = c.value<int>("stall_window");
  if (c.has("stall_tol")) o.stall_tol = c.value<double>("stall_tol");
  o.search_lo_db = c.get<double>("search_lo_db", o.search_lo_db);
  o.search_hi_db = c.get<double>("search_hi_db", o.search_hi_db);
  o.resolution_db = c.get<double>("resolution_db", o.resolution_db);
  o.seed = c.get<std::uint64_t>("seed", o.seed);
  return o;
}

std::string trajectory_csv(const Evolution& ev) {
  std::string out = "iteration,min_app";
  const std::size_t cols = ev.trajectory.empty() ? 0 : ev.trajectory.front().state_info.size();
  for (std::size_t j = 0; j < cols; ++j) out += ",state_info_" + std::to_string(j);
  out += "\n";
  for (const auto& p : ev.trajectory) {
    out += std::to_string(p.iteration) + "," + fmt(p.min_app);
    for (double v : p.state_info) out += "," + fmt(v);
    out += "\n";
  }
  return out;
}

json rows_json(const std::vector<int>& entries, std::size_t rows, std::size_t cols) {
  json m = json::array();
  for (std::size_t i = 0; i < rows; ++i) {
    m.push_back(std::vector<int>(entries.begin() + static_cast<std::ptrdiff_t>(i * cols),
                                 entries.begin() + static_cast<std::ptrdiff_t>((i + 1) * cols)));
  }
  return m;
}

json finite_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

// Subcommands. Each receives the config plus any flag overrides already
// folded in.

int cmd_lift(const Config& c, std::ostream& out) {
  LiftOptions opts;
  opts.max_attempts = c.get<int>("max_attempts", opts.max_attempts);
  opts.six_cycle_sweeps = c.get<int>("six_cycle_sweeps", opts.six_cycle_sweeps);
  const auto code = code_from(c, opts);
  const auto path = c.get<std::string>("out", "code.alist");
  save_alist(code.H(), path);
  out << "n=" << code.n() << " m=" << code.m() << " k=" << code.k() << " rate=" << fmt(code.rate())
      << " four_cycles=" << code.H().count_four_cycles() << "\n";
  out << "wrote " << path << "\n";
  return 0;
}

SimConfig sim_config(const Config& c) {
  SimConfig s;
  s.users = c.get<int>("users", 1);
  if (c.has("ebn0_db")) {
    if (c.has("ebn0_start") || c.has("ebn0_stop")) throw UsageError("give either 'ebn0_db' or a start/stop sweep");
    s.ebn0_db = c.value<std::vector<double>>("ebn0_db");
  } else if (c.has("ebn0_start")) {
    s.ebn0_db = ebn0_sweep(c.value<double>("ebn0_start"), c.value<double>("ebn0_stop"), c.get<double>("ebn0_step", 0.5));
  } else {
    throw UsageError("an Eb/N0 sweep is required ('ebn0_db' or 'ebn0_start'/'ebn0_stop')");
  }
  s.frames = c.get<int>("frames", s.frames);
  s.stop_after_errors = c.get<int>("stop_after_errors", s.stop_after_errors);
  s.schedule.outer = c.get<int>("outer_iterations", s.schedule.outer);
  s.schedule.inner = c.get<int>("inner_iterations", s.schedule.inner);
  s.transmitted = c.get<std::size_t>("transmitted", 0);
  s.threads = c.get<int>("threads", 1);
  s.seed = c.get<std::uint64_t>("seed", 1);
  return s;
}

int run_sim(const LiftedCode& code, const SimConfig& s, const Config& c, std::ostream& out) {
  const auto points = run_fer_sweep(code, s);
  const auto path = c.get<std::string>("out", "fer.csv");
  write_fer_csv(path, points);
  out << "code n=" << code.n() << " k=" << code.k() << " users=" << s.users << " mode=" << to_string(s.mode) << "\n";
  out << fer_csv(points);
  out << "wrote " << path << "\n";
  return 0;
}

int cmd_simulate(const Config& c, std::ostream& out) {
  const auto code = code_from(c);
  return run_sim(code, sim_config(c), c, out);
}

int cmd_spread_sim(const Config& c, std::ostream& out) {
  const auto code = code_from(c);
  auto s = sim_config(c);
  s.mode = parse_sim_mode(c.get<std::string>("mode", "spread"));
  if (s.mode == SimMode::interleaved) throw UsageError("spread-sim mode must be 'spread' or 'split'");
  s.groups = c.get<int>("groups", s.groups);
  s.chips = c.get<std::size_t>("chips", 0);
  if (s.mode == SimMode::spread) {
    if (c.has("signature")) {
      const auto path = c.resolve(c.value<std::string>("signature"));
      std::ifstream f(path);
      if (!f) throw UsageError("cannot read signature file '" + path + "'");
      std::stringstream buf;
      buf << f.rdbuf();
      s.signature = SpreadingSignature::from_json(buf.str());
      if (s.chips == 0) s.chips = s.signature->chips();
    } else {
      s.validate(code);
      s.signature = default_signature(code, s);
    }
    if (c.has("signature_out")) write_text(c.value<std::string>("signature_out"), s.signature->to_json() + "\n");
    out << "spreading degree " << s.signature->degree() << " over " << s.signature->chips() << " chips\n";
  }
  return run_sim(code, s, c, out);
}

int cmd_pexit(const Config& c, std::ostream& out) {
  const auto p = protograph_from(c, "protograph");
  const int users = c.get<int>("users", 1);
  const auto opts = pexit_options(c);
  Evolution ev;
  if (c.has("ebn0_db")) {
    const double e = c.value<double>("ebn0_db");
    ev = pexit_evolve(p, users, e, opts);
    out << "ebn0_db=" << fmt(e) << " converged=" << (ev.converged ? "true" : "false")
        << " iterations=" << ev.iterations << "\n";
  } else {
    const auto res = pexit_threshold(p, users, opts);
    ev = res.evolution;
    out << "threshold_db=" << fmt(res.ebn0_db) << "\n";
    out << "iterations=" << ev.iterations << " evaluations=" << res.evaluations << "\n";
  }
  const auto path = c.get<std::string>("out", "pexit_trajectory.csv");
  write_text(path, trajectory_csv(ev));
  out << "wrote " << path << "\n";
  return 0;
}

int cmd_optimize(const Config& c, std::ostream& out) {
  SearchConfig s;
  s.rows = c.get<std::size_t>("rows", s.rows);
  s.cols = c.get<std::size_t>("cols", s.cols);
  s.max_multiplicity = c.get<int>("max_multiplicity", s.max_multiplicity);
  s.users = c.get<int>("users", s.users);
  s.initial_temperature = c.get<double>("initial_temperature", s.initial_temperature);
  s.cooling = c.get<double>("cooling", s.cooling);
  s.steps = c.get<int>("steps", s.steps);
  s.chains = c.get<int>("chains", s.chains);
  s.seed = c.get<std::uint64_t>("seed", s.seed);
  if (c.has("start")) s.start = protograph_from(c, "start");
  s.pexit = pexit_options(c);

  const auto res = optimize_protograph(s);
  const auto path = c.get<std::string>("out", "optimized.proto");
  const auto log_path = c.get<std::string>("log", path + ".log.json");
  write_text(path, res.best.to_text());

  json log;
  log["best"] = rows_json(res.best.entries(), s.rows, s.cols);
  log["threshold_db"] = res.threshold_db;
  log["users"] = s.users;
  log["seed"] = s.seed;
  log["evaluations"] = res.evaluations;
  log["steps"] = json::array();
  for (const auto& st : res.log) {
    log["steps"].push_back({{"chain", st.chain},
                            {"step", st.step},
                            {"candidate", rows_json(st.candidate, s.rows, s.cols)},
                            {"threshold_db", st.threshold ? json(*st.threshold) : json(nullptr)},
                            {"accepted", st.accepted},
                            {"cached", st.cached},
                            {"temperature", st.temperature},
                            {"current_db", finite_or_null(st.current)},
                            {"best_db", finite_or_null(st.best)}});
  }
  write_text(log_path, log.dump(2) + "\n");

  out << "threshold_db=" << fmt(res.threshold_db) << "\n";
  out << res.best.to_text();
  out << "evaluations=" << res.evaluations << "\n";
  out << "wrote " << path << " and " << log_path << "\n";
  return 0;
}

struct Command {
  std::string name;
  std::string summary;
  KeyList keys;
  int (*run)(const Config&, std::ostream&);
  std::string seed_key;  ///< config key that --seed overrides
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  const std::vector<Command> commands = {
      {"lift", "Lift a protograph to a parity-check matrix and write it as alist", concat({&kCodeKeys, &kLiftKeys}),
       cmd_lift, "lift_seed"},
      {"simulate", "Monte-Carlo FER sweep of joint decoding with interleaved users", concat({&kCodeKeys, &kSimKeys}),
       cmd_simulate, "seed"},
      {"pexit", "PEXIT threshold search or a single evolution", kPexitKeys, cmd_pexit, "seed"},
      {"optimize", "Simulated-annealing protograph search", kOptimizeKeys, cmd_optimize, "seed"},
      {"spread-sim", "FER sweep with sparse spreading or slot splitting",
       concat({&kCodeKeys, &kSimKeys, &kSpreadKeys}), cmd_spread_sim, "seed"},
  };

  CLI::App app{"LDPC coding for the Gaussian multiple access channel"};
  app.require_subcommand(1);
  struct Flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
  };
  std::vector<Flags> flags(commands.size());
  std::vector<CLI::App*> subs;
  for (std::size_t i = 0; i < commands.size(); ++i) {
    auto* sub = app.add_subcommand(commands[i].name, commands[i].summary);
    sub->add_option("--config", flags[i].config, "JSON config file")->required();
    sub->add_option("--seed", flags[i].seed, "override the '" + commands[i].seed_key + "' key");
    sub->add_option("--out", flags[i].out, "override the 'out' key");
    sub->footer(describe(commands[i].keys));
    subs.push_back(sub);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    if (code == 0) return 0;
    err << "valid subcommands:";
    for (const auto& c : commands) err << " " << c.name;
    err << "\n";
    return 1;
  }

  for (std::size_t i = 0; i < commands.size(); ++i) {
    if (!subs[i]->parsed()) continue;
    try {
      Config cfg(flags[i].config, commands[i].keys);
      if (flags[i].seed) cfg.set(commands[i].seed_key, *flags[i].seed);
      if (flags[i].out) cfg.set("out", *flags[i].out);
      return commands[i].run(cfg, out);
    } catch (const UsageError& e) {
      err << commands[i].name << ": " << e.what() << "\n";
      return 1;
    } catch (const std::invalid_argument& e) {
      err << commands[i].name << ": invalid configuration: " << e.what() << "\n";
      return 1;
    } catch (const std::exception& e) {
      err << commands[i].name << ": error: " << e.what() << "\n";
      return 2;
    }
  }
  return 1;
}

}  // namespace gmacldpc::cli
