#include "nac/config.hpp"

#include "nac/csv.hpp"
#include "nac/fixtures.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace nac {

ParseError::ParseError(const std::string& field, int line, const std::string& what)
    : std::runtime_error((line > 0 ? "line " + std::to_string(line) + ": " : std::string()) +
                         (field.empty() ? std::string() : "field '" + field + "': ") + what),
      field_(field),
      line_(line) {}

namespace {

const std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::simulate, "simulate"},       {ExperimentKind::ode, "ode"},
    {ExperimentKind::compare, "compare"},         {ExperimentKind::kernel, "kernel"},
    {ExperimentKind::poisson_check, "poisson-check"}, {ExperimentKind::gradcheck, "gradcheck"},
    {ExperimentKind::fluctuation_sweep, "fluctuation-sweep"},
};

int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

template <class T>
T as(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ParseError(field, line_of(node), "cannot read value '" + YAML::Dump(node) + "'");
  }
}

template <class T>
std::vector<T> as_list(const YAML::Node& node, const std::string& field) {
  if (node.IsScalar()) return {as<T>(node, field)};
  if (!node.IsSequence()) throw ParseError(field, line_of(node), "expected a list");
  std::vector<T> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(as<T>(node[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<double>> as_table(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ParseError(field, line_of(node), "expected a list of rows");
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < node.size(); ++i)
    out.push_back(as_list<double>(node[i], field + "[" + std::to_string(i) + "]"));
  return out;
}

void reject_unknown(const YAML::Node& map, const std::set<std::string>& known, const std::string& prefix) {
  for (const auto& kv : map) {
    const auto key = kv.first.as<std::string>();
    if (!known.count(key)) throw ParseError(prefix + key, line_of(kv.first), "unknown field");
  }
}

MdpSpec parse_mdp(const YAML::Node& node) {
  MdpSpec spec;
  if (node.IsScalar()) {
    spec.fixture = as<std::string>(node, "mdp");
    return spec;
  }
  if (!node.IsMap()) throw ParseError("mdp", line_of(node), "expected a fixture name or a table");
  reject_unknown(node, {"fixture", "n_states", "n_actions", "transition", "reward", "gamma", "rho0"}, "mdp.");
  if (node["fixture"]) spec.fixture = as<std::string>(node["fixture"], "mdp.fixture");
  if (node["gamma"]) spec.gamma = as<double>(node["gamma"], "mdp.gamma");
  if (node["rho0"]) spec.rho0 = as_list<double>(node["rho0"], "mdp.rho0");
  if (!spec.fixture.empty()) {
    for (const char* k : {"n_states", "n_actions", "transition", "reward"})
      if (node[k]) throw ParseError(std::string("mdp.") + k, line_of(node[k]), "not allowed together with a fixture");
    return spec;
  }
  for (const char* k : {"n_states", "n_actions", "transition", "reward", "gamma"})
    if (!node[k]) throw ParseError(std::string("mdp.") + k, line_of(node), "required for an inline MDP");
  spec.n_states = as<int>(node["n_states"], "mdp.n_states");
  spec.n_actions = as<int>(node["n_actions"], "mdp.n_actions");
  const YAML::Node tr = node["transition"];
  if (!tr.IsSequence()) throw ParseError("mdp.transition", line_of(tr), "expected transition[x][a][x']");
  for (std::size_t x = 0; x < tr.size(); ++x)
    spec.transition.push_back(as_table(tr[x], "mdp.transition[" + std::to_string(x) + "]"));
  spec.reward = as_table(node["reward"], "mdp.reward");
  return spec;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  return "unknown";
}

ExperimentKind parse_kind(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (name == n) return k;
  throw ValidationError("unknown experiment kind '" + name + "'");
}

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError("", e.mark.line + 1, e.msg);
  }
  if (!root.IsMap()) throw ParseError("", line_of(root), "top level must be a table");
  reject_unknown(root,
                 {"kind", "mdp", "embedding", "n_hidden", "seeds", "horizon_T", "alpha", "dt", "t_end",
                  "record_every", "diagnostics_period", "drift_time", "track_fluctuations", "zero_critic_outer",
                  "zero_actor_outer", "mc_samples", "kernel_seed", "kernel_file", "ode_init",
                  "verify_step_halving", "etas", "n_max", "poisson_policy", "n_instances", "fd_step",
                  "output_dir"},
                 "");

  ExperimentConfig cfg;
  if (!root["mdp"]) throw ParseError("mdp", 0, "required");
  cfg.mdp = parse_mdp(root["mdp"]);
  if (auto n = root["kind"]) cfg.kind = parse_kind(as<std::string>(n, "kind"));
  if (auto n = root["embedding"]) {
    if (!(n.IsScalar() && n.as<std::string>() == "default")) cfg.embedding = as_table(n, "embedding");
  }
  if (auto n = root["n_hidden"]) cfg.n_hidden = as_list<int>(n, "n_hidden");
  if (auto n = root["seeds"]) {
    if (n.IsMap()) {
      reject_unknown(n, {"start", "count"}, "seeds.");
      const auto start = as<std::uint64_t>(n["start"], "seeds.start");
      const auto count = as<int>(n["count"], "seeds.count");
      cfg.seeds.clear();
      for (int i = 0; i < count; ++i) cfg.seeds.push_back(start + static_cast<std::uint64_t>(i));
    } else {
      cfg.seeds = as_list<std::uint64_t>(n, "seeds");
    }
  }
  auto read = [&root](const char* key, auto& target) {
    if (auto n = root[key]) target = as<std::decay_t<decltype(target)>>(n, key);
  };
  read("horizon_T", cfg.horizon_T);
  read("alpha", cfg.alpha);
  read("dt", cfg.dt);
  read("t_end", cfg.t_end);
  read("record_every", cfg.record_every);
  read("diagnostics_period", cfg.diagnostics_period);
  read("drift_time", cfg.drift_time);
  read("track_fluctuations", cfg.track_fluctuations);
  read("zero_critic_outer", cfg.zero_critic_outer);
  read("zero_actor_outer", cfg.zero_actor_outer);
  if (auto n = root["mc_samples"]) {
    // accept 1e6 style as well as integers
    const double v = as<double>(n, "mc_samples");
    if (v != std::floor(v)) throw ParseError("mc_samples", line_of(n), "must be an integer");
    cfg.mc_samples = static_cast<long long>(v);
  }
  read("kernel_seed", cfg.kernel_seed);
  read("kernel_file", cfg.kernel_file);
  if (auto n = root["ode_init"]) {
    const auto s = as<std::string>(n, "ode_init");
    if (s == "coupled") cfg.ode_init = OdeInit::coupled;
    else if (s == "gaussian") cfg.ode_init = OdeInit::gaussian;
    else if (s == "zero") cfg.ode_init = OdeInit::zero;
    else throw ParseError("ode_init", line_of(n), "expected coupled, gaussian or zero");
  }
  read("verify_step_halving", cfg.verify_step_halving);
  if (auto n = root["etas"]) cfg.etas = as_list<double>(n, "etas");
  read("n_max", cfg.n_max);
  read("poisson_policy", cfg.poisson_policy);
  read("n_instances", cfg.n_instances);
  read("fd_step", cfg.fd_step);
  read("output_dir", cfg.output_dir);

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("", 0, "cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ValidationError(msg); };
  if (n_hidden.empty()) fail("n_hidden must be a nonempty list");
  for (int n : n_hidden)
    if (n < 1) fail("n_hidden entries must be >= 1");
  if (seeds.empty()) fail("seeds must be a nonempty list");
  if (!(horizon_T > 0.0)) fail("horizon_T must be > 0");
  if (!(alpha >= 0.0)) fail("alpha must be >= 0");
  if (!(dt > 0.0 && dt <= 0.1)) fail("dt must lie in (0, 0.1]");
  if (!(t_end >= 0.0)) fail("t_end must be >= 0");
  if (!(record_every > 0.0)) fail("record_every must be > 0");
  if (std::abs(record_every / dt - std::round(record_every / dt)) > 1e-6)
    fail("record_every must be a multiple of dt");
  if (diagnostics_period < 0) fail("diagnostics_period must be >= 0");
  if (!(drift_time >= 0.0)) fail("drift_time must be >= 0");
  if (mc_samples < 10'000) fail("mc_samples must be >= 10000");
  for (double e : etas)
    if (!(e > 0.0 && e <= 1.0)) fail("etas entries must lie in (0, 1]");
  if (n_max < 1) fail("n_max must be >= 1");
  if (poisson_policy != "uniform" && poisson_policy != "first_action" && poisson_policy != "last_action")
    fail("poisson_policy must be uniform, first_action or last_action");
  if (n_instances < 1) fail("n_instances must be >= 1");
  if (!(fd_step > 0.0)) fail("fd_step must be > 0");

  if (mdp.gamma && !(*mdp.gamma > 0.0 && *mdp.gamma < 1.0))
    fail("mdp.gamma = " + format_double(*mdp.gamma) + " outside the discount range (0, 1)");
  if (!mdp.fixture.empty()) {
    const auto names = fixture_names();
    if (std::find(names.begin(), names.end(), mdp.fixture) == names.end())
      fail("mdp.fixture '" + mdp.fixture + "' does not exist");
  } else {
    if (mdp.n_states < 1 || mdp.n_actions < 1) fail("mdp.n_states and mdp.n_actions must be >= 1");
    if (static_cast<int>(mdp.transition.size()) != mdp.n_states)
      fail("mdp.transition must have n_states entries");
    for (int x = 0; x < mdp.n_states; ++x) {
      if (static_cast<int>(mdp.transition[x].size()) != mdp.n_actions)
        fail("mdp.transition[" + std::to_string(x) + "] must have n_actions rows");
      for (int a = 0; a < mdp.n_actions; ++a) {
        const auto& row = mdp.transition[x][a];
        const std::string name = "mdp.transition[" + std::to_string(x) + "][" + std::to_string(a) + "]";
        if (static_cast<int>(row.size()) != mdp.n_states) fail(name + " must have n_states entries");
        double sum = 0.0;
        for (double v : row) {
          if (!(v >= 0.0)) fail(name + " has a negative entry");
          sum += v;
        }
        if (std::abs(sum - 1.0) > 1e-12) fail(name + " sums to " + format_double(sum) + ", not 1");
      }
    }
    if (static_cast<int>(mdp.reward.size()) != mdp.n_states) fail("mdp.reward must have n_states rows");
    for (int x = 0; x < mdp.n_states; ++x) {
      if (static_cast<int>(mdp.reward[x].size()) != mdp.n_actions)
        fail("mdp.reward[" + std::to_string(x) + "] must have n_actions entries");
      for (double v : mdp.reward[x])
        if (!(v >= -1.0 && v <= 1.0)) fail("mdp.reward[" + std::to_string(x) + "] has an entry outside [-1, 1]");
    }
  }
  // remaining MDP and embedding invariants are checked by construction
  const FiniteMdp m = build_mdp();
  build_embedding(m);
}

FiniteMdp ExperimentConfig::build_mdp() const {
  try {
    FiniteMdp base = [&] {
      if (!mdp.fixture.empty()) return fixture(mdp.fixture);
      const int ns = mdp.n_states, na = mdp.n_actions;
      Matrix next(ns * na, ns), reward(ns, na);
      for (int x = 0; x < ns; ++x)
        for (int a = 0; a < na; ++a) {
          reward(x, a) = mdp.reward[x][a];
          for (int y = 0; y < ns; ++y) next(x * na + a, y) = mdp.transition[x][a][y];
        }
      return FiniteMdp::from_pair_table(ns, na, next, reward, *mdp.gamma,
                                        Vector::Constant(ns * na, 1.0 / (ns * na)));
    }();
    if (!mdp.gamma && mdp.rho0.empty()) return base;
    Vector rho0 = base.rho0();
    if (!mdp.rho0.empty()) {
      if (static_cast<int>(mdp.rho0.size()) != base.n_pairs())
        throw ValidationError("mdp.rho0 must have one entry per state-action pair");
      rho0 = Eigen::Map<const Vector>(mdp.rho0.data(), static_cast<Eigen::Index>(mdp.rho0.size()));
    }
    return FiniteMdp::from_pair_table(base.n_states(), base.n_actions(), base.next_state_probs(),
                                      base.reward_table(), mdp.gamma.value_or(base.gamma()), rho0);
  } catch (const InvalidMdp& e) {
    throw ValidationError(std::string("mdp: ") + e.what());
  }
}

Embedding ExperimentConfig::build_embedding(const FiniteMdp& m) const {
  if (embedding.empty()) return default_embedding(m);
  if (static_cast<int>(embedding.size()) != m.n_pairs())
    throw ValidationError("embedding must have one row per state-action pair");
  const std::size_t d = embedding.front().size();
  Matrix v(m.n_pairs(), static_cast<Eigen::Index>(d));
  for (int i = 0; i < m.n_pairs(); ++i) {
    if (embedding[i].size() != d) throw ValidationError("embedding rows must have equal length");
    for (std::size_t j = 0; j < d; ++j) v(i, static_cast<Eigen::Index>(j)) = embedding[i][j];
  }
  try {
    return Embedding(v);
  } catch (const std::invalid_argument& e) {
    throw ValidationError(std::string("embedding: ") + e.what());
  }
}

std::string ExperimentConfig::canonical() const {
  std::ostringstream os;
  auto list = [&os](const auto& xs) {
    os << '[';
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) os << ',';
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(xs[i])>>)
        os << format_double(xs[i]);
      else
        os << xs[i];
    }
    os << ']';
  };
  os << "kind=" << (kind ? to_string(*kind) : "") << '\n';
  os << "mdp.fixture=" << mdp.fixture << '\n';
  os << "mdp.n_states=" << mdp.n_states << "\nmdp.n_actions=" << mdp.n_actions << '\n';
  os << "mdp.transition=";
  for (const auto& x : mdp.transition)
    for (const auto& row : x) list(row);
  os << "\nmdp.reward=";
  for (const auto& row : mdp.reward) list(row);
  os << "\nmdp.gamma=" << (mdp.gamma ? format_double(*mdp.gamma) : "") << "\nmdp.rho0=";
  list(mdp.rho0);
  os << "\nembedding=";
  for (const auto& row : embedding) list(row);
  os << "\nn_hidden=";
  list(n_hidden);
  os << "\nseeds=";
  list(seeds);
  os << "\nhorizon_T=" << format_double(horizon_T) << "\nalpha=" << format_double(alpha)
     << "\ndt=" << format_double(dt) << "\nt_end=" << format_double(t_end)
     << "\nrecord_every=" << format_double(record_every) << "\ndiagnostics_period=" << diagnostics_period
     << "\ndrift_time=" << format_double(drift_time)
     << "\ntrack_fluctuations=" << track_fluctuations << "\nzero_critic_outer=" << zero_critic_outer
     << "\nzero_actor_outer=" << zero_actor_outer << "\nmc_samples=" << mc_samples
     << "\nkernel_seed=" << kernel_seed << "\nkernel_file=" << kernel_file
     << "\node_init=" << static_cast<int>(ode_init) << "\nverify_step_halving=" << verify_step_halving
     << "\netas=";
  list(etas);
  os << "\nn_max=" << n_max << "\npoisson_policy=" << poisson_policy << "\nn_instances=" << n_instances
     << "\nfd_step=" << format_double(fd_step) << "\noutput_dir=" << output_dir << '\n';
  return os.str();
}

std::uint64_t fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string config_hash(const ExperimentConfig& cfg) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(cfg.canonical())));
  return buf;
}

}  // namespace nac
