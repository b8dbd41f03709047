// Copyright 2026 The fedcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "fedcert/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <regex>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "fedcert/rng.hpp"

namespace fedcert {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Locates keys in the raw configuration text so errors can cite a line.
class Source {
 public:
  Source(std::string text, fs::path path) : text_(std::move(text)), path_(std::move(path)) {}

  [[noreturn]] void fail(const std::string& key_path, const std::string& message) const {
    throw ConfigError(fmt::format("{}:{}: {}: {}", path_.string(), line_of(key_path), key_path, message));
  }

  std::size_t line_at(std::size_t offset) const {
    offset = std::min(offset, text_.size());
    return 1 + static_cast<std::size_t>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
  }

  // Line of the last component of a dotted path such as "bounds[1].delta".
  std::size_t line_of(const std::string& key_path) const {
    std::size_t pos = 0;
    std::stringstream ss(key_path);
    std::string part;
    while (std::getline(ss, part, '.')) {
      const auto bracket = part.find('[');
      const std::string key = part.substr(0, bracket);
      if (key.empty()) continue;
      const auto p = text_.find("\"" + key + "\"", pos);
      if (p != std::string::npos) pos = p;
    }
    return line_at(pos);
  }

  const fs::path& path() const { return path_; }

 private:
  std::string text_;
  fs::path path_;
};

template <class T>
T read(const Source& src, const json& obj, const std::string& key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    src.fail(where + key, std::string("wrong type (") + e.what() + ")");
  }
}

template <class T>
T require(const Source& src, const json& obj, const std::string& key, const std::string& where) {
  if (!obj.contains(key)) src.fail(where + key, "required key is missing");
  return read<T>(src, obj, key, where, T{});
}

std::size_t read_count(const Source& src, const json& obj, const std::string& key, const std::string& where,
                       std::size_t fallback, std::size_t minimum) {
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) src.fail(where + key, "must be an integer");
  const auto x = v.get<long long>();
  if (x < static_cast<long long>(minimum)) src.fail(where + key, fmt::format("must be >= {}", minimum));
  return static_cast<std::size_t>(x);
}

// Rejects keys outside `allowed` so that a misspelled option fails loudly.
void check_keys(const Source& src, const json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) return;
  for (const auto& [key, _] : j.items())
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }))
      src.fail(where.empty() ? key : where + "." + key, "unknown key");
}

Vec read_grid(const Source& src, const json& j, const std::string& where) {
  if (j.is_array()) {
    Vec g;
    for (const auto& v : j) {
      if (!v.is_number()) src.fail(where, "lambda grid entries must be numbers");
      g.push_back(v.get<double>());
    }
    if (g.empty()) src.fail(where, "lambda grid must be nonempty");
    return g;
  }
  if (!j.is_object()) src.fail(where, "lambda grid must be an array or {from, to, points}");
  const double lo = read<double>(src, j, "from", where + ".", 0.0);
  const double hi = read<double>(src, j, "to", where + ".", 1.0);
  const std::size_t pts = read_count(src, j, "points", where + ".", 51, 1);
  check_keys(src, j, where, {"from", "to", "points"});
  if (!(hi >= lo)) src.fail(where, "'to' must be >= 'from'");
  return linspace(lo, hi, pts);
}

TargetShift read_shift(const Source& src, const json& j, const std::string& where, CostKind default_cost,
                       std::size_t classes) {
  TargetShift s;
  s.cost = default_cost;
  if (!j.is_object()) src.fail(where, "shift must be an object");
  check_keys(src, j, where, {"kind", "cost", "amount", "directions"});
  try {
    s.kind = parse_shift_kind(read<std::string>(src, j, "kind", where + ".", "none"));
    if (j.contains("cost")) s.cost = parse_cost_kind(j.at("cost").get<std::string>());
  } catch (const std::invalid_argument& e) {
    src.fail(where + ".kind", e.what());
  }
  s.amount = read<double>(src, j, "amount", where + ".", -1.0);
  if (j.contains("directions")) {
    s.directions = read<Mat>(src, j, "directions", where + ".", {});
    if (s.directions.size() != classes) src.fail(where + ".directions", "need one direction per class");
  }
  if (s.kind == ShiftKind::kWass && s.directions.empty()) src.fail(where + ".directions", "required for a wass shift");
  return s;
}

BoundSpec read_bound(const Source& src, const json& j, const std::string& where, CostKind cost, std::size_t classes) {
  if (!j.is_object()) src.fail(where, "each bound request must be an object");
  check_keys(src, j, where,
             {"name", "kind", "delta", "epsilon", "divergence", "lambda_grid", "slack_mode", "cdf_constant",
              "include_alpha", "Delta", "grid_size", "c1", "c2", "envelope", "shift"});
  BoundSpec b;
  auto& r = b.request;
  r.name = require<std::string>(src, j, "name", where + ".");
  if (!std::regex_match(r.name, std::regex("[A-Za-z0-9_-]+")))
    src.fail(where + ".name", "names may only contain letters, digits, '-' and '_'");
  try {
    r.kind = parse_bound_kind(require<std::string>(src, j, "kind", where + "."));
  } catch (const std::invalid_argument& e) {
    src.fail(where + ".kind", e.what());
  }
  r.delta = read<double>(src, j, "delta", where + ".", 0.1);
  if (!(r.delta > 0.0 && r.delta < 1.0)) src.fail(where + ".delta", "must lie in (0, 1)");
  r.epsilon = read<double>(src, j, "epsilon", where + ".", 0.0);
  if (!(r.epsilon >= 0.0) || !std::isfinite(r.epsilon)) src.fail(where + ".epsilon", "must be >= 0");
  try {
    r.divergence = parse_divergence_kind(read<std::string>(src, j, "divergence", where + ".", "kl"));
  } catch (const std::invalid_argument& e) {
    src.fail(where + ".divergence", e.what());
  }
  r.lambda_grid = j.contains("lambda_grid") ? read_grid(src, j.at("lambda_grid"), where + ".lambda_grid")
                                            : linspace(0.0, 1.0, 51);
  const std::string slack = read<std::string>(src, j, "slack_mode", where + ".", "full");
  if (slack != "full" && slack != "zero") src.fail(where + ".slack_mode", "must be 'full' or 'zero'");
  r.fdiv.slack = r.wass.slack = slack == "full" ? SlackMode::kFull : SlackMode::kZero;
  r.fdiv.cdf_constant = read<double>(src, j, "cdf_constant", where + ".", 1.0);
  if (!(r.fdiv.cdf_constant >= 0.0)) src.fail(where + ".cdf_constant", "must be >= 0");
  r.fdiv.include_alpha = read<bool>(src, j, "include_alpha", where + ".", false);
  r.wass.Delta = read<double>(src, j, "Delta", where + ".", 1e-3);
  if (!(r.wass.Delta > 0.0)) src.fail(where + ".Delta", "must be > 0");
  r.wass.grid_size = read_count(src, j, "grid_size", where + ".", 16, 2);
  r.wass.c1 = read<double>(src, j, "c1", where + ".", r.wass.c1);
  r.wass.c2 = read<double>(src, j, "c2", where + ".", r.wass.c2);
  if (!(r.wass.c1 >= 0.0) || !(r.wass.c2 >= 0.0)) src.fail(where + ".c1", "constants must be >= 0");
  const std::string env = read<std::string>(src, j, "envelope", where + ".", "sound-outer");
  if (env != "sound-outer" && env != "sample-hull") src.fail(where + ".envelope", "must be 'sound-outer' or 'sample-hull'");
  r.wass.envelope = env == "sound-outer" ? EnvelopeMode::kSoundOuter : EnvelopeMode::kSampleHull;
  if (r.kind == BoundKind::kWassMean && r.wass.slack == SlackMode::kFull && !(r.epsilon > 0.0))
    src.fail(where + ".epsilon", "a wass-mean bound needs epsilon > 0");
  if (j.contains("shift")) b.shift = read_shift(src, j.at("shift"), where + ".shift", cost, classes);
  const bool fdiv = r.kind == BoundKind::kFdivMean || r.kind == BoundKind::kFdivCdf;
  if ((b.shift.kind == ShiftKind::kFdiv && !fdiv) || (b.shift.kind == ShiftKind::kWass && r.kind != BoundKind::kWassMean))
    src.fail(where + ".shift", fmt::format("a {} shift cannot be certified by a {} bound", to_string(b.shift.kind),
                                           to_string(r.kind)));
  if (b.shift.amount > r.epsilon + 1e-12) src.fail(where + ".shift", "shift amount exceeds the bound's epsilon");
  if (b.shift.kind == ShiftKind::kWass && b.shift.cost != cost)
    src.fail(where + ".shift", "attack cost must match the transport cost used for queries");
  return b;
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MetaConfig seeded_world(const ExperimentConfig& cfg) {
  MetaConfig w = cfg.world;
  w.seed = cfg.seed;
  return w;
}

// Source network read from fixed CSV pools, one client per file.
World pool_world(const ExperimentConfig& cfg) {
  World w;
  w.config = seeded_world(cfg);
  for (std::size_t k = 0; k < cfg.pools.size(); ++k) {
    LocalDataset d = read_dataset_csv(cfg.pools[k], k);
    for (const auto& z : d.samples)
      if (z.x.size() != cfg.world.dim)
        throw ConfigError(fmt::format("{}:1: pool has {} features, world.dim is {}", cfg.pools[k].string(),
                                      z.x.size(), cfg.world.dim));
    ClientSpec c;
    c.id = k;
    w.clients.push_back(std::move(c));
    w.datasets.push_back(std::move(d));
  }
  return w;
}

// Identifies the source data: the world configuration, plus file contents
// when the clients come from pools.
std::string source_digest(const ExperimentConfig& cfg) {
  const json world = seeded_world(cfg).to_json();
  if (cfg.pools.empty()) return json_digest(world);
  json files = json::array();
  for (const auto& p : cfg.pools) files.push_back(json_digest(json(read_text(p))));
  return json_digest({{"world", world}, {"pools", files}});
}

std::vector<LocalDataset> load_datasets(const ExperimentConfig& cfg, const RunOptions& options) {
  if (!cfg.pools.empty()) return pool_world(cfg).datasets;
  if (cfg.world_dir) return import_world(*cfg.world_dir).datasets;
  const fs::path stored = cfg.output_dir / "world";
  const MetaConfig world = seeded_world(cfg);
  if (fs::exists(stored / "manifest.json")) {
    World w = import_world(stored);
    if (w.config.to_json() == world.to_json() && w.datasets.size() == cfg.clients) return std::move(w.datasets);
    if (!options.quiet) fmt::print(stderr, "note: {} does not match the configuration; regenerating\n", stored.string());
  }
  return make_world(world, cfg.clients, cfg.samples, options.jobs).datasets;
}

std::string kind_label(const BoundRequest& r) {
  if (r.kind == BoundKind::kFdivMean || r.kind == BoundKind::kFdivCdf)
    return to_string(r.kind) + "/" + to_string(r.divergence);
  return to_string(r.kind);
}

CoverageSpec coverage_spec(const ExperimentConfig& cfg, const BoundSpec& b, const RunOptions& options) {
  CoverageSpec s;
  s.world = seeded_world(cfg);
  s.model = cfg.model;
  s.loss = cfg.loss;
  s.bound = b.request;
  s.shift = b.shift;
  s.clients = cfg.clients;
  s.samples = cfg.samples;
  s.target_clients = cfg.verify.target_clients;
  s.trials = cfg.verify.trials;
  s.max_queries = cfg.max_queries;
  s.query_cost = cfg.cost;
  s.risk_samples = cfg.risk_samples;
  s.seed = derive_seed(cfg.seed, stream::kTrial, 0);
  s.jobs = options.jobs;
  return s;
}

std::vector<std::pair<double, double>> read_pairs(const fs::path& path) {
  std::vector<std::pair<double, double>> rows;
  std::stringstream ss(read_text(path));
  std::string line;
  std::getline(ss, line);  // header
  std::size_t line_no = 1;
  while (std::getline(ss, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    double a = 0.0, b = 0.0;
    const auto r1 = std::from_chars(line.data(), line.data() + comma, a);
    const auto r2 = comma == std::string::npos
                        ? std::from_chars_result{nullptr, std::errc::invalid_argument}
                        : std::from_chars(line.data() + comma + 1, line.data() + line.size(), b);
    if (r1.ec != std::errc() || r2.ec != std::errc())
      throw std::runtime_error(fmt::format("{}:{}: malformed row", path.string(), line_no));
    rows.emplace_back(a, b);
  }
  return rows;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text, const fs::path& source) {
  const Source src(text, source);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("{}:{}: {}", source.string(), src.line_at(e.byte == 0 ? 0 : e.byte - 1), e.what()));
  }
  if (!j.is_object()) src.fail("", "configuration must be a JSON object");
  static const std::set<std::string> known = {"seed",   "world",     "world_dir", "pools",  "model",  "model_path",
                                              "loss",   "clients",   "transport_cost", "bounds", "target",
                                              "verify", "output_dir"};
  for (const auto& [key, _] : j.items())
    if (!known.count(key)) src.fail(key, "unknown key");

  ExperimentConfig cfg;
  cfg.source = source;
  const fs::path base = source.has_parent_path() ? source.parent_path() : fs::path(".");
  if (j.contains("seed") && !j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
    src.fail("seed", "must be a nonnegative integer");
  cfg.seed = read<std::uint64_t>(src, j, "seed", "", 0);

  if (!j.contains("world")) src.fail("world", "required key is missing");
  check_keys(src, j.at("world"), "world",
             {"dim", "classes", "class_means", "noise_std", "sigma_A", "sigma_b", "dirichlet_alpha", "mode",
              "archetypes"});
  if (j.at("world").contains("archetypes") && j.at("world").at("archetypes").is_array())
    for (const auto& a : j.at("world").at("archetypes"))
      check_keys(src, a, "world.archetypes", {"weight", "score", "offset", "proportions", "class_shift"});
  try {
    json w = j.at("world");
    w["seed"] = cfg.seed;
    cfg.world = MetaConfig::from_json(w);
  } catch (const std::exception& e) {
    src.fail("world", e.what());
  }
  if (j.contains("world_dir")) cfg.world_dir = base / read<std::string>(src, j, "world_dir", "", "");
  if (j.contains("pools")) {
    if (cfg.world_dir) src.fail("pools", "cannot be combined with world_dir");
    const json& pools = j.at("pools");
    if (!pools.is_array() || pools.empty()) src.fail("pools", "must be a nonempty array of CSV paths");
    for (std::size_t i = 0; i < pools.size(); ++i) {
      if (!pools[i].is_string()) src.fail("pools", fmt::format("entry {} is not a path", i));
      const fs::path p = base / pools[i].get<std::string>();
      if (!fs::exists(p)) src.fail("pools", "file not found: " + p.string());
      cfg.pools.push_back(p);
    }
  }

  try {
    if (j.contains("model")) {
      cfg.model = Hypothesis::from_json(j.at("model"));
    } else if (j.contains("model_path")) {
      const fs::path p = base / j.at("model_path").get<std::string>();
      if (!fs::exists(p)) src.fail("model_path", "file not found: " + p.string());
      cfg.model = Hypothesis::from_json(json::parse(read_text(p)));
    } else {
      src.fail("model", "either 'model' or 'model_path' is required");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    src.fail(j.contains("model") ? "model" : "model_path", e.what());
  }
  if (cfg.model.dim() != cfg.world.dim) src.fail("model", "model dimension does not match world.dim");

  try {
    cfg.loss.kind = parse_loss_kind(read<std::string>(src, j, "loss", "", "zero-one"));
    cfg.cost = parse_cost_kind(read<std::string>(src, j, "transport_cost", "", "half-squared-L2"));
  } catch (const std::invalid_argument& e) {
    src.fail(j.contains("loss") ? "loss" : "transport_cost", e.what());
  }

  if (!j.contains("clients") || !j.at("clients").is_object()) src.fail("clients", "object {K, n, max_queries} required");
  const json& cl = j.at("clients");
  check_keys(src, cl, "clients", {"K", "n", "max_queries"});
  if (!cl.contains("K")) src.fail("clients.K", "required key is missing");
  cfg.clients = read_count(src, cl, "K", "clients.", 0, 1);
  if (!cfg.pools.empty() && cfg.clients != cfg.pools.size())
    src.fail("clients.K", fmt::format("must equal the number of pools ({})", cfg.pools.size()));
  cfg.samples = read_count(src, cl, "n", "clients.", 50, 1);
  cfg.max_queries = read_count(src, cl, "max_queries", "clients.", 64, 1);

  if (!j.contains("bounds") || !j.at("bounds").is_array() || j.at("bounds").empty())
    src.fail("bounds", "a nonempty array of bound requests is required");
  std::set<std::string> names;
  for (std::size_t i = 0; i < j.at("bounds").size(); ++i) {
    const std::string where = fmt::format("bounds[{}]", i);
    BoundSpec b = read_bound(src, j.at("bounds")[i], where, cfg.cost, cfg.world.classes);
    if (!names.insert(b.request.name).second) src.fail(where + ".name", "duplicate bound name " + b.request.name);
    cfg.bounds.push_back(std::move(b));
  }

  if (j.contains("target")) {
    const json& t = j.at("target");
    check_keys(src, t, "target", {"clients", "risk_samples"});
    cfg.target_clients = read_count(src, t, "clients", "target.", 500, 1);
    cfg.risk_samples = read_count(src, t, "risk_samples", "target.", 20000, 1);
  }
  if (j.contains("verify")) {
    const json& v = j.at("verify");
    check_keys(src, v, "verify", {"trials", "target_clients", "coverage", "tightness"});
    cfg.verify.trials = read_count(src, v, "trials", "verify.", 20, 1);
    cfg.verify.target_clients = read_count(src, v, "target_clients", "verify.", 500, 1);
    cfg.verify.coverage = read<std::vector<std::string>>(src, v, "coverage", "verify.", {});
    for (const auto& name : cfg.verify.coverage)
      if (!names.count(name)) src.fail("verify.coverage", "unknown bound name " + name);
    if (v.contains("tightness")) {
      const json& t = v.at("tightness");
      check_keys(src, t, "verify.tightness", {"bound", "K", "n", "trials"});
      TightnessConfig tc;
      tc.bound = require<std::string>(src, t, "bound", "verify.tightness.");
      if (!names.count(tc.bound)) src.fail("verify.tightness.bound", "unknown bound name " + tc.bound);
      tc.K = require<std::vector<std::size_t>>(src, t, "K", "verify.tightness.");
      tc.n = require<std::vector<std::size_t>>(src, t, "n", "verify.tightness.");
      tc.trials = read_count(src, t, "trials", "verify.tightness.", 20, 1);
      if (tc.K.empty() || tc.K.size() != tc.n.size())
        src.fail("verify.tightness.K", "K and n schedules must be nonempty and of equal length");
      for (std::size_t i = 1; i < tc.K.size(); ++i)
        if (tc.K[i] <= tc.K[i - 1] || tc.n[i] < tc.n[i - 1]) src.fail("verify.tightness.K", "schedules must increase");
      for (const auto& b : cfg.bounds)
        if (b.request.name == tc.bound && b.request.is_curve())
          src.fail("verify.tightness.bound", "the tightness probe needs a mean bound");
      cfg.verify.tightness = tc;
    }
  }
  cfg.output_dir = read<std::string>(src, j, "output_dir", "", "out");
  return cfg;
}

ExperimentConfig load_config(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError(path.string() + ":1: configuration file not found");
  return parse_config(read_text(path), path);
}

ExperimentConfig apply_overrides(ExperimentConfig cfg, const RunOptions& options) {
  if (options.out) cfg.output_dir = *options.out;
  if (options.seed) {
    cfg.seed = *options.seed;
    cfg.world.seed = *options.seed;
  }
  if (options.trials) {
    cfg.verify.trials = *options.trials;
    if (cfg.verify.tightness) cfg.verify.tightness->trials = *options.trials;
  }
  return cfg;
}

int cmd_simulate(const ExperimentConfig& cfg, const RunOptions& options) {
  World w;
  if (!cfg.pools.empty()) {
    w = pool_world(cfg);
  } else if (cfg.world_dir) {
    w = import_world(*cfg.world_dir);
  } else {
    w = make_world(seeded_world(cfg), cfg.clients, cfg.samples, options.jobs);
  }
  const fs::path dir = cfg.output_dir / "world";
  export_world(w, dir);
  if (!options.quiet)
    fmt::print("simulate: {} clients x {} samples -> {}\n", w.clients.size(),
               w.datasets.empty() ? 0 : w.datasets.front().samples.size(), dir.string());
  return exit_code::kOk;
}

int cmd_certify(const ExperimentConfig& cfg, const RunOptions& options) {
  const MetaConfig world = seeded_world(cfg);
  InnerSolverOptions inner;
  inner.seed = derive_seed(cfg.seed, stream::kInnerSolver, 0);
  Network net(load_datasets(cfg, options), cfg.max_queries, TransportCost{cfg.cost}, inner);
  const std::string digest = source_digest(cfg);
  const fs::path out = cfg.output_dir;

  for (const auto& spec : cfg.bounds) {
    BoundRequest req = spec.request;
    req.fdiv.jobs = req.wass.jobs = options.jobs;
    BoundResult res;
    try {
      res = compute_bound(net, cfg.model, cfg.loss, req);
    } catch (const BudgetExceeded& e) {
      net.write_log(out / "query_log.jsonl");
      fmt::print(stderr, "certify: bound '{}': {}\n", req.name, e.what());
      return exit_code::kBudget;
    }
    json cert = {{"request", req.to_json()},
                 {"world_digest", digest},
                 {"rng", Rng::kName},
                 {"model", {{"kind", std::string(to_string(cfg.model.kind()))}, {"metadata", cfg.model.metadata()}}},
                 {"loss", std::string(to_string(cfg.loss.kind))},
                 {"loss_clipping", {0.0, 1.0}},
                 {"transport_cost", to_string(cfg.cost)}};
    cert["certificate"] = req.is_curve() ? res.curve.to_json() : res.mean.to_json();
    write_text(out / "certificates" / (req.name + ".json"), cert.dump(2) + "\n");
    if (req.is_curve()) write_text(out / "curves" / (req.name + ".csv"), res.curve.to_csv());

    const ResolvedShift shifted = resolve_shift(world, req, spec.shift);
    MetaConfig target = shifted.config;
    target.seed = derive_seed(cfg.seed, stream::kTarget, 0);
    const Vec risks = network_risks(target, cfg.target_clients, cfg.model, cfg.loss, cfg.risk_samples, options.jobs);
    const double mean = std::accumulate(risks.begin(), risks.end(), 0.0) / static_cast<double>(risks.size());
    json tj = {{"shift", to_string(spec.shift.kind)},
               {"achieved", shifted.achieved},
               {"within_budget", shifted.within_budget},
               {"clients", cfg.target_clients},
               {"mean", mean}};
    write_text(out / "targets" / (req.name + ".json"), tj.dump(2) + "\n");
    if (req.is_curve()) {
      std::string csv = "lambda,empirical\n";
      for (double lam : res.curve.lambda) csv += fmt::format("{},{}\n", lam, survival(risks, lam));
      write_text(out / "targets" / (req.name + ".csv"), csv);
    }
    if (!options.quiet) {
      if (req.is_curve())
        fmt::print("certify: {} ({}): curve over {} points, bound at lambda={} is {}\n", req.name, kind_label(req),
                   res.curve.lambda.size(), res.curve.lambda.front(), res.curve.bound.front());
      else
        fmt::print("certify: {} ({}): bound {} (program {}, slack {}), target mean {}\n", req.name, kind_label(req),
                   res.mean.value, res.mean.program_value, res.mean.slack_total(), mean);
    }
  }
  net.write_log(out / "query_log.jsonl");
  return exit_code::kOk;
}

int cmd_verify(const ExperimentConfig& cfg, const RunOptions& options) {
  const fs::path dir = cfg.output_dir / "verify";
  bool ok = true;
  json summary = {{"coverage", json::array()}};
  for (const auto& b : cfg.bounds) {
    const auto& names = cfg.verify.coverage;
    if (!names.empty() && std::find(names.begin(), names.end(), b.request.name) == names.end()) continue;
    const CoverageReport r = coverage_experiment(coverage_spec(cfg, b, options));
    write_text(dir / ("coverage_" + b.request.name + ".json"), r.to_json().dump(2) + "\n");
    if (b.request.is_curve()) write_text(dir / ("coverage_" + b.request.name + ".csv"), r.to_csv());
    summary["coverage"].push_back({{"name", r.name},
                                   {"violation_rate", r.violation_rate},
                                   {"max_lambda_rate", r.max_lambda_rate},
                                   {"threshold", r.threshold},
                                   {"passes", r.passes()}});
    ok = ok && r.passes();
    if (!options.quiet)
      fmt::print("verify: {} ({}): {} of {} trials violated (rate {}, per-lambda max {}, threshold {}) {}\n", r.name,
                 kind_label(b.request), r.violations, r.trials, r.violation_rate, r.max_lambda_rate, r.threshold,
                 r.passes() ? "PASS" : "FAIL");
  }
  if (cfg.verify.tightness) {
    const auto& tc = *cfg.verify.tightness;
    const auto it = std::find_if(cfg.bounds.begin(), cfg.bounds.end(),
                                 [&](const BoundSpec& b) { return b.request.name == tc.bound; });
    CoverageSpec spec = coverage_spec(cfg, *it, options);
    spec.trials = tc.trials;
    const TightnessReport t = tightness_probe(spec, tc.K, tc.n);
    write_text(dir / "tightness.json", t.to_json().dump(2) + "\n");
    write_text(dir / "tightness.csv", t.to_csv());
    summary["tightness"] = {{"bound", tc.bound},
                            {"strictly_decreasing", t.strictly_decreasing},
                            {"decreasing_within_noise", t.decreasing_within_noise}};
    if (!options.quiet)
      for (const auto& row : t.rows)
        fmt::print("verify: tightness K={} n={}: median gap {} (se {})\n", row.K, row.n, row.median_gap, row.se);
  }
  summary["passes"] = ok;
  write_text(dir / "summary.json", summary.dump(2) + "\n");
  return ok ? exit_code::kOk : exit_code::kVerification;
}

int cmd_emit_plots(const fs::path& results_dir, const RunOptions& options) {
  const fs::path certs = results_dir / "certificates";
  std::vector<fs::path> files;
  if (fs::is_directory(certs))
    for (const auto& e : fs::directory_iterator(certs))
      if (e.path().extension() == ".json") files.push_back(e.path());
  if (files.empty())
    throw ConfigError(fmt::format("{}:1: missing inputs: no certificates found in {}", results_dir.string(),
                                  certs.string()));
  std::sort(files.begin(), files.end());

  std::vector<std::string> missing;
  for (const auto& f : files) {
    const std::string name = f.stem().string();
    const json cert = json::parse(read_text(f));
    const bool curve = cert.at("request").at("kind") == "cdf" || cert.at("request").at("kind") == "fdiv-cdf";
    std::vector<fs::path> need = {results_dir / "targets" / (name + ".json")};
    if (curve) {
      need.push_back(results_dir / "curves" / (name + ".csv"));
      need.push_back(results_dir / "targets" / (name + ".csv"));
    }
    for (const auto& p : need)
      if (!fs::exists(p)) missing.push_back(p.string());
  }
  if (!missing.empty()) {
    std::string msg = "missing inputs:";
    for (const auto& m : missing) msg += "\n  " + m;
    throw ConfigError(fmt::format("{}:1: {}", results_dir.string(), msg));
  }

  bool dominated = true;
  std::string means = "name,kind,empirical_mean,bound\n";
  for (const auto& f : files) {
    const std::string name = f.stem().string();
    const json cert = json::parse(read_text(f));
    const json target = json::parse(read_text(results_dir / "targets" / (name + ".json")));
    const bool checked = target.at("within_budget").get<bool>();
    std::string kind = cert.at("request").at("kind").get<std::string>();
    if (cert.at("request").contains("divergence")) kind += "/" + cert.at("request").at("divergence").get<std::string>();
    if (kind.rfind("cdf", 0) == 0 || kind.rfind("fdiv-cdf", 0) == 0) {
      const auto bound = read_pairs(results_dir / "curves" / (name + ".csv"));
      const auto emp = read_pairs(results_dir / "targets" / (name + ".csv"));
      if (bound.size() != emp.size())
        throw std::runtime_error("emit-plots: curve and target grids differ for " + name);
      std::string csv = "lambda,empirical_cdf,bound,kind\n";
      for (std::size_t i = 0; i < bound.size(); ++i) {
        if (bound[i].first != emp[i].first) throw std::runtime_error("emit-plots: curve and target grids differ for " + name);
        csv += fmt::format("{},{},{},{}\n", bound[i].first, emp[i].second, bound[i].second, kind);
        if (checked && bound[i].second < emp[i].second - 1e-9) {
          dominated = false;
          fmt::print(stderr, "emit-plots: {}: bound {} below empirical {} at lambda={}\n", name, bound[i].second,
                     emp[i].second, bound[i].first);
        }
      }
      write_text(results_dir / "plots" / (name + ".csv"), csv);
    } else {
      const double b = cert.at("certificate").at("value").get<double>();
      const double m = target.at("mean").get<double>();
      means += fmt::format("{},{},{},{}\n", name, kind, m, b);
      if (checked && b < m - 1e-9) {
        dominated = false;
        fmt::print(stderr, "emit-plots: {}: bound {} below empirical mean {}\n", name, b, m);
      }
    }
  }
  write_text(results_dir / "plots" / "means.csv", means);
  if (!options.quiet) fmt::print("emit-plots: wrote {}\n", (results_dir / "plots").string());
  return dominated ? exit_code::kOk : exit_code::kVerification;
}

}  // namespace fedcert
