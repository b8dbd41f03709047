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


#include "fedcert/meta_sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "fedcert/rng.hpp"

namespace fedcert {

using nlohmann::json;

std::string to_string(ShiftMode mode) {
  switch (mode) {
    case ShiftMode::kNone: return "none";
    case ShiftMode::kFeature: return "feature";
    case ShiftMode::kLabel: return "label";
    case ShiftMode::kBoth: return "both";
  }
  return "none";
}

ShiftMode parse_shift_mode(const std::string& name) {
  if (name == "none") return ShiftMode::kNone;
  if (name == "feature") return ShiftMode::kFeature;
  if (name == "label") return ShiftMode::kLabel;
  if (name == "both") return ShiftMode::kBoth;
  throw std::invalid_argument("unknown shift mode: " + name);
}

namespace {

bool feature_mode(ShiftMode m) { return m == ShiftMode::kFeature || m == ShiftMode::kBoth; }
bool label_mode(ShiftMode m) { return m == ShiftMode::kLabel || m == ShiftMode::kBoth; }

void check_matrix(const Mat& m, std::size_t rows, std::size_t cols, const std::string& what) {
  if (m.size() != rows) throw std::invalid_argument(what + ": expected " + std::to_string(rows) + " rows");
  for (const auto& r : m) {
    if (r.size() != cols)
      throw std::invalid_argument(what + ": expected " + std::to_string(cols) + " columns");
    if (!all_finite(r)) throw std::invalid_argument(what + ": non-finite entry");
  }
}

void check_simplex(const Vec& p, std::size_t n, const std::string& what) {
  if (p.size() != n) throw std::invalid_argument(what + ": wrong length");
  double total = 0.0;
  for (double v : p) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument(what + ": negative entry");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument(what + ": does not sum to 1");
}

}  // namespace

void MetaConfig::validate() const {
  if (dim < 1) throw std::invalid_argument("MetaConfig: dim must be >= 1");
  if (classes < 2) throw std::invalid_argument("MetaConfig: classes must be >= 2");
  check_matrix(class_means, classes, dim, "MetaConfig.class_means");
  if (!(noise_std >= 0.0) || !std::isfinite(noise_std))
    throw std::invalid_argument("MetaConfig: noise_std must be >= 0");
  if (!(sigma_A >= 0.0) || !(sigma_b >= 0.0) || !std::isfinite(sigma_A) || !std::isfinite(sigma_b))
    throw std::invalid_argument("MetaConfig: sigma_A and sigma_b must be >= 0");
  if (!(dirichlet_alpha > 0.0) || !std::isfinite(dirichlet_alpha))
    throw std::invalid_argument("MetaConfig: dirichlet_alpha must be > 0");
  double total = 0.0;
  for (std::size_t m = 0; m < archetypes.size(); ++m) {
    const auto& a = archetypes[m];
    const std::string what = "MetaConfig.archetypes[" + std::to_string(m) + "]";
    if (!(a.weight >= 0.0) || !std::isfinite(a.weight)) throw std::invalid_argument(what + ": bad weight");
    if (!std::isfinite(a.score)) throw std::invalid_argument(what + ": bad score");
    if (!a.offset.empty() && (a.offset.size() != dim || !all_finite(a.offset)))
      throw std::invalid_argument(what + ": offset must have length dim");
    if (!a.proportions.empty()) check_simplex(a.proportions, classes, what + ".proportions");
    if (!a.class_shift.empty()) check_matrix(a.class_shift, classes, dim, what + ".class_shift");
    total += a.weight;
  }
  if (!archetypes.empty() && !(total > 0.0))
    throw std::invalid_argument("MetaConfig: archetype weights sum to zero");
}

Vec MetaConfig::archetype_weights() const {
  if (archetypes.empty()) return {1.0};
  Vec w;
  double total = 0.0;
  for (const auto& a : archetypes) total += a.weight;
  for (const auto& a : archetypes) w.push_back(a.weight / total);
  return w;
}

json MetaConfig::to_json() const {
  json arch = json::array();
  for (const auto& a : archetypes) {
    json j = {{"weight", a.weight}, {"score", a.score}};
    if (!a.offset.empty()) j["offset"] = a.offset;
    if (!a.proportions.empty()) j["proportions"] = a.proportions;
    if (!a.class_shift.empty()) j["class_shift"] = a.class_shift;
    arch.push_back(std::move(j));
  }
  return {{"dim", dim},
          {"classes", classes},
          {"class_means", class_means},
          {"noise_std", noise_std},
          {"sigma_A", sigma_A},
          {"sigma_b", sigma_b},
          {"dirichlet_alpha", dirichlet_alpha},
          {"mode", to_string(mode)},
          {"archetypes", std::move(arch)},
          {"seed", seed}};
}

MetaConfig MetaConfig::from_json(const json& j) {
  MetaConfig c;
  c.dim = j.at("dim").get<std::size_t>();
  c.classes = j.at("classes").get<std::size_t>();
  c.class_means = j.at("class_means").get<Mat>();
  c.noise_std = j.value("noise_std", 1.0);
  c.sigma_A = j.value("sigma_A", 0.0);
  c.sigma_b = j.value("sigma_b", 0.0);
  c.dirichlet_alpha = j.value("dirichlet_alpha", 1.0);
  c.mode = parse_shift_mode(j.value("mode", std::string("none")));
  c.seed = j.value("seed", std::uint64_t{0});
  if (j.contains("archetypes")) {
    for (const auto& a : j.at("archetypes")) {
      Archetype arch;
      arch.weight = a.value("weight", 1.0);
      arch.score = a.value("score", 0.0);
      if (a.contains("offset")) arch.offset = a.at("offset").get<Vec>();
      if (a.contains("proportions")) arch.proportions = a.at("proportions").get<Vec>();
      if (a.contains("class_shift")) arch.class_shift = a.at("class_shift").get<Mat>();
      c.archetypes.push_back(std::move(arch));
    }
  }
  c.validate();
  return c;
}

json ClientSpec::to_json() const {
  return {{"id", id},         {"seed", seed},   {"archetype", archetype},
          {"affine", affine}, {"shift", shift}, {"proportions", proportions},
          {"class_shift", class_shift}};
}

ClientSpec ClientSpec::from_json(const json& j) {
  ClientSpec s;
  s.id = j.at("id").get<std::size_t>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.archetype = j.at("archetype").get<std::size_t>();
  s.affine = j.at("affine").get<Mat>();
  s.shift = j.at("shift").get<Vec>();
  s.proportions = j.at("proportions").get<Vec>();
  s.class_shift = j.at("class_shift").get<Mat>();
  return s;
}

ClientSpec sample_client(const MetaConfig& cfg, std::size_t index) {
  const std::size_t d = cfg.dim, C = cfg.classes;
  Rng rng(derive_seed(cfg.seed, stream::kClientSpec, index));
  ClientSpec s;
  s.id = index;
  s.seed = derive_seed(cfg.seed, stream::kClientData, index);
  // The archetype draw always consumes one variate so that worlds differing
  // only in archetype weights share every other draw.
  const Vec w = cfg.archetype_weights();
  s.archetype = rng.categorical(w);
  const Archetype* arch = cfg.archetypes.empty() ? nullptr : &cfg.archetypes[s.archetype];

  s.affine.assign(d, Vec(d, 0.0));
  s.shift.assign(d, 0.0);
  if (feature_mode(cfg.mode)) {
    for (auto& row : s.affine)
      for (auto& v : row) v = rng.normal(0.0, cfg.sigma_A);
    for (auto& v : s.shift) v = rng.normal(0.0, cfg.sigma_b);
  }
  if (arch && !arch->offset.empty())
    for (std::size_t i = 0; i < d; ++i) s.shift[i] += arch->offset[i];

  if (arch && !arch->proportions.empty()) {
    s.proportions = arch->proportions;
  } else if (label_mode(cfg.mode)) {
    s.proportions = rng.dirichlet(cfg.dirichlet_alpha, C);
  } else {
    s.proportions.assign(C, 1.0 / static_cast<double>(C));
  }
  s.class_shift = arch && !arch->class_shift.empty() ? arch->class_shift : Mat(C, Vec(d, 0.0));
  return s;
}

std::vector<ClientSpec> sample_clients(const MetaConfig& cfg, std::size_t count) {
  if (count == 0) throw std::invalid_argument("sample_clients: K must be >= 1");
  cfg.validate();
  std::vector<ClientSpec> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) out.push_back(sample_client(cfg, k));
  return out;
}

LocalDataset generate_dataset(const ClientSpec& spec, std::size_t n, const MetaConfig& cfg) {
  return generate_dataset(spec, n, cfg, spec.seed);
}

LocalDataset generate_dataset(const ClientSpec& spec, std::size_t n, const MetaConfig& cfg,
                              std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("generate_dataset: n_k must be >= 1");
  const std::size_t d = cfg.dim;
  if (spec.affine.size() != d || spec.shift.size() != d || spec.proportions.size() != cfg.classes)
    throw std::invalid_argument("generate_dataset: client spec does not match config");
  Rng rng(seed);
  LocalDataset out;
  out.client_id = spec.id;
  out.samples.reserve(n);
  Vec raw(d);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t c = rng.categorical(spec.proportions);
    for (std::size_t j = 0; j < d; ++j) raw[j] = cfg.class_means[c][j] + cfg.noise_std * rng.normal();
    Sample z;
    z.x.resize(d);
    for (std::size_t r = 0; r < d; ++r) {
      double v = raw[r] + spec.shift[r] + spec.class_shift[c][r];
      for (std::size_t j = 0; j < d; ++j) v += spec.affine[r][j] * raw[j];
      z.x[r] = v;
    }
    z.y = static_cast<double>(c);
    out.samples.push_back(std::move(z));
  }
  return out;
}

double mixture_divergence(DivergenceKind kind, const Vec& shifted, const Vec& base) {
  if (shifted.size() != base.size()) throw std::invalid_argument("mixture_divergence: size mismatch");
  double total = 0.0;
  for (std::size_t m = 0; m < base.size(); ++m) {
    const double p = shifted[m], q = base[m];
    if (q <= 0.0) {
      if (p > 0.0) return std::numeric_limits<double>::infinity();
      continue;
    }
    if (kind == DivergenceKind::kKL) {
      if (p > 0.0) total += p * std::log(p / q);
    } else {
      const double r = p / q - 1.0;
      total += q * r * r;
    }
  }
  return std::max(0.0, total);
}

FdivShift shift_meta_fdiv(const MetaConfig& cfg, double tilt) {
  cfg.validate();
  if (!std::isfinite(tilt)) throw std::invalid_argument("shift_meta_fdiv: tilt must be finite");
  FdivShift out;
  out.config = cfg;
  const Vec w = cfg.archetype_weights();
  if (cfg.archetypes.empty() || tilt == 0.0) {
    out.weights = w;
    return out;
  }
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; m < w.size(); ++m)
    if (w[m] > 0.0) top = std::max(top, tilt * cfg.archetypes[m].score);
  Vec shifted(w.size(), 0.0);
  double total = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) {
    if (w[m] > 0.0) shifted[m] = w[m] * std::exp(tilt * cfg.archetypes[m].score - top);
    total += shifted[m];
  }
  for (std::size_t m = 0; m < w.size(); ++m) {
    shifted[m] /= total;
    out.config.archetypes[m].weight = shifted[m];
  }
  out.weights = shifted;
  out.kl = mixture_divergence(DivergenceKind::kKL, shifted, w);
  out.chi_square = mixture_divergence(DivergenceKind::kChiSquare, shifted, w);
  return out;
}

double tilt_for_divergence(const MetaConfig& cfg, DivergenceKind kind, double target) {
  if (!(target >= 0.0)) throw std::invalid_argument("tilt_for_divergence: target must be >= 0");
  if (target == 0.0) return 0.0;
  auto div = [&](double t) { return shift_meta_fdiv(cfg, t).divergence(kind); };
  double hi = 1.0;
  while (div(hi) < target) {
    hi *= 2.0;
    if (hi > 1e6)
      throw std::invalid_argument("tilt_for_divergence: target divergence is not reachable by tilting");
  }
  double lo = 0.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (div(mid) < target ? lo : hi) = mid;
  }
  // The lower end keeps the achieved divergence at or below the target.
  return lo;
}

WassShift shift_meta_wass(const MetaConfig& cfg, const Vec& radii, const Mat& directions,
                          CostKind cost) {
  cfg.validate();
  MetaConfig shifted = cfg;
  if (shifted.archetypes.empty()) shifted.archetypes.push_back(Archetype{});
  const std::size_t M = shifted.archetypes.size();
  if (radii.size() != M) throw std::invalid_argument("shift_meta_wass: one radius per archetype required");
  check_matrix(directions, cfg.classes, cfg.dim, "shift_meta_wass.directions");
  Mat unit = directions;
  for (auto& row : unit) {
    const double norm = std::sqrt(squared_norm(row));
    if (!(norm > 0.0)) throw std::invalid_argument("shift_meta_wass: zero direction");
    for (auto& v : row) v /= norm;
  }
  const Vec w = shifted.archetype_weights();
  WassShift out;
  out.radii = radii;
  for (std::size_t m = 0; m < M; ++m) {
    if (!(radii[m] >= 0.0) || !std::isfinite(radii[m]))
      throw std::invalid_argument("shift_meta_wass: radii must be >= 0");
    auto& arch = shifted.archetypes[m];
    if (arch.class_shift.empty()) arch.class_shift.assign(cfg.classes, Vec(cfg.dim, 0.0));
    for (std::size_t c = 0; c < cfg.classes; ++c)
      for (std::size_t j = 0; j < cfg.dim; ++j) arch.class_shift[c][j] += radii[m] * unit[c][j];
    out.cost += w[m] * cost_of_distance(cost, radii[m]);
  }
  out.config = radii == Vec(M, 0.0) ? cfg : shifted;
  return out;
}

WassShift shift_meta_wass(const MetaConfig& cfg, double budget, const Mat& directions,
                          CostKind cost) {
  if (!(budget >= 0.0) || !std::isfinite(budget))
    throw std::invalid_argument("shift_meta_wass: budget must be >= 0");
  const double r = cost == CostKind::kHalfSquaredL2 ? std::sqrt(2.0 * budget) : budget;
  const std::size_t M = std::max<std::size_t>(1, cfg.archetypes.size());
  return shift_meta_wass(cfg, Vec(M, r), directions, cost);
}

World make_world(const MetaConfig& cfg, std::size_t count, std::size_t samples_per_client,
                 unsigned jobs) {
  World w;
  w.config = cfg;
  w.clients = sample_clients(cfg, count);
  w.datasets.resize(count);
  parallel_for(count, jobs, [&](std::size_t k) {
    w.datasets[k] = generate_dataset(w.clients[k], samples_per_client, cfg);
  });
  return w;
}

namespace {

std::string client_file(std::size_t k) { return fmt::format("client_{:05d}.csv", k); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

bool parse_double(std::string cell, double& out) {
  while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
  std::size_t start = 0;
  while (start < cell.size() && cell[start] == ' ') ++start;
  if (start < cell.size() && cell[start] == '+') ++start;
  const char* first = cell.data() + start;
  const char* last = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last && first != last;
}

}  // namespace

void write_dataset_csv(const LocalDataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const std::size_t d = data.samples.empty() ? 0 : data.samples.front().x.size();
  for (std::size_t j = 0; j < d; ++j) out << 'x' << j << ',';
  out << "label\n";
  for (const auto& z : data.samples) {
    for (double v : z.x) out << fmt::format("{},", v);
    out << fmt::format("{}\n", z.y);
  }
}

LocalDataset read_dataset_csv(const std::filesystem::path& path, std::size_t client_id) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  LocalDataset data;
  data.client_id = client_id;
  std::string line;
  std::size_t line_no = 0, width = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split_csv(line);
    std::vector<double> values(cells.size());
    bool numeric = true;
    for (std::size_t i = 0; i < cells.size() && numeric; ++i) numeric = parse_double(cells[i], values[i]);
    if (!numeric) {
      if (line_no == 1) continue;  // header
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (cells.size() < 2)
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": need features and a label");
    if (width == 0) width = cells.size();
    if (cells.size() != width)
      throw std::invalid_argument(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    Sample z;
    z.x.assign(values.begin(), values.end() - 1);
    z.y = values.back();
    data.samples.push_back(std::move(z));
  }
  if (data.samples.empty()) throw std::invalid_argument(path.string() + ": no samples");
  return data;
}

void export_world(const World& world, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  json clients = json::array();
  for (std::size_t k = 0; k < world.clients.size(); ++k) {
    json c = world.clients[k].to_json();
    c["n"] = world.datasets.at(k).samples.size();
    c["file"] = client_file(k);
    clients.push_back(std::move(c));
    write_dataset_csv(world.datasets[k], dir / client_file(k));
  }
  json manifest = {{"format", "fedcert-world/v1"},
                   {"rng", Rng::kName},
                   {"config", world.config.to_json()},
                   {"clients", std::move(clients)}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  if (!out) throw std::runtime_error("cannot write manifest in " + dir.string());
  out << manifest.dump(2) << '\n';
}

World import_world(const std::filesystem::path& dir) {
  std::ifstream in(dir / "manifest.json");
  if (!in) throw std::runtime_error("missing manifest.json in " + dir.string());
  const json manifest = json::parse(in);
  if (manifest.value("format", std::string()) != "fedcert-world/v1")
    throw std::invalid_argument("unsupported world format in " + dir.string());
  World w;
  w.config = MetaConfig::from_json(manifest.at("config"));
  for (const auto& c : manifest.at("clients")) {
    w.clients.push_back(ClientSpec::from_json(c));
    w.datasets.push_back(read_dataset_csv(dir / c.at("file").get<std::string>(), w.clients.back().id));
  }
  return w;
}

}  // namespace fedcert
