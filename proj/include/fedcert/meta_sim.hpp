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


#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "fedcert/common.hpp"
#include "fedcert/losses.hpp"

namespace fedcert {

enum class ShiftMode { kNone, kFeature, kLabel, kBoth };

std::string to_string(ShiftMode mode);
ShiftMode parse_shift_mode(const std::string& name);

/// One client type in a finite mixture. Clients of this type add `offset` to
/// their random shift vector and translate class c by `class_shift[c]`.
struct Archetype {
  double weight = 1.0;
  double score = 0.0;   // exponent used by exponential tilting
  Vec offset;           // empty means zero
  Vec proportions;      // empty means drawn per the shift mode
  Mat class_shift;      // empty means zero; otherwise classes x dim
};

/// Meta-distribution over client distributions. Each client draws an archetype
/// by weight, a random affine map, a random shift and class proportions; its
/// samples are Gaussian class-conditionals pushed through that map.
struct MetaConfig {
  std::size_t dim = 2;
  std::size_t classes = 2;
  Mat class_means;             // classes x dim
  double noise_std = 1.0;
  double sigma_A = 0.0;
  double sigma_b = 0.0;
  double dirichlet_alpha = 1.0;
  ShiftMode mode = ShiftMode::kNone;
  std::vector<Archetype> archetypes;   // empty means a single neutral type
  std::uint64_t seed = 0;

  void validate() const;
  /// Normalized archetype weights (a single 1 when no archetypes are given).
  Vec archetype_weights() const;

  nlohmann::json to_json() const;
  static MetaConfig from_json(const nlohmann::json& j);
};

struct ClientSpec {
  std::size_t id = 0;
  std::uint64_t seed = 0;   // seed of the client's data stream
  std::size_t archetype = 0;
  Mat affine;               // Lambda, so features map through (I + Lambda)
  Vec shift;
  Vec proportions;
  Mat class_shift;          // classes x dim

  bool operator==(const ClientSpec&) const = default;
  nlohmann::json to_json() const;
  static ClientSpec from_json(const nlohmann::json& j);
};

struct LocalDataset {
  std::size_t client_id = 0;
  std::vector<Sample> samples;
};

std::vector<ClientSpec> sample_clients(const MetaConfig& cfg, std::size_t count);
/// Client `index` of the world defined by cfg; sample_clients(cfg, K)[k] equals
/// sample_client(cfg, k).
ClientSpec sample_client(const MetaConfig& cfg, std::size_t index);

/// n i.i.d. samples from the client's distribution, drawn from `seed`.
LocalDataset generate_dataset(const ClientSpec& spec, std::size_t n, const MetaConfig& cfg);
LocalDataset generate_dataset(const ClientSpec& spec, std::size_t n, const MetaConfig& cfg,
                              std::uint64_t seed);

struct FdivShift {
  MetaConfig config;
  Vec weights;        // tilted archetype weights
  double kl = 0.0;
  double chi_square = 0.0;

  double divergence(DivergenceKind kind) const {
    return kind == DivergenceKind::kKL ? kl : chi_square;
  }
};

/// Exponentially tilts archetype weights, w' proportional to w exp(tilt * s).
FdivShift shift_meta_fdiv(const MetaConfig& cfg, double tilt);

/// D_f(w' || w) for two weight vectors over the same archetypes.
double mixture_divergence(DivergenceKind kind, const Vec& shifted, const Vec& base);

/// Smallest nonnegative tilt whose divergence reaches `target`. Throws when
/// the target exceeds what tilting can achieve.
double tilt_for_divergence(const MetaConfig& cfg, DivergenceKind kind, double target);

struct WassShift {
  MetaConfig config;
  Vec radii;
  double cost = 0.0;
};

/// Moves archetype m's class c mean by radii[m] * directions[c] (directions are
/// normalized). Reports the mixture-weighted transport cost of the moves.
WassShift shift_meta_wass(const MetaConfig& cfg, const Vec& radii, const Mat& directions,
                          CostKind cost);
/// Equal radius for every archetype, chosen so the cost equals `budget`.
WassShift shift_meta_wass(const MetaConfig& cfg, double budget, const Mat& directions,
                          CostKind cost);

/// A materialized world: configuration, client specs and private datasets.
struct World {
  MetaConfig config;
  std::vector<ClientSpec> clients;
  std::vector<LocalDataset> datasets;
};

World make_world(const MetaConfig& cfg, std::size_t count, std::size_t samples_per_client,
                 unsigned jobs = 1);

/// Writes manifest.json plus client_<k>.csv files (columns x0..x{d-1},label).
void export_world(const World& world, const std::filesystem::path& dir);
World import_world(const std::filesystem::path& dir);

void write_dataset_csv(const LocalDataset& data, const std::filesystem::path& path);
/// Reads a CSV whose last column is the label and whose other columns are
/// features. A header row is detected and skipped.
LocalDataset read_dataset_csv(const std::filesystem::path& path, std::size_t client_id);

}  // namespace fedcert
