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

#include <string>
#include <string_view>

#include <json.hpp>

#include "fedcert/common.hpp"

namespace fedcert {

/// A labelled point z = (x, y). Classification labels are stored as integral
/// doubles; regression targets are arbitrary reals.
struct Sample {
  Vec x;
  double y = 0.0;

  int label() const { return static_cast<int>(y); }
  bool operator==(const Sample&) const = default;
};

enum class ModelKind { kLinear, kLogistic, kLookupTable };
enum class LossKind { kZeroOne, kClippedCrossEntropy, kClippedSquared };

std::string_view to_string(ModelKind kind);
std::string_view to_string(LossKind kind);
ModelKind parse_model_kind(std::string_view name);
LossKind parse_loss_kind(std::string_view name);

/// Scoring model h. Linear and logistic models hold an outputs x dim weight
/// matrix plus bias; logistic models apply a softmax and need >= 2 outputs. A
/// lookup table maps each declared feature point to a fixed output row and is
/// undefined elsewhere.
class Hypothesis {
 public:
  /// An empty model; assign a constructed one before use.
  Hypothesis() = default;
  static Hypothesis linear(Mat weights, Vec bias, std::string metadata = {});
  static Hypothesis logistic(Mat weights, Vec bias, std::string metadata = {});
  static Hypothesis lookup_table(Mat points, Mat outputs, std::string metadata = {});

  ModelKind kind() const { return kind_; }
  std::size_t dim() const { return dim_; }
  std::size_t outputs() const { return outputs_; }
  const Mat& weights() const { return weights_; }
  const Vec& bias() const { return bias_; }
  const Mat& points() const { return points_; }
  const Mat& table() const { return table_; }
  const std::string& metadata() const { return metadata_; }

  /// Raw model output: scores (linear), class probabilities (logistic) or the
  /// table row (lookup). Throws on dimension mismatch or off-table points.
  Vec predict(const Vec& x) const;
  /// Pre-activation scores W x + b (linear and logistic only).
  Vec scores(const Vec& x) const;
  /// Index of the lookup-table row for x; throws if x is not a declared point.
  std::size_t table_index(const Vec& x) const;
  /// Predicted class label.
  int predict_label(const Vec& x) const;

  nlohmann::json to_json() const;
  static Hypothesis from_json(const nlohmann::json& j);

 private:
  void validate() const;

  ModelKind kind_ = ModelKind::kLinear;
  std::size_t dim_ = 0;
  std::size_t outputs_ = 0;
  Mat weights_;
  Vec bias_;
  Mat points_;
  Mat table_;
  std::string metadata_;
};

/// A loss clipped into [0, 1].
struct LossFn {
  LossKind kind = LossKind::kZeroOne;

  bool differentiable() const { return kind != LossKind::kZeroOne; }
  bool operator==(const LossFn&) const = default;
};

/// l(y, h(x)) clipped into [0, 1]. Throws std::invalid_argument when the
/// sample dimension does not match h.
double loss(const LossFn& loss_fn, const Hypothesis& h, const Sample& z);

/// Gradient of the (clipped) loss with respect to z.x. Zero inside the clipped
/// region and for lookup tables. Throws UnsupportedGradient for zero-one loss.
Vec loss_gradient(const LossFn& loss_fn, const Hypothesis& h, const Sample& z);

/// beta with Hessian_x(loss) <= beta I wherever the loss is smooth; used to
/// size inner-ascent steps. Zero for lookup tables.
double curvature_bound(const LossFn& loss_fn, const Hypothesis& h);

}  // namespace fedcert
