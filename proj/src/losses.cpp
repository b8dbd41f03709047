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

#include "fedcert/losses.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace fedcert {
namespace {

Vec softmax(const Vec& s) {
  const double m = *std::max_element(s.begin(), s.end());
  Vec p(s.size());
  double total = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    p[i] = std::exp(s[i] - m);
    total += p[i];
  }
  for (auto& v : p) v /= total;
  return p;
}

double sigmoid(double s) {
  return s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
}

std::size_t argmax(const Vec& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

void check_label(const Hypothesis& h, const Sample& z) {
  if (h.outputs() >= 2) {
    if (z.y != std::floor(z.y) || z.y < 0 || z.y >= static_cast<double>(h.outputs()))
      throw std::invalid_argument("sample label outside the model's label space");
  }
}

// Unclipped loss and its derivative with respect to the pre-activation scores
// (linear/logistic) or the outputs (lookup, derivative unused).
struct RawLoss {
  double value;
  Vec dscores;
};

RawLoss raw_loss(const LossFn& loss_fn, const Hypothesis& h, const Sample& z, bool want_grad) {
  check_label(h, z);
  const bool table = h.kind() == ModelKind::kLookupTable;
  const Vec out = h.predict(z.x);
  const std::size_t k = out.size();
  RawLoss r{0.0, {}};
  switch (loss_fn.kind) {
    case LossKind::kZeroOne: {
      int pred = k == 1 ? (out[0] >= 0.5 ? 1 : 0) : static_cast<int>(argmax(out));
      r.value = static_cast<double>(pred != z.label());
      return r;
    }
    case LossKind::kClippedSquared: {
      if (k == 1) {
        const double e = z.y - out[0];
        r.value = e * e;
        if (want_grad && !table) r.dscores = {-2.0 * e};
        return r;
      }
      Vec g(k);
      for (std::size_t c = 0; c < k; ++c)
        g[c] = out[c] - (static_cast<int>(c) == z.label() ? 1.0 : 0.0);
      r.value = 0.5 * squared_norm(g);
      if (want_grad && !table) {
        if (h.kind() == ModelKind::kLogistic) {
          // d/ds of 0.5 |p - e|^2 through the softmax Jacobian diag(p) - p p^T.
          const double pg = dot(out, g);
          r.dscores.resize(k);
          for (std::size_t c = 0; c < k; ++c) r.dscores[c] = out[c] * (g[c] - pg);
        } else {
          r.dscores = g;
        }
      }
      return r;
    }
    case LossKind::kClippedCrossEntropy: {
      if (k == 1) {
        // Binary logit output.
        const double p1 = sigmoid(out[0]);
        const double py = z.label() == 1 ? p1 : 1.0 - p1;
        r.value = -std::log(std::max(py, 1e-300));
        if (want_grad && !table) r.dscores = {p1 - (z.label() == 1 ? 1.0 : 0.0)};
        return r;
      }
      const Vec p = h.kind() == ModelKind::kLogistic ? out : softmax(out);
      r.value = -std::log(std::max(p[static_cast<std::size_t>(z.label())], 1e-300));
      if (want_grad && !table) {
        r.dscores = p;
        r.dscores[static_cast<std::size_t>(z.label())] -= 1.0;
      }
      return r;
    }
  }
  throw std::logic_error("unknown loss kind");
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::kLinear: return "linear-classifier";
    case ModelKind::kLogistic: return "logistic";
    case ModelKind::kLookupTable: return "lookup-table";
  }
  return "?";
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kZeroOne: return "zero-one";
    case LossKind::kClippedCrossEntropy: return "clipped-cross-entropy";
    case LossKind::kClippedSquared: return "clipped-squared";
  }
  return "?";
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "linear-classifier" || name == "linear") return ModelKind::kLinear;
  if (name == "logistic") return ModelKind::kLogistic;
  if (name == "lookup-table") return ModelKind::kLookupTable;
  throw std::invalid_argument("unknown model kind: " + std::string(name));
}

LossKind parse_loss_kind(std::string_view name) {
  if (name == "zero-one") return LossKind::kZeroOne;
  if (name == "clipped-cross-entropy") return LossKind::kClippedCrossEntropy;
  if (name == "clipped-squared") return LossKind::kClippedSquared;
  throw std::invalid_argument("unknown loss kind: " + std::string(name));
}

Hypothesis Hypothesis::linear(Mat weights, Vec bias, std::string metadata) {
  Hypothesis h;
  h.kind_ = ModelKind::kLinear;
  h.outputs_ = weights.size();
  h.dim_ = weights.empty() ? 0 : weights.front().size();
  h.weights_ = std::move(weights);
  h.bias_ = std::move(bias);
  h.metadata_ = std::move(metadata);
  h.validate();
  return h;
}

Hypothesis Hypothesis::logistic(Mat weights, Vec bias, std::string metadata) {
  Hypothesis h = linear(std::move(weights), std::move(bias), std::move(metadata));
  h.kind_ = ModelKind::kLogistic;
  h.validate();
  return h;
}

Hypothesis Hypothesis::lookup_table(Mat points, Mat outputs, std::string metadata) {
  Hypothesis h;
  h.kind_ = ModelKind::kLookupTable;
  h.dim_ = points.empty() ? 0 : points.front().size();
  h.outputs_ = outputs.empty() ? 0 : outputs.front().size();
  h.points_ = std::move(points);
  h.table_ = std::move(outputs);
  h.metadata_ = std::move(metadata);
  h.validate();
  return h;
}

void Hypothesis::validate() const {
  if (dim_ == 0) throw std::invalid_argument("hypothesis: feature dimension must be >= 1");
  if (outputs_ == 0) throw std::invalid_argument("hypothesis: needs at least one output");
  if (kind_ == ModelKind::kLookupTable) {
    if (points_.size() != table_.size())
      throw std::invalid_argument("lookup table: one output row per declared point required");
    for (std::size_t i = 0; i < points_.size(); ++i) {
      if (points_[i].size() != dim_ || table_[i].size() != outputs_)
        throw std::invalid_argument("lookup table: ragged rows");
      if (!all_finite(points_[i]) || !all_finite(table_[i]))
        throw std::invalid_argument("lookup table: non-finite entry");
      for (std::size_t j = 0; j < i; ++j)
        if (points_[j] == points_[i])
          throw std::invalid_argument("lookup table: duplicate declared point");
    }
    return;
  }
  if (kind_ == ModelKind::kLogistic && outputs_ < 2)
    throw std::invalid_argument("logistic model needs >= 2 outputs");
  if (bias_.size() != outputs_) throw std::invalid_argument("hypothesis: bias size mismatch");
  if (!all_finite(bias_)) throw std::invalid_argument("hypothesis: non-finite bias");
  for (const auto& row : weights_) {
    if (row.size() != dim_) throw std::invalid_argument("hypothesis: ragged weight matrix");
    if (!all_finite(row)) throw std::invalid_argument("hypothesis: non-finite weight");
  }
}

Vec Hypothesis::scores(const Vec& x) const {
  if (kind_ == ModelKind::kLookupTable)
    throw std::invalid_argument("lookup tables have no score function");
  if (x.size() != dim_)
    throw std::invalid_argument("feature dimension " + std::to_string(x.size()) +
                                " does not match model dimension " + std::to_string(dim_));
  Vec s(outputs_);
  for (std::size_t c = 0; c < outputs_; ++c) s[c] = dot(weights_[c], x) + bias_[c];
  return s;
}

std::size_t Hypothesis::table_index(const Vec& x) const {
  if (x.size() != dim_)
    throw std::invalid_argument("feature dimension " + std::to_string(x.size()) +
                                " does not match model dimension " + std::to_string(dim_));
  for (std::size_t i = 0; i < points_.size(); ++i)
    if (points_[i] == x) return i;
  throw std::invalid_argument("point is outside the lookup table's declared space");
}

Vec Hypothesis::predict(const Vec& x) const {
  switch (kind_) {
    case ModelKind::kLinear: return scores(x);
    case ModelKind::kLogistic: return softmax(scores(x));
    case ModelKind::kLookupTable: return table_[table_index(x)];
  }
  throw std::logic_error("unknown model kind");
}

int Hypothesis::predict_label(const Vec& x) const {
  const Vec out = predict(x);
  if (out.size() == 1) return out[0] >= 0.5 ? 1 : 0;
  return static_cast<int>(argmax(out));
}

nlohmann::json Hypothesis::to_json() const {
  nlohmann::json j;
  j["kind"] = std::string(to_string(kind_));
  j["dims"] = {{"d", dim_}, {"outputs", outputs_}};
  if (kind_ == ModelKind::kLookupTable) {
    j["points"] = points_;
    j["weights"] = table_;
  } else {
    // Bias stored as the trailing column.
    Mat w = weights_;
    for (std::size_t c = 0; c < outputs_; ++c) w[c].push_back(bias_[c]);
    j["weights"] = w;
  }
  if (!metadata_.empty()) j["metadata"] = metadata_;
  return j;
}

Hypothesis Hypothesis::from_json(const nlohmann::json& j) {
  const ModelKind kind = parse_model_kind(j.at("kind").get<std::string>());
  const std::string meta = j.value("metadata", std::string{});
  const auto d = j.at("dims").at("d").get<std::size_t>();
  const auto k = j.at("dims").at("outputs").get<std::size_t>();
  Mat w = j.at("weights").get<Mat>();
  Hypothesis h;
  if (kind == ModelKind::kLookupTable) {
    h = lookup_table(j.at("points").get<Mat>(), std::move(w), meta);
  } else {
    Vec bias;
    for (auto& row : w) {
      if (row.size() != d + 1) throw std::invalid_argument("hypothesis JSON: row length must be d+1");
      bias.push_back(row.back());
      row.pop_back();
    }
    h = kind == ModelKind::kLinear ? linear(std::move(w), std::move(bias), meta)
                                   : logistic(std::move(w), std::move(bias), meta);
  }
  if (h.dim() != d || h.outputs() != k)
    throw std::invalid_argument("hypothesis JSON: dims do not match weights");
  return h;
}

double loss(const LossFn& loss_fn, const Hypothesis& h, const Sample& z) {
  const double v = raw_loss(loss_fn, h, z, false).value;
  return std::clamp(v, 0.0, 1.0);
}

Vec loss_gradient(const LossFn& loss_fn, const Hypothesis& h, const Sample& z) {
  if (!loss_fn.differentiable())
    throw UnsupportedGradient("zero-one loss has no gradient; use exhaustive perturbation");
  const RawLoss r = raw_loss(loss_fn, h, z, true);
  Vec grad(h.dim(), 0.0);
  if (h.kind() == ModelKind::kLookupTable || r.value > 1.0) return grad;
  for (std::size_t c = 0; c < h.outputs(); ++c)
    for (std::size_t i = 0; i < h.dim(); ++i) grad[i] += r.dscores[c] * h.weights()[c][i];
  return grad;
}

double curvature_bound(const LossFn& loss_fn, const Hypothesis& h) {
  if (h.kind() == ModelKind::kLookupTable || !loss_fn.differentiable()) return 0.0;
  double frob = 0.0;
  for (const auto& row : h.weights()) frob += squared_norm(row);
  // Bounds on the Hessian with respect to the scores, times |W|_2^2 <= |W|_F^2.
  double score_curvature = 0.0;
  if (loss_fn.kind == LossKind::kClippedCrossEntropy) {
    score_curvature = h.outputs() == 1 ? 0.25 : 0.5;
  } else if (h.kind() == ModelKind::kLogistic) {
    score_curvature = 2.5;
  } else {
    score_curvature = h.outputs() == 1 ? 2.0 : 1.0;
  }
  return score_curvature * frob;
}

}  // namespace fedcert
