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


#include "fedcert/client_query.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "fedcert/rng.hpp"

namespace fedcert {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// phi_gamma(z) as the upper envelope of lines loss_j - gamma * cost_j.
struct Line {
  double loss;
  double cost;
};

double envelope(const std::vector<Line>& lines, double gamma) {
  double best = -kInf;
  for (const auto& l : lines) best = std::max(best, l.loss - gamma * l.cost);
  return best;
}

std::optional<std::vector<Line>> candidate_lines(const Hypothesis& h, const Sample& z,
                                                 const TransportCost& cost,
                                                 const LossFn& loss_fn) {
  if (h.kind() == ModelKind::kLookupTable) {
    std::vector<Line> lines;
    lines.reserve(h.points().size());
    for (const auto& p : h.points()) {
      Sample moved{p, z.y};
      lines.push_back({loss(loss_fn, h, moved), cost.features(p, z.x)});
    }
    // The unperturbed sample must itself be a declared point.
    loss(loss_fn, h, z);
    return lines;
  }
  if (loss_fn.kind != LossKind::kZeroOne) return std::nullopt;

  const double current = loss(loss_fn, h, z);
  std::vector<Line> lines{{current, 0.0}};
  if (current >= 1.0) return lines;
  const Mat& W = h.weights();
  const Vec s = h.scores(z.x);
  if (h.outputs() == 1) {
    const double norm = std::sqrt(squared_norm(W[0]));
    if (norm > 0.0)
      lines.push_back({1.0, cost_of_distance(cost.kind, std::abs(s[0] - 0.5) / norm)});
    return lines;
  }
  // Misclassification happens once some other score reaches the true score;
  // the cheapest such move is the distance to the nearest of those halfspaces.
  const auto y = static_cast<std::size_t>(z.label());
  for (std::size_t j = 0; j < h.outputs(); ++j) {
    if (j == y) continue;
    Vec u(h.dim());
    for (std::size_t i = 0; i < h.dim(); ++i) u[i] = W[j][i] - W[y][i];
    const double norm = std::sqrt(squared_norm(u));
    if (!(norm > 0.0)) continue;
    const double margin = std::max(0.0, s[y] - s[j]);
    lines.push_back({1.0, cost_of_distance(cost.kind, margin / norm)});
  }
  return lines;
}

Vec cost_gradient(CostKind kind, const Vec& moved, const Vec& original) {
  Vec g(moved.size());
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = moved[i] - original[i];
  if (kind == CostKind::kL2) {
    const double norm = std::sqrt(squared_norm(g));
    for (auto& v : g) v = norm > 0.0 ? v / norm : 0.0;
  }
  return g;
}

PhiValue ascend(const Hypothesis& h, double gamma, const Sample& z, const TransportCost& cost,
                const LossFn& loss_fn, const InnerSolverOptions& options) {
  const double beta = curvature_bound(loss_fn, h);
  const double step = gamma + beta > 0.0 ? 1.0 / (gamma + beta) : 1.0;
  const double spread = gamma + beta > 0.0 ? 1.0 / std::sqrt(gamma + beta) : 1.0;
  auto objective = [&](const Sample& moved) {
    return loss(loss_fn, h, moved) - gamma * cost.features(moved.x, z.x);
  };

  PhiValue out;
  out.value = loss(loss_fn, h, z);
  bool stationary = true;
  for (int r = 0; r < std::max(1, options.restarts); ++r) {
    Sample cur = z;
    if (r > 0) {
      Rng rng(derive_seed(options.seed, stream::kInnerSolver, static_cast<std::uint64_t>(r)));
      for (auto& v : cur.x) v += spread * rng.normal();
    }
    double best = objective(cur);
    double grad_norm = 0.0;
    for (int it = 0; it < options.steps; ++it) {
      Vec g = loss_gradient(loss_fn, h, cur);
      const Vec gc = cost_gradient(cost.kind, cur.x, z.x);
      for (std::size_t i = 0; i < g.size(); ++i) g[i] -= gamma * gc[i];
      grad_norm = std::sqrt(squared_norm(g));
      ++out.iterations;
      if (grad_norm <= 1e-10) break;
      for (std::size_t i = 0; i < g.size(); ++i) cur.x[i] += step * g[i];
      best = std::max(best, objective(cur));
    }
    if (grad_norm > 1e-6) stationary = false;
    out.value = std::max(out.value, best);
  }
  // A stationary point is the global maximum only when the cost's curvature
  // dominates the loss's.
  const bool concave = gamma > beta && cost.kind == CostKind::kHalfSquaredL2;
  out.status = stationary && concave ? SolverStatus::kConverged : SolverStatus::kNotConverged;
  return out;
}

SolverStatus worse(SolverStatus a, SolverStatus b) { return static_cast<int>(a) > static_cast<int>(b) ? a : b; }

}  // namespace

double TransportCost::features(const Vec& moved, const Vec& original) const {
  if (moved.size() != original.size()) throw std::invalid_argument("transport cost: dimension mismatch");
  double sq = 0.0;
  for (std::size_t i = 0; i < moved.size(); ++i) {
    const double d = moved[i] - original[i];
    sq += d * d;
  }
  return kind == CostKind::kHalfSquaredL2 ? 0.5 * sq : std::sqrt(sq);
}

double TransportCost::operator()(const Sample& moved, const Sample& original) const {
  if (moved.y != original.y) return kInf;
  return features(moved.x, original.x);
}

std::string to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::kExact: return "exact";
    case SolverStatus::kConverged: return "converged";
    case SolverStatus::kNotConverged: return "not-converged";
  }
  return "exact";
}

QueryValue empirical_risk(const Hypothesis& h, const LocalDataset& data, const LossFn& loss_fn) {
  if (data.samples.empty()) throw std::invalid_argument("empirical_risk: empty dataset");
  double total = 0.0;
  for (const auto& z : data.samples) total += loss(loss_fn, h, z);
  QueryValue q;
  q.value = std::clamp(total / static_cast<double>(data.samples.size()), 0.0, 1.0);
  return q;
}

PhiValue phi_gamma(const Hypothesis& h, double gamma, const Sample& z, const TransportCost& cost,
                   const LossFn& loss_fn, const InnerSolverOptions& options) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw std::invalid_argument("phi_gamma: gamma must be >= 0");
  if (auto lines = candidate_lines(h, z, cost, loss_fn)) {
    PhiValue out;
    out.value = envelope(*lines, gamma);
    out.iterations = lines->size();
    return out;
  }
  return ascend(h, gamma, z, cost, loss_fn, options);
}

QueryValue adversarial_risk(const Hypothesis& h, const LocalDataset& data, double rho,
                            const TransportCost& cost, const LossFn& loss_fn,
                            const InnerSolverOptions& options) {
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw std::invalid_argument("adversarial_risk: rho must be > 0 (use empirical_risk at 0)");
  if (data.samples.empty()) throw std::invalid_argument("adversarial_risk: empty dataset");
  const std::size_t n = data.samples.size();
  const double gamma_max = 1.0 / rho;
  QueryValue q;
  q.rho = rho;

  std::vector<std::vector<Line>> lines;
  lines.reserve(n);
  for (const auto& z : data.samples) {
    auto c = candidate_lines(h, z, cost, loss_fn);
    if (!c) break;
    lines.push_back(std::move(*c));
  }

  if (lines.size() == n) {
    // The dual objective is convex and piecewise linear in gamma; its minimum
    // over [0, 1/rho] sits at an endpoint or at a kink of some phi_gamma(z_i).
    auto dual = [&](double g) {
      double total = 0.0;
      for (const auto& l : lines) total += envelope(l, g);
      return g * rho + total / static_cast<double>(n);
    };
    Vec kinks{0.0, gamma_max};
    for (const auto& ls : lines)
      for (std::size_t a = 0; a < ls.size(); ++a)
        for (std::size_t b = a + 1; b < ls.size(); ++b) {
          if (ls[a].cost == ls[b].cost) continue;
          const double g = (ls[a].loss - ls[b].loss) / (ls[a].cost - ls[b].cost);
          if (g > 0.0 && g < gamma_max) kinks.push_back(g);
        }
    std::sort(kinks.begin(), kinks.end());
    kinks.erase(std::unique(kinks.begin(), kinks.end()), kinks.end());
    std::size_t lo = 0, hi = kinks.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi) / 2;
      q.inner_iterations += 2;
      if (dual(kinks[mid]) <= dual(kinks[mid + 1])) hi = mid;
      else lo = mid + 1;
    }
    q.gamma_star = kinks[lo];
    q.value = std::clamp(dual(kinks[lo]), 0.0, 1.0);
    q.status = SolverStatus::kExact;
    return q;
  }

  SolverStatus status = SolverStatus::kConverged;
  auto dual = [&](double g) {
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      InnerSolverOptions opt = options;
      opt.seed = derive_seed(options.seed, stream::kInnerSolver, i);
      const PhiValue phi = phi_gamma(h, g, data.samples[i], cost, loss_fn, opt);
      total += phi.value;
      q.inner_iterations += phi.iterations;
      status = worse(status, phi.status);
    }
    return g * rho + total / static_cast<double>(n);
  };
  // Golden-section search on the convex dual; every evaluated point is kept
  // as a candidate so the reported value is the smallest dual value seen.
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = 0.0, b = gamma_max;
  double best_g = a, best = dual(a);
  const double at_b = dual(b);
  if (at_b < best) best = at_b, best_g = b;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = dual(c), fd = dual(d);
  for (int it = 0; it < options.golden_max_iterations && b - a > options.golden_tolerance; ++it) {
    if (fc <= fd) {
      b = d, d = c, fd = fc;
      c = b - inv_phi * (b - a);
      fc = dual(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + inv_phi * (b - a);
      fd = dual(d);
    }
    if (fc < best) best = fc, best_g = c;
    if (fd < best) best = fd, best_g = d;
  }
  q.gamma_star = best_g;
  q.value = std::clamp(best, 0.0, 1.0);
  q.status = status;
  return q;
}

Client::Client(LocalDataset data, std::size_t max_queries, TransportCost cost,
               InnerSolverOptions options)
    : data_(std::move(data)),
      id_(data_.client_id),
      n_(data_.samples.size()),
      cost_(cost),
      options_(options) {
  if (n_ == 0) throw std::invalid_argument("Client: dataset must be nonempty");
  budget_.max_queries = max_queries;
  options_.seed = derive_seed(options.seed, stream::kInnerSolver, id_);
}

QueryBudget Client::budget() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return budget_;
}

QueryValue Client::query(const Hypothesis& h, const LossFn& loss_fn, double rho) {
  if (!(rho >= 0.0) || !std::isfinite(rho)) throw std::invalid_argument("query: rho must be >= 0");
  {
    std::lock_guard<std::mutex> lock(mutex_);
    if (budget_.exhausted()) throw BudgetExceeded(id_, budget_.max_queries);
    ++budget_.used;
  }
  if (rho == 0.0) return empirical_risk(h, data_, loss_fn);
  return adversarial_risk(h, data_, rho, cost_, loss_fn, options_);
}

Network::Network(std::vector<LocalDataset> datasets, std::size_t max_queries, TransportCost cost,
                 InnerSolverOptions options)
    : cost_(cost) {
  if (datasets.empty()) throw std::invalid_argument("Network: need at least one client");
  for (std::size_t k = 0; k < datasets.size(); ++k) {
    datasets[k].client_id = k;
    clients_.push_back(std::make_unique<Client>(std::move(datasets[k]), max_queries, cost, options));
  }
  log_.resize(clients_.size());
}

std::vector<std::size_t> Network::sample_counts() const {
  std::vector<std::size_t> n;
  for (const auto& c : clients_) n.push_back(c->sample_count());
  return n;
}

QueryValue Network::query(std::size_t k, const Hypothesis& h, const LossFn& loss_fn, double rho) {
  if (k >= clients_.size()) throw std::out_of_range("Network: no client " + std::to_string(k));
  QueryValue q = clients_[k]->query(h, loss_fn, rho);
  std::lock_guard<std::mutex> lock(log_mutex_);
  log_[k].push_back(q);
  return q;
}

Vec Network::query_all(const Hypothesis& h, const LossFn& loss_fn, unsigned jobs) {
  Vec out(size());
  parallel_for(size(), jobs, [&](std::size_t k) { out[k] = query(k, h, loss_fn, 0.0).value; });
  return out;
}

void Network::write_log(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  std::lock_guard<std::mutex> lock(log_mutex_);
  for (std::size_t k = 0; k < log_.size(); ++k)
    for (const auto& q : log_[k]) {
      nlohmann::json j = {{"client", k},
                          {"rho", q.rho},
                          {"value", q.value},
                          {"gamma_star", q.gamma_star},
                          {"status", to_string(q.status)}};
      out << j.dump() << '\n';
    }
}

}  // namespace fedcert
