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


#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "fedcert/certify_nonrobust.hpp"

using namespace fedcert;

namespace {

// Direct evaluation of the bound formulas, kept independent of the library.
double mean_formula(const Vec& qv, const std::vector<std::size_t>& n, double delta) {
  const double K = static_cast<double>(qv.size());
  double mean = 0.0, per = 0.0;
  for (std::size_t k = 0; k < qv.size(); ++k) {
    mean += qv[k] / K;
    per += std::sqrt(std::log((K + 1) / delta) / (2.0 * n[k])) / K;
  }
  return mean + std::sqrt(std::log((K + 1) / delta) / (2 * K)) + per;
}

double cdf_formula(const Vec& qv, const std::vector<std::size_t>& n, double delta, double lambda) {
  const double K = static_cast<double>(qv.size());
  double frac = 0.0;
  for (std::size_t k = 0; k < qv.size(); ++k)
    // Written as q + s >= lambda so that lambda = q + s itself counts despite rounding.
    if (qv[k] + std::sqrt(std::log((K + 1) / delta) / (2.0 * n[k])) >= lambda) frac += 1.0 / K;
  return std::min(1.0, frac + std::sqrt(std::log(2 * (K + 1) / delta) / (2 * K)));
}

}  // namespace

TEST(MeanBound, SlackOnlyForZeroLossesAtScale) {
  const std::size_t K = 10000;
  const CertifiedBound b = mean_bound(Vec(K, 0.0), std::vector<std::size_t>(K, 10000), 0.5);
  EXPECT_LT(b.value, 0.05);
  EXPECT_NEAR(b.raw_value, mean_formula(Vec(K, 0.0), std::vector<std::size_t>(K, 10000), 0.5), 1e-12);
}

TEST(MeanBound, FourClientHandExample) {
  const Vec qv{0.1, 0.2, 0.3, 0.4};
  const std::vector<std::size_t> n(4, 100);
  const CertifiedBound b = mean_bound(qv, n, 0.1);
  EXPECT_NEAR(b.program_value, 0.25, 1e-15);
  EXPECT_NEAR(b.raw_value, 0.25 + std::sqrt(std::log(50.0) / 8) + std::sqrt(std::log(50.0) / 200), 1e-12);
  EXPECT_NEAR(b.raw_value, 1.089, 1e-3);
  EXPECT_EQ(b.value, 1.0);
  ASSERT_EQ(b.slack.size(), 2u);
  for (const auto& [name, v] : b.slack) EXPECT_GE(v, 0.0) << name;
  EXPECT_EQ(b.kind, BoundKind::kMean);
}

TEST(MeanBound, VanishingGap) {
  const std::size_t K = 200000;
  const CertifiedBound b = mean_bound(Vec(K, 0.3), std::vector<std::size_t>(K, 1000000), 0.1);
  EXPECT_NEAR(b.value, 0.3, 0.01);
}

TEST(MeanBound, InvalidInputs) {
  EXPECT_THROW(mean_bound({0.1}, {10}, 0.0), std::invalid_argument);
  EXPECT_THROW(mean_bound({0.1}, {10}, 1.0), std::invalid_argument);
  EXPECT_THROW(mean_bound({}, {}, 0.1), std::invalid_argument);
  EXPECT_THROW(mean_bound({1.5}, {10}, 0.1), std::invalid_argument);
  EXPECT_THROW(mean_bound({0.5}, {0}, 0.1), std::invalid_argument);
  EXPECT_THROW(mean_bound({0.5, 0.2}, {3}, 0.1), std::invalid_argument);
}

TEST(CdfBound, FourClientHandExample) {
  const Vec qv{0.1, 0.2, 0.3, 0.4};
  const std::vector<std::size_t> n(4, 100);
  const CdfCurve c = cdf_bound(qv, n, 0.1, {0.25});
  EXPECT_EQ(c.at(0.25), 1.0);
  EXPECT_NEAR(std::sqrt(std::log(50.0) / 200), 0.1399, 1e-4);
  EXPECT_NEAR(std::sqrt(std::log(100.0) / 8), 0.7587, 1e-3);
  // Program value at 0.25 counts three of four clients.
  const auto it = std::find(c.lambda.begin(), c.lambda.end(), 0.25);
  ASSERT_NE(it, c.lambda.end());
  EXPECT_NEAR(c.program[static_cast<std::size_t>(it - c.lambda.begin())], 0.75, 1e-15);
}

TEST(CdfBound, ExtremesOfTheGrid) {
  const Vec qv{0.1, 0.5, 0.9};
  const std::vector<std::size_t> n(3, 50);
  const CdfCurve c = cdf_bound(qv, n, 0.2, {-1.0, 3.0});
  EXPECT_EQ(c.at(-1.0), 1.0);
  EXPECT_NEAR(c.at(3.0), std::sqrt(std::log(2 * 4 / 0.2) / 6), 1e-12);
}

TEST(CdfBound, MatchesFormulaEverywhereAndIsMonotone) {
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::uniform_int_distribution<std::size_t> N(1, 400);
  for (int inst = 0; inst < 100; ++inst) {
    const std::size_t K = 1 + inst % 60;
    Vec qv(K);
    std::vector<std::size_t> n(K);
    for (std::size_t k = 0; k < K; ++k) qv[k] = U(g), n[k] = N(g);
    const double delta = 0.01 + 0.9 * U(g);
    Vec grid;
    for (int i = 0; i <= 40; ++i) grid.push_back(-0.2 + 1.4 * i / 40.0);
    const CdfCurve c = cdf_bound(qv, n, delta, grid);
    ASSERT_TRUE(std::is_sorted(c.lambda.begin(), c.lambda.end()));
    for (std::size_t i = 0; i < c.lambda.size(); ++i) {
      EXPECT_NEAR(c.bound[i], cdf_formula(qv, n, delta, c.lambda[i]), 1e-12);
      if (i > 0) {
        EXPECT_LE(c.bound[i], c.bound[i - 1]);
      }
      EXPECT_GE(c.bound[i], 0.0);
      EXPECT_LE(c.bound[i], 1.0);
    }
    // Between grid points the step function agrees with the formula too.
    for (int j = 0; j < 50; ++j) {
      const double lam = -0.2 + 1.4 * U(g);
      EXPECT_GE(c.at(lam), cdf_formula(qv, n, delta, lam) - 1e-12);
    }
    const CertifiedBound m = mean_bound(qv, n, delta);
    EXPECT_NEAR(m.raw_value, mean_formula(qv, n, delta), 1e-12);
    EXPECT_GE(m.value, m.program_value);
  }
}

TEST(CdfBound, NonincreasingInDelta) {
  const Vec qv{0.2, 0.4, 0.45, 0.8};
  const std::vector<std::size_t> n{30, 40, 50, 60};
  double prev_mean = 2.0;
  Vec prev_curve(21, 2.0);
  for (double delta = 0.01; delta < 0.99; delta += 0.07) {
    const double m = mean_bound(qv, n, delta).raw_value;
    EXPECT_LE(m, prev_mean);
    prev_mean = m;
    for (int i = 0; i <= 20; ++i) {
      const double v = cdf_bound(qv, n, delta, {i / 20.0}).at(i / 20.0);
      EXPECT_LE(v, prev_curve[i] + 1e-15);
      prev_curve[i] = v;
    }
  }
}

TEST(CdfBound, ZeroSlackIsEmpiricalSurvival) {
  const Vec qv{0.1, 0.2, 0.2, 0.7};
  const CdfCurve c = cdf_bound(qv, {10, 10, 10, 10}, 0.1, linspace(0, 1, 11), SlackMode::kZero);
  for (std::size_t i = 0; i < c.lambda.size(); ++i) {
    double s = 0.0;
    for (double q : qv) s += q >= c.lambda[i] ? 0.25 : 0.0;
    EXPECT_EQ(c.bound[i], s);
  }
}

TEST(CdfCurve, CsvAndJsonShape) {
  const CdfCurve c = cdf_bound({0.3, 0.6}, {20, 20}, 0.1, {0.0, 0.5, 1.0});
  const std::string csv = c.to_csv();
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "lambda,bound");
  const auto j = c.to_json();
  EXPECT_EQ(j.at("kind"), "cdf");
  EXPECT_EQ(j.at("lambda").size(), c.lambda.size());
}
