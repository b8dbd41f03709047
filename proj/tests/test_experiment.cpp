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


#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>

#include <fmt/format.h>
#include <gtest/gtest.h>
#include <json.hpp>

#include "fedcert/experiment.hpp"
#include "test_support.hpp"

using namespace fedcert;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = FEDCERT_SOURCE_DIR;
const fs::path kSmall = kSource / "tests" / "data" / "small.json";
const fs::path kGolden = kSource / "tests" / "golden" / "small";
const std::string kCli = FEDCERT_CLI;

std::string cli(const std::string& args) { return kCli + " " + args; }

// Structural equality with a numeric tolerance; reports the first mismatch.
::testing::AssertionResult json_near(const json& a, const json& b, double tol, const std::string& path = "$") {
  if (a.is_number() && b.is_number()) {
    const double x = a.get<double>(), y = b.get<double>();
    if (std::abs(x - y) <= tol * std::max(1.0, std::abs(y))) return ::testing::AssertionSuccess();
    return ::testing::AssertionFailure() << path << ": " << x << " vs " << y;
  }
  if (a.type() != b.type()) return ::testing::AssertionFailure() << path << ": type differs";
  if (a.is_object()) {
    if (a.size() != b.size()) return ::testing::AssertionFailure() << path << ": key count differs";
    for (auto it = a.begin(); it != a.end(); ++it) {
      if (!b.contains(it.key())) return ::testing::AssertionFailure() << path << ": missing " << it.key();
      auto r = json_near(it.value(), b.at(it.key()), tol, path + "." + it.key());
      if (!r) return r;
    }
    return ::testing::AssertionSuccess();
  }
  if (a.is_array()) {
    if (a.size() != b.size()) return ::testing::AssertionFailure() << path << ": length differs";
    for (std::size_t i = 0; i < a.size(); ++i) {
      auto r = json_near(a[i], b[i], tol, path + "[" + std::to_string(i) + "]");
      if (!r) return r;
    }
    return ::testing::AssertionSuccess();
  }
  if (a == b) return ::testing::AssertionSuccess();
  return ::testing::AssertionFailure() << path << ": " << a.dump() << " vs " << b.dump();
}

json small_json() { return json::parse(fctest::slurp(kSmall)); }

// Writes a config variant and returns its path.
fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const fs::path p = dir / name;
  fctest::spit(p, j.dump(2));
  return p;
}

std::string tree_listing(const fs::path& root) {
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files.push_back(fs::relative(e.path(), root).string());
  std::sort(files.begin(), files.end());
  std::string out;
  for (const auto& f : files) out += f + "\n" + fctest::slurp(root / f) + "\n";
  return out;
}

}  // namespace

TEST(ConfigParse, SmallConfigLoads) {
  const ExperimentConfig cfg = load_config(kSmall);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.world.seed, 7u);
  EXPECT_EQ(cfg.clients, 8u);
  EXPECT_EQ(cfg.samples, 30u);
  ASSERT_EQ(cfg.bounds.size(), 5u);
  EXPECT_EQ(cfg.bounds[1].request.lambda_grid.size(), 11u);
  EXPECT_EQ(cfg.bounds[4].shift.kind, ShiftKind::kWass);
  EXPECT_EQ(cfg.bounds[4].request.wass.envelope, EnvelopeMode::kSoundOuter);
  ASSERT_TRUE(cfg.verify.tightness.has_value());
  EXPECT_EQ(cfg.verify.tightness->K, (std::vector<std::size_t>{5, 10}));
}

TEST(ConfigParse, SyntaxErrorsCarryLineNumbers) {
  const std::string text = "{\n  \"seed\": 1,\n  \"world\": {,\n}\n";
  try {
    parse_config(text, "bad.json");
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(std::string(e.what()).rfind("bad.json:3:", 0), 0u) << e.what();
  }
}

TEST(ConfigParse, SchemaErrorsPointAtTheKey) {
  json j = small_json();
  j["clients"]["K"] = 0;
  const std::string text = j.dump(2);
  const std::size_t line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(text.find("\"K\": 0")), '\n');
  try {
    parse_config(text, "k0.json");
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    EXPECT_EQ(msg.rfind("k0.json:" + std::to_string(line) + ":", 0), 0u) << msg;
    EXPECT_NE(msg.find("clients.K"), std::string::npos) << msg;
  }
}

TEST(ConfigParse, RejectsInconsistentRequests) {
  auto expect_error = [](json j, const std::string& needle) {
    try {
      parse_config(j.dump(2), "c.json");
      ADD_FAILURE() << "expected an error mentioning " << needle;
    } catch (const ConfigError& e) {
      EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
    }
  };
  json j = small_json();
  j["bounds"][0]["shift"] = {{"kind", "fdiv"}};
  expect_error(j, "bounds[0].shift");
  j = small_json();
  j["bounds"][2]["shift"]["amount"] = 0.5;
  expect_error(j, "bounds[2].shift");
  j = small_json();
  j["bounds"][4]["epsilon"] = 0.0;
  expect_error(j, "bounds[4]");
  j = small_json();
  j["bounds"][0]["delta"] = 1.5;
  expect_error(j, "bounds[0].delta");
  j = small_json();
  j["colour"] = "blue";
  expect_error(j, "colour");
  j = small_json();
  j["model"]["dims"]["d"] = 3;
  expect_error(j, "model");
  j = small_json();
  j["bounds"][1]["name"] = "mean";
  expect_error(j, "bounds[1].name");
  j = small_json();
  j["verify"]["tightness"]["K"] = {10, 5};
  expect_error(j, "verify.tightness");
}

TEST(ConfigParse, OverridesApply) {
  RunOptions o;
  o.seed = 99;
  o.trials = 2;
  o.out = "/tmp/elsewhere";
  const ExperimentConfig cfg = apply_overrides(load_config(kSmall), o);
  EXPECT_EQ(cfg.seed, 99u);
  EXPECT_EQ(cfg.world.seed, 99u);
  EXPECT_EQ(cfg.verify.trials, 2u);
  EXPECT_EQ(cfg.verify.tightness->trials, 2u);
  EXPECT_EQ(cfg.output_dir, fs::path("/tmp/elsewhere"));
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fctest::scratch_dir("cli_codes");
  EXPECT_EQ(fctest::run(cli("certify --config " + (dir / "missing.json").string())), 1);
  EXPECT_EQ(fctest::run(cli("")), 1);
  EXPECT_EQ(fctest::run(cli("--help")), 0);
  json j = small_json();
  j["clients"]["K"] = 0;
  EXPECT_EQ(fctest::run(cli("certify --config " + write_config(dir, "k0.json", j).string())), 1);

  j = small_json();
  j["clients"]["max_queries"] = 1;
  const fs::path out = dir / "budget";
  std::string text;
  EXPECT_EQ(fctest::run_capture(cli("certify -q --config " + write_config(dir, "b.json", j).string() +
                                    " --out " + out.string()),
                                text),
            3)
      << text;
  EXPECT_NE(text.find("client 0"), std::string::npos) << text;
  EXPECT_TRUE(fs::exists(out / "query_log.jsonl"));
}

TEST(Cli, SimulateIsDeterministicAndMatchesGolden) {
  const fs::path a = fctest::scratch_dir("sim_a"), b = fctest::scratch_dir("sim_b");
  ASSERT_EQ(fctest::run(cli("simulate -q --config " + kSmall.string() + " --out " + a.string())), 0);
  ASSERT_EQ(fctest::run(cli("simulate -q --jobs 3 --config " + kSmall.string() + " --out " + b.string())), 0);
  EXPECT_EQ(tree_listing(a / "world"), tree_listing(b / "world"));
  const json got = json::parse(fctest::slurp(a / "world" / "manifest.json"));
  const json want = json::parse(fctest::slurp(kGolden / "world" / "manifest.json"));
  EXPECT_TRUE(json_near(got, want, 1e-6));

  const fs::path c = fctest::scratch_dir("sim_c");
  ASSERT_EQ(fctest::run(cli("simulate -q --seed 8 --config " + kSmall.string() + " --out " + c.string())), 0);
  EXPECT_NE(fctest::slurp(c / "world" / "manifest.json"), fctest::slurp(a / "world" / "manifest.json"));
}

TEST(Cli, CertifyMatchesGoldenAndIsByteStable) {
  const fs::path a = fctest::scratch_dir("cert_a"), b = fctest::scratch_dir("cert_b");
  for (const auto& dir : {a, b}) {
    ASSERT_EQ(fctest::run(cli("simulate -q --config " + kSmall.string() + " --out " + dir.string())), 0);
    ASSERT_EQ(fctest::run(cli("certify -q --config " + kSmall.string() + " --out " + dir.string())), 0);
  }
  EXPECT_EQ(tree_listing(a), tree_listing(b));
  for (const char* sub : {"certificates", "targets"}) {
    for (const auto& e : fs::directory_iterator(kGolden / sub)) {
      if (e.path().extension() != ".json") continue;
      const fs::path got = a / sub / e.path().filename();
      ASSERT_TRUE(fs::exists(got)) << got;
      EXPECT_TRUE(json_near(json::parse(fctest::slurp(got)), json::parse(fctest::slurp(e.path())), 1e-6))
          << e.path();
    }
  }
  for (const auto& e : fs::directory_iterator(kGolden / "curves"))
    EXPECT_EQ(fctest::slurp(a / "curves" / e.path().filename()).substr(0, 13), "lambda,bound\n");

  // Certificates record what was asked and what world answered.
  const json cert = json::parse(fctest::slurp(a / "certificates" / "kl-mean.json"));
  EXPECT_EQ(cert.at("request").at("epsilon"), 0.05);
  EXPECT_EQ(cert.at("rng"), "mt19937_64+splitmix64/v1");
  EXPECT_EQ(cert.at("loss_clipping"), json::array({0.0, 1.0}));
  EXPECT_EQ(cert.at("world_digest").get<std::string>().size(), 16u);
  std::size_t lines = 0;
  std::ifstream log(a / "query_log.jsonl");
  for (std::string line; std::getline(log, line);) {
    const json entry = json::parse(line);
    EXPECT_TRUE(entry.contains("client"));
    ++lines;
  }
  EXPECT_GT(lines, 0u);
}

TEST(Cli, CertifyWithoutSimulateRegeneratesTheSameWorld) {
  const fs::path a = fctest::scratch_dir("cert_direct");
  ASSERT_EQ(fctest::run(cli("certify -q --config " + kSmall.string() + " --out " + a.string())), 0);
  const json got = json::parse(fctest::slurp(a / "certificates" / "mean.json"));
  const json want = json::parse(fctest::slurp(kGolden / "certificates" / "mean.json"));
  EXPECT_TRUE(json_near(got, want, 1e-6));
}

TEST(Cli, ZeroBudgetDivergenceReducesToNonRobust) {
  const fs::path dir = fctest::scratch_dir("eps0");
  json j = small_json();
  j["bounds"] = json::array({
      {{"name", "plain"}, {"kind", "mean"}, {"delta", 0.1}, {"slack_mode", "zero"}},
      {{"name", "robust"}, {"kind", "fdiv-mean"}, {"delta", 0.1}, {"epsilon", 0.0}, {"slack_mode", "zero"}},
  });
  j.erase("verify");
  ASSERT_EQ(fctest::run(cli("certify -q --config " + write_config(dir, "c.json", j).string() + " --out " +
                            (dir / "out").string())),
            0);
  const double plain = json::parse(fctest::slurp(dir / "out" / "certificates" / "plain.json"))["certificate"]["value"];
  const double robust = json::parse(fctest::slurp(dir / "out" / "certificates" / "robust.json"))["certificate"]["value"];
  EXPECT_NEAR(plain, robust, 1e-9);
}

TEST(Cli, VerifyWritesReports) {
  const fs::path out = fctest::scratch_dir("verify");
  std::string text;
  ASSERT_EQ(fctest::run_capture(cli("verify -q --trials 2 --config " + kSmall.string() + " --out " + out.string()), text),
            0)
      << text;
  const json summary = json::parse(fctest::slurp(out / "verify" / "summary.json"));
  ASSERT_EQ(summary.at("coverage").size(), 2u);
  EXPECT_TRUE(summary.at("passes").get<bool>());
  const json cov = json::parse(fctest::slurp(out / "verify" / "coverage_mean.json"));
  EXPECT_EQ(cov.at("trials"), 2);
  const std::string t = fctest::slurp(out / "verify" / "tightness.csv");
  EXPECT_EQ(t.substr(0, t.find('\n')).substr(0, 4), "K,n,");
}

TEST(Cli, EmitPlots) {
  const fs::path empty = fctest::scratch_dir("plots_empty");
  std::string text;
  EXPECT_EQ(fctest::run_capture(cli("emit-plots " + empty.string()), text), 1);
  EXPECT_NE(text.find("missing inputs"), std::string::npos) << text;

  const fs::path out = fctest::scratch_dir("plots");
  ASSERT_EQ(fctest::run(cli("certify -q --config " + kSmall.string() + " --out " + out.string())), 0);
  // A missing target file is named in the error.
  fs::rename(out / "targets" / "cdf.csv", out / "cdf.csv.bak");
  EXPECT_EQ(fctest::run_capture(cli("emit-plots " + out.string()), text), 1);
  EXPECT_NE(text.find("cdf.csv"), std::string::npos) << text;
  fs::rename(out / "cdf.csv.bak", out / "targets" / "cdf.csv");

  ASSERT_EQ(fctest::run(cli("emit-plots -q " + out.string())), 0);
  const std::string curve = fctest::slurp(out / "plots" / "chi2-cdf.csv");
  EXPECT_EQ(curve.substr(0, curve.find('\n')), "lambda,empirical_cdf,bound,kind");
  EXPECT_NE(curve.find("fdiv-cdf/chi-square"), std::string::npos);
  const std::string means = fctest::slurp(out / "plots" / "means.csv");
  EXPECT_EQ(means.substr(0, means.find('\n')), "name,kind,empirical_mean,bound");
  EXPECT_NE(means.find("wass-mean,wass-mean,"), std::string::npos);

  // A tampered curve that falls below the target is caught.
  std::string tampered = fctest::slurp(out / "curves" / "cdf.csv");
  std::string fixed = "lambda,bound\n";
  std::istringstream in(tampered);
  std::string line;
  std::getline(in, line);
  while (std::getline(in, line)) fixed += line.substr(0, line.find(',')) + ",0\n";
  fctest::spit(out / "curves" / "cdf.csv", fixed);
  EXPECT_EQ(fctest::run(cli("emit-plots -q " + out.string())), 2);
}

TEST(Cli, CsvPoolsReproduceTheSimulatedNetwork) {
  const fs::path dir = fctest::scratch_dir("pools");
  ASSERT_EQ(fctest::run(cli("simulate -q --config " + kSmall.string() + " --out " + (dir / "sim").string())), 0);
  json j = small_json();
  json pools = json::array();
  for (int k = 0; k < 8; ++k) {
    const std::string name = fmt::format("pool_{}.csv", k);
    fs::copy_file(dir / "sim" / "world" / fmt::format("client_{:05d}.csv", k), dir / name);
    pools.push_back(name);
  }
  j["pools"] = pools;
  const fs::path config = write_config(dir, "pools.json", j);
  ASSERT_EQ(fctest::run(cli("certify -q --config " + config.string() + " --out " + (dir / "out").string())), 0);
  for (const char* name : {"mean", "kl-mean", "wass-mean"}) {
    const json got = json::parse(fctest::slurp(dir / "out" / "certificates" / (std::string(name) + ".json")));
    const json want = json::parse(fctest::slurp(kGolden / "certificates" / (std::string(name) + ".json")));
    EXPECT_EQ(got["certificate"]["value"], want["certificate"]["value"]) << name;
  }
  const json cert = json::parse(fctest::slurp(dir / "out" / "certificates" / "mean.json"));
  const json golden = json::parse(fctest::slurp(kGolden / "certificates" / "mean.json"));
  EXPECT_NE(cert["world_digest"], golden["world_digest"]);

  j["clients"]["K"] = 7;
  EXPECT_THROW(parse_config(j.dump(2), dir / "k7.json"), ConfigError);
  j["clients"]["K"] = 8;
  j["pools"][3] = "absent.csv";
  try {
    parse_config(j.dump(2), dir / "absent.json");
    FAIL() << "expected a ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("absent.csv"), std::string::npos) << e.what();
  }
}

namespace {

// Every closed object in the schema, paired with a location in small.json where the parser reads it.
const std::map<std::string, std::string> kSchemaSites = {
    {"", ""},
    {"/properties/clients", "/clients"},
    {"/properties/target", "/target"},
    {"/properties/verify", "/verify"},
    {"/properties/verify/properties/tightness", "/verify/tightness"},
    {"/$defs/world", "/world"},
    {"/$defs/archetype", "/world/archetypes/0"},
    {"/$defs/grid/oneOf/1", "/bounds/1/lambda_grid"},
    {"/$defs/shift", "/bounds/2/shift"},
    {"/$defs/bound", "/bounds/0"},
};

void closed_objects(const json& node, const std::string& pointer, std::set<std::string>& out) {
  if (node.is_object()) {
    if (node.value("additionalProperties", true) == false) out.insert(pointer);
    for (const auto& [key, child] : node.items()) closed_objects(child, pointer + "/" + key, out);
  } else if (node.is_array()) {
    for (std::size_t i = 0; i < node.size(); ++i) closed_objects(node[i], pointer + "/" + std::to_string(i), out);
  }
}

json placeholder(const json& prop) {
  if (prop.contains("default")) return prop.at("default");
  if (prop.contains("enum")) return prop.at("enum").front();
  const std::string type = prop.value("type", "object");
  if (type == "string") return "x";
  if (type == "number") return 0.5;
  if (type == "integer") return 1;
  if (type == "array") return json::array();
  return json::object();
}

std::string parse_error(const json& j) {
  try {
    parse_config(j.dump(2), kSmall);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(ConfigSchema, EveryClosedObjectHasATestSite) {
  const json schema = json::parse(fctest::slurp(kSource / "configs" / "schema.json"));
  std::set<std::string> closed;
  closed_objects(schema, "", closed);
  std::set<std::string> mapped;
  for (const auto& [site, _] : kSchemaSites) mapped.insert(site);
  EXPECT_EQ(closed, mapped);
}

TEST(ConfigSchema, ParserAgreesWithSchemaProperties) {
  const json schema = json::parse(fctest::slurp(kSource / "configs" / "schema.json"));
  const json base = small_json();
  ASSERT_EQ(parse_error(base), "");
  for (const auto& [site, location] : kSchemaSites) {
    const json node = schema.at(json::json_pointer(site));
    const json::json_pointer where(location);
    ASSERT_TRUE(base.contains(where)) << location;

    json stray = base;
    stray[where]["not_an_option"] = 1;
    EXPECT_NE(parse_error(stray).find("not_an_option: unknown key"), std::string::npos) << location;

    for (const auto& [key, prop] : node.at("properties").items()) {
      json with = base;
      if (!with[where].contains(key)) with[where][key] = placeholder(prop);
      const std::string err = parse_error(with);
      EXPECT_EQ(err.find("unknown key"), std::string::npos) << location << "/" << key << ": " << err;
    }
  }
}
