#include "msid/config.hpp"
#include "msid/run.hpp"

#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace msid;
using nlohmann::json;

namespace {

const std::filesystem::path kConfigDir = MSID_CONFIG_DIR;

json base() {
  return json::parse(R"({
    "command": "estimate",
    "data": {"generator": "logistic", "theta": 3.78, "x0": 0.5, "n": 50},
    "formulation": {"type": "multiple", "max_len": 5}
  })");
}

// Field path reported for `doc`, or "" when it parses.
std::string error_field(const json& doc, const std::string& profile = "desk") {
  try {
    parse_config(doc, profile);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

std::vector<std::filesystem::path> bundled_configs() {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(kConfigDir))
    if (e.path().extension() == ".json") out.push_back(e.path());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("minimal document and defaults") {
  const RunConfig c = parse_config(base());
  CHECK(c.command == "estimate");
  CHECK(c.seed == 1);
  CHECK(std::holds_alternative<LogisticMap>(c.model));
  REQUIRE(std::holds_alternative<MultipleSpec>(c.formulation));
  CHECK(std::get<MultipleSpec>(c.formulation).max_len == 5);
  CHECK(c.echo.at("profile") == "desk");
  CHECK(c.solver.kkt_tol == 1e-8);
}

TEST_CASE("unknown fields are reported with their dotted path") {
  json d = base();
  d["colour"] = "red";
  CHECK(error_field(d) == "colour");
  d = base();
  d["formulation"]["max_length"] = 3;
  CHECK(error_field(d) == "formulation.max_length");
  d = base();
  d["solver"] = {{"kkt_toll", 1e-6}};
  CHECK(error_field(d) == "solver.kkt_toll");
  d = base();
  d["model"] = json::parse(R"({"family": "polynomial", "kind": "narx",
                               "terms": [[{"signal": "y", "lag": 1}], [{"signal": "u", "lag": 1, "pow": 2}]]})");
  CHECK(error_field(d) == "model.terms[1][0].pow");
}

TEST_CASE("formulation validation") {
  json d = base();
  SUBCASE("duplicated boundary") {
    d["formulation"] = {{"type", "multiple"}, {"boundaries", {0, 10, 10, 50}}};
    CHECK(error_field(d) == "formulation.boundaries[2]");
  }
  SUBCASE("boundaries must start at 0") {
    d["formulation"] = {{"type", "multiple"}, {"boundaries", {1, 50}}};
    CHECK(error_field(d) == "formulation.boundaries[0]");
  }
  SUBCASE("boundaries must cover the data") {
    d["formulation"] = {{"type", "multiple"}, {"boundaries", {0, 20, 40}}};
    CHECK_FALSE(error_field(d).empty());
  }
  SUBCASE("K below one") {
    d["formulation"] = {{"type", "msa"}, {"k", 0}};
    CHECK(error_field(d) == "formulation.k");
  }
  SUBCASE("max_len below one") {
    d["formulation"] = {{"type", "multiple"}, {"max_len", 0}};
    CHECK(error_field(d) == "formulation.max_len");
  }
  SUBCASE("unknown type") {
    d["formulation"] = {{"type", "collocation"}};
    CHECK(error_field(d) == "formulation.type");
  }
  SUBCASE("incremental MSA") {
    d["formulation"] = {{"type", "msa"}, {"incremental", true}, {"k_max", 4}};
    const RunConfig c = parse_config(d);
    CHECK(std::get<MsaSpec>(c.formulation).incremental);
    CHECK(std::get<MsaSpec>(c.formulation).k_max == 4);
  }
}

TEST_CASE("type and range errors") {
  json d = base();
  d["seed"] = "one";
  CHECK(error_field(d) == "seed");
  d = base();
  d["solver"] = {{"eta", 1.5}};
  CHECK(error_field(d) == "solver.eta");
  d = base();
  d["command"] = "fly";
  CHECK(error_field(d) == "command");
  d = base();
  d.erase("data");
  CHECK(error_field(d) == "data");
  d = base();
  d["model"] = {{"family", "pendulum"}, {"delta", -0.1}};
  CHECK(error_field(d) == "model.delta");
}

TEST_CASE("cross-field checks") {
  json d = base();
  d["command"] = "study";
  CHECK(error_field(d) == "study");
  d = base();
  d["command"] = "smoothness";
  CHECK(error_field(d) == "smoothness");
  d = base();
  d["initial"] = {{"theta", {1.0, 2.0}}};
  CHECK(error_field(d) == "initial.theta");
}

TEST_CASE("profiles") {
  json d = base();
  d["profiles"] = {{"paper", {{"data", {{"n", 200}}}}}};
  const RunConfig desk = parse_config(d, "desk");
  const RunConfig paper = parse_config(d, "paper");
  CHECK(std::get<LogisticSpec>(std::get<GeneratorSpec>(desk.data)).n == 50);
  CHECK(std::get<LogisticSpec>(std::get<GeneratorSpec>(paper.data)).n == 200);
  CHECK(paper.echo.at("profile") == "paper");
  CHECK_FALSE(paper.echo.contains("profiles"));
  d["profiles"]["huge"] = json::object();
  CHECK(error_field(d) == "profiles.huge");
  // Overrides are validated like everything else.
  json bad = base();
  bad["profiles"] = {{"paper", {{"formulation", {{"max_len", -2}}}}}};
  CHECK(error_field(bad, "desk").empty());
  CHECK(error_field(bad, "paper") == "formulation.max_len");
}

TEST_CASE("files") {
  CHECK_THROWS_AS(load_config(kConfigDir / "missing.json"), MissingFileError);
  const auto p = std::filesystem::temp_directory_path() / "msid_bad.json";
  std::ofstream(p) << "{ \"command\": ";
  CHECK_THROWS_AS(load_config(p), ConfigError);
}

TEST_CASE("every bundled configuration validates under both profiles") {
  const auto configs = bundled_configs();
  CHECK(configs.size() >= 14);
  for (const auto& path : configs) {
    for (const std::string profile : {"desk", "paper"}) {
      CAPTURE(path.filename().string());
      CAPTURE(profile);
      RunOptions o;
      o.config_path = path;
      o.profile = profile;
      std::ostringstream out, err;
      CHECK(validate(o, out, err) == exit_ok);
      CHECK(err.str().empty());
    }
  }
}
