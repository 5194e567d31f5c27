#include <algorithm>

#include "graded/errors.hpp"
#include "graded/manifest/executor.hpp"
#include "json.hpp"

namespace graded::manifest {

namespace {

using json = nlohmann::json;  // std::map objects, so keys come out sorted

std::string join_args(const std::vector<std::string>& args) {
  std::string s;
  for (const auto& a : args) s += (s.empty() ? "" : " ") + a;
  return s;
}

std::string render_text(const std::vector<CommandResult>& results) {
  std::string out;
  std::size_t failed = 0;
  for (const auto& r : results) {
    out += "== " + r.verb + " " + join_args(r.args) + " ==\n";
    for (const auto& [k, v] : r.values) out += "  " + k + " " + v + "\n";
    if (!r.report.checks.empty()) out += r.report.str();
    if (!out.empty() && out.back() != '\n') out += '\n';
    if (!r.error.empty()) out += "error: " + r.error + "\n";
    if (r.report.checks.empty() || !r.error.empty()) out += r.passed() ? "result: pass\n" : "result: FAIL\n";
    if (!r.passed()) ++failed;
  }
  out += "summary: " + std::to_string(results.size()) + " commands, " + std::to_string(failed) + " failed\n";
  return out;
}

json result_json(const CommandResult& r) {
  json checks = json::array();
  for (const auto& c : r.report.checks) {
    checks.push_back({{"detail", c.detail}, {"informational", c.informational}, {"name", c.name}, {"passed", c.passed}});
  }
  json values = json::array();
  for (const auto& [k, v] : r.values) values.push_back({{"name", k}, {"value", v}});
  json j = {{"args", r.args}, {"checks", checks}, {"command", r.verb}, {"passed", r.passed()}, {"values", values}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

RunOutput input_error(const InputError& e, std::string_view verb, const RunOptions& opts, std::string_view source) {
  RunOutput out;
  out.exit_code = 2;
  if (opts.dump) {
    nlohmann::json j = {{"command", std::string(verb)},
                        {"error",
                         {{"column", e.loc.column},
                          {"expected", std::vector<std::string>(e.expected.begin(), e.expected.end())},
                          {"line", e.loc.line},
                          {"message", e.message}}},
                        {"exit_code", 2},
                        {"manifest", std::string(source)}};
    out.text = j.dump(2) + "\n";
  } else {
    out.text = std::string(source) + ":" + e.what() + "\n";
  }
  return out;
}

}  // namespace

const std::vector<std::string>& known_verbs() {
  static const std::vector<std::string> v = {"print", "run",   "validate", "curvature", "gauge",   "act",
                                             "lift",  "project", "transform", "report",  "t2m",     "poisson",
                                             "tkm",   "dvb",   "properties"};
  return v;
}

RunOutput run_manifest(std::string_view text, std::string_view verb, const RunOptions& opts, std::string_view source) {
  const auto& verbs = known_verbs();
  if (std::find(verbs.begin(), verbs.end(), verb) == verbs.end()) {
    std::set<std::string> exp(verbs.begin(), verbs.end());
    return input_error(InputError({0, 0}, "unknown command '" + std::string(verb) + "'", exp), verb, opts, source);
  }
  try {
    Manifest m = parse_manifest(text);
    if (verb == "print") {
      RunOutput out;
      std::string printed = print_manifest(m);
      if (opts.dump) {
        nlohmann::json j = {{"command", "print"}, {"exit_code", 0}, {"manifest", std::string(source)}, {"text", printed}};
        out.text = j.dump(2) + "\n";
      } else {
        out.text = printed;
      }
      return out;
    }
    Session session(std::move(m));
    std::vector<CommandResult> results =
        verb == "properties" ? session.properties(opts.seed, opts.trials) : session.run(verb);
    RunOutput out;
    out.exit_code = std::all_of(results.begin(), results.end(), [](const CommandResult& r) { return r.passed(); }) ? 0 : 1;
    if (opts.dump) {
      json rs = json::array();
      for (const auto& r : results) rs.push_back(result_json(r));
      json j = {{"command", std::string(verb)}, {"exit_code", out.exit_code}, {"manifest", std::string(source)},
                        {"results", rs}};
      if (verb == "properties") j["seed"] = opts.seed;
      out.text = j.dump(2) + "\n";
    } else {
      out.text = render_text(results);
    }
    return out;
  } catch (const InputError& e) {
    return input_error(e, verb, opts, source);
  }
}

}  // namespace graded::manifest
