#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "graded/manifest/parser.hpp"
#include "graded/report.hpp"

namespace graded::manifest {

struct CommandResult {
  std::string verb;
  std::vector<std::string> args;
  Report report;
  std::vector<std::pair<std::string, std::string>> values;  // rendered results, in output order
  std::string error;                                        // engine-reported mathematical failure

  bool passed() const { return error.empty() && report.passed(); }
};

class Model;

/// Semantic checks and the evaluated objects of a manifest.
class Session {
 public:
  /// InputError on unknown or duplicate names, weight mismatches and engine
  /// rejections of the declared data.
  explicit Session(Manifest m);
  ~Session();
  Session(Session&&) noexcept;
  Session& operator=(Session&&) noexcept;

  const Manifest& manifest() const;

  /// One statement. InputError for a target of the wrong kind.
  CommandResult execute(const Command& c) const;
  /// Commands selected by a CLI verb (see the README for the selection rules).
  std::vector<CommandResult> run(std::string_view verb) const;
  /// Randomised identities on every declared algebroid and connection.
  std::vector<CommandResult> properties(std::uint64_t seed, int trials) const;

 private:
  std::unique_ptr<Model> model_;
};

struct RunOptions {
  bool dump = false;
  std::uint64_t seed = 1;
  int trials = 3;
};

struct RunOutput {
  int exit_code = 0;  // 0 pass, 1 mathematical failure, 2 input error
  std::string text;
};

/// Parse, check and run `verb` on manifest text. Never throws for input problems.
RunOutput run_manifest(std::string_view text, std::string_view verb, const RunOptions& opts,
                       std::string_view source_name = "<input>");

/// Verbs accepted by run_manifest.
const std::vector<std::string>& known_verbs();

}  // namespace graded::manifest
