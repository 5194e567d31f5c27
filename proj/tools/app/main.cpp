#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "graded/manifest/executor.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Graded bundle connections: check and evaluate manifests"};
  std::string path;
  std::string verb;
  graded::manifest::RunOptions opts;
  app.add_option("manifest", path, "manifest file, - for stdin")->required();
  app.add_option("command", verb, "print, run, validate, curvature, report, properties, t2m, poisson, tkm, dvb, ...")
      ->required();
  app.add_flag("--dump", opts.dump, "machine-readable JSON output");
  app.add_option("--seed", opts.seed, "seed for the properties command");
  app.add_option("--trials", opts.trials, "trials per object for the properties command")->check(CLI::Range(1, 1000));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  std::stringstream buf;
  if (path == "-") {
    buf << std::cin.rdbuf();
  } else {
    std::ifstream in(path);
    if (!in) {
      std::cerr << path << ": cannot open file\n";
      return 2;
    }
    buf << in.rdbuf();
  }
  auto out = graded::manifest::run_manifest(buf.str(), verb, opts, path == "-" ? "<stdin>" : path);
  (out.exit_code == 2 && !opts.dump ? std::cerr : std::cout) << out.text;
  return out.exit_code;
}
