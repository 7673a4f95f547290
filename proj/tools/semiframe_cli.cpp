// Command-line driver for batch experiments.
//
//   semiframe run --spec PATH --out DIR [--tol X] [--seed N]
//   semiframe validate --spec PATH
//   semiframe examples --out DIR
//
// Exit codes: 0 success, 1 task failure or output error, 2 invalid spec.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "example_specs.hpp"
#include "semiframe/experiment.hpp"

namespace {

namespace sx = semiframe::experiment;
using semiframe::Error;
using semiframe::ErrorKind;

constexpr int kExitOk = 0;
constexpr int kExitTaskFailure = 1;
constexpr int kExitSpecError = 2;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cmd_validate(const std::string& spec_path) {
  try {
    const auto spec = sx::parse_spec(read_file(spec_path));
    std::cout << "valid: " << spec.families.size() << " families, " << spec.operators.size() << " operators, "
              << spec.tasks.size() << " tasks, " << spec.schedule.size() << " truncations\n";
    return kExitOk;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitSpecError;
  }
}

int cmd_run(const std::string& spec_path, const std::string& out_dir, std::optional<double> tol,
            std::optional<std::uint64_t> seed) {
  sx::ExperimentSpec spec;
  sx::RunOptions options;
  try {
    spec = sx::parse_spec(read_file(spec_path), seed);
    options.tol = tol ? *tol : sx::environment_tolerance();
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitSpecError;
  }
  const auto report = sx::run(spec, options);
  try {
    sx::emit(report, out_dir);
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kExitTaskFailure;
  }
  for (const auto& task : report.document["tasks"]) {
    std::cout << task["index"].get<std::size_t>() << " " << task["task"].get<std::string>() << " "
              << task["family"].get<std::string>() << ": " << task["status"].get<std::string>() << "\n";
  }
  std::cout << "wrote " << (std::filesystem::path(out_dir) / "report.json").string() << "\n";
  return report.any_failure ? kExitTaskFailure : kExitOk;
}

int cmd_examples(const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    std::cerr << "IoError: cannot create '" << out_dir << "': " << ec.message() << "\n";
    return kExitTaskFailure;
  }
  for (const auto& ex : semiframe_examples::kExampleSpecs) {
    const fs::path p = fs::path(out_dir) / ex.file;
    std::ofstream out(p, std::ios::binary | std::ios::trunc);
    out << ex.text;
    out.close();
    if (!out) {
      std::cerr << "IoError: cannot write '" << p.string() << "'\n";
      return kExitTaskFailure;
    }
    std::cout << "wrote " << p.string() << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-section diagnostics for frames and semi-frames"};
  app.require_subcommand(1);

  std::string spec_path, out_dir;
  double tol_value = 0.0;
  std::uint64_t seed_value = 0;

  auto* run = app.add_subcommand("run", "Run every task of an experiment spec");
  run->add_option("--spec", spec_path, "Experiment spec (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  auto* tol_opt = run->add_option("--tol", tol_value, "Default tolerance (overrides SEMIFRAME_TOL)")
                      ->check(CLI::PositiveNumber);
  auto* seed_opt = run->add_option("--seed", seed_value, "Seed for random probes (overrides the spec)");

  auto* validate = app.add_subcommand("validate", "Check an experiment spec");
  validate->add_option("--spec", spec_path, "Experiment spec (JSON)")->required();

  auto* examples = app.add_subcommand("examples", "Write the bundled example specs");
  examples->add_option("--out", out_dir, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitSpecError;
  }

  if (*run) {
    return cmd_run(spec_path, out_dir, *tol_opt ? std::optional<double>(tol_value) : std::nullopt,
                   *seed_opt ? std::optional<std::uint64_t>(seed_value) : std::nullopt);
  }
  if (*validate) return cmd_validate(spec_path);
  return cmd_examples(out_dir);
}
