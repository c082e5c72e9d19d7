#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "dimcert/io.hpp"
#include "doctest.h"

// End-to-end runs of the installed command-line binary.

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout and stderr combined
};

const fs::path& scratch_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "dimcert_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  static int counter = 0;
  const fs::path capture = scratch_dir() / ("out_" + std::to_string(counter++));
  const std::string command = std::string(DIMCERT_CLI_PATH) + " " + args +
                              " > " + capture.string() + " 2>&1";
  const int raw = std::system(command.c_str());
  RunResult result;
  result.exit_code = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  result.output = dimcert::read_file(capture);
  return result;
}

std::string fixture(const std::string& name) {
  return (fs::path(DIMCERT_DATA_DIR) / name).string();
}

bool contains(const std::string& text, const std::string& needle) {
  return text.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("bounds subcommand prints the registry") {
  const RunResult result = run_cli("bounds cglmp4");
  CHECK(result.exit_code == 0);
  CHECK(contains(result.output, "noncontextual bound"));
  CHECK(contains(result.output, "dimension >= 3"));
  CHECK(contains(result.output, "0.315"));
  CHECK(contains(result.output, "quantum maximum"));

  CHECK(run_cli("bounds chsh").exit_code == 0);
  CHECK(run_cli("bounds nonsense").exit_code == 2);
  CHECK(run_cli("bounds").exit_code != 0);
}

TEST_CASE("canonical subcommand evaluates built-in setups") {
  const RunResult optimal = run_cli("canonical --setup optimal");
  CHECK(optimal.exit_code == 0);
  CHECK(contains(optimal.output, "0.3647618502"));

  const RunResult separable = run_cli("canonical --setup separable");
  CHECK(separable.exit_code == 0);
  CHECK(contains(separable.output, "0.3360912069"));

  const RunResult chsh = run_cli("canonical --setup chsh");
  CHECK(chsh.exit_code == 0);
  CHECK(contains(chsh.output, "2.8284271247"));

  const fs::path emitted = scratch_dir() / "canonical_chsh.json";
  const RunResult emit =
      run_cli("canonical --setup chsh --emit " + emitted.string());
  CHECK(emit.exit_code == 0);
  const nlohmann::json file =
      dimcert::parse_json(dimcert::read_file(emitted), "emitted");
  CHECK(file.at("format") == "canonical-setup/1");
}

TEST_CASE("certify grades archival tables") {
  const std::string common = " --column measured --allow-missing --tolerance 0.15";

  const RunResult strong =
      run_cli("certify " + fixture("entangled_run_table.json") + common);
  CHECK(strong.exit_code == 13);
  CHECK(contains(strong.output, "min dimension     4"));

  // An uncertainty window can drop the verdict below the top threshold.
  const RunResult windowed = run_cli("certify " +
                                     fixture("separable_run_table.json") +
                                     common + " --stderr 0.01");
  CHECK(windowed.exit_code == 12);
  CHECK(contains(windowed.output, "min dimension     3"));

  const RunResult washed = run_cli("certify " +
                                   fixture("separable_run_table.json") + common +
                                   " --stderr 1.0");
  CHECK(washed.exit_code == 10);
  CHECK(contains(washed.output, "contextual        no"));

  const RunResult terms = run_cli("certify " + fixture("chsh_correlators.json") +
                                  " --functional chsh --column measured");
  CHECK(terms.exit_code == 11);
  CHECK(contains(terms.output, "min dimension     2"));

  // Term files refuse the four-outcome functional.
  CHECK(run_cli("certify " + fixture("chsh_correlators.json") +
                " --column measured")
            .exit_code == 2);

  // Counting noise breaks normalization beyond the default tolerance.
  CHECK(run_cli("certify " + fixture("entangled_run_table.json") +
                " --column measured --allow-missing")
            .exit_code == 2);
}

TEST_CASE("certify writes a structured report") {
  const fs::path report_path = scratch_dir() / "report.json";
  const RunResult result = run_cli(
      "certify " + fixture("entangled_run_table.json") +
      " --column measured --allow-missing --tolerance 0.15 --stderr 0.0045" +
      " --report " + report_path.string());
  CHECK(result.exit_code == 13);
  const dimcert::CertificationReport report = dimcert::parse_report(
      dimcert::read_file(report_path), report_path.string());
  CHECK(report.verdict.functional == "cglmp4");
  CHECK(report.verdict.certified_min_dimension == 4);
  CHECK(report.verdict.adjusted == doctest::Approx(0.363050 - 0.0045).epsilon(1e-9));
  CHECK(report.inputs_digest.substr(0, 6) == "fnv1a:");
}

TEST_CASE("simulate feeds certify") {
  const fs::path behavior_path = scratch_dir() / "simulated.json";
  const RunResult sim = run_cli("simulate --setup " +
                                fixture("setup_sagnac_entangled.json") +
                                " --out " + behavior_path.string());
  CHECK(sim.exit_code == 0);
  CHECK(contains(sim.output, "cglmp4 value 0.3647"));

  const RunResult verdict = run_cli("certify " + behavior_path.string());
  CHECK(verdict.exit_code == 13);

  // Without --out the behavior lands on stdout.
  const RunResult inline_sim =
      run_cli("simulate --setup " + fixture("setup_chsh.json"));
  CHECK(inline_sim.exit_code == 0);
  CHECK(contains(inline_sim.output, "\"format\": \"behavior/1\""));
}

TEST_CASE("montecarlo writes a deterministic report") {
  const fs::path out_a = scratch_dir() / "mc_a.json";
  const fs::path out_b = scratch_dir() / "mc_b.json";
  const std::string base = "montecarlo --setup " +
                           fixture("setup_sagnac_entangled.json") +
                           " --samples 40 --seed 7 --out ";
  const RunResult first = run_cli(base + out_a.string());
  CHECK(first.exit_code == 0);
  CHECK(contains(first.output, "noiseless"));
  CHECK(contains(first.output, "std"));
  const RunResult second = run_cli(base + out_b.string());
  CHECK(second.exit_code == 0);
  CHECK(dimcert::read_file(out_a) == dimcert::read_file(out_b));

  const nlohmann::json report =
      dimcert::parse_json(dimcert::read_file(out_a), "mc");
  CHECK(report.at("format") == "montecarlo-report/1");
  CHECK(report.at("samples") == 40);
}

TEST_CASE("seesaw subcommand reports its best restart") {
  const fs::path out_dir = scratch_dir() / "seesaw_run";
  const RunResult result =
      run_cli("seesaw --restarts 2 --seed 5 --out " + out_dir.string());
  CHECK(result.exit_code == 0);
  CHECK(contains(result.output, "best value"));
  CHECK(fs::exists(out_dir / "restart_000.json"));
  CHECK(fs::exists(out_dir / "restart_001.json"));
  const nlohmann::json summary = dimcert::parse_json(
      dimcert::read_file(out_dir / "summary.json"), "summary");
  CHECK(summary.at("format") == "seesaw-summary/1");
  CHECK(summary.at("restarts") == 2);
}

TEST_CASE("failure modes map to distinct exit codes") {
  const fs::path garbled = scratch_dir() / "garbled.json";
  std::ofstream(garbled) << "{ not json";
  CHECK(run_cli("certify " + garbled.string()).exit_code == 2);
  CHECK(run_cli("certify " + (scratch_dir() / "missing.json").string())
            .exit_code == 2);
  CHECK(run_cli("nonsense").exit_code != 0);
  CHECK(run_cli("").exit_code != 0);
}
