#include <cstdio>
#include <filesystem>
#include <string>
#include <variant>

#include "CLI11.hpp"

#include "dimcert/errors.hpp"
#include "dimcert/io.hpp"

using namespace dimcert;

namespace {

int exit_code_for(const CertificationVerdict& verdict) {
  if (verdict.certified_min_dimension >= 4) return 13;
  if (verdict.certified_min_dimension >= 3) return 12;
  return verdict.contextual ? 11 : 10;
}

void print_verdict(const CertificationVerdict& v) {
  std::printf("functional        %s\n", v.functional.c_str());
  std::printf("value             %.10g\n", v.value);
  std::printf("adjusted          %.10g  (value - %g sigma, sigma = %g)\n",
              v.adjusted, v.k_sigma, v.std_error);
  std::printf("contextual        %s\n", v.contextual ? "yes" : "no");
  std::printf("min dimension     %d\n", v.certified_min_dimension);
  for (const std::string& line : v.crossed)
    std::printf("crossed           %s\n", line.c_str());
}

int cmd_bounds(const std::string& functional) {
  const FunctionalBounds& bounds = bounds_for(functional);
  std::printf("%s\n", bounds.functional.c_str());
  std::printf("  noncontextual bound  %.10g   [%s]\n",
              bounds.noncontextual_bound,
              bounds.noncontextual_provenance.c_str());
  for (const DimensionThreshold& t : bounds.thresholds)
    std::printf("  dimension >= %d above %.10g   [%s]\n",
                t.min_dimension_if_exceeded, t.value, t.provenance.c_str());
  std::printf("  quantum maximum      %.10g   [%s]\n", bounds.quantum_maximum,
              bounds.quantum_provenance.c_str());
  return 0;
}

int cmd_certify(const std::string& path, const std::string& functional,
                double std_error, double k_sigma, const std::string& column,
                double tolerance, bool allow_missing, bool joint,
                const std::string& report_path) {
  const std::string text = read_file(path);
  const nlohmann::json probe = parse_json(text, path);
  const std::string format =
      probe.contains("format") && probe.at("format").is_string()
          ? probe.at("format").get<std::string>()
          : "";

  const InequalityFunctional f = functional_by_name(functional);
  double value = 0.0;
  if (format == "chsh-terms/1") {
    if (functional != "chsh")
      throw ParseError(path, 0, "term files hold correlator data; use --functional chsh");
    value = ingest_chsh_terms(text, path, table_column_from_name(column));
  } else {
    IngestOptions options;
    options.column = table_column_from_name(column);
    options.tolerance = tolerance;
    options.allow_missing = allow_missing;
    options.force_joint = joint;
    value = f.value(ingest_behavior(text, path, options));
  }

  CertificationReport report;
  report.verdict = certify(functional, value, std_error, k_sigma);
  report.inputs_digest = fnv1a_digest(text);
  report.timestamp = iso_timestamp_utc();
  print_verdict(report.verdict);
  if (!report_path.empty()) {
    write_file_atomic(report_path, serialize_report(report));
    std::printf("report written to %s\n", report_path.c_str());
  }
  return exit_code_for(report.verdict);
}

int cmd_canonical(const std::string& name, const std::string& emit_path) {
  CanonicalSetup setup;
  std::string functional;
  if (name == "optimal") {
    setup = canonical_cglmp4_entangled();
    functional = "cglmp4";
  } else if (name == "separable") {
    setup = canonical_cglmp4_separable();
    functional = "cglmp4";
  } else if (name == "chsh") {
    setup = canonical_chsh();
    functional = "chsh";
  } else {
    throw CLI::ValidationError("--setup must be optimal, separable, or chsh");
  }
  const InequalityFunctional f = functional_by_name(functional);
  const double value =
      f.value(behavior_from(setup.preparations, setup.measurements));
  std::printf("%s %s value %.10f\n", name.c_str(), functional.c_str(), value);
  if (!emit_path.empty()) {
    write_file_atomic(emit_path,
                      serialize_canonical_setup(setup, name, functional, value));
    std::printf("setup written to %s\n", emit_path.c_str());
  }
  return 0;
}

int cmd_seesaw(bool ppt, int restarts, std::uint64_t seed,
               const std::string& out_dir) {
  SeesawConfig config;
  config.restarts = restarts;
  config.master_seed = seed;
  const InequalityFunctional f = cglmp4_functional();
  const SeesawResult result = run_seesaw(f, config, ppt);
  const SeesawRecord& best = result.best();
  std::printf("best value %.10f (restart %d, %d alternations, %s)\n",
              best.final_value, best.restart, best.alternations,
              best.termination.c_str());
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);
    for (const SeesawRecord& record : result.records) {
      char name[32];
      std::snprintf(name, sizeof name, "restart_%03d.json", record.restart);
      write_file_atomic(dir / name, serialize_seesaw_record(record));
    }
    write_file_atomic(dir / "summary.json",
                      serialize_seesaw_summary(result, config, ppt));
    std::printf("records written to %s\n", out_dir.c_str());
  }
  return 0;
}

Behavior behavior_of_setup(const SimulationSetup& setup) {
  if (std::holds_alternative<CglmpSetup>(setup.device))
    return predict_behavior(std::get<CglmpSetup>(setup.device));
  return predict_behavior(std::get<ChshSetup>(setup.device));
}

int cmd_simulate(const std::string& setup_path, const std::string& out_path) {
  const SimulationSetup setup =
      load_setup(read_file(setup_path), setup_path);
  const Behavior behavior = behavior_of_setup(setup);
  const InequalityFunctional f = functional_by_name(setup.functional);
  std::printf("%s value %.10f\n", setup.functional.c_str(), f.value(behavior));
  const std::string serialized = serialize_behavior(
      behavior, {{"source", "simulated"}, {"setup", setup_path}});
  if (!out_path.empty()) {
    write_file_atomic(out_path, serialized);
    std::printf("behavior written to %s\n", out_path.c_str());
  } else {
    std::fputs(serialized.c_str(), stdout);
  }
  return 0;
}

int cmd_montecarlo(const std::string& setup_path, int samples,
                   std::uint64_t seed, const std::string& out_path) {
  const SimulationSetup setup =
      load_setup(read_file(setup_path), setup_path);
  MonteCarloReport report;
  if (std::holds_alternative<CglmpSetup>(setup.device))
    report = monte_carlo(std::get<CglmpSetup>(setup.device), setup.noise,
                         samples, seed);
  else
    report = monte_carlo(std::get<ChshSetup>(setup.device), setup.noise,
                         samples, seed);
  std::printf("noiseless %.10f\n", report.noiseless_value);
  std::printf("mean      %.10f\n", report.mean);
  std::printf("std       %.10f\n", report.std_dev);
  for (double p : {5.0, 25.0, 50.0, 75.0, 95.0})
    std::printf("p%02.0f       %.10f\n", p, report.percentile(p));
  if (!out_path.empty()) {
    write_file_atomic(
        out_path,
        serialize_monte_carlo(report, setup.functional, samples, seed));
    std::printf("report written to %s\n", out_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimension certification from contextuality data"};
  app.require_subcommand(1);

  std::string bounds_functional;
  CLI::App* bounds_cmd =
      app.add_subcommand("bounds", "Print the bound registry for a functional");
  bounds_cmd->add_option("functional", bounds_functional, "cglmp4 or chsh")
      ->required();

  std::string certify_file, certify_functional = "cglmp4";
  std::string certify_column = "value", certify_report;
  double certify_stderr = 0.0, certify_k = 1.0, certify_tolerance = -1.0;
  bool certify_allow_missing = false, certify_joint = false;
  CLI::App* certify_cmd = app.add_subcommand(
      "certify", "Evaluate a behavior file and certify a minimal dimension");
  certify_cmd->add_option("behavior", certify_file, "behavior or term file")
      ->required();
  certify_cmd->add_option("--functional", certify_functional, "cglmp4 or chsh");
  certify_cmd->add_option("--stderr", certify_stderr,
                          "one-sigma uncertainty on the value");
  certify_cmd->add_option("--k", certify_k, "sigmas subtracted before certifying");
  certify_cmd->add_option("--column", certify_column,
                          "value column: value, expected, or measured");
  certify_cmd->add_option("--tolerance", certify_tolerance,
                          "normalization/no-signaling tolerance "
                          "(default 0.05 measured, 1e-3 otherwise)");
  certify_cmd->add_flag("--allow-missing", certify_allow_missing,
                        "accept tables that only cover the functional's support");
  certify_cmd->add_flag("--joint", certify_joint,
                        "read entries as joint p(a,b|x,y) instead of conditional");
  certify_cmd->add_option("--report", certify_report,
                          "write a structured report here");

  std::string canonical_name, canonical_emit;
  CLI::App* canonical_cmd = app.add_subcommand(
      "canonical", "Evaluate a built-in setup and optionally export it");
  canonical_cmd->add_option("--setup", canonical_name,
                            "optimal, separable, or chsh")
      ->required();
  canonical_cmd->add_option("--emit", canonical_emit, "write operators here");

  bool seesaw_ppt = false;
  int seesaw_restarts = 50;
  std::uint64_t seesaw_seed = 1;
  std::string seesaw_out;
  CLI::App* seesaw_cmd = app.add_subcommand(
      "seesaw", "Alternating optimization of the four-outcome functional");
  seesaw_cmd->add_flag("--ppt", seesaw_ppt, "restrict preparations to PPT states");
  seesaw_cmd->add_option("--restarts", seesaw_restarts, "random restarts");
  seesaw_cmd->add_option("--seed", seesaw_seed, "master seed");
  seesaw_cmd->add_option("--out", seesaw_out, "directory for run records");

  std::string simulate_setup, simulate_out;
  CLI::App* simulate_cmd =
      app.add_subcommand("simulate", "Predict the behavior of a setup file");
  simulate_cmd->add_option("--setup", simulate_setup, "setup file")->required();
  simulate_cmd->add_option("--out", simulate_out,
                           "write the behavior here instead of stdout");

  std::string mc_setup, mc_out;
  int mc_samples = 1000;
  std::uint64_t mc_seed = 1;
  CLI::App* mc_cmd = app.add_subcommand(
      "montecarlo", "Noise budget of a setup file under its noise model");
  mc_cmd->add_option("--setup", mc_setup, "setup file")->required();
  mc_cmd->add_option("--samples", mc_samples, "sample count");
  mc_cmd->add_option("--seed", mc_seed, "sample-stream seed");
  mc_cmd->add_option("--out", mc_out, "write a structured report here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bounds_cmd) return cmd_bounds(bounds_functional);
    if (*certify_cmd)
      return cmd_certify(certify_file, certify_functional, certify_stderr,
                         certify_k, certify_column, certify_tolerance,
                         certify_allow_missing, certify_joint, certify_report);
    if (*canonical_cmd) return cmd_canonical(canonical_name, canonical_emit);
    if (*seesaw_cmd)
      return cmd_seesaw(seesaw_ppt, seesaw_restarts, seesaw_seed, seesaw_out);
    if (*simulate_cmd) return cmd_simulate(simulate_setup, simulate_out);
    if (*mc_cmd) return cmd_montecarlo(mc_setup, mc_samples, mc_seed, mc_out);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const NumericalError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
