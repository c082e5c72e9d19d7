#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dimcert/inequalities.hpp"
#include "dimcert/sdp.hpp"

namespace dimcert {

// Alternating maximization of a functional: preparations and measurements
// are each optimal for the other via a single SDP per half step, so the
// objective is non-decreasing within a restart. Random projective restarts
// are the escape hatch from local optima.

struct SeesawConfig {
  int dim = 4;  // Hilbert space; PPT additionally needs the 2x2 split
  int restarts = 50;
  int convergence_window = 10;  // consecutive half-step values that must agree
  double value_tol = 1e-7;
  int max_alternations = 500;
  std::uint64_t master_seed = 1;
  // Nonempty: every restart starts from these POVMs instead of random ones.
  std::vector<Povm> initial_measurements;
};

struct SeesawRecord {
  int restart = 0;
  std::uint64_t seed = 0;
  std::vector<double> values;  // one per half-step SDP, preparation step first
  double final_value = -std::numeric_limits<double>::infinity();
  int alternations = 0;
  std::string termination;  // "converged", "alternation-limit", "failed: ..."
  Assemblage preparations;
  std::vector<Povm> measurements;
};

struct SeesawResult {
  int best_restart = -1;  // highest final value, ties to the lowest index
  std::vector<SeesawRecord> records;

  const SeesawRecord& best() const;
};

// Options for the inner solves; their accuracy sits well below value_tol,
// so the convergence window never reacts to solver noise.
SdpOptions seesaw_sdp_options();

struct PreparationOptimum {
  Assemblage preparations;
  double value = 0.0;
};

// Maximizes the functional over assemblages sharing a unit-trace reduced
// state. With ppt set, each state must also have a positive partial
// transpose across the 2x2 factorization, which confines the search to
// separable preparations in dimension 4.
PreparationOptimum optimize_preparations(
    const InequalityFunctional& f, const std::vector<Povm>& measurements,
    bool ppt, const SdpOptions& options = seesaw_sdp_options());

struct MeasurementOptimum {
  std::vector<Povm> measurements;
  double value = 0.0;
};

// Maximizes the functional over POVM sets for fixed preparations.
MeasurementOptimum optimize_measurements(
    const InequalityFunctional& f, const Assemblage& preparations,
    const SdpOptions& options = seesaw_sdp_options());

// Full restart sweep. Restart r derives its seed from (master_seed, r), so
// results are reproducible bit for bit. A restart whose solve fails is
// recorded with termination "failed: ..." and skipped in the ranking; only
// all restarts failing is an error.
SeesawResult run_seesaw(const InequalityFunctional& f,
                        const SeesawConfig& config, bool ppt);

}  // namespace dimcert
