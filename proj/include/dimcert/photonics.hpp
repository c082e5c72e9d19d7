#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "dimcert/inequalities.hpp"

namespace dimcert {

// Jones-calculus model of the two optical set-ups: a Sagnac-style source
// preparing path/polarization ququarts, two-station projective analysis,
// qubit preparation and analysis by rotating half-wave plates, and the
// Monte-Carlo error budget of both.

enum class PlateKind { half, quarter };

// Wave-plate Jones matrix for a fast axis at `angle_rad`; the global phase
// is fixed so the H-to-H entry is real and non-negative.
CMatrix jones(PlateKind kind, double angle_rad);

// Sagnac interferometer output. Angles in degrees (they are plate settings),
// phases in radians. The prepared ket lives on basis index 2*path + pol:
// (1/sqrt2)(cos2a|0> + e^{i phi1} sin2a|1>)
//   + (e^{i pp}/sqrt2)(cos2b|2> + e^{i phi2} sin2b|3>).
struct PreparationParams {
  double alpha_deg = 0.0;
  double beta_deg = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  double path_phase = 0.0;
};

CVector sagnac_prepare(const PreparationParams& params);

struct FitResult {
  PreparationParams params;
  double residual = 0.0;   // 1 - |<target|prepared>|^2
  bool reachable = false;  // residual <= 1e-6
};

// Inverts sagnac_prepare for a normalized target ket: closed-form seed from
// the amplitude structure, then a deterministic multi-start simplex polish.
// States with unbalanced path weight are outside the family and come back
// with a large residual rather than an error.
FitResult fit_preparation(const CVector& target);

// Analysis station: the two paths recombine on a 50/50 splitter (reflection
// phase i) after the second path picks up loop_phase, then each output port
// passes a QWP and an HWP into a polarizing splitter. `wiring` says which
// outcome the detector at (2*port + pol) announces.
struct StationSetting {
  double qwp_a_deg = 0.0;  // port-1 plates
  double hwp_a_deg = 0.0;
  double qwp_b_deg = 0.0;  // port-0 plates
  double hwp_b_deg = 0.0;
  double loop_phase = 0.0;  // radians
  std::array<int, 4> wiring{0, 1, 2, 3};
};

Povm station_povm(const StationSetting& setting);

enum class DeviceClass { manual, motorized };
enum class NoiseDistribution { gaussian, uniform };

// Angle jitter plus counting statistics. Sigmas are the stated setting
// precisions per device class; counts_per_setting is the expected number of
// coincidences collected for one (preparation, measurement-setting) pair.
struct NoiseModel {
  NoiseDistribution distribution = NoiseDistribution::gaussian;
  double manual_sigma_deg = 0.5;
  double motorized_sigma_deg = 0.1;
  double counts_per_setting = 0.0;
  bool poisson = true;

  double sigma_deg(DeviceClass device) const;
};

// Four-outcome experiment: preparations[x][a] and one station per y.
struct CglmpSetup {
  std::vector<std::vector<PreparationParams>> preparations;
  std::vector<StationSetting> stations;
  DeviceClass preparation_class = DeviceClass::manual;
  DeviceClass station_class = DeviceClass::manual;
};

// Correlator experiment: prepared and analyzed by single half-wave plates,
// ket(theta) = (cos2theta, sin2theta) and a polarizing splitter behind the
// analysis plate.
struct ChshSetup {
  std::vector<std::vector<double>> prep_hwp_deg;  // [x][a]
  std::vector<double> meas_hwp_deg;               // [y]
  DeviceClass preparation_class = DeviceClass::motorized;
  DeviceClass measurement_class = DeviceClass::motorized;
};

// Plate settings that realize the canonical setups of module inequalities.
CglmpSetup entangled_cglmp_setup();
CglmpSetup separable_cglmp_setup();
ChshSetup canonical_chsh_setup();

Behavior predict_behavior(const std::vector<std::vector<CVector>>& states,
                          const std::vector<StationSetting>& stations);
Behavior predict_behavior(const CglmpSetup& setup);
Behavior predict_behavior(const ChshSetup& setup);

struct MonteCarloReport {
  double noiseless_value = 0.0;
  double mean = 0.0;
  double std_dev = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> values;  // per-sample functional values, in sample order

  double percentile(double p) const;  // linear interpolation, p in [0, 100]
};

// Every sample re-draws each plate angle (and each phase, at its plate's
// sensitivity) from an independent stream derived from (seed, sample), then
// optionally resamples the outcome probabilities through Poisson counts.
// Statistics are accumulated by pairwise summation in sample order, so any
// evaluation schedule produces identical reports.
MonteCarloReport monte_carlo(const CglmpSetup& setup, const NoiseModel& noise,
                             int samples, std::uint64_t seed);
MonteCarloReport monte_carlo(const ChshSetup& setup, const NoiseModel& noise,
                             int samples, std::uint64_t seed);

}  // namespace dimcert
