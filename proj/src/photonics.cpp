#include "dimcert/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "dimcert/rng.hpp"

namespace dimcert {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr Complex kI{0.0, 1.0};

double deg2rad(double deg) { return deg * kPi / 180.0; }
double rad2deg(double rad) { return rad * 180.0 / kPi; }

Eigen::Matrix2cd rotation2(double t) {
  Eigen::Matrix2cd r;
  r << std::cos(t), -std::sin(t), std::sin(t), std::cos(t);
  return r;
}

Eigen::Vector2cd basis2(int k) {
  Eigen::Vector2cd e = Eigen::Vector2cd::Zero();
  e(k) = 1.0;
  return e;
}

// Phases in the interferometer respond four times faster than the plate
// that sets them, so angle jitter enters them with that gain.
constexpr double kPhasePlateGain = 4.0;

}  // namespace

CMatrix jones(PlateKind kind, double angle_rad) {
  Eigen::Matrix2cd retarder = Eigen::Matrix2cd::Zero();
  retarder(0, 0) = 1.0;
  retarder(1, 1) = kind == PlateKind::half ? Complex(-1.0) : kI;
  const Eigen::Matrix2cd r = rotation2(angle_rad);
  Eigen::Matrix2cd m = r * retarder * r.transpose();
  const Complex lead = m(0, 0);
  if (std::abs(lead) > 1e-12) m *= std::conj(lead) / std::abs(lead);
  return m;
}

CVector sagnac_prepare(const PreparationParams& params) {
  const double a = 2.0 * deg2rad(params.alpha_deg);
  const double b = 2.0 * deg2rad(params.beta_deg);
  const double w = 1.0 / std::sqrt(2.0);
  CVector ket(4);
  ket(0) = w * std::cos(a);
  ket(1) = w * std::sin(a) * std::exp(kI * params.phi1);
  ket(2) = w * std::cos(b) * std::exp(kI * params.path_phase);
  ket(3) = w * std::sin(b) * std::exp(kI * (params.path_phase + params.phi2));
  return ket;
}

namespace {

double fit_residual(const PreparationParams& params, const CVector& target) {
  const Complex overlap = (target.adjoint() * sagnac_prepare(params))(0);
  return 1.0 - std::norm(overlap);
}

PreparationParams analytic_guess(const CVector& t) {
  constexpr double tiny = 1e-12;
  const double m0 = std::abs(t(0)), m1 = std::abs(t(1));
  const double m2 = std::abs(t(2)), m3 = std::abs(t(3));
  const double ref = m0 > tiny ? std::arg(t(0)) : 0.0;
  PreparationParams p;
  p.alpha_deg = rad2deg(std::atan2(m1, m0)) / 2.0;
  p.beta_deg = rad2deg(std::atan2(m3, m2)) / 2.0;
  p.phi1 = m1 > tiny ? std::arg(t(1)) - ref : 0.0;
  if (m2 > tiny)
    p.path_phase = std::arg(t(2)) - ref;
  else if (m3 > tiny)
    p.path_phase = std::arg(t(3)) - ref;
  p.phi2 = m3 > tiny ? std::arg(t(3)) - ref - p.path_phase : 0.0;
  return p;
}

using ParamVector = std::array<double, 5>;

ParamVector pack(const PreparationParams& p) {
  return {p.alpha_deg, p.beta_deg, p.phi1, p.phi2, p.path_phase};
}

PreparationParams unpack(const ParamVector& v) {
  return {v[0], v[1], v[2], v[3], v[4]};
}

// Plain Nelder-Mead; the objective is smooth and 5-dimensional, so this is
// enough to polish a seed to machine precision.
ParamVector simplex_minimize(const CVector& target, const ParamVector& start) {
  constexpr int n = 5;
  const auto value = [&](const ParamVector& v) {
    return fit_residual(unpack(v), target);
  };
  std::array<ParamVector, n + 1> points;
  std::array<double, n + 1> scores;
  points[0] = start;
  const ParamVector steps{2.0, 2.0, 0.1, 0.1, 0.1};
  for (int i = 0; i < n; ++i) {
    points[i + 1] = start;
    points[i + 1][i] += steps[i];
  }
  for (int i = 0; i <= n; ++i) scores[i] = value(points[i]);

  const auto order = [&] {
    std::array<int, n + 1> idx;
    for (int i = 0; i <= n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](int a, int b) { return scores[a] < scores[b]; });
    std::array<ParamVector, n + 1> ps = points;
    std::array<double, n + 1> ss = scores;
    for (int i = 0; i <= n; ++i) {
      points[i] = ps[idx[i]];
      scores[i] = ss[idx[i]];
    }
  };
  const auto blend = [](const ParamVector& a, const ParamVector& b,
                        double wa, double wb) {
    ParamVector out;
    for (int i = 0; i < 5; ++i) out[i] = wa * a[i] + wb * b[i];
    return out;
  };

  for (int iter = 0; iter < 400; ++iter) {
    order();
    if (scores[n] - scores[0] < 1e-16) break;
    ParamVector centroid{};
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < 5; ++k) centroid[k] += points[i][k] / n;

    const ParamVector reflected = blend(centroid, points[n], 2.0, -1.0);
    const double fr = value(reflected);
    if (fr < scores[0]) {
      const ParamVector expanded = blend(centroid, points[n], 3.0, -2.0);
      const double fe = value(expanded);
      points[n] = fe < fr ? expanded : reflected;
      scores[n] = std::min(fe, fr);
      continue;
    }
    if (fr < scores[n - 1]) {
      points[n] = reflected;
      scores[n] = fr;
      continue;
    }
    const ParamVector contracted = blend(centroid, points[n], 0.5, 0.5);
    const double fc = value(contracted);
    if (fc < scores[n]) {
      points[n] = contracted;
      scores[n] = fc;
      continue;
    }
    for (int i = 1; i <= n; ++i) {
      points[i] = blend(points[0], points[i], 0.5, 0.5);
      scores[i] = value(points[i]);
    }
  }
  order();
  return points[0];
}

}  // namespace

FitResult fit_preparation(const CVector& target) {
  if (target.size() != 4)
    throw std::invalid_argument("fit_preparation expects a 4-dim ket");
  if (std::abs(target.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("fit_preparation expects a normalized ket");

  std::vector<ParamVector> starts;
  starts.push_back(pack(analytic_guess(target)));
  Rng rng(derive_seed(0x9e1ab1e5, 0));
  for (int k = 0; k < 4; ++k)
    starts.push_back(ParamVector{rng.uniform() * 45.0, rng.uniform() * 45.0,
                                 (2.0 * rng.uniform() - 1.0) * kPi,
                                 (2.0 * rng.uniform() - 1.0) * kPi,
                                 (2.0 * rng.uniform() - 1.0) * kPi});

  FitResult best;
  best.residual = 2.0;
  for (const ParamVector& start : starts) {
    const ParamVector polished = simplex_minimize(target, start);
    const PreparationParams params = unpack(polished);
    const double residual = fit_residual(params, target);
    if (residual < best.residual) {
      best.params = params;
      best.residual = residual;
    }
  }
  best.reachable = best.residual <= 1e-6;
  return best;
}

Povm station_povm(const StationSetting& setting) {
  std::array<bool, 4> seen{};
  for (int w : setting.wiring) {
    if (w < 0 || w > 3 || seen[w])
      throw std::invalid_argument("station wiring must permute 0..3");
    seen[w] = true;
  }

  Eigen::Matrix2cd splitter;
  splitter << 1.0, kI, kI, 1.0;
  splitter /= std::sqrt(2.0);
  Eigen::Matrix2cd loop = Eigen::Matrix2cd::Identity();
  loop(1, 1) = std::exp(kI * setting.loop_phase);
  const Eigen::Matrix2cd path_train = splitter * loop;

  const std::array<Eigen::Matrix2cd, 2> port_train = {
      jones(PlateKind::half, deg2rad(setting.hwp_b_deg)) *
          jones(PlateKind::quarter, deg2rad(setting.qwp_b_deg)),
      jones(PlateKind::half, deg2rad(setting.hwp_a_deg)) *
          jones(PlateKind::quarter, deg2rad(setting.qwp_a_deg))};

  Povm povm;
  povm.effects.resize(4);
  for (int port = 0; port < 2; ++port)
    for (int pol = 0; pol < 2; ++pol) {
      const Eigen::Vector2cd path_ket = path_train.adjoint() * basis2(port);
      const Eigen::Vector2cd pol_ket = port_train[port].adjoint() * basis2(pol);
      CVector detector(4);
      for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) detector(2 * i + j) = path_ket(i) * pol_ket(j);
      povm.effects[setting.wiring[2 * port + pol]] = projector(detector);
    }
  return povm;
}

double NoiseModel::sigma_deg(DeviceClass device) const {
  return device == DeviceClass::manual ? manual_sigma_deg : motorized_sigma_deg;
}

namespace {

// Realized plate settings of the two canonical four-outcome experiments.
// theta is the preparation mixing angle; the station plate angles follow the
// published analysis settings, with the loop phase and detector wiring
// calibrated once against the canonical projectors.
StationSetting station_y0() {
  StationSetting s;
  s.qwp_a_deg = 45.0;
  s.hwp_a_deg = 22.5;
  s.qwp_b_deg = 0.0;
  s.hwp_b_deg = 22.5;
  s.loop_phase = kPi / 2.0;
  s.wiring = {3, 1, 0, 2};
  return s;
}

StationSetting station_y1() {
  StationSetting s;
  s.qwp_a_deg = 45.0;
  s.hwp_a_deg = 11.25;
  s.qwp_b_deg = -45.0;
  s.hwp_b_deg = 11.25;
  s.loop_phase = 0.0;
  s.wiring = {0, 2, 1, 3};
  return s;
}

}  // namespace

CglmpSetup entangled_cglmp_setup() {
  const double theta = canonical_mixing_angle();
  const double alpha_deg = rad2deg(theta) / 2.0;
  const double beta_deg = (90.0 - rad2deg(theta)) / 2.0;
  CglmpSetup setup;
  setup.preparations.assign(2, std::vector<PreparationParams>(4));
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 4; ++a) {
      const double omega = kPi / 2.0 * a + (x == 0 ? -kPi / 8.0 : kPi / 8.0);
      PreparationParams& p = setup.preparations[x][a];
      p.alpha_deg = alpha_deg;
      p.beta_deg = beta_deg;
      p.phi1 = omega;
      p.phi2 = omega;
      p.path_phase = 2.0 * omega;
    }
  setup.stations = {station_y0(), station_y1()};
  return setup;
}

CglmpSetup separable_cglmp_setup() {
  CglmpSetup setup;
  setup.preparations.assign(2, std::vector<PreparationParams>(4));
  for (int x = 0; x < 2; ++x)
    for (int a = 0; a < 4; ++a) {
      const double sx = x == 0 ? -1.0 : 1.0;
      PreparationParams& p = setup.preparations[x][a];
      p.alpha_deg = 22.5;
      p.beta_deg = 22.5;
      p.phi1 = sx * kPi / 8.0 + kPi / 2.0 * a;
      p.phi2 = p.phi1;
      p.path_phase = sx * kPi / 4.0 - kPi * a;
    }
  setup.stations = {station_y0(), station_y1()};
  return setup;
}

ChshSetup canonical_chsh_setup() {
  ChshSetup setup;
  setup.prep_hwp_deg = {{22.5, -22.5}, {0.0, 45.0}};
  setup.meas_hwp_deg = {-78.75, 33.75};
  return setup;
}

Behavior predict_behavior(const std::vector<std::vector<CVector>>& states,
                          const std::vector<StationSetting>& stations) {
  const int n_x = static_cast<int>(states.size());
  const int n_y = static_cast<int>(stations.size());
  if (n_x == 0 || n_y == 0)
    throw std::invalid_argument("predict_behavior: empty setup");
  const int n_a = static_cast<int>(states[0].size());

  Behavior behavior = Behavior::empty(n_x, n_a, n_y, 4);
  std::vector<Povm> povms;
  povms.reserve(stations.size());
  for (const StationSetting& s : stations) povms.push_back(station_povm(s));

  for (int x = 0; x < n_x; ++x) {
    if (static_cast<int>(states[x].size()) != n_a)
      throw std::invalid_argument("predict_behavior: ragged preparation grid");
    for (int a = 0; a < n_a; ++a)
      for (int y = 0; y < n_y; ++y)
        for (int b = 0; b < 4; ++b)
          behavior.at(a, x, b, y) =
              born_probability(projector(states[x][a]), povms[y].effects[b]);
  }
  return behavior;
}

Behavior predict_behavior(const CglmpSetup& setup) {
  std::vector<std::vector<CVector>> states(setup.preparations.size());
  for (std::size_t x = 0; x < setup.preparations.size(); ++x)
    for (const PreparationParams& p : setup.preparations[x])
      states[x].push_back(sagnac_prepare(p));
  return predict_behavior(states, setup.stations);
}

namespace {

Eigen::Vector2cd rotated_ket(double angle_rad) {
  Eigen::Vector2cd ket;
  ket << std::cos(2.0 * angle_rad), std::sin(2.0 * angle_rad);
  return ket;
}

// Analysis half-wave plate followed by a polarizing splitter: outcome b
// projects onto row b of the plate matrix.
std::array<Eigen::Vector2cd, 2> analysis_kets(double angle_rad) {
  const CMatrix plate = jones(PlateKind::half, angle_rad);
  std::array<Eigen::Vector2cd, 2> kets;
  for (int b = 0; b < 2; ++b) kets[b] = plate.row(b).conjugate().transpose();
  return kets;
}

}  // namespace

Behavior predict_behavior(const ChshSetup& setup) {
  const int n_x = static_cast<int>(setup.prep_hwp_deg.size());
  const int n_y = static_cast<int>(setup.meas_hwp_deg.size());
  if (n_x == 0 || n_y == 0)
    throw std::invalid_argument("predict_behavior: empty setup");
  const int n_a = static_cast<int>(setup.prep_hwp_deg[0].size());

  Behavior behavior = Behavior::empty(n_x, n_a, n_y, 2);
  for (int x = 0; x < n_x; ++x)
    for (int a = 0; a < n_a; ++a) {
      const Eigen::Vector2cd prep =
          rotated_ket(deg2rad(setup.prep_hwp_deg[x][a]));
      for (int y = 0; y < n_y; ++y) {
        const auto kets = analysis_kets(deg2rad(setup.meas_hwp_deg[y]));
        for (int b = 0; b < 2; ++b)
          behavior.at(a, x, b, y) = std::norm(kets[b].dot(prep));
      }
    }
  return behavior;
}

namespace {

double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 8) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) acc += data[i];
    return acc;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

struct AngleJitter {
  const NoiseModel& noise;
  Rng& rng;

  double draw_deg(DeviceClass device) {
    const double sigma = noise.sigma_deg(device);
    if (noise.distribution == NoiseDistribution::gaussian)
      return sigma * rng.normal();
    return sigma * (2.0 * rng.uniform() - 1.0);
  }
};

void apply_poisson(const NoiseModel& noise, Rng& rng, int outcomes,
                   double* group) {
  if (!noise.poisson || noise.counts_per_setting <= 0.0) return;
  long long total = 0;
  std::vector<long long> counts(outcomes);
  for (int b = 0; b < outcomes; ++b) {
    counts[b] = rng.poisson(noise.counts_per_setting * std::max(group[b], 0.0));
    total += counts[b];
  }
  const double denom = static_cast<double>(std::max<long long>(total, 1));
  for (int b = 0; b < outcomes; ++b)
    group[b] = static_cast<double>(counts[b]) / denom;
}

MonteCarloReport summarize(double noiseless, std::vector<double> values) {
  MonteCarloReport report;
  report.noiseless_value = noiseless;
  report.values = std::move(values);
  const std::size_t n = report.values.size();
  report.min = *std::min_element(report.values.begin(), report.values.end());
  report.max = *std::max_element(report.values.begin(), report.values.end());
  if (report.min == report.max) {  // constant sample, exactly zero spread
    report.mean = report.min;
    report.std_dev = 0.0;
    return report;
  }
  report.mean = pairwise_sum(report.values.data(), n) / static_cast<double>(n);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = report.values[i] - report.mean;
    sq[i] = d * d;
  }
  report.std_dev =
      std::sqrt(pairwise_sum(sq.data(), n) / static_cast<double>(n - 1));
  return report;
}

}  // namespace

double MonteCarloReport::percentile(double p) const {
  if (values.empty()) throw std::invalid_argument("empty sample");
  if (p < 0.0 || p > 100.0)
    throw std::invalid_argument("percentile must be in [0, 100]");
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  const double rank = p / 100.0 * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(rank);
  if (lo + 1 >= sorted.size()) return sorted.back();
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac;
}

MonteCarloReport monte_carlo(const CglmpSetup& setup, const NoiseModel& noise,
                             int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  const InequalityFunctional f = cglmp4_functional();
  const double noiseless = f.value(predict_behavior(setup));
  const int n_x = static_cast<int>(setup.preparations.size());
  const int n_a = static_cast<int>(setup.preparations[0].size());
  const int n_y = static_cast<int>(setup.stations.size());

  std::vector<double> values(samples);
  for (int sample = 0; sample < samples; ++sample) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(sample)));
    AngleJitter jitter{noise, rng};
    Behavior behavior = Behavior::empty(n_x, n_a, n_y, 4);

    // Every (preparation, station) pair is a separate data-taking run, so
    // each gets its own realization of the station plate errors.
    for (int x = 0; x < n_x; ++x)
      for (int a = 0; a < n_a; ++a) {
        PreparationParams p = setup.preparations[x][a];
        const DeviceClass pc = setup.preparation_class;
        p.alpha_deg += jitter.draw_deg(pc);
        p.beta_deg += jitter.draw_deg(pc);
        p.phi1 += kPhasePlateGain * deg2rad(jitter.draw_deg(pc));
        p.phi2 += kPhasePlateGain * deg2rad(jitter.draw_deg(pc));
        p.path_phase += deg2rad(jitter.draw_deg(pc));
        const CVector state = sagnac_prepare(p);

        for (int y = 0; y < n_y; ++y) {
          StationSetting st = setup.stations[y];
          const DeviceClass sc = setup.station_class;
          st.qwp_a_deg += jitter.draw_deg(sc);
          st.hwp_a_deg += jitter.draw_deg(sc);
          st.qwp_b_deg += jitter.draw_deg(sc);
          st.hwp_b_deg += jitter.draw_deg(sc);
          st.loop_phase += deg2rad(jitter.draw_deg(sc));
          const Povm povm = station_povm(st);

          double group[4];
          for (int b = 0; b < 4; ++b)
            group[b] = born_probability(projector(state), povm.effects[b]);
          apply_poisson(noise, rng, 4, group);
          for (int b = 0; b < 4; ++b) behavior.at(a, x, b, y) = group[b];
        }
      }
    values[sample] = f.value(behavior);
  }
  return summarize(noiseless, std::move(values));
}

MonteCarloReport monte_carlo(const ChshSetup& setup, const NoiseModel& noise,
                             int samples, std::uint64_t seed) {
  if (samples < 1) throw std::invalid_argument("need at least one sample");
  const InequalityFunctional f = chsh_functional();
  const double noiseless = f.value(predict_behavior(setup));
  const int n_x = static_cast<int>(setup.prep_hwp_deg.size());
  const int n_a = static_cast<int>(setup.prep_hwp_deg[0].size());
  const int n_y = static_cast<int>(setup.meas_hwp_deg.size());

  std::vector<double> values(samples);
  for (int sample = 0; sample < samples; ++sample) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(sample)));
    AngleJitter jitter{noise, rng};
    Behavior behavior = Behavior::empty(n_x, n_a, n_y, 2);

    for (int x = 0; x < n_x; ++x)
      for (int y = 0; y < n_y; ++y)
        for (int a = 0; a < n_a; ++a) {
          const double prep_deg = setup.prep_hwp_deg[x][a] +
                                  jitter.draw_deg(setup.preparation_class);
          const double meas_deg = setup.meas_hwp_deg[y] +
                                  jitter.draw_deg(setup.measurement_class);
          const Eigen::Vector2cd prep = rotated_ket(deg2rad(prep_deg));
          const auto kets = analysis_kets(deg2rad(meas_deg));
          double group[2];
          for (int b = 0; b < 2; ++b) group[b] = std::norm(kets[b].dot(prep));
          apply_poisson(noise, rng, 2, group);
          for (int b = 0; b < 2; ++b) behavior.at(a, x, b, y) = group[b];
        }
    values[sample] = f.value(behavior);
  }
  return summarize(noiseless, std::move(values));
}

}  // namespace dimcert
