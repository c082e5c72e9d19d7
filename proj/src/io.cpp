#include "dimcert/io.hpp"

#include <cmath>

#include "dimcert/errors.hpp"
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dimcert {

namespace {

using nlohmann::json;

int line_of_byte(const std::string& text, std::size_t byte) {
  int line = 1;
  const std::size_t stop = std::min(text.size(), byte);
  for (std::size_t i = 0; i < stop; ++i)
    if (text[i] == '\n') ++line;
  return line;
}

[[noreturn]] void fail(const std::string& origin, const std::string& message) {
  throw ParseError(origin, 0, message);
}

const json& require_key(const json& j, const char* key,
                        const std::string& origin) {
  if (!j.is_object() || !j.contains(key))
    fail(origin, std::string("missing key \"") + key + "\"");
  return j.at(key);
}

double require_number(const json& j, const char* key,
                      const std::string& origin) {
  const json& v = require_key(j, key, origin);
  if (!v.is_number()) fail(origin, std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

int require_int(const json& j, const char* key, const std::string& origin) {
  const json& v = require_key(j, key, origin);
  if (!v.is_number_integer())
    fail(origin, std::string("\"") + key + "\" must be an integer");
  return v.get<int>();
}

std::string require_string(const json& j, const char* key,
                           const std::string& origin) {
  const json& v = require_key(j, key, origin);
  if (!v.is_string()) fail(origin, std::string("\"") + key + "\" must be a string");
  return v.get<std::string>();
}

void require_format(const json& j, const char* tag, const std::string& origin) {
  const std::string found = require_string(j, "format", origin);
  if (found != tag)
    fail(origin, "expected format \"" + std::string(tag) + "\", found \"" +
                     found + "\"");
}

int bounded_int(const json& j, const char* key, int limit,
                const std::string& origin) {
  const int v = require_int(j, key, origin);
  if (v < 0 || v >= limit)
    fail(origin, std::string("\"") + key + "\" = " + std::to_string(v) +
                     " outside [0, " + std::to_string(limit - 1) + "]");
  return v;
}

}  // namespace

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  if (in.bad()) throw ParseError(path.string(), 0, "read failed");
  return buffer.str();
}

void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content) {
  const std::filesystem::path temp = path.string() + ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + temp.string());
    out << content;
    out.flush();
    if (!out.good()) throw std::runtime_error("write failed: " + temp.string());
  }
  std::filesystem::rename(temp, path);
}

std::string fnv1a_digest(const std::string& content) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : content) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx",
                static_cast<unsigned long long>(hash));
  return std::string("fnv1a:") + hex;
}

std::string iso_timestamp_utc() {
  const std::time_t now = std::time(nullptr);
  std::tm parts{};
  gmtime_r(&now, &parts);
  char buffer[32];
  std::strftime(buffer, sizeof buffer, "%Y-%m-%dT%H:%M:%SZ", &parts);
  return buffer;
}

CsvTable read_csv(const std::string& text, const std::string& origin) {
  const auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream stream(line);
    while (std::getline(stream, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t\r");
      const auto last = cell.find_last_not_of(" \t\r");
      cells.push_back(first == std::string::npos
                          ? std::string()
                          : cell.substr(first, last - first + 1));
    }
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
  };

  CsvTable table;
  std::istringstream stream(text);
  std::string line;
  int line_no = 0;
  while (std::getline(stream, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> cells = split(line);
    if (table.header.empty()) {
      table.header = std::move(cells);
      continue;
    }
    if (cells.size() != table.header.size())
      throw ParseError(origin, line_no,
                       "row has " + std::to_string(cells.size()) +
                           " cells, header has " +
                           std::to_string(table.header.size()));
    table.rows.push_back(std::move(cells));
  }
  if (table.header.empty()) throw ParseError(origin, 0, "empty table");
  return table;
}

nlohmann::json parse_json(const std::string& text, const std::string& origin) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t byte = e.byte > 0 ? e.byte - 1 : 0;
    throw ParseError(origin, line_of_byte(text, byte), e.what());
  }
}

nlohmann::json json_from_matrix(const CMatrix& m) {
  json out;
  out["rows"] = m.rows();
  out["cols"] = m.cols();
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      re.push_back(m(i, j).real());
      im.push_back(m(i, j).imag());
    }
  out["re"] = std::move(re);
  out["im"] = std::move(im);
  return out;
}

CMatrix matrix_from_json(const nlohmann::json& j, const std::string& origin) {
  const int rows = require_int(j, "rows", origin);
  const int cols = require_int(j, "cols", origin);
  if (rows < 1 || cols < 1) fail(origin, "matrix dimensions must be positive");
  const json& re = require_key(j, "re", origin);
  const json& im = require_key(j, "im", origin);
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  if (!re.is_array() || !im.is_array() || re.size() != n || im.size() != n)
    fail(origin, "matrix re/im lists must have rows*cols numbers");
  CMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int k = 0; k < cols; ++k) {
      const std::size_t flat = static_cast<std::size_t>(i) * cols + k;
      if (!re[flat].is_number() || !im[flat].is_number())
        fail(origin, "matrix entries must be numbers");
      m(i, k) = Complex(re[flat].get<double>(), im[flat].get<double>());
    }
  return m;
}

TableColumn table_column_from_name(const std::string& name) {
  if (name == "value") return TableColumn::value;
  if (name == "expected") return TableColumn::expected;
  if (name == "measured") return TableColumn::measured;
  throw std::invalid_argument("unknown table column: " + name);
}

std::string table_column_name(TableColumn column) {
  switch (column) {
    case TableColumn::value: return "value";
    case TableColumn::expected: return "expected";
    case TableColumn::measured: return "measured";
  }
  throw std::invalid_argument("bad table column");
}

Behavior ingest_behavior(const std::string& text, const std::string& origin,
                         const IngestOptions& options) {
  const json file = parse_json(text, origin);
  require_format(file, "behavior/1", origin);

  const json& shape = require_key(file, "shape", origin);
  const int n_x = require_int(shape, "n_x", origin);
  const int n_a = require_int(shape, "n_a", origin);
  const int n_y = require_int(shape, "n_y", origin);
  const int n_b = require_int(shape, "n_b", origin);
  if (n_x < 1 || n_a < 1 || n_y < 1 || n_b < 1)
    fail(origin, "shape entries must be positive");

  std::string layout = "conditional-per-a";
  if (file.contains("layout")) layout = require_string(file, "layout", origin);
  if (layout != "conditional-per-a" && layout != "joint")
    fail(origin, "layout must be conditional-per-a or joint");
  const bool joint = options.force_joint || layout == "joint";

  const json& entries = require_key(file, "entries", origin);
  if (!entries.is_array()) fail(origin, "\"entries\" must be an array");

  Behavior behavior = Behavior::empty(n_x, n_a, n_y, n_b);
  const std::string column = table_column_name(options.column);
  for (const json& entry : entries) {
    const int a = bounded_int(entry, "a", n_a, origin);
    const int x = bounded_int(entry, "x", n_x, origin);
    const int b = bounded_int(entry, "b", n_b, origin);
    const int y = bounded_int(entry, "y", n_y, origin);
    if (behavior.has(a, x, b, y))
      fail(origin, "duplicate entry for (a=" + std::to_string(a) +
                       ", x=" + std::to_string(x) + ", b=" + std::to_string(b) +
                       ", y=" + std::to_string(y) + ")");
    double p = require_number(entry, column.c_str(), origin);
    if (joint) p *= n_a;
    behavior.at(a, x, b, y) = p;
  }

  double tol = options.tolerance;
  if (tol < 0.0) tol = options.column == TableColumn::measured ? 0.05 : 1e-3;
  try {
    behavior.validate(tol, options.allow_missing);
  } catch (const std::invalid_argument& e) {
    fail(origin, e.what());
  }
  return behavior;
}

std::string serialize_behavior(const Behavior& behavior,
                               const nlohmann::json& metadata) {
  json file;
  file["format"] = "behavior/1";
  file["layout"] = "conditional-per-a";
  file["shape"] = {{"n_x", behavior.n_prep_settings},
                   {"n_a", behavior.n_prep_outcomes},
                   {"n_y", behavior.n_meas_settings},
                   {"n_b", behavior.n_meas_outcomes}};
  json entries = json::array();
  for (int x = 0; x < behavior.n_prep_settings; ++x)
    for (int a = 0; a < behavior.n_prep_outcomes; ++a)
      for (int y = 0; y < behavior.n_meas_settings; ++y)
        for (int b = 0; b < behavior.n_meas_outcomes; ++b)
          if (behavior.has(a, x, b, y))
            entries.push_back({{"a", a},
                               {"x", x},
                               {"b", b},
                               {"y", y},
                               {"value", behavior.at(a, x, b, y)}});
  file["entries"] = std::move(entries);
  if (!metadata.empty()) file["metadata"] = metadata;
  return file.dump(2) + "\n";
}

Behavior behavior_from_chsh_terms(const std::string& text,
                                  const std::string& origin,
                                  TableColumn column) {
  const json file = parse_json(text, origin);
  require_format(file, "chsh-terms/1", origin);
  const json& terms = require_key(file, "terms", origin);
  if (!terms.is_array() || terms.size() != 8)
    fail(origin, "need exactly 8 terms, found " +
                     std::to_string(terms.is_array() ? terms.size() : 0));
  if (column == TableColumn::value)
    fail(origin, "term files carry expected/measured columns only");

  Behavior behavior = Behavior::empty(2, 2, 2, 2);
  const std::string key = table_column_name(column);
  for (const json& term : terms) {
    const int a = bounded_int(term, "a", 2, origin);
    const int x = bounded_int(term, "x", 2, origin);
    const int y = bounded_int(term, "y", 2, origin);
    if (behavior.has(a, x, 0, y))
      fail(origin, "duplicate term for (a=" + std::to_string(a) +
                       ", x=" + std::to_string(x) + ", y=" + std::to_string(y) +
                       ")");
    const double t = require_number(term, key.c_str(), origin);
    if (std::abs(t) > 0.5 + 1e-9)
      fail(origin, "half-correlator " + std::to_string(t) + " outside [-1/2, 1/2]");
    behavior.at(a, x, 0, y) = 0.5 + t;
    behavior.at(a, x, 1, y) = 0.5 - t;
  }
  try {
    behavior.validate(column == TableColumn::measured ? 0.05 : 1e-3, false);
  } catch (const std::invalid_argument& e) {
    fail(origin, e.what());
  }
  return behavior;
}

double ingest_chsh_terms(const std::string& text, const std::string& origin,
                         TableColumn column) {
  return chsh_functional().value(behavior_from_chsh_terms(text, origin, column));
}

namespace {

DeviceClass device_class_from_name(const std::string& name,
                                   const std::string& origin) {
  if (name == "manual") return DeviceClass::manual;
  if (name == "motorized") return DeviceClass::motorized;
  fail(origin, "device class must be manual or motorized, found \"" + name + "\"");
}

NoiseModel noise_from_json(const json& j, const std::string& origin) {
  NoiseModel noise;
  if (j.contains("distribution")) {
    const std::string name = require_string(j, "distribution", origin);
    if (name == "gaussian")
      noise.distribution = NoiseDistribution::gaussian;
    else if (name == "uniform")
      noise.distribution = NoiseDistribution::uniform;
    else
      fail(origin, "distribution must be gaussian or uniform");
  }
  if (j.contains("manual_sigma_deg"))
    noise.manual_sigma_deg = require_number(j, "manual_sigma_deg", origin);
  if (j.contains("motorized_sigma_deg"))
    noise.motorized_sigma_deg = require_number(j, "motorized_sigma_deg", origin);
  if (j.contains("counts_per_setting"))
    noise.counts_per_setting = require_number(j, "counts_per_setting", origin);
  if (j.contains("poisson")) {
    if (!j.at("poisson").is_boolean())
      fail(origin, "\"poisson\" must be a boolean");
    noise.poisson = j.at("poisson").get<bool>();
  }
  return noise;
}

PreparationParams preparation_from_json(const json& j,
                                        const std::string& origin) {
  PreparationParams p;
  p.alpha_deg = require_number(j, "alpha_deg", origin);
  p.beta_deg = require_number(j, "beta_deg", origin);
  p.phi1 = require_number(j, "phi1", origin);
  p.phi2 = require_number(j, "phi2", origin);
  p.path_phase = require_number(j, "path_phase", origin);
  return p;
}

PreparationParams preparation_from_target(const json& j,
                                          const std::string& origin) {
  const CMatrix column = matrix_from_json(j, origin);
  if (column.cols() != 1 || column.rows() != 4)
    fail(origin, "preparation target must be a 4x1 ket");
  CVector target = column.col(0);
  const double norm = target.norm();
  if (norm < 1e-12) fail(origin, "preparation target is the zero vector");
  target /= norm;
  const FitResult fit = fit_preparation(target);
  if (!fit.reachable)
    throw NumericalError("preparation target unreachable, residual " +
                         std::to_string(fit.residual));
  return fit.params;
}

StationSetting station_from_json(const json& j, const std::string& origin) {
  StationSetting s;
  s.qwp_a_deg = require_number(j, "qwp_a_deg", origin);
  s.hwp_a_deg = require_number(j, "hwp_a_deg", origin);
  s.qwp_b_deg = require_number(j, "qwp_b_deg", origin);
  s.hwp_b_deg = require_number(j, "hwp_b_deg", origin);
  s.loop_phase = require_number(j, "loop_phase", origin);
  const json& wiring = require_key(j, "wiring", origin);
  if (!wiring.is_array() || wiring.size() != 4)
    fail(origin, "\"wiring\" must list 4 outcomes");
  for (int i = 0; i < 4; ++i) {
    if (!wiring[i].is_number_integer())
      fail(origin, "\"wiring\" entries must be integers");
    s.wiring[i] = wiring[i].get<int>();
  }
  return s;
}

}  // namespace

SimulationSetup load_setup(const std::string& text, const std::string& origin) {
  const json file = parse_json(text, origin);
  require_format(file, "setup/1", origin);

  SimulationSetup setup;
  setup.functional = require_string(file, "functional", origin);
  if (file.contains("noise"))
    setup.noise = noise_from_json(require_key(file, "noise", origin), origin);

  if (setup.functional == "chsh") {
    ChshSetup device;
    const json& prep = require_key(file, "prep_hwp_deg", origin);
    if (!prep.is_array() || prep.empty())
      fail(origin, "\"prep_hwp_deg\" must be a non-empty array of arrays");
    for (const json& row : prep) {
      if (!row.is_array() || row.empty())
        fail(origin, "\"prep_hwp_deg\" must be a non-empty array of arrays");
      std::vector<double> angles;
      for (const json& v : row) {
        if (!v.is_number()) fail(origin, "plate angles must be numbers");
        angles.push_back(v.get<double>());
      }
      if (!device.prep_hwp_deg.empty() &&
          angles.size() != device.prep_hwp_deg.front().size())
        fail(origin, "ragged \"prep_hwp_deg\" rows");
      device.prep_hwp_deg.push_back(std::move(angles));
    }
    const json& meas = require_key(file, "meas_hwp_deg", origin);
    if (!meas.is_array() || meas.empty())
      fail(origin, "\"meas_hwp_deg\" must be a non-empty array");
    for (const json& v : meas) {
      if (!v.is_number()) fail(origin, "plate angles must be numbers");
      device.meas_hwp_deg.push_back(v.get<double>());
    }
    if (file.contains("preparation_class"))
      device.preparation_class = device_class_from_name(
          require_string(file, "preparation_class", origin), origin);
    if (file.contains("measurement_class"))
      device.measurement_class = device_class_from_name(
          require_string(file, "measurement_class", origin), origin);
    setup.device = std::move(device);
    return setup;
  }

  if (setup.functional != "cglmp4")
    fail(origin, "functional must be cglmp4 or chsh, found \"" +
                     setup.functional + "\"");

  CglmpSetup device;
  const bool has_params = file.contains("preparations");
  const bool has_targets = file.contains("preparation_targets");
  if (has_params == has_targets)
    fail(origin,
         "give exactly one of \"preparations\" and \"preparation_targets\"");
  const json& prep = file.at(has_params ? "preparations" : "preparation_targets");
  if (!prep.is_array() || prep.empty())
    fail(origin, "preparations must be a non-empty array of arrays");
  for (const json& row : prep) {
    if (!row.is_array() || row.empty())
      fail(origin, "preparations must be a non-empty array of arrays");
    std::vector<PreparationParams> group;
    for (const json& cell : row)
      group.push_back(has_params ? preparation_from_json(cell, origin)
                                 : preparation_from_target(cell, origin));
    if (!device.preparations.empty() &&
        group.size() != device.preparations.front().size())
      fail(origin, "ragged preparation rows");
    device.preparations.push_back(std::move(group));
  }

  const json& stations = require_key(file, "stations", origin);
  if (!stations.is_array() || stations.empty())
    fail(origin, "\"stations\" must be a non-empty array");
  for (const json& s : stations)
    device.stations.push_back(station_from_json(s, origin));

  if (file.contains("preparation_class"))
    device.preparation_class = device_class_from_name(
        require_string(file, "preparation_class", origin), origin);
  if (file.contains("station_class"))
    device.station_class = device_class_from_name(
        require_string(file, "station_class", origin), origin);
  setup.device = std::move(device);
  return setup;
}

std::string serialize_report(const CertificationReport& report) {
  json file;
  file["format"] = "report/1";
  file["functional"] = report.verdict.functional;
  file["value"] = report.verdict.value;
  file["std_error"] = report.verdict.std_error;
  file["k_sigma"] = report.verdict.k_sigma;
  file["adjusted"] = report.verdict.adjusted;
  file["contextual"] = report.verdict.contextual;
  file["certified_min_dimension"] = report.verdict.certified_min_dimension;
  file["crossed"] = report.verdict.crossed;
  file["inputs_digest"] = report.inputs_digest;
  file["tool_version"] = report.tool_version;
  file["timestamp"] = report.timestamp;
  return file.dump(2) + "\n";
}

CertificationReport parse_report(const std::string& text,
                                 const std::string& origin) {
  const json file = parse_json(text, origin);
  require_format(file, "report/1", origin);
  CertificationReport report;
  report.verdict.functional = require_string(file, "functional", origin);
  report.verdict.value = require_number(file, "value", origin);
  report.verdict.std_error = require_number(file, "std_error", origin);
  report.verdict.k_sigma = require_number(file, "k_sigma", origin);
  report.verdict.adjusted = require_number(file, "adjusted", origin);
  const json& contextual = require_key(file, "contextual", origin);
  if (!contextual.is_boolean()) fail(origin, "\"contextual\" must be a boolean");
  report.verdict.contextual = contextual.get<bool>();
  report.verdict.certified_min_dimension =
      require_int(file, "certified_min_dimension", origin);
  const json& crossed = require_key(file, "crossed", origin);
  if (!crossed.is_array()) fail(origin, "\"crossed\" must be an array");
  for (const json& item : crossed) {
    if (!item.is_string()) fail(origin, "\"crossed\" entries must be strings");
    report.verdict.crossed.push_back(item.get<std::string>());
  }
  report.inputs_digest = require_string(file, "inputs_digest", origin);
  report.tool_version = require_string(file, "tool_version", origin);
  report.timestamp = require_string(file, "timestamp", origin);
  return report;
}

namespace {

json json_from_assemblage(const Assemblage& assemblage) {
  json rows = json::array();
  for (const auto& group : assemblage.states) {
    json row = json::array();
    for (const CMatrix& state : group) row.push_back(json_from_matrix(state));
    rows.push_back(std::move(row));
  }
  return rows;
}

json json_from_povms(const std::vector<Povm>& povms) {
  json rows = json::array();
  for (const Povm& povm : povms) {
    json row = json::array();
    for (const CMatrix& effect : povm.effects)
      row.push_back(json_from_matrix(effect));
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::string serialize_canonical_setup(const CanonicalSetup& setup,
                                      const std::string& setup_name,
                                      const std::string& functional,
                                      double value) {
  json file;
  file["format"] = "canonical-setup/1";
  file["setup"] = setup_name;
  file["functional"] = functional;
  file["value"] = value;
  file["preparations"] = json_from_assemblage(setup.preparations);
  file["measurements"] = json_from_povms(setup.measurements);
  return file.dump(2) + "\n";
}

std::string serialize_seesaw_record(const SeesawRecord& record) {
  json file;
  file["format"] = "seesaw-run/1";
  file["restart"] = record.restart;
  file["seed"] = record.seed;
  file["values"] = record.values;
  file["final_value"] = record.final_value;
  file["alternations"] = record.alternations;
  file["termination"] = record.termination;
  if (!record.preparations.states.empty())
    file["preparations"] = json_from_assemblage(record.preparations);
  if (!record.measurements.empty())
    file["measurements"] = json_from_povms(record.measurements);
  return file.dump(2) + "\n";
}

std::string serialize_seesaw_summary(const SeesawResult& result,
                                     const SeesawConfig& config, bool ppt) {
  json file;
  file["format"] = "seesaw-summary/1";
  file["ppt"] = ppt;
  file["dim"] = config.dim;
  file["restarts"] = config.restarts;
  file["master_seed"] = config.master_seed;
  file["convergence_window"] = config.convergence_window;
  file["value_tol"] = config.value_tol;
  file["max_alternations"] = config.max_alternations;
  file["best_restart"] = result.best_restart;
  file["best_value"] = result.best().final_value;
  json rows = json::array();
  for (const SeesawRecord& record : result.records)
    rows.push_back({{"restart", record.restart},
                    {"seed", record.seed},
                    {"final_value", record.final_value},
                    {"alternations", record.alternations},
                    {"termination", record.termination}});
  file["records"] = std::move(rows);
  return file.dump(2) + "\n";
}

std::string serialize_monte_carlo(const MonteCarloReport& report,
                                  const std::string& functional, int samples,
                                  std::uint64_t seed) {
  json file;
  file["format"] = "montecarlo-report/1";
  file["functional"] = functional;
  file["samples"] = samples;
  file["seed"] = seed;
  file["noiseless_value"] = report.noiseless_value;
  file["mean"] = report.mean;
  file["std_dev"] = report.std_dev;
  file["min"] = report.min;
  file["max"] = report.max;
  json percentiles;
  for (double p : {5.0, 25.0, 50.0, 75.0, 95.0}) {
    char key[4];
    std::snprintf(key, sizeof key, "%02d", static_cast<int>(p));
    percentiles[key] = report.percentile(p);
  }
  file["percentiles"] = std::move(percentiles);
  return file.dump(2) + "\n";
}

}  // namespace dimcert
