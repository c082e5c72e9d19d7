#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "dimcert/inequalities.hpp"
#include "dimcert/photonics.hpp"
#include "dimcert/seesaw.hpp"

namespace dimcert {

inline constexpr const char* kToolVersion = "1.0.0";

// All structured files are versioned JSON with a top-level "format" tag:
//   behavior/1           probability tables, single- or dual-column
//   chsh-terms/1         eight signed half-correlators
//   setup/1              simulated apparatus + noise model
//   report/1             certification result
//   canonical-setup/1    states and effects of a built-in setup
//   seesaw-run/1         one optimization restart, operators included
//   montecarlo-report/1  noise-budget summary
// docs/formats.md documents each field.

std::string read_file(const std::filesystem::path& path);
// Writes to a sibling temp file first and renames it into place.
void write_file_atomic(const std::filesystem::path& path,
                       const std::string& content);

// 64-bit FNV-1a over the raw bytes, as "fnv1a:<16 hex digits>".
std::string fnv1a_digest(const std::string& content);

std::string iso_timestamp_utc();

// Comma-separated archival tables. Cells stay verbatim strings (plate-angle
// tables mix numbers with symbolic phases and placeholder dashes).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;  // one per non-header line
};

CsvTable read_csv(const std::string& text, const std::string& origin);

// nlohmann parse with ParseError diagnostics (line from byte offset).
nlohmann::json parse_json(const std::string& text, const std::string& origin);

// Complex matrices as row-major real/imag lists.
nlohmann::json json_from_matrix(const CMatrix& m);
CMatrix matrix_from_json(const nlohmann::json& j, const std::string& origin);

// Which value column of a behavior file to read. Files written by this tool
// carry a single "value" column; archival run tables carry "expected" and
// "measured" side by side.
enum class TableColumn { value, expected, measured };

TableColumn table_column_from_name(const std::string& name);
std::string table_column_name(TableColumn column);

struct IngestOptions {
  TableColumn column = TableColumn::value;
  // Negative means the per-column default: 0.05 for measured data, which
  // violates normalization and no-signaling slightly, else 1e-3.
  double tolerance = -1.0;
  bool allow_missing = false;
  // Entries are conditional p(b|a,x,y) unless the file's layout says they
  // are joint p(a,b|x,y); set true to force the joint reading.
  bool force_joint = false;
};

Behavior ingest_behavior(const std::string& text, const std::string& origin,
                         const IngestOptions& options = {});
std::string serialize_behavior(
    const Behavior& behavior,
    const nlohmann::json& metadata = nlohmann::json::object());

// Half-correlator files: eight rows t(a,x,y) = (p(0|a,x,y) - p(1|a,x,y))/2.
Behavior behavior_from_chsh_terms(const std::string& text,
                                  const std::string& origin,
                                  TableColumn column);
double ingest_chsh_terms(const std::string& text, const std::string& origin,
                         TableColumn column);

// A simulation setup file: one of the two apparatus models plus its noise.
// Preparations may be given as plate parameters or as target kets, which are
// converted through fit_preparation (unreachable targets are an error).
struct SimulationSetup {
  std::string functional;  // "cglmp4" or "chsh"
  std::variant<CglmpSetup, ChshSetup> device;
  NoiseModel noise;
};

SimulationSetup load_setup(const std::string& text, const std::string& origin);

struct CertificationReport {
  CertificationVerdict verdict;
  std::string inputs_digest;
  std::string tool_version = kToolVersion;
  std::string timestamp;  // ISO-8601 UTC, supplied by the caller
};

std::string serialize_report(const CertificationReport& report);
CertificationReport parse_report(const std::string& text,
                                 const std::string& origin);

std::string serialize_canonical_setup(const CanonicalSetup& setup,
                                      const std::string& setup_name,
                                      const std::string& functional,
                                      double value);

// One restart's audit record: seed, half-step value trace, termination, and
// the final operators. Deterministic byte-for-byte for fixed inputs.
std::string serialize_seesaw_record(const SeesawRecord& record);
std::string serialize_seesaw_summary(const SeesawResult& result,
                                     const SeesawConfig& config, bool ppt);

std::string serialize_monte_carlo(const MonteCarloReport& report,
                                  const std::string& functional, int samples,
                                  std::uint64_t seed);

}  // namespace dimcert
