#pragma once

#include <json.hpp>

#include <string>
#include <vector>

#include "rigidlab/measures.hpp"
#include "rigidlab/sequences.hpp"

namespace rigidlab {

// insertion-ordered documents so the same config always serializes to the
// same bytes
using Json = nlohmann::ordered_json;

struct AnalysisConfig {
  Json doc;

  static AnalysisConfig from_string(const std::string& text);
  static AnalysisConfig from_file(const std::string& path);
};

struct AnalysisResult {
  std::string key;    // the "name" field from the config entry
  std::string check;  // which property this entry examines
  bool ok = false;
  std::string error;  // set when ok is false
  Json data;
};

// Data and metadata are kept apart: to_json() is a pure function of the
// config (byte-stable across runs), meta_json() carries wall times.
struct Report {
  int schema_version = 1;
  Json config_echo;
  std::vector<AnalysisResult> results;  // sorted by key
  double wall_seconds = 0;
  std::vector<std::pair<std::string, double>> timings;  // (key, seconds)

  Json to_json() const;
  Json meta_json() const;
};

Report run(const AnalysisConfig& cfg);

// Writes report.json and meta.json under out_dir; format "csv-tables" adds
// one <key>.csv per tabular result, "plot-csv" adds <key>.plot.csv for
// results that carry plot columns.  format "json" adds nothing.
void emit(const Report& rep, const std::string& format,
          const std::string& out_dir);

// ---- value serialization (decimal strings for Int, "p/q" for Rat) -----------

Json j_int(const Int& v);
Json j_rat(const Rat& v);
Json j_iv(const RatIv& v);
Json j_cx(const CxIv& v);

// ---- object construction from config snippets --------------------------------

IntSequence sequence_from_json(const Json& j);
CircleMeasure measure_from_json(const Json& j);

}  // namespace rigidlab
