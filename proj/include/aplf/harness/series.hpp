#pragma once

#include "aplf/civil_time.hpp"
#include "aplf/model_types.hpp"

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace aplf::harness {

class ParseError : public InputError {
 public:
  ParseError(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class NonMonotoneTimestamps : public InputError {
 public:
  NonMonotoneTimestamps(std::size_t line, const std::string& what)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class UnitMissing : public InputError {
 public:
  using InputError::InputError;
};

enum class TemperatureUnit { fahrenheit, celsius };

/// One timestamped observation. Temperatures are stored in Fahrenheit.
struct SeriesRecord {
  Timestamp timestamp;
  double load = 0.0;
  std::optional<double> temperature;
};

struct Gap {
  Timestamp after;          // last record before the gap
  long long missing_steps;  // whole steps absent
  std::size_t line;         // line of the record after the gap
};

struct IngestOptions {
  int step_minutes = 60;
  std::optional<TemperatureUnit> temperature_unit;
  std::string load_unit;
};

struct IngestResult {
  std::vector<SeriesRecord> records;
  std::vector<Gap> gaps;
  std::size_t missing_temperatures = 0;
};

/// Reads "timestamp,load[,temperature]" CSV (columns in any order, header
/// required). An empty temperature cell is a missing value.
///
/// Throws UnitMissing when the load unit is undeclared or a temperature
/// column is present without a declared unit, ParseError on malformed rows
/// and NonMonotoneTimestamps on out-of-order or duplicate timestamps.
IngestResult ingest_csv(std::istream& in, const IngestOptions& options);
IngestResult ingest_csv(const std::filesystem::path& path, const IngestOptions& options);

/// Reads the GEFCom2014 load track layout: ZONEID,TIMESTAMP,LOAD,w1..w25
/// with hourly loads in MW and station temperatures in Fahrenheit. The
/// temperature is the mean over the stations present in a row; rows
/// without a load are dropped.
IngestResult ingest_gefcom2014(std::istream& in);
IngestResult ingest_gefcom2014(const std::filesystem::path& path);

}  // namespace aplf::harness
