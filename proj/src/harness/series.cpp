#include "aplf/harness/series.hpp"

#include "aplf/features.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace aplf::harness {

namespace {

std::string trim(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

double parse_number(const std::string& cell, std::size_t line, const char* column) {
  double value = 0.0;
  const char* end = cell.data() + cell.size();
  auto [ptr, ec] = std::from_chars(cell.data(), end, value);
  if (ec != std::errc{} || ptr != end || !std::isfinite(value)) {
    throw ParseError(line, std::string("invalid ") + column + " value '" + cell + "'");
  }
  return value;
}

void append_record(IngestResult& out, SeriesRecord rec, std::size_t line_no, std::size_t& prev_line,
                   int step_minutes) {
  if (!out.records.empty()) {
    const Timestamp& prev = out.records.back().timestamp;
    const long long diff = rec.timestamp.utc_minutes() - prev.utc_minutes();
    if (diff <= 0) {
      throw NonMonotoneTimestamps(line_no, "timestamp " + format_timestamp(rec.timestamp) + " does not follow " +
                                               format_timestamp(prev) + " (line " + std::to_string(prev_line) + ")");
    }
    if (diff % step_minutes != 0) {
      throw ParseError(line_no, "timestamp is not aligned to the " + std::to_string(step_minutes) + "-minute step");
    }
    if (diff > step_minutes) out.gaps.push_back({prev, diff / step_minutes - 1, line_no});
  }
  out.records.push_back(std::move(rec));
  prev_line = line_no;
}

// GEFCom dates come as M/D/YYYY or as MDDYYYY digits; hours run to 24:00.
Timestamp parse_gefcom_timestamp(const std::string& cell) {
  std::istringstream fields(cell);
  std::string date, time;
  fields >> date >> time;
  int month = 0, day = 0, year = 0;
  if (date.find('/') != std::string::npos) {
    char a = 0, b = 0;
    std::istringstream d(date);
    if (!(d >> month >> a >> day >> b >> year) || a != '/' || b != '/') throw InputError("bad date '" + date + "'");
  } else {
    if (date.size() < 7 || date.size() > 8 || !std::all_of(date.begin(), date.end(), ::isdigit)) {
      throw InputError("bad date '" + date + "'");
    }
    year = std::stoi(date.substr(date.size() - 4));
    day = std::stoi(date.substr(date.size() - 6, 2));
    month = std::stoi(date.substr(0, date.size() - 6));
  }
  int hour = 0, minute = 0;
  if (!time.empty()) {
    const std::size_t colon = time.find(':');
    if (colon == std::string::npos) throw InputError("bad time '" + time + "'");
    hour = std::stoi(time.substr(0, colon));
    minute = std::stoi(time.substr(colon + 1, 2));
  }
  const std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{static_cast<unsigned>(month)},
                                        std::chrono::day{static_cast<unsigned>(day)}};
  if (!ymd.ok() || hour < 0 || hour > 24 || minute < 0 || minute > 59 || (hour == 24 && minute != 0)) {
    throw InputError("bad timestamp '" + cell + "'");
  }
  return make_timestamp(std::chrono::sys_days{ymd}, 0).plus_minutes(60LL * hour + minute);
}

}  // namespace

IngestResult ingest_csv(std::istream& in, const IngestOptions& options) {
  if (options.load_unit.empty()) throw UnitMissing("load unit is not declared (set load_unit)");
  if (options.step_minutes <= 0) throw InvalidArgument("step_minutes must be positive");

  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) {
      header = split(line);
      break;
    }
  }
  if (header.empty()) throw ParseError(line_no, "missing header row");

  int ts_col = -1, load_col = -1, temp_col = -1;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = lower(header[i]);
    if (name == "timestamp") ts_col = static_cast<int>(i);
    else if (name == "load") load_col = static_cast<int>(i);
    else if (name == "temperature") temp_col = static_cast<int>(i);
  }
  if (ts_col < 0 || load_col < 0) throw ParseError(line_no, "header must name timestamp and load columns");
  if (temp_col >= 0 && !options.temperature_unit) {
    throw UnitMissing("temperature column present but temperature_unit is not declared");
  }

  IngestResult out;
  std::size_t prev_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(cells.size()));
    }
    SeriesRecord rec;
    try {
      rec.timestamp = parse_timestamp(cells[static_cast<std::size_t>(ts_col)]);
    } catch (const InputError& e) {
      throw ParseError(line_no, e.what());
    }
    rec.load = parse_number(cells[static_cast<std::size_t>(load_col)], line_no, "load");
    if (rec.load < 0.0) throw ParseError(line_no, "load must be non-negative");
    if (temp_col >= 0) {
      const std::string& cell = cells[static_cast<std::size_t>(temp_col)];
      if (!cell.empty() && lower(cell) != "na" && lower(cell) != "nan") {
        const double t = parse_number(cell, line_no, "temperature");
        rec.temperature = *options.temperature_unit == TemperatureUnit::celsius ? celsius_to_fahrenheit(t) : t;
      }
    }
    if (!rec.temperature) ++out.missing_temperatures;

    append_record(out, std::move(rec), line_no, prev_line, options.step_minutes);
  }
  return out;
}

IngestResult ingest_csv(const std::filesystem::path& path, const IngestOptions& options) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path.string() + "'");
  return ingest_csv(in, options);
}

IngestResult ingest_gefcom2014(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (!trim(line).empty()) header = split(line);
  }
  if (header.empty()) throw ParseError(line_no, "missing header row");
  int ts_col = -1, load_col = -1;
  std::vector<std::size_t> stations;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const std::string name = lower(header[i]);
    if (name == "timestamp") ts_col = static_cast<int>(i);
    else if (name == "load") load_col = static_cast<int>(i);
    else if (name.size() > 1 && name[0] == 'w' && std::all_of(name.begin() + 1, name.end(), ::isdigit)) stations.push_back(i);
  }
  if (ts_col < 0 || load_col < 0) throw ParseError(line_no, "header must name TIMESTAMP and LOAD columns");

  IngestResult out;
  std::size_t prev_line = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (cells.size() != header.size()) {
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                    std::to_string(cells.size()));
    }
    const std::string& load = cells[static_cast<std::size_t>(load_col)];
    // History rows without load are published for temperature only.
    if (load.empty() || lower(load) == "na") continue;
    SeriesRecord rec;
    try {
      rec.timestamp = parse_gefcom_timestamp(cells[static_cast<std::size_t>(ts_col)]);
    } catch (const std::exception& e) {
      throw ParseError(line_no, e.what());
    }
    rec.load = parse_number(load, line_no, "load");
    if (rec.load < 0.0) throw ParseError(line_no, "load must be non-negative");
    double sum = 0.0;
    int n = 0;
    for (std::size_t i : stations) {
      if (cells[i].empty() || lower(cells[i]) == "na") continue;
      sum += parse_number(cells[i], line_no, "temperature");
      ++n;
    }
    if (n > 0) rec.temperature = sum / n;
    else ++out.missing_temperatures;
    append_record(out, std::move(rec), line_no, prev_line, 60);
  }
  return out;
}

IngestResult ingest_gefcom2014(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open data file '" + path.string() + "'");
  return ingest_gefcom2014(in);
}

}  // namespace aplf::harness
