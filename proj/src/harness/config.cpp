#include "aplf/harness/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

namespace aplf::harness {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw InputError("config line " + std::to_string(line) + ": " + what);
}

double to_double(std::string_view v, std::size_t line) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) fail(line, "expected a number, got '" + std::string(v) + "'");
  return out;
}

int to_int(std::string_view v, std::size_t line) {
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) fail(line, "expected an integer, got '" + std::string(v) + "'");
  return out;
}

bool to_bool(std::string_view v, std::size_t line) {
  const std::string s = lower(v);
  if (s == "true" || s == "yes" || s == "1" || s == "on") return true;
  if (s == "false" || s == "no" || s == "0" || s == "off") return false;
  fail(line, "expected a boolean, got '" + std::string(v) + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

template <typename Fn>
void for_each_line(std::string_view text, Fn fn) {
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (const std::size_t hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (!line.empty()) fn(line, line_no);
  }
}

}  // namespace

std::vector<ScheduledPrediction> parse_schedule(std::string_view text, int default_horizon) {
  std::vector<ScheduledPrediction> out;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    std::istringstream fields{std::string(line)};
    std::string date, time, horizon;
    fields >> date >> time >> horizon;
    if (date.empty() || time.empty()) fail(line_no, "schedule rows are 'YYYY-MM-DD HH:MM [horizon]'");
    ScheduledPrediction p;
    try {
      p.date = parse_date(date);
      p.minute_of_day = parse_time_of_day(time);
    } catch (const InputError& e) {
      fail(line_no, e.what());
    }
    p.horizon = horizon.empty() ? default_horizon : to_int(horizon, line_no);
    if (p.horizon < 1) fail(line_no, "horizon must be >= 1");
    out.push_back(p);
  });
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return std::tie(a.date, a.minute_of_day) < std::tie(b.date, b.minute_of_day);
  });
  return out;
}

RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir) {
  RunConfig cfg;
  std::optional<std::filesystem::path> schedule_path;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) fail(line_no, "expected 'key = value'");
    const std::string key = lower(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    try {
      if (key == "lambda_s") cfg.hp.lambda_s = to_double(value, line_no);
      else if (key == "lambda_r") cfg.hp.lambda_r = to_double(value, line_no);
      else if (key == "w1") cfg.hp.w1 = to_double(value, line_no);
      else if (key == "w2") cfg.hp.w2 = to_double(value, line_no);
      else if (key == "w3") cfg.hp.w3 = to_double(value, line_no);
      else if (key == "trace_reset_threshold") cfg.hp.trace_reset_threshold = to_double(value, line_no);
      else if (key == "horizon") cfg.hp.horizon = to_int(value, line_no);
      else if (key == "calendar_types") {
        if (to_int(value, line_no) != kHourlyCalendarTypes) fail(line_no, "only 48 hourly calendar types are supported");
      } else if (key == "prediction_time") cfg.prediction_minute_of_day = parse_time_of_day(value);
      else if (key == "train_end") cfg.train_end = parse_timestamp(value);
      else if (key == "test_end") cfg.test_end = parse_timestamp(value);
      else if (key == "holidays") {
        std::string_view rest = value;
        while (!rest.empty()) {
          const std::size_t comma = rest.find(',');
          const std::string_view item = trim(rest.substr(0, comma));
          if (!item.empty()) cfg.holidays.insert(parse_date(item));
          rest.remove_prefix(comma == std::string_view::npos ? rest.size() : comma + 1);
        }
      } else if (key == "temperature_unit") {
        const std::string u = lower(value);
        if (u == "f" || u == "fahrenheit") cfg.temperature_unit = TemperatureUnit::fahrenheit;
        else if (u == "c" || u == "celsius") cfg.temperature_unit = TemperatureUnit::celsius;
        else fail(line_no, "temperature_unit must be F or C");
      } else if (key == "load_unit") {
        const std::string u = lower(value);
        if (u != "kw" && u != "mw" && u != "gw") fail(line_no, "load_unit must be kW, MW or GW");
        cfg.load_unit = std::string(value);
      } else if (key == "step_minutes") cfg.step_minutes = to_int(value, line_no);
      else if (key == "init_mode") {
        const std::string m = lower(value);
        if (m == "zero") cfg.init_mode = InitMode::zero;
        else if (m == "batch") cfg.init_mode = InitMode::batch;
        else fail(line_no, "init_mode must be zero or batch");
      } else if (key == "write_quantiles") cfg.write_quantiles = to_bool(value, line_no);
      else if (key == "output_dir") cfg.output_dir = std::filesystem::path(std::string(value));
      else if (key == "schedule_file") schedule_path = base_dir / std::string(value);
      else fail(line_no, "unknown key '" + key + "'");
    } catch (const InputError& e) {
      const std::string what = e.what();
      if (what.rfind("config line", 0) == 0) throw;
      fail(line_no, what);
    }
  });

  try {
    cfg.hp.validate();
  } catch (const InputError& e) {
    throw InputError(std::string("config: ") + e.what());
  }
  if (cfg.step_minutes <= 0 || 1440 % cfg.step_minutes != 0) {
    throw InputError("config: step_minutes must divide a day");
  }
  if (schedule_path) cfg.schedule = parse_schedule(read_file(*schedule_path), cfg.hp.horizon);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

}  // namespace aplf::harness
