#include "aplf/harness/snapshot.hpp"

#include "json.hpp"

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace aplf::harness {

using nlohmann::json;

namespace {

std::string fnv1a64(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

json vector_to_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(std::move(row));
  }
  return out;
}

Vector vector_from_json(const json& j, Eigen::Index expected) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != expected) {
    throw ShapeMismatch("vector of length " + std::to_string(expected) + " expected");
  }
  Vector v(expected);
  for (Eigen::Index i = 0; i < expected; ++i) v[i] = j.at(static_cast<std::size_t>(i)).get<double>();
  return v;
}

Matrix matrix_from_json(const json& j, Eigen::Index k) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != k) {
    throw ShapeMismatch("matrix of size " + std::to_string(k) + " expected");
  }
  Matrix m(k, k);
  for (Eigen::Index r = 0; r < k; ++r) m.row(r) = vector_from_json(j.at(static_cast<std::size_t>(r)), k).transpose();
  return m;
}

json channel_to_json(const GaussianChannelParams& params, const ChannelState& state) {
  return {{"eta", vector_to_json(params.eta)},
          {"sigma", params.sigma},
          {"p", matrix_to_json(state.p)},
          {"gamma", state.gamma}};
}

void channel_from_json(const json& j, Eigen::Index k, GaussianChannelParams& params, ChannelState& state) {
  params.eta = vector_from_json(j.at("eta"), k);
  params.sigma = j.at("sigma").get<double>();
  state.p = matrix_from_json(j.at("p"), k);
  state.gamma = j.at("gamma").get<double>();
}

json warmup_to_json(const ChannelWarmup& w) {
  json samples = json::array();
  for (const Sample& x : w.samples) samples.push_back({{"u", vector_to_json(x.u)}, {"s", x.s}});
  return {{"pending", w.pending}, {"samples", std::move(samples)}};
}

ChannelWarmup warmup_from_json(const json& j, Eigen::Index k) {
  ChannelWarmup w;
  w.pending = j.at("pending").get<bool>();
  for (const json& x : j.at("samples")) w.samples.push_back({vector_from_json(x.at("u"), k), x.at("s").get<double>()});
  return w;
}

json payload_of(const Snapshot& snap) {
  const OnlineModel& m = snap.model;
  const int types = m.params.calendar_types();
  json calendar = json::array();
  for (int i = 1; i <= types; ++i) {
    const CalendarType c{i};
    json entry = {{"s", channel_to_json(m.params[c].s_channel, m.state[c].s_state)},
                  {"r", channel_to_json(m.params[c].r_channel, m.state[c].r_state)},
                  {"temperature_sum", m.tracker.sums().at(c.slot())},
                  {"temperature_count", m.tracker.counts().at(c.slot())}};
    if (m.init_mode == InitMode::batch) {
      entry["s_warmup"] = warmup_to_json(m.s_warmup.at(c.slot()));
      entry["r_warmup"] = warmup_to_json(m.r_warmup.at(c.slot()));
    }
    calendar.push_back(std::move(entry));
  }
  const HyperParams& hp = snap.hp;
  return {
      {"calendar_types", types},
      {"observation_features", m.params.observation_features()},
      {"hyper_params",
       {{"lambda_s", hp.lambda_s},
        {"lambda_r", hp.lambda_r},
        {"w1", hp.w1},
        {"w2", hp.w2},
        {"w3", hp.w3},
        {"horizon", hp.horizon},
        {"trace_reset_threshold", hp.trace_reset_threshold}}},
      {"init_mode", m.init_mode == InitMode::batch ? "batch" : "zero"},
      {"learned_through", snap.learned_through ? json(format_timestamp(*snap.learned_through)) : json(nullptr)},
      {"last_load", snap.last_load ? json(*snap.last_load) : json(nullptr)},
      {"calendar", std::move(calendar)},
  };
}

}  // namespace

std::string snapshot_to_string(const Snapshot& snapshot) {
  const json payload = payload_of(snapshot);
  const json doc = {{"format", "aplf-snapshot"},
                    {"version", kSnapshotVersion},
                    {"checksum", fnv1a64(payload.dump())},
                    {"payload", payload}};
  return doc.dump(1) + "\n";
}

Snapshot snapshot_from_string(const std::string& text, int expected_calendar_types,
                              int expected_observation_features) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw CorruptSnapshot(std::string("snapshot is not valid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("format", "") != "aplf-snapshot") {
      throw CorruptSnapshot("not an aplf snapshot");
    }
    const int version = doc.at("version").get<int>();
    if (version != kSnapshotVersion) {
      throw VersionMismatch("snapshot version " + std::to_string(version) + ", expected " +
                            std::to_string(kSnapshotVersion));
    }
    const json& payload = doc.at("payload");
    if (fnv1a64(payload.dump()) != doc.at("checksum").get<std::string>()) {
      throw CorruptSnapshot("snapshot checksum mismatch");
    }

    const int types = payload.at("calendar_types").get<int>();
    const int features = payload.at("observation_features").get<int>();
    if (types != expected_calendar_types || features != expected_observation_features) {
      throw ShapeMismatch("snapshot has C=" + std::to_string(types) + ", R=" + std::to_string(features) +
                          "; configuration expects C=" + std::to_string(expected_calendar_types) +
                          ", R=" + std::to_string(expected_observation_features));
    }

    Snapshot snap;
    const json& hp = payload.at("hyper_params");
    snap.hp.lambda_s = hp.at("lambda_s").get<double>();
    snap.hp.lambda_r = hp.at("lambda_r").get<double>();
    snap.hp.w1 = hp.at("w1").get<double>();
    snap.hp.w2 = hp.at("w2").get<double>();
    snap.hp.w3 = hp.at("w3").get<double>();
    snap.hp.horizon = hp.at("horizon").get<int>();
    snap.hp.trace_reset_threshold = hp.at("trace_reset_threshold").get<double>();
    snap.hp.calendar_types = types;

    const InitMode mode = payload.at("init_mode").get<std::string>() == "batch" ? InitMode::batch : InitMode::zero;
    snap.model = OnlineModel(snap.hp, features, mode);

    const json& calendar = payload.at("calendar");
    if (!calendar.is_array() || static_cast<int>(calendar.size()) != types) {
      throw ShapeMismatch("calendar entry count does not match calendar_types");
    }
    std::vector<double> sums;
    std::vector<long long> counts;
    for (int i = 1; i <= types; ++i) {
      const CalendarType c{i};
      const json& entry = calendar.at(c.slot());
      channel_from_json(entry.at("s"), kLoadFeatures, snap.model.params[c].s_channel, snap.model.state[c].s_state);
      channel_from_json(entry.at("r"), features, snap.model.params[c].r_channel, snap.model.state[c].r_state);
      sums.push_back(entry.at("temperature_sum").get<double>());
      counts.push_back(entry.at("temperature_count").get<long long>());
      if (mode == InitMode::batch) {
        snap.model.s_warmup.at(c.slot()) = warmup_from_json(entry.at("s_warmup"), kLoadFeatures);
        snap.model.r_warmup.at(c.slot()) = warmup_from_json(entry.at("r_warmup"), features);
      }
    }
    snap.model.tracker = TemperatureTracker::from_raw(std::move(sums), std::move(counts));

    const json& through = payload.at("learned_through");
    if (!through.is_null()) snap.learned_through = parse_timestamp(through.get<std::string>());
    const json& last = payload.at("last_load");
    if (!last.is_null()) snap.last_load = last.get<double>();
    return snap;
  } catch (const json::exception& e) {
    throw CorruptSnapshot(std::string("malformed snapshot: ") + e.what());
  }
}

void snapshot_save(const Snapshot& snapshot, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write snapshot '" + path.string() + "'");
  out << snapshot_to_string(snapshot);
  if (!out) throw InputError("failed writing snapshot '" + path.string() + "'");
}

Snapshot snapshot_load(const std::filesystem::path& path, int expected_calendar_types,
                       int expected_observation_features) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open snapshot '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return snapshot_from_string(ss.str(), expected_calendar_types, expected_observation_features);
}

}  // namespace aplf::harness
