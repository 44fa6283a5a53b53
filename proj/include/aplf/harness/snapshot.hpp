#pragma once

#include "aplf/civil_time.hpp"
#include "aplf/model_types.hpp"
#include "aplf/recursive_learner.hpp"

#include <filesystem>
#include <optional>
#include <string>

namespace aplf::harness {

class VersionMismatch : public InputError {
 public:
  using InputError::InputError;
};

class ShapeMismatch : public InputError {
 public:
  using InputError::InputError;
};

class CorruptSnapshot : public InputError {
 public:
  using InputError::InputError;
};

inline constexpr int kSnapshotVersion = 1;

/// Learner state at a point of the online loop: the model, the hyper
/// parameters it was trained with and how far the data was consumed.
struct Snapshot {
  HyperParams hp;
  OnlineModel model;
  std::optional<Timestamp> learned_through;
  std::optional<double> last_load;
};

/// JSON document {format, version, payload, checksum}; the checksum is
/// FNV-1a 64 over the serialized payload. Doubles round-trip exactly.
std::string snapshot_to_string(const Snapshot& snapshot);

/// Throws CorruptSnapshot on unreadable or checksum-failing input,
/// VersionMismatch on an unknown version and ShapeMismatch when the
/// calendar type count or observation feature count differ from the
/// expected ones.
Snapshot snapshot_from_string(const std::string& text, int expected_calendar_types,
                              int expected_observation_features);

void snapshot_save(const Snapshot& snapshot, const std::filesystem::path& path);
Snapshot snapshot_load(const std::filesystem::path& path, int expected_calendar_types,
                       int expected_observation_features);

}  // namespace aplf::harness
