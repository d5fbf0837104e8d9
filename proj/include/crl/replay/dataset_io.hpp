#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "crl/replay/buffer.hpp"

namespace crl {

/// Offline dataset: a binary container `<path>` plus a JSON sidecar
/// `<path>.json` describing the environment.
///
/// Binary layout (all little-endian):
///   char[4]  magic "CRLD"
///   u32      version (1)
///   u32      observation_dim, stored_action_dim, goal_dim
///   u64      trajectory count
///   u64[n]   trajectory lengths (states per trajectory)
///   f64...   per trajectory: states (row by row), actions, commanded goal
struct Dataset {
    int observation_dim = 0;
    int stored_action_dim = 0;
    int goal_dim = 0;
    std::vector<Trajectory> trajectories;
    nlohmann::json sidecar;

    std::int64_t num_transitions() const;
};

inline constexpr std::uint32_t kDatasetVersion = 1;

std::string dataset_sidecar_path(const std::string& path);

/// Throws std::runtime_error on I/O failure.
void save_dataset(const std::string& path, const Dataset& dataset);

/// Validates header, sizes and trajectory invariants. Throws
/// std::runtime_error on I/O or format errors.
Dataset load_dataset(const std::string& path);

/// Loads every trajectory into `buffer` (oldest first).
void fill_buffer(TrajectoryBuffer& buffer, const Dataset& dataset);

}  // namespace crl
