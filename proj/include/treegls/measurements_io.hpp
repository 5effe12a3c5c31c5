#pragma once

// Human-readable JSON formats: measurement files (tree + per-vertex S, y,
// noise), query batches, and simulation configs. External string names map
// to dense vertex ids at ingestion, in file order.

#include <string>
#include <unordered_map>
#include <vector>

#include "treegls/model.hpp"
#include "treegls/query.hpp"
#include "treegls/sim.hpp"
#include "treegls/spine.hpp"

namespace treegls {

struct MeasurementsFile {
  int n = 0;
  Tree tree;
  std::vector<VertexMeasurements> meas;    // by vertex id
  std::vector<std::string> names;          // vertex id -> name
  std::unordered_map<std::string, int> ids;  // name -> vertex id
};

MeasurementsFile load_measurements(const std::string& path);
// Serializes losslessly (shortest round-trip doubles) and writes atomically.
void save_measurements(const MeasurementsFile& file, const std::string& path);

struct NamedQuery {
  std::string id;
  RegionQuery rq;
};

// Query batch against a set of vertex names. Records may give q as a dense
// vector ("q") or a unit-vector index ("q_unit"); alpha and clamp fall back
// to the provided defaults when absent.
std::vector<NamedQuery> load_queries(const std::string& path,
                                     const std::unordered_map<std::string, int>& ids, int n,
                                     double default_alpha, bool default_clamp);

struct SimFile {
  SimConfig cfg;
  std::vector<NamedQuery> queries;
  std::vector<std::string> names;  // vertex id -> name
};

SimFile load_sim_config(const std::string& path);

}  // namespace treegls
