#pragma once

// Binary persistence of estimator state. The file carries the tree topology,
// the block width, per-vertex external names, and exactly the per-vertex
// blocks downstream consumers need (beta_final, var_final, A, var_up);
// symmetric matrices are stored as lower triangles. No timestamps or other
// varying fields: identical state writes byte-identical files.

#include <string>
#include <vector>

#include "treegls/twopass.hpp"

namespace treegls {

struct LoadedStore {
  StateStore store;
  std::vector<std::string> names;  // vertex id -> external name
};

// Writes atomically: temp file in the target directory, then rename.
// `names` maps vertex ids to external names (one per vertex).
void save_store(const StateStore& store, const std::vector<std::string>& names,
                const std::string& path);

// Rebuilds the tree and the persisted per-vertex blocks. The local and
// pre-projection estimates are not part of the file; those fields come back
// empty, and every query/covariance entry point works without them.
LoadedStore load_store(const std::string& path);

// Shared file helpers (atomic replace semantics for writers).
std::string read_file(const std::string& path);
void write_file_atomic(const std::string& path, const std::string& data);

}  // namespace treegls
