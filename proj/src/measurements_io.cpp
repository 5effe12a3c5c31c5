#include "treegls/measurements_io.hpp"

#include <utility>

#include <json.hpp>

#include "treegls/errors.hpp"
#include "treegls/store_io.hpp"

namespace treegls {

namespace {

using nlohmann::json;

json parse_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ValidationError(path + ": " + e.what());
  }
}

Vector to_vector(const json& j, const std::string& ctx) {
  if (!j.is_array()) throw ValidationError(ctx + ": expected an array of numbers");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(ctx + ": entry " + std::to_string(i) + " is not a number");
    v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  }
  return v;
}

Matrix to_matrix(const json& j, const std::string& ctx) {
  if (!j.is_array() || j.empty()) throw ValidationError(ctx + ": expected an array of rows");
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  if (cols == 0) throw ValidationError(ctx + ": rows must be nonempty arrays");
  Matrix m(j.size(), cols);
  for (size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_array() || j[i].size() != cols) {
      throw ValidationError(ctx + ": row " + std::to_string(i) + " has the wrong length");
    }
    m.row(static_cast<Eigen::Index>(i)) = to_vector(j[i], ctx + " row " + std::to_string(i));
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(vector_to_json(m.row(i)));
  return rows;
}

// Shared across measurement and sim files: vertex records with string ids
// and parent references become a dense-id Tree.
struct ParsedVertices {
  Tree tree;
  std::vector<std::string> names;
  std::unordered_map<std::string, int> ids;
  std::vector<const json*> records;  // by vertex id
};

ParsedVertices parse_vertices(const json& doc, const std::string& path) {
  if (!doc.contains("vertices") || !doc["vertices"].is_array() || doc["vertices"].empty()) {
    throw ValidationError(path + ": needs a nonempty 'vertices' array");
  }
  ParsedVertices out;
  const json& verts = doc["vertices"];
  for (size_t i = 0; i < verts.size(); ++i) {
    const json& rec = verts[i];
    if (!rec.contains("id") || !rec["id"].is_string()) {
      throw ValidationError(path + ": vertex record " + std::to_string(i) + " needs a string 'id'");
    }
    const std::string name = rec["id"].get<std::string>();
    if (!out.ids.emplace(name, static_cast<int>(i)).second) {
      throw DuplicateVertex(path + ": vertex '" + name + "' defined twice");
    }
    out.names.push_back(name);
    out.records.push_back(&rec);
  }

  std::vector<std::pair<VertexId, VertexId>> pairs;
  int root = -1;
  for (size_t i = 0; i < verts.size(); ++i) {
    const json& rec = verts[i];
    if (!rec.contains("parent")) {
      throw ValidationError(path + ": vertex '" + out.names[i] + "' needs a 'parent' (or null)");
    }
    if (rec["parent"].is_null()) {
      if (root >= 0) {
        throw MultipleRoots(path + ": both '" + out.names[root] + "' and '" + out.names[i] +
                            "' have a null parent");
      }
      root = static_cast<int>(i);
      continue;
    }
    const std::string pname = rec["parent"].get<std::string>();
    auto it = out.ids.find(pname);
    if (it == out.ids.end()) {
      throw OrphanVertex(path + ": parent '" + pname + "' of '" + out.names[i] +
                         "' is not defined");
    }
    pairs.emplace_back(static_cast<int>(i), it->second);
  }
  if (root < 0) throw CycleDetected(path + ": no root (every vertex declares a parent)");
  out.tree = build_tree(pairs, root);
  return out;
}

RegionQuery parse_query_body(const json& rec, const std::unordered_map<std::string, int>& ids,
                             int n, double default_alpha, bool default_clamp,
                             const std::string& ctx) {
  RegionQuery rq;
  const bool has_dense = rec.contains("q");
  const bool has_unit = rec.contains("q_unit");
  if (has_dense == has_unit) {
    throw ValidationError(ctx + ": give exactly one of 'q' (vector) or 'q_unit' (index)");
  }
  if (has_dense) {
    rq.q = to_vector(rec["q"], ctx + " q");
    if (rq.q.size() != n) {
      throw DimensionMismatch(ctx + ": q has length " + std::to_string(rq.q.size()) +
                              ", blocks are length " + std::to_string(n));
    }
  } else {
    const int idx = rec["q_unit"].get<int>();
    if (idx < 0 || idx >= n) {
      throw OutOfDomain(ctx + ": q_unit " + std::to_string(idx) + " outside 0.." +
                        std::to_string(n - 1));
    }
    rq.q = Vector::Zero(n);
    rq.q(idx) = 1.0;
  }
  if (!rec.contains("H") || !rec["H"].is_array() || rec["H"].empty()) {
    throw EmptyRegion(ctx + ": needs a nonempty 'H' array of leaf names");
  }
  for (const json& h : rec["H"]) {
    const std::string name = h.get<std::string>();
    auto it = ids.find(name);
    if (it == ids.end()) throw UnknownVertex(ctx + ": region vertex '" + name + "' unknown");
    rq.H.push_back(it->second);
  }
  rq.alpha = rec.contains("alpha") ? rec["alpha"].get<double>() : default_alpha;
  rq.clamp_nonnegative = rec.contains("clamp") ? rec["clamp"].get<bool>() : default_clamp;
  return rq;
}

std::vector<NamedQuery> parse_queries(const json& doc,
                                      const std::unordered_map<std::string, int>& ids, int n,
                                      double default_alpha, bool default_clamp,
                                      const std::string& path) {
  if (!doc.contains("queries") || !doc["queries"].is_array() || doc["queries"].empty()) {
    throw ValidationError(path + ": needs a nonempty 'queries' array");
  }
  std::vector<NamedQuery> out;
  const json& arr = doc["queries"];
  for (size_t i = 0; i < arr.size(); ++i) {
    const std::string fallback = "q" + std::to_string(i);
    const std::string id =
        arr[i].contains("id") ? arr[i]["id"].get<std::string>() : fallback;
    try {
      out.push_back(
          {id, parse_query_body(arr[i], ids, n, default_alpha, default_clamp, "query '" + id + "'")});
    } catch (const json::exception& e) {
      throw ValidationError(path + ": query '" + id + "': " + e.what());
    }
  }
  return out;
}

int parse_n(const json& doc, const std::string& path) {
  if (!doc.contains("n") || !doc["n"].is_number_integer() || doc["n"].get<int>() < 1) {
    throw ValidationError(path + ": needs a positive integer 'n'");
  }
  return doc["n"].get<int>();
}

}  // namespace

MeasurementsFile load_measurements(const std::string& path) {
  const json doc = parse_json(path);
  MeasurementsFile file;
  file.n = parse_n(doc, path);

  ParsedVertices parsed = parse_vertices(doc, path);
  file.tree = std::move(parsed.tree);
  file.names = std::move(parsed.names);
  file.ids = std::move(parsed.ids);

  file.meas.resize(file.tree.vertex_count());
  for (int v = 0; v < file.tree.vertex_count(); ++v) {
    const json& rec = *parsed.records[v];
    const std::string ctx = path + ": vertex '" + file.names[v] + "'";
    try {
      VertexMeasurements& m = file.meas[v];
      if (!rec.contains("S")) throw ValidationError(ctx + ": missing 'S'");
      m.S = to_matrix(rec["S"], ctx + " S");
      if (m.S.cols() != file.n) {
        throw DimensionMismatch(ctx + ": S has " + std::to_string(m.S.cols()) +
                                " columns, expected n=" + std::to_string(file.n));
      }
      if (!rec.contains("y")) throw ValidationError(ctx + ": missing 'y'");
      m.y = to_vector(rec["y"], ctx + " y");
      const bool has_diag = rec.contains("var");
      const bool has_full = rec.contains("var_full");
      if (has_diag == has_full) {
        throw ValidationError(ctx + ": give exactly one of 'var' (diagonal) or 'var_full'");
      }
      if (has_diag) {
        m.diagonal_noise = true;
        m.noise_diag = to_vector(rec["var"], ctx + " var");
      } else {
        m.diagonal_noise = false;
        m.noise_full = to_matrix(rec["var_full"], ctx + " var_full");
      }
      if (m.y.size() != m.S.rows() ||
          (m.diagonal_noise ? m.noise_diag.size() != m.S.rows()
                            : m.noise_full.rows() != m.S.rows())) {
        throw DimensionMismatch(ctx + ": S, y and the noise description disagree on m");
      }
    } catch (const json::exception& e) {
      throw ValidationError(ctx + ": " + e.what());
    }
  }
  return file;
}

void save_measurements(const MeasurementsFile& file, const std::string& path) {
  json doc;
  doc["version"] = 1;
  doc["n"] = file.n;
  json verts = json::array();
  for (int v = 0; v < file.tree.vertex_count(); ++v) {
    json rec;
    rec["id"] = file.names[v];
    if (file.tree.parent[v] < 0) {
      rec["parent"] = nullptr;
    } else {
      rec["parent"] = file.names[file.tree.parent[v]];
    }
    rec["S"] = matrix_to_json(file.meas[v].S);
    rec["y"] = vector_to_json(file.meas[v].y);
    if (file.meas[v].diagonal_noise) {
      rec["var"] = vector_to_json(file.meas[v].noise_diag);
    } else {
      rec["var_full"] = matrix_to_json(file.meas[v].noise_full);
    }
    verts.push_back(std::move(rec));
  }
  doc["vertices"] = std::move(verts);
  write_file_atomic(path, doc.dump(2) + "\n");
}

std::vector<NamedQuery> load_queries(const std::string& path,
                                     const std::unordered_map<std::string, int>& ids, int n,
                                     double default_alpha, bool default_clamp) {
  const json doc = parse_json(path);
  return parse_queries(doc, ids, n, default_alpha, default_clamp, path);
}

SimFile load_sim_config(const std::string& path) {
  const json doc = parse_json(path);
  SimFile file;
  file.cfg.n = parse_n(doc, path);

  ParsedVertices parsed = parse_vertices(doc, path);
  file.cfg.tree = std::move(parsed.tree);
  file.names = std::move(parsed.names);
  const int v_count = file.cfg.tree.vertex_count();

  try {
    file.cfg.rng_seed = doc.contains("seed") ? doc["seed"].get<std::uint64_t>() : 0;
    if (!doc.contains("replicates")) throw ValidationError(path + ": needs 'replicates'");
    file.cfg.replicates = doc["replicates"].get<int>();
    const std::string noise = doc.contains("noise") ? doc["noise"].get<std::string>() : "gaussian";
    if (noise == "gaussian") {
      file.cfg.noise_kind = NoiseKind::kContinuousGaussian;
    } else if (noise == "discrete-gaussian") {
      file.cfg.noise_kind = NoiseKind::kDiscreteGaussian;
    } else {
      throw OutOfDomain(path + ": noise must be 'gaussian' or 'discrete-gaussian', got '" +
                        noise + "'");
    }
    if (doc.contains("alphas")) {
      for (const json& a : doc["alphas"]) file.cfg.alphas.push_back(a.get<double>());
    }
  } catch (const json::exception& e) {
    throw ValidationError(path + ": " + e.what());
  }

  file.cfg.S.resize(v_count);
  file.cfg.noise_diag.resize(v_count);
  for (int v = 0; v < v_count; ++v) {
    const json& rec = *parsed.records[v];
    const std::string ctx = path + ": vertex '" + file.names[v] + "'";
    try {
      if (!rec.contains("S")) throw ValidationError(ctx + ": missing 'S'");
      file.cfg.S[v] = to_matrix(rec["S"], ctx + " S");
      if (!rec.contains("var")) throw ValidationError(ctx + ": missing diagonal 'var'");
      file.cfg.noise_diag[v] = to_vector(rec["var"], ctx + " var");
    } catch (const json::exception& e) {
      throw ValidationError(ctx + ": " + e.what());
    }
  }

  if (!doc.contains("true_beta") || !doc["true_beta"].is_object()) {
    throw ValidationError(path + ": needs a 'true_beta' object keyed by leaf name");
  }
  const auto& leaves = file.cfg.tree.leaves();
  file.cfg.true_beta_leaves.resize(leaves.size());
  for (size_t j = 0; j < leaves.size(); ++j) {
    const std::string& name = file.names[leaves[j]];
    if (!doc["true_beta"].contains(name)) {
      throw ValidationError(path + ": true_beta is missing leaf '" + name + "'");
    }
    file.cfg.true_beta_leaves[j] = to_vector(doc["true_beta"][name], path + ": true_beta " + name);
  }
  if (doc["true_beta"].size() != leaves.size()) {
    throw ValidationError(path + ": true_beta must list exactly the leaves");
  }

  file.queries = parse_queries(doc, parsed.ids, file.cfg.n, 0.05, false, path);
  return file;
}

}  // namespace treegls
