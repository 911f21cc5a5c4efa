#pragma once

#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>

#include "dirlap/common.hpp"
#include "dirlap/spectral.hpp"
#include "json.hpp"

namespace dirlap {

using json = nlohmann::ordered_json;

inline std::string hash_hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// complete_below may be +inf, which JSON numbers cannot carry
inline json encode_bound(double v) {
  if (std::isfinite(v)) return v;
  return "unbounded";
}

inline double decode_bound(const json& j) {
  if (j.is_string()) return std::numeric_limits<double>::infinity();
  return j.get<double>();
}

inline json eigendata_to_json(const EigenData& e) {
  json j;
  j["schema"] = "eig-v1";
  j["dim"] = e.dim;
  j["h"] = e.h;
  j["source"] = e.source;
  j["domain"] = e.domain;
  j["source_hash"] = hash_hex(e.source_hash);
  j["n_nodes"] = e.n_nodes;
  if (e.box[0] > 0) j["box"] = {e.box[0], e.box[1]};
  j["complete_below"] = encode_bound(e.complete_below);
  j["eigenvalues"] = e.eigenvalues;
  json norms = json::array();
  for (const auto& n : e.norms)
    norms.push_back({{"l1", n.l1}, {"l2", n.l2}, {"linf", n.linf}});
  j["norms"] = norms;
  j["integrals"] = e.integrals;
  if (!e.modes.empty()) {
    json modes = json::array();
    for (const auto& m : e.modes)
      modes.push_back({{"component", m.component},
                       {"index", m.index},
                       {"offset", m.offset},
                       {"length", m.length}});
    j["modes"] = modes;
  }
  return j;
}

inline EigenData eigendata_from_json(const json& j) {
  EigenData e;
  try {
    e.dim = j.at("dim").get<int>();
    e.h = j.at("h").get<double>();
    e.source = j.at("source").get<std::string>();
    e.domain = j.value("domain", std::string{});
    if (j.contains("source_hash"))
      e.source_hash = std::stoull(j.at("source_hash").get<std::string>(), nullptr, 16);
    e.n_nodes = j.value("n_nodes", std::int64_t{0});
    if (j.contains("box")) {
      e.box[0] = j.at("box").at(0).get<long>();
      e.box[1] = j.at("box").at(1).get<long>();
    }
    e.complete_below = decode_bound(j.at("complete_below"));
    e.eigenvalues = j.at("eigenvalues").get<std::vector<double>>();
    for (const auto& n : j.at("norms"))
      e.norms.push_back({n.at("l1").get<double>(), n.at("l2").get<double>(),
                         n.at("linf").get<double>()});
    if (j.contains("integrals"))
      e.integrals = j.at("integrals").get<std::vector<double>>();
    if (j.contains("modes"))
      for (const auto& m : j.at("modes"))
        e.modes.push_back({m.at("component").get<int>(), m.at("index").get<long>(),
                           m.at("offset").get<double>(),
                           m.at("length").get<double>()});
  } catch (const json::exception& ex) {
    throw Error("parse", std::string("bad eigendata JSON: ") + ex.what());
  }
  for (std::size_t k = 1; k < e.eigenvalues.size(); ++k)
    if (e.eigenvalues[k] < e.eigenvalues[k - 1])
      throw Error("parse", "eigenvalues not nondecreasing");
  if (e.eigenvalues.size() != e.norms.size())
    throw Error("parse", "eigenvalue/norm length mismatch");
  return e;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& ex) {
    throw Error("parse", path + ": " + ex.what());
  }
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("io", "cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path);
  out << text;
  if (!out) throw Error("io", "write failed for " + path);
}

inline void write_json_file(const std::string& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

// flat little-endian doubles in mask-index order, all eigenfunctions
// concatenated; sidecar <path>.idx.json records the layout
inline void write_vectors_binary(const std::string& path, const EigenData& e) {
  if (e.vectors.empty())
    throw Error("usage", "no eigenvectors present to dump");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path);
  for (const auto& v : e.vectors)
    out.write(reinterpret_cast<const char*>(v.data()),
              static_cast<std::streamsize>(sizeof(double) * v.size()));
  if (!out) throw Error("io", "write failed for " + path);
  json idx;
  idx["schema"] = "eigvec-v1";
  idx["count"] = e.vectors.size();
  idx["n_nodes"] = e.n_nodes;
  idx["order"] = "mask-index";
  idx["element"] = "float64-le";
  idx["source_hash"] = hash_hex(e.source_hash);
  write_json_file(path + ".idx.json", idx);
}

}  // namespace dirlap
