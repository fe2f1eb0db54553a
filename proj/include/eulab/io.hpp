#pragma once

// Artifact I/O. Numeric text uses %.17g so doubles round-trip bit-exactly;
// every artifact carries the config hash it was produced under.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "eulab/bounds.hpp"
#include "eulab/dynamics.hpp"
#include "eulab/noise.hpp"
#include "eulab/sha256.hpp"

namespace eulab::io {

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string file_sha256(const std::filesystem::path& path) {
  return sha256_hex(read_text(path));
}

/// Small CSV document: "# key=value" comment lines, one header row, data rows.
struct CsvDoc {
  std::map<std::string, std::string> meta;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::string dump() const {
    std::ostringstream out;
    for (const auto& [k, v] : meta) out << "# " << k << "=" << v << "\n";
    for (std::size_t c = 0; c < header.size(); ++c)
      out << header[c] << (c + 1 < header.size() ? "," : "\n");
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c)
        out << fmt(row[c]) << (c + 1 < row.size() ? "," : "\n");
    }
    return out.str();
  }

  static CsvDoc parse(const std::string& text) {
    CsvDoc doc;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      if (line[0] == '#') {
        auto eq = line.find('=');
        if (eq != std::string::npos) {
          std::string key = line.substr(1, eq - 1);
          while (!key.empty() && key.front() == ' ') key.erase(key.begin());
          doc.meta[key] = line.substr(eq + 1);
        }
        continue;
      }
      std::vector<std::string> cells;
      std::string cell;
      std::istringstream ls(line);
      while (std::getline(ls, cell, ',')) cells.push_back(cell);
      if (!have_header) {
        doc.header = cells;
        have_header = true;
        continue;
      }
      std::vector<double> row;
      row.reserve(cells.size());
      for (const auto& c : cells) row.push_back(std::strtod(c.c_str(), nullptr));
      doc.rows.push_back(std::move(row));
    }
    return doc;
  }

  static CsvDoc load(const std::filesystem::path& path) { return parse(read_text(path)); }

  void save(const std::filesystem::path& path) const { write_text(path, dump()); }

  double meta_double(const std::string& key) const {
    auto it = meta.find(key);
    if (it == meta.end()) throw IoError("missing metadata key: " + key);
    return std::strtod(it->second.c_str(), nullptr);
  }
};

// --- noise paths ---------------------------------------------------------------

inline void save_noise_csv(const std::filesystem::path& path, const WienerPath& w,
                           const OuPath& y, const std::string& config_hash = {}) {
  require(w.values.size() == y.values.size(), "path size mismatch");
  CsvDoc doc;
  doc.meta["seed"] = std::to_string(w.seed);
  doc.meta["dt"] = fmt(w.dt);
  doc.meta["t0"] = fmt(w.t0);
  doc.meta["samples"] = std::to_string(w.values.size());
  doc.meta["stationary_var"] = fmt(y.stationary_var);
  if (!config_hash.empty()) doc.meta["config_hash"] = config_hash;
  doc.header = {"time", "w", "y"};
  for (std::size_t k = 0; k < w.values.size(); ++k)
    doc.rows.push_back({w.t0 + static_cast<double>(k) * w.dt, w.values[k], y.values[k]});
  doc.save(path);
}

inline std::pair<WienerPath, OuPath> load_noise_csv(const std::filesystem::path& path) {
  CsvDoc doc = CsvDoc::load(path);
  WienerPath w;
  OuPath y;
  w.seed = static_cast<std::uint64_t>(std::strtoull(doc.meta.at("seed").c_str(), nullptr, 10));
  w.dt = y.dt = doc.meta_double("dt");
  w.t0 = y.t0 = doc.meta_double("t0");
  y.stationary_var = doc.meta_double("stationary_var");
  for (const auto& row : doc.rows) {
    if (row.size() != 3) throw IoError("malformed noise row in " + path.string());
    w.values.push_back(row[1]);
    y.values.push_back(row[2]);
  }
  return {std::move(w), std::move(y)};
}

// --- fields ----------------------------------------------------------------------

inline void save_field(const std::filesystem::path& path, const ScalarField& f,
                       const std::string& config_hash = {}) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  const char magic[8] = {'E', 'U', 'L', 'B', 'F', 'L', 'D', '1'};
  std::int32_t n = f.grid.n;
  std::int32_t hash_len = static_cast<std::int32_t>(config_hash.size());
  out.write(magic, 8);
  out.write(reinterpret_cast<const char*>(&n), sizeof(n));
  out.write(reinterpret_cast<const char*>(&hash_len), sizeof(hash_len));
  out.write(config_hash.data(), hash_len);
  out.write(reinterpret_cast<const char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size() * sizeof(double)));
  if (!out) throw IoError("write failed: " + path.string());
}

inline ScalarField load_field(const std::filesystem::path& path,
                              std::string* config_hash = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open for reading: " + path.string());
  char magic[8];
  std::int32_t n = 0, hash_len = 0;
  in.read(magic, 8);
  in.read(reinterpret_cast<char*>(&n), sizeof(n));
  in.read(reinterpret_cast<char*>(&hash_len), sizeof(hash_len));
  if (!in || std::string(magic, 8) != "EULBFLD1") throw IoError("bad field file: " + path.string());
  if (n < 3 || n > 1 << 14 || hash_len < 0 || hash_len > 256)
    throw IoError("implausible field header in " + path.string());
  std::string hash(static_cast<std::size_t>(hash_len), '\0');
  in.read(hash.data(), hash_len);
  if (config_hash) *config_hash = hash;
  ScalarField f{Grid(n)};
  in.read(reinterpret_cast<char*>(f.data.data()),
          static_cast<std::streamsize>(f.data.size() * sizeof(double)));
  if (!in) throw IoError("truncated field file: " + path.string());
  if (!f.finite()) throw IoError("field file holds non-finite values: " + path.string());
  return f;
}

// --- trajectories ------------------------------------------------------------------

inline void save_trajectory_csv(const std::filesystem::path& path, const TrajectoryRecord& traj,
                                const std::string& config_hash) {
  CsvDoc doc;
  doc.meta["config_hash"] = config_hash;
  doc.meta["tau"] = fmt(traj.tau);
  doc.meta["t_end"] = fmt(traj.t_end);
  doc.meta["sigma"] = fmt(traj.cfg.sigma);
  doc.meta["nu"] = fmt(traj.cfg.nu);
  doc.meta["grid_n"] = std::to_string(traj.cfg.grid.n);
  doc.meta["steps"] = std::to_string(traj.step_count);
  doc.header = {"t",      "y",        "iy",     "v_h",     "v_v",     "rho_l2",
                "rho_linf", "rho_lp2", "rho_lp4", "rho_lp8", "rho_lp16", "rho_lp32",
                "rho_lp64"};
  for (const auto& s : traj.samples) {
    doc.rows.push_back({s.t, s.y, s.iy, s.v_h, s.v_v, s.rho_l2, s.rho_linf, s.rho_lp[0],
                        s.rho_lp[1], s.rho_lp[2], s.rho_lp[3], s.rho_lp[4], s.rho_lp[5]});
  }
  doc.save(path);
}

/// Rebuilds the norm history (states are not persisted).
inline TrajectoryRecord load_trajectory_csv(const std::filesystem::path& path) {
  CsvDoc doc = CsvDoc::load(path);
  TrajectoryRecord traj;
  traj.tau = doc.meta_double("tau");
  traj.t_end = doc.meta_double("t_end");
  traj.cfg.sigma = doc.meta_double("sigma");
  traj.cfg.nu = doc.meta_double("nu");
  traj.cfg.grid = Grid(static_cast<int>(doc.meta_double("grid_n")));
  traj.step_count = static_cast<long>(doc.meta_double("steps"));
  for (const auto& row : doc.rows) {
    if (row.size() != 13) throw IoError("malformed trajectory row in " + path.string());
    NormSample s;
    s.t = row[0];
    s.y = row[1];
    s.iy = row[2];
    s.v_h = row[3];
    s.v_v = row[4];
    s.rho_l2 = row[5];
    s.rho_linf = row[6];
    for (int q = 0; q < 6; ++q) s.rho_lp[q] = row[7 + q];
    traj.samples.push_back(s);
  }
  return traj;
}

// --- reports -----------------------------------------------------------------------

inline void save_report_csv(const std::filesystem::path& path, const BoundCheckReport& rep,
                            const std::string& config_hash) {
  CsvDoc doc;
  doc.meta["config_hash"] = config_hash;
  doc.meta["name"] = rep.name;
  doc.meta["rel_tolerance"] = fmt(rep.rel_tolerance);
  doc.meta["violated"] = rep.violated ? "1" : "0";
  doc.meta["worst_margin"] = fmt(rep.worst_margin);
  doc.header = {"time", "lhs", "rhs", "margin"};
  for (std::size_t k = 0; k < rep.times.size(); ++k)
    doc.rows.push_back({rep.times[k], rep.lhs[k], rep.rhs[k], rep.margin[k]});
  doc.save(path);
}

}  // namespace eulab::io
