#pragma once

// On-disk formats: session CSV + JSON manifest, JSON configs, model
// checkpoints, and supervised tensor files. All floats are written with
// max_digits10 so a rerun with the same seed is byte-identical.

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "serp/dataset.hpp"
#include "serp/kinematics.hpp"
#include "serp/plant.hpp"

namespace serp {

using nlohmann::json;

namespace io_detail {

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

inline void write_text_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

}  // namespace io_detail

inline json geometry_to_json(const ArmGeometry& g) {
  json j;
  j["link_lengths_mm"] = g.link_lengths;
  std::vector<std::string> axes;
  for (HingeAxis a : g.joint_axes) axes.push_back(a == HingeAxis::Z ? "Z" : "X");
  j["joint_axes"] = axes;
  json offsets = json::array();
  for (const Vec3& o : g.marker_offsets) offsets.push_back({o[0], o[1], o[2]});
  j["marker_offsets_mm"] = offsets;
  j["pulley_radii_mm"] = g.pulley_radii;
  return j;
}

inline ArmGeometry geometry_from_json(const json& j) {
  ArmGeometry g;
  g.link_lengths = j.at("link_lengths_mm").get<std::vector<double>>();
  for (const auto& a : j.at("joint_axes")) {
    std::string s = a.get<std::string>();
    if (s != "Z" && s != "X") throw std::runtime_error("geometry: unknown axis label " + s);
    g.joint_axes.push_back(s == "Z" ? HingeAxis::Z : HingeAxis::X);
  }
  for (const auto& o : j.at("marker_offsets_mm"))
    g.marker_offsets.emplace_back(o.at(0).get<double>(), o.at(1).get<double>(),
                                  o.at(2).get<double>());
  g.pulley_radii = j.at("pulley_radii_mm").get<std::vector<double>>();
  return g;
}

inline json plant_config_to_json(const PlantConfig& cfg) {
  json j;
  j["geometry"] = geometry_to_json(cfg.geometry);
  j["backlash_width_rad"] = cfg.backlash_width;
  j["compliance_rad_per_nmm"] = cfg.compliance_per_joint;
  j["deformation_sigma_rad"] = cfg.deformation_sigma;
  j["deformation_tau_s"] = cfg.deformation_tau;
  j["load_noise_sigma"] = cfg.load_noise_sigma;
  j["link_masses_g"] = cfg.link_masses_g;
  j["quantization_step_rad"] = cfg.quantization_step;
  j["dt_s"] = cfg.dt;
  j["p_gain"] = cfg.p_gain;
  j["max_motor_speed_rad_s"] = cfg.max_motor_speed;
  return j;
}

inline PlantConfig plant_config_from_json(const json& j) {
  PlantConfig cfg;
  cfg.geometry = geometry_from_json(j.at("geometry"));
  cfg.backlash_width = j.at("backlash_width_rad").get<double>();
  cfg.compliance_per_joint = j.at("compliance_rad_per_nmm").get<double>();
  cfg.deformation_sigma = j.at("deformation_sigma_rad").get<double>();
  cfg.deformation_tau = j.at("deformation_tau_s").get<double>();
  cfg.load_noise_sigma = j.at("load_noise_sigma").get<double>();
  cfg.link_masses_g = j.at("link_masses_g").get<std::vector<double>>();
  cfg.quantization_step = j.at("quantization_step_rad").get<double>();
  cfg.dt = j.at("dt_s").get<double>();
  cfg.p_gain = j.at("p_gain").get<double>();
  cfg.max_motor_speed = j.at("max_motor_speed_rad_s").get<double>();
  cfg.validate();
  return cfg;
}

// One row per step: t, 9 motor angles, 9 loads, 9 commands, 27 markers.
inline std::string session_to_csv(const SessionLog& log) {
  std::ostringstream os;
  os.precision(17);
  os << "t";
  for (int j = 1; j <= 9; ++j) os << ",motor" << j;
  for (int j = 1; j <= 9; ++j) os << ",load" << j;
  for (int j = 1; j <= 9; ++j) os << ",cmd" << j;
  for (int k = 1; k <= 9; ++k) os << ",x" << k << ",y" << k << ",z" << k;
  os << "\n";
  for (Eigen::Index t = 0; t < log.steps(); ++t) {
    os << t;
    for (int c = 0; c < kSensorDim; ++c) os << "," << log.sensors(t, c);
    for (int c = 0; c < kCommandDim; ++c) os << "," << log.commands(t, c);
    for (int c = 0; c < kMarkerDim; ++c) os << "," << log.markers(t, c);
    os << "\n";
  }
  return os.str();
}

inline SessionLog session_from_csv(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("session csv: empty");
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(std::stod(cell));
    if (row.size() != 1 + kSensorDim + kCommandDim + kMarkerDim)
      throw std::runtime_error("session csv: bad column count");
    rows.push_back(std::move(row));
  }
  SessionLog log;
  const Eigen::Index t_len = static_cast<Eigen::Index>(rows.size());
  log.sensors.resize(t_len, kSensorDim);
  log.commands.resize(t_len, kCommandDim);
  log.markers.resize(t_len, kMarkerDim);
  for (Eigen::Index t = 0; t < t_len; ++t) {
    int c = 1;
    for (int i = 0; i < kSensorDim; ++i) log.sensors(t, i) = rows[t][c++];
    for (int i = 0; i < kCommandDim; ++i) log.commands(t, i) = rows[t][c++];
    for (int i = 0; i < kMarkerDim; ++i) log.markers(t, i) = rows[t][c++];
  }
  return log;
}

inline void save_session(const std::filesystem::path& dir, int index, const SessionLog& log) {
  char name[32];
  std::snprintf(name, sizeof(name), "session_%02d", index);
  std::string csv = session_to_csv(log);
  io_detail::write_text_atomic(dir / (std::string(name) + ".csv"), csv);
  json manifest;
  manifest["session_index"] = index;
  manifest["seed"] = log.seed;
  manifest["steps"] = log.steps();
  manifest["config_hash"] = log.config_hash;
  manifest["content_hash"] = fnv1a(csv);
  io_detail::write_text_atomic(dir / (std::string(name) + ".json"), manifest.dump(2) + "\n");
}

inline SessionLog load_session(const std::filesystem::path& dir, int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "session_%02d", index);
  std::filesystem::path csv_path = dir / (std::string(name) + ".csv");
  if (!std::filesystem::exists(csv_path))
    throw std::runtime_error("missing session file " + csv_path.string() +
                             " (run the generate command first)");
  SessionLog log = session_from_csv(io_detail::read_text(csv_path));
  json manifest = json::parse(io_detail::read_text(dir / (std::string(name) + ".json")));
  log.seed = manifest.at("seed").get<std::uint64_t>();
  log.config_hash = manifest.at("config_hash").get<std::uint64_t>();
  return log;
}

inline json normalizer_to_json(const Normalizer& n) {
  json j;
  j["lo"] = std::vector<double>(n.lo.data(), n.lo.data() + n.lo.size());
  j["hi"] = std::vector<double>(n.hi.data(), n.hi.data() + n.hi.size());
  return j;
}

inline Normalizer normalizer_from_json(const json& j) {
  Normalizer n;
  auto lo = j.at("lo").get<std::vector<double>>();
  auto hi = j.at("hi").get<std::vector<double>>();
  n.lo = Eigen::Map<const Vec>(lo.data(), static_cast<Eigen::Index>(lo.size()));
  n.hi = Eigen::Map<const Vec>(hi.data(), static_cast<Eigen::Index>(hi.size()));
  return n;
}

// Model checkpoint: architecture descriptor, window, normalizer,
// weights, training curve, and the experiment config hash it was
// trained under.
struct Checkpoint {
  std::string method;              // prc-mlp | prc-lin | no-load | lstm
  json architecture;               // model-specific descriptor
  int window = 1;
  Normalizer normalizer;
  Vec weights;
  json training_curve;
  std::uint64_t config_hash = 0;
};

inline void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ck) {
  json j;
  j["method"] = ck.method;
  j["architecture"] = ck.architecture;
  j["window"] = ck.window;
  j["normalizer"] = normalizer_to_json(ck.normalizer);
  j["weights"] = std::vector<double>(ck.weights.data(), ck.weights.data() + ck.weights.size());
  j["training_curve"] = ck.training_curve;
  j["config_hash"] = ck.config_hash;
  io_detail::write_text_atomic(path, j.dump() + "\n");
}

inline Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path))
    throw std::runtime_error("missing checkpoint " + path.string() +
                             " (run the train command first)");
  json j = json::parse(io_detail::read_text(path));
  Checkpoint ck;
  ck.method = j.at("method").get<std::string>();
  ck.architecture = j.at("architecture");
  ck.window = j.at("window").get<int>();
  ck.normalizer = normalizer_from_json(j.at("normalizer"));
  auto w = j.at("weights").get<std::vector<double>>();
  ck.weights = Eigen::Map<const Vec>(w.data(), static_cast<Eigen::Index>(w.size()));
  ck.training_curve = j.at("training_curve");
  ck.config_hash = j.at("config_hash").get<std::uint64_t>();
  return ck;
}

// Supervised tensor file: CSV matrix (inputs then targets per row) with
// a JSON sidecar naming the window, normalizer, split and content hash.
inline void save_supervised_set(const std::filesystem::path& path, const SupervisedSet& set,
                                const Normalizer& norm, const std::string& split_name) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index r = 0; r < set.inputs.rows(); ++r) {
    for (Eigen::Index c = 0; c < set.inputs.cols(); ++c) {
      if (c) os << ",";
      os << set.inputs(r, c);
    }
    for (Eigen::Index c = 0; c < set.targets.cols(); ++c) os << "," << set.targets(r, c);
    os << "\n";
  }
  std::string csv = os.str();
  io_detail::write_text_atomic(path, csv);

  json sidecar;
  sidecar["window"] = set.window;
  sidecar["include_loads"] = set.include_loads;
  sidecar["input_dim"] = set.inputs.cols();
  sidecar["target_dim"] = set.targets.cols();
  sidecar["rows"] = set.inputs.rows();
  sidecar["split"] = split_name;
  sidecar["normalizer"] = normalizer_to_json(norm);
  sidecar["content_hash"] = fnv1a(csv);
  std::filesystem::path side = path;
  side += ".json";
  io_detail::write_text_atomic(side, sidecar.dump(2) + "\n");
}

inline SupervisedSet load_supervised_set(const std::filesystem::path& path) {
  std::filesystem::path side = path;
  side += ".json";
  json sidecar = json::parse(io_detail::read_text(side));
  const Eigen::Index rows = sidecar.at("rows").get<Eigen::Index>();
  const Eigen::Index in_dim = sidecar.at("input_dim").get<Eigen::Index>();
  const Eigen::Index out_dim = sidecar.at("target_dim").get<Eigen::Index>();

  std::string csv = io_detail::read_text(path);
  if (fnv1a(csv) != sidecar.at("content_hash").get<std::uint64_t>())
    throw HashMismatchError("supervised set content hash mismatch: " + path.string());

  SupervisedSet set;
  set.window = sidecar.at("window").get<int>();
  set.include_loads = sidecar.at("include_loads").get<bool>();
  set.inputs.resize(rows, in_dim);
  set.targets.resize(rows, out_dim);
  std::istringstream in(csv);
  std::string line;
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (!std::getline(in, line)) throw std::runtime_error("supervised set: truncated file");
    std::istringstream ls(line);
    std::string cell;
    for (Eigen::Index c = 0; c < in_dim + out_dim; ++c) {
      if (!std::getline(ls, cell, ',')) throw std::runtime_error("supervised set: short row");
      if (c < in_dim)
        set.inputs(r, c) = std::stod(cell);
      else
        set.targets(r, c - in_dim) = std::stod(cell);
    }
  }
  return set;
}

}  // namespace serp
