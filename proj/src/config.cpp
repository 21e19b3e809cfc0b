#include "laserpath/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "laserpath/error.hpp"

namespace laserpath {

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw Error(ErrorCode::kConfigError, "invalid value '" + value + "' for key '" + key + "'");
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double v = 0.0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) bad_value(key, value);
  return v;
}

std::uint64_t to_uint(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const char* end = value.data() + value.size();
  const auto [ptr, ec] = std::from_chars(value.data(), end, v);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  bad_value(key, value);
}

std::vector<double> to_doubles(const std::string& key, const std::string& value, std::size_t n) {
  std::string spaced = value;
  for (auto& ch : spaced) {
    if (ch == ',') ch = ' ';
  }
  std::istringstream in(spaced);
  std::vector<double> out;
  std::string tok;
  while (in >> tok) out.push_back(to_double(key, tok));
  if (out.size() != n) bad_value(key, value);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

struct Setting {
  const char* key;
  std::function<void(PipelineConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

template <typename T>
Setting number(const char* key, T PipelineConfig::*member) {
  return {key,
          [member](PipelineConfig& c, const std::string& k, const std::string& v) {
            if constexpr (std::is_floating_point_v<T>) {
              c.*member = to_double(k, v);
            } else {
              c.*member = static_cast<T>(to_uint(k, v));
            }
          },
          [member](const PipelineConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return fmt(c.*member);
            } else {
              return std::to_string(c.*member);
            }
          }};
}

#define LP_DOUBLE(key, expr)                                                                    \
  Setting {                                                                                     \
    key, [](PipelineConfig& c, const std::string& k, const std::string& v) { expr = to_double(k, v); }, \
        [](const PipelineConfig& c) { return fmt(expr); }                                       \
  }
#define LP_UINT(key, expr)                                                                      \
  Setting {                                                                                     \
    key,                                                                                        \
        [](PipelineConfig& c, const std::string& k, const std::string& v) {                    \
          expr = static_cast<std::decay_t<decltype(expr)>>(to_uint(k, v));                      \
        },                                                                                      \
        [](const PipelineConfig& c) { return std::to_string(expr); }                            \
  }
#define LP_BOOL(key, expr)                                                                      \
  Setting {                                                                                     \
    key, [](PipelineConfig& c, const std::string& k, const std::string& v) { expr = to_bool(k, v); }, \
        [](const PipelineConfig& c) { return std::string((expr) ? "true" : "false"); }          \
  }
#define LP_DEGREES(key, expr)                                                                   \
  Setting {                                                                                     \
    key,                                                                                        \
        [](PipelineConfig& c, const std::string& k, const std::string& v) {                    \
          expr = to_double(k, v) * kDeg;                                                        \
        },                                                                                      \
        [](const PipelineConfig& c) { return fmt((expr) / kDeg); }                              \
  }

std::string cell_text(const std::optional<Cell>& c) {
  return c ? std::to_string(c->row) + "," + std::to_string(c->col) : std::string();
}

std::string xy_text(const std::optional<Eigen::Vector2d>& p) {
  return p ? fmt(p->x()) + "," + fmt(p->y()) : std::string();
}

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = {
      number("voxel_edge", &PipelineConfig::voxel_edge),
      number("registration_voxel", &PipelineConfig::registration_voxel),
      number("normal_k", &PipelineConfig::normal_k),
      LP_DOUBLE("fpfh_radius", c.coarse.feature_radius),
      LP_UINT("consensus_iterations", c.coarse.iterations),
      LP_DOUBLE("consensus_threshold", c.coarse.inlier_threshold),
      LP_UINT("consensus_seed", c.coarse.seed),
      LP_DOUBLE("consensus_min_inlier_fraction", c.coarse.min_inlier_fraction),
      LP_BOOL("consensus_mutual_filter", c.coarse.mutual_filter),
      LP_DOUBLE("consensus_edge_similarity", c.coarse.edge_similarity),
      LP_DEGREES("consensus_prior_tolerance_deg", c.coarse.prior_tolerance),
      Setting{"salient_beta",
              [](PipelineConfig& c, const std::string& k, const std::string& v) {
                if (v == "off" || v == "none") {
                  c.coarse.salient_beta.reset();
                } else {
                  c.coarse.salient_beta = to_double(k, v);
                }
              },
              [](const PipelineConfig& c) {
                return c.coarse.salient_beta ? fmt(*c.coarse.salient_beta) : std::string("off");
              }},
      LP_UINT("icp_max_iterations", c.icp.max_iterations),
      LP_DOUBLE("icp_max_distance", c.icp.max_correspondence_distance),
      LP_DOUBLE("icp_translation_epsilon", c.icp.translation_epsilon),
      LP_DOUBLE("icp_rotation_epsilon", c.icp.rotation_epsilon),
      LP_BOOL("icp_surface_gating", c.icp.surface_gating),
      LP_DOUBLE("icp_gating_threshold", c.icp.surfaces.distance_threshold),
      LP_UINT("icp_gating_min_inliers", c.icp.surfaces.min_inliers),
      LP_UINT("icp_gating_max_planes", c.icp.surfaces.max_planes),
      number("ransac_threshold", &PipelineConfig::ransac_threshold),
      number("ransac_iterations", &PipelineConfig::ransac_iterations),
      number("ransac_seed", &PipelineConfig::ransac_seed),
      Setting{"ransac_axis",
              [](PipelineConfig& c, const std::string& k, const std::string& v) {
                const auto a = to_doubles(k, v, 3);
                const Vector3 axis(a[0], a[1], a[2]);
                if (!(axis.norm() > 0.0)) bad_value(k, v);
                c.ransac_axis = axis.normalized();
              },
              [](const PipelineConfig& c) {
                return fmt(c.ransac_axis.x()) + "," + fmt(c.ransac_axis.y()) + "," +
                       fmt(c.ransac_axis.z());
              }},
      LP_DEGREES("ransac_max_tilt_deg", c.ransac_max_tilt),
      LP_DOUBLE("band_low", c.band.band_low),
      LP_DOUBLE("band_high", c.band.band_high),
      LP_DOUBLE("ceiling", c.band.ceiling),
      number("resolution", &PipelineConfig::resolution),
      LP_DOUBLE("embodiment_length", c.embodiment.length),
      LP_DOUBLE("embodiment_width", c.embodiment.width),
      number("sigma_x", &PipelineConfig::sigma_x),
      number("sigma_y", &PipelineConfig::sigma_y),
      LP_BOOL("no_embodiment", c.no_embodiment),
      Setting{"start", [](PipelineConfig& c, const std::string&,
                          const std::string& v) { c.start = parse_cell(v); },
              [](const PipelineConfig& c) { return cell_text(c.start); }},
      Setting{"goal", [](PipelineConfig& c, const std::string&,
                         const std::string& v) { c.goal = parse_cell(v); },
              [](const PipelineConfig& c) { return cell_text(c.goal); }},
      Setting{"start_xy",
              [](PipelineConfig& c, const std::string& k, const std::string& v) {
                const auto a = to_doubles(k, v, 2);
                c.start_xy = Eigen::Vector2d(a[0], a[1]);
              },
              [](const PipelineConfig& c) { return xy_text(c.start_xy); }},
      Setting{"goal_xy",
              [](PipelineConfig& c, const std::string& k, const std::string& v) {
                const auto a = to_doubles(k, v, 2);
                c.goal_xy = Eigen::Vector2d(a[0], a[1]);
              },
              [](const PipelineConfig& c) { return xy_text(c.goal_xy); }},
      LP_UINT("scene.seed", c.scene.seed),
      LP_UINT("scene.scans", c.scene.scans),
      LP_UINT("scene.boxes", c.scene.boxes),
      LP_UINT("scene.points", c.scene.points_per_scan),
      LP_DOUBLE("scene.noise", c.scene.noise_sigma),
      LP_DEGREES("scene.max_rotation_deg", c.scene.max_rotation),
      LP_DOUBLE("scene.max_translation", c.scene.max_translation),
      LP_DOUBLE("scene.sensor_height", c.scene.sensor_height),
      LP_DOUBLE("scene.extent", c.scene.ground_half_extent),
      LP_DOUBLE("scene.range", c.scene.sensor_range),
  };
  return table;
}

#undef LP_DOUBLE
#undef LP_UINT
#undef LP_BOOL
#undef LP_DEGREES

}  // namespace

void PipelineConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0)) throw Error(ErrorCode::kConfigError, std::string(name) + " must be > 0");
  };
  positive(voxel_edge, "voxel_edge");
  positive(registration_voxel, "registration_voxel");
  positive(coarse.feature_radius, "fpfh_radius");
  positive(coarse.inlier_threshold, "consensus_threshold");
  positive(icp.max_correspondence_distance, "icp_max_distance");
  positive(ransac_threshold, "ransac_threshold");
  positive(resolution, "resolution");
  positive(embodiment.length, "embodiment_length");
  positive(embodiment.width, "embodiment_width");
  positive(sigma_x, "sigma_x");
  positive(sigma_y, "sigma_y");
  positive(ransac_max_tilt, "ransac_max_tilt_deg");
  if (normal_k < 3) throw Error(ErrorCode::kConfigError, "normal_k must be >= 3");
  if (ransac_iterations == 0) throw Error(ErrorCode::kConfigError, "ransac_iterations is zero");
  if (!(band.band_low < band.band_high && band.band_high < band.ceiling)) {
    throw Error(ErrorCode::kConfigError, "need band_low < band_high < ceiling");
  }
  try {
    coarse.validate();
    icp.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::kConfigError, e.what());
  }
}

Cell parse_cell(const std::string& text) {
  const auto comma = text.find(',');
  Cell c;
  if (comma == std::string::npos) bad_value("cell", text);
  const std::string r = trim(text.substr(0, comma));
  const std::string col = trim(text.substr(comma + 1));
  const auto a = std::from_chars(r.data(), r.data() + r.size(), c.row);
  const auto b = std::from_chars(col.data(), col.data() + col.size(), c.col);
  if (a.ec != std::errc() || b.ec != std::errc() || a.ptr != r.data() + r.size() ||
      b.ptr != col.data() + col.size() || r.empty() || col.empty()) {
    bad_value("cell", text);
  }
  return c;
}

void apply_setting(PipelineConfig& config, const std::string& key, const std::string& value) {
  for (const auto& s : settings()) {
    if (key == s.key) {
      s.set(config, key, value);
      return;
    }
  }
  throw Error(ErrorCode::kConfigError, "unknown configuration key '" + key + "'");
}

PipelineConfig parse_config(const std::string& text, PipelineConfig base) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError,
                  "line " + std::to_string(line_no) + ": expected key=value");
    }
    try {
      apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const Error& e) {
      throw Error(ErrorCode::kConfigError, "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  base.validate();
  return base;
}

PipelineConfig load_config(const std::filesystem::path& path, PipelineConfig base) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kConfigError, "cannot read config " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

void apply_overrides(PipelineConfig& config, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCode::kConfigError, "override '" + a + "' is not key=value");
    }
    apply_setting(config, trim(a.substr(0, eq)), trim(a.substr(eq + 1)));
  }
  config.validate();
}

std::string dump_config(const PipelineConfig& config) {
  std::string out;
  for (const auto& s : settings()) {
    const std::string v = s.get(config);
    if (v.empty()) continue;
    out += std::string(s.key) + "=" + v + "\n";
  }
  return out;
}

}  // namespace laserpath
