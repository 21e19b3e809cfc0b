#include "laserpath/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <system_error>

#include "laserpath/error.hpp"

namespace laserpath {

namespace fs = std::filesystem;

namespace {

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    const std::size_t start = i;
    while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i > start) tokens.push_back(line.substr(start, i - start));
  }
  return tokens;
}

bool parse_double(std::string_view token, double& out) {
  if (!token.empty() && token.front() == '+') token.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), out);
  return ec == std::errc() && ptr == token.data() + token.size();
}

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::kParseError, "line " + std::to_string(line) + ": " + what);
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

bool looks_like_pcd(const std::vector<std::string_view>& lines) {
  for (auto line : lines) {
    const auto tokens = split_ws(line);
    if (tokens.empty()) continue;
    if (tokens[0].starts_with("#")) {
      if (line.find(".PCD") != std::string_view::npos) return true;
      continue;
    }
    return tokens[0] == "VERSION" || tokens[0] == "FIELDS";
  }
  return false;
}

PointCloud parse_pcd(const std::vector<std::string_view>& lines) {
  std::vector<std::string> fields;
  std::vector<int> counts;
  std::size_t line_no = 0;
  bool in_data = false;
  std::vector<Point3> points;
  std::array<int, 3> column{-1, -1, -1};
  std::size_t columns_per_point = 0;

  for (auto raw : lines) {
    ++line_no;
    const auto tokens = split_ws(raw);
    if (tokens.empty()) continue;
    if (!in_data) {
      if (tokens[0].starts_with("#")) continue;
      const std::string key(tokens[0]);
      if (key == "FIELDS") {
        for (std::size_t i = 1; i < tokens.size(); ++i) fields.emplace_back(tokens[i]);
      } else if (key == "COUNT") {
        for (std::size_t i = 1; i < tokens.size(); ++i) {
          double c = 0;
          if (!parse_double(tokens[i], c) || c < 1) parse_error(line_no, "bad COUNT entry");
          counts.push_back(static_cast<int>(c));
        }
      } else if (key == "DATA") {
        if (tokens.size() < 2 || tokens[1] != "ascii") {
          parse_error(line_no, "only DATA ascii is supported");
        }
        if (counts.empty()) counts.assign(fields.size(), 1);
        if (counts.size() != fields.size()) parse_error(line_no, "COUNT and FIELDS disagree");
        int offset = 0;
        for (std::size_t f = 0; f < fields.size(); ++f) {
          if (fields[f] == "x") column[0] = offset;
          if (fields[f] == "y") column[1] = offset;
          if (fields[f] == "z") column[2] = offset;
          offset += counts[f];
        }
        if (column[0] < 0 || column[1] < 0 || column[2] < 0) {
          parse_error(line_no, "FIELDS must declare x y z");
        }
        columns_per_point = static_cast<std::size_t>(offset);
        in_data = true;
      } else if (key == "VERSION" || key == "SIZE" || key == "TYPE" || key == "WIDTH" ||
                 key == "HEIGHT" || key == "VIEWPOINT" || key == "POINTS") {
        continue;
      } else {
        parse_error(line_no, "unknown PCD header entry '" + key + "'");
      }
      continue;
    }
    if (tokens.size() != columns_per_point) parse_error(line_no, "wrong number of columns");
    Point3 p;
    for (int a = 0; a < 3; ++a) {
      const auto tok = tokens[static_cast<std::size_t>(column[a])];
      if (tok == "nan" || tok == "NaN") {
        p[a] = std::nan("");
      } else if (!parse_double(tok, p[a])) {
        parse_error(line_no, "not a number: '" + std::string(tok) + "'");
      }
    }
    if (p.hasNaN()) continue;  // invalid returns in organized clouds
    if (!p.allFinite()) parse_error(line_no, "non-finite coordinate");
    points.push_back(p);
  }
  if (!in_data) parse_error(line_no, "PCD header without DATA section");
  if (points.empty()) throw Error(ErrorCode::kEmptyFile, "PCD file holds no points");
  return PointCloud(std::move(points));
}

PointCloud parse_xyz(const std::vector<std::string_view>& lines) {
  std::vector<Point3> points;
  std::size_t line_no = 0;
  for (auto raw : lines) {
    ++line_no;
    const auto hash = raw.find('#');
    const auto tokens = split_ws(raw.substr(0, hash));
    if (tokens.empty()) continue;
    if (tokens.size() != 3) parse_error(line_no, "expected 3 coordinates");
    Point3 p;
    for (int a = 0; a < 3; ++a) {
      if (!parse_double(tokens[static_cast<std::size_t>(a)], p[a]) || !std::isfinite(p[a])) {
        parse_error(line_no, "not a finite number: '" + std::string(tokens[a]) + "'");
      }
    }
    points.push_back(p);
  }
  if (points.empty()) throw Error(ErrorCode::kEmptyFile, "cloud file holds no points");
  return PointCloud(std::move(points));
}

std::string pnm_header(const char* magic, int width, int height) {
  return std::string(magic) + "\n" + std::to_string(width) + " " + std::to_string(height) +
         "\n255\n";
}

// Minimal P5/P6 reader: magic, width, height, maxval separated by whitespace/comments.
std::pair<std::vector<int>, std::size_t> read_pnm_header(const std::string& data,
                                                         std::string_view magic) {
  if (data.size() < 2 || std::string_view(data).substr(0, 2) != magic) {
    throw Error(ErrorCode::kParseError, "not a " + std::string(magic) + " image");
  }
  std::size_t pos = 2;
  std::vector<int> values;
  while (values.size() < 3) {
    while (pos < data.size() && std::isspace(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos < data.size() && data[pos] == '#') {
      while (pos < data.size() && data[pos] != '\n') ++pos;
      continue;
    }
    const std::size_t start = pos;
    while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) ++pos;
    if (pos == start) throw Error(ErrorCode::kParseError, "malformed image header");
    values.push_back(std::stoi(data.substr(start, pos - start)));
  }
  if (pos >= data.size()) throw Error(ErrorCode::kParseError, "image has no pixel data");
  ++pos;  // single whitespace before the raster
  if (values[2] != 255) throw Error(ErrorCode::kParseError, "only maxval 255 is supported");
  return {values, pos};
}

}  // namespace

PointCloud parse_cloud(const std::string& text) {
  std::vector<std::string_view> lines;
  std::string_view all(text);
  while (!all.empty()) {
    const auto nl = all.find('\n');
    auto line = all.substr(0, nl);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    if (nl == std::string_view::npos) break;
    all.remove_prefix(nl + 1);
  }
  return looks_like_pcd(lines) ? parse_pcd(lines) : parse_xyz(lines);
}

PointCloud load_cloud(const fs::path& path) {
  if (!fs::exists(path)) throw Error(ErrorCode::kIoError, "no such file: " + path.string());
  const std::string text = read_file(path);
  if (text.empty()) throw Error(ErrorCode::kEmptyFile, path.string() + " is empty");
  return parse_cloud(text);
}

void save_cloud(const PointCloud& cloud, const fs::path& path) {
  std::string out;
  out.reserve(cloud.size() * 60);
  for (const auto& p : cloud.points()) {
    out += format_double(p.x());
    out += ' ';
    out += format_double(p.y());
    out += ' ';
    out += format_double(p.z());
    out += '\n';
  }
  write_file_atomic(path, out);
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kIoError, "cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      out.close();
      std::error_code ec;
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIoError, "short write to " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIoError, "cannot rename onto " + path.string());
  }
}

std::uint8_t costfield_pixel(const CostField& field, const Cell& cell) {
  if (field.lethal(cell)) return 0;
  const double v = 255.0 * (1.0 - std::min(field.penalty(cell), 1.0));
  return static_cast<std::uint8_t>(std::lround(v));
}

void save_costfield_pgm(const CostField& field, const fs::path& path) {
  std::string out = pnm_header("P5", field.width(), field.height());
  out.reserve(out.size() + field.cell_count());
  for (int r = 0; r < field.height(); ++r) {
    for (int c = 0; c < field.width(); ++c) {
      out.push_back(static_cast<char>(costfield_pixel(field, {r, c})));
    }
  }
  write_file_atomic(path, out);
}

void save_occupancy_pgm(const OccupancyGrid& grid, const fs::path& path) {
  std::string out = pnm_header("P5", grid.width(), grid.height());
  for (auto v : grid.data()) out.push_back(static_cast<char>(v ? 0 : 255));
  write_file_atomic(path, out);
}

GrayImage read_pgm(const fs::path& path) {
  const std::string data = read_file(path);
  const auto [values, pos] = read_pnm_header(data, "P5");
  GrayImage img{values[0], values[1], {}};
  const std::size_t n = static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (data.size() - pos != n) throw Error(ErrorCode::kParseError, "PGM raster size mismatch");
  img.pixels.assign(data.begin() + static_cast<std::ptrdiff_t>(pos), data.end());
  return img;
}

void save_overlay_ppm(const CostField& field, const GridPath& path, const fs::path& file) {
  std::string out = pnm_header("P6", field.width(), field.height());
  const std::size_t header = out.size();
  out.resize(header + 3 * field.cell_count());
  for (int r = 0; r < field.height(); ++r) {
    for (int c = 0; c < field.width(); ++c) {
      const char g = static_cast<char>(costfield_pixel(field, {r, c}));
      const std::size_t at = header + 3 * field.index({r, c});
      out[at] = out[at + 1] = out[at + 2] = g;
    }
  }
  auto paint = [&](const Cell& cell, std::uint8_t red, std::uint8_t green, std::uint8_t blue) {
    if (!field.in_bounds(cell)) return;
    const std::size_t at = header + 3 * field.index(cell);
    out[at] = static_cast<char>(red);
    out[at + 1] = static_cast<char>(green);
    out[at + 2] = static_cast<char>(blue);
  };
  for (const auto& v : path.vertices) paint(v, 255, 0, 0);
  if (!path.vertices.empty()) {
    paint(path.vertices.front(), 0, 255, 0);
    if (path.vertices.back() != path.vertices.front()) paint(path.vertices.back(), 0, 0, 255);
  }
  write_file_atomic(file, out);
}

RgbImage read_ppm(const fs::path& path) {
  const std::string data = read_file(path);
  const auto [values, pos] = read_pnm_header(data, "P6");
  RgbImage img{values[0], values[1], {}};
  const std::size_t n =
      3 * static_cast<std::size_t>(img.width) * static_cast<std::size_t>(img.height);
  if (data.size() - pos != n) throw Error(ErrorCode::kParseError, "PPM raster size mismatch");
  img.pixels.assign(data.begin() + static_cast<std::ptrdiff_t>(pos), data.end());
  return img;
}

void save_path_csv(const GridPath& path, const fs::path& file) {
  std::string out;
  for (const auto& v : path.vertices) {
    out += std::to_string(v.row) + "," + std::to_string(v.col) + "\n";
  }
  write_file_atomic(file, out);
}

std::vector<GridVertex> load_path_csv(const fs::path& file) {
  std::istringstream in(read_file(file));
  std::vector<GridVertex> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) parse_error(line_no, "expected row,col");
    GridVertex v;
    const auto r = std::from_chars(line.data(), line.data() + comma, v.row);
    const auto c = std::from_chars(line.data() + comma + 1, line.data() + line.size(), v.col);
    if (r.ec != std::errc() || c.ec != std::errc() || r.ptr != line.data() + comma ||
        c.ptr != line.data() + line.size()) {
      parse_error(line_no, "expected integer row,col");
    }
    out.push_back(v);
  }
  return out;
}

void save_grid_frame(const GridFrame& frame, int width, int height, const fs::path& path) {
  std::ostringstream out;
  auto vec = [](const Vector3& v) {
    return format_double(v.x()) + " " + format_double(v.y()) + " " + format_double(v.z());
  };
  out << "width=" << width << "\n"
      << "height=" << height << "\n"
      << "resolution=" << format_double(frame.resolution) << "\n"
      << "origin=" << format_double(frame.origin.x()) << " " << format_double(frame.origin.y())
      << "\n"
      << "plane_normal=" << vec(frame.plane.normal) << "\n"
      << "plane_offset=" << format_double(frame.plane.offset) << "\n"
      << "axis_u=" << vec(frame.axis_u) << "\n"
      << "axis_v=" << vec(frame.axis_v) << "\n";
  write_file_atomic(path, out.str());
}

OccupancyGrid load_occupancy(const fs::path& pgm, const fs::path& frame_file) {
  std::istringstream in(read_file(frame_file));
  std::map<std::string, std::vector<double>> kv;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) parse_error(line_no, "expected key=value");
    std::vector<double> values;
    for (auto tok : split_ws(std::string_view(line).substr(eq + 1))) {
      double v = 0;
      if (!parse_double(tok, v)) parse_error(line_no, "not a number");
      values.push_back(v);
    }
    kv[line.substr(0, eq)] = std::move(values);
  }
  auto get = [&](const std::string& key, std::size_t n) {
    const auto it = kv.find(key);
    if (it == kv.end() || it->second.size() != n) {
      throw Error(ErrorCode::kParseError, "grid frame lacks '" + key + "'");
    }
    return it->second;
  };
  GridFrame frame;
  frame.resolution = get("resolution", 1)[0];
  const auto o = get("origin", 2);
  frame.origin = {o[0], o[1]};
  const auto n = get("plane_normal", 3);
  frame.plane = PlaneModel::make(Vector3(n[0], n[1], n[2]).normalized(), get("plane_offset", 1)[0]);
  const auto u = get("axis_u", 3);
  const auto v = get("axis_v", 3);
  frame.axis_u = Vector3(u[0], u[1], u[2]);
  frame.axis_v = Vector3(v[0], v[1], v[2]);
  const int width = static_cast<int>(get("width", 1)[0]);
  const int height = static_cast<int>(get("height", 1)[0]);

  const GrayImage img = read_pgm(pgm);
  if (img.width != width || img.height != height) {
    throw Error(ErrorCode::kParseError, "occupancy image size differs from its frame file");
  }
  OccupancyGrid grid(frame, width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      if (img.pixels[grid.index({r, c})] == 0) grid.set_occupied({r, c});
    }
  }
  return grid;
}

void save_transforms(const std::vector<RigidTransform>& transforms, const fs::path& path) {
  std::string out;
  for (std::size_t k = 0; k < transforms.size(); ++k) {
    if (k > 0) out += "\n";
    const Eigen::Matrix4d m = transforms[k].matrix();
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        out += format_double(m(r, c));
        out += c < 3 ? " " : "\n";
      }
    }
  }
  write_file_atomic(path, out);
}

std::vector<RigidTransform> load_transforms(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::vector<RigidTransform> out;
  std::vector<double> values;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string body = line.substr(0, line.find('#'));
    const auto tokens = split_ws(body);
    if (tokens.empty()) continue;
    if (tokens.size() != 4) parse_error(line_no, "expected 4 matrix entries");
    for (auto tok : tokens) {
      double v = 0;
      if (!parse_double(tok, v)) parse_error(line_no, "not a number");
      values.push_back(v);
    }
    if (values.size() == 16) {
      Eigen::Matrix4d m;
      for (int i = 0; i < 16; ++i) m(i / 4, i % 4) = values[static_cast<std::size_t>(i)];
      out.emplace_back(RigidTransform::orthonormalize(m.topLeftCorner<3, 3>()),
                       m.topRightCorner<3, 1>());
      values.clear();
    }
  }
  if (!values.empty()) parse_error(line_no, "incomplete transform matrix");
  return out;
}

}  // namespace laserpath
