#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "fieldreg/io.hpp"

namespace fieldreg {

namespace {

static_assert(std::endian::native == std::endian::little, "binary PLY I/O assumes a little-endian host");

enum class ScalarType { kInt8, kUInt8, kInt16, kUInt16, kInt32, kUInt32, kFloat32, kFloat64 };

std::optional<ScalarType> parse_type(const std::string& name) {
  if (name == "char" || name == "int8") return ScalarType::kInt8;
  if (name == "uchar" || name == "uint8") return ScalarType::kUInt8;
  if (name == "short" || name == "int16") return ScalarType::kInt16;
  if (name == "ushort" || name == "uint16") return ScalarType::kUInt16;
  if (name == "int" || name == "int32") return ScalarType::kInt32;
  if (name == "uint" || name == "uint32") return ScalarType::kUInt32;
  if (name == "float" || name == "float32") return ScalarType::kFloat32;
  if (name == "double" || name == "float64") return ScalarType::kFloat64;
  return std::nullopt;
}

std::size_t type_size(ScalarType t) {
  switch (t) {
    case ScalarType::kInt8:
    case ScalarType::kUInt8: return 1;
    case ScalarType::kInt16:
    case ScalarType::kUInt16: return 2;
    case ScalarType::kInt32:
    case ScalarType::kUInt32:
    case ScalarType::kFloat32: return 4;
    case ScalarType::kFloat64: return 8;
  }
  return 0;
}

struct Property {
  std::string name;
  ScalarType type = ScalarType::kFloat32;
  bool is_list = false;
  ScalarType count_type = ScalarType::kUInt8;
};

struct Element {
  std::string name;
  std::size_t count = 0;
  std::vector<Property> properties;
};

enum class Format { kAscii, kBinaryLittleEndian };

struct Header {
  Format format = Format::kAscii;
  std::vector<Element> elements;
};

[[noreturn]] void parse_error(const std::filesystem::path& path, const std::string& what) {
  throw Error(ErrorCode::kParse, path.string() + ": " + what);
}

Header read_header(std::istream& in, const std::filesystem::path& path) {
  std::string line;
  if (!std::getline(in, line) || (line != "ply" && line != "ply\r")) {
    parse_error(path, "missing 'ply' magic line");
  }
  Header header;
  bool have_format = false;
  while (true) {
    if (!std::getline(in, line)) parse_error(path, "header not terminated by end_header");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream tokens(line);
    std::string keyword;
    tokens >> keyword;
    if (keyword.empty() || keyword == "comment" || keyword == "obj_info") continue;
    if (keyword == "end_header") break;
    if (keyword == "format") {
      std::string fmt, version;
      tokens >> fmt >> version;
      if (fmt == "ascii") {
        header.format = Format::kAscii;
      } else if (fmt == "binary_little_endian") {
        header.format = Format::kBinaryLittleEndian;
      } else {
        parse_error(path, "unsupported format '" + fmt + "'");
      }
      have_format = true;
    } else if (keyword == "element") {
      Element e;
      long long count = -1;
      tokens >> e.name >> count;
      if (e.name.empty() || !tokens || count < 0) parse_error(path, "malformed element line '" + line + "'");
      e.count = static_cast<std::size_t>(count);
      header.elements.push_back(std::move(e));
    } else if (keyword == "property") {
      if (header.elements.empty()) parse_error(path, "property before any element: '" + line + "'");
      Element& e = header.elements.back();
      std::string type_name;
      tokens >> type_name;
      Property p;
      if (type_name == "list") {
        std::string count_name, item_name;
        tokens >> count_name >> item_name >> p.name;
        auto ct = parse_type(count_name);
        auto it = parse_type(item_name);
        if (!ct || !it || p.name.empty()) parse_error(path, "element '" + e.name + "': malformed list property");
        p.is_list = true;
        p.count_type = *ct;
        p.type = *it;
      } else {
        tokens >> p.name;
        auto t = parse_type(type_name);
        if (!t || p.name.empty()) {
          parse_error(path, "element '" + e.name + "': unknown property type '" + type_name + "'");
        }
        p.type = *t;
      }
      e.properties.push_back(std::move(p));
    } else {
      parse_error(path, "unexpected header keyword '" + keyword + "'");
    }
  }
  if (!have_format) parse_error(path, "missing format line");
  return header;
}

double read_binary_scalar(std::istream& in, ScalarType t) {
  std::array<char, 8> buf{};
  in.read(buf.data(), static_cast<std::streamsize>(type_size(t)));
  switch (t) {
    case ScalarType::kInt8: { std::int8_t v; std::memcpy(&v, buf.data(), 1); return v; }
    case ScalarType::kUInt8: { std::uint8_t v; std::memcpy(&v, buf.data(), 1); return v; }
    case ScalarType::kInt16: { std::int16_t v; std::memcpy(&v, buf.data(), 2); return v; }
    case ScalarType::kUInt16: { std::uint16_t v; std::memcpy(&v, buf.data(), 2); return v; }
    case ScalarType::kInt32: { std::int32_t v; std::memcpy(&v, buf.data(), 4); return v; }
    case ScalarType::kUInt32: { std::uint32_t v; std::memcpy(&v, buf.data(), 4); return v; }
    case ScalarType::kFloat32: { float v; std::memcpy(&v, buf.data(), 4); return v; }
    case ScalarType::kFloat64: { double v; std::memcpy(&v, buf.data(), 8); return v; }
  }
  return 0.0;
}

struct VertexLayout {
  int x = -1, y = -1, z = -1, red = -1, green = -1, blue = -1;
};

VertexLayout vertex_layout(const Element& vertex, const std::filesystem::path& path) {
  VertexLayout layout;
  for (std::size_t i = 0; i < vertex.properties.size(); ++i) {
    const Property& p = vertex.properties[i];
    const int idx = static_cast<int>(i);
    if (p.is_list) continue;
    if (p.name == "x") layout.x = idx;
    else if (p.name == "y") layout.y = idx;
    else if (p.name == "z") layout.z = idx;
    else if (p.name == "red") layout.red = idx;
    else if (p.name == "green") layout.green = idx;
    else if (p.name == "blue") layout.blue = idx;
  }
  if (layout.x < 0 || layout.y < 0 || layout.z < 0) {
    throw Error(ErrorCode::kSchema, path.string() + ": element 'vertex' lacks x/y/z properties");
  }
  const char* missing = layout.red < 0 ? "red" : layout.green < 0 ? "green" : layout.blue < 0 ? "blue" : nullptr;
  if (missing != nullptr) {
    throw Error(ErrorCode::kSchema,
                path.string() + ": element 'vertex' lacks color property '" + missing + "'");
  }
  return layout;
}

// Full-scale value of a color channel; divided rather than multiplied so
// that k / 255 comes back bit-exact.
double color_range(ScalarType t) {
  switch (t) {
    case ScalarType::kUInt8: return 255.0;
    case ScalarType::kUInt16: return 65535.0;
    case ScalarType::kFloat32:
    case ScalarType::kFloat64: return 1.0;
    default: return 255.0;
  }
}

GeoPoint to_point(const std::vector<double>& values, const VertexLayout& l, const Element& vertex) {
  GeoPoint p;
  p.x = values[l.x];
  p.y = values[l.y];
  p.z = values[l.z];
  p.r = std::clamp(values[l.red] / color_range(vertex.properties[l.red].type), 0.0, 1.0);
  p.g = std::clamp(values[l.green] / color_range(vertex.properties[l.green].type), 0.0, 1.0);
  p.b = std::clamp(values[l.blue] / color_range(vertex.properties[l.blue].type), 0.0, 1.0);
  return p;
}

void skip_binary_element(std::istream& in, const Element& e, const std::filesystem::path& path) {
  for (std::size_t i = 0; i < e.count; ++i) {
    for (const Property& p : e.properties) {
      std::size_t n = 1;
      if (p.is_list) {
        const double c = read_binary_scalar(in, p.count_type);
        if (c < 0) parse_error(path, "element '" + e.name + "': negative list length");
        n = static_cast<std::size_t>(c);
      }
      in.ignore(static_cast<std::streamsize>(n * type_size(p.type)));
    }
    if (!in) parse_error(path, "element '" + e.name + "': truncated data");
  }
}

void skip_ascii_element(std::istream& in, const Element& e, const std::filesystem::path& path) {
  std::string line;
  for (std::size_t i = 0; i < e.count; ++i) {
    if (!std::getline(in, line)) parse_error(path, "element '" + e.name + "': truncated data");
  }
}

}  // namespace

ColoredGeoCloud read_ply(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  const Header header = read_header(in, path);

  ColoredGeoCloud cloud;
  bool found_vertex = false;
  for (const Element& e : header.elements) {
    if (e.name != "vertex") {
      if (header.format == Format::kAscii) skip_ascii_element(in, e, path);
      else skip_binary_element(in, e, path);
      continue;
    }
    found_vertex = true;
    const VertexLayout layout = vertex_layout(e, path);
    for (const Property& p : e.properties) {
      if (p.is_list) parse_error(path, "element 'vertex': list property '" + p.name + "' not supported");
    }
    if (e.count == 0) throw Error(ErrorCode::kEmptyCloud, path.string() + ": element 'vertex' has zero entries");
    cloud.points.reserve(e.count);
    std::vector<double> values(e.properties.size());
    std::string line;
    for (std::size_t i = 0; i < e.count; ++i) {
      if (header.format == Format::kAscii) {
        if (!std::getline(in, line)) parse_error(path, "element 'vertex': truncated at entry " + std::to_string(i));
        std::istringstream tokens(line);
        for (double& v : values) {
          if (!(tokens >> v)) parse_error(path, "element 'vertex': malformed entry " + std::to_string(i));
        }
      } else {
        for (std::size_t k = 0; k < values.size(); ++k) values[k] = read_binary_scalar(in, e.properties[k].type);
        if (!in) parse_error(path, "element 'vertex': truncated at entry " + std::to_string(i));
      }
      cloud.points.push_back(to_point(values, layout, e));
    }
  }
  if (!found_vertex) throw Error(ErrorCode::kSchema, path.string() + ": no 'vertex' element");
  return cloud;
}

void write_ply(const ColoredGeoCloud& cloud, const std::filesystem::path& path) {
  validate(cloud);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << "ply\nformat binary_little_endian 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property float x\nproperty float y\nproperty float z\n"
      << "property uchar red\nproperty uchar green\nproperty uchar blue\n"
      << "end_header\n";
  std::vector<char> record(15);
  for (const GeoPoint& p : cloud.points) {
    const float xyz[3] = {static_cast<float>(p.x), static_cast<float>(p.y), static_cast<float>(p.z)};
    std::memcpy(record.data(), xyz, sizeof(xyz));
    const double rgb[3] = {p.r, p.g, p.b};
    for (int c = 0; c < 3; ++c) {
      record[12 + c] = static_cast<char>(static_cast<std::uint8_t>(std::lround(rgb[c] * 255.0)));
    }
    out.write(record.data(), static_cast<std::streamsize>(record.size()));
  }
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

CloudFileBundle CloudFileBundle::from_geometry(const std::filesystem::path& geometry) {
  CloudFileBundle b;
  b.geometry_path = geometry;
  b.meta_path = geometry;
  b.meta_path.replace_extension(".meta");
  return b;
}

ColoredGeoCloud load_cloud(const CloudFileBundle& bundle) {
  ColoredGeoCloud cloud = read_ply(bundle.geometry_path);
  const GeoMetadata meta = read_sidecar(bundle.meta_path);
  cloud.geo_origin = meta.origin;
  cloud.heading_rad = meta.heading_rad;
  validate(cloud);
  return cloud;
}

void save_cloud(const ColoredGeoCloud& cloud, const CloudFileBundle& bundle) {
  validate(cloud);
  write_ply(cloud, bundle.geometry_path);
  write_sidecar({cloud.geo_origin, cloud.heading_rad, std::nullopt}, bundle.meta_path);
}

}  // namespace fieldreg
