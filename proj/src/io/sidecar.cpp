#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>

#include "fieldreg/io.hpp"
#include "fieldreg/keyvalue.hpp"

namespace fieldreg {

GeoMetadata read_sidecar(const std::filesystem::path& path) {
  const KeyValueFile kv = read_key_value_file(path);
  GeoMetadata meta;
  const auto require = [&](const char* key) {
    auto it = kv.values.find(key);
    if (it == kv.values.end()) {
      throw Error(ErrorCode::kSchema, path.string() + ": missing key '" + key + "'");
    }
    return parse_double(it->second, path.string() + ": key '" + key + "'");
  };
  meta.origin.latitude_deg = require("lat");
  meta.origin.longitude_deg = require("lon");
  meta.origin.altitude_m = require("alt");
  meta.heading_rad = require("heading_rad");
  if (auto it = kv.values.find("scale_note"); it != kv.values.end()) meta.scale_note = it->second;
  for (const auto& [key, value] : kv.values) {
    if (key != "lat" && key != "lon" && key != "alt" && key != "heading_rad" && key != "scale_note") {
      throw Error(ErrorCode::kParse, path.string() + ": unknown key '" + key + "'");
    }
  }
  if (std::abs(meta.origin.latitude_deg) > 90.0 || std::abs(meta.origin.longitude_deg) > 180.0) {
    throw Error(ErrorCode::kValidation, path.string() + ": geo origin out of range");
  }
  return meta;
}

void write_sidecar(const GeoMetadata& meta, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  out << "lat=" << format_double(meta.origin.latitude_deg) << "\n"
      << "lon=" << format_double(meta.origin.longitude_deg) << "\n"
      << "alt=" << format_double(meta.origin.altitude_m) << "\n"
      << "heading_rad=" << format_double(meta.heading_rad) << "\n";
  if (meta.scale_note) out << "scale_note=" << *meta.scale_note << "\n";
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

}  // namespace fieldreg
