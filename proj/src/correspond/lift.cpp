#include <fstream>
#include <string>

#include "fieldreg/correspond.hpp"
#include "fieldreg/keyvalue.hpp"

namespace fieldreg {

std::vector<Correspondence3D> lift_to_3d(const std::vector<FlowSeed>& winners, const MultimodalGridMap& a,
                                         const MultimodalGridMap& g, const AnisoAffine& resample,
                                         std::size_t min_count) {
  std::vector<Correspondence3D> out;
  out.reserve(winners.size());
  for (const FlowSeed& s : winners) {
    const int tx = s.x + s.flow_x;
    const int ty = s.y + s.flow_y;
    if (!a.inside(s.x, s.y) || !g.inside(tx, ty)) continue;
    const GridCell& ca = a.cell(s.x, s.y);
    const GridCell& cg = g.cell(tx, ty);
    if (!ca.has_anchor() || !cg.has_anchor()) continue;
    const Vec3 p = a.source().points[static_cast<std::size_t>(ca.anchor)].position();
    const Vec3 q = resample.apply_inverse(g.source().points[static_cast<std::size_t>(cg.anchor)].position());
    out.push_back({p, q});
  }
  if (out.size() < min_count) {
    throw Error(ErrorCode::kInsufficientCorrespondences,
                std::to_string(out.size()) + " correspondences after lifting, need " + std::to_string(min_count));
  }
  return out;
}

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

void write_flow_csv(const FlowField& flows, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path);
  out << "seed_x,seed_y,flow_x,flow_y,cost\n";
  for (const FlowSeed& s : flows.seeds) {
    out << s.x << ',' << s.y << ',' << s.flow_x << ',' << s.flow_y << ',' << format_double(s.cost) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

void write_correspondences_csv(const std::vector<Correspondence3D>& corr, const std::filesystem::path& path) {
  std::ofstream out = open_csv(path);
  out << "px,py,pz,qx,qy,qz\n";
  for (const Correspondence3D& c : corr) {
    out << format_double(c.p.x()) << ',' << format_double(c.p.y()) << ',' << format_double(c.p.z()) << ','
        << format_double(c.q.x()) << ',' << format_double(c.q.y()) << ',' << format_double(c.q.z()) << '\n';
  }
  if (!out) throw Error(ErrorCode::kIo, "write failed for '" + path.string() + "'");
}

}  // namespace fieldreg
