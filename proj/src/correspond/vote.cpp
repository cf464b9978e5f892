#include <cmath>
#include <map>
#include <utility>

#include "fieldreg/correspond.hpp"

namespace fieldreg {

int flow_bin(int flow, double step) { return static_cast<int>(std::floor((flow + 0.5 * step) / step)); }

VoteResult vote_flows(const FlowField& flows, const VoteParams& params) {
  if (!(params.bin_step > 0.0)) throw Error(ErrorCode::kInvalidArgument, "vote bin_step must be positive");
  if (flows.seeds.empty()) throw Error(ErrorCode::kInsufficientCorrespondences, "flow field has no surviving seed");

  struct Bin {
    std::size_t count = 0;
    double cost_sum = 0.0;
  };
  using Key = std::pair<int, int>;
  std::map<Key, Bin> bins;
  for (const FlowSeed& s : flows.seeds) {
    Bin& b = bins[{flow_bin(s.flow_x, params.bin_step), flow_bin(s.flow_y, params.bin_step)}];
    ++b.count;
    b.cost_sum += s.cost;
  }

  const int reach = params.include_neighbor_bins ? 1 : 0;
  bool have_best = false;
  Key best_key{};
  std::size_t best_count = 0;
  double best_mean = 0.0;
  for (const auto& [key, own] : bins) {
    std::size_t count = 0;
    double cost_sum = 0.0;
    for (int dy = -reach; dy <= reach; ++dy) {
      for (int dx = -reach; dx <= reach; ++dx) {
        const auto it = bins.find({key.first + dx, key.second + dy});
        if (it == bins.end()) continue;
        count += it->second.count;
        cost_sum += it->second.cost_sum;
      }
    }
    const double mean = cost_sum / static_cast<double>(count);
    // Map iteration is lexicographic, so strict comparisons keep the
    // smaller key on a full tie.
    if (!have_best || count > best_count || (count == best_count && mean < best_mean)) {
      have_best = true;
      best_key = key;
      best_count = count;
      best_mean = mean;
    }
  }

  VoteResult result;
  result.bin_x = best_key.first;
  result.bin_y = best_key.second;
  result.score = best_count;
  for (const FlowSeed& s : flows.seeds) {
    const int bx = flow_bin(s.flow_x, params.bin_step);
    const int by = flow_bin(s.flow_y, params.bin_step);
    if (std::abs(bx - best_key.first) <= reach && std::abs(by - best_key.second) <= reach) result.winners.push_back(s);
  }
  return result;
}

}  // namespace fieldreg
