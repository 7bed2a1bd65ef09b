#include "wsconf/mbest.hpp"

#include <algorithm>

namespace wsconf {

RankThreshold rank_conformalize(std::span<const std::int64_t> ranks,
                                std::span<const std::int64_t> offsets, double alpha) {
  require(!ranks.empty(), "rank conformalization: empty rank list");
  require(ranks.size() == offsets.size(), "rank conformalization: ranks and offsets differ in length");
  require(alpha > 0.0 && alpha < 1.0, "rank conformalization: alpha must lie in (0, 1)");
  std::vector<std::int64_t> diffs(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    require(ranks[i] >= 1, "rank conformalization: ranks are 1-based");
    diffs[i] = ranks[i] - offsets[i];
  }
  RankThreshold out;
  out.order_index = conformal_order_index(diffs.size(), alpha);
  if (out.order_index > diffs.size()) {
    out.infinite = true;
    return out;
  }
  auto kth = diffs.begin() + static_cast<std::ptrdiff_t>(out.order_index - 1);
  std::nth_element(diffs.begin(), kth, diffs.end());
  out.q_hat = *kth;
  return out;
}

}  // namespace wsconf
