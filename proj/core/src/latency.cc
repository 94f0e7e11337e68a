#include <chrono>
#include <cmath>

#include "trajrl/errors.h"
#include "trajrl/metrics.h"
#include "trajrl/search.h"

namespace trajrl::search {

Latency query_latency(const Planner& planner, std::span<const Scene> scenes,
                      std::size_t min_queries, std::size_t warmup) {
  if (scenes.empty()) throw Error("latency measurement needs at least one scene");
  auto query = [&](const Scene& scene) {
    try {
      planner(scene);
    } catch (const NoPathException&) {
    }
  };
  for (std::size_t i = 0; i < warmup; ++i) query(scenes[i % scenes.size()]);

  const std::size_t total = std::max(min_queries, scenes.size());
  std::vector<double> samples;
  samples.reserve(total);
  for (std::size_t i = 0; i < total; ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    query(scenes[i % scenes.size()]);
    const auto t1 = std::chrono::steady_clock::now();
    samples.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  const auto stats = cost::mean_stderr(samples);
  return Latency{stats.mean, stats.stderr, samples.size()};
}

}  // namespace trajrl::search
