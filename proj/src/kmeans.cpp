#include <algorithm>
#include <random>

#include "grio/gaussian_model.hpp"

namespace grio {

namespace {

struct Cluster {
  std::vector<int> indices;
  Vec3 center = Vec3::Zero();
  double sse = 0.0;
};

Cluster make_cluster(std::span<const Vec3> cloud, std::vector<int> indices) {
  Cluster c;
  c.indices = std::move(indices);
  for (int i : c.indices) c.center += cloud[i];
  c.center /= static_cast<double>(c.indices.size());
  for (int i : c.indices) c.sse += (cloud[i] - c.center).squaredNorm();
  return c;
}

// 2-means with random-pair restarts; returns false when every restart left a
// side empty (all points coincide).
bool split_two_means(std::span<const Vec3> cloud, const Cluster& parent, std::mt19937_64& rng,
                     const KMeansOptions& options, Cluster& left, Cluster& right) {
  const int n = static_cast<int>(parent.indices.size());
  std::uniform_int_distribution<int> pick(0, n - 1);
  double best_sse = std::numeric_limits<double>::infinity();
  std::vector<char> best_side;
  std::vector<char> side(n);

  for (int r = 0; r < options.restarts; ++r) {
    const int a = pick(rng);
    int b = pick(rng);
    if (n > 1) {
      while (b == a) b = pick(rng);
    }
    Vec3 c0 = cloud[parent.indices[a]];
    Vec3 c1 = cloud[parent.indices[b]];

    bool valid = false;
    for (int it = 0; it < options.lloyd_iterations; ++it) {
      bool changed = false;
      Vec3 s0 = Vec3::Zero(), s1 = Vec3::Zero();
      int n0 = 0, n1 = 0;
      for (int k = 0; k < n; ++k) {
        const Vec3& p = cloud[parent.indices[k]];
        const char s = (p - c1).squaredNorm() < (p - c0).squaredNorm() ? 1 : 0;
        if (it == 0 || s != side[k]) changed = true;
        side[k] = s;
        if (s) {
          s1 += p;
          ++n1;
        } else {
          s0 += p;
          ++n0;
        }
      }
      valid = n0 > 0 && n1 > 0;
      if (!valid) break;
      c0 = s0 / n0;
      c1 = s1 / n1;
      if (!changed) break;
    }
    if (!valid) continue;

    double sse = 0.0;
    for (int k = 0; k < n; ++k) {
      sse += (cloud[parent.indices[k]] - (side[k] ? c1 : c0)).squaredNorm();
    }
    if (sse < best_sse) {
      best_sse = sse;
      best_side = side;
    }
  }
  if (best_side.empty()) return false;

  std::vector<int> li, ri;
  for (int k = 0; k < n; ++k) {
    (best_side[k] ? ri : li).push_back(parent.indices[k]);
  }
  left = make_cluster(cloud, std::move(li));
  right = make_cluster(cloud, std::move(ri));
  return true;
}

}  // namespace

std::vector<Vec3> bisecting_kmeans(std::span<const Vec3> cloud, int k, std::uint64_t seed,
                                   const KMeansOptions& options) {
  std::vector<Vec3> centers;
  if (cloud.empty() || k < 1) return centers;
  k = std::min<int>(k, static_cast<int>(cloud.size()));

  std::mt19937_64 rng(seed);
  std::vector<int> all(cloud.size());
  for (std::size_t i = 0; i < cloud.size(); ++i) all[i] = static_cast<int>(i);
  std::vector<Cluster> clusters{make_cluster(cloud, std::move(all))};

  while (static_cast<int>(clusters.size()) < k) {
    // Largest within-cluster SSE first; ties go to the earlier cluster.
    int target = -1;
    for (int c = 0; c < static_cast<int>(clusters.size()); ++c) {
      if (clusters[c].indices.size() < 2) continue;
      if (target < 0 || clusters[c].sse > clusters[target].sse) target = c;
    }
    if (target < 0) break;

    Cluster left, right;
    if (!split_two_means(cloud, clusters[target], rng, options, left, right)) {
      // Coincident points: halve the index list.
      const auto& idx = clusters[target].indices;
      const auto mid = idx.begin() + static_cast<std::ptrdiff_t>(idx.size() / 2);
      left = make_cluster(cloud, std::vector<int>(idx.begin(), mid));
      right = make_cluster(cloud, std::vector<int>(mid, idx.end()));
    }
    clusters[target] = std::move(left);
    clusters.push_back(std::move(right));
  }

  centers.reserve(clusters.size());
  for (const auto& c : clusters) centers.push_back(c.center);
  return centers;
}

}  // namespace grio
