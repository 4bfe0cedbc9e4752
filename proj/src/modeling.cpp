#include "frap/modeling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "frap/errors.hpp"

namespace frap {

namespace {

double euclidean_point(std::span<const double> a, std::span<const double> b) {
  return aligned_distance(MetricKind::Euclidean, a, b, 0.0);
}

Point mean_of(const std::vector<Point>& points, const std::vector<std::size_t>& members) {
  Point mean(points.front().size(), 0.0);
  for (auto i : members) {
    for (std::size_t d = 0; d < mean.size(); ++d) mean[d] += points[i][d];
  }
  for (auto& x : mean) x /= static_cast<double>(members.size());
  return mean;
}

struct DisjointSet {
  std::vector<std::size_t> parent;
  explicit DisjointSet(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void join(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Edge weights of a minimum spanning tree (Prim, dense).
std::vector<double> mst_weights(const std::vector<Point>& points) {
  const std::size_t n = points.size();
  std::vector<double> best(n, std::numeric_limits<double>::infinity());
  std::vector<bool> in_tree(n, false);
  std::vector<double> weights;
  best[0] = 0.0;
  for (std::size_t step = 0; step < n; ++step) {
    std::size_t u = n;
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_tree[i] && (u == n || best[i] < best[u])) u = i;
    }
    in_tree[u] = true;
    if (step > 0) weights.push_back(best[u]);
    for (std::size_t i = 0; i < n; ++i) {
      if (!in_tree[i]) best[i] = std::min(best[i], euclidean_point(points[u], points[i]));
    }
  }
  std::sort(weights.begin(), weights.end());
  return weights;
}

double gap_tolerance(const std::vector<double>& w, double merge_gap) {
  const std::size_t m = w.size();
  double best_ratio = 0.0;
  double tolerance = std::numeric_limits<double>::infinity();
  // k = number of edges kept below the jump; w[k - 1] is the largest of them.
  for (std::size_t k = m / 2; k < m; ++k) {
    const double lo = k == 0 ? 0.0 : w[k - 1];
    const double hi = w[k];
    if (!(hi > merge_gap * lo)) continue;
    const double ratio = lo == 0.0 ? std::numeric_limits<double>::infinity() : hi / lo;
    if (ratio > best_ratio) {
      best_ratio = ratio;
      tolerance = lo == 0.0 ? hi / 2.0 : std::sqrt(lo * hi);
    }
  }
  return tolerance;
}

std::vector<std::vector<std::size_t>> groups_from(const std::vector<std::size_t>& assignment, std::size_t k) {
  std::vector<std::vector<std::size_t>> groups(k);
  for (std::size_t i = 0; i < assignment.size(); ++i) groups[assignment[i]].push_back(i);
  std::erase_if(groups, [](const auto& g) { return g.empty(); });
  std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  return groups;
}

SparseVector sparse_mean(std::span<const FeatureVector> vectors, const std::vector<std::size_t>& members) {
  std::vector<SparseVector::Entry> entries;
  for (auto i : members) {
    for (const auto& e : vectors[i].counts.entries()) entries.push_back(e);
  }
  auto summed = SparseVector::from_entries(std::move(entries));
  std::vector<SparseVector::Entry> scaled(summed.entries().begin(), summed.entries().end());
  for (auto& e : scaled) e.second /= static_cast<double>(members.size());
  return SparseVector::from_entries(std::move(scaled));
}

}  // namespace

Matrix pairwise_distance_matrix(std::span<const FeatureVector> vectors, MetricKind metric, double epsilon) {
  const std::size_t n = vectors.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "pairwise matrix needs at least two vectors");
  Matrix m(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      m[i][j] = m[j][i] = distance(metric, vectors[i].counts, vectors[j].counts, epsilon);
    }
  }
  return m;
}

KMeansResult kmeans_from(const std::vector<Point>& points, std::vector<Point> initial,
                         const KMeansOptions& options, const PointDistance& dist) {
  if (initial.empty() || initial.size() > points.size()) {
    throw Error(ErrorCode::InvalidK, "k=" + std::to_string(initial.size()) + " for " +
                                         std::to_string(points.size()) + " points");
  }
  const PointDistance& d = dist ? dist : PointDistance(euclidean_point);

  KMeansResult result;
  result.centroids = std::move(initial);
  result.assignment.assign(points.size(), 0);
  std::vector<std::size_t> previous;

  for (std::size_t iter = 1; iter <= std::max<std::size_t>(options.max_iters, 1); ++iter) {
    result.iterations = iter;
    for (std::size_t i = 0; i < points.size(); ++i) {
      std::size_t best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t c = 0; c < result.centroids.size(); ++c) {
        const double dc = d(points[i], result.centroids[c]);
        if (dc < best_d) {
          best_d = dc;
          best = c;
        }
      }
      result.assignment[i] = best;
    }
    if (result.assignment == previous) {
      result.converged = true;
      break;
    }

    // Recompute means; empty clusters are dropped and indices compacted.
    std::vector<std::vector<std::size_t>> members(result.centroids.size());
    for (std::size_t i = 0; i < points.size(); ++i) members[result.assignment[i]].push_back(i);
    std::vector<Point> next;
    std::vector<std::size_t> remap(result.centroids.size(), 0);
    double shift = 0.0;
    bool dropped = false;
    for (std::size_t c = 0; c < members.size(); ++c) {
      if (members[c].empty()) {
        dropped = true;
        continue;
      }
      remap[c] = next.size();
      next.push_back(mean_of(points, members[c]));
      shift = std::max(shift, euclidean_point(next.back(), result.centroids[c]));
    }
    for (auto& a : result.assignment) a = remap[a];
    result.centroids = std::move(next);
    previous = result.assignment;
    if (!dropped && shift < options.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

KMeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options, const PointDistance& dist) {
  if (k < 1 || k > points.size()) {
    throw Error(ErrorCode::InvalidK, "k=" + std::to_string(k) + " for " + std::to_string(points.size()) + " points");
  }
  const PointDistance& d = dist ? dist : PointDistance(euclidean_point);
  std::mt19937_64 rng(seed);
  const auto uniform = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };

  std::vector<bool> chosen(points.size(), false);
  std::vector<Point> initial;
  std::size_t first = static_cast<std::size_t>(rng() % points.size());
  chosen[first] = true;
  initial.push_back(points[first]);
  std::vector<double> nearest(points.size(), std::numeric_limits<double>::infinity());
  while (initial.size() < k) {
    double total = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      const double di = d(points[i], initial.back());
      nearest[i] = std::min(nearest[i], di * di);
      if (!chosen[i]) total += nearest[i];
    }
    std::size_t pick = points.size();
    if (total > 0.0) {
      double target = uniform() * total;
      for (std::size_t i = 0; i < points.size(); ++i) {
        if (chosen[i] || nearest[i] == 0.0) continue;
        pick = i;
        target -= nearest[i];
        if (target < 0.0) break;
      }
    } else {
      // Only duplicates of chosen points remain.
      for (std::size_t i = 0; i < points.size() && pick == points.size(); ++i) {
        if (!chosen[i]) pick = i;
      }
    }
    chosen[pick] = true;
    initial.push_back(points[pick]);
  }
  return kmeans_from(points, std::move(initial), options, dist);
}

KSelection select_k(const Matrix& matrix, double merge_tol, double merge_gap, const KMeansOptions& options) {
  const std::size_t n = matrix.size();
  if (n < 2) throw Error(ErrorCode::InvalidArgument, "select_k needs at least two instances");
  for (const auto& row : matrix) {
    if (row.size() != n) throw Error(ErrorCode::InvalidArgument, "distance matrix is not square");
  }

  const std::vector<Point>& rows = matrix;
  const auto first = kmeans_from(rows, rows, options);
  const auto populated = groups_from(first.assignment, first.centroids.size());

  KSelection sel;
  sel.populated = populated.size();
  sel.tolerance = merge_tol > 0.0 ? merge_tol : gap_tolerance(mst_weights(rows), merge_gap);

  std::vector<Point> centroids;
  for (const auto& g : populated) centroids.push_back(mean_of(rows, g));
  DisjointSet sets(centroids.size());
  for (std::size_t a = 0; a < centroids.size(); ++a) {
    for (std::size_t b = a + 1; b < centroids.size(); ++b) {
      if (euclidean_point(centroids[a], centroids[b]) < sel.tolerance) sets.join(a, b);
    }
  }
  std::vector<std::vector<std::size_t>> merged(centroids.size());
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    auto& target = merged[sets.find(c)];
    target.insert(target.end(), populated[c].begin(), populated[c].end());
  }
  std::erase_if(merged, [](const auto& g) { return g.empty(); });
  for (auto& g : merged) std::sort(g.begin(), g.end());
  std::sort(merged.begin(), merged.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
  sel.groups = std::move(merged);
  sel.k = sel.groups.size();
  return sel;
}

Partition two_phase_cluster(std::span<const FeatureVector> vectors, const ModelParams& params) {
  Partition part;
  part.selection = select_k(pairwise_distance_matrix(vectors, params.metric, params.epsilon), params.merge_tol,
                            params.merge_gap, {params.max_iters});

  std::vector<const SparseVector*> ptrs;
  for (const auto& v : vectors) ptrs.push_back(&v.counts);
  const auto labels = label_union(ptrs);

  std::vector<Point> points(vectors.size(), Point(labels.size(), 0.0));
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    auto it = labels.begin();
    for (const auto& [label, count] : vectors[i].counts.entries()) {
      it = std::lower_bound(it, labels.end(), label);
      points[i][static_cast<std::size_t>(it - labels.begin())] = count;
    }
  }
  std::vector<Point> initial;
  for (const auto& g : part.selection.groups) initial.push_back(mean_of(points, g));

  const auto metric = params.metric;
  const auto epsilon = params.epsilon;
  const auto second = kmeans_from(points, std::move(initial), {params.max_iters},
                                  [metric, epsilon](std::span<const double> a, std::span<const double> b) {
                                    return aligned_distance(metric, a, b, epsilon);
                                  });
  part.groups = groups_from(second.assignment, second.centroids.size());
  return part;
}

double Model::distance_to(const SparseVector& fv, const Cluster& cluster) const {
  return distance(params.metric, fv, cluster.centroid, params.epsilon, universe);
}

Model build_model(std::vector<FeatureVector> vectors, const ModelParams& params, std::shared_ptr<LabelMap> label_map,
                  BuildReport* report) {
  if (vectors.size() < 2) throw Error(ErrorCode::InvalidArgument, "build_model needs at least two vectors");
  if (!label_map) throw Error(ErrorCode::InvalidArgument, "build_model needs a label map");
  if (params.slack < 0.0) throw Error(ErrorCode::InvalidArgument, "slack must be non-negative");

  auto partition = two_phase_cluster(vectors, params);

  Model model;
  model.params = params;
  model.label_map = std::move(label_map);
  std::vector<DiscardedVector> discarded;
  std::vector<std::vector<std::size_t>> kept;
  for (std::size_t g = 0; g < partition.groups.size(); ++g) {
    const auto& group = partition.groups[g];
    if (group.size() < 2) {
      for (auto i : group) discarded.push_back({vectors[i].instance_id, vectors[i].window_index, g});
      continue;
    }
    kept.push_back(group);
  }
  if (kept.empty()) {
    throw Error(ErrorCode::AllSingletons, "no cluster has two or more of the " + std::to_string(vectors.size()) +
                                              " vectors");
  }

  // Retained vectors keep their input order; clusters index into them.
  std::vector<std::size_t> new_index(vectors.size(), SIZE_MAX);
  std::vector<std::size_t> retained;
  for (const auto& g : kept) retained.insert(retained.end(), g.begin(), g.end());
  std::sort(retained.begin(), retained.end());
  for (std::size_t i = 0; i < retained.size(); ++i) new_index[retained[i]] = i;
  for (auto i : retained) model.vectors.push_back(vectors[i]);

  std::vector<const SparseVector*> ptrs;
  for (const auto& v : model.vectors) ptrs.push_back(&v.counts);
  model.universe = label_union(ptrs);

  for (const auto& g : kept) {
    Cluster c;
    for (auto i : g) c.members.push_back(new_index[i]);
    c.centroid = sparse_mean(model.vectors, c.members);
    double farthest = 0.0;
    for (auto m : c.members) farthest = std::max(farthest, model.distance_to(model.vectors[m].counts, c));
    c.radius = params.slack * farthest;
    model.clusters.push_back(std::move(c));
  }

  if (report) {
    report->partition = std::move(partition);
    report->discarded = std::move(discarded);
  }
  return model;
}

}  // namespace frap
