#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "frap/features.hpp"
#include "frap/metrics.hpp"

namespace frap {

using Matrix = std::vector<std::vector<double>>;
using Point = std::vector<double>;
using PointDistance = std::function<double(std::span<const double>, std::span<const double>)>;

/// matrix[i][j] = distance(metric, v_i, v_j). Requires at least two vectors.
Matrix pairwise_distance_matrix(std::span<const FeatureVector> vectors, MetricKind metric, double epsilon);

struct KMeansOptions {
  std::size_t max_iters = 100;
  double tol = 1e-12;  // stop once no centroid moves further than this
};

struct KMeansResult {
  std::vector<std::size_t> assignment;  // point -> index into centroids
  std::vector<Point> centroids;         // populated clusters only
  std::size_t iterations = 0;
  bool converged = false;
};

/// Lloyd iteration with seeded k-means++ initialisation. Ties go to the lowest
/// centroid index; clusters that empty out are dropped, not reseeded.
/// The default distance is Euclidean. Throws InvalidK unless 1 <= k <= |points|.
KMeansResult kmeans(const std::vector<Point>& points, std::size_t k, std::uint64_t seed,
                    const KMeansOptions& options = {}, const PointDistance& dist = {});

/// Lloyd iteration from explicit initial centroids.
KMeansResult kmeans_from(const std::vector<Point>& points, std::vector<Point> initial,
                         const KMeansOptions& options = {}, const PointDistance& dist = {});

struct KSelection {
  std::size_t k = 1;
  std::size_t populated = 0;                    // clusters left after the K = N pass
  std::vector<std::vector<std::size_t>> groups;  // merged groups of instance indices
  double tolerance = 0.0;                       // merge threshold actually used
};

/// First clustering phase. Rows of the distance matrix are the points; K = N
/// Lloyd starts at the rows, then populated centroids closer than the merge
/// tolerance are joined (single linkage).
///
/// merge_tol > 0 is used as given. Otherwise the tolerance comes from the gap
/// rule: sort the minimum-spanning-tree edges between rows, and look for the
/// largest jump w[k+1] / w[k] > merge_gap with at least half of the edges below
/// it. Edges below the jump merge; with no such jump everything merges.
KSelection select_k(const Matrix& matrix, double merge_tol = 0.0, double merge_gap = 8.0,
                    const KMeansOptions& options = {});

struct Cluster {
  SparseVector centroid;
  double radius = 0.0;
  std::vector<std::size_t> members;  // indices into Model::vectors
};

struct ModelParams {
  MetricKind metric = MetricKind::SymmetricKLD;
  double epsilon = 1e-4;
  unsigned iterations = 4;
  std::size_t window_size = 0;
  std::size_t step = 1;
  std::size_t novelty_threshold = 500;
  std::size_t hard_cap = 100000;
  double slack = 1.0;
  double merge_tol = 0.0;  // 0 selects the gap rule
  double merge_gap = 8.0;
  std::uint64_t seed = 0;
  std::size_t max_iters = 100;

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

struct Model {
  ModelParams params;
  std::shared_ptr<LabelMap> label_map;
  std::vector<FeatureVector> vectors;
  std::vector<Cluster> clusters;
  std::vector<Label> universe;  // labels of all retained vectors, sorted

  double distance_to(const SparseVector& fv, const Cluster& cluster) const;
};

/// Grouping produced by the two clustering phases.
struct Partition {
  KSelection selection;
  std::vector<std::vector<std::size_t>> groups;  // second-phase clusters, by lowest member
};

/// Runs select_k on the pairwise matrix, then Lloyd over the count vectors
/// under the model metric, starting from the means of the first-phase groups.
Partition two_phase_cluster(std::span<const FeatureVector> vectors, const ModelParams& params);

struct DiscardedVector {
  std::string instance_id;
  std::size_t window_index = 0;
  std::size_t group = 0;  // index into the partition's groups
};

struct BuildReport {
  Partition partition;
  std::vector<DiscardedVector> discarded;
};

/// Clusters the vectors, drops singleton clusters and sets each surviving
/// radius to slack x the largest member-to-centroid distance.
/// Throws AllSingletons when no cluster keeps two members.
Model build_model(std::vector<FeatureVector> vectors, const ModelParams& params,
                  std::shared_ptr<LabelMap> label_map, BuildReport* report = nullptr);

/// Structured-text container, starts with `FRAP-MODEL 1`.
void write_model(std::ostream& out, const Model& model);
Model read_model(std::istream& in);
std::string serialize_model(const Model& model);
void save_model(const Model& model, const std::filesystem::path& path);
/// Throws IoFailure or VersionMismatch (bad header or corrupt body).
Model load_model(const std::filesystem::path& path);

}  // namespace frap
