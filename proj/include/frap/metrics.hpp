#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "frap/features.hpp"

namespace frap {

enum class MetricKind { SymmetricKLD, Hellinger, Euclidean };

/// `kld`, `hellinger`, `euclidean`.
std::string_view to_string(MetricKind kind);
MetricKind parse_metric(std::string_view text);

/// Smoothed probability distribution over an explicit, sorted label support.
struct Distribution {
  std::vector<Label> support;
  std::vector<double> probs;  // aligned with support
};

/// Labels absent from `fv` get `epsilon` each; the rest of the mass is split
/// over present labels in proportion to their counts.
/// Throws EpsilonMassOverflow when epsilon * (#absent) >= 1 and SupportMismatch
/// when `support` misses a label of `fv`.
Distribution to_distribution(const SparseVector& fv, std::span<const Label> support, double epsilon);

/// KL(p||q) + KL(q||p), in nats.
double kld_symmetric(const Distribution& p, const Distribution& q);

/// sqrt(1 - sum sqrt(p_i q_i)), evaluated as sqrt(0.5 * sum (sqrt p_i - sqrt q_i)^2).
double hellinger(const Distribution& p, const Distribution& q);

/// L2 over raw counts; missing labels read as 0.
double euclidean(const SparseVector& u, const SparseVector& v);

/// Dispatches on `kind`. KLD and Hellinger build both distributions over
/// labels(u) ∪ labels(v) ∪ universe. If epsilon would overflow the mass it is
/// shrunk to 0.5/Z (Z = largest absent-label count) and a warning is logged once.
double distance(MetricKind kind, const SparseVector& u, const SparseVector& v, double epsilon,
                std::span<const Label> universe = {});

/// Same as distance() for two count vectors already aligned over their full
/// support (every index is in the support).
double aligned_distance(MetricKind kind, std::span<const double> u, std::span<const double> v, double epsilon);

/// Sorted union of the labels of all vectors.
std::vector<Label> label_union(std::span<const SparseVector* const> vectors);

}  // namespace frap
