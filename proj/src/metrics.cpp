#include "frap/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <string>

#include "frap/errors.hpp"

namespace frap {

namespace {

// Per-label terms are summed in ascending order of value, so the result does
// not depend on how labels happen to be numbered.
double sorted_sum(std::vector<double>& terms) {
  std::sort(terms.begin(), terms.end());
  double sum = 0.0;
  for (double t : terms) sum += t;
  return sum;
}

std::vector<double> normalize_aligned(std::span<const double> counts, double epsilon) {
  std::size_t absent = 0;
  double total = 0.0;
  for (double c : counts) {
    if (c < 0.0) throw Error(ErrorCode::InvalidArgument, "negative count");
    if (c == 0.0) {
      ++absent;
    } else {
      total += c;
    }
  }
  std::vector<double> probs(counts.size());
  if (total == 0.0) {
    std::fill(probs.begin(), probs.end(), counts.empty() ? 0.0 : 1.0 / static_cast<double>(counts.size()));
    return probs;
  }
  const double mass = 1.0 - epsilon * static_cast<double>(absent);
  if (absent > 0 && mass <= 0.0) {
    throw Error(ErrorCode::EpsilonMassOverflow, "epsilon " + std::to_string(epsilon) + " x " +
                                                    std::to_string(absent) + " absent labels >= 1");
  }
  for (std::size_t i = 0; i < counts.size(); ++i) {
    probs[i] = counts[i] == 0.0 ? epsilon : mass * (counts[i] / total);
  }
  return probs;
}

double kld_terms(std::span<const double> p, std::span<const double> q) {
  std::vector<double> terms(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    // p ln(p/q) + q ln(q/p) == (p - q) ln(p/q) >= 0
    terms[i] = (p[i] == q[i]) ? 0.0 : (p[i] - q[i]) * (std::log(p[i]) - std::log(q[i]));
  }
  return sorted_sum(terms);
}

double hellinger_terms(std::span<const double> p, std::span<const double> q) {
  std::vector<double> terms(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double d = std::sqrt(p[i]) - std::sqrt(q[i]);
    terms[i] = d * d;
  }
  const double h2 = 0.5 * sorted_sum(terms);
  return std::sqrt(std::clamp(h2, 0.0, 1.0));
}

double euclidean_terms(std::span<const double> u, std::span<const double> v) {
  std::vector<double> terms(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = u[i] - v[i];
    terms[i] = d * d;
  }
  return std::sqrt(sorted_sum(terms));
}

void check_support(const Distribution& p, const Distribution& q) {
  if (p.support != q.support || p.probs.size() != q.probs.size()) {
    throw Error(ErrorCode::SupportMismatch, "distributions are defined over different supports");
  }
}

std::atomic<bool> g_shrink_warned{false};

double effective_epsilon(std::span<const double> u, std::span<const double> v, double epsilon) {
  const auto absent = [](std::span<const double> c) {
    return static_cast<std::size_t>(std::count(c.begin(), c.end(), 0.0));
  };
  const std::size_t z = std::max(absent(u), absent(v));
  if (z == 0 || epsilon * static_cast<double>(z) < 1.0) return epsilon;
  const double shrunk = 0.5 / static_cast<double>(z);
  if (!g_shrink_warned.exchange(true)) {
    warn("back-off epsilon " + std::to_string(epsilon) + " overflows " + std::to_string(z) +
         " absent labels; using 0.5/Z = " + std::to_string(shrunk));
  }
  return shrunk;
}

}  // namespace

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::SymmetricKLD: return "kld";
    case MetricKind::Hellinger: return "hellinger";
    case MetricKind::Euclidean: return "euclidean";
  }
  return "kld";
}

MetricKind parse_metric(std::string_view text) {
  if (text == "kld") return MetricKind::SymmetricKLD;
  if (text == "hellinger") return MetricKind::Hellinger;
  if (text == "euclidean") return MetricKind::Euclidean;
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(text) + "'");
}

Distribution to_distribution(const SparseVector& fv, std::span<const Label> support, double epsilon) {
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  Distribution d;
  d.support.assign(support.begin(), support.end());
  std::sort(d.support.begin(), d.support.end());
  d.support.erase(std::unique(d.support.begin(), d.support.end()), d.support.end());

  std::vector<double> counts(d.support.size(), 0.0);
  for (const auto& [label, count] : fv.entries()) {
    auto it = std::lower_bound(d.support.begin(), d.support.end(), label);
    if (it == d.support.end() || *it != label) {
      throw Error(ErrorCode::SupportMismatch, "label " + std::to_string(label.id) + " outside support");
    }
    counts[static_cast<std::size_t>(it - d.support.begin())] = count;
  }
  d.probs = normalize_aligned(counts, epsilon);
  return d;
}

double kld_symmetric(const Distribution& p, const Distribution& q) {
  check_support(p, q);
  return kld_terms(p.probs, q.probs);
}

double hellinger(const Distribution& p, const Distribution& q) {
  check_support(p, q);
  return hellinger_terms(p.probs, q.probs);
}

double euclidean(const SparseVector& u, const SparseVector& v) {
  std::vector<double> terms;
  terms.reserve(u.size() + v.size());
  auto a = u.entries().begin(), ae = u.entries().end();
  auto b = v.entries().begin(), be = v.entries().end();
  while (a != ae || b != be) {
    double d;
    if (b == be || (a != ae && a->first < b->first)) {
      d = a->second;
      ++a;
    } else if (a == ae || b->first < a->first) {
      d = b->second;
      ++b;
    } else {
      d = a->second - b->second;
      ++a;
      ++b;
    }
    terms.push_back(d * d);
  }
  return std::sqrt(sorted_sum(terms));
}

double aligned_distance(MetricKind kind, std::span<const double> u, std::span<const double> v, double epsilon) {
  if (u.size() != v.size()) throw Error(ErrorCode::SupportMismatch, "aligned vectors differ in length");
  if (kind == MetricKind::Euclidean) return euclidean_terms(u, v);
  if (!(epsilon > 0.0)) throw Error(ErrorCode::InvalidArgument, "epsilon must be positive");
  const double eps = effective_epsilon(u, v, epsilon);
  const auto p = normalize_aligned(u, eps);
  const auto q = normalize_aligned(v, eps);
  return kind == MetricKind::SymmetricKLD ? kld_terms(p, q) : hellinger_terms(p, q);
}

double distance(MetricKind kind, const SparseVector& u, const SparseVector& v, double epsilon,
                std::span<const Label> universe) {
  if (kind == MetricKind::Euclidean) return euclidean(u, v);

  std::vector<Label> support;
  support.reserve(u.size() + v.size() + universe.size());
  for (const auto& e : u.entries()) support.push_back(e.first);
  for (const auto& e : v.entries()) support.push_back(e.first);
  support.insert(support.end(), universe.begin(), universe.end());
  std::sort(support.begin(), support.end());
  support.erase(std::unique(support.begin(), support.end()), support.end());

  std::vector<double> a(support.size(), 0.0), b(support.size(), 0.0);
  auto fill = [&](const SparseVector& src, std::vector<double>& dst) {
    auto it = support.begin();
    for (const auto& [label, count] : src.entries()) {
      it = std::lower_bound(it, support.end(), label);
      dst[static_cast<std::size_t>(it - support.begin())] = count;
    }
  };
  fill(u, a);
  fill(v, b);
  return aligned_distance(kind, a, b, epsilon);
}

std::vector<Label> label_union(std::span<const SparseVector* const> vectors) {
  std::vector<Label> out;
  for (const auto* v : vectors) {
    for (const auto& e : v->entries()) out.push_back(e.first);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace frap
