/*
 * Copyright (c) 2026, The Prism Curriculum Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <prism/detail/io.hpp>
#include <prism/embedding.hpp>
#include <prism/error.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <limits>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace prism {

/// Fixed semantic partition: k unit-norm centroids of a common dimension.
class ClusterSpace {
 public:
  ClusterSpace(std::vector<EmbeddingVector> centroids, nlohmann::json provenance = nlohmann::json::object())
    : centroids_(std::move(centroids)), provenance_(std::move(provenance))
  {
    if (centroids_.empty()) fail(ErrorKind::BadParam, "cluster space needs at least one centroid");
    for (const auto& c : centroids_)
      if (c.dim() != centroids_.front().dim()) fail(ErrorKind::DimMismatch, "centroids differ in dimension");
  }

  std::size_t k() const noexcept { return centroids_.size(); }
  std::size_t dim() const noexcept { return centroids_.front().dim(); }
  const std::vector<EmbeddingVector>& centroids() const noexcept { return centroids_; }
  const EmbeddingVector& centroid(std::size_t j) const { return centroids_.at(j); }
  const nlohmann::json& provenance() const noexcept { return provenance_; }

 private:
  std::vector<EmbeddingVector> centroids_;
  nlohmann::json provenance_;
};

struct Assignment {
  std::size_t cluster = 0;
  double cosine = 0.0;
};

/// Nearest centroid by inner product. Ties go to the lowest index.
inline Assignment assign_scored(const ClusterSpace& space, const EmbeddingVector& v)
{
  if (v.dim() != space.dim())
    fail(ErrorKind::DimMismatch,
         "vector dim " + std::to_string(v.dim()) + " vs space dim " + std::to_string(space.dim()));
  Assignment best{0, -std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < space.k(); ++j) {
    const double s = dot(v.components(), space.centroid(j).components());
    if (s > best.cosine) best = {j, s};
  }
  best.cosine = std::clamp(best.cosine, -1.0, 1.0);
  return best;
}

inline std::size_t assign(const ClusterSpace& space, const EmbeddingVector& v) { return assign_scored(space, v).cluster; }

struct KMeansOptions {
  std::size_t k = 128;
  std::uint64_t seed = 0;
  int max_iters = 100;
  double tol = 1e-6;  // relative objective change
};

struct KMeansResult {
  ClusterSpace space;
  std::vector<std::size_t> labels;
  // Within-cluster sum of squared distances after each assignment+update
  // pair, measured before the final normalization.
  std::vector<double> objective_trace;
  int iterations = 0;
  bool converged = false;
};

namespace detail {

inline double squared_distance(std::span<const double> a, std::span<const double> b)
{
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

class KMeansWorkspace {
 public:
  KMeansWorkspace(std::span<const EmbeddingVector> points, std::size_t k)
    : n_(points.size()), d_(points.front().dim()), k_(k), data_(n_ * d_), centers_(k * d_), labels_(n_, 0)
  {
    for (std::size_t i = 0; i < n_; ++i)
      std::copy(points[i].components().begin(), points[i].components().end(), data_.begin() + i * d_);
  }

  std::span<const double> point(std::size_t i) const { return {data_.data() + i * d_, d_}; }
  std::span<double> center(std::size_t j) { return {centers_.data() + j * d_, d_}; }
  std::span<const double> center(std::size_t j) const { return {centers_.data() + j * d_, d_}; }

  void seed_plus_plus(std::uint64_t seed)
  {
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, n_ - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    std::size_t first = pick(rng);
    std::copy(point(first).begin(), point(first).end(), center(0).begin());
    std::vector<double> d2(n_);
    for (std::size_t i = 0; i < n_; ++i) d2[i] = squared_distance(point(i), center(0));

    for (std::size_t j = 1; j < k_; ++j) {
      double total = 0.0;
      for (double x : d2) total += x;
      if (!(total > 0.0))
        fail(ErrorKind::NumericFailure,
             "corpus has fewer than k=" + std::to_string(k_) + " distinct points; cannot seed centroids");
      const double r = unit(rng) * total;
      double acc = 0.0;
      std::size_t chosen = n_;
      std::size_t last_positive = 0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (d2[i] <= 0.0) continue;
        last_positive = i;
        acc += d2[i];
        if (acc > r) {
          chosen = i;
          break;
        }
      }
      if (chosen == n_) chosen = last_positive;
      std::copy(point(chosen).begin(), point(chosen).end(), center(j).begin());
      for (std::size_t i = 0; i < n_; ++i) d2[i] = std::min(d2[i], squared_distance(point(i), center(j)));
    }
  }

  // Returns true if any label changed.
  bool assign_nearest()
  {
    bool changed = false;
    for (std::size_t i = 0; i < n_; ++i) {
      std::size_t best = 0;
      double best_d = squared_distance(point(i), center(0));
      for (std::size_t j = 1; j < k_; ++j) {
        const double dj = squared_distance(point(i), center(j));
        if (dj < best_d) {
          best_d = dj;
          best = j;
        }
      }
      if (labels_[i] != best) changed = true;
      labels_[i] = best;
    }
    return changed;
  }

  // An empty cluster takes over the point farthest from its own centroid,
  // drawn from clusters that keep at least one member.
  bool repair_empty_clusters()
  {
    bool repaired = false;
    std::vector<std::size_t> sizes(k_, 0);
    for (auto l : labels_) ++sizes[l];
    for (std::size_t j = 0; j < k_; ++j) {
      if (sizes[j] != 0) continue;
      std::size_t far = n_;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n_; ++i) {
        if (sizes[labels_[i]] < 2) continue;
        const double di = squared_distance(point(i), center(labels_[i]));
        if (di > far_d) {
          far_d = di;
          far = i;
        }
      }
      if (far == n_) fail(ErrorKind::NumericFailure, "cannot repair empty cluster " + std::to_string(j));
      --sizes[labels_[far]];
      labels_[far] = j;
      sizes[j] = 1;
      std::copy(point(far).begin(), point(far).end(), center(j).begin());
      repaired = true;
    }
    return repaired;
  }

  void update_means()
  {
    std::vector<std::size_t> sizes(k_, 0);
    std::fill(centers_.begin(), centers_.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i) {
      auto c = center(labels_[i]);
      auto p = point(i);
      for (std::size_t t = 0; t < d_; ++t) c[t] += p[t];
      ++sizes[labels_[i]];
    }
    for (std::size_t j = 0; j < k_; ++j)
      for (double& x : center(j)) x /= static_cast<double>(sizes[j]);
  }

  double objective() const
  {
    double s = 0.0;
    for (std::size_t i = 0; i < n_; ++i) s += squared_distance(point(i), center(labels_[i]));
    return s;
  }

  const std::vector<std::size_t>& labels() const { return labels_; }

 private:
  std::size_t n_, d_, k_;
  std::vector<double> data_;
  std::vector<double> centers_;
  std::vector<std::size_t> labels_;
};

}  // namespace detail

/// Euclidean Lloyd iterations from k-means++ seeds; centroids are
/// L2-normalized once, after the last iteration.
inline KMeansResult kmeans_fit(std::span<const EmbeddingVector> points, const KMeansOptions& opt)
{
  if (opt.k < 1) fail(ErrorKind::BadParam, "k must be at least 1");
  if (opt.max_iters < 1) fail(ErrorKind::BadParam, "max_iters must be at least 1");
  if (points.size() < opt.k)
    fail(ErrorKind::TooFewPoints,
         "corpus has " + std::to_string(points.size()) + " points, fewer than k=" + std::to_string(opt.k));
  for (const auto& p : points)
    if (p.dim() != points.front().dim()) fail(ErrorKind::DimMismatch, "corpus vectors differ in dimension");

  detail::KMeansWorkspace ws(points, opt.k);
  ws.seed_plus_plus(opt.seed);

  std::vector<double> trace;
  int iters = 0;
  bool converged = false;
  for (int it = 0; it < opt.max_iters; ++it) {
    const bool changed = ws.assign_nearest();
    const bool repaired = ws.repair_empty_clusters();
    ws.update_means();
    const double obj = ws.objective();
    ++iters;
    const bool stalled = it > 0 && !changed && !repaired;
    const bool flat = !trace.empty() && (trace.back() - obj) <= opt.tol * std::max(trace.back(), 1e-300);
    trace.push_back(obj);
    if (stalled || flat) {
      converged = true;
      break;
    }
  }

  std::vector<EmbeddingVector> centroids;
  centroids.reserve(opt.k);
  for (std::size_t j = 0; j < opt.k; ++j) {
    try {
      centroids.push_back(normalize(ws.center(j)));
    } catch (const Error&) {
      fail(ErrorKind::NumericFailure, "centroid " + std::to_string(j) + " has zero norm");
    }
  }

  nlohmann::json provenance = {
    {"algorithm", "kmeans++ seeding, euclidean lloyd, final L2 normalization"},
    {"seed", opt.seed},
    {"max_iters", opt.max_iters},
    {"tol", opt.tol},
    {"iterations", iters},
    {"converged", converged},
    {"n_points", points.size()},
  };
  return KMeansResult{ClusterSpace(std::move(centroids), std::move(provenance)), ws.labels(), std::move(trace), iters,
                      converged};
}

inline KMeansResult kmeans_fit(std::span<const QuestionRecord> corpus, const KMeansOptions& opt)
{
  std::vector<EmbeddingVector> points;
  points.reserve(corpus.size());
  for (const auto& r : corpus) points.push_back(r.vector);
  return kmeans_fit(std::span<const EmbeddingVector>(points), opt);
}

inline std::string to_json_text(const ClusterSpace& space)
{
  std::string out = "{\n";
  out += "  \"k\": " + std::to_string(space.k()) + ",\n";
  out += "  \"dim\": " + std::to_string(space.dim()) + ",\n";
  out += "  \"centroids\": [\n";
  for (std::size_t j = 0; j < space.k(); ++j) {
    const auto c = space.centroid(j).components();
    out += "    " + detail::format_real_array(std::vector<double>(c.begin(), c.end()));
    out += j + 1 < space.k() ? ",\n" : "\n";
  }
  out += "  ],\n";
  out += "  \"provenance\": " + space.provenance().dump() + "\n";
  out += "}\n";
  return out;
}

inline ClusterSpace cluster_space_from_json_text(const std::string& text)
{
  const auto doc = detail::parse_json_document(text, "cluster space");
  const auto k = detail::require_field<std::int64_t>(doc, "k");
  const auto dim = detail::require_field<std::int64_t>(doc, "dim");
  if (k < 1) fail(ErrorKind::FormatError, "field 'k' must be positive");
  if (dim < 1) fail(ErrorKind::FormatError, "field 'dim' must be positive");
  if (!doc.contains("centroids") || !doc["centroids"].is_array()) fail(ErrorKind::FormatError, "missing field 'centroids'");
  const auto& rows = doc["centroids"];
  if (static_cast<std::int64_t>(rows.size()) != k)
    fail(ErrorKind::FormatError, "field 'centroids' has " + std::to_string(rows.size()) + " rows, 'k' declares " +
                                   std::to_string(k));
  std::vector<EmbeddingVector> centroids;
  for (std::size_t j = 0; j < rows.size(); ++j) {
    const std::string field = "centroids[" + std::to_string(j) + "]";
    auto row = detail::require_real_array(rows[j], field);
    if (static_cast<std::int64_t>(row.size()) != dim)
      fail(ErrorKind::FormatError, field + " has " + std::to_string(row.size()) + " components, 'dim' declares " +
                                     std::to_string(dim));
    try {
      centroids.push_back(EmbeddingVector::from_unit(std::move(row)));
    } catch (const Error& e) {
      fail(ErrorKind::FormatError, field + " is not a unit vector (" + e.what() + ")");
    }
  }
  nlohmann::json provenance = nlohmann::json::object();
  if (doc.contains("provenance")) {
    if (!doc["provenance"].is_object()) fail(ErrorKind::FormatError, "field 'provenance' must be an object");
    provenance = doc["provenance"];
  }
  return ClusterSpace(std::move(centroids), std::move(provenance));
}

inline void save_space(const ClusterSpace& space, const std::filesystem::path& path)
{
  detail::write_file(path, to_json_text(space));
}

inline ClusterSpace load_space(const std::filesystem::path& path)
{
  return cluster_space_from_json_text(detail::read_file(path));
}

}  // namespace prism
