#pragma once

// Test-only oracles, kept independent of the library's sampling and
// selection code paths: closed-form truncated-normal moments, a
// Kolmogorov-Smirnov check, and a brute-force nearest-neighbor reference.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "remtime/event_log.hpp"
#include "remtime/knn.hpp"

namespace oracles {

inline double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Mean of a normal(mu, sigma) conditioned on being >= a:
/// mu + sigma * phi(alpha) / (1 - Phi(alpha)), alpha = (a - mu) / sigma.
inline double truncated_normal_mean(double mu, double sigma, double a) {
  const double alpha = (a - mu) / sigma;
  const double z = 1.0 - std_normal_cdf(alpha);
  return mu + sigma * std_normal_pdf(alpha) / z;
}

inline double truncated_normal_stddev(double mu, double sigma, double a) {
  const double alpha = (a - mu) / sigma;
  const double z = 1.0 - std_normal_cdf(alpha);
  const double lambda = std_normal_pdf(alpha) / z;
  return sigma * std::sqrt(1.0 + alpha * lambda - lambda * lambda);
}

inline double truncated_normal_cdf(double x, double mu, double sigma, double a) {
  if (x < a) return 0.0;
  const double fa = std_normal_cdf((a - mu) / sigma);
  return (std_normal_cdf((x - mu) / sigma) - fa) / (1.0 - fa);
}

/// One-sample KS statistic against an arbitrary CDF.
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::fabs(f - static_cast<double>(i) / n));
    d = std::max(d, std::fabs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

/// Asymptotic KS acceptance at significance 0.001:
/// sqrt(n) * D < K with P(K_inf > 1.94947) = 0.001.
inline bool ks_passes_at_001(const std::vector<double>& samples,
                             const std::function<double(double)>& cdf) {
  const double d = ks_statistic(samples, cdf);
  return std::sqrt(static_cast<double>(samples.size())) * d < 1.94947;
}

/// Brute-force reimplementation of the neighbor-selection contract:
/// features, penalty, normalization, full sort of the same-route
/// candidates by (distance, index), then the documented Fisher-Yates fill.
inline remtime::NeighborSelection brute_force_neighbors(const remtime::EventLog& train,
                                                        const remtime::Trace& prefix,
                                                        std::size_t k, std::mt19937_64& rng) {
  const auto& voc = train.vocabulary();
  const std::size_t dims = voc.size();

  auto feature = [&](const remtime::Trace& trace) {
    std::vector<double> fv(dims, -1.0);
    for (std::size_t d = 0; d < dims; ++d) {
      for (std::size_t e = trace.events.size(); e-- > 0;) {
        if (trace.events[e].activity == voc[d]) {
          fv[d] = static_cast<double>(trace.events[e].timestamp - trace.start_ms());
          break;
        }
      }
    }
    return fv;
  };

  auto matches = [&](const remtime::Trace& candidate) {
    if (prefix.events.size() > candidate.events.size()) return false;
    for (std::size_t i = 0; i < prefix.events.size(); ++i) {
      if (candidate.events[i].activity != prefix.events[i].activity) return false;
    }
    return true;
  };

  double max_tto = 0.0;
  std::vector<std::vector<double>> features;
  for (const auto& trace : train.traces()) {
    features.push_back(feature(trace));
    for (double v : features.back()) {
      if (v >= 0.0) max_tto = std::max(max_tto, v);
    }
  }

  const std::vector<double> query = feature(prefix);
  const double scale = max_tto > 0.0 ? 1.0 / max_tto : 0.0;

  auto distance = [&](const std::vector<double>& fv) {
    double ss = 0.0;
    for (std::size_t d = 0; d < dims; ++d) {
      if (query[d] < 0.0) continue;
      const double q = std::clamp(query[d] * scale, 0.0, 1.0);
      const double diff = q - fv[d] * scale;
      ss += diff * diff;
    }
    return std::sqrt(ss);
  };

  const std::vector<double> penalty_vector(dims, max_tto);
  const double penalty_distance = distance(penalty_vector);

  std::vector<std::pair<double, std::size_t>> matched;
  std::vector<std::size_t> penalized;
  for (std::size_t i = 0; i < train.size(); ++i) {
    if (matches(train[i])) {
      matched.emplace_back(distance(features[i]), i);
    } else {
      penalized.push_back(i);
    }
  }
  std::stable_sort(matched.begin(), matched.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });

  remtime::NeighborSelection out;
  const std::size_t take = std::min(k, matched.size());
  for (std::size_t i = 0; i < take; ++i) {
    out.indices.push_back(matched[i].second);
    out.distances.push_back(matched[i].first);
  }
  out.matched_count = take;
  if (take < k) {
    const std::size_t fill = k - take;
    for (std::size_t i = 0; i < fill; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, penalized.size() - 1);
      std::swap(penalized[i], penalized[pick(rng)]);
    }
    std::sort(penalized.begin(), penalized.begin() + static_cast<std::ptrdiff_t>(fill));
    for (std::size_t i = 0; i < fill; ++i) {
      out.indices.push_back(penalized[i]);
      out.distances.push_back(penalty_distance);
    }
    out.random_fill_count = fill;
  }
  return out;
}

}  // namespace oracles
