#include "remtime/gdtspn.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace remtime {

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

// Wichura's algorithm AS 241 (PPND16 variant).
double normal_quantile(double p) {
  if (p <= 0.0) return -std::numeric_limits<double>::infinity();
  if (p >= 1.0) return std::numeric_limits<double>::infinity();

  static constexpr double a[8] = {
      3.3871328727963666080e0,  1.3314166789178437745e2, 1.9715909503065514427e3,
      1.3731693765509461125e4,  4.5921953931549871457e4, 6.7265770927008700853e4,
      3.3430575583588128105e4,  2.5090809287301226727e3};
  static constexpr double b[8] = {
      1.0,                     4.2313330701600911252e1, 6.8718700749205790830e2,
      5.3941960214247511077e3, 2.1213794301586595867e4, 3.9307895800092710610e4,
      2.8729085735721942674e4, 5.2264952788528545610e3};
  static constexpr double c[8] = {
      1.42343711074968357734e0,  4.63033784615654529590e0,  5.76949722146069140550e0,
      3.64784832476320460504e0,  1.27045825245236838258e0,  2.41780725177450611770e-1,
      2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[8] = {
      1.0,                       2.05319162663775882187e0,  1.67638483018380384940e0,
      6.89767334985100004550e-1, 1.48103976427480074590e-1, 1.51986665636164571966e-2,
      5.47593808499534494600e-4, 1.05075007164441684324e-9};
  static constexpr double e[8] = {
      6.65790464350110377720e0,  5.46378491116411436990e0,  1.78482653991729133580e0,
      2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
      2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {
      1.0,                       5.99832206555887937690e-1, 1.36929880922735805310e-1,
      1.48753612908506148525e-2, 7.86869131145613259100e-4, 1.84631831751005468180e-5,
      1.42151175831644588870e-7, 2.04426310338993978564e-15};

  auto ratio = [](const double (&num)[8], const double (&den)[8], double r) {
    double top = num[7], bottom = den[7];
    for (int i = 6; i >= 0; --i) {
      top = top * r + num[i];
      bottom = bottom * r + den[i];
    }
    return top / bottom;
  };

  const double q = p - 0.5;
  if (std::fabs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * ratio(a, b, r);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double value;
  if (r <= 5.0) {
    value = ratio(c, d, r - 1.6);
  } else {
    value = ratio(e, f, r - 5.0);
  }
  return (q < 0.0) ? -value : value;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

DurationDistribution DurationDistribution::normal(double mu, double sigma, int sample_count) {
  if (sigma <= 0.0) return dirac(mu, sample_count);
  DurationDistribution d;
  d.kind = Kind::Normal;
  d.mu = mu;
  d.sigma = sigma;
  d.sample_count = sample_count;
  return d;
}

DurationDistribution DurationDistribution::dirac(double value, int sample_count) {
  DurationDistribution d;
  d.kind = Kind::Dirac;
  d.mu = std::max(value, 0.0);
  d.sigma = 0.0;
  d.sample_count = sample_count;
  return d;
}

double DurationDistribution::cdf(double x) const {
  if (kind == Kind::Dirac) return x >= mu ? 1.0 : 0.0;
  return normal_cdf((x - mu) / sigma);
}

double truncated_sample(const DurationDistribution& d, double elapsed, std::mt19937_64& rng) {
  const double lower = std::max(elapsed, 0.0);
  if (d.kind == DurationDistribution::Kind::Dirac) return std::max(d.mu, lower);

  const double f_lower = d.cdf(lower);
  if (f_lower >= 1.0 - 1e-12) return lower;  // support exhausted: Dirac at t0
  const double u = f_lower + (1.0 - f_lower) * uniform01(rng);
  const double t = d.mu + d.sigma * normal_quantile(u);
  return std::max(t, lower);
}

// --- enrichment ---

Gdtspn enrich(const PetriNet& net, const std::vector<const Trace*>& traces) {
  const std::size_t n = net.transition_count();
  std::vector<std::vector<double>> samples(n);
  std::vector<std::size_t> silent_firings(n, 0);

  for (const Trace* trace : traces) {
    ReplayResult result;
    try {
      // Training traces are complete: run them all the way to the final
      // marking so trailing silent firings (joins, loop exits) are counted.
      result = replay(net, *trace, ReplayOptions{.complete_to_final = true});
    } catch (const ReplayError& e) {
      throw ReplayError("case '" + trace->case_id + "': " + e.what(), e.event_index);
    }
    for (const ReplayFiring& firing : result.firings) {
      const std::size_t t = static_cast<std::size_t>(firing.transition);
      if (net.transition(firing.transition).silent()) {
        ++silent_firings[t];
      } else {
        samples[t].push_back(static_cast<double>(firing.fired_ms - firing.enabled_ms));
      }
    }
  }

  Gdtspn model;
  model.net = net;
  model.durations.resize(n);
  model.weights.assign(n, 0.0);
  model.zero_sample_warning.assign(n, false);
  for (std::size_t t = 0; t < n; ++t) {
    if (net.transition(static_cast<int>(t)).silent()) {
      // Laplace floor: silent transitions never seen still get weight 1.
      model.weights[t] = silent_firings[t] > 0 ? static_cast<double>(silent_firings[t]) : 1.0;
      continue;
    }
    const auto& xs = samples[t];
    if (xs.empty()) {
      model.durations[t] = DurationDistribution::dirac(0.0, 0);
      model.zero_sample_warning[t] = true;
      continue;
    }
    double sum = 0.0;
    for (double x : xs) sum += x;
    const double mean = sum / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double pop_std = std::sqrt(ss / static_cast<double>(xs.size()));
    model.durations[t] =
        DurationDistribution::normal(mean, pop_std, static_cast<int>(xs.size()));
  }
  return model;
}

Gdtspn enrich(const PetriNet& net, const EventLog& log) {
  std::vector<const Trace*> traces;
  traces.reserve(log.size());
  for (const auto& t : log.traces()) traces.push_back(&t);
  return enrich(net, traces);
}

// --- simulation ---

namespace {

int pick_weighted(const std::vector<int>& candidates, const std::vector<double>& weights,
                  std::mt19937_64& rng) {
  double total = 0.0;
  for (int t : candidates) total += std::max(weights[static_cast<std::size_t>(t)], 0.0);
  if (total <= 0.0) {
    // All-zero weights: choose uniformly.
    return candidates[static_cast<std::size_t>(rng() % candidates.size())];
  }
  const double r = uniform01(rng) * total;
  double acc = 0.0;
  for (int t : candidates) {
    acc += std::max(weights[static_cast<std::size_t>(t)], 0.0);
    if (r < acc) return t;
  }
  return candidates.back();
}

}  // namespace

SimRun simulate_once(const Gdtspn& model, const ReplayState& state, Millis t0,
                     std::mt19937_64& rng, int max_firings) {
  const PetriNet& net = model.net;
  Marking marking = state.marking;
  if (marking == net.final_marking()) return SimRun{true, 0.0};

  const double start = static_cast<double>(t0);
  double clock = start;
  const double unscheduled = std::numeric_limits<double>::infinity();
  std::vector<double> completion(net.transition_count(), unscheduled);

  // Transitions already enabled at t0 are truncated by their elapsed
  // enabling time; their completion stays anchored to the enabling moment.
  for (int t : token_enabled(net, marking)) {
    if (net.transition(t).silent()) continue;
    double enabled_at = start;
    for (const auto& [tr, ms] : state.enabling_times) {
      if (tr == t) {
        enabled_at = static_cast<double>(ms);
        break;
      }
    }
    const double elapsed = start - enabled_at;
    completion[static_cast<std::size_t>(t)] =
        enabled_at + truncated_sample(model.durations[static_cast<std::size_t>(t)], elapsed, rng);
  }

  int firings = 0;
  while (marking != net.final_marking()) {
    const std::vector<int> firable = enabled(net, marking);
    if (firable.empty()) return SimRun{false, 0.0};  // deadlock guard

    int chosen;
    if (net.transition(firable.front()).silent()) {
      chosen = pick_weighted(firable, model.weights, rng);
    } else {
      chosen = firable.front();
      for (int t : firable) {
        if (completion[static_cast<std::size_t>(t)] <
            completion[static_cast<std::size_t>(chosen)]) {
          chosen = t;
        }
      }
      clock = completion[static_cast<std::size_t>(chosen)];
    }

    marking = fire(net, marking, chosen);
    if (++firings > max_firings) return SimRun{false, 0.0};

    // Re-derive the schedule: drop samples of disabled transitions, draw
    // fresh ones (truncated at 0) for newly enabled timed transitions.
    std::vector<bool> now_enabled(net.transition_count(), false);
    for (int t : token_enabled(net, marking)) now_enabled[static_cast<std::size_t>(t)] = true;
    completion[static_cast<std::size_t>(chosen)] = unscheduled;
    for (std::size_t t = 0; t < net.transition_count(); ++t) {
      if (net.transition(static_cast<int>(t)).silent()) continue;
      if (!now_enabled[t]) {
        completion[t] = unscheduled;
      } else if (completion[t] == unscheduled) {
        completion[t] = clock + truncated_sample(model.durations[t], 0.0, rng);
      }
    }
  }
  return SimRun{true, clock - start};
}

MonteCarloEstimate predict_remaining(const Gdtspn& model, const ReplayState& state, Millis t0,
                                     const SimulationConfig& cfg) {
  if (cfg.n_runs < 1) throw std::invalid_argument("n_runs must be >= 1");
  MonteCarloEstimate estimate;
  double sum = 0.0;
  for (int run = 0; run < cfg.n_runs; ++run) {
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(run)));
    const SimRun outcome = simulate_once(model, state, t0, rng, cfg.max_firings_per_run);
    if (outcome.completed) {
      sum += outcome.remaining_ms;
      ++estimate.completed_runs;
    } else {
      ++estimate.aborted_runs;
    }
  }
  if (estimate.completed_runs > 0) {
    estimate.remaining_ms = sum / static_cast<double>(estimate.completed_runs);
  }
  return estimate;
}

// --- annotated PNML ---

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::string write_gdtspn_pnml(const Gdtspn& model) {
  TransitionAnnotations annotations(model.net.transition_count());
  for (std::size_t t = 0; t < model.net.transition_count(); ++t) {
    auto& attrs = annotations[t];
    if (model.net.transition(static_cast<int>(t)).silent()) {
      attrs["weight"] = format_double(model.weights[t]);
      attrs["priority"] = "1";
    } else {
      const auto& d = model.durations[t];
      attrs["priority"] = "0";
      attrs["distribution"] = d.kind == DurationDistribution::Kind::Normal ? "normal" : "dirac";
      if (d.kind == DurationDistribution::Kind::Normal) {
        attrs["mu"] = format_double(d.mu);
        attrs["sigma"] = format_double(d.sigma);
      } else {
        attrs["value"] = format_double(d.mu);
      }
      attrs["samples"] = std::to_string(d.sample_count);
    }
  }
  return write_pnml(model.net, annotations);
}

Gdtspn read_gdtspn_pnml(const std::string& xml) {
  PnmlNet parsed = read_pnml(xml);
  Gdtspn model;
  model.net = std::move(parsed.net);
  const std::size_t n = model.net.transition_count();
  model.durations.resize(n);
  model.weights.assign(n, 1.0);
  model.zero_sample_warning.assign(n, false);
  for (std::size_t t = 0; t < n; ++t) {
    const auto& attrs = parsed.annotations[t];
    if (model.net.transition(static_cast<int>(t)).silent()) {
      if (auto it = attrs.find("weight"); it != attrs.end()) {
        model.weights[t] = std::stod(it->second);
      }
      continue;
    }
    const int samples = attrs.count("samples") ? std::stoi(attrs.at("samples")) : 0;
    if (auto it = attrs.find("distribution"); it != attrs.end() && it->second == "normal") {
      model.durations[t] = DurationDistribution::normal(std::stod(attrs.at("mu")),
                                                        std::stod(attrs.at("sigma")), samples);
    } else if (auto v = attrs.find("value"); v != attrs.end()) {
      model.durations[t] = DurationDistribution::dirac(std::stod(v->second), samples);
    } else {
      model.durations[t] = DurationDistribution::dirac(0.0, 0);
      model.zero_sample_warning[t] = true;
    }
  }
  return model;
}

}  // namespace remtime
