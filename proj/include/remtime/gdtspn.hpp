#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "remtime/petri.hpp"

namespace remtime {

/// Standard normal CDF.
double normal_cdf(double x);

/// Standard normal quantile (probit). Rational approximation with
/// |relative error| < 1e-9 over (0, 1); returns +-infinity at the ends.
double normal_quantile(double p);

/// Draws a double uniformly from [0, 1) using 53 random bits.
double uniform01(std::mt19937_64& rng);

/// Duration model of a timed transition: a normal fit or a point mass.
/// A normal with sigma <= 0 collapses to a point mass at mu.
struct DurationDistribution {
  enum class Kind { Normal, Dirac };

  Kind kind = Kind::Dirac;
  double mu = 0.0;     // mean, or the point-mass value
  double sigma = 0.0;  // 0 for point masses
  int sample_count = 0;

  static DurationDistribution normal(double mu, double sigma, int sample_count = 0);
  static DurationDistribution dirac(double value, int sample_count = 0);

  /// CDF of the (untruncated) duration distribution.
  double cdf(double x) const;

  friend bool operator==(const DurationDistribution&, const DurationDistribution&) = default;
};

/// Samples the duration conditioned on being at least `elapsed` (and at
/// least 0) via inverse-CDF conditioning: u ~ U(F(lower), 1),
/// t = F^-1(u). When F(lower) >= 1 - 1e-12 the support is exhausted and
/// the sample degenerates to the elapsed time itself (Dirac case).
/// The result is always >= max(elapsed, 0).
double truncated_sample(const DurationDistribution& d, double elapsed, std::mt19937_64& rng);

/// A workflow net enriched with stochastic timing: a duration distribution
/// per timed (labeled) transition and a positive weight per immediate
/// (silent) transition.
struct Gdtspn {
  PetriNet net;
  std::vector<DurationDistribution> durations;  // indexed by transition
  std::vector<double> weights;                  // indexed by transition
  std::vector<bool> zero_sample_warning;        // labeled transitions never observed
};

/// Fits the stochastic map from training traces: per labeled transition a
/// normal over the replay-derived durations (event time minus enabling
/// time), collapsing to a point mass for single samples or zero variance;
/// per silent transition its replay firing count, floored at 1.
/// Throws ReplayError (naming the case) if a trace does not replay.
Gdtspn enrich(const PetriNet& net, const std::vector<const Trace*>& traces);
Gdtspn enrich(const PetriNet& net, const EventLog& log);

struct SimulationConfig {
  int n_runs = 500;
  int max_firings_per_run = 10'000;
  std::uint64_t seed = 0;
};

struct SimRun {
  bool completed = false;
  double remaining_ms = 0.0;
};

/// One discrete-event run from `state` at clock t0 until the final
/// marking: enabled immediates fire first (chosen by weight, zero time);
/// otherwise every enabled timed transition holds a sampled completion
/// time and the earliest fires (race). Transitions already enabled at t0
/// are sampled truncated by their elapsed enabling time; transitions that
/// become enabled during the run are truncated at 0 only, and a sample is
/// discarded whenever its transition is disabled (no memory across
/// disablings). Runs exceeding max_firings_per_run abort.
SimRun simulate_once(const Gdtspn& model, const ReplayState& state, Millis t0,
                     std::mt19937_64& rng, int max_firings = 10'000);

struct MonteCarloEstimate {
  double remaining_ms = 0.0;
  int completed_runs = 0;
  int aborted_runs = 0;

  /// Sound when at most half the runs aborted and at least one completed.
  bool ok() const { return completed_runs > 0 && aborted_runs * 2 <= completed_runs + aborted_runs; }
};

/// Mean remaining time over cfg.n_runs independent runs; aborted runs are
/// discarded. Each run's random stream is derived from (seed, run index),
/// so the estimate does not depend on scheduling.
MonteCarloEstimate predict_remaining(const Gdtspn& model, const ReplayState& state, Millis t0,
                                     const SimulationConfig& cfg);

/// PNML with the stochastic parameters attached as toolspecific
/// attributes; read_gdtspn_pnml round-trips it.
std::string write_gdtspn_pnml(const Gdtspn& model);
Gdtspn read_gdtspn_pnml(const std::string& xml);

}  // namespace remtime
