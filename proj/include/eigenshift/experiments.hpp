#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

namespace eigenshift {

// Reproducible experiment protocols. Each kind fixes an instance family,
// a measured quantity, a reference bound, and a deterministic pass rule,
// so a config file plus a seed pins down every byte of the result.
enum class ExperimentKind {
  // Rank-one projector distance on the three hand-built perturbations that
  // make one bound term dominate (noise, x, y respectively). Deterministic;
  // `measured` must match the closed-form distance and the dominating term
  // must be the designated one for the trial to be valid.
  sharpness_constructions,
  // The diagonal family where the top eigenvector of A + E is orthogonal
  // to that of A while the classical projector bound stays at 10.
  dk_sharpness,
  // Random low-rank signal plus Wigner noise (or a fixed 6x9 rectangular
  // instance); checks that the evaluated bound dominates the realized
  // subspace distance whenever its hypotheses hold.
  bound_validity,
  // Planted-clique adjacency matrices; top-eigenvector thresholding plus
  // the 3k/4-neighbor cleanup must recover the largest clique exactly.
  hidden_cliques,
  // Rank-one deformation of a Wigner matrix; the leading-eigenvalue shift
  // is compared with the n/lambda_1 outlier law.
  deformed_wigner,
  // Spiked sample covariance at aspect ratio gamma = d/n; the eigenvector
  // inaccuracy is compared with its asymptotic limit.
  spiked_rates,
  // Decaying-spectrum comparison: the gap-ratio benchmark must dominate
  // the skewness-style value on polynomial profiles.
  jw_comparison,
  // Small-eigenvalue floor: instances whose floor certificate fires must
  // keep the least singular value above half its unperturbed size.
  least_singular,
};

std::string experiment_kind_name(ExperimentKind kind);
// Throws UsageError on an unrecognized name.
ExperimentKind experiment_kind_from_name(const std::string& name);

// `parameters` holds kind-specific knobs (sizes, spike strengths, ...);
// anything omitted takes the kind's documented default. `tolerances`
// adjusts the pass rule's thresholds by name. `threads` is an execution
// hint (0 = EIGENSHIFT_THREADS, then hardware concurrency) and is not part
// of the experiment's identity: it is never serialized, and results do not
// depend on it.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::dk_sharpness;
  nlohmann::json parameters = nlohmann::json::object();
  int trials = 1;
  std::uint64_t seed = 0;
  std::map<std::string, double> tolerances;
  int threads = 0;
};

// Accepts keys kind/parameters/trials/seed/tolerances/threads; anything
// else is rejected with UsageError naming the key. trials must be >= 1 and
// tolerance values strictly positive.
ExperimentConfig experiment_config_from_json(const nlohmann::json& j);
nlohmann::json experiment_config_to_json(const ExperimentConfig& cfg);

// One trial. `ratio` is measured/bound (0/0 reads as 0, anything non-finite
// is clamped to 1e300 so reports stay within JSON's number model). A trial
// that throws is recorded with zeroed values, valid = false, and the
// exception text in `error`; it fails that trial, never the run.
struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  double measured = 0.0;
  double bound = 0.0;
  double ratio = 0.0;
  bool valid = false;
  std::string error;
};

// Descriptive statistics over every record (error trials included, with
// their zeroed values); quantiles are nearest-rank on the sorted ratios.
// `pass` is the kind's rule and typically inspects only valid trials.
struct ExperimentSummary {
  int count = 0;
  double mean_ratio = 0.0;
  double median_ratio = 0.0;
  double min_ratio = 0.0;
  double max_ratio = 0.0;
  double q10_ratio = 0.0;
  double q90_ratio = 0.0;
  double mean_measured = 0.0;
  double valid_fraction = 0.0;
  bool pass = false;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<TrialRecord> records;
  ExperimentSummary summary;
  bool pass = false;
};

// Runs cfg.trials independent trials. Trial t draws from a stream keyed by
// mix64(cfg.seed ^ mix64(t + 1)), so reruns with the same config are
// byte-identical regardless of the worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Statistics plus the kind's pass rule. Throws EmptyResult when `records`
// is empty.
ExperimentSummary summarize(const ExperimentConfig& cfg,
                            const std::vector<TrialRecord>& records);

nlohmann::json experiment_result_to_json(const ExperimentResult& res);
ExperimentResult experiment_result_from_json(const nlohmann::json& j);

// format "json": the result object, indented, trailing newline. format
// "csv": header `trial,seed,measured,bound,ratio,valid` then one row per
// trial with doubles in %.17g. Unknown formats raise UsageError; file
// errors raise Error naming the path.
void emit_report(const ExperimentResult& res, const std::string& format,
                 const std::string& path);

// Neighborhood-radius heuristics used by the experiment protocols.
double radius_from_noise(double eps, double E_norm);  // 24 * E_norm / eps
double radius_half_leading(double lambda_p);          // lambda_p / 2

}  // namespace eigenshift
