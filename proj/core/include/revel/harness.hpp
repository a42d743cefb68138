#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "revel/blackbox.hpp"
#include "revel/config.hpp"
#include "revel/explain.hpp"
#include "revel/featurize.hpp"
#include "revel/metrics.hpp"

namespace revel {

inline constexpr std::string_view kEngineVersion = "0.1.0";

/// Outcome of E explanations of one instance for one (method, N, F).
struct RunRecord {
  std::size_t instance = 0;
  std::string method;
  std::size_t budget = 0;
  std::size_t size = 0;      // F as configured (patches per side for grids)
  std::size_t features = 0;  // interpretable features
  std::size_t explanations = 0;
  std::optional<double> local_concordance;
  std::optional<double> local_fidelity;
  std::optional<double> prescriptivity;  // mean over explanations that flipped
  std::optional<double> conciseness;
  std::optional<double> robustness_cosine;
  std::optional<double> robustness_magnitude;
  std::size_t no_flip = 0;
  std::optional<double> flip_steps;  // mean over explanations that flipped
  std::size_t evaluations = 0;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
  std::string status = "ok";
  std::string error;

  bool ok() const { return status == "ok"; }
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

/// Metric names in record/aggregate order.
const std::vector<std::string>& metric_names();
std::optional<double> metric_value(const RunRecord& r, std::string_view metric);

struct AggregateRow {
  std::string method;
  std::size_t budget = 0;
  std::size_t size = 0;
  std::string metric;
  std::size_t count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation (n - 1)
  std::size_t no_flip = 0;
};

/// Groups by (method, N, F, metric). Records with a failed status and
/// missing values are skipped; no-flip counts ride along with
/// prescriptivity. Throws InvalidArgument on empty input.
std::vector<AggregateRow> aggregate(std::span<const RunRecord> records);

/// Directional check on one metric along one axis.
struct TrendCheck {
  std::string metric;
  std::string axis;  // "N" or "F"
  std::string method;
  std::size_t budget = 0;  // fixed when axis is F
  std::size_t size = 0;    // fixed when axis is N
  std::vector<double> values;
  bool non_decreasing = false;
};

std::vector<TrendCheck> trend_checks(std::span<const AggregateRow> aggregates);

struct RecordTiming {
  std::size_t instance = 0;
  std::string method;
  std::size_t budget = 0;
  std::size_t size = 0;
  double seconds = 0.0;
};

struct RunReport {
  RunConfig config;
  std::vector<RunRecord> records;
  std::vector<AggregateRow> aggregates;
  std::vector<TrendCheck> trends;
  std::vector<RecordTiming> timings;
  std::size_t blackbox_failures = 0;
};

/// Builds the black box configured in `cfg` for one feature size.
std::shared_ptr<BlackBox> make_blackbox(const RunConfig& cfg, std::size_t size);

/// Featurizer for one configured size.
std::unique_ptr<Featurizer> make_featurizer(const RunConfig& cfg, std::size_t size);

/// Instance `index` for one configured size: generated from the run seed or
/// read from the configured raw tensor file.
Tensor make_instance(const RunConfig& cfg, std::size_t size, std::size_t index);

/// Everything needed to score explanations of one instance.
struct InstanceScores {
  std::vector<Explanation> explanations;
  std::vector<MetricReport> reports;
  std::size_t evaluations = 0;
};

/// Fits `count` explanations of one instance and scores each with the four
/// per-explanation metrics; robustness over the set is filled into every
/// report when count >= 2.
InstanceScores explain_and_score(BlackBoxHandle& blackbox, const MaskedInstance& source,
                                 const MethodSpec& method, std::size_t samples, std::size_t count,
                                 NormKind norm, FidelityMode fidelity, std::uint64_t seed,
                                 std::uint64_t stream);

/// Runs the whole sweep. Records are in canonical order (instance, method,
/// N, F) independent of the worker count.
RunReport run_experiment(const RunConfig& cfg);

void write_records_csv(std::ostream& out, std::span<const RunRecord> records);
std::vector<RunRecord> read_records_csv(std::istream& in);
void write_aggregates_csv(std::ostream& out, std::span<const AggregateRow> rows);
void write_trends_csv(std::ostream& out, std::span<const TrendCheck> trends);

/// Writes records.csv, aggregates.csv, trends.csv, timings.csv,
/// manifest.json and figures/<scenario>_<metric>.csv under `dir`.
void write_report(const RunReport& report, const std::filesystem::path& dir);

/// Shortest round-trip decimal text of a double.
std::string format_real(double v);

}  // namespace revel
