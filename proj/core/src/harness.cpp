#include "revel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <map>
#include <numeric>
#include <thread>
#include <tuple>

#include "json.hpp"
#include "revel/errors.hpp"
#include "revel/external.hpp"
#include "revel/rng.hpp"
#include "revel/sampling.hpp"

namespace revel {

namespace {

constexpr std::uint64_t kFitPurpose = 1;
constexpr std::uint64_t kFidelityPurpose = 2;
constexpr std::uint64_t kInstancePurpose = 3;

std::size_t fit_budget(const MethodSpec& method, std::size_t samples, std::size_t features) {
  if (method.sampler == SamplerKind::exhaustive) return std::size_t{1} << features;
  return samples + 1;
}

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

std::string format_real(double v) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

const std::vector<std::string>& metric_names() {
  static const std::vector<std::string> names{"local_concordance", "local_fidelity",
                                              "prescriptivity",    "conciseness",
                                              "robustness_cosine", "robustness_magnitude"};
  return names;
}

std::optional<double> metric_value(const RunRecord& r, std::string_view metric) {
  if (metric == "local_concordance") return r.local_concordance;
  if (metric == "local_fidelity") return r.local_fidelity;
  if (metric == "prescriptivity") return r.prescriptivity;
  if (metric == "conciseness") return r.conciseness;
  if (metric == "robustness_cosine") return r.robustness_cosine;
  if (metric == "robustness_magnitude") return r.robustness_magnitude;
  throw InvalidArgument("unknown metric '" + std::string(metric) + "'");
}

std::shared_ptr<BlackBox> make_blackbox(const RunConfig& cfg, std::size_t size) {
  const BlackBoxConfig& b = cfg.blackbox;
  if (b.kind == BlackBoxConfig::Kind::external) {
    return std::make_shared<ExternalModel>(b.command, ExternalModelOptions{b.timeout, b.max_batch});
  }
  SyntheticSuiteOptions options = b.suite;
  std::size_t features = size;
  if (cfg.featurizer.kind == FeaturizerConfig::Kind::grid) {
    if (options.pooling_grid == 0) {
      options.pooling_grid = *std::max_element(cfg.featurizer.sizes.begin(), cfg.featurizer.sizes.end());
    }
    features = options.pooling_grid * options.pooling_grid;
  }
  auto suite = make_synthetic_suite(b.seed, features, b.classes, options);
  return b.member == "linear" ? suite[0] : suite[1];
}

std::unique_ptr<Featurizer> make_featurizer(const RunConfig& cfg, std::size_t size) {
  const FeaturizerConfig& f = cfg.featurizer;
  if (f.kind == FeaturizerConfig::Kind::vector) {
    return std::make_unique<VectorFeaturizer>(std::vector<double>(size, 0.0));
  }
  return std::make_unique<PatchFeaturizer>(grid_partition(f.height, f.width, f.channels, size),
                                           OcclusionBaseline{std::vector<double>(f.channels, f.baseline)});
}

Tensor make_instance(const RunConfig& cfg, std::size_t size, std::size_t index) {
  const FeaturizerConfig& f = cfg.featurizer;
  const bool grid = f.kind == FeaturizerConfig::Kind::grid;
  if (cfg.instances.kind == InstanceConfig::Kind::files) {
    if (index >= cfg.instances.files.size()) throw ConfigError("instance index out of range");
    Tensor t = read_raw_tensor(cfg.instances.files[index]);
    if (grid) {
      if (t.shape != std::vector<std::size_t>{f.height, f.width, f.channels}) {
        throw ConfigError("instance " + cfg.instances.files[index].string() + " does not match the image shape");
      }
      return t;
    }
    if (t.values.size() != size) {
      throw ConfigError("instance " + cfg.instances.files[index].string() + " has " +
                        std::to_string(t.values.size()) + " values, expected " + std::to_string(size));
    }
    return Tensor::vector(std::move(t.values));
  }

  if (!grid) {
    RngStream rng(cfg.seed, derive_stream(kInstancePurpose, {size, index}));
    std::vector<double> x(size);
    for (double& v : x) v = rng.uniform(0.5, 1.5);
    return Tensor::vector(std::move(x));
  }
  // Images are shared across grid sizes: blocky colour cells plus noise.
  RngStream rng(cfg.seed, derive_stream(kInstancePurpose, {0, index}));
  const std::size_t cells = *std::max_element(f.sizes.begin(), f.sizes.end());
  const PatchGrid layout = grid_partition(f.height, f.width, f.channels, cells);
  std::vector<double> colours(layout.feature_count() * f.channels);
  for (double& c : colours) c = rng.uniform01();
  Tensor image = Tensor::image(f.height, f.width, f.channels, 0.0);
  for (std::size_t r = 0; r < f.height; ++r) {
    for (std::size_t col = 0; col < f.width; ++col) {
      const std::size_t cell = layout.feature_at(r, col);
      for (std::size_t ch = 0; ch < f.channels; ++ch) {
        const double v = colours[cell * f.channels + ch] + 0.05 * rng.normal();
        image.values[(r * f.width + col) * f.channels + ch] = std::clamp(v, 0.0, 1.0);
      }
    }
  }
  return image;
}

InstanceScores explain_and_score(BlackBoxHandle& blackbox, const MaskedInstance& source,
                                 const MethodSpec& method, std::size_t samples, std::size_t count,
                                 NormKind norm, FidelityMode fidelity, std::uint64_t seed,
                                 std::uint64_t stream) {
  const std::size_t features = source.featurizer.feature_count();
  const FeatureMask origin = FeatureMask::all_ones(features);
  InstanceScores out;
  for (std::size_t e = 0; e < count; ++e) {
    RngStream fit_rng(seed, derive_stream(stream, {kFitPurpose, e}));
    EvalBudget budget(fit_budget(method, samples, features));
    Explanation g = fit_explanation(blackbox, source, method, samples, fit_rng, &budget);

    MetricReport report;
    report.norm = norm;

    EvalBudget point_budget(1);
    const auto f_x = blackbox.evaluate_masks(source, std::span(&origin, 1), &point_budget);
    report.local_concordance = local_concordance(f_x.front(), g.predict(origin), norm);

    std::size_t fidelity_evals = 0;
    if (fidelity == FidelityMode::reuse) {
      report.local_fidelity = local_fidelity(g, g.neighborhood, norm);
      report.fidelity_neighbors = g.neighborhood.size();
    } else {
      RngStream fid_rng(seed, derive_stream(stream, {kFidelityPurpose, e}));
      EvalBudget fid_budget(fit_budget(method, samples, features));
      const Neighborhood held_out = build_neighborhood(method, samples, blackbox, source, fid_rng, &fid_budget);
      report.local_fidelity = local_fidelity(g, held_out, norm);
      report.fidelity_neighbors = held_out.size();
      fidelity_evals = fid_budget.consumed();
    }

    EvalBudget flip_budget(1);
    const PrescriptivityResult pr = prescriptivity(blackbox, source, g, norm, &flip_budget);
    report.prescriptivity = pr.value;
    report.flip_steps = pr.flip.steps;
    report.conciseness = conciseness(g.importance, features);

    out.evaluations += g.evaluations + point_budget.consumed() + fidelity_evals + flip_budget.consumed();
    out.reports.push_back(report);
    out.explanations.push_back(std::move(g));
  }
  if (count >= 2) {
    const double cos = robustness(out.explanations, SimilarityKind::cosine);
    const double mag = robustness(out.explanations, SimilarityKind::magnitude);
    for (MetricReport& r : out.reports) {
      r.robustness_cosine = cos;
      r.robustness_magnitude = mag;
    }
  }
  return out;
}

namespace {

RunRecord summarize(const InstanceScores& scores, RunRecord r) {
  std::vector<double> conc, fid, presc, conc_ness, steps;
  for (const MetricReport& m : scores.reports) {
    conc.push_back(m.local_concordance);
    fid.push_back(m.local_fidelity);
    conc_ness.push_back(m.conciseness);
    if (m.prescriptivity) {
      presc.push_back(*m.prescriptivity);
      steps.push_back(static_cast<double>(m.flip_steps));
    } else {
      ++r.no_flip;
    }
  }
  r.local_concordance = mean_of(conc);
  r.local_fidelity = mean_of(fid);
  r.conciseness = mean_of(conc_ness);
  if (!presc.empty()) {
    r.prescriptivity = mean_of(presc);
    r.flip_steps = mean_of(steps);
  }
  if (!scores.reports.empty()) {
    r.robustness_cosine = scores.reports.front().robustness_cosine;
    r.robustness_magnitude = scores.reports.front().robustness_magnitude;
  }
  r.evaluations = scores.evaluations;
  return r;
}

struct TaskResult {
  std::vector<RunRecord> records;
  std::vector<RecordTiming> timings;
  std::size_t blackbox_failures = 0;
};

struct SizeContext {
  std::size_t size = 0;
  std::unique_ptr<Featurizer> featurizer;
  std::unique_ptr<BlackBoxHandle> handle;
};

TaskResult run_instance(const RunConfig& cfg, SizeContext& ctx, std::size_t instance) {
  TaskResult out;
  const std::uint64_t stream = derive_stream(cfg.seed, {ctx.size, instance});
  Tensor x = make_instance(cfg, ctx.size, instance);
  const MaskedInstance source{*ctx.featurizer, x, stream};
  for (const MethodSpec& method : cfg.methods) {
    for (std::size_t budget : cfg.budgets) {
      RunRecord r;
      r.instance = instance;
      r.method = method.name();
      r.budget = budget;
      r.size = ctx.size;
      r.features = ctx.featurizer->feature_count();
      r.explanations = cfg.explanations;
      r.seed = cfg.seed;
      r.stream = stream;
      const auto start = std::chrono::steady_clock::now();
      try {
        const InstanceScores scores = explain_and_score(*ctx.handle, source, method, budget, cfg.explanations,
                                                        cfg.norm, cfg.fidelity, cfg.seed, stream);
        r = summarize(scores, std::move(r));
        if (!cfg.robustness) {
          r.robustness_cosine.reset();
          r.robustness_magnitude.reset();
        }
      } catch (const BlackBoxError& e) {
        r.status = "blackbox-error";
        r.error = e.what();
        ++out.blackbox_failures;
      } catch (const BudgetExhausted& e) {
        r.status = "budget-exhausted";
        r.error = e.what();
      } catch (const Error& e) {
        r.status = "fit-error";
        r.error = e.what();
      }
      const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
      out.timings.push_back({instance, r.method, budget, ctx.size, elapsed.count()});
      out.records.push_back(std::move(r));
    }
  }
  ctx.handle->forget_instance(stream);
  return out;
}

}  // namespace

RunReport run_experiment(const RunConfig& cfg) {
  cfg.validate();
  RunReport report;
  report.config = cfg;

  std::vector<SizeContext> contexts;
  std::shared_ptr<BlackBox> shared_external;
  for (std::size_t size : cfg.featurizer.sizes) {
    SizeContext ctx;
    ctx.size = size;
    ctx.featurizer = make_featurizer(cfg, size);
    std::shared_ptr<BlackBox> model;
    if (cfg.blackbox.kind == BlackBoxConfig::Kind::external) {
      if (!shared_external) shared_external = make_blackbox(cfg, size);
      model = shared_external;
    } else {
      model = make_blackbox(cfg, size);
    }
    ctx.handle = std::make_unique<BlackBoxHandle>(model, cfg.blackbox.cache);
    contexts.push_back(std::move(ctx));
  }

  struct Task {
    std::size_t context;
    std::size_t instance;
  };
  std::vector<Task> tasks;
  for (std::size_t c = 0; c < contexts.size(); ++c) {
    for (std::size_t i = 0; i < cfg.instances.count; ++i) tasks.push_back({c, i});
  }
  std::vector<TaskResult> results(tasks.size());
  std::vector<std::exception_ptr> failures(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t t = next++; t < tasks.size(); t = next++) {
      try {
        results[t] = run_instance(cfg, contexts[tasks[t].context], tasks[t].instance);
      } catch (...) {
        failures[t] = std::current_exception();
      }
    }
  };
  const std::size_t threads = std::min(cfg.workers, tasks.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < threads; ++k) pool.emplace_back(worker);
  }
  for (const auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }

  for (TaskResult& r : results) {
    std::move(r.records.begin(), r.records.end(), std::back_inserter(report.records));
    std::move(r.timings.begin(), r.timings.end(), std::back_inserter(report.timings));
    report.blackbox_failures += r.blackbox_failures;
  }

  std::map<std::string, std::size_t> method_rank;
  for (std::size_t k = 0; k < cfg.methods.size(); ++k) method_rank.emplace(cfg.methods[k].name(), k);
  auto rank = [&](const std::vector<std::size_t>& list, std::size_t v) {
    return static_cast<std::size_t>(std::find(list.begin(), list.end(), v) - list.begin());
  };
  auto key = [&](std::size_t instance, const std::string& method, std::size_t budget, std::size_t size) {
    return std::make_tuple(instance, method_rank.at(method), rank(cfg.budgets, budget),
                           rank(cfg.featurizer.sizes, size));
  };
  std::stable_sort(report.records.begin(), report.records.end(), [&](const RunRecord& a, const RunRecord& b) {
    return key(a.instance, a.method, a.budget, a.size) < key(b.instance, b.method, b.budget, b.size);
  });
  std::stable_sort(report.timings.begin(), report.timings.end(), [&](const RecordTiming& a, const RecordTiming& b) {
    return key(a.instance, a.method, a.budget, a.size) < key(b.instance, b.method, b.budget, b.size);
  });

  const bool any_ok = std::any_of(report.records.begin(), report.records.end(),
                                  [](const RunRecord& r) { return r.ok(); });
  if (any_ok) {
    report.aggregates = aggregate(report.records);
    report.trends = trend_checks(report.aggregates);
  }
  return report;
}

std::vector<AggregateRow> aggregate(std::span<const RunRecord> records) {
  if (records.empty()) throw InvalidArgument("no records to aggregate");
  std::map<std::string, std::size_t> method_rank;
  for (const RunRecord& r : records) method_rank.emplace(r.method, method_rank.size());

  struct Bucket {
    std::vector<double> values;
    std::size_t no_flip = 0;
  };
  using Key = std::tuple<std::size_t, std::size_t, std::size_t, std::size_t>;
  std::map<Key, Bucket> buckets;
  std::map<std::size_t, std::string> method_names;
  const auto& names = metric_names();
  for (const RunRecord& r : records) {
    if (!r.ok()) continue;
    const std::size_t m = method_rank.at(r.method);
    method_names.emplace(m, r.method);
    for (std::size_t k = 0; k < names.size(); ++k) {
      Bucket& b = buckets[{m, r.budget, r.size, k}];
      if (const auto v = metric_value(r, names[k])) b.values.push_back(*v);
      if (names[k] == "prescriptivity") b.no_flip += r.no_flip;
    }
  }

  std::vector<AggregateRow> rows;
  for (const auto& [k, b] : buckets) {
    AggregateRow row;
    row.method = method_names.at(std::get<0>(k));
    row.budget = std::get<1>(k);
    row.size = std::get<2>(k);
    row.metric = names[std::get<3>(k)];
    row.count = b.values.size();
    row.no_flip = b.no_flip;
    if (row.count == 0 && row.no_flip == 0) continue;
    if (row.count > 0) {
      row.mean = mean_of(b.values);
      if (row.count > 1) {
        double ss = 0.0;
        for (double v : b.values) ss += (v - row.mean) * (v - row.mean);
        row.stddev = std::sqrt(ss / static_cast<double>(row.count - 1));
      }
    } else {
      row.mean = std::nan("");
      row.stddev = std::nan("");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TrendCheck> trend_checks(std::span<const AggregateRow> aggregates) {
  std::vector<TrendCheck> out;
  // metric -> (method, fixed) -> axis value -> mean
  std::map<std::tuple<std::string, std::string, std::size_t>, std::map<std::size_t, double>> by_budget, by_size;
  std::vector<std::string> method_order;
  for (const AggregateRow& row : aggregates) {
    if (std::find(method_order.begin(), method_order.end(), row.method) == method_order.end()) {
      method_order.push_back(row.method);
    }
    if (row.count == 0) continue;
    if (row.metric == "robustness_cosine" || row.metric == "robustness_magnitude") {
      by_budget[{row.metric, row.method, row.size}][row.budget] = row.mean;
    }
    if (row.metric == "local_fidelity") by_size[{row.metric, row.method, row.budget}][row.size] = row.mean;
  }
  auto emit = [&](const auto& table, const std::string& axis) {
    for (const std::string& method : method_order) {
      for (const auto& [k, series] : table) {
        if (std::get<1>(k) != method || series.size() < 2) continue;
        TrendCheck t;
        t.metric = std::get<0>(k);
        t.axis = axis;
        t.method = method;
        if (axis == "N") t.size = std::get<2>(k);
        else t.budget = std::get<2>(k);
        for (const auto& [x, v] : series) t.values.push_back(v);
        t.non_decreasing = std::is_sorted(t.values.begin(), t.values.end());
        out.push_back(std::move(t));
      }
    }
  };
  emit(by_budget, "N");
  emit(by_size, "F");
  return out;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string opt(const std::optional<double>& v) { return v ? format_real(*v) : std::string(); }

std::vector<std::string> split_csv_line(std::istream& in, bool& ok) {
  std::vector<std::string> fields;
  std::string field;
  bool quoted = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (in.peek() == '"') {
          field += '"';
          in.get(c);
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      break;
    } else if (c != '\r') {
      field += c;
    }
  }
  ok = any;
  if (any) fields.push_back(std::move(field));
  return fields;
}

const char* kRecordHeader =
    "instance,method,N,F,features,explanations,local_concordance,local_fidelity,prescriptivity,"
    "conciseness,robustness_cosine,robustness_magnitude,no_flip,flip_steps,evaluations,seed,stream,"
    "status,error";

std::optional<double> parse_opt(const std::string& s) {
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw InvalidArgument("bad number '" + s + "' in records");
  return v;
}

std::uint64_t parse_u(const std::string& s) {
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) throw InvalidArgument("bad integer '" + s + "' in records");
  return v;
}

}  // namespace

void write_records_csv(std::ostream& out, std::span<const RunRecord> records) {
  out << kRecordHeader << '\n';
  for (const RunRecord& r : records) {
    out << r.instance << ',' << csv_escape(r.method) << ',' << r.budget << ',' << r.size << ',' << r.features << ','
        << r.explanations << ',' << opt(r.local_concordance) << ',' << opt(r.local_fidelity) << ','
        << opt(r.prescriptivity) << ',' << opt(r.conciseness) << ',' << opt(r.robustness_cosine) << ','
        << opt(r.robustness_magnitude) << ',' << r.no_flip << ',' << opt(r.flip_steps) << ',' << r.evaluations
        << ',' << r.seed << ',' << r.stream << ',' << csv_escape(r.status) << ',' << csv_escape(r.error) << '\n';
  }
}

std::vector<RunRecord> read_records_csv(std::istream& in) {
  bool ok = false;
  std::vector<std::string> header = split_csv_line(in, ok);
  if (!ok) throw InvalidArgument("records file is empty");
  std::string joined;
  for (std::size_t i = 0; i < header.size(); ++i) joined += (i ? "," : "") + header[i];
  if (joined != kRecordHeader) throw InvalidArgument("records file has an unexpected header");
  std::vector<RunRecord> out;
  for (;;) {
    std::vector<std::string> f = split_csv_line(in, ok);
    if (!ok) break;
    if (f.size() == 1 && f[0].empty()) continue;
    if (f.size() != header.size()) {
      throw InvalidArgument("record line " + std::to_string(out.size() + 2) + " has " + std::to_string(f.size()) +
                            " fields");
    }
    RunRecord r;
    r.instance = parse_u(f[0]);
    r.method = f[1];
    r.budget = parse_u(f[2]);
    r.size = parse_u(f[3]);
    r.features = parse_u(f[4]);
    r.explanations = parse_u(f[5]);
    r.local_concordance = parse_opt(f[6]);
    r.local_fidelity = parse_opt(f[7]);
    r.prescriptivity = parse_opt(f[8]);
    r.conciseness = parse_opt(f[9]);
    r.robustness_cosine = parse_opt(f[10]);
    r.robustness_magnitude = parse_opt(f[11]);
    r.no_flip = parse_u(f[12]);
    r.flip_steps = parse_opt(f[13]);
    r.evaluations = parse_u(f[14]);
    r.seed = parse_u(f[15]);
    r.stream = parse_u(f[16]);
    r.status = f[17];
    r.error = f[18];
    out.push_back(std::move(r));
  }
  return out;
}

void write_aggregates_csv(std::ostream& out, std::span<const AggregateRow> rows) {
  out << "method,N,F,metric,count,mean,std,no_flip\n";
  for (const AggregateRow& a : rows) {
    out << csv_escape(a.method) << ',' << a.budget << ',' << a.size << ',' << a.metric << ',' << a.count << ','
        << (a.count ? format_real(a.mean) : "") << ',' << (a.count ? format_real(a.stddev) : "") << ','
        << a.no_flip << '\n';
  }
}

void write_trends_csv(std::ostream& out, std::span<const TrendCheck> trends) {
  out << "metric,axis,method,N,F,values,non_decreasing\n";
  for (const TrendCheck& t : trends) {
    std::string values;
    for (std::size_t i = 0; i < t.values.size(); ++i) values += (i ? ";" : "") + format_real(t.values[i]);
    out << t.metric << ',' << t.axis << ',' << csv_escape(t.method) << ',' << (t.axis == "F" ? std::to_string(t.budget) : "")
        << ',' << (t.axis == "N" ? std::to_string(t.size) : "") << ',' << values << ','
        << (t.non_decreasing ? "true" : "false") << '\n';
  }
}

void write_report(const RunReport& report, const std::filesystem::path& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir / "figures");
  auto open = [](const fs::path& p) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error("cannot write " + p.string());
    return f;
  };
  {
    auto f = open(dir / "records.csv");
    write_records_csv(f, report.records);
  }
  {
    auto f = open(dir / "aggregates.csv");
    write_aggregates_csv(f, report.aggregates);
  }
  {
    auto f = open(dir / "trends.csv");
    write_trends_csv(f, report.trends);
  }
  {
    auto f = open(dir / "timings.csv");
    f << "instance,method,N,F,seconds\n";
    for (const RecordTiming& t : report.timings) {
      f << t.instance << ',' << csv_escape(t.method) << ',' << t.budget << ',' << t.size << ',' << format_real(t.seconds)
        << '\n';
    }
  }
  for (const std::string& metric : metric_names()) {
    auto f = open(dir / "figures" / (report.config.scenario + "_" + metric + ".csv"));
    f << "method,N,F,mean,std,count";
    if (metric == "prescriptivity") f << ",no_flip";
    f << '\n';
    for (const AggregateRow& a : report.aggregates) {
      if (a.metric != metric) continue;
      f << csv_escape(a.method) << ',' << a.budget << ',' << a.size << ',' << (a.count ? format_real(a.mean) : "")
        << ',' << (a.count ? format_real(a.stddev) : "") << ',' << a.count;
      if (metric == "prescriptivity") f << ',' << a.no_flip;
      f << '\n';
    }
  }

  nlohmann::json manifest;
  manifest["engine_version"] = std::string(kEngineVersion);
  manifest["scenario"] = report.config.scenario;
  manifest["seed"] = report.config.seed;
  manifest["config"] = nlohmann::json::parse(config_to_json(report.config));
  manifest["environment"] = {{"compiler", __VERSION__},
                             {"cplusplus", __cplusplus},
                             {"workers", report.config.workers},
                             {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                           "." + std::to_string(EIGEN_MINOR_VERSION)}};
  std::size_t failed = 0;
  for (const RunRecord& r : report.records) failed += r.ok() ? 0 : 1;
  manifest["records"] = report.records.size();
  manifest["failed_records"] = failed;
  manifest["blackbox_failures"] = report.blackbox_failures;
  manifest["streams"] =
      "record stream = derive_stream(seed, {F, instance}); explanation e fits with "
      "derive_stream(stream, {1, e}) and draws its held-out fidelity set with derive_stream(stream, {2, e})";
  manifest["notes"] = {
      "shap-local truncates the SHAP exclusion-count distribution to v <= ceil(F/2); shap-global uses the "
      "full distribution. This split is an interpretation, not a published definition.",
      "conciseness clips each row L1 norm of the absolute importance matrix to 1 and the score to [0,1].",
      "prescriptivity averages only explanations that flipped the class; the rest are counted in no_flip.",
      "local fidelity mode: " + std::string(to_string(report.config.fidelity)),
      "synthetic runs default to 50 instances when no count is configured."};
  manifest["files"] = {"records.csv", "aggregates.csv", "trends.csv", "timings.csv", "figures/"};
  auto f = open(dir / "manifest.json");
  f << manifest.dump(2) << '\n';
}

}  // namespace revel
