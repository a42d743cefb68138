// revel: command-line front end.
//
//   revel explain --config <file> --instance <file> --method <name>
//   revel run     --config <file> --out <dir>
//   revel report  --records <csv> [--out <dir>]
//
// Exit codes: 0 success, 2 configuration error, 3 black-box failure,
// 1 anything else.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "revel/config.hpp"
#include "revel/errors.hpp"
#include "revel/harness.hpp"

namespace {

using namespace revel;
using nlohmann::json;

constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitBlackBox = 3;

json matrix_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

int cmd_explain(const std::string& config_path, const std::string& instance_path, const std::string& method_name) {
  RunConfig cfg = load_config(config_path);
  apply_environment(cfg);
  const MethodSpec method =
      MethodSpec::parse(method_name, method_name == "shap-exact" ? cfg.exact_alpha : cfg.alpha);
  const std::size_t size = cfg.featurizer.sizes.front();
  const std::size_t samples = cfg.budgets.front();
  if (method.sampler != SamplerKind::exhaustive && samples < cfg.featurizer.feature_count(size) + 1) {
    throw ConfigError("budget " + std::to_string(samples) + " is below F + 1");
  }

  cfg.instances.kind = InstanceConfig::Kind::files;
  cfg.instances.files = {instance_path};
  const Tensor x = make_instance(cfg, size, 0);
  const auto featurizer = make_featurizer(cfg, size);
  BlackBoxHandle handle(make_blackbox(cfg, size), cfg.blackbox.cache);
  const MaskedInstance source{*featurizer, x, 0};

  const InstanceScores scores =
      explain_and_score(handle, source, method, samples, 1, cfg.norm, cfg.fidelity, cfg.seed, 0);
  const Explanation& g = scores.explanations.front();
  const MetricReport& m = scores.reports.front();

  json out;
  out["method"] = method.name();
  out["features"] = g.feature_count();
  out["classes"] = g.class_count();
  out["budget"] = samples;
  out["seed"] = cfg.seed;
  out["evaluations"] = scores.evaluations;
  out["coefficients"] = matrix_json(g.coefficients);
  out["bias"] = vector_json(g.bias);
  out["importance"] = {{"logit", matrix_json(g.importance.logit)},
                       {"prob", matrix_json(g.importance.prob)},
                       {"combined", matrix_json(g.importance.combined)},
                       {"relative", matrix_json(g.importance.relative)},
                       {"absolute", matrix_json(g.importance.absolute)}};
  out["metrics"] = {{"norm", std::string(to_string(cfg.norm))},
                    {"local_concordance", m.local_concordance},
                    {"local_fidelity", m.local_fidelity},
                    {"prescriptivity", m.prescriptivity ? json(*m.prescriptivity) : json(nullptr)},
                    {"flip_steps", m.flip_steps},
                    {"conciseness", m.conciseness}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  RunConfig cfg = load_config(config_path);
  apply_environment(cfg);
  const RunReport report = run_experiment(cfg);
  write_report(report, out_dir);
  std::size_t failed = 0;
  for (const RunRecord& r : report.records) failed += r.ok() ? 0 : 1;
  std::cerr << "revel: " << report.records.size() << " records, " << failed << " failed, written to " << out_dir
            << '\n';
  return report.blackbox_failures > 0 ? kExitBlackBox : 0;
}

int cmd_report(const std::string& records_path, const std::string& out_dir) {
  std::ifstream in(records_path, std::ios::binary);
  if (!in) throw Error("cannot read " + records_path);
  const auto records = read_records_csv(in);
  const auto aggregates = aggregate(records);
  const auto trends = trend_checks(aggregates);
  if (out_dir.empty()) {
    write_aggregates_csv(std::cout, aggregates);
    return 0;
  }
  std::filesystem::create_directories(out_dir);
  std::ofstream agg(std::filesystem::path(out_dir) / "aggregates.csv", std::ios::binary);
  write_aggregates_csv(agg, aggregates);
  std::ofstream tr(std::filesystem::path(out_dir) / "trends.csv", std::ios::binary);
  write_trends_csv(tr, trends);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"revel: local linear explanation evaluation"};
  app.require_subcommand(1);

  std::string config_path, instance_path, method_name, out_dir, records_path, report_out;

  auto* explain = app.add_subcommand("explain", "Fit one explanation and print matrices and metrics as JSON");
  explain->add_option("--config", config_path, "Run configuration (JSON)")->required();
  explain->add_option("--instance", instance_path, "Raw tensor file (RT1)")->required();
  explain->add_option("--method", method_name, "lime:<sigma>, lime-exhaustive:<sigma>, shap-local, shap-global, shap-exact")
      ->required();

  auto* run = app.add_subcommand("run", "Run the full experiment and write the report");
  run->add_option("--config", config_path, "Run configuration (JSON)")->required();
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* report = app.add_subcommand("report", "Recompute aggregates from a records file");
  report->add_option("--records", records_path, "records.csv")->required();
  report->add_option("--out", report_out, "Write aggregates.csv and trends.csv here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*explain) return cmd_explain(config_path, instance_path, method_name);
    if (*run) return cmd_run(config_path, out_dir);
    return cmd_report(records_path, report_out);
  } catch (const ConfigError& e) {
    std::cerr << "revel: configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const BlackBoxError& e) {
    std::cerr << "revel: black-box failure: " << e.what() << '\n';
    return kExitBlackBox;
  } catch (const std::exception& e) {
    std::cerr << "revel: " << e.what() << '\n';
    return kExitError;
  }
}
