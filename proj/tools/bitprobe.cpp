// Copyright 2026 The bitprobe Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bitprobe/config.hpp"
#include "bitprobe/records.hpp"
#include "bitprobe/report.hpp"
#include "bitprobe/runner.hpp"
#include "bitprobe/stats.hpp"
#include "bitprobe/taskgen.hpp"

namespace {

using namespace bitprobe;

enum ExitCode { kOk = 0, kFailure = 1, kConfig = 2, kBackend = 3, kVerification = 4 };

class VerificationFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RegistryArgs {
  std::uint64_t seed = 0;
  int k = kDefaultWidth;
  std::string out;
  std::string expected;  // "id<TAB>bitload" lines
};

void add_registry_options(CLI::App* cmd, RegistryArgs& a) {
  cmd->add_option("--seed", a.seed, "registry seed");
  cmd->add_option("--k", a.k, "bitstring width")->check(CLI::Range(kMinWidth, kMaxWidth));
}

TaskRegistry checked_registry(const RegistryArgs& a) {
  try {
    return build_registry(a.seed, a.k);
  } catch (const TaskError& e) {
    throw VerificationFailure(e.what());
  }
}

std::map<std::string, int> read_expected_bitloads(const std::string& path) {
  std::map<std::string, int> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw ConfigError({path + ": expected id<TAB>bitload"});
    out[line.substr(0, tab)] = std::stoi(line.substr(tab + 1));
  }
  return out;
}

int registry_verify(const RegistryArgs& a) {
  const TaskRegistry registry = checked_registry(a);
  std::vector<std::string> problems;
  int singles = 0;
  for (const auto& f : registry.functions()) singles += f.stage_count() == 1 ? 1 : 0;
  const int compositions = static_cast<int>(registry.size()) - singles;
  if (registry.size() != 100 || singles != 30 || compositions != 70) {
    problems.push_back("expected 30 singles and 70 compositions, found " +
                       std::to_string(singles) + " and " + std::to_string(compositions));
  }
  if (auto c = find_collision(registry.functions())) {
    problems.push_back("functions " + c->first + " and " + c->second + " coincide");
  }
  if (!a.expected.empty()) {
    for (const auto& [id, load] : read_expected_bitloads(a.expected)) {
      const TaskFunction* f = registry.find(id);
      if (!f) {
        problems.push_back(id + ": not in registry");
      } else if (f->bitload() != load) {
        problems.push_back(id + ": bitload " + std::to_string(f->bitload()) + ", expected " +
                           std::to_string(load));
      }
    }
  }
  for (const auto& p : problems) std::cerr << "FAIL " << p << "\n";
  if (!problems.empty()) throw VerificationFailure(std::to_string(problems.size()) + " problem(s)");
  std::cout << "ok: " << registry.size() << " functions (" << singles << " singles, "
            << compositions << " compositions), width " << registry.width() << ", seed "
            << registry.seed() << "\n";
  return kOk;
}

void registry_export(const RegistryArgs& a) {
  const TaskRegistry registry = checked_registry(a);
  if (a.out.empty()) {
    export_registry(registry, std::cout);
    return;
  }
  std::ostringstream buf;
  export_registry(registry, buf);
  write_atomically(a.out, buf.str());
}

RunConfig config_with_overrides(const std::string& path, const std::string& backend,
                                const std::string& output) {
  RunConfig c = load_config(path);
  if (!backend.empty()) c.backend = backend;
  if (!output.empty()) c.output_dir = output;
  return c;
}

void print_run(const RunResult& r) {
  std::cout << "model " << r.model_id << ": " << r.trials_run << " trials run, "
            << r.trials_skipped << " already present\n"
            << "output " << r.output_dir.string() << "\n\n";
  const auto rows = table_rows(r.bundle.rows);
  if (!rows.empty()) std::cout << render_accuracy_table(rows);
}

stats::Clusters clusters_for(const std::filesystem::path& dir, int shots, bool mode) {
  const RunConfig config = load_config(dir / kConfigFile);
  const TaskRegistry registry = registry_for(config);
  std::vector<TrialOutcome> outcomes;
  for (auto& r : TrialLog(dir / kTrialsFile).load(config.k)) {
    if (r.outcome.trial.shots == shots) outcomes.push_back(std::move(r.outcome));
  }
  if (outcomes.empty()) throw ConfigError({"no trials with n=" + std::to_string(shots)});
  return stats::clusters_from_outcomes(outcomes, registry, mode);
}

std::vector<std::pair<double, double>> read_points(const std::string& path) {
  std::vector<std::pair<double, double>> out;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    double x = 0;
    double y = 0;
    if (!(fields >> x >> y)) throw ConfigError({path + ": expected two numbers per line"});
    out.emplace_back(x, y);
  }
  return out;
}

int dispatch(int argc, char** argv) {
  CLI::App app{"bitprobe: in-context learning of bitstring functions"};
  app.require_subcommand(1);

  // registry
  auto* registry = app.add_subcommand("registry", "build, verify or export the task registry");
  registry->require_subcommand(1);
  RegistryArgs reg;
  auto* reg_build = registry->add_subcommand("build", "build and summarize the registry");
  add_registry_options(reg_build, reg);
  reg_build->add_option("--out", reg.out, "also write the export here");
  auto* reg_verify = registry->add_subcommand("verify", "check split, distinctness, bitloads");
  add_registry_options(reg_verify, reg);
  reg_verify->add_option("--expected-bitloads", reg.expected, "id<TAB>bitload file")
      ->check(CLI::ExistingFile);
  auto* reg_export = registry->add_subcommand("export", "write one line per function");
  add_registry_options(reg_export, reg);
  reg_export->add_option("--out", reg.out, "output file (default stdout)");

  // eval
  auto* eval = app.add_subcommand("eval", "run or resume a sweep");
  eval->require_subcommand(1);
  std::string config_path;
  std::string backend_override;
  std::string output_override;
  auto* eval_run = eval->add_subcommand("run", "run the sweep a config describes");
  eval_run->add_option("--config", config_path, "run config JSON")->required();
  eval_run->add_option("--backend", backend_override,
                       "builtin:NAME, exec:COMMAND or tcp:HOST:PORT");
  eval_run->add_option("--output", output_override, "output directory");
  std::string resume_dir;
  auto* eval_resume = eval->add_subcommand("resume", "continue the run stored in a directory");
  eval_resume->add_option("dir", resume_dir, "run directory")->required();

  // stats
  auto* st = app.add_subcommand("stats", "bootstrap, regression and baseline tests");
  st->require_subcommand(1);
  std::string stats_dir;
  int stats_shots = 0;
  int replicates = stats::kDefaultReplicates;
  std::uint64_t boot_seed = 0;
  bool boot_mode = false;
  auto* st_boot = st->add_subcommand("bootstrap", "cluster bootstrap SE of one (run, n)");
  st_boot->add_option("dir", stats_dir, "run directory")->required();
  st_boot->add_option("--n", stats_shots, "shot count")->required();
  st_boot->add_option("--replicates", replicates)->check(CLI::PositiveNumber);
  st_boot->add_option("--seed", boot_seed);
  st_boot->add_flag("--mode-baseline", boot_mode, "resample the mode baseline instead");
  std::string points_path;
  std::string covariate = "shots";
  auto* st_reg = st->add_subcommand("regress", "OLS of accuracy on ln(covariate)");
  st_reg->add_option("--dir", stats_dir, "run directory (accuracy vs shots)");
  st_reg->add_option("--points", points_path, "whitespace-separated x y lines")
      ->check(CLI::ExistingFile);
  st_reg->add_option("--covariate", covariate)->check(CLI::IsMember({"shots", "params"}));
  double model = 0;
  double model_se = 0;
  double baseline = 0;
  double baseline_se = 0;
  auto* st_cmp = st->add_subcommand("compare", "one-sided z-test against a baseline");
  st_cmp->add_option("--model", model)->required();
  st_cmp->add_option("--model-se", model_se)->required();
  st_cmp->add_option("--baseline", baseline)->required();
  st_cmp->add_option("--baseline-se", baseline_se)->required();

  // report
  auto* rep = app.add_subcommand("report", "render tables and plot data");
  rep->require_subcommand(1);
  std::string report_dir;
  std::string fixture;
  bool markdown = false;
  auto* rep_table = rep->add_subcommand("table", "accuracy table, percent with one decimal");
  rep_table->add_option("dir", report_dir, "run directory");
  rep_table->add_option("--fixture", fixture, "family/model/shots/mean/se TSV")
      ->check(CLI::ExistingFile);
  rep_table->add_flag("--markdown", markdown, "markdown with bold column maxima");
  PlotOptions plot;
  std::string plot_out;
  auto* rep_plots = rep->add_subcommand("plots", "write columnar plot inputs");
  rep_plots->add_option("dir", report_dir, "run directory")->required();
  rep_plots->add_option("--bar-shots", plot.bar_shots, "n for the per-function bars");
  rep_plots->add_option("--out", plot_out, "output directory (default DIR/plots)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (reg_build->parsed()) {
    const TaskRegistry r = checked_registry(reg);
    int singles = 0;
    for (const auto& f : r.functions()) singles += f.stage_count() == 1 ? 1 : 0;
    std::cout << r.size() << " functions: " << singles << " singles, " << r.size() - singles
              << " compositions; width " << r.width() << ", seed " << r.seed() << "\n";
    if (const auto* c = r.find("meta_constant"); c && c->constant()) {
      std::cout << "meta_constant output " << c->constant()->str() << "\n";
    }
    if (!reg.out.empty()) registry_export(reg);
    return kOk;
  }
  if (reg_verify->parsed()) return registry_verify(reg);
  if (reg_export->parsed()) {
    registry_export(reg);
    return kOk;
  }

  if (eval_run->parsed()) {
    print_run(run(config_with_overrides(config_path, backend_override, output_override),
                  &std::cerr));
    return kOk;
  }
  if (eval_resume->parsed()) {
    print_run(resume(resume_dir, &std::cerr));
    return kOk;
  }

  if (st_boot->parsed()) {
    const auto clusters = clusters_for(stats_dir, stats_shots, boot_mode);
    const auto b = stats::cluster_bootstrap_se(clusters, replicates, boot_seed);
    std::cout << "estimate " << b.point_estimate << "\nse " << b.standard_error
              << "\nreplicates " << b.replicates << "\nclusters " << clusters.size() << "\n";
    return kOk;
  }
  if (st_reg->parsed()) {
    std::vector<std::pair<double, double>> points;
    if (!points_path.empty()) {
      points = read_points(points_path);
    } else if (!stats_dir.empty()) {
      for (const auto& s : bundle_from_dir(stats_dir).rows) {
        points.emplace_back(s.shots, s.estimate.overall);
      }
    } else {
      throw ConfigError({"regress needs --points or --dir"});
    }
    const auto fit = stats::fit_log_regression(
        points, covariate == "params" ? stats::Covariate::kLogParams : stats::Covariate::kLogShots);
    std::cout << "covariate " << stats::covariate_name(fit.covariate) << "\nslope " << fit.slope
              << "\nintercept " << fit.intercept << "\nslope_se " << fit.slope_se
              << "\np_one_sided " << fit.one_sided_p << "\npoints " << fit.points << "\n";
    return kOk;
  }
  if (st_cmp->parsed()) {
    const auto c = stats::compare_to_baseline(model, model_se, baseline, baseline_se);
    std::cout << "z " << c.z << "\np_one_sided " << c.one_sided_p << "\n";
    return kOk;
  }

  if (rep_table->parsed()) {
    std::vector<TableRow> rows;
    if (!fixture.empty()) {
      rows = read_table_fixture(read_file(fixture));
    } else if (!report_dir.empty()) {
      rows = table_rows(bundle_from_dir(report_dir).rows);
    } else {
      throw ConfigError({"table needs a run directory or --fixture"});
    }
    std::cout << render_accuracy_table(rows, markdown);
    return kOk;
  }
  if (rep_plots->parsed()) {
    const std::filesystem::path out =
        plot_out.empty() ? std::filesystem::path(report_dir) / kPlotDir : std::filesystem::path(plot_out);
    for (const auto& p : emit_plot_data(bundle_from_dir(report_dir), out, plot)) {
      std::cout << p.string() << "\n";
    }
    return kOk;
  }
  return kFailure;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return dispatch(argc, argv);
  } catch (const VerificationFailure& e) {
    std::cerr << "verification failed: " << e.what() << "\n";
    return kVerification;
  } catch (const ConfigError& e) {
    for (const auto& p : e.problems()) std::cerr << "config error: " << p << "\n";
    return kConfig;
  } catch (const BackendError& e) {
    std::cerr << "backend error: " << e.what() << "\n";
    return kBackend;
  } catch (const RecordError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
}
