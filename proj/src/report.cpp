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

#include "bitprobe/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace bitprobe {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

// Percent rounded to one decimal, as an integer count of tenths.
long tenths(double fraction) { return std::lround(fraction * 1000.0); }

}  // namespace

ReportBundle build_bundle(std::span<const TrialRecord> records, const TaskRegistry& registry,
                          const BundleOptions& options) {
  // Group by (model, n); std::map keeps the row order deterministic.
  std::map<std::pair<std::string, int>, std::vector<TrialOutcome>> groups;
  std::map<std::string, std::string> modality_of;
  for (const auto& r : records) {
    groups[{r.model_id, r.outcome.trial.shots}].push_back(r.outcome);
    modality_of.emplace(r.model_id,
                        std::string(modality_name(r.outcome.trial.scheme.modality())));
  }

  ReportBundle bundle;
  for (auto& [key, outcomes] : groups) {
    std::sort(outcomes.begin(), outcomes.end(),
              [](const auto& a, const auto& b) { return a.key() < b.key(); });
    const auto& [model, n] = key;
    ShotSummary s;
    s.model_id = model;
    s.family = options.family.empty() ? modality_of[model] : options.family;
    s.shots = n;
    s.estimate = summarize(outcomes, registry, n, model);
    s.trials_per_function = s.estimate.trials_per_function;

    const auto clusters = stats::clusters_from_outcomes(outcomes, registry);
    s.bootstrap = stats::cluster_bootstrap_se(clusters, options.replicates,
                                              options.bootstrap_seed);
    s.estimate.bootstrap_se = s.bootstrap.standard_error;
    const auto mode_clusters = stats::clusters_from_outcomes(outcomes, registry, true);
    s.mode_bootstrap = stats::cluster_bootstrap_se(mode_clusters, options.replicates,
                                                   options.bootstrap_seed);
    s.mode_baseline = s.mode_bootstrap.point_estimate;
    s.vs_mode = stats::compare_to_baseline(s.estimate.overall, s.bootstrap.standard_error,
                                           s.mode_baseline, s.mode_bootstrap.standard_error);

    int mistakes = 0;
    int failures = 0;
    for (const auto& o : outcomes) {
      mistakes += o.understandable_mistake ? 1 : 0;
      const TaskFunction& f = registry.at(o.trial.function_id);
      auto& target_bin = s.by_bitdiversity[bitdiversity(f(o.trial.query))];
      target_bin.target_count += 1;
      target_bin.correct_count += o.correct ? 1 : 0;
      if (const auto* y = std::get_if<Bitstring>(&o.prediction)) {
        s.by_bitdiversity[bitdiversity(*y)].predicted_count += 1;
      } else {
        failures += 1;
      }
    }
    const auto total = static_cast<double>(outcomes.size());
    s.understandable_mistake_rate = total > 0 ? mistakes / total : 0.0;
    s.decode_failure_rate = total > 0 ? failures / total : 0.0;
    s.by_bitload = stats::aggregate_by_bitload(s.estimate.per_function, registry);
    bundle.rows.push_back(std::move(s));
  }

  std::map<std::string, std::vector<std::pair<double, double>>> series;
  for (const auto& s : bundle.rows) {
    series[s.model_id].emplace_back(static_cast<double>(s.shots), s.estimate.overall);
  }
  for (const auto& [model, points] : series) {
    if (points.size() >= 3) {
      bundle.shots_fit[model] = stats::fit_log_regression(points, stats::Covariate::kLogShots);
    }
  }
  return bundle;
}

std::string summary_records(const ReportBundle& bundle) {
  std::string out;
  for (const auto& s : bundle.rows) {
    ordered_json j;
    j["model_id"] = s.model_id;
    j["family"] = s.family;
    j["n"] = s.shots;
    j["m"] = s.trials_per_function;
    j["estimate"] = s.estimate.overall;
    j["se"] = s.bootstrap.standard_error;
    j["replicates"] = s.bootstrap.replicates;
    j["bootstrap_seed"] = s.bootstrap.seed;
    j["mode_baseline"] = s.mode_baseline;
    j["mode_baseline_se"] = s.mode_bootstrap.standard_error;
    j["test"] = "one_sided_z_vs_mode_baseline";
    j["z"] = std::isfinite(s.vs_mode.z) ? ordered_json(s.vs_mode.z) : ordered_json(nullptr);
    j["p_value"] = s.vs_mode.one_sided_p;
    j["degenerate"] = s.vs_mode.degenerate;
    j["understandable_mistake_rate"] = s.understandable_mistake_rate;
    j["decode_failure_rate"] = s.decode_failure_rate;
    ordered_json per = ordered_json::object();
    for (const auto& [id, acc] : s.estimate.per_function) per[id] = acc;
    j["per_function"] = std::move(per);
    out += j.dump();
    out += '\n';
  }
  for (const auto& [model, fit] : bundle.shots_fit) {
    ordered_json r;
    r["model_id"] = model;
    r["test"] = "one_sided_t_slope";
    r["covariate"] = stats::covariate_name(fit.covariate);
    r["slope"] = fit.slope;
    r["intercept"] = fit.intercept;
    r["slope_se"] = fit.slope_se;
    r["p_value"] = fit.one_sided_p;
    r["points"] = fit.points;
    out += r.dump();
    out += '\n';
  }
  return out;
}

std::vector<ShotSummary> parse_summary_records(std::string_view text) {
  std::vector<ShotSummary> out;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto j = nlohmann::json::parse(line);
    if (!j.contains("estimate")) continue;  // regression records
    ShotSummary s;
    s.model_id = j.at("model_id").get<std::string>();
    s.family = j.at("family").get<std::string>();
    s.shots = j.at("n").get<int>();
    s.trials_per_function = j.at("m").get<int>();
    s.estimate.model_id = s.model_id;
    s.estimate.shots = s.shots;
    s.estimate.overall = j.at("estimate").get<double>();
    s.bootstrap.standard_error = j.at("se").get<double>();
    s.bootstrap.replicates = j.at("replicates").get<int>();
    s.estimate.bootstrap_se = s.bootstrap.standard_error;
    s.mode_baseline = j.at("mode_baseline").get<double>();
    s.mode_bootstrap.standard_error = j.at("mode_baseline_se").get<double>();
    s.vs_mode.one_sided_p = j.at("p_value").get<double>();
    s.understandable_mistake_rate = j.at("understandable_mistake_rate").get<double>();
    for (const auto& [id, acc] : j.at("per_function").items()) {
      s.estimate.per_function.emplace_back(id, acc.get<double>());
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TableRow> table_rows(std::span<const ShotSummary> summaries) {
  std::vector<TableRow> rows;
  for (const auto& s : summaries) {
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const TableRow& r) { return r.model == s.model_id; });
    if (it == rows.end()) {
      rows.push_back({s.model_id, s.family, {}});
      it = rows.end() - 1;
    }
    it->cells[s.shots] = {s.estimate.overall, s.bootstrap.standard_error};
  }
  return rows;
}

std::string format_cell(const TableCell& cell) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.1f±%.1f", cell.mean * 100.0, cell.se * 100.0);
  return buf;
}

AccuracyTable build_accuracy_table(std::span<const TableRow> rows) {
  AccuracyTable table;
  for (const auto& r : rows) {
    table.models.push_back(r.model);
    for (const auto& [n, _] : r.cells) table.shots.push_back(n);
  }
  std::sort(table.shots.begin(), table.shots.end());
  table.shots.erase(std::unique(table.shots.begin(), table.shots.end()), table.shots.end());

  table.cells.assign(rows.size(), std::vector<std::optional<RenderedCell>>(table.shots.size()));
  for (std::size_t c = 0; c < table.shots.size(); ++c) {
    const int n = table.shots[c];
    std::map<std::string, long> best;
    for (const auto& r : rows) {
      if (auto it = r.cells.find(n); it != r.cells.end()) {
        auto& b = best.try_emplace(r.family, tenths(it->second.mean)).first->second;
        b = std::max(b, tenths(it->second.mean));
      }
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto it = rows[i].cells.find(n);
      if (it == rows[i].cells.end()) continue;
      table.cells[i][c] = RenderedCell{format_cell(it->second),
                                       tenths(it->second.mean) == best[rows[i].family]};
    }
  }
  return table;
}

std::string render_accuracy_table(std::span<const TableRow> rows, bool markdown) {
  const AccuracyTable table = build_accuracy_table(rows);
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"Model"};
  for (int n : table.shots) header.push_back(std::to_string(n) + (n == 1 ? " shot" : " shots"));
  grid.push_back(header);
  for (std::size_t i = 0; i < table.models.size(); ++i) {
    std::vector<std::string> line{table.models[i]};
    for (const auto& cell : table.cells[i]) {
      if (!cell) {
        line.emplace_back("-");
      } else if (markdown && cell->bold) {
        line.push_back("**" + cell->text + "**");
      } else {
        line.push_back(cell->text);
      }
    }
    grid.push_back(std::move(line));
  }

  // Width in code points; "±" is two bytes.
  auto display_width = [](const std::string& s) {
    std::size_t w = 0;
    for (unsigned char ch : s) w += (ch & 0xC0) != 0x80 ? 1 : 0;
    return w;
  };
  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : grid) {
    for (std::size_t c = 0; c < line.size(); ++c) {
      widths[c] = std::max(widths[c], display_width(line[c]));
    }
  }
  std::string out;
  for (std::size_t r = 0; r < grid.size(); ++r) {
    const auto& line = grid[r];
    if (markdown) out += "| ";
    for (std::size_t c = 0; c < line.size(); ++c) {
      if (c) out += markdown ? " | " : "  ";
      out += line[c];
      out.append(widths[c] - display_width(line[c]), ' ');
    }
    if (markdown) out += " |";
    while (!markdown && !out.empty() && out.back() == ' ') out.pop_back();
    out += '\n';
    if (markdown && r == 0) {
      out += "|";
      for (std::size_t c = 0; c < line.size(); ++c) out += std::string(widths[c] + 2, '-') + "|";
      out += '\n';
    }
  }
  return out;
}

std::vector<TableRow> read_table_fixture(std::string_view text) {
  std::vector<TableRow> rows;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    std::string family;
    std::string model;
    std::string shots;
    std::string mean;
    std::string se;
    if (!std::getline(fields, family, '\t') || !std::getline(fields, model, '\t') ||
        !std::getline(fields, shots, '\t') || !std::getline(fields, mean, '\t') ||
        !std::getline(fields, se, '\t')) {
      throw std::invalid_argument("fixture line " + std::to_string(lineno) +
                                  ": expected 5 tab-separated fields");
    }
    auto it = std::find_if(rows.begin(), rows.end(),
                           [&](const TableRow& r) { return r.model == model; });
    if (it == rows.end()) {
      rows.push_back({model, family, {}});
      it = rows.end() - 1;
    }
    it->cells[std::stoi(shots)] = {std::stod(mean) / 100.0, std::stod(se) / 100.0};
  }
  return rows;
}

std::vector<std::filesystem::path> emit_plot_data(const ReportBundle& bundle,
                                                  const std::filesystem::path& dir,
                                                  const PlotOptions& options) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto emit = [&](const char* name, const std::string& text) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::trunc | std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
    written.push_back(path);
  };

  std::string shots = "model\tn\tlog_n\taccuracy\tse\tlower\tupper\tmode_baseline\tmode_se\n";
  std::string bitload = "model\tn\tbitload\taccuracy\tse\tfunctions\n";
  std::string diversity = "model\tn\tbitdiversity\ttargets\tpredictions\tcorrect\taccuracy\n";
  std::string mistakes = "model\tn\tunderstandable_mistake_rate\tdecode_failure_rate\n";
  for (const auto& s : bundle.rows) {
    const double acc = s.estimate.overall;
    const double se = s.bootstrap.standard_error;
    shots += s.model_id + "\t" + std::to_string(s.shots) + "\t" +
             fixed(std::log(static_cast<double>(s.shots))) + "\t" + fixed(acc) + "\t" +
             fixed(se) + "\t" + fixed(acc - se) + "\t" + fixed(acc + se) + "\t" +
             fixed(s.mode_baseline) + "\t" + fixed(s.mode_bootstrap.standard_error) + "\n";
    for (const auto& [load, g] : s.by_bitload) {
      bitload += s.model_id + "\t" + std::to_string(s.shots) + "\t" + std::to_string(load) +
                 "\t" + fixed(g.mean) + "\t" + fixed(g.se) + "\t" + std::to_string(g.count) +
                 "\n";
    }
    for (const auto& [bd, bin] : s.by_bitdiversity) {
      const double a = bin.target_count ? static_cast<double>(bin.correct_count) / bin.target_count : 0.0;
      diversity += s.model_id + "\t" + std::to_string(s.shots) + "\t" + std::to_string(bd) +
                   "\t" + std::to_string(bin.target_count) + "\t" +
                   std::to_string(bin.predicted_count) + "\t" +
                   std::to_string(bin.correct_count) + "\t" + fixed(a) + "\n";
    }
    mistakes += s.model_id + "\t" + std::to_string(s.shots) + "\t" +
                fixed(s.understandable_mistake_rate) + "\t" + fixed(s.decode_failure_rate) +
                "\n";
  }

  // Per-function bars at the requested n, else the largest n each model has.
  std::string bars = "model\tn\tfunction_id\taccuracy\n";
  std::map<std::string, const ShotSummary*> chosen;
  for (const auto& s : bundle.rows) {
    auto& c = chosen[s.model_id];
    if (c == nullptr || c->shots != options.bar_shots) {
      if (s.shots == options.bar_shots || c == nullptr || s.shots > c->shots) c = &s;
    }
  }
  for (const auto& [model, s] : chosen) {
    for (const auto& [id, acc] : s->estimate.per_function) {
      bars += model + "\t" + std::to_string(s->shots) + "\t" + id + "\t" + fixed(acc) + "\n";
    }
  }

  emit("accuracy_vs_shots.tsv", shots);
  emit("accuracy_vs_bitload.tsv", bitload);
  emit("function_bars.tsv", bars);
  emit("bitdiversity.tsv", diversity);
  emit("understandable_mistakes.tsv", mistakes);
  return written;
}

}  // namespace bitprobe
