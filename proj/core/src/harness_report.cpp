#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "qfl/errors.hpp"
#include "qfl/harness.hpp"

namespace qfl::harness {

using nlohmann::json;

namespace {

std::string fmt6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

struct CurvePoint {
  double train_loss = 0.0;
  double train_acc = 0.0;
  double test_acc = 0.0;
};

// One experiment curve: per seed, per round, per "unit" (client or task).
using PerSeedRows = std::vector<std::vector<std::vector<CurvePoint>>>;

void write_per_seed_csv(const std::filesystem::path& path,
                        const std::vector<std::vector<CurvePoint>>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write CSV: " + path.string());
  }
  out << "round,client_id,train_loss,train_acc,test_acc\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      const CurvePoint& p = rows[r][c];
      out << (r + 1) << ',' << c << ',' << fmt6(p.train_loss) << ','
          << fmt6(p.train_acc) << ',' << fmt6(p.test_acc) << '\n';
    }
  }
  if (!out) {
    throw IoError("short write: " + path.string());
  }
}

// Aggregate across seeds of the per-round unit means; population std.
void write_aggregate_csv(const std::filesystem::path& path,
                         const PerSeedRows& seeds) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write CSV: " + path.string());
  }
  out << "round,train_loss_mean,train_loss_std,train_acc_mean,train_acc_std,"
         "test_acc_mean,test_acc_std\n";
  const std::size_t rounds = seeds.empty() ? 0 : seeds.front().size();
  const double n = static_cast<double>(seeds.size());
  for (std::size_t r = 0; r < rounds; ++r) {
    double sums[3] = {0.0, 0.0, 0.0};
    double sq[3] = {0.0, 0.0, 0.0};
    for (const auto& seed_rows : seeds) {
      double unit_mean[3] = {0.0, 0.0, 0.0};
      const auto& units = seed_rows[r];
      for (const CurvePoint& p : units) {
        unit_mean[0] += p.train_loss;
        unit_mean[1] += p.train_acc;
        unit_mean[2] += p.test_acc;
      }
      for (double& v : unit_mean) {
        v /= static_cast<double>(units.size());
      }
      for (int i = 0; i < 3; ++i) {
        sums[i] += unit_mean[i];
        sq[i] += unit_mean[i] * unit_mean[i];
      }
    }
    out << (r + 1);
    for (int i = 0; i < 3; ++i) {
      const double mean = sums[i] / n;
      const double variance = std::max(0.0, sq[i] / n - mean * mean);
      out << ',' << fmt6(mean) << ',' << fmt6(std::sqrt(variance));
    }
    out << '\n';
  }
  if (!out) {
    throw IoError("short write: " + path.string());
  }
}

PerSeedRows qfl_rows(const ExperimentResult& result) {
  PerSeedRows seeds;
  for (const RunRecord& run : result.runs) {
    std::vector<std::vector<CurvePoint>> rows;
    for (const fedcore::RoundMetrics& round : run.rounds) {
      std::vector<CurvePoint> units;
      for (const fedcore::ClientRoundMetrics& c : round.clients) {
        units.push_back(CurvePoint{c.train_loss, c.train_accuracy, c.test_accuracy});
      }
      rows.push_back(std::move(units));
    }
    seeds.push_back(std::move(rows));
  }
  return seeds;
}

PerSeedRows baseline_rows(
    const std::vector<std::vector<trainers::BaselineRun>>& by_task,
    std::size_t num_seeds, int rounds) {
  PerSeedRows seeds(num_seeds);
  for (std::size_t si = 0; si < num_seeds; ++si) {
    auto& rows = seeds[si];
    rows.resize(static_cast<std::size_t>(rounds));
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (const auto& task_runs : by_task) {
        const fedcore::ClientRoundMetrics& m = task_runs[si].rounds[r];
        rows[r].push_back(CurvePoint{m.train_loss, m.train_accuracy, m.test_accuracy});
      }
    }
  }
  return seeds;
}

double final_test_mean(const PerSeedRows& seeds) {
  if (seeds.empty() || seeds.front().empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const auto& rows : seeds) {
    const auto& last = rows.back();
    double unit_mean = 0.0;
    for (const CurvePoint& p : last) {
      unit_mean += p.test_acc;
    }
    sum += unit_mean / static_cast<double>(last.size());
  }
  return sum / static_cast<double>(seeds.size());
}

}  // namespace

std::filesystem::path emit_metrics_csv(const ExperimentResult& result,
                                       const std::filesystem::path& out_dir) {
  if (result.runs.empty()) {
    throw UsageError("emit_metrics_csv: no run records");
  }
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) {
    throw IoError("cannot create output directory " + out_dir.string() + ": " +
                  ec.message());
  }
  const RunConfig& cfg = result.config;

  const PerSeedRows qfl = qfl_rows(result);
  for (std::size_t si = 0; si < result.runs.size(); ++si) {
    write_per_seed_csv(out_dir / (cfg.name + "_seed" +
                                  std::to_string(result.runs[si].seed) + ".csv"),
                       qfl[si]);
  }
  write_aggregate_csv(out_dir / (cfg.name + "_aggregate.csv"), qfl);

  json summary;
  summary["name"] = cfg.name;
  summary["experiment"] = cfg.experiment == ExperimentKind::MCSD ? "mcsd" : "mcmd";
  summary["topology"] =
      cfg.topology == netmodel::TopologyKind::Star ? "star" : "ring";
  {
    std::ostringstream hash;
    hash << std::hex << cfg.config_hash();
    summary["config_hash"] = hash.str();
  }
  summary["rounds"] = cfg.rounds;
  summary["clients"] = cfg.num_clients();
  summary["seeds"] = cfg.seeds;
  summary["task_labels"] = result.task_labels;

  json qfl_json;
  qfl_json["aggregate_csv"] = cfg.name + "_aggregate.csv";
  qfl_json["final_test_accuracy_mean"] = final_test_mean(qfl);
  qfl_json["per_seed"] = json::array();
  for (const RunRecord& run : result.runs) {
    json entry;
    entry["seed"] = run.seed;
    entry["final_per_client"] = run.final_eval.per_client_accuracy;
    entry["final_aggregate"] = run.final_eval.aggregate;
    entry["messages"] = run.ledger_totals.messages_sent;
    entry["payload_bytes"] = run.ledger_totals.payload_bytes;
    entry["wall_seconds"] = run.wall_seconds;
    qfl_json["per_seed"].push_back(entry);
  }
  summary["qfl"] = qfl_json;

  if (!result.quantum_baseline.empty()) {
    const PerSeedRows qb =
        baseline_rows(result.quantum_baseline, result.runs.size(), cfg.rounds);
    const PerSeedRows cb =
        baseline_rows(result.classical_baseline, result.runs.size(), cfg.rounds);
    for (std::size_t si = 0; si < result.runs.size(); ++si) {
      const std::string seed_str = std::to_string(result.runs[si].seed);
      write_per_seed_csv(
          out_dir / (cfg.name + "_qbaseline_seed" + seed_str + ".csv"), qb[si]);
      write_per_seed_csv(
          out_dir / (cfg.name + "_cbaseline_seed" + seed_str + ".csv"), cb[si]);
    }
    write_aggregate_csv(out_dir / (cfg.name + "_qbaseline_aggregate.csv"), qb);
    write_aggregate_csv(out_dir / (cfg.name + "_cbaseline_aggregate.csv"), cb);
    summary["quantum_baseline"] = {
        {"aggregate_csv", cfg.name + "_qbaseline_aggregate.csv"},
        {"final_test_accuracy_mean", final_test_mean(qb)}};
    summary["classical_baseline"] = {
        {"aggregate_csv", cfg.name + "_cbaseline_aggregate.csv"},
        {"final_test_accuracy_mean", final_test_mean(cb)}};
  }
  summary["config"] = json::parse(cfg.to_json_string());

  const std::filesystem::path summary_path =
      out_dir / (cfg.name + "_summary.json");
  std::ofstream out(summary_path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write summary: " + summary_path.string());
  }
  out << summary.dump(2) << '\n';
  return summary_path;
}

namespace {

struct Series {
  std::string label;
  std::vector<double> mean;
  std::vector<double> std_dev;
};

struct AggregateCurves {
  Series train;
  Series test;
};

AggregateCurves read_aggregate_csv(const std::filesystem::path& path,
                                   const std::string& label) {
  std::ifstream in(path);
  if (!in) {
    throw NotFoundError("aggregate CSV missing: " + path.string());
  }
  AggregateCurves curves;
  curves.train.label = label;
  curves.test.label = label;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::vector<double> cols;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) {
      cols.push_back(std::stod(item));
    }
    if (cols.size() != 7) {
      throw FormatError("aggregate CSV row with " + std::to_string(cols.size()) +
                        " columns in " + path.string());
    }
    curves.train.mean.push_back(cols[3]);
    curves.train.std_dev.push_back(cols[4]);
    curves.test.mean.push_back(cols[5]);
    curves.test.std_dev.push_back(cols[6]);
  }
  return curves;
}

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

void write_svg_chart(const std::filesystem::path& path, const std::string& title,
                     const std::vector<Series>& series) {
  if (series.empty()) {
    throw UsageError("empty series list for chart " + path.string());
  }
  const double width = 760.0;
  const double height = 480.0;
  const double left = 64.0;
  const double right = 24.0;
  const double top = 46.0;
  const double bottom = 56.0;
  const double plot_w = width - left - right;
  const double plot_h = height - top - bottom;
  std::size_t rounds = 0;
  for (const Series& s : series) {
    rounds = std::max(rounds, s.mean.size());
  }
  if (rounds == 0) {
    throw UsageError("chart series have no points: " + path.string());
  }
  auto x_of = [&](std::size_t round_idx) {
    if (rounds == 1) {
      return left + plot_w / 2.0;
    }
    return left + plot_w * static_cast<double>(round_idx) /
                      static_cast<double>(rounds - 1);
  };
  auto y_of = [&](double v) {
    const double clamped = std::clamp(v, 0.0, 1.0);
    return top + plot_h * (1.0 - clamped);
  };

  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write chart: " + path.string());
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\" viewBox=\"0 0 " << width << ' ' << height
      << "\">\n";
  out << "<rect width=\"" << width << "\" height=\"" << height
      << "\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" "
         "font-family=\"sans-serif\" font-size=\"16\">"
      << title << "</text>\n";

  // gridlines and y ticks at 0, 0.2, ..., 1
  for (int i = 0; i <= 5; ++i) {
    const double v = static_cast<double>(i) / 5.0;
    const double y = y_of(v);
    out << "<line x1=\"" << left << "\" y1=\"" << y << "\" x2=\"" << left + plot_w
        << "\" y2=\"" << y << "\" stroke=\"#dddddd\"/>\n";
    out << "<text x=\"" << left - 8 << "\" y=\"" << y + 4
        << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
        << fmt6(v).substr(0, 3) << "</text>\n";
  }
  // x ticks: up to 6 round markers
  const std::size_t tick_step = std::max<std::size_t>(1, (rounds + 5) / 6);
  for (std::size_t r = 0; r < rounds; r += tick_step) {
    const double x = x_of(r);
    out << "<line x1=\"" << x << "\" y1=\"" << top + plot_h << "\" x2=\"" << x
        << "\" y2=\"" << top + plot_h + 5 << "\" stroke=\"#333333\"/>\n";
    out << "<text x=\"" << x << "\" y=\"" << top + plot_h + 20
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
        << (r + 1) << "</text>\n";
  }
  out << "<text x=\"" << left + plot_w / 2 << "\" y=\"" << height - 14
      << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">"
      << "round</text>\n";
  out << "<text transform=\"translate(18," << top + plot_h / 2
      << ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">accuracy</text>\n";
  out << "<rect x=\"" << left << "\" y=\"" << top << "\" width=\"" << plot_w
      << "\" height=\"" << plot_h << "\" fill=\"none\" stroke=\"#333333\"/>\n";

  for (std::size_t s = 0; s < series.size(); ++s) {
    const Series& ser = series[s];
    const char* color = kPalette[s % (sizeof(kPalette) / sizeof(kPalette[0]))];
    // std band
    bool has_band = false;
    for (double sd : ser.std_dev) {
      has_band = has_band || sd > 0.0;
    }
    if (has_band && ser.mean.size() > 1) {
      out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" "
          << "stroke=\"none\" points=\"";
      for (std::size_t r = 0; r < ser.mean.size(); ++r) {
        out << x_of(r) << ',' << y_of(ser.mean[r] + ser.std_dev[r]) << ' ';
      }
      for (std::size_t r = ser.mean.size(); r-- > 0;) {
        out << x_of(r) << ',' << y_of(ser.mean[r] - ser.std_dev[r]) << ' ';
      }
      out << "\"/>\n";
    }
    out << "<polyline fill=\"none\" stroke=\"" << color
        << "\" stroke-width=\"1.8\" points=\"";
    for (std::size_t r = 0; r < ser.mean.size(); ++r) {
      out << x_of(r) << ',' << y_of(ser.mean[r]) << ' ';
    }
    out << "\"/>\n";
    // legend entry
    const double ly = top + 16.0 + 16.0 * static_cast<double>(s);
    out << "<line x1=\"" << left + 10 << "\" y1=\"" << ly << "\" x2=\""
        << left + 34 << "\" y2=\"" << ly << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n";
    out << "<text x=\"" << left + 40 << "\" y=\"" << ly + 4
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << ser.label
        << "</text>\n";
  }
  out << "</svg>\n";
  if (!out) {
    throw IoError("short write: " + path.string());
  }
}

}  // namespace

std::vector<std::filesystem::path> emit_plots(const std::filesystem::path& out_dir) {
  if (!std::filesystem::is_directory(out_dir)) {
    throw UsageError("emit_plots: not a directory: " + out_dir.string());
  }
  std::vector<std::filesystem::path> summaries;
  for (const auto& entry : std::filesystem::directory_iterator(out_dir)) {
    if (entry.is_regular_file() &&
        entry.path().filename().string().ends_with("_summary.json")) {
      summaries.push_back(entry.path());
    }
  }
  std::sort(summaries.begin(), summaries.end());
  if (summaries.empty()) {
    throw UsageError("emit_plots: no run summaries in " + out_dir.string());
  }

  // (experiment, topology) -> series
  std::map<std::pair<std::string, std::string>,
           std::pair<std::vector<Series>, std::vector<Series>>>
      groups;
  for (const std::filesystem::path& summary_path : summaries) {
    std::ifstream in(summary_path);
    json summary = json::parse(in, nullptr, true);
    const std::string name = summary.at("name").get<std::string>();
    const auto key = std::make_pair(summary.at("experiment").get<std::string>(),
                                    summary.at("topology").get<std::string>());
    auto& [train_series, test_series] = groups[key];
    const AggregateCurves qfl = read_aggregate_csv(
        out_dir / summary.at("qfl").at("aggregate_csv").get<std::string>(),
        name + " (QFL)");
    train_series.push_back(qfl.train);
    test_series.push_back(qfl.test);
    for (const char* kind : {"quantum_baseline", "classical_baseline"}) {
      if (summary.contains(kind)) {
        const std::string label =
            name + (kind[0] == 'q' ? " (quantum baseline)" : " (classical baseline)");
        const AggregateCurves curves = read_aggregate_csv(
            out_dir / summary.at(kind).at("aggregate_csv").get<std::string>(),
            label);
        train_series.push_back(curves.train);
        test_series.push_back(curves.test);
      }
    }
  }

  std::vector<std::filesystem::path> outputs;
  for (const auto& [key, series_pair] : groups) {
    const auto& [experiment, topology] = key;
    const std::string base = "plot_" + experiment + "_" + topology;
    const std::filesystem::path train_path = out_dir / (base + "_train.svg");
    write_svg_chart(train_path,
                    experiment + " / " + topology + " training accuracy",
                    series_pair.first);
    outputs.push_back(train_path);
    const std::filesystem::path test_path = out_dir / (base + "_test.svg");
    write_svg_chart(test_path, experiment + " / " + topology + " test accuracy",
                    series_pair.second);
    outputs.push_back(test_path);
  }
  return outputs;
}

bool datasets_check(const std::filesystem::path& data_dir, std::ostream& out) {
  bool all_ok = true;
  out << "moons: generated on demand, no files required\n";

  const std::filesystem::path fashion = data_dir / "fashion_mnist";
  const char* idx_files[] = {"train-images-idx3-ubyte", "train-labels-idx1-ubyte",
                             "t10k-images-idx3-ubyte", "t10k-labels-idx1-ubyte"};
  for (const char* file : idx_files) {
    const std::filesystem::path path = fashion / file;
    try {
      const data::U8Tensor tensor = data::load_idx(path);
      out << "fashion_mnist/" << file << ": OK (";
      for (std::size_t d = 0; d < tensor.shape.size(); ++d) {
        out << (d > 0 ? " x " : "") << tensor.shape[d];
      }
      out << ")\n";
    } catch (const Error& e) {
      out << "fashion_mnist/" << file << ": " << e.what() << "\n";
      all_ok = false;
    }
  }

  const std::filesystem::path pneumonia = data_dir / "pneumoniamnist.npz";
  try {
    const data::NpyArray train = data::load_npz_array(pneumonia, "train_images");
    const data::NpyArray test = data::load_npz_array(pneumonia, "test_images");
    out << "pneumoniamnist.npz: OK (train " << train.shape[0] << ", test "
        << test.shape[0] << ")\n";
  } catch (const Error& e) {
    out << "pneumoniamnist.npz: " << e.what() << "\n";
    all_ok = false;
  }
  return all_ok;
}

}  // namespace qfl::harness
