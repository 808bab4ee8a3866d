#include "cvqss/experiment.hpp"

#include "cvqss/dense_coding.hpp"
#include "cvqss/metrics.hpp"
#include "cvqss/ops.hpp"
#include "cvqss/security.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace cvqss {

namespace {

using nlohmann::json;

std::string format_number(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", value);
  return buf;
}

struct Row {
  std::vector<double> values;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<Row> rows;
  std::vector<std::string> summary;  // '#'-prefixed trailer lines
  // optional leading string column (scheme labels)
  std::vector<std::string> labels;
  std::string label_column;
};

std::string render_csv(const Table& table) {
  std::ostringstream out;
  if (!table.label_column.empty()) {
    out << table.label_column << ',';
  }
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out << table.columns[c] << (c + 1 < table.columns.size() ? "," : "\n");
  }
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (!table.label_column.empty()) {
      out << table.labels[r] << ',';
    }
    const auto& vals = table.rows[r].values;
    for (std::size_t c = 0; c < vals.size(); ++c) {
      out << format_number(vals[c]) << (c + 1 < vals.size() ? "," : "\n");
    }
  }
  for (const auto& line : table.summary) {
    out << "# " << line << '\n';
  }
  return out.str();
}

std::string render_jsonl(const Table& table) {
  std::ostringstream out;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    out << '{';
    bool first = true;
    if (!table.label_column.empty()) {
      out << '"' << table.label_column << "\":\"" << table.labels[r] << '"';
      first = false;
    }
    const auto& vals = table.rows[r].values;
    for (std::size_t c = 0; c < vals.size(); ++c) {
      if (!first) out << ',';
      first = false;
      out << '"' << table.columns[c] << "\":";
      if (std::isfinite(vals[c])) {
        out << format_number(vals[c]);
      } else {
        out << "null";
      }
    }
    out << "}\n";
  }
  for (const auto& line : table.summary) {
    out << "{\"summary\":\"" << line << "\"}\n";
  }
  return out.str();
}

void parallel_for(int n, int threads, const std::function<void(int)>& body) {
  if (threads <= 0) {
    threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
  }
  threads = std::min(threads, n > 0 ? n : 1);
  if (threads <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(threads);
  std::atomic<int> next{0};
  for (int t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) {
        body(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

/// Moment estimates of one mode from seeded quadrature samples: returns
/// (complex mean, symmetrized variance).
std::pair<Complex, double> sampled_moments(const GaussianState<double>& state, long samples,
                                           std::uint64_t seed) {
  const MatrixX<double> draws = sample_quadratures(state, samples, seed);
  const double mx = draws.col(0).mean();
  const double mp = draws.col(1).mean();
  const double vx = (draws.col(0).array() - mx).square().sum() / (samples - 1);
  const double vp = (draws.col(1).array() - mp).square().sum() / (samples - 1);
  return {Complex(mx, mp), (vx + vp) / 2.0};
}

Table run_fig2(const ExperimentConfig& cfg) {
  Table table;
  table.label_column = "scheme";
  table.columns = {"S_db", "F_collab", "F_adv", "MI_collab", "MI_adv", "negativity", "purity"};
  const std::array<Scheme, 2> schemes = {Scheme::P12, Scheme::P23};
  const int n = static_cast<int>(cfg.s_list.size()) * 2;
  table.rows.resize(n);
  table.labels.resize(n);
  parallel_for(n, cfg.threads, [&](int idx) {
    const Scheme scheme = schemes[idx / cfg.s_list.size()];
    const double s_db = cfg.s_list[idx % cfg.s_list.size()];
    ProtocolParams params;
    params.squeezing_db = s_db;
    params.gain_db = cfg.g_db;
    params.secret_alpha = Complex(std::sqrt(cfg.alpha_sq), 0.0);
    params.scheme = scheme;
    ProtocolTranscript t = run_protocol(params, cfg.device, cfg.sigma_sq);
    double f_collab = t.f_collab;
    double f_adv = t.f_adv;
    double mi_collab = t.mi_collab;
    double mi_adv = t.mi_adv;
    if (cfg.samples > 0) {
      // finite-averaging emulation: recompute the figure of merit from
      // sampled first and second moments
      const std::uint64_t row_seed = cfg.seed * 1000003ULL + static_cast<std::uint64_t>(idx);
      const auto [out_amp, out_var] =
          sampled_moments(t.reconstruction.output, cfg.samples, row_seed);
      const auto [adv_amp, adv_var] =
          sampled_moments(t.adversary_state, cfg.samples, row_seed ^ 0x9e3779b97f4a7c15ULL);
      const double k_est = std::norm(out_amp) / cfg.alpha_sq;
      f_collab = fidelity_gain_noise(cfg.alpha_sq, k_est, out_var);
      f_adv = fidelity_gain_noise(cfg.alpha_sq, std::norm(adv_amp) / cfg.alpha_sq, adv_var);
      mi_collab =
          mutual_information(cfg.sigma_sq, effective_noise(params.secret_alpha,
                                                           t.shares.input_variance, out_amp,
                                                           out_var));
      mi_adv = std::abs(adv_amp) > 1e-9
                   ? mutual_information(cfg.sigma_sq,
                                        effective_noise(params.secret_alpha,
                                                        t.shares.input_variance, adv_amp, adv_var))
                   : 0.0;
    }
    table.labels[idx] = scheme_name(scheme);
    table.rows[idx].values = {s_db,    f_collab, f_adv,           mi_collab,
                              mi_adv,  t.resource_negativity,     t.resource_purity};
  });
  return table;
}

Table run_fig3(const ExperimentConfig& cfg) {
  Table table;
  table.columns = {"sigma_sq", "F_avg", "F_nc", "delta"};
  ProtocolParams params;
  params.squeezing_db = cfg.s_db;
  params.gain_db = cfg.g_db;
  params.secret_alpha = Complex(std::sqrt(std::max(cfg.alpha_sq, 1e-6)), 0.0);
  params.scheme = Scheme::P23;
  const ProtocolTranscript t = run_protocol(params, cfg.device, cfg.sigma_sq);
  const double k = t.reconstruction.sqrt_gain * t.reconstruction.sqrt_gain;
  const double v_out = t.reconstruction.v_out;

  const int n = cfg.sigma_range.n;
  table.rows.resize(n);
  for (int i = 0; i < n; ++i) {
    const double s = cfg.sigma_range.lo +
                     (cfg.sigma_range.hi - cfg.sigma_range.lo) * i / std::max(1, n - 1);
    const double fbar = codebook_average_fidelity(k, v_out, s);
    const double fnc = nc_threshold_gaussian(s);
    table.rows[i].values = {s, fbar, fnc, fbar - fnc};
  }
  const SecurityWindow window = security_window(
      [&](double s) { return codebook_average_fidelity(k, v_out, s); }, cfg.sigma_range.lo,
      cfg.sigma_range.hi);
  std::ostringstream summary;
  summary << "window secure=" << (window.secure ? 1 : 0);
  if (window.secure) {
    summary << " sigma_min=" << format_number(window.sigma_min)
            << " sigma_max=" << format_number(window.sigma_max)
            << " sigma_star=" << format_number(window.sigma_star)
            << " delta_star=" << format_number(window.delta_star);
  }
  summary << " k=" << format_number(k) << " v_out=" << format_number(v_out);
  table.summary.push_back(summary.str());
  return table;
}

Table run_fig4(const ExperimentConfig& cfg) {
  Table table;
  table.columns = {"S_db",          "sigma_st_sq", "sigma_cb_sq", "MI_baseline",
                   "MI_dense_ideal", "MI_dense_sim"};
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double baseline = mi_coherent_baseline(cfg.sigma_ens_sq);
  const int n = static_cast<int>(cfg.s_list.size());
  table.rows.resize(n);
  parallel_for(n, cfg.threads, [&](int i) {
    const double s_db = cfg.s_list[i];
    const auto ideal_budget =
        budget_from_squeezing(cfg.sigma_ens_sq, s_db, BudgetMode::Ideal, cfg.device);
    const auto device_budget =
        budget_from_squeezing(cfg.sigma_ens_sq, s_db, BudgetMode::Device, cfg.device);
    const auto sim =
        mi_dense_simulated(cfg.sigma_ens_sq, s_db, cfg.g_db, cfg.device, BudgetMode::Device);
    table.rows[i].values = {s_db,
                            device_budget ? device_budget->sigma_st_sq : nan,
                            device_budget ? device_budget->sigma_cb_sq : nan,
                            baseline,
                            ideal_budget ? mi_dense_ideal(*ideal_budget) : nan,
                            sim ? *sim : nan};
  });
  return table;
}

Table run_fig5(const ExperimentConfig& cfg) {
  Table table;
  table.columns = {"alpha_sq", "lambda", "F_bar", "F_coh", "delta_F"};
  // scenario fidelities depend on alpha only; parallelize across alpha
  const int na = cfg.grid.n_alpha;
  const int nl = cfg.grid.n_lambda;
  std::vector<std::array<double, 8>> fids(na);
  std::vector<double> alpha_sq(na);
  parallel_for(na, cfg.threads, [&](int i) {
    alpha_sq[i] = cfg.grid.alpha_sq_lo +
                  (cfg.grid.alpha_sq_hi - cfg.grid.alpha_sq_lo) * i / std::max(1, na - 1);
    fids[i] = scenario_fidelities(Complex(std::sqrt(alpha_sq[i]), 0.0), cfg.s_db, cfg.g_db,
                                  cfg.device);
  });
  table.rows.reserve(static_cast<std::size_t>(na) * nl);
  double best_delta = -2.0;
  double best_a = 0.0;
  double best_l = 0.0;
  for (int i = 0; i < na; ++i) {
    for (int j = 0; j < nl; ++j) {
      const double lambda = cfg.grid.lambda_lo +
                            (cfg.grid.lambda_hi - cfg.grid.lambda_lo) * j / std::max(1, nl - 1);
      const auto scen = scenario_table(lambda);
      double fbar = 0.0;
      for (std::size_t s = 0; s < scen.size(); ++s) {
        fbar += scen[s].probability * fids[i][s];
      }
      const double fcoh = coherent_baseline(Complex(std::sqrt(alpha_sq[i]), 0.0), lambda);
      table.rows.push_back({{alpha_sq[i], lambda, fbar, fcoh, fbar - fcoh}});
      if (fbar - fcoh > best_delta) {
        best_delta = fbar - fcoh;
        best_a = alpha_sq[i];
        best_l = lambda;
      }
    }
  }
  std::ostringstream summary;
  summary << "max delta_F=" << format_number(best_delta)
          << " alpha_sq=" << format_number(best_a) << " lambda=" << format_number(best_l);
  table.summary.push_back(summary.str());
  return table;
}

json parse_json_or_throw(const std::string& text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    throw std::runtime_error("config: malformed JSON document");
  }
  return doc;
}

bool preset_by_name(const std::string& name, DeviceModel& out) {
  if (name == "ideal") {
    out = DeviceModel::ideal();
  } else if (name == "calibrated") {
    out = DeviceModel::calibrated();
  } else if (name == "thermal_input") {
    out = DeviceModel::thermal_input();
  } else {
    return false;
  }
  return true;
}

void read_device(const json& doc, ExperimentConfig& cfg, ValidationReport* report) {
  if (!doc.contains("device")) {
    if (report) report->notes.push_back("device: section missing, ideal defaults applied");
    return;
  }
  const json& dev = doc.at("device");
  if (dev.contains("preset")) {
    cfg.device_preset = dev.at("preset").get<std::string>();
    if (!preset_by_name(cfg.device_preset, cfg.device) && report) {
      report->violations.push_back("device.preset: unknown preset '" + cfg.device_preset + "'");
    }
  }
  const auto field = [&](const char* key, double& slot) {
    if (dev.contains(key)) slot = dev.at(key).get<double>();
  };
  field("input_nbar", cfg.device.input_nbar);
  field("jpa_noise_coeff", cfg.device.jpa_noise_coeff);
  field("hybrid_phase_mismatch", cfg.device.hybrid_phase_mismatch);
  field("path_efficiency", cfg.device.path_efficiency);
  field("interferometer_imbalance", cfg.device.interferometer_imbalance);
  field("environment_nbar", cfg.device.environment_nbar);
}

void read_experiment(const json& doc, ExperimentConfig& cfg) {
  if (!doc.contains("experiment")) return;
  const json& exp = doc.at("experiment");
  if (exp.contains("name")) cfg.experiment = exp.at("name").get<std::string>();
  if (exp.contains("s_list")) cfg.s_list = exp.at("s_list").get<std::vector<double>>();
  if (exp.contains("s_db")) cfg.s_db = exp.at("s_db").get<double>();
  if (exp.contains("g_db")) cfg.g_db = exp.at("g_db").get<double>();
  if (exp.contains("alpha_sq")) cfg.alpha_sq = exp.at("alpha_sq").get<double>();
  if (exp.contains("sigma_sq")) cfg.sigma_sq = exp.at("sigma_sq").get<double>();
  if (exp.contains("sigma_ens_sq")) cfg.sigma_ens_sq = exp.at("sigma_ens_sq").get<double>();
  if (exp.contains("samples")) cfg.samples = exp.at("samples").get<long>();
  if (exp.contains("sigma_range")) {
    const json& r = exp.at("sigma_range");
    if (r.contains("lo")) cfg.sigma_range.lo = r.at("lo").get<double>();
    if (r.contains("hi")) cfg.sigma_range.hi = r.at("hi").get<double>();
    if (r.contains("n")) cfg.sigma_range.n = r.at("n").get<int>();
  }
  if (exp.contains("alpha_grid")) {
    const json& g = exp.at("alpha_grid");
    if (g.contains("lo")) cfg.grid.alpha_sq_lo = g.at("lo").get<double>();
    if (g.contains("hi")) cfg.grid.alpha_sq_hi = g.at("hi").get<double>();
    if (g.contains("n")) cfg.grid.n_alpha = g.at("n").get<int>();
  }
  if (exp.contains("lambda_grid")) {
    const json& g = exp.at("lambda_grid");
    if (g.contains("lo")) cfg.grid.lambda_lo = g.at("lo").get<double>();
    if (g.contains("hi")) cfg.grid.lambda_hi = g.at("hi").get<double>();
    if (g.contains("n")) cfg.grid.n_lambda = g.at("n").get<int>();
  }
}

void read_rest(const json& doc, ExperimentConfig& cfg) {
  if (doc.contains("output")) {
    const json& out = doc.at("output");
    if (out.contains("dir")) cfg.output_dir = out.at("dir").get<std::string>();
    if (out.contains("format")) cfg.output_format = out.at("format").get<std::string>();
  }
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("threads")) cfg.threads = doc.at("threads").get<int>();
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  const json doc = parse_json_or_throw(json_text);
  ExperimentConfig cfg;
  read_device(doc, cfg, nullptr);
  read_experiment(doc, cfg);
  read_rest(doc, cfg);
  return cfg;
}

std::vector<std::pair<std::string, std::string>> list_experiments() {
  return {
      {"fig2-sweep", "fidelity and MI vs squeezing for the {1,2} and {2,3} schemes"},
      {"fig3-security", "codebook-averaged fidelity vs the no-cloning threshold and the"
                        " security window"},
      {"fig4-dense", "dense-coding MI vs squeezing under a fixed ensemble-variance budget"},
      {"fig5-erasure", "erasure-channel average fidelity, coherent baseline and advantage map"},
  };
}

ValidationReport validate_config(const std::string& json_text) {
  ValidationReport report;
  json doc;
  try {
    doc = parse_json_or_throw(json_text);
  } catch (const std::exception& e) {
    report.violations.push_back(std::string("document: ") + e.what());
    return report;
  }
  ExperimentConfig cfg;
  try {
    read_device(doc, cfg, &report);
    read_experiment(doc, cfg);
    read_rest(doc, cfg);
  } catch (const std::exception& e) {
    report.violations.push_back(std::string("config: ") + e.what());
    return report;
  }

  bool known = false;
  for (const auto& [name, desc] : list_experiments()) {
    (void)desc;
    known = known || name == cfg.experiment;
  }
  if (!known) {
    report.violations.push_back("experiment.name: unknown experiment '" + cfg.experiment + "'");
  }
  if (cfg.s_list.empty()) {
    report.violations.push_back("experiment.s_list: grid must be nonempty");
  }
  for (double s : cfg.s_list) {
    if (s < 0) {
      report.violations.push_back("experiment.s_list: squeezing levels must be >= 0 dB");
      break;
    }
  }
  if (cfg.s_db < 0) report.violations.push_back("experiment.s_db: must be >= 0 dB");
  if (cfg.g_db < 0) report.violations.push_back("experiment.g_db: must be >= 0 dB");
  if (cfg.alpha_sq < 0) report.violations.push_back("experiment.alpha_sq: must be >= 0");
  if (cfg.sigma_sq < 0) report.violations.push_back("experiment.sigma_sq: must be >= 0");
  if (cfg.sigma_ens_sq < 0) report.violations.push_back("experiment.sigma_ens_sq: must be >= 0");
  if (cfg.samples < 0) report.violations.push_back("experiment.samples: must be >= 0");
  if (cfg.sigma_range.n < 2) {
    report.violations.push_back("experiment.sigma_range.n: need at least 2 points");
  }
  if (cfg.sigma_range.lo < 0 || cfg.sigma_range.hi <= cfg.sigma_range.lo) {
    report.violations.push_back("experiment.sigma_range: need 0 <= lo < hi");
  }
  if (cfg.grid.n_alpha < 2 || cfg.grid.n_lambda < 2) {
    report.violations.push_back("experiment grids: need at least 2 points per axis");
  }
  if (cfg.grid.alpha_sq_lo < 0 || cfg.grid.alpha_sq_hi <= cfg.grid.alpha_sq_lo) {
    report.violations.push_back("experiment.alpha_grid: need 0 <= lo < hi");
  }
  if (cfg.grid.lambda_lo < 0 || cfg.grid.lambda_hi > 1 ||
      cfg.grid.lambda_hi <= cfg.grid.lambda_lo) {
    report.violations.push_back("experiment.lambda_grid: need 0 <= lo < hi <= 1");
  }
  if (cfg.output_format != "csv" && cfg.output_format != "jsonl") {
    report.violations.push_back("output.format: must be 'csv' or 'jsonl'");
  }
  if (cfg.threads < 0) report.violations.push_back("threads: must be >= 0");
  try {
    validate_device(cfg.device);
  } catch (const std::exception& e) {
    report.violations.push_back(std::string("device: ") + e.what());
  }
  return report;
}

std::string render_experiment(const ExperimentConfig& config) {
  Table table;
  if (config.experiment == "fig2-sweep") {
    table = run_fig2(config);
  } else if (config.experiment == "fig3-security") {
    table = run_fig3(config);
  } else if (config.experiment == "fig4-dense") {
    table = run_fig4(config);
  } else if (config.experiment == "fig5-erasure") {
    table = run_fig5(config);
  } else {
    throw std::invalid_argument("run: unknown experiment '" + config.experiment + "'");
  }
  return config.output_format == "jsonl" ? render_jsonl(table) : render_csv(table);
}

std::vector<std::string> run_experiment(const ExperimentConfig& config) {
  const std::string content = render_experiment(config);
  std::filesystem::create_directories(config.output_dir);
  const std::string ext = config.output_format == "jsonl" ? ".jsonl" : ".csv";
  const std::string path =
      (std::filesystem::path(config.output_dir) / (config.experiment + ext)).string();
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("run: cannot write output file " + path);
  }
  out << content;
  out.close();
  if (!out) {
    throw std::runtime_error("run: failed while writing " + path);
  }
  return {path};
}

}  // namespace cvqss
