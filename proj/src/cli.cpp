#include "ctbayes/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "ctbayes/bnua.hpp"
#include "ctbayes/rng.hpp"

namespace ctbayes::cli {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path timestamped_dir(const fs::path& root, const std::string& prefix) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  localtime_r(&now, &tm);
  std::ostringstream name;
  name << prefix << '-' << std::put_time(&tm, "%Y%m%d-%H%M%S");
  fs::path dir = root / name.str();
  for (int k = 1; fs::exists(dir); ++k) dir = root / (name.str() + "-" + std::to_string(k));
  return dir;
}

Manifest gen_data(const ExperimentConfig& cfg, std::ostream& out) {
  const Manifest m = build_dataset(cfg.data, cfg.data_dir);
  out << "dataset written to " << cfg.data_dir << " (" << m.config.slice_size << "x" << m.config.slice_size
      << ", seed " << m.config.seed << ")\n";
  for (const auto& [domain, splits] : m.slices) {
    const char* role = domain == m.config.source_domain ? "source" : "target";
    out << "  " << domain << " [" << role << "]:";
    for (const auto& split : kSplits) out << ' ' << split << '=' << m.count(domain, split);
    out << '\n';
  }
  return m;
}

// ---------------------------------------------------------------------------
// eval

EvalOutputs evaluate_checkpoint(const fs::path& checkpoint, const fs::path& data_dir, const std::string& domain,
                                const std::string& split, int64_t mc_samples, uint64_t seed) {
  LoadedModel model = load_model(checkpoint);
  const DatasetView data(data_dir);
  const auto slices = data.paired(domain, split);
  EvalOutputs out;
  out.evaluation = evaluate_slices(model.net, model.perceptual, slices, mc_samples, seed, true);
  const auto& e = out.evaluation;
  if (!e.flat_residuals.empty()) {
    out.residual_w1 = rda::wasserstein_1d({e.flat_residuals.begin(), e.flat_residuals.end()},
                                          {e.flat_noise.begin(), e.flat_noise.end()});
  }
  return out;
}

void write_eval_outputs(const EvalOutputs& eval, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  eval.evaluation.report.write_csv(out_dir / "metrics.csv");
  json summary = eval.evaluation.report.summary();
  summary["residual_w1"] = eval.residual_w1;
  std::ofstream(out_dir / "summary.json") << summary.dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// ablate

std::array<AblationSetting, 5> ablation_lattice(const ExperimentConfig& base) {
  return {{{"deterministic", true, 0.0, 0.0},
           {"bayesian", false, 0.0, 0.0},
           {"bnua", false, base.beta1, 0.0},
           {"rda", false, 0.0, base.beta2},
           {"full", false, base.beta1, base.beta2}}};
}

ExperimentConfig apply_setting(const ExperimentConfig& base, const AblationSetting& s) {
  ExperimentConfig cfg = base;
  cfg.freeze_sigma = s.freeze_sigma;
  cfg.beta1 = s.beta1;
  cfg.beta2 = s.beta2;
  return cfg;
}

std::vector<AblationRow> run_ablation(const ExperimentConfig& base, const std::vector<uint64_t>& seeds,
                                      const fs::path& out_dir, bool verbose) {
  const DatasetView data(base.data_dir);
  std::vector<AblationRow> rows;
  for (uint64_t seed : seeds) {
    for (const auto& setting : ablation_lattice(base)) {
      ExperimentConfig cfg = apply_setting(base, setting);
      cfg.seed = seed;
      cfg.run_dir = (out_dir / ("seed_" + std::to_string(seed)) / setting.name).string();
      if (verbose) std::cout << "== seed " << seed << " setting " << setting.name << std::endl;
      const auto started = std::chrono::steady_clock::now();
      FitOptions opts;
      opts.verbose = verbose;
      const FitResult fit_result = fit(cfg, opts);

      AblationRow row;
      row.setting = setting.name;
      row.seed = seed;
      row.best_epoch = fit_result.best_epoch;
      const EvalOutputs test = evaluate_checkpoint(fit_result.best_checkpoint, cfg.data_dir, data.target(), "test",
                                                   cfg.mc_samples, seed);
      write_eval_outputs(test, fs::path(cfg.run_dir) / "eval_test");
      const auto& rep = test.evaluation.report;
      row.psnr = rep.aggregate(&metrics::MetricValues::psnr).mean;
      row.ssim = rep.aggregate(&metrics::MetricValues::ssim).mean;
      row.gmsd = rep.aggregate(&metrics::MetricValues::gmsd).mean;
      row.dss = rep.aggregate(&metrics::MetricValues::dss).mean;
      row.residual_w1 = test.residual_w1;

      LoadedModel model = load_model(fit_result.best_checkpoint);
      const uint64_t val_seed = derive_seed(seed, {hash_tag("validation")});
      const auto src = slice_covariances(model.net, [&] {
        std::vector<Image> v;
        for (auto& s : data.paired(data.source(), "val")) v.push_back(s.ldct);
        return v;
      }(), cfg.val_mc_samples, val_seed);
      const auto tgt = slice_covariances(model.net, data.ldct_only(data.target(), "val"), cfg.val_mc_samples,
                                         val_seed);
      row.val_bnua_disc = bnua::bnua_loss(src, tgt).item<double>();
      row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
      rows.push_back(row);
      if (verbose) {
        std::cout << "   psnr " << row.psnr << " ssim " << row.ssim << " disc " << row.val_bnua_disc << " w1 "
                  << row.residual_w1 << std::endl;
      }
    }
  }
  return rows;
}

void write_ablation_table(const std::vector<AblationRow>& rows, const fs::path& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os.precision(10);
  os << "setting,seed,best_epoch,psnr,ssim,gmsd,dss,val_bnua_disc,residual_w1\n";
  std::vector<std::string> order;
  std::map<std::string, std::vector<const AblationRow*>> by_setting;
  for (const auto& r : rows) {
    os << r.setting << ',' << r.seed << ',' << r.best_epoch << ',' << r.psnr << ',' << r.ssim << ',' << r.gmsd
       << ',' << r.dss << ',' << r.val_bnua_disc << ',' << r.residual_w1 << '\n';
    if (!by_setting.count(r.setting)) order.push_back(r.setting);
    by_setting[r.setting].push_back(&r);
  }
  for (const auto& name : order) {
    const auto& group = by_setting[name];
    auto mean = [&](double AblationRow::*f) {
      double s = 0.0;
      for (const auto* r : group) s += r->*f;
      return s / static_cast<double>(group.size());
    };
    os << name << ",mean,," << mean(&AblationRow::psnr) << ',' << mean(&AblationRow::ssim) << ','
       << mean(&AblationRow::gmsd) << ',' << mean(&AblationRow::dss) << ',' << mean(&AblationRow::val_bnua_disc)
       << ',' << mean(&AblationRow::residual_w1) << '\n';
  }
}

// ---------------------------------------------------------------------------
// report

namespace {

struct Series {
  std::string label;
  std::vector<double> x, y;
};

// Minimal static SVG chart: axes, min/max tick labels, one polyline or marker
// set per series.
void write_svg(const fs::path& path, const std::string& title, const std::string& xlabel, const std::string& ylabel,
               const std::vector<Series>& series, bool markers_only) {
  static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};
  constexpr double W = 640, H = 420, L = 70, R = 160, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series) {
    for (double v : s.x) x0 = std::min(x0, v), x1 = std::max(x1, v);
    for (double v : s.y)
      if (std::isfinite(v)) y0 = std::min(y0, v), y1 = std::max(y1, v);
  }
  if (!std::isfinite(x0)) x0 = 0, x1 = 1;
  if (!std::isfinite(y0)) y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1;
  auto px = [&](double v) { return L + (v - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (v - y0) / (y1 - y0) * (H - T - B); };

  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write " + path.string());
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\" font-family=\"sans-serif\" font-size=\"12\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << title << "</text>\n";
  os << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
     << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\">" << x0 << "</text>\n<text x=\"" << W - R << "\" y=\""
     << H - B + 16 << "\" text-anchor=\"end\">" << x1 << "</text>\n";
  os << "<text x=\"" << L - 4 << "\" y=\"" << H - B << "\" text-anchor=\"end\">" << y0 << "</text>\n<text x=\""
     << L - 4 << "\" y=\"" << T + 10 << "\" text-anchor=\"end\">" << y1 << "</text>\n";
  os << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << xlabel
     << "</text>\n<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
     << ")\" text-anchor=\"middle\">" << ylabel << "</text>\n";
  for (size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* color = kColors[k % 6];
    if (markers_only) {
      for (size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.y[i]))
          os << "<circle cx=\"" << px(s.x[i]) << "\" cy=\"" << py(s.y[i]) << "\" r=\"3\" fill=\"" << color
             << "\"/>\n";
    } else {
      os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
      for (size_t i = 0; i < s.x.size(); ++i)
        if (std::isfinite(s.y[i])) os << px(s.x[i]) << ',' << py(s.y[i]) << ' ';
      os << "\"/>\n";
    }
    os << "<text x=\"" << W - R + 10 << "\" y=\"" << T + 16 * (k + 1) << "\" fill=\"" << color << "\">" << s.label
       << "</text>\n";
  }
  os << "</svg>\n";
}

std::string run_name(const fs::path& dir) {
  const auto name = dir.filename().string();
  return name.empty() ? dir.parent_path().filename().string() : name;
}

struct HistogramRow {
  std::string domain, kind;
  double lo, hi, density;
};

std::vector<HistogramRow> read_histogram(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(is, line);
  if (line != "domain,kind,bin,lo,hi,density") throw std::runtime_error(path.string() + ": row 1: unexpected header");
  std::vector<HistogramRow> rows;
  int64_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    try {
      if (cells.size() != 6) throw std::invalid_argument("field count");
      rows.push_back({cells[0], cells[1], std::stod(cells[3]), std::stod(cells[4]), std::stod(cells[5])});
    } catch (const std::exception&) {
      throw std::runtime_error(path.string() + ": row " + std::to_string(line_no) + ": malformed histogram row");
    }
  }
  return rows;
}

}  // namespace

ReportOutputs make_report(const std::vector<fs::path>& run_dirs, const fs::path& out_dir) {
  if (run_dirs.empty()) throw std::invalid_argument("report: no run directories given");
  // Parse everything first so a malformed log leaves no partial report.
  std::vector<std::vector<EpochLogRow>> logs;
  for (const auto& dir : run_dirs) logs.push_back(read_epoch_log(dir / "epoch_log.csv"));

  fs::create_directories(out_dir);
  ReportOutputs out;
  out.scatter_csv = out_dir / "discrepancy_scatter.csv";
  std::ofstream scatter(out.scatter_csv);
  scatter.precision(12);
  scatter << "run,epoch,val_bnua_disc,val_psnr,val_ssim,val_gmsd,val_dss\n";
  std::vector<Series> scatter_series;

  for (size_t r = 0; r < run_dirs.size(); ++r) {
    const std::string name = run_name(run_dirs[r]);
    const auto& log = logs[r];

    const fs::path curves = out_dir / (name + "_loss_curves.csv");
    std::ofstream cs(curves);
    cs.precision(12);
    for (size_t i = 0; i < kLossComponentNames.size(); ++i) cs << (i ? "," : "") << kLossComponentNames[i];
    cs << '\n';
    std::vector<Series> loss_series;
    for (const char* c : kLossComponentNames) loss_series.push_back({c, {}, {}});
    Series sc{name, {}, {}};
    for (const auto& row : log) {
      for (size_t i = 0; i < row.losses.size(); ++i) {
        cs << (i ? "," : "") << row.losses[i];
        loss_series[i].x.push_back(static_cast<double>(row.epoch));
        // Log scale keeps terms of very different magnitude readable.
        loss_series[i].y.push_back(row.losses[i] > 0 ? std::log10(row.losses[i]) : NAN);
      }
      cs << '\n';
      scatter << name << ',' << row.epoch << ',' << row.val_bnua_disc << ',' << row.val_psnr << ',' << row.val_ssim
              << ',' << row.val_gmsd << ',' << row.val_dss << '\n';
      sc.x.push_back(row.val_bnua_disc);
      sc.y.push_back(row.val_psnr);
    }
    out.loss_curve_csvs.push_back(curves);
    scatter_series.push_back(sc);
    const fs::path curve_plot = out_dir / (name + "_loss_curves.svg");
    write_svg(curve_plot, name + " training losses", "epoch", "log10 loss", loss_series, false);
    out.plots.push_back(curve_plot);

    // Residual PDFs of the most recent epoch with histograms.
    fs::path latest;
    if (fs::exists(run_dirs[r] / "histograms")) {
      for (const auto& entry : fs::directory_iterator(run_dirs[r] / "histograms"))
        if (entry.path().extension() == ".csv" && entry.path() > latest) latest = entry.path();
    }
    if (latest.empty()) continue;
    const auto hist = read_histogram(latest);
    const fs::path pdf_csv = out_dir / (name + "_residual_pdf.csv");
    std::ofstream ps(pdf_csv);
    ps.precision(12);
    ps << "domain,kind,center,density\n";
    std::map<std::string, Series> pdf_series;
    std::vector<std::string> pdf_order;
    for (const auto& h : hist) {
      const double center = 0.5 * (h.lo + h.hi);
      ps << h.domain << ',' << h.kind << ',' << center << ',' << h.density << '\n';
      const std::string key = h.domain + " " + h.kind;
      if (!pdf_series.count(key)) pdf_order.push_back(key);
      auto& s = pdf_series[key];
      s.label = key;
      s.x.push_back(center);
      s.y.push_back(h.density);
    }
    out.residual_pdf_csvs.push_back(pdf_csv);
    std::vector<Series> ordered;
    for (const auto& k : pdf_order) ordered.push_back(pdf_series[k]);
    const fs::path pdf_plot = out_dir / (name + "_residual_pdf.svg");
    write_svg(pdf_plot, name + " flat-region residual PDFs (" + latest.stem().string() + ")", "residual",
              "density", ordered, false);
    out.plots.push_back(pdf_plot);
  }
  const fs::path scatter_plot = out_dir / "discrepancy_scatter.svg";
  write_svg(scatter_plot, "uncertainty discrepancy vs target PSNR", "validation uncertainty discrepancy",
            "target PSNR (dB)", scatter_series, true);
  out.plots.push_back(scatter_plot);
  return out;
}

// ---------------------------------------------------------------------------
// Argument parsing

namespace {

struct Overrides {
  std::string config_path;
  std::string profile;
  std::optional<uint64_t> seed;
  std::optional<int64_t> epochs, mc_samples, batch_size;
  std::optional<double> beta1, beta2, lr;
  bool freeze_sigma = false;
  std::string data_dir;
};

void add_config_options(CLI::App* cmd, Overrides& o, bool training_flags) {
  cmd->add_option("-c,--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
  cmd->add_option("--profile", o.profile, "preset layered over the config: paper or smoke");
  cmd->add_option("--seed", o.seed, "random seed");
  cmd->add_option("--data-dir", o.data_dir, "dataset directory");
  if (!training_flags) return;
  cmd->add_option("--epochs", o.epochs, "training epochs");
  cmd->add_option("--beta1", o.beta1, "uncertainty-alignment weight");
  cmd->add_option("--beta2", o.beta2, "adversarial residual weight");
  cmd->add_option("--mc-samples", o.mc_samples, "Monte Carlo samples per forward");
  cmd->add_option("--batch-size", o.batch_size, "patches per domain per step");
  cmd->add_option("--lr", o.lr, "learning rate");
  cmd->add_flag("--freeze-sigma", o.freeze_sigma, "pin posterior sigmas at zero (deterministic network)");
}

// Precedence: defaults < config file < profile < explicit flags.
ExperimentConfig merged_config(const Overrides& o, bool data_seed) {
  ExperimentConfig cfg = o.config_path.empty() ? ExperimentConfig{} : load_config(o.config_path);
  if (!o.profile.empty()) apply_profile(cfg, o.profile);
  if (o.seed) (data_seed ? cfg.data.seed : cfg.seed) = *o.seed;
  if (o.epochs) cfg.epochs = *o.epochs;
  if (o.beta1) cfg.beta1 = *o.beta1;
  if (o.beta2) cfg.beta2 = *o.beta2;
  if (o.mc_samples) cfg.mc_samples = *o.mc_samples;
  if (o.batch_size) cfg.batch_size = *o.batch_size;
  if (o.lr) cfg.learning_rate = *o.lr;
  if (o.freeze_sigma) cfg.freeze_sigma = true;
  if (!o.data_dir.empty()) cfg.data_dir = o.data_dir;
  cfg.validate();
  return cfg;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bayesian domain-adaptive low-dose CT denoising"};
  app.require_subcommand(1);

  Overrides gen_o, train_o, eval_o, ablate_o;
  std::string out_root = "runs", run_dir, resume, checkpoint, split = "test", domain, ablate_out;
  std::vector<uint64_t> seeds = {0, 1, 2};
  std::vector<std::string> report_runs;
  std::string report_out;
  std::optional<int64_t> eval_mc;
  bool quiet = false;

  auto* gen = app.add_subcommand("gen-data", "synthesize the two-domain dataset");
  add_config_options(gen, gen_o, false);

  auto* train = app.add_subcommand("train", "pretrain, MOPED-initialize and train one model");
  add_config_options(train, train_o, true);
  train->add_option("--out-root", out_root, "parent of the timestamped run directory");
  train->add_option("--run-dir", run_dir, "exact run directory (overrides --out-root)");
  train->add_option("--resume", resume, "checkpoint to resume from")->check(CLI::ExistingFile);
  train->add_flag("-q,--quiet", quiet, "no per-epoch progress");

  auto* eval = app.add_subcommand("eval", "score a checkpoint on one domain/split");
  add_config_options(eval, eval_o, false);
  eval->add_option("--checkpoint", checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  eval->add_option("--split", split, "train, val or test")->check(CLI::IsMember({"train", "val", "test"}));
  eval->add_option("--domain", domain, "domain name (default: target domain)");
  eval->add_option("--mc-samples", eval_mc, "Monte Carlo samples (default: checkpoint config)");
  eval->add_option("--out-root", out_root, "parent of the timestamped output directory");

  auto* ablate = app.add_subcommand("ablate", "train and evaluate the five-setting component lattice");
  add_config_options(ablate, ablate_o, true);
  ablate->add_option("--seeds", seeds, "seeds to repeat the lattice with")->expected(1, -1);
  ablate->add_option("--out-root", out_root, "parent of the timestamped output directory");
  ablate->add_flag("-q,--quiet", quiet, "no per-epoch progress");

  auto* report = app.add_subcommand("report", "loss curves, residual PDFs and discrepancy scatter");
  report->add_option("runs", report_runs, "run directories")->required()->check(CLI::ExistingDirectory);
  report->add_option("--out", report_out, "output directory (default: timestamped under --out-root)");
  report->add_option("--out-root", out_root, "parent of the timestamped output directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen) {
      const ExperimentConfig cfg = merged_config(gen_o, true);
      gen_data(cfg, out);
    } else if (*train) {
      ExperimentConfig cfg = merged_config(train_o, false);
      FitOptions opts;
      opts.verbose = !quiet;
      if (!resume.empty()) {
        opts.resume_from = resume;
        if (run_dir.empty()) run_dir = fs::path(resume).parent_path().parent_path().string();
      }
      cfg.run_dir = run_dir.empty() ? timestamped_dir(out_root, "train").string() : run_dir;
      out << "config:\n" << json(cfg).dump(2) << '\n';
      const FitResult r = fit(cfg, opts);
      out << "run directory: " << r.run_dir.string() << "\nbest epoch: " << r.best_epoch
          << "\nbest checkpoint: " << r.best_checkpoint.string() << '\n';
    } else if (*eval) {
      ExperimentConfig stored = read_checkpoint_config(checkpoint);
      if (!eval_o.config_path.empty() || !eval_o.profile.empty()) stored = merged_config(eval_o, false);
      if (eval_o.seed) stored.seed = *eval_o.seed;
      if (!eval_o.data_dir.empty()) stored.data_dir = eval_o.data_dir;
      const DatasetView data(stored.data_dir);
      const std::string dom = domain.empty() ? data.target() : domain;
      const int64_t m = eval_mc.value_or(stored.mc_samples);
      const EvalOutputs result = evaluate_checkpoint(checkpoint, stored.data_dir, dom, split, m, stored.seed);
      const fs::path dir = timestamped_dir(out_root, "eval");
      write_eval_outputs(result, dir);
      save_config(stored, (dir / "config.json").string());
      out << result.evaluation.report.summary().dump(2) << "\nresults in " << dir.string() << '\n';
    } else if (*ablate) {
      const ExperimentConfig cfg = merged_config(ablate_o, false);
      const fs::path dir = timestamped_dir(out_root, "ablate");
      fs::create_directories(dir);
      save_config(cfg, (dir / "config.json").string());
      const auto rows = run_ablation(cfg, seeds, dir, !quiet);
      write_ablation_table(rows, dir / "ablation.csv");
      out << "comparison table: " << (dir / "ablation.csv").string() << '\n';
    } else if (*report) {
      const fs::path dir = report_out.empty() ? timestamped_dir(out_root, "report") : fs::path(report_out);
      std::vector<fs::path> runs(report_runs.begin(), report_runs.end());
      const ReportOutputs r = make_report(runs, dir);
      out << "report written to " << dir.string() << " (" << r.plots.size() << " plots)\n";
    }
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace ctbayes::cli
