#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rareq/demo.hpp"
#include "rareq/diagnostics.hpp"
#include "rareq/io.hpp"
#include "rareq/quantizer.hpp"
#include "rareq/weights.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumeric = 3;

rareq::SampleBatch load_batch(const std::string& data_path,
                              const std::string& weights_arg, bool header) {
  rareq::SampleBatch batch;
  batch.points = rareq::read_csv_matrix(data_path, header);
  if (weights_arg == "unit") {
    batch.weights = rareq::Vector::Ones(batch.points.rows());
  } else {
    batch.weights = rareq::read_csv_vector(weights_arg, header);
    if (batch.weights.size() != batch.points.rows()) {
      std::ostringstream os;
      os << "weights file has " << batch.weights.size() << " entries but data"
         << " has " << batch.points.rows() << " rows";
      throw rareq::input_error(os.str());
    }
  }
  batch.validate();
  return batch;
}

struct QuantizeArgs {
  std::string data;
  std::string weights = "unit";
  std::string out;
  rareq::LloydConfig lloyd;
  bool header = false;
};

int run_quantize(const QuantizeArgs& args) {
  const rareq::SampleBatch batch =
      load_batch(args.data, args.weights, args.header);
  const rareq::QuantizationResult result =
      rareq::find_prototypes(batch, args.lloyd);
  rareq::save_quantization(args.out, result);

  rareq::RunManifest manifest;
  manifest.command = "quantize";
  manifest.config = {{"cells", args.lloyd.nb_cells},
                     {"multistart", args.lloyd.multistart},
                     {"max_iter", args.lloyd.max_iter},
                     {"tol", args.lloyd.tol},
                     {"seed", args.lloyd.seed},
                     {"threads", args.lloyd.threads},
                     {"weights", args.weights},
                     {"header", args.header}};
  manifest.input_files = {args.data};
  if (args.weights != "unit") manifest.input_files.push_back(args.weights);
  manifest.output_files = {args.out};
  manifest.version = RAREQ_VERSION;
  manifest.created_utc = rareq::iso8601_utc_now();
  const fs::path out(args.out);
  rareq::save_manifest(out.parent_path() / (out.stem().string() +
                                            ".manifest.json"),
                       manifest);
  std::cout << "wrote " << args.out << " (distortion "
            << rareq::format_double(result.distortion) << ", converged "
            << (result.converged ? "yes" : "no") << ")\n";
  return kExitOk;
}

struct StdArgs {
  std::string data;
  std::string weights = "unit";
  std::string prototypes;
  std::string out;
  rareq::Index nv = 0;
  std::vector<rareq::Index> cells;
  int threads = 1;
  bool header = false;
};

int run_std(const StdArgs& args) {
  const rareq::SampleBatch batch =
      load_batch(args.data, args.weights, args.header);
  const rareq::QuantizationResult proto = rareq::load_quantization(
      args.prototypes);
  std::vector<rareq::Index> cells = args.cells;
  if (cells.empty()) {
    for (rareq::Index j = 0; j < proto.codebook.size(); ++j) {
      cells.push_back(j);
    }
  }
  const rareq::CentroidStdReport report = rareq::std_centroid(
      batch, {proto.codebook}, cells, args.nv, args.threads);
  rareq::save_std_report(args.out, report);
  std::cout << "wrote " << args.out << " (" << report.batches
            << " batches of " << report.nv << ")\n";
  return kExitOk;
}

struct DemoArgs {
  rareq::DemoConfig cfg;
  std::string out_dir = "demo_out";
};

int run_demo_cmd(const DemoArgs& args) {
  const rareq::DemoConfig& cfg = args.cfg;
  const rareq::DemoReport report = rareq::run_demo(cfg);

  const fs::path dir(args.out_dir);
  fs::create_directories(dir);

  const auto emit_path = [&](const rareq::DemoPath& path,
                             const std::string& tag) {
    rareq::save_quantization(dir / ("quantize_" + tag + ".json"), path.fit);
    rareq::CentroidStdReport std_report;
    std_report.nv = cfg.nv;
    std_report.batches = cfg.n_eval / cfg.nv;
    std_report.codebooks = {path.centroid_std};
    rareq::save_std_report(dir / ("std_" + tag + ".json"), std_report);
    rareq::write_scatter_csv(dir / ("scatter_" + tag + ".csv"),
                             path.fit_outputs, path.fit_weights,
                             path.fit.assignment);
    rareq::write_prototypes_csv(dir / ("prototypes_" + tag + ".csv"),
                                path.fit.codebook, path.fit.masses);
    rareq::write_scatter_svg(dir / ("scatter_" + tag + ".svg"),
                             path.fit_outputs, path.fit_weights,
                             path.fit.assignment, path.fit.codebook);
  };
  emit_path(report.mc, "mc");
  emit_path(report.is, "is");

  rareq::Json masses;
  masses["mc"] = {{"normalized", std::vector<double>(
                                     report.mc.masses.normalized.data(),
                                     report.mc.masses.normalized.data() +
                                         report.mc.masses.normalized.size())},
                  {"unnormalized",
                   std::vector<double>(
                       report.mc.masses.unnormalized.data(),
                       report.mc.masses.unnormalized.data() +
                           report.mc.masses.unnormalized.size())}};
  masses["is"] = {{"normalized", std::vector<double>(
                                     report.is.masses.normalized.data(),
                                     report.is.masses.normalized.data() +
                                         report.is.masses.normalized.size())},
                  {"unnormalized",
                   std::vector<double>(
                       report.is.masses.unnormalized.data(),
                       report.is.masses.unnormalized.data() +
                           report.is.masses.unnormalized.size())}};
  masses["mc_fit_nonzero"] = report.mc_fit_nonzero;
  masses["is_fit_nonzero_frac"] = report.is_fit_nonzero_frac;
  {
    std::ofstream out(dir / "masses.json", std::ios::binary);
    out << masses.dump(2) << '\n';
  }

  rareq::RunManifest manifest;
  manifest.command = "demo";
  manifest.config = {{"sigma1", cfg.sigma1},
                     {"sigma2", cfg.sigma2},
                     {"p_zero", cfg.p_zero},
                     {"alpha", report.alpha},
                     {"n_fit", cfg.n_fit},
                     {"n_eval", cfg.n_eval},
                     {"nb_cells", cfg.nb_cells},
                     {"multistart", cfg.multistart},
                     {"nv", cfg.nv},
                     {"seed", cfg.seed},
                     {"threads", cfg.threads}};
  manifest.output_files = {
      "quantize_mc.json", "std_mc.json",        "scatter_mc.csv",
      "prototypes_mc.csv", "scatter_mc.svg",    "quantize_is.json",
      "std_is.json",       "scatter_is.csv",    "prototypes_is.csv",
      "scatter_is.svg",    "masses.json"};
  manifest.version = RAREQ_VERSION;
  manifest.created_utc = rareq::iso8601_utc_now();
  rareq::save_manifest(dir / "manifest.json", manifest);

  std::cout << "alpha = " << rareq::format_double(report.alpha) << '\n'
            << "plain fit: " << report.mc_fit_nonzero << " of " << cfg.n_fit
            << " outputs away from the origin\n"
            << "IS fit: fraction "
            << rareq::format_double(report.is_fit_nonzero_frac)
            << " away from the origin\n"
            << "reports in " << dir.string() << '\n';
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rare-event quantization with importance-sampling weights"};
  app.require_subcommand(1);

  QuantizeArgs qa;
  CLI::App* quantize =
      app.add_subcommand("quantize", "Fit prototypes to weighted samples");
  quantize->add_option("--data", qa.data, "CSV of points, one per row")
      ->required();
  quantize->add_option("--weights", qa.weights,
                       "CSV of weights, or 'unit' for equal weights");
  quantize->add_option("--cells", qa.lloyd.nb_cells, "number of cells")
      ->required();
  quantize->add_option("--multistart", qa.lloyd.multistart,
                       "independent seeded starts");
  quantize->add_option("--max-iter", qa.lloyd.max_iter, "Lloyd iteration cap");
  quantize->add_option("--tol", qa.lloyd.tol,
                       "max prototype movement declaring convergence");
  quantize->add_option("--seed", qa.lloyd.seed, "RNG seed")
      ->envname("RAREQ_SEED");
  quantize->add_option("--threads", qa.lloyd.threads, "worker threads");
  quantize->add_flag("--header", qa.header, "CSV files carry a header row");
  quantize->add_option("--out", qa.out, "output JSON path")->required();

  StdArgs sa;
  CLI::App* std_cmd = app.add_subcommand(
      "std", "Batch-means standard deviations of centroid estimators");
  std_cmd->add_option("--data", sa.data, "CSV of points, one per row")
      ->required();
  std_cmd->add_option("--weights", sa.weights,
                      "CSV of weights, or 'unit' for equal weights");
  std_cmd->add_option("--prototypes", sa.prototypes,
                      "quantization JSON with the codebook")
      ->required();
  std_cmd->add_option("--nv", sa.nv, "points per batch")->required();
  std_cmd->add_option("--cells", sa.cells,
                      "cell indices to report (default: all)");
  std_cmd->add_option("--threads", sa.threads, "worker threads");
  std_cmd->add_flag("--header", sa.header, "CSV files carry a header row");
  std_cmd->add_option("--out", sa.out, "output JSON path")->required();

  DemoArgs da;
  CLI::App* demo = app.add_subcommand(
      "demo", "End-to-end rare-event comparison of plain and IS sampling");
  demo->add_option("--sigma1", da.cfg.sigma1, "std dev of input coordinate 1");
  demo->add_option("--sigma2", da.cfg.sigma2, "std dev of input coordinate 2");
  demo->add_option("--p-zero", da.cfg.p_zero,
                   "target probability of the zero output");
  demo->add_option("--n-fit", da.cfg.n_fit, "quantization budget");
  demo->add_option("--n-eval", da.cfg.n_eval, "evaluation sample size");
  demo->add_option("--cells", da.cfg.nb_cells, "number of cells");
  demo->add_option("--multistart", da.cfg.multistart,
                   "independent seeded starts");
  demo->add_option("--nv", da.cfg.nv, "diagnostic batch size");
  demo->add_option("--seed", da.cfg.seed, "RNG seed")->envname("RAREQ_SEED");
  demo->add_option("--threads", da.cfg.threads, "worker threads");
  demo->add_option("--out-dir", da.out_dir, "report directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInput;
  }

  try {
    if (quantize->parsed()) return run_quantize(qa);
    if (std_cmd->parsed()) return run_std(sa);
    return run_demo_cmd(da);
  } catch (const rareq::input_error& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitInput;
  } catch (const rareq::numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumeric;
  }
}
