#include "eagc/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "eagc/config.hpp"
#include "eagc/errors.hpp"
#include "eagc/matrix_io.hpp"
#include "eagc/report.hpp"

namespace eagc::cli {
namespace {

namespace fs = std::filesystem;

struct MetricsInputs {
  std::string g_ref, g, z_new, z_old, projector, class_norms, trace;
};

struct Parsed {
  std::string command;
  RunConfig cfg;
  MetricsInputs metrics;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw DataError("cannot create output directory '" + dir + "': " + ec.message());
}

std::string out_path(const RunConfig& cfg, const std::string& file) { return (fs::path(cfg.out_dir) / file).string(); }

Report make_report(const std::string& command, const RunConfig& cfg) {
  Report r;
  r.command = command;
  r.seed = cfg.seed;
  r.config = config_echo(cfg);
  return r;
}

void finish(Report& r, const Stopwatch& clock, const std::string& path, std::ostream& out) {
  r.wall_clock_seconds = clock.seconds();
  save_report(path, r);
  out << serialize(r);
}

int cmd_gen_data(const RunConfig& cfg, std::ostream& out) {
  Stopwatch clock;
  const DatasetSplit data = gen_synthetic(cfg.data);
  ensure_dir(cfg.out_dir);
  const std::string path = cfg.resolved_data_path();
  save_dataset(path, data);
  Report r = make_report("gen-data", cfg);
  r.summary = {{"path", path},
               {"labeled", data.labeled_count()},
               {"unlabeled", data.unlabeled_count()},
               {"num_known", data.num_known},
               {"num_total", data.num_total}};
  finish(r, clock, out_path(cfg, "gen-data.json"), out);
  return kExitOk;
}

int cmd_train_ref(const RunConfig& cfg, std::ostream& out) {
  Stopwatch clock;
  const DatasetSplit data = load_dataset(cfg.resolved_data_path());
  const RefResult ref = train_reference(data, cfg.ref);
  ensure_dir(cfg.out_dir);
  const std::string path = cfg.resolved_ref_model_path();
  save_model(path, ref.model);
  Report r = make_report("train-ref", cfg);
  r.summary = {{"path", path},
               {"final_loss", real_or_null(ref.final_loss)},
               {"train_accuracy", real_or_null(ref.train_accuracy)}};
  finish(r, clock, out_path(cfg, "train-ref.json"), out);
  return kExitOk;
}

int cmd_train(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  Stopwatch clock;
  const DatasetSplit data = load_dataset(cfg.resolved_data_path());
  const Model reference = load_model(cfg.resolved_ref_model_path());
  const TrainTrace trace = train_gcd(data, reference, cfg.train);
  ensure_dir(cfg.out_dir);
  save_trace_csv(out_path(cfg, cfg.run_name + ".csv"), trace);
  Report r = make_report("train", cfg);
  r.summary = trace_summary(trace, cfg.train.dense_steps);
  finish(r, clock, out_path(cfg, cfg.run_name + ".json"), out);
  if (trace.aborted) {
    err << "eagc: numerical abort after " << trace.steps << " steps: " << trace.abort_reason << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

int cmd_lemma1(const RunConfig& cfg, std::ostream& out) {
  Stopwatch clock;
  const LinearSystemSpec spec = lemma_spec(cfg);
  const CovarianceReport cov = lemma1_report(spec, cfg.lemma.simulate);
  Report r = make_report("lemma1", cfg);
  r.summary = covariance_summary(cov);
  r.summary["hessian_diag"] = to_json(Matrix(spec.hessian.diagonal().transpose()))[0];
  r.summary["noise_diag"] = to_json(Matrix(spec.noise_cov.diagonal().transpose()))[0];
  ensure_dir(cfg.out_dir);
  finish(r, clock, out_path(cfg, "lemma1.json"), out);
  return kExitOk;
}

Vector flattened(const Matrix& m) {
  Vector v(m.size());
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) v(k++) = m(i, j);
  return v;
}

TrainTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open trace file '" + path + "'");
  std::string line;
  if (!std::getline(in, line) || line != kTraceHeader) throw DataError("trace file: unexpected header");
  TrainTrace trace;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(fields, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DataError("trace file: bad value on line " + std::to_string(number));
      }
    }
    if (vals.size() != 7) throw DataError("trace file: expected 7 columns on line " + std::to_string(number));
    TraceRow r;
    r.step = static_cast<long>(vals[0]);
    r.loss_sup = vals[1];
    r.loss_unsup = vals[2];
    r.gdc = vals[3];
    r.soc = vals[4];
    r.rho_grad = vals[5];
    r.rho_in = vals[6];
    trace.rows.push_back(r);
  }
  return trace;
}

int cmd_metrics(const RunConfig& cfg, const MetricsInputs& in, std::ostream& out) {
  Stopwatch clock;
  Report r = make_report("metrics", cfg);
  nlohmann::json s = {{"gdc", nullptr}, {"soc", nullptr}, {"rho_grad", nullptr}, {"rho_in", nullptr}};
  bool any = false;

  if (!in.g_ref.empty() || !in.g.empty()) {
    if (in.g_ref.empty() || in.g.empty()) throw ArgumentError("metrics: --g-ref and --g must be given together");
    const Vector a = flattened(load_matrix(in.g_ref));
    const Vector b = flattened(load_matrix(in.g));
    if (a.size() != b.size()) throw DataError("metrics: gradient dumps differ in size");
    s["gdc"] = gdc(a, b);
    any = true;
  }
  if (!in.z_new.empty()) {
    if (in.z_old.empty() && in.projector.empty())
      throw ArgumentError("metrics: --z-new needs --z-old or --projector");
    const Matrix z_new = load_matrix(in.z_new);
    std::optional<Matrix> fixed;
    if (!in.projector.empty()) {
      fixed = load_matrix(in.projector);
      if (fixed->rows() != z_new.cols() || fixed->cols() != z_new.cols())
        throw DataError("metrics: projector shape does not match the feature width");
    }
    if (!in.z_old.empty()) {
      const Matrix z_old = load_matrix(in.z_old);
      if (z_old.cols() != z_new.cols()) throw DataError("metrics: feature dumps differ in width");
      const Eigen::Index k = cfg.train.pca_k > 0 ? cfg.train.pca_k : choose_pca_k(z_old, cfg.train.soc_energy);
      const PcaProjector p = build_pca(z_old, k);
      s["soc"] = soc(z_new, p);
      s["pca_k"] = k;
      if (fixed) s["rho_in"] = soc(z_new, *fixed);
    } else {
      s["soc"] = soc(z_new, *fixed);
    }
    any = true;
  }
  if (!in.class_norms.empty()) {
    const Vector norms = flattened(load_matrix(in.class_norms));
    std::vector<bool> known(static_cast<std::size_t>(norms.size()));
    for (std::size_t k = 0; k < known.size(); ++k) known[k] = static_cast<int>(k) < cfg.data.num_known;
    s["rho_grad"] = rho_grad(norms, known);
    any = true;
  }
  if (!in.trace.empty()) {
    const TrainTrace trace = read_trace_csv(in.trace);
    const TraceRow m = window_means(trace, cfg.train.dense_steps);
    s["trace_window_steps"] = cfg.train.dense_steps;
    s["trace_rows"] = trace.rows.size();
    s["trace_mean"] = {{"gdc", real_or_null(m.gdc)},
                       {"soc", real_or_null(m.soc)},
                       {"rho_grad", real_or_null(m.rho_grad)},
                       {"rho_in", real_or_null(m.rho_in)}};
    any = true;
  }
  if (!any) throw ArgumentError("metrics: no inputs given");
  r.summary = std::move(s);
  ensure_dir(cfg.out_dir);
  finish(r, clock, out_path(cfg, "metrics.json"), out);
  return kExitOk;
}

int dispatch(const Parsed& p, std::ostream& out, std::ostream& err) {
  if (p.command == "gen-data") return cmd_gen_data(p.cfg, out);
  if (p.command == "train-ref") return cmd_train_ref(p.cfg, out);
  if (p.command == "train") return cmd_train(p.cfg, out, err);
  if (p.command == "lemma1") return cmd_lemma1(p.cfg, out);
  if (p.command == "metrics") return cmd_metrics(p.cfg, p.metrics, out);
  throw ArgumentError("unknown subcommand '" + p.command + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Energy-aware gradient coordination for category discovery on synthetic data", "eagc"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"gen-data", "generate the synthetic benchmark"},
      {"train-ref", "train the supervised reference model"},
      {"train", "joint GCD training; writes the trace CSV and a JSON report"},
      {"lemma1", "closed-form and simulated deviation covariances of the linearized dynamics"},
      {"metrics", "GDC / SOC / rho values from matrix dumps or a trace CSV"},
  };

  std::map<std::string, std::string> values;
  std::string config_path;
  MetricsInputs metrics;
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config_path, "flat key = value file");
    for (const ConfigKey& k : config_keys())
      sub->add_option("--" + kebab(k.name), values[k.name], k.help);
    if (name == "metrics") {
      sub->add_option("--g-ref", metrics.g_ref, "supervised-only gradient dump (matrix file)");
      sub->add_option("--g", metrics.g, "joint gradient dump (matrix file)");
      sub->add_option("--z-new", metrics.z_new, "novel-class features (matrix file)");
      sub->add_option("--z-old", metrics.z_old, "labeled features; their PCA is the known subspace for SOC");
      sub->add_option("--projector", metrics.projector, "fixed projector P (matrix file)");
      sub->add_option("--class-norms", metrics.class_norms, "per-class gradient norms (matrix file)");
      sub->add_option("--trace", metrics.trace, "trace CSV written by train");
    }
    subs.push_back(sub);
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(std::move(reversed));
  } catch (const CLI::CallForHelp&) {
    out << (app.get_subcommands().empty() ? app.help() : app.get_subcommands().front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "eagc: " << e.what() << '\n';
    return kExitUsage;
  }

  Parsed parsed;
  try {
    CLI::App* sub = app.get_subcommands().front();
    parsed.command = sub->get_name();
    parsed.metrics = metrics;
    parsed.cfg = default_run_config();
    if (!config_path.empty()) apply_config_file(parsed.cfg, config_path);
    for (const ConfigKey& k : config_keys())
      if (sub->count("--" + kebab(k.name)) > 0) set_key(parsed.cfg, k.name, values[k.name]);
    parsed.cfg.sync();
  } catch (const ArgumentError& e) {
    err << "eagc: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    return dispatch(parsed, out, err);
  } catch (const ArgumentError& e) {
    err << "eagc: " << e.what() << '\n';
    return kExitUsage;
  } catch (const NumericalError& e) {
    err << "eagc: numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const DataError& e) {
    err << "eagc: data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "eagc: " << e.what() << '\n';
    return kExitData;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace eagc::cli
