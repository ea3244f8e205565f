#include "eagc/report.hpp"

#include <cmath>
#include <fstream>
#include <ostream>

#include "eagc/errors.hpp"
#include "eagc/matrix_io.hpp"

namespace eagc {

nlohmann::json to_json(const Report& r) {
  nlohmann::json j;
  j["command"] = r.command;
  j["seed"] = r.seed;
  j["config"] = r.config;
  j["summary"] = r.summary;
  j["wall_clock_seconds"] = r.wall_clock_seconds;
  return j;
}

Report report_from_json(const nlohmann::json& j) {
  try {
    Report r;
    r.command = j.at("command").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.config = j.at("config");
    r.summary = j.at("summary");
    r.wall_clock_seconds = j.at("wall_clock_seconds").get<double>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("report: ") + e.what());
  }
}

std::string serialize(const Report& r) { return to_json(r).dump(2) + "\n"; }

Report parse_report(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw DataError(std::string("report: ") + e.what());
  }
  return report_from_json(j);
}

void save_report(const std::string& path, const Report& r) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << serialize(r);
  if (!out) throw DataError("failed writing '" + path + "'");
}

nlohmann::json real_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

nlohmann::json to_json(const AccTriple& acc) {
  return {{"all", real_or_null(acc.all)}, {"old", real_or_null(acc.old)}, {"new", real_or_null(acc.new_)}};
}

nlohmann::json to_json(const Matrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(real_or_null(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

nlohmann::json trace_summary(const TrainTrace& trace, long window) {
  nlohmann::json s;
  s["initial_acc"] = to_json(trace.initial_acc);
  s["final_acc"] = to_json(trace.final_acc);
  s["best_acc"] = to_json(trace.best_acc);
  nlohmann::json epochs = nlohmann::json::array();
  for (const AccTriple& a : trace.epoch_acc) epochs.push_back(to_json(a));
  s["epoch_acc"] = std::move(epochs);
  s["steps"] = trace.steps;
  s["trace_rows"] = trace.rows.size();
  s["aborted"] = trace.aborted;
  s["abort_reason"] = trace.abort_reason;
  const TraceRow m = window_means(trace, window);
  s["window_steps"] = window;
  s["window_mean"] = {{"loss_sup", real_or_null(m.loss_sup)}, {"loss_unsup", real_or_null(m.loss_unsup)},
                      {"gdc", real_or_null(m.gdc)},           {"soc", real_or_null(m.soc)},
                      {"rho_grad", real_or_null(m.rho_grad)}, {"rho_in", real_or_null(m.rho_in)}};
  return s;
}

nlohmann::json covariance_summary(const CovarianceReport& r) {
  nlohmann::json s;
  s["deviation_ordering_holds"] = r.deviation_ordering_holds;
  s["analytic_ordering_holds"] = r.analytic_ordering_holds;
  s["empirical_ordering_holds"] = r.empirical_ordering_holds;
  s["psd_margin"] = real_or_null(r.psd_margin);
  s["empirical_margin"] = real_or_null(r.empirical_margin);
  s["empirical_rel_error_base"] = real_or_null(r.empirical_rel_error_base);
  s["empirical_rel_error_prox"] = real_or_null(r.empirical_rel_error_prox);
  s["analytic_cov_base"] = to_json(r.analytic_cov_base);
  s["analytic_cov_prox"] = to_json(r.analytic_cov_prox);
  s["empirical_cov_base"] = to_json(r.empirical_cov_base);
  s["empirical_cov_prox"] = to_json(r.empirical_cov_prox);
  s["grad_cov_base"] = to_json(r.grad_cov_base);
  s["grad_cov_prox"] = to_json(r.grad_cov_prox);
  s["grad_margin"] = real_or_null(r.grad_margin);
  s["grad_ordering_holds"] = r.grad_ordering_holds;
  s["note"] = r.note;
  return s;
}

void write_trace_csv(std::ostream& out, const TrainTrace& trace) {
  out << kTraceHeader << '\n';
  for (const TraceRow& r : trace.rows) {
    out << r.step << ',' << format_real(r.loss_sup) << ',' << format_real(r.loss_unsup) << ',' << format_real(r.gdc)
        << ',' << format_real(r.soc) << ',' << format_real(r.rho_grad) << ',' << format_real(r.rho_in) << '\n';
  }
}

void save_trace_csv(const std::string& path, const TrainTrace& trace) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  write_trace_csv(out, trace);
  out.flush();
  if (!out) throw DataError("failed writing '" + path + "'");
}

}  // namespace eagc
