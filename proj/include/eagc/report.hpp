#pragma once

// Machine-readable outputs: JSON run reports and the per-step trace CSV.
// Non-finite numbers are written as JSON null.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "eagc/metrics.hpp"
#include "eagc/theory.hpp"
#include "eagc/trainer.hpp"

namespace eagc {

struct Report {
  std::string command;
  std::uint64_t seed = 0;
  nlohmann::json config = nlohmann::json::object();
  nlohmann::json summary = nlohmann::json::object();
  double wall_clock_seconds = 0.0;  // excluded from reproducibility comparisons

  bool operator==(const Report&) const = default;
};

nlohmann::json to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);

/// Pretty-printed, keys sorted, trailing newline.
std::string serialize(const Report& r);
Report parse_report(std::string_view text);
void save_report(const std::string& path, const Report& r);

nlohmann::json real_or_null(double v);
nlohmann::json to_json(const AccTriple& acc);
nlohmann::json to_json(const Matrix& m);

/// Final/best/initial accuracy, per-epoch accuracy, step count, abort state
/// and the trace means over the first `window` steps.
nlohmann::json trace_summary(const TrainTrace& trace, long window);
nlohmann::json covariance_summary(const CovarianceReport& report);

inline constexpr std::string_view kTraceHeader = "step,loss_sup,loss_unsup,gdc,soc,rho_grad,rho_in";

void write_trace_csv(std::ostream& out, const TrainTrace& trace);
void save_trace_csv(const std::string& path, const TrainTrace& trace);

}  // namespace eagc
