#pragma once

// Run configuration shared by every subcommand.
//
// Keys are snake_case in config files and kebab-case as flags. Values are
// resolved in three layers: built-in default, then the config file, then
// command-line flags. EAGC_OUT_DIR replaces the built-in default of out_dir.
//
// Config file format: one `key = value` per line, `#` starts a comment.

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "eagc/dataset.hpp"
#include "eagc/theory.hpp"
#include "eagc/trainer.hpp"

namespace eagc {

struct LemmaConfig {
  int dim = 4;
  double h_min = 0.5;      // diagonal Hessian entries drawn from [h_min, h_max]
  double h_max = 2.0;
  double sigma_min = 0.5;  // diagonal noise covariance entries
  double sigma_max = 2.0;
  double step_size = 0.01;
  long steps = 1'000'000;
  long burn_in = -1;
  bool simulate = true;
};

struct RunConfig {
  std::uint64_t seed = 0;
  SyntheticSpec data;
  RefConfig ref;
  TrainConfig train;
  LemmaConfig lemma;
  std::string out_dir = ".";
  std::string data_path;       // empty: <out_dir>/dataset.txt
  std::string ref_model_path;  // empty: <out_dir>/reference.txt
  std::string run_name = "train";

  /// Copies the master seed and the shared temperature into the nested
  /// configs. Called after every layer has been applied.
  void sync();
  std::string resolved_data_path() const;
  std::string resolved_ref_model_path() const;
};

enum class KeyKind { integer, real, boolean, text };

struct ConfigKey {
  std::string name;  // snake_case
  KeyKind kind;
  std::string help;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

/// Every accepted key, in echo order.
const std::vector<ConfigKey>& config_keys();

/// Looks a key up by its snake_case or kebab-case spelling; nullptr if unknown.
const ConfigKey* find_key(std::string_view name);

/// Throws ArgumentError for an unknown key or an unparsable value.
void set_key(RunConfig& cfg, std::string_view name, std::string_view value);
std::string get_key(const RunConfig& cfg, std::string_view name);

std::string kebab(std::string_view snake);

/// Built-in defaults with EAGC_OUT_DIR applied when set.
RunConfig default_run_config();

/// Applies `key = value` lines. Errors name the offending line.
void apply_config_text(RunConfig& cfg, std::string_view text, const std::string& origin = "config");
void apply_config_file(RunConfig& cfg, const std::string& path);

/// Typed JSON object of every key.
nlohmann::json config_echo(const RunConfig& cfg);

/// Diagonal H and Sigma drawn from the lemma ranges.
LinearSystemSpec lemma_spec(const RunConfig& cfg);

}  // namespace eagc
