#include "eagc/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

#include "eagc/errors.hpp"
#include "eagc/matrix_io.hpp"

namespace eagc {
namespace {

constexpr std::uint64_t kStreamLemmaSpec = 8;
constexpr std::uint64_t kStreamLemmaNoise = 9;

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(first, last - first + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ArgumentError("invalid value '" + std::string(value) + "' for " + std::string(key) + " (expected " + expected +
                      ")");
}

template <class T>
T parse_integer(std::string_view key, std::string_view value, T lo) {
  T out{};
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) bad_value(key, value, "an integer");
  if (out < lo) bad_value(key, value, ("an integer >= " + std::to_string(lo)).c_str());
  return out;
}

double parse_real(std::string_view key, std::string_view value) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) bad_value(key, value, "a number");
  if (!std::isfinite(out)) bad_value(key, value, "a finite number");
  return out;
}

bool parse_bool(std::string_view key, std::string_view value) {
  if (value == "true" || value == "1" || value == "on" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "off" || value == "no") return false;
  bad_value(key, value, "true or false");
}

template <class Access>
ConfigKey int_key(std::string name, std::string help, Access access, long lo) {
  ConfigKey k{name, KeyKind::integer, std::move(help), nullptr, nullptr};
  k.set = [name, access, lo](RunConfig& c, std::string_view v) {
    auto& field = access(c);
    using T = std::remove_reference_t<decltype(field)>;
    const long parsed = parse_integer<long>(name, v, lo);
    if (parsed > static_cast<long>(std::numeric_limits<T>::max())) bad_value(name, v, "a smaller integer");
    field = static_cast<T>(parsed);
  };
  k.get = [access](const RunConfig& c) { return std::to_string(access(c)); };
  return k;
}

template <class Access>
ConfigKey real_key(std::string name, std::string help, Access access) {
  ConfigKey k{name, KeyKind::real, std::move(help), nullptr, nullptr};
  k.set = [name, access](RunConfig& c, std::string_view v) { access(c) = parse_real(name, v); };
  k.get = [access](const RunConfig& c) { return format_real(access(c)); };
  return k;
}

template <class Access>
ConfigKey bool_key(std::string name, std::string help, Access access) {
  ConfigKey k{name, KeyKind::boolean, std::move(help), nullptr, nullptr};
  k.set = [name, access](RunConfig& c, std::string_view v) { access(c) = parse_bool(name, v); };
  k.get = [access](const RunConfig& c) { return std::string(access(c) ? "true" : "false"); };
  return k;
}

template <class Access>
ConfigKey text_key(std::string name, std::string help, Access access) {
  ConfigKey k{name, KeyKind::text, std::move(help), nullptr, nullptr};
  k.set = [access](RunConfig& c, std::string_view v) { access(c) = std::string(v); };
  k.get = [access](const RunConfig& c) { return access(c); };
  return k;
}

std::vector<ConfigKey> build_keys() {
  std::vector<ConfigKey> keys;
  ConfigKey seed{"seed", KeyKind::integer, "master seed; every random stream is derived from it", nullptr, nullptr};
  seed.set = [](RunConfig& c, std::string_view v) { c.seed = parse_integer<std::uint64_t>("seed", v, 0); };
  seed.get = [](const RunConfig& c) { return std::to_string(c.seed); };
  keys.push_back(std::move(seed));

  keys.push_back(int_key("num_known", "known classes", [](auto& c) -> auto& { return c.data.num_known; }, 1));
  keys.push_back(int_key("num_novel", "novel classes", [](auto& c) -> auto& { return c.data.num_novel; }, 0));
  keys.push_back(int_key("per_class", "samples per class", [](auto& c) -> auto& { return c.data.per_class; }, 1));
  keys.push_back(int_key("input_dim", "input width", [](auto& c) -> auto& { return c.data.input_dim; }, 2));
  keys.push_back(real_key("class_sep", "radius of the class-mean sphere",
                          [](auto& c) -> auto& { return c.data.class_sep; }));
  keys.push_back(real_key("noise_std", "per-coordinate sample noise",
                          [](auto& c) -> auto& { return c.data.noise_std; }));

  keys.push_back(int_key("feature_dim", "encoder output width",
                         [](auto& c) -> auto& { return c.ref.feature_dim; }, 1));
  keys.push_back(int_key("ref_epochs", "reference model epochs", [](auto& c) -> auto& { return c.ref.epochs; }, 0));
  keys.push_back(int_key("ref_batch_size", "reference model batch size",
                         [](auto& c) -> auto& { return c.ref.batch_size; }, 1));
  keys.push_back(real_key("ref_lr", "reference model learning rate", [](auto& c) -> auto& { return c.ref.lr; }));
  keys.push_back(bool_key("ref_cosine_decay", "cosine learning-rate decay for the reference model",
                          [](auto& c) -> auto& { return c.ref.cosine_decay; }));

  keys.push_back(int_key("epochs", "GCD training epochs", [](auto& c) -> auto& { return c.train.epochs; }, 0));
  keys.push_back(int_key("batch_size", "samples per GCD batch (two views each)",
                         [](auto& c) -> auto& { return c.train.batch_size; }, 1));
  keys.push_back(real_key("lr_encoder", "encoder learning rate",
                          [](auto& c) -> auto& { return c.train.lr_encoder; }));
  keys.push_back(real_key("lr_head", "prototype learning rate", [](auto& c) -> auto& { return c.train.lr_head; }));
  keys.push_back(bool_key("cosine_decay", "cosine learning-rate decay",
                          [](auto& c) -> auto& { return c.train.cosine_decay; }));
  keys.push_back(real_key("sharpen_temp", "temperature of the sharpened partner-view targets",
                          [](auto& c) -> auto& { return c.train.sharpen_temp; }));
  keys.push_back(real_key("entropy_weight", "weight of the mean-prediction entropy bonus",
                          [](auto& c) -> auto& { return c.train.entropy_weight; }));
  keys.push_back(real_key("view_noise_std", "Gaussian noise added to each augmented view",
                          [](auto& c) -> auto& { return c.train.view_noise_std; }));

  keys.push_back(real_key("lambda_a", "alignment strength", [](auto& c) -> auto& { return c.train.coord.lambda_a; }));
  keys.push_back(real_key("lambda_p", "projection strength", [](auto& c) -> auto& { return c.train.coord.lambda_p; }));
  keys.push_back(real_key("eta", "conceptor aperture", [](auto& c) -> auto& { return c.train.coord.eta; }));
  ConfigKey clamp{"tau_clamp", KeyKind::text, "clamp_zero_one | clamp_zero_only | unclamped", nullptr, nullptr};
  clamp.set = [](RunConfig& c, std::string_view v) { c.train.coord.tau_clamp = parse_tau_clamp(v); };
  clamp.get = [](const RunConfig& c) { return to_string(c.train.coord.tau_clamp); };
  keys.push_back(std::move(clamp));
  keys.push_back(real_key("alpha", "supervised loss weight", [](auto& c) -> auto& { return c.train.coord.alpha; }));
  keys.push_back(real_key("beta", "unsupervised loss weight", [](auto& c) -> auto& { return c.train.coord.beta; }));
  keys.push_back(real_key("tau_s", "softmax temperature (reference and GCD model)",
                          [](auto& c) -> auto& { return c.train.coord.tau_s; }));

  ConfigKey mode{"eagc", KeyKind::text, "off | on | loss-variant | uniform-proj", nullptr, nullptr};
  mode.set = [](RunConfig& c, std::string_view v) { c.train.eagc = parse_eagc_mode(v); };
  mode.get = [](const RunConfig& c) { return to_string(c.train.eagc); };
  keys.push_back(std::move(mode));
  ConfigKey sub{"subspace", KeyKind::text, "conceptor | pca (hard projector for the projection term)", nullptr, nullptr};
  sub.set = [](RunConfig& c, std::string_view v) { c.train.subspace = parse_subspace_kind(v); };
  sub.get = [](const RunConfig& c) { return to_string(c.train.subspace); };
  keys.push_back(std::move(sub));
  keys.push_back(int_key("pca_k", "rank of the pca subspace; 0 picks it by soc_energy",
                         [](auto& c) -> auto& { return c.train.pca_k; }, 0));
  keys.push_back(real_key("soc_energy", "energy fraction that fixes the rank of the known-class PCA",
                          [](auto& c) -> auto& { return c.train.soc_energy; }));
  keys.push_back(int_key("measure_every", "trace cadence after the dense window",
                         [](auto& c) -> auto& { return c.train.measure_every; }, 1));
  keys.push_back(int_key("dense_steps", "steps measured individually from the start",
                         [](auto& c) -> auto& { return c.train.dense_steps; }, 0));

  keys.push_back(int_key("lemma_dim", "dimension of the linear system", [](auto& c) -> auto& { return c.lemma.dim; }, 1));
  keys.push_back(real_key("lemma_h_min", "smallest Hessian diagonal entry",
                          [](auto& c) -> auto& { return c.lemma.h_min; }));
  keys.push_back(real_key("lemma_h_max", "largest Hessian diagonal entry",
                          [](auto& c) -> auto& { return c.lemma.h_max; }));
  keys.push_back(real_key("lemma_sigma_min", "smallest noise variance",
                          [](auto& c) -> auto& { return c.lemma.sigma_min; }));
  keys.push_back(real_key("lemma_sigma_max", "largest noise variance",
                          [](auto& c) -> auto& { return c.lemma.sigma_max; }));
  keys.push_back(real_key("lemma_step_size", "step size of the linear recursion",
                          [](auto& c) -> auto& { return c.lemma.step_size; }));
  keys.push_back(int_key("lemma_steps", "simulated iterations", [](auto& c) -> auto& { return c.lemma.steps; }, 1));
  keys.push_back(int_key("lemma_burn_in", "discarded iterations; -1 uses a tenth of lemma_steps",
                         [](auto& c) -> auto& { return c.lemma.burn_in; }, -1));
  keys.push_back(bool_key("lemma_simulate", "run the Markov chains in addition to the closed form",
                          [](auto& c) -> auto& { return c.lemma.simulate; }));

  keys.push_back(text_key("out_dir", "output directory (default from EAGC_OUT_DIR, else .)",
                          [](auto& c) -> auto& { return c.out_dir; }));
  keys.push_back(text_key("data", "dataset file; empty means <out_dir>/dataset.txt",
                          [](auto& c) -> auto& { return c.data_path; }));
  keys.push_back(text_key("ref_model", "reference model file; empty means <out_dir>/reference.txt",
                          [](auto& c) -> auto& { return c.ref_model_path; }));
  keys.push_back(text_key("run_name", "file stem of the train trace and report",
                          [](auto& c) -> auto& { return c.run_name; }));
  return keys;
}

}  // namespace

void RunConfig::sync() {
  data.seed = derive_seed(seed, kStreamData);
  ref.seed = seed;
  train.seed = seed;
  ref.tau_s = train.coord.tau_s;
}

std::string RunConfig::resolved_data_path() const {
  return data_path.empty() ? (std::filesystem::path(out_dir) / "dataset.txt").string() : data_path;
}

std::string RunConfig::resolved_ref_model_path() const {
  return ref_model_path.empty() ? (std::filesystem::path(out_dir) / "reference.txt").string() : ref_model_path;
}

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = build_keys();
  return keys;
}

std::string kebab(std::string_view snake) {
  std::string out(snake);
  for (char& ch : out)
    if (ch == '_') ch = '-';
  return out;
}

const ConfigKey* find_key(std::string_view name) {
  std::string snake(name);
  for (char& ch : snake)
    if (ch == '-') ch = '_';
  for (const ConfigKey& k : config_keys())
    if (k.name == snake) return &k;
  return nullptr;
}

void set_key(RunConfig& cfg, std::string_view name, std::string_view value) {
  const ConfigKey* k = find_key(name);
  if (!k) throw ArgumentError("unknown config key '" + std::string(name) + "'");
  k->set(cfg, value);
}

std::string get_key(const RunConfig& cfg, std::string_view name) {
  const ConfigKey* k = find_key(name);
  if (!k) throw ArgumentError("unknown config key '" + std::string(name) + "'");
  return k->get(cfg);
}

RunConfig default_run_config() {
  RunConfig cfg;
  if (const char* dir = std::getenv("EAGC_OUT_DIR"); dir && *dir) cfg.out_dir = dir;
  cfg.sync();
  return cfg;
}

void apply_config_text(RunConfig& cfg, std::string_view text, const std::string& origin) {
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    const std::string body = trim(std::string_view(line).substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    const std::string where = origin + ":" + std::to_string(number) + ": ";
    if (eq == std::string::npos) throw ArgumentError(where + "expected 'key = value'");
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key.empty()) throw ArgumentError(where + "missing key");
    try {
      set_key(cfg, key, value);
    } catch (const ArgumentError& e) {
      throw ArgumentError(where + e.what());
    }
  }
  cfg.sync();
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  apply_config_text(cfg, text.str(), path);
}

nlohmann::json config_echo(const RunConfig& cfg) {
  nlohmann::json out = nlohmann::json::object();
  for (const ConfigKey& k : config_keys()) {
    const std::string v = k.get(cfg);
    switch (k.kind) {
      case KeyKind::integer:
        if (k.name == "seed") out[k.name] = cfg.seed;
        else out[k.name] = std::stoll(v);
        break;
      case KeyKind::real: out[k.name] = std::stod(v); break;
      case KeyKind::boolean: out[k.name] = v == "true"; break;
      case KeyKind::text: out[k.name] = v; break;
    }
  }
  return out;
}

LinearSystemSpec lemma_spec(const RunConfig& cfg) {
  const LemmaConfig& l = cfg.lemma;
  if (l.dim < 1) throw ArgumentError("lemma_dim must be >= 1");
  if (!(l.h_min > 0.0 && l.h_min <= l.h_max)) throw ArgumentError("lemma Hessian range must satisfy 0 < min <= max");
  if (!(l.sigma_min > 0.0 && l.sigma_min <= l.sigma_max))
    throw ArgumentError("lemma noise range must satisfy 0 < min <= max");
  SeededRng rng(derive_seed(cfg.seed, kStreamLemmaSpec));
  LinearSystemSpec spec;
  spec.hessian = Matrix::Zero(l.dim, l.dim);
  spec.noise_cov = Matrix::Zero(l.dim, l.dim);
  for (int i = 0; i < l.dim; ++i) spec.hessian(i, i) = l.h_min + (l.h_max - l.h_min) * rng.uniform();
  for (int i = 0; i < l.dim; ++i) spec.noise_cov(i, i) = l.sigma_min + (l.sigma_max - l.sigma_min) * rng.uniform();
  spec.lambda_a = cfg.train.coord.lambda_a;
  spec.step_size = l.step_size;
  spec.steps = l.steps;
  spec.burn_in = l.burn_in;
  spec.seed = derive_seed(cfg.seed, kStreamLemmaNoise);
  return spec;
}

}  // namespace eagc
