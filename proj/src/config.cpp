#include "laco/config.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "laco/errors.hpp"

namespace laco {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ConfigError("invalid value '" + value + "' for " + key);
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T out{};
  const char* end = value.data() + value.size();
  auto [ptr, ec] = std::from_chars(value.data(), end, out);
  if (ec != std::errc() || ptr != end) bad_value(key, value);
  return out;
}

double parse_double(const std::string& key, const std::string& value) {
  // from_chars for double is missing from older libstdc++.
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    bad_value(key, value);
  }
  if (used != value.size()) bad_value(key, value);
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "1" || value == "true" || value == "yes" || value == "on") return true;
  if (value == "0" || value == "false" || value == "no" || value == "off") return false;
  bad_value(key, value);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Field {
  std::function<void(RunConfig&, const std::string&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename M>
Field int_field(M RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_number<M>(k, v); },
          [member](const RunConfig& c) { return std::to_string(c.*member); }};
}
Field double_field(double RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_double(k, v); },
          [member](const RunConfig& c) { return fmt(c.*member); }};
}
Field bool_field(bool RunConfig::*member) {
  return {[member](RunConfig& c, const std::string& k, const std::string& v) { c.*member = parse_bool(k, v); },
          [member](const RunConfig& c) { return std::string(c.*member ? "true" : "false"); }};
}
Field string_field(std::string RunConfig::*member) {
  return {[member](RunConfig& c, const std::string&, const std::string& v) { c.*member = v; },
          [member](const RunConfig& c) { return c.*member; }};
}

// Ordered so format_config output is stable.
const std::vector<std::pair<std::string, Field>>& fields() {
  static const std::vector<std::pair<std::string, Field>> table = {
      {"layers", int_field(&RunConfig::layers)},
      {"heads", int_field(&RunConfig::heads)},
      {"hidden", int_field(&RunConfig::hidden)},
      {"ffn", int_field(&RunConfig::ffn)},
      {"max_len", int_field(&RunConfig::max_len)},
      {"init_std", double_field(&RunConfig::init_std)},
      {"window", int_field(&RunConfig::window)},
      {"filters", int_field(&RunConfig::filters)},
      {"no_je", bool_field(&RunConfig::no_je)},
      {"no_ca", bool_field(&RunConfig::no_ca)},
      {"zero_init_heads", bool_field(&RunConfig::zero_init_heads)},
      {"mode",
       {[](RunConfig& c, const std::string&, const std::string& v) { c.mode = parse_task_mode(v); },
        [](const RunConfig& c) { return to_string(c.mode); }}},
      {"alpha",
       {[](RunConfig& c, const std::string& k, const std::string& v) {
          if (v.empty() || v == "none") c.alpha.reset();
          else c.alpha = parse_double(k, v);
        },
        [](const RunConfig& c) { return c.alpha ? fmt(*c.alpha) : std::string("none"); }}},
      {"gamma", double_field(&RunConfig::gamma)},
      {"plcp_pairs", int_field(&RunConfig::plcp_pairs)},
      {"symmetric_plcp", bool_field(&RunConfig::symmetric_plcp)},
      {"detach_aux", bool_field(&RunConfig::detach_aux)},
      {"threshold", double_field(&RunConfig::threshold)},
      {"batch_size", int_field(&RunConfig::batch_size)},
      {"learning_rate", double_field(&RunConfig::learning_rate)},
      {"seed", int_field(&RunConfig::seed)},
      {"max_steps", int_field(&RunConfig::max_steps)},
      {"eval_interval", int_field(&RunConfig::eval_interval)},
      {"patience", int_field(&RunConfig::patience)},
      {"target_micro_f1", double_field(&RunConfig::target_micro_f1)},
      {"grad_slots", int_field(&RunConfig::grad_slots)},
      {"min_freq", int_field(&RunConfig::min_freq)},
      {"train_path", string_field(&RunConfig::train_path)},
      {"valid_path", string_field(&RunConfig::valid_path)},
      {"test_path", string_field(&RunConfig::test_path)},
      {"label_space_path", string_field(&RunConfig::label_space_path)},
      {"out_dir", string_field(&RunConfig::out_dir)},
  };
  return table;
}

}  // namespace

void apply_setting(RunConfig& config, const std::string& key, const std::string& value) {
  for (const auto& [name, field] : fields()) {
    if (name == key) {
      field.set(config, key, value);
      return;
    }
  }
  throw ConfigError("unknown configuration key '" + key + "'");
}

RunConfig parse_config(const std::string& text, RunConfig base) {
  std::istringstream in(text);
  std::size_t line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    }
    apply_setting(base, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return base;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), std::move(base));
}

std::string format_config(const RunConfig& config) {
  std::string out;
  for (const auto& [name, field] : fields()) out += name + " = " + field.get(config) + "\n";
  return out;
}

std::vector<std::string> config_keys() {
  std::vector<std::string> keys;
  for (const auto& [name, field] : fields()) keys.push_back(name);
  return keys;
}

void validate(const RunConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
  };
  require(c.layers >= 0, "layers must be >= 0");
  require(c.heads >= 1 && c.hidden >= 1 && c.hidden % c.heads == 0, "hidden must be a positive multiple of heads");
  require(c.ffn >= 1, "ffn must be positive");
  require(c.max_len >= 3, "max_len must be at least 3");
  require(c.init_std > 0, "init_std must be positive");
  require(c.window >= 1 && c.filters >= 1, "window and filters must be positive");
  if (c.mode == TaskMode::both) {
    require(c.alpha.has_value(), "mode +both requires alpha");
    require(*c.alpha > 0.0 && *c.alpha < 1.0, "alpha must lie in (0, 1)");
  } else {
    require(!c.alpha.has_value(), "alpha is only used by mode +both");
  }
  require(c.gamma > 0, "gamma must be positive");
  require(c.plcp_pairs >= 1, "plcp_pairs must be >= 1");
  require(c.threshold > 0.0 && c.threshold < 1.0, "threshold must lie in (0, 1)");
  require(c.batch_size >= 1, "batch_size must be >= 1");
  require(c.learning_rate > 0, "learning_rate must be positive");
  require(c.max_steps >= 1, "max_steps must be >= 1");
  require(c.eval_interval >= 1, "eval_interval must be >= 1");
  require(c.patience >= 1, "patience must be >= 1");
  require(c.target_micro_f1 >= 0.0 && c.target_micro_f1 <= 1.0, "target_micro_f1 must lie in [0, 1]");
  require(c.grad_slots >= 1, "grad_slots must be >= 1");
  require(c.min_freq >= 1, "min_freq must be >= 1");
}

ModelConfig model_config(const RunConfig& c) {
  ModelConfig m;
  m.encoder.layers = c.layers;
  m.encoder.heads = c.heads;
  m.encoder.hidden = c.hidden;
  m.encoder.ffn = c.ffn;
  m.encoder.max_len = c.max_len;
  m.encoder.init_std = c.init_std;
  m.window = c.window;
  m.filters = c.filters;
  m.no_je = c.no_je;
  m.no_ca = c.no_ca;
  m.plcp_head = uses_plcp(c.mode);
  m.clcp_head = uses_clcp(c.mode);
  m.zero_init_heads = c.zero_init_heads;
  return m;
}

}  // namespace laco
