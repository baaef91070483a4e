#include "laco/checkpoint.hpp"

#include <algorithm>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "laco/errors.hpp"

namespace laco {

namespace {

constexpr const char* kMagic = "laco-checkpoint 1";

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void put_doubles(std::string& out, std::span<const double> values) {
  const std::size_t start = out.size();
  out.resize(start + values.size() * sizeof(double));
  std::memcpy(out.data() + start, values.data(), values.size() * sizeof(double));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = start; i < out.size(); i += sizeof(double))
      std::reverse(out.begin() + static_cast<std::ptrdiff_t>(i), out.begin() + static_cast<std::ptrdiff_t>(i + 8));
  }
}

void get_doubles(const char* src, std::span<double> values) {
  std::memcpy(values.data(), src, values.size() * sizeof(double));
  if constexpr (std::endian::native == std::endian::big) {
    auto* bytes = reinterpret_cast<unsigned char*>(values.data());
    for (std::size_t i = 0; i < values.size(); ++i) std::reverse(bytes + 8 * i, bytes + 8 * i + 8);
  }
}

struct Entry {
  std::string name;
  Shape shape;
  std::size_t offset = 0;  // in doubles
};

std::string next_line(std::istream& in, const char* what) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string("checkpoint truncated while reading ") + what);
  return line;
}

template <typename T>
T field(const std::string& line, const std::string& key) {
  std::istringstream is(line);
  std::string k;
  T v{};
  if (!(is >> k >> v) || k != key) throw DataError("checkpoint header: expected '" + key + "', got '" + line + "'");
  return v;
}

double double_field(const std::string& line, const std::string& key) {
  const std::string prefix = key + " ";
  if (line.rfind(prefix, 0) != 0) throw DataError("checkpoint header: expected '" + key + "', got '" + line + "'");
  try {
    return std::stod(line.substr(prefix.size()));
  } catch (const std::exception&) {
    throw DataError("checkpoint header: bad number in '" + line + "'");
  }
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& c) {
  if (c.adam.first_moment.size() != c.params.size() || c.adam.second_moment.size() != c.params.size()) {
    throw DimensionError("checkpoint optimizer state does not match the parameters");
  }
  std::vector<std::pair<std::string, const Tensor*>> tensors;
  for (const auto& p : c.params) tensors.emplace_back(p.name, &p.value);
  for (std::size_t i = 0; i < c.params.size(); ++i) tensors.emplace_back("adam.m/" + c.params[i].name, &c.adam.first_moment[i]);
  for (std::size_t i = 0; i < c.params.size(); ++i) tensors.emplace_back("adam.v/" + c.params[i].name, &c.adam.second_moment[i]);

  std::string config = format_config(c.config);
  std::string vocab = c.vocab.serialize();
  const auto lines_in = [](const std::string& s) { return std::count(s.begin(), s.end(), '\n'); };

  std::ostringstream h;
  h << kMagic << '\n';
  h << "step " << c.step << '\n';
  h << "best_micro_f1 " << fmt(c.best_micro_f1) << '\n';
  h << "adam_step " << c.adam.step << '\n';
  h << "adam_learning_rate " << fmt(c.adam.config.learning_rate) << '\n';
  h << "adam_beta1 " << fmt(c.adam.config.beta1) << '\n';
  h << "adam_beta2 " << fmt(c.adam.config.beta2) << '\n';
  h << "adam_epsilon " << fmt(c.adam.config.epsilon) << '\n';
  h << "config " << lines_in(config) << '\n' << config;
  h << "vocab " << lines_in(vocab) << '\n' << vocab;
  h << "tensors " << tensors.size() << '\n';
  std::size_t offset = 0;
  for (const auto& [name, t] : tensors) {
    h << name << ' ' << t->rank();
    for (auto d : t->shape()) h << ' ' << d;
    h << ' ' << offset << '\n';
    offset += t->size();
  }
  h << "end_header\n";
  std::string out = h.str();
  for (const auto& [name, t] : tensors) put_doubles(out, t->data());
  return out;
}

Checkpoint deserialize_checkpoint(const std::string& bytes) {
  const std::string end_marker = "end_header\n";
  const auto end = bytes.find(end_marker);
  if (end == std::string::npos || bytes.rfind(kMagic, 0) != 0) throw DataError("not a checkpoint file");
  std::istringstream in(bytes.substr(0, end));
  next_line(in, "magic");

  Checkpoint c;
  c.step = field<std::int64_t>(next_line(in, "step"), "step");
  c.best_micro_f1 = double_field(next_line(in, "best_micro_f1"), "best_micro_f1");
  c.adam.step = field<std::int64_t>(next_line(in, "adam_step"), "adam_step");
  c.adam.config.learning_rate = double_field(next_line(in, "adam"), "adam_learning_rate");
  c.adam.config.beta1 = double_field(next_line(in, "adam"), "adam_beta1");
  c.adam.config.beta2 = double_field(next_line(in, "adam"), "adam_beta2");
  c.adam.config.epsilon = double_field(next_line(in, "adam"), "adam_epsilon");

  const auto config_lines = field<std::size_t>(next_line(in, "config"), "config");
  std::string config;
  for (std::size_t i = 0; i < config_lines; ++i) config += next_line(in, "config") + "\n";
  c.config = parse_config(config);

  const auto vocab_lines = field<std::size_t>(next_line(in, "vocab"), "vocab");
  std::string vocab;
  for (std::size_t i = 0; i < vocab_lines; ++i) vocab += next_line(in, "vocab") + "\n";
  c.vocab = Vocab::deserialize(vocab);

  const auto count = field<std::size_t>(next_line(in, "tensors"), "tensors");
  std::vector<Entry> entries;
  std::size_t expected_offset = 0;
  for (std::size_t i = 0; i < count; ++i) {
    std::istringstream is(next_line(in, "tensor table"));
    Entry e;
    std::size_t rank = 0;
    if (!(is >> e.name >> rank)) throw DataError("checkpoint header: bad tensor line");
    e.shape.resize(rank);
    for (auto& d : e.shape)
      if (!(is >> d)) throw DataError("checkpoint header: bad shape for " + e.name);
    if (!(is >> e.offset) || e.offset != expected_offset) throw DataError("checkpoint header: bad offset for " + e.name);
    expected_offset += shape_size(e.shape);
    entries.push_back(std::move(e));
  }
  const std::size_t payload = end + end_marker.size();
  if (bytes.size() - payload != expected_offset * sizeof(double)) {
    throw DataError("checkpoint payload size does not match its header");
  }
  if (count % 3 != 0) throw DataError("checkpoint tensor count is not a multiple of three");
  const std::size_t n = count / 3;
  c.adam.first_moment.resize(n);
  c.adam.second_moment.resize(n);
  for (std::size_t i = 0; i < count; ++i) {
    const Entry& e = entries[i];
    Tensor t(e.shape);
    get_doubles(bytes.data() + payload + e.offset * sizeof(double), t.data());
    if (i < n) {
      c.params.add(e.name, std::move(t));
    } else {
      const std::size_t j = i % n;
      const std::string expect = (i < 2 * n ? "adam.m/" : "adam.v/") + c.params[j].name;
      if (e.name != expect || e.shape != c.params[j].value.shape()) {
        throw DataError("checkpoint optimizer entry '" + e.name + "' does not match parameter " + c.params[j].name);
      }
      (i < 2 * n ? c.adam.first_moment : c.adam.second_moment)[j] = std::move(t);
    }
  }
  return c;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  const std::string bytes = serialize_checkpoint(ckpt);
  // Write to a sibling and rename so a crash never leaves a torn checkpoint.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write checkpoint " + tmp.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("failed writing checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read checkpoint " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return deserialize_checkpoint(ss.str());
}

}  // namespace laco
