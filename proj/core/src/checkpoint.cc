#include "trajrl/checkpoint.h"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "trajrl/errors.h"
#include "trajrl/io.h"

namespace trajrl::policy {

namespace {

constexpr std::string_view kMagic = "trajrl-checkpoint";

void write_layers(std::ostream& out, std::string_view name, const Mlp& net) {
  out << "layers " << name;
  for (int s : net.sizes()) out << ' ' << s;
  out << '\n';
}

void write_values(std::ostream& out, std::string_view name, const std::vector<double>& v) {
  out << name << ' ' << v.size() << '\n';
  for (double x : v) out << format_double(x) << '\n';
}

class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::string next() {
    std::string line;
    if (!std::getline(in_, line)) fail("unexpected end of checkpoint");
    ++line_no_;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  }

  // "key a b c" -> fields after the key.
  std::vector<std::string> expect(std::string_view key) {
    std::istringstream ss(next());
    std::string word;
    ss >> word;
    if (word != key) fail("expected '" + std::string(key) + "', found '" + word + "'");
    std::vector<std::string> fields;
    while (ss >> word) fields.push_back(word);
    return fields;
  }

  template <typename T>
  T integer(const std::string& text) {
    T v{};
    const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
    if (res.ec != std::errc() || res.ptr != text.data() + text.size())
      fail("bad integer '" + text + "'");
    return v;
  }

  template <typename T>
  T single(std::string_view key) {
    const auto f = expect(key);
    if (f.size() != 1) fail("'" + std::string(key) + "' takes one value");
    return integer<T>(f[0]);
  }

  std::vector<double> values(std::string_view key, std::size_t expected) {
    const auto n = single<std::size_t>(key);
    if (n != expected)
      fail("'" + std::string(key) + "' has " + std::to_string(n) + " values, expected " +
           std::to_string(expected));
    std::vector<double> v(n);
    for (auto& x : v) {
      const std::string line = next();
      try {
        x = parse_double(line);
      } catch (const FormatError&) {
        fail("bad number '" + line + "'");
      }
    }
    return v;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("checkpoint line " + std::to_string(line_no_) + ": " + what);
  }

 private:
  std::istream& in_;
  int line_no_ = 0;
};

std::vector<double> flat_of(const PolicyParams& p) { return p.flat(); }

}  // namespace

std::uint64_t fnv1a64(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void write_checkpoint(std::ostream& out, const Checkpoint& ckpt) {
  const TrainingState& s = ckpt.state;
  out << kMagic << ' ' << kCheckpointVersion << '\n';
  write_layers(out, "policy", s.params.policy);
  write_layers(out, "value", s.params.value);
  out << "updates " << s.updates << '\n';
  out << "env_steps " << s.env_steps << '\n';
  out << "adam_step " << s.adam.step << '\n';
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(ckpt.config_hash));
  out << "config_hash " << hash << '\n';

  std::vector<std::string> lines;
  std::istringstream cfg(ckpt.config_text);
  for (std::string line; std::getline(cfg, line);) lines.push_back(line);
  out << "config " << lines.size() << '\n';
  for (const auto& l : lines) out << l << '\n';

  write_values(out, "params", flat_of(s.params));
  write_values(out, "adam_m", flat_of(s.adam.m));
  write_values(out, "adam_v", flat_of(s.adam.v));

  out << "episodes " << s.episodes.size() << '\n';
  for (const auto& e : s.episodes)
    out << e.env << ' ' << e.seed << ' ' << format_double(e.episode_return) << ' ' << e.length
        << ' ' << env::terminal_name(e.terminal) << ' ' << e.env_steps << '\n';
  out << "end\n";
}

Checkpoint read_checkpoint(std::istream& in) {
  LineReader r(in);
  const auto head = r.expect(kMagic);
  if (head.size() != 1 || r.integer<int>(head[0]) != kCheckpointVersion)
    r.fail("unsupported checkpoint version");

  auto read_sizes = [&](std::string_view name) {
    const auto f = r.expect("layers");
    if (f.empty() || f[0] != name) r.fail("expected layers for " + std::string(name));
    std::vector<int> sizes;
    for (std::size_t i = 1; i < f.size(); ++i) {
      sizes.push_back(r.integer<int>(f[i]));
      if (sizes.back() < 1) r.fail("layer sizes must be positive");
    }
    if (sizes.size() < 2) r.fail("a network needs at least two layer sizes");
    return sizes;
  };
  const auto policy_sizes = read_sizes("policy");
  const auto value_sizes = read_sizes("value");
  if (value_sizes.front() != policy_sizes.front() || value_sizes.back() != 1)
    r.fail("value network shape does not match the policy");

  Checkpoint ckpt;
  TrainingState& s = ckpt.state;
  s.params.policy = Mlp::zeros(policy_sizes);
  s.params.value = Mlp::zeros(value_sizes);
  s.params.log_std = Eigen::VectorXd::Zero(policy_sizes.back());
  s.updates = r.single<int>("updates");
  s.env_steps = r.single<std::int64_t>("env_steps");
  s.adam = AdamState::zeros_like(s.params);
  s.adam.step = r.single<std::int64_t>("adam_step");
  {
    const auto f = r.expect("config_hash");
    if (f.size() != 1) r.fail("config_hash takes one value");
    const auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), ckpt.config_hash, 16);
    if (res.ec != std::errc() || res.ptr != f[0].data() + f[0].size()) r.fail("bad config_hash");
  }
  const auto n_lines = r.single<std::size_t>("config");
  for (std::size_t i = 0; i < n_lines; ++i) ckpt.config_text += r.next() + "\n";

  const std::size_t n = s.params.size();
  s.params.assign(r.values("params", n));
  s.adam.m.assign(r.values("adam_m", n));
  s.adam.v.assign(r.values("adam_v", n));

  const auto n_episodes = r.single<std::size_t>("episodes");
  s.episodes.reserve(n_episodes);
  for (std::size_t i = 0; i < n_episodes; ++i) {
    std::istringstream ss(r.next());
    std::vector<std::string> f;
    for (std::string w; ss >> w;) f.push_back(w);
    if (f.size() != 6) r.fail("episode rows have 6 fields");
    EpisodeRecord e;
    e.env = r.integer<int>(f[0]);
    e.seed = r.integer<std::uint64_t>(f[1]);
    try {
      e.episode_return = parse_double(f[2]);
    } catch (const FormatError&) {
      r.fail("bad episode return '" + f[2] + "'");
    }
    e.length = r.integer<int>(f[3]);
    const auto kind = env::terminal_from_name(f[4]);
    if (!kind) r.fail("unknown terminal '" + f[4] + "'");
    e.terminal = *kind;
    e.env_steps = r.integer<std::int64_t>(f[5]);
    s.episodes.push_back(e);
  }
  r.expect("end");
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& checkpoint) {
  std::ostringstream out;
  write_checkpoint(out, checkpoint);
  write_file_atomic(path, out.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  return read_checkpoint(in);
}

}  // namespace trajrl::policy
