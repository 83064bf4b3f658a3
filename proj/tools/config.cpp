#include "config.hpp"

#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "nahm/errors.hpp"
#include "nahm/models.hpp"

namespace nahm::cli {

namespace {
std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string where(int line, const std::string& field) {
  std::string s = line > 0 ? "line " + std::to_string(line) : "command line";
  return field.empty() ? s : s + ", field '" + field + "'";
}

double parse_double(const std::string& s, int line, const std::string& key) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (trim(s.substr(pos)).empty()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(line, key, "not a number: '" + s + "'");
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  return out;
}
}  // namespace

ConfigError::ConfigError(int line, const std::string& field, const std::string& msg)
    : std::runtime_error(where(line, field) + ": " + msg), line_(line), field_(field) {}

RawConfig RawConfig::parse(const std::string& text) {
  RawConfig c;
  std::stringstream ss(text);
  std::string raw;
  int line = 0;
  while (std::getline(ss, raw)) {
    ++line;
    auto hash = raw.find('#');
    std::string l = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (l.empty()) continue;
    auto eq = l.find('=');
    if (eq == std::string::npos) throw ConfigError(line, "", "expected 'key = value'");
    std::string key = trim(l.substr(0, eq)), value = trim(l.substr(eq + 1));
    if (key.empty()) throw ConfigError(line, "", "empty key");
    for (char ch : key)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '.' || ch == '_'))
        throw ConfigError(line, key, "invalid character in key");
    if (c.entries_.count(key)) throw ConfigError(line, key, "duplicate key (first on line " +
                                                                std::to_string(c.entries_[key].line) + ")");
    c.entries_[key] = {value, line};
  }
  return c;
}

RawConfig RawConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError(0, "--config", "cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return parse(ss.str());
}

void RawConfig::set(const std::string& assignment) {
  auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError(0, assignment, "expected key=value");
  entries_[trim(assignment.substr(0, eq))] = {trim(assignment.substr(eq + 1)), 0};
}

const RawEntry& RawConfig::entry(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw ConfigError(0, key, "required key missing");
  used_[key] = true;
  return it->second;
}

std::string RawConfig::str(const std::string& key) const { return entry(key).value; }
std::string RawConfig::str(const std::string& key, const std::string& def) const {
  return has(key) ? str(key) : def;
}

double RawConfig::num(const std::string& key) const {
  const auto& e = entry(key);
  return parse_double(e.value, e.line, key);
}
double RawConfig::num(const std::string& key, double def) const { return has(key) ? num(key) : def; }

long RawConfig::integer(const std::string& key, long def) const {
  if (!has(key)) return def;
  const auto& e = entry(key);
  double v = parse_double(e.value, e.line, key);
  if (v != std::floor(v)) throw ConfigError(e.line, key, "expected an integer");
  return static_cast<long>(v);
}

std::vector<double> RawConfig::list(const std::string& key) const {
  const auto& e = entry(key);
  std::vector<double> out;
  for (const auto& s : split(e.value, ',')) out.push_back(parse_double(s, e.line, key));
  return out;
}
std::vector<double> RawConfig::list(const std::string& key, const std::vector<double>& def) const {
  return has(key) ? list(key) : def;
}

Vec3 RawConfig::vec3(const std::string& key) const {
  auto v = list(key);
  if (v.size() != 3) throw ConfigError(entry(key).line, key, "expected three comma-separated numbers");
  return Vec3(v[0], v[1], v[2]);
}
Vec3 RawConfig::vec3(const std::string& key, const Vec3& def) const { return has(key) ? vec3(key) : def; }

std::vector<Vec3> RawConfig::vec3_list(const std::string& key) const {
  const auto& e = entry(key);
  std::vector<Vec3> out;
  for (const auto& item : split(e.value, ';')) {
    auto v = split(item, ',');
    if (v.size() != 3) throw ConfigError(e.line, key, "expected 'x,y,z; x,y,z; ...'");
    out.emplace_back(parse_double(v[0], e.line, key), parse_double(v[1], e.line, key),
                     parse_double(v[2], e.line, key));
  }
  return out;
}

std::vector<std::string> RawConfig::unused() const {
  std::vector<std::string> out;
  for (const auto& [k, e] : entries_)
    if (!used_.count(k)) out.push_back(k);
  return out;
}

RunConfig build_config(const RawConfig& raw) {
  RunConfig c;
  c.raw = raw;
  const RawConfig& r = c.raw;
  c.disc.t_max = r.num("disc.t_max", c.disc.t_max);
  c.disc.n_t = static_cast<int>(r.integer("disc.n_t", c.disc.n_t));
  c.disc.fourier_cut = static_cast<int>(r.integer("disc.fourier_cut", c.disc.fourier_cut));
  c.disc.fd_order = static_cast<int>(r.integer("disc.fd_order", c.disc.fd_order));
  try {
    c.disc.validate();
  } catch (const Error& e) {
    throw ConfigError(0, "disc", e.what());
  }

  c.model.name = r.str("model.name", "abelian");
  try {
    if (c.model.name == "abelian") {
      Vec3 wm = r.vec3("model.w_minus", Vec3(0.13, 0.21, 0.37));
      Vec3 wp = r.vec3("model.w_plus", Vec3(0.29, 0.27, 0.41));
      std::string prof = r.str("model.profile", "linear_smoothed");
      if (prof != "linear_smoothed" && prof != "tanh") throw ConfigError(0, "model.profile", "unknown profile " + prof);
      std::optional<double> beta;
      if (r.has("model.beta")) beta = r.num("model.beta");
      AbelianPath p = make_abelian_path(wm, wp, prof == "tanh" ? Profile::tanh : Profile::linear_smoothed,
                                        r.num("model.t_flat", 2.0), r.num("model.kappa", 1.0), beta);
      c.model.path = std::make_shared<const ConnectionPath>(p.path);
    } else if (c.model.name == "flat") {
      Vec3 w = r.vec3("model.w");
      c.model.path = std::make_shared<const ConnectionPath>(std::make_shared<FlatSource>(w), w, w,
                                                            r.num("model.beta", 1.0), c.disc);
    } else if (c.model.name == "perturbed_flat") {
      c.model.path = std::make_shared<const ConnectionPath>(
          make_perturbed_flat(r.vec3("model.w"), r.num("model.eps", 0.01), r.num("model.beta", 1.0),
                              static_cast<std::uint64_t>(r.integer("model.seed", 1)),
                              static_cast<int>(r.integer("model.cut", 1))));
    } else if (c.model.name == "file") {
      c.model.path = std::make_shared<const ConnectionPath>(import_path(r.str("model.path")));
    } else {
      throw ConfigError(0, "model.name", "unknown model '" + c.model.name + "'");
    }
  } catch (const Error& e) {
    throw ConfigError(0, "model", std::string(e.name()) + ": " + e.what());
  }
  if (c.disc.t_max * c.model.path->beta() < 3)
    throw ConfigError(0, "disc.t_max", "t_max * beta = " + std::to_string(c.disc.t_max * c.model.path->beta()) +
                                           " < 3");

  c.out_dir = r.str("output.dir", c.out_dir);
  c.format = r.str("output.format", c.format);
  if (c.format != "json" && c.format != "csv") throw ConfigError(0, "output.format", "expected json or csv");
  c.seed = static_cast<unsigned long long>(r.integer("run.seed", static_cast<long>(c.seed)));
  c.workers = static_cast<int>(r.integer("run.workers", 1));
  if (c.workers < 1) throw ConfigError(0, "run.workers", "must be >= 1");

  std::error_code ec;
  std::filesystem::create_directories(c.out_dir, ec);
  std::ofstream probe(std::filesystem::path(c.out_dir) / ".write_probe");
  if (!probe) throw ConfigError(0, "output.dir", "not writable: " + c.out_dir);
  probe.close();
  std::filesystem::remove(std::filesystem::path(c.out_dir) / ".write_probe", ec);
  return c;
}

}  // namespace nahm::cli
