#include "klpred/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "klpred/shrinkage.hpp"

namespace klpred {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void fail_line(std::size_t line, const std::string& what) {
  std::ostringstream os;
  os << "config line " << line << ": " << what;
  throw std::invalid_argument(os.str());
}

[[noreturn]] void fail_key(const std::string& section, const std::string& key,
                           const std::string& what) {
  throw std::invalid_argument("config [" + section + "] " + key + ": " +
                              what);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_num(const std::string& section, const std::string& key,
                 const std::string& text) {
  const std::string t = trim(text);
  if (t.empty()) fail_key(section, key, "empty number");
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    fail_key(section, key, "not a number: '" + t + "'");
  }
  return x;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail_line(line_no, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) fail_line(line_no, "empty section name");
      cfg.data_[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail_line(line_no, "expected key = value");
    if (section.empty()) fail_line(line_no, "key outside any section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) fail_line(line_no, "empty key");
    if (!cfg.data_[section].emplace(key, value).second) {
      fail_line(line_no, "duplicate key '" + key + "'");
    }
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

bool Config::has(const std::string& section, const std::string& key) const {
  const auto s = data_.find(section);
  return s != data_.end() && s->second.count(key) > 0;
}

std::string Config::str(const std::string& section,
                        const std::string& key) const {
  const auto s = data_.find(section);
  if (s != data_.end()) {
    const auto k = s->second.find(key);
    if (k != s->second.end()) return k->second;
  }
  fail_key(section, key, "missing");
}

std::string Config::str_or(const std::string& section, const std::string& key,
                           const std::string& fallback) const {
  return has(section, key) ? str(section, key) : fallback;
}

double Config::num(const std::string& section, const std::string& key) const {
  return parse_num(section, key, str(section, key));
}

double Config::num_or(const std::string& section, const std::string& key,
                      double fallback) const {
  return has(section, key) ? num(section, key) : fallback;
}

int Config::integer(const std::string& section, const std::string& key) const {
  const double x = num(section, key);
  const double r = std::nearbyint(x);
  if (x != r || std::abs(x) > std::numeric_limits<int>::max()) {
    fail_key(section, key, "not an integer: '" + str(section, key) + "'");
  }
  return static_cast<int>(r);
}

int Config::integer_or(const std::string& section, const std::string& key,
                       int fallback) const {
  return has(section, key) ? integer(section, key) : fallback;
}

std::uint64_t Config::u64(const std::string& section,
                          const std::string& key) const {
  const std::string t = trim(str(section, key));
  if (t.empty() || t.front() == '-') {
    fail_key(section, key, "not a nonnegative integer: '" + t + "'");
  }
  errno = 0;
  char* end = nullptr;
  const unsigned long long x = std::strtoull(t.c_str(), &end, 10);
  if (end != t.c_str() + t.size() || errno == ERANGE) {
    // Accept scientific notation for counts like n = 1e5.
    const double d = parse_num(section, key, t);
    const double r = std::nearbyint(d);
    if (d != r || d < 0.0 || d > 1e18) {
      fail_key(section, key, "not a nonnegative integer: '" + t + "'");
    }
    return static_cast<std::uint64_t>(r);
  }
  return static_cast<std::uint64_t>(x);
}

std::uint64_t Config::u64_or(const std::string& section,
                             const std::string& key,
                             std::uint64_t fallback) const {
  return has(section, key) ? u64(section, key) : fallback;
}

std::vector<double> Config::num_list(const std::string& section,
                                     const std::string& key) const {
  std::vector<double> out;
  for (const auto& part : split(str(section, key), ',')) {
    out.push_back(parse_num(section, key, part));
  }
  return out;
}

Eigen::VectorXd Config::vec(const std::string& section,
                            const std::string& key) const {
  const std::vector<double> xs = num_list(section, key);
  return Eigen::Map<const Eigen::VectorXd>(xs.data(),
                                           static_cast<long>(xs.size()));
}

std::vector<Eigen::VectorXd> Config::vec_list(const std::string& section,
                                              const std::string& key) const {
  std::vector<Eigen::VectorXd> out;
  for (const auto& group : split(str(section, key), ';')) {
    std::vector<double> xs;
    for (const auto& part : split(group, ',')) {
      xs.push_back(parse_num(section, key, part));
    }
    out.push_back(Eigen::Map<const Eigen::VectorXd>(
        xs.data(), static_cast<long>(xs.size())));
  }
  return out;
}

std::vector<std::string> Config::str_list(const std::string& section,
                                          const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& part : split(str(section, key), ',')) {
    const std::string t = trim(part);
    if (t.empty()) fail_key(section, key, "empty list element");
    out.push_back(t);
  }
  return out;
}

GaussianModel model_from_config(const Config& cfg) {
  return make_model(cfg.integer("model", "p"), cfg.num("model", "v_x"),
                    cfg.num("model", "v_y"));
}

namespace {

MixingDensity mixing_from_config(const Config& cfg) {
  const std::string name = cfg.str_or("prior", "mixing", "strawderman");
  if (name == "strawderman") {
    return StrawdermanMixing{cfg.num_or("prior", "a", 0.5)};
  }
  if (name == "inverse-gamma") {
    return InverseGammaMixing{cfg.num("prior", "alpha"),
                              cfg.num("prior", "beta")};
  }
  fail_key("prior", "mixing", "unknown mixing '" + name + "'");
}

Prior simple_prior_from_config(const Config& cfg, const std::string& type,
                               const GaussianModel& model) {
  if (type == "uniform") return Prior(UniformPrior{});
  Eigen::VectorXd center;
  if (cfg.has("prior", "center")) center = cfg.vec("prior", "center");
  if (type == "gaussian") {
    GaussianPrior g;
    g.sigma2 = cfg.num("prior", "sigma2");
    g.center = center;
    return Prior(std::move(g));
  }
  if (type == "harmonic") return Prior(HarmonicPrior{center});
  if (type == "scale-mixture") {
    ScaleMixturePrior s;
    s.h = mixing_from_config(cfg);
    s.v0 = cfg.num_or("prior", "v0", model.v_x);
    s.center = center;
    return Prior(std::move(s));
  }
  fail_key("prior", "type", "unknown prior type '" + type + "'");
}

}  // namespace

Prior prior_from_config(const Config& cfg, const GaussianModel& model) {
  const std::string type = cfg.str("prior", "type");
  Prior pr;
  if (type == "subspace") {
    const Prior base =
        simple_prior_from_config(cfg, cfg.str("prior", "base_type"), model);
    const auto cols = cfg.vec_list("prior", "basis");
    Eigen::MatrixXd basis(model.p, static_cast<long>(cols.size()));
    for (std::size_t j = 0; j < cols.size(); ++j) {
      if (cols[j].size() != model.p) {
        fail_key("prior", "basis", "column dimension mismatch");
      }
      basis.col(static_cast<long>(j)) = cols[j];
    }
    pr = toward_subspace(base, basis);
  } else if (type == "multiple-shrinkage") {
    const Prior base = simple_prior_from_config(
        cfg, cfg.str_or("prior", "base_type", "harmonic"), model);
    const auto centers = cfg.vec_list("prior", "centers");
    std::vector<double> weights;
    if (cfg.has("prior", "weights")) {
      weights = cfg.num_list("prior", "weights");
    } else {
      weights.assign(centers.size(), 1.0 / static_cast<double>(centers.size()));
    }
    pr = multiple_shrinkage(centers, weights, base);
  } else {
    pr = simple_prior_from_config(cfg, type, model);
  }
  return validate_prior(pr, model.p);
}

}  // namespace klpred
