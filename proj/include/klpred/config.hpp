#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "klpred/model.hpp"

namespace klpred {

// Minimal INI reader: [section] headers, key = value lines, '#' comments,
// blank lines.  Keys are unique within a section.  Parse errors carry line
// numbers; lookup errors name the section and key.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& section, const std::string& key) const;

  std::string str(const std::string& section, const std::string& key) const;
  std::string str_or(const std::string& section, const std::string& key,
                     const std::string& fallback) const;
  double num(const std::string& section, const std::string& key) const;
  double num_or(const std::string& section, const std::string& key,
                double fallback) const;
  int integer(const std::string& section, const std::string& key) const;
  int integer_or(const std::string& section, const std::string& key,
                 int fallback) const;
  std::uint64_t u64(const std::string& section, const std::string& key) const;
  std::uint64_t u64_or(const std::string& section, const std::string& key,
                       std::uint64_t fallback) const;

  // Comma-separated numbers; ';' separates vectors in a list.
  std::vector<double> num_list(const std::string& section,
                               const std::string& key) const;
  Eigen::VectorXd vec(const std::string& section,
                      const std::string& key) const;
  std::vector<Eigen::VectorXd> vec_list(const std::string& section,
                                        const std::string& key) const;
  std::vector<std::string> str_list(const std::string& section,
                                    const std::string& key) const;

 private:
  std::map<std::string, std::map<std::string, std::string>> data_;
};

// [model] requires p, v_x, v_y.
GaussianModel model_from_config(const Config& cfg);

// [prior] type = uniform | gaussian | harmonic | scale-mixture | subspace |
// multiple-shrinkage, plus the family's parameters; the result is validated
// against the model dimension.
Prior prior_from_config(const Config& cfg, const GaussianModel& model);

}  // namespace klpred
