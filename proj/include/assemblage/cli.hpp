// Apache License, Version 2.0, refer to LICENSE.txt

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

namespace assemblage::cli {

enum ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kData = 2,
  kNumeric = 3,
};

// Resolved parameters of one invocation. `parameters` feed the hash; `paths`
// and `workers` do not, so moving files or changing the worker cap leaves
// outputs byte-identical.
struct RunConfig {
  std::string command;
  nlohmann::json parameters = nlohmann::json::object();
  nlohmann::json paths = nlohmann::json::object();
  std::size_t workers = 1;

  std::string canonical() const;
  std::uint64_t hash() const;
  nlohmann::json to_json() const;
  static RunConfig from_json(const nlohmann::json& doc);

  bool operator==(const RunConfig&) const = default;
};

// Entry point; `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace assemblage::cli
