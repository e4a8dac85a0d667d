#pragma once

#include <map>
#include <string>
#include <vector>

namespace interbench {

struct RegistryEntry {
  std::string risk;
  std::string kind;  // attacks | defenses | metrics
  std::string name;

  std::string path() const { return risk + "." + kind + "." + name; }
};

// Full inventory of risks, attacks, defenses, and metrics.
const std::vector<RegistryEntry>& registry();

bool is_registered_attack(const std::string& name);
bool is_registered_defense(const std::string& name);

// Report metric key -> human description. Dynamic per-class keys use the
// prefix form "recon_mse_c".
const std::map<std::string, std::string>& metric_definitions();
bool is_registered_metric(const std::string& report_key);

}  // namespace interbench
