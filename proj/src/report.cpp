#include "dgc/report.hpp"

namespace dgc {

ResidualFamily* ResidualReport::find(const std::string& name) {
  for (auto& f : families)
    if (f.name == name) return &f;
  return nullptr;
}

const ResidualFamily* ResidualReport::find(const std::string& name) const {
  for (const auto& f : families)
    if (f.name == name) return &f;
  return nullptr;
}

bool ResidualReport::all_pass() const {
  for (const auto& f : families)
    if (!f.pass) return false;
  return true;
}

std::vector<std::string> ResidualReport::failing_families() const {
  std::vector<std::string> out;
  for (const auto& f : families)
    if (!f.pass) out.push_back(f.name);
  return out;
}

} // namespace dgc
