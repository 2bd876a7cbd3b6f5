#include "csm/potential.hpp"

#include "csm/errors.hpp"

namespace csm {

Potential open_well() {
  return {"open-well",
          [](cplx z) { return 0.5 * z * z * std::exp(-z * z / 5.0); },
          [](cplx z) { return z * std::exp(-z * z / 5.0) * (1.0 - z * z / 5.0); }};
}

Potential harmonic() {
  return {"harmonic", [](cplx z) { return 0.5 * z * z; }, [](cplx z) { return z; }};
}

Potential potential_by_name(const std::string& name) {
  if (name == "open-well") return open_well();
  if (name == "harmonic") return harmonic();
  throw ConfigError("unknown potential '" + name + "' (expected open-well or harmonic)");
}

}  // namespace csm
