#pragma once

#include <complex>
#include <functional>
#include <string>

namespace csm {

using cplx = std::complex<double>;

// External one-particle potential v, evaluated at complex-rotated
// coordinates z = x e^{i theta}. `derivative` is dv/dz; it feeds the
// analytic theta-derivative of the scaled Hamiltonian.
struct Potential {
  std::string name;
  std::function<cplx(cplx)> value;
  std::function<cplx(cplx)> derivative;
};

/// v(x) = 0.5 x^2 e^{-x^2/5}: a well with no bound states, only resonances.
Potential open_well();

/// v(x) = x^2 / 2.
Potential harmonic();

/// "open-well" or "harmonic"; throws ConfigError otherwise.
Potential potential_by_name(const std::string& name);

}  // namespace csm
