#include "wavemgt/model_params.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "wavemgt/error.hpp"

namespace wavemgt {

double ModelParams::lambda1() const {
  const double k = std::numbers::pi / domain.length;
  return k * k;
}

double ModelParams::coercivity() const { return 1.0 - std::abs(alpha) / lambda1(); }

void ModelParams::validate() const {
  domain.validate();
  std::ostringstream msg;
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    msg << "tau > 0 violated: " << tau;
  } else if (!(b > tau) || !std::isfinite(b)) {
    msg << "b > tau violated: " << b << " <= " << tau;
  } else if (!std::isfinite(alpha) || !(std::abs(alpha) < lambda1())) {
    msg << "|alpha| < lambda_1 violated: " << std::abs(alpha) << " >= " << lambda1();
  } else {
    source().validate();
    return;
  }
  throw ValidationError(msg.str());
}

}  // namespace wavemgt
