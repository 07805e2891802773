#include "pwsde/rng.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>

namespace pwsde {

double normal_quantile(double u) {
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * u);
}

double KeyedStream::normal(std::uint64_t counter) const {
    return normal_quantile(uniform(counter));
}

}  // namespace pwsde
