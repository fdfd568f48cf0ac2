#pragma once

#include <string>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <gsl/gsl_version.h>
#include "json.hpp"

namespace dirachom {

inline constexpr const char* kVersion = "0.1.0";

inline nlohmann::ordered_json version_info() {
  return {{"dirachom", kVersion},
          {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                        std::to_string(EIGEN_MINOR_VERSION)},
          {"boost", BOOST_LIB_VERSION},
          {"gsl", GSL_VERSION},
          {"compiler", __VERSION__}};
}

}  // namespace dirachom
