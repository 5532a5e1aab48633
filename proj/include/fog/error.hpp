#pragma once

#include <stdexcept>
#include <string>

namespace fog {

// Root of every error raised by the fog libraries. Modules derive their own
// categories so callers can catch at whatever granularity they need.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace fog
