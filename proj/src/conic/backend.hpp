#pragma once

#include <memory>
#include <string>

#include "ipm.hpp"

namespace covsteer::conic {

class ConicBackend {
 public:
  virtual ~ConicBackend() = default;
  virtual std::string name() const = 0;
  virtual ConicSolution solve(const ConicProgram& program, const IpmSettings& settings) const = 0;
};

// Known names: "ipm". Throws InvalidArgument for anything else.
std::unique_ptr<ConicBackend> make_backend(const std::string& name);

// Backend named by COVSTEER_BACKEND, "ipm" when unset or empty.
std::unique_ptr<ConicBackend> default_backend();

}  // namespace covsteer::conic
