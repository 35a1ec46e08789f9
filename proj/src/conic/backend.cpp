#include "backend.hpp"

#include <cstdlib>

#include "../error.hpp"

namespace covsteer::conic {

namespace {

class IpmBackend final : public ConicBackend {
 public:
  std::string name() const override { return "ipm"; }
  ConicSolution solve(const ConicProgram& program, const IpmSettings& settings) const override {
    return solve_ipm(program, settings);
  }
};

}  // namespace

std::unique_ptr<ConicBackend> make_backend(const std::string& name) {
  if (name == "ipm") return std::make_unique<IpmBackend>();
  throw Error(ErrorCode::kInvalidArgument, "unknown conic backend '" + name + "'");
}

std::unique_ptr<ConicBackend> default_backend() {
  const char* env = std::getenv("COVSTEER_BACKEND");
  return make_backend(env && *env ? env : "ipm");
}

}  // namespace covsteer::conic
