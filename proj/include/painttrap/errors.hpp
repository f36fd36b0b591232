#ifndef PAINTTRAP_ERRORS_HPP
#define PAINTTRAP_ERRORS_HPP

#include <array>
#include <stdexcept>
#include <string>

namespace painttrap {

// Configuration / schema problems. CLI exit code 1.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Filesystem failures (unreadable input, unwritable output). CLI exit code 3.
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Physics failures (untrapped, negative temperature, saddle point).
// CLI exit code 2 under --strict.
struct PhysicsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// No bounded potential minimum: the descent left the trapping region.
struct UntrappedError : PhysicsError {
    std::array<double, 3> last_point{};
    explicit UntrappedError(const std::string& what, std::array<double, 3> p = {})
        : PhysicsError(what), last_point(p) {}
};

// Minimizer did not converge; carries the best point found.
struct MinimizationError : PhysicsError {
    std::array<double, 3> best_point{};
    explicit MinimizationError(const std::string& what, std::array<double, 3> p = {})
        : PhysicsError(what), best_point(p) {}
};

// Hessian has a negative eigenvalue at the reported minimum.
struct SaddlePointError : PhysicsError {
    using PhysicsError::PhysicsError;
};

} // namespace painttrap

#endif
