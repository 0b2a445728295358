#ifndef KINKSCAN_ERRORS_HPP
#define KINKSCAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kinkscan {

// Error categories used across the library. Tests match on the code rather
// than the message text.
enum class errc {
    invalid_argument,     // bad parameter / precondition violation
    regime,               // parameter outside the regime a formula is valid for
    boundary,             // evaluation point outside (h, 1-h) or similar
    missing_latent,       // oracle quantities requested but latents absent
    insufficient_data,    // window too small for a plug-in estimate
    unsupported_scenario, // scenario composition the library rejects
    no_extrema,           // degenerate flat profile in localisation
    numeric,              // quadrature non-convergence, overflow
    study_invalid,        // Monte Carlo study failed its own sanity gates
    parse,                // config / CSV parse failure
    io                    // file system failure
};

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace kinkscan

#endif
