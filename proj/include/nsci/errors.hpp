#pragma once

#include <stdexcept>
#include <string>

namespace nsci {

// Every failure raised by the toolkit carries a short machine-readable kind
// next to the human message, so the CLI can map it to an exit code and the
// reports can name the stage that failed.
class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what)
        : std::runtime_error(kind + ": " + what), kind_(std::move(kind)) {}

    const std::string& kind() const noexcept { return kind_; }

private:
    std::string kind_;
};

namespace err {
inline constexpr const char* config = "config";
inline constexpr const char* invalid_constant = "invalid-constant";
inline constexpr const char* schedule_overflow = "schedule-overflow";
inline constexpr const char* grid_mismatch = "grid-mismatch";
inline constexpr const char* nonzero_mean = "nonzero-mean";
inline constexpr const char* domain = "domain";
inline constexpr const char* construction = "construction";
inline constexpr const char* quadrature = "quadrature";
inline constexpr const char* under_resolution = "under-resolution";
inline constexpr const char* r_perp_too_large = "r_perp too large";
inline constexpr const char* hypothesis = "hypothesis";
inline constexpr const char* support = "support-hypothesis";
inline constexpr const char* precondition = "precondition";
inline constexpr const char* assembly = "assembly";
inline constexpr const char* usage = "usage";
}  // namespace err

}  // namespace nsci
