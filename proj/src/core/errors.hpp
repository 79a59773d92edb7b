#ifndef WIGSOLVE_CORE_ERRORS_HPP
#define WIGSOLVE_CORE_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace wig {

/// Invalid or inconsistent configuration. `field` names the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error("config error [" + field + "]: " + what),
          field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Vector lengths or array shapes do not match.
class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& what)
        : std::runtime_error("dimension mismatch: " + what) {}
};

/// NaN/Inf encountered, divergence, or a numeric precondition violated.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what)
        : std::runtime_error("numeric error: " + what) {}
};

/// Filesystem / serialization failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what)
        : std::runtime_error("io error: " + what) {}
};

} // namespace wig

#endif
