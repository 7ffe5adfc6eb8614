#pragma once

#include <stdexcept>
#include <string>

namespace lsttn {

// Error taxonomy mapped to CLI exit codes: config/validation/layout -> 2,
// io/parse -> 3, numeric divergence -> 4.

struct ConfigError : std::runtime_error {
	explicit ConfigError(const std::string& m) : std::runtime_error("config error: " + m) {}
};

struct ValidationError : std::runtime_error {
	explicit ValidationError(const std::string& m) : std::runtime_error("validation error: " + m) {}
};

struct LayoutError : std::runtime_error {
	explicit LayoutError(const std::string& m) : std::runtime_error("layout error: " + m) {}
};

struct IoError : std::runtime_error {
	explicit IoError(const std::string& m) : std::runtime_error("io error: " + m) {}
};

struct ParseError : std::runtime_error {
	explicit ParseError(const std::string& m) : std::runtime_error("parse error: " + m) {}
};

struct NumericError : std::runtime_error {
	explicit NumericError(const std::string& m) : std::runtime_error("numeric error: " + m) {}
};

struct DegenerateDataError : std::runtime_error {
	explicit DegenerateDataError(const std::string& m) : std::runtime_error("degenerate data: " + m) {}
};

} // namespace lsttn
