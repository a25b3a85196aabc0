#pragma once

#include <stdexcept>
#include <string>

namespace swarmtab {

// Malformed configuration or schema violation. Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Unusable input data (bad CSV, degenerate columns, ...). Maps to CLI exit code 3.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace swarmtab
