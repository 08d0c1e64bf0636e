#pragma once

#include <stdexcept>
#include <string>

namespace sda {

// Problems with user-supplied data: unreadable files, bad cells,
// missing columns, invalid outcome values.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

// Problems with user-supplied configuration: bad flags, invalid
// parameter combinations, unknown scenario names.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sda
