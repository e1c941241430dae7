#pragma once

#include <stdexcept>
#include <string>

namespace lgbplus {

// Error taxonomy, mirrored by the CLI exit codes: config fault = 2,
// data fault = 3, internal invariant violation = 4.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InternalError : std::logic_error {
    using std::logic_error::logic_error;
};

} // namespace lgbplus
