#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fnl {

// Runtime failure of a numerical routine. `detail` carries the offending
// quantities (last quadrature estimates, extrapolation sequences, residuals)
// so callers and the CLI can serialize them.
class error : public std::runtime_error {
public:
    explicit error(const std::string& what, std::vector<double> detail = {})
        : std::runtime_error(what), detail_(std::move(detail)) {}

    const std::vector<double>& detail() const { return detail_; }

private:
    std::vector<double> detail_;
};

// Precondition violations (bad arguments, evaluation at excluded points).
class invalid_argument : public error {
public:
    using error::error;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw invalid_argument(msg);
}

}  // namespace fnl
