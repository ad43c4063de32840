#pragma once

#include <stdexcept>
#include <string>

namespace tvl {

// Raised when an operation's input violates its contract. CLI maps to exit 1.
struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// Raised when a bounded search gives up without a witness. CLI maps to exit 2.
struct SearchExhausted : std::runtime_error {
    explicit SearchExhausted(const std::string& stage, const std::string& what)
        : std::runtime_error(stage + ": " + what), stage_(stage) {}
    const std::string& stage() const { return stage_; }

private:
    std::string stage_;
};

inline void require(bool cond, const std::string& msg) {
    if (!cond) throw PreconditionError(msg);
}

}  // namespace tvl
