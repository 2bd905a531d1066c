#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace blaschke {

/// Invalid input or an unsatisfiable request: malformed file, parameter out of
/// range, precondition violated by the caller. Mapped to exit code 1 by the CLI.
class spec_error : public std::runtime_error {
public:
    explicit spec_error(const std::string& what) : std::runtime_error(what) {}
};

/// A numerical gate tripped: residual out of bounds, count mismatch, lost
/// track, ambiguous clustering. gate() names the check. Mapped to exit code 2.
class numeric_error : public std::runtime_error {
public:
    numeric_error(std::string gate, const std::string& what)
        : std::runtime_error(gate + ": " + what), gate_(std::move(gate)) {}

    const std::string& gate() const noexcept { return gate_; }

private:
    std::string gate_;
};

} // namespace blaschke
