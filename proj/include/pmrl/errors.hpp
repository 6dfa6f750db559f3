#pragma once

#include <stdexcept>
#include <string>

namespace pmrl {

// Error taxonomy shared across the library. Everything derives from
// std::runtime_error so callers can catch coarsely, tests catch precisely.

struct InvalidTaskParameter : std::runtime_error {
    explicit InvalidTaskParameter(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidIndex : std::runtime_error {
    explicit InvalidIndex(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidParameter : std::runtime_error {
    explicit InvalidParameter(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidState : std::runtime_error {
    explicit InvalidState(const std::string& what) : std::runtime_error(what) {}
};

struct NonConvergence : std::runtime_error {
    explicit NonConvergence(const std::string& what) : std::runtime_error(what) {}
};

struct BoundUndefined : std::runtime_error {
    explicit BoundUndefined(const std::string& what) : std::runtime_error(what) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace pmrl
