#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace collsum {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file or record. `location()` is the 1-based record or line
/// number, or 0 when the error is not tied to a position.
class InputError : public Error {
public:
    InputError(const std::string& what, std::size_t location = 0)
        : Error(location ? what + " (at " + std::to_string(location) + ")" : what),
          location_(location) {}

    std::size_t location() const noexcept { return location_; }

private:
    std::size_t location_;
};

/// Transient backend failure (unreachable host, rate limit, 5xx). Safe to retry.
class RetryableError : public Error {
public:
    using Error::Error;
};

/// The prompt does not fit in the completion backend's context window.
class ContextOverflowError : public Error {
public:
    ContextOverflowError(std::size_t prompt_tokens, std::size_t window)
        : Error("prompt of " + std::to_string(prompt_tokens) + " tokens exceeds context window of " +
                std::to_string(window)),
          prompt_tokens_(prompt_tokens), window_(window) {}

    std::size_t prompt_tokens() const noexcept { return prompt_tokens_; }
    std::size_t window() const noexcept { return window_; }

private:
    std::size_t prompt_tokens_;
    std::size_t window_;
};

} // namespace collsum
