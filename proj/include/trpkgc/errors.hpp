#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace trpkgc {

// Malformed input file. Carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& path, std::size_t line, const std::string& what)
        : std::runtime_error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Symbol not present in a frozen vocabulary.
class LookupError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Tensor or vector dimensions disagree.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// No valid corrupted triple could be drawn.
class SaturationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Training produced a non-finite loss.
class NumericalError : public std::runtime_error {
public:
    NumericalError(int epoch, std::size_t batch, const std::string& what)
        : std::runtime_error("epoch " + std::to_string(epoch) + ", batch " + std::to_string(batch) + ": " + what),
          epoch_(epoch), batch_(batch) {}

    int epoch() const noexcept { return epoch_; }
    std::size_t batch() const noexcept { return batch_; }

private:
    int epoch_;
    std::size_t batch_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CheckpointError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace trpkgc
