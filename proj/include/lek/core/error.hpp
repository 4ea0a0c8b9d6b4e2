#pragma once

#include <stdexcept>
#include <string>

namespace lek {

// Error taxonomy shared by all modules. The CLI maps categories to exit
// codes: config -> 2, backend -> 3, numeric -> 4, anything else -> 1.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class MediaError : public Error {
public:
    using Error::Error;
};

class EmptyInputError : public Error {
public:
    using Error::Error;
};

class GeometryError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class IndexError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class BackendError : public Error {
public:
    using Error::Error;
};

// Divergence during a training loop (loss became non-finite).
class TrainingError : public Error {
public:
    TrainingError(const std::string& msg, long step) : Error(msg), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

// Divergence during per-frame latent optimization.
class OptimizationError : public Error {
public:
    OptimizationError(const std::string& msg, long iteration)
        : Error(msg), iteration_(iteration) {}
    long iteration() const { return iteration_; }

private:
    long iteration_;
};

} // namespace lek
